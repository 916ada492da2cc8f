#include <doctest.h>

#include <cmath>
#include <random>

#include "offsim/radio.hpp"
#include "offsim/scenario.hpp"

using namespace offsim;

namespace {

// Two-user toy environment with hand-picked gains; no fading draws involved.
radio::Environment toy_env(double g00, double g01, double g10, double g11) {
    radio::Environment env;
    env.num_users = 2;
    env.num_rrhs = 1;
    env.antennas = 1;
    env.bandwidth_hz = 20e6;
    env.noise_w = 2e-11;
    env.p_max_w = {0.5, 0.5};
    env.fronthaul_bps = 0.6e9;
    env.serving = {0, 0};
    env.gain = {{g00, g01}, {g10, g11}};
    return env;
}

radio::Environment drawn_env(std::uint64_t seed, int users = 6) {
    ScenarioConfig cfg = default_config();
    cfg.classes = {{users, 1e6, 1e5, 0.040}};
    return generate_instance(cfg, seed).env;
}

}  // namespace

TEST_SUITE_BEGIN("radio");

TEST_CASE("pathloss reference point and floor") {
    // 128.1 + 37.6 log10(0.1) = 128.1 - 37.6
    CHECK(radio::pathloss_db(0.1) == doctest::Approx(90.5).epsilon(1e-12));
    CHECK(radio::mean_gain(0.1) == doctest::Approx(8.9125093813374556e-10).epsilon(1e-12));
    // distances below one meter clamp to one meter
    CHECK(radio::pathloss_db(0.0) == radio::pathloss_db(1e-3));
    CHECK(radio::pathloss_db(1e-9) == radio::pathloss_db(1e-3));
    CHECK(radio::pathloss_db(0.2) > radio::pathloss_db(0.1));
}

TEST_CASE("noise power over the band") {
    // -150 dBm/Hz -> 1e-18 W/Hz; times 20 MHz
    CHECK(radio::noise_power_w(-150.0, 20e6) == doctest::Approx(2e-11).epsilon(1e-12));
}

TEST_CASE("sinr and rate on a single-user instance") {
    auto env = toy_env(1e-10, 0.0, 0.0, 1e-10);
    std::vector<double> rho = {0.1, 0.0};
    CHECK(radio::sinr(env, rho, 0) == doctest::Approx(0.5).epsilon(1e-12));
    // 2e7 * log2(1.5)
    CHECK(radio::rate(env, rho, 0) == doctest::Approx(11699250.014423124).epsilon(1e-12));
    CHECK(radio::tx_latency(1e5, radio::rate(env, rho, 0)) ==
          doctest::Approx(1e5 / 11699250.014423124).epsilon(1e-12));
    CHECK(radio::rate(env, {0.0, 0.0}, 0) == 0.0);
    CHECK(std::isinf(radio::tx_latency(1e5, 0.0)));
}

TEST_CASE("interference lowers the sinr") {
    auto env = toy_env(1e-10, 2e-11, 2e-11, 1e-10);
    std::vector<double> rho = {0.1, 0.1};
    // own 1e-11 over (2e-12 + 2e-11)
    CHECK(radio::sinr(env, rho, 0) == doctest::Approx(1e-11 / 2.2e-11).epsilon(1e-12));
    std::vector<double> alone = {0.1, 0.0};
    CHECK(radio::rate(env, rho, 0) < radio::rate(env, alone, 0));
}

TEST_CASE("rate equals h - g") {
    auto env = drawn_env(7);
    std::mt19937_64 rng(11);
    std::vector<double> rho(env.num_users);
    for (int trial = 0; trial < 50; ++trial) {
        for (auto& p : rho) p = 0.5 * (rng() >> 11) * (1.0 / 9007199254740992.0);
        for (int k = 0; k < env.num_users; ++k) {
            double r = radio::rate(env, rho, k);
            double split = radio::h_val(env, rho, k) - radio::g_val(env, rho, k);
            if (rho[k] > 0.0)
                CHECK(split == doctest::Approx(r).epsilon(1e-9));
        }
    }
}

TEST_CASE("gradients match central finite differences") {
    auto env = drawn_env(3);
    std::mt19937_64 rng(5);
    std::vector<double> rho(env.num_users), gh, gg;
    // The function values sit near 1e9, so the probe step has to clear the
    // rounding noise of the subtraction; 1e-5 W balances truncation against
    // cancellation. Components far below the dominant one are held to an
    // absolute band via scale() instead of a pure relative one.
    double step = 1e-5 * 0.5;
    for (int trial = 0; trial < 20; ++trial) {
        for (auto& p : rho) p = 1e-3 + 0.499 * (rng() >> 11) * (1.0 / 9007199254740992.0);
        for (int k = 0; k < env.num_users; ++k) {
            radio::grad_h(env, rho, k, gh);
            radio::grad_g(env, rho, k, gg);
            CHECK(gg[k] == 0.0);
            double ref_h = 0.0, ref_g = 0.0;
            for (int j = 0; j < env.num_users; ++j) {
                ref_h = std::max(ref_h, std::abs(gh[j]));
                ref_g = std::max(ref_g, std::abs(gg[j]));
            }
            for (int j = 0; j < env.num_users; ++j) {
                auto hi = rho, lo = rho;
                hi[j] += step;
                lo[j] -= step;
                double fd_h = (radio::h_val(env, hi, k) - radio::h_val(env, lo, k)) / (2 * step);
                double fd_g = (radio::g_val(env, hi, k) - radio::g_val(env, lo, k)) / (2 * step);
                CHECK(gh[j] == doctest::Approx(fd_h).epsilon(1e-4).scale(1e-4 * ref_h));
                if (j != k) CHECK(gg[j] == doctest::Approx(fd_g).epsilon(1e-4).scale(1e-4 * ref_g));
            }
        }
    }
}

TEST_CASE("gradient vectors survive a 5e-10 probe step in norm") {
    // With a probe this small the per-component quotients drown in rounding
    // noise wherever the component is weak, but the whole-vector agreement
    // must still hold to 1e-4 because the large components carry the norm.
    auto env = drawn_env(17);
    std::mt19937_64 rng(7);
    std::vector<double> rho(env.num_users), gh, gg;
    double step = 1e-9 * 0.5;
    for (int trial = 0; trial < 20; ++trial) {
        for (auto& p : rho) p = 1e-3 + 0.499 * (rng() >> 11) * (1.0 / 9007199254740992.0);
        for (int k = 0; k < env.num_users; ++k) {
            radio::grad_h(env, rho, k, gh);
            radio::grad_g(env, rho, k, gg);
            double err_h = 0.0, nrm_h = 0.0, err_g = 0.0, nrm_g = 0.0;
            for (int j = 0; j < env.num_users; ++j) {
                auto hi = rho, lo = rho;
                hi[j] += step;
                lo[j] -= step;
                double fd_h = (radio::h_val(env, hi, k) - radio::h_val(env, lo, k)) / (2 * step);
                double fd_g = (radio::g_val(env, hi, k) - radio::g_val(env, lo, k)) / (2 * step);
                err_h += (gh[j] - fd_h) * (gh[j] - fd_h);
                nrm_h += gh[j] * gh[j];
                err_g += (gg[j] - fd_g) * (gg[j] - fd_g);
                nrm_g += gg[j] * gg[j];
            }
            CHECK(std::sqrt(err_h) <= 1e-4 * std::sqrt(nrm_h));
            CHECK(std::sqrt(err_g) <= 1e-4 * std::sqrt(nrm_g));
        }
    }
}

TEST_CASE("linearizations anchor and majorize") {
    auto env = drawn_env(9);
    std::mt19937_64 rng(13);
    std::vector<double> r0(env.num_users), r1(env.num_users);
    for (int trial = 0; trial < 30; ++trial) {
        for (auto& p : r0) p = 1e-6 + 0.49 * (rng() >> 11) * (1.0 / 9007199254740992.0);
        for (auto& p : r1) p = 1e-6 + 0.49 * (rng() >> 11) * (1.0 / 9007199254740992.0);
        for (int k = 0; k < env.num_users; ++k) {
            CHECK(radio::g_hat(env, r0, r0, k) ==
                  doctest::Approx(radio::g_val(env, r0, k)).epsilon(1e-12));
            CHECK(radio::h_hat(env, r0, r0, k) ==
                  doctest::Approx(radio::h_val(env, r0, k)).epsilon(1e-12));
            // first-order bound of a concave function
            double slack_g = radio::g_hat(env, r0, r1, k) - radio::g_val(env, r1, k);
            double slack_h = radio::h_hat(env, r0, r1, k) - radio::h_val(env, r1, k);
            CHECK(slack_g >= -1e-6);
            CHECK(slack_h >= -1e-6);
        }
    }
}

TEST_CASE("cross gains shrink with the array size") {
    // With MRC the expected cross gain is the interferer's mean channel gain,
    // independent of M, while the own gain grows like M. Checked in sample
    // mean over 1000 draws, factor-2 band.
    std::vector<std::array<double, 2>> users = {{60.0, 0.0}, {0.0, 80.0}};
    std::vector<std::array<double, 2>> rrhs = {{0.0, 0.0}};
    std::vector<int> serving = {0, 0};
    std::mt19937_64 rng(17);
    double qj = radio::mean_gain(0.08);
    double qk = radio::mean_gain(0.06);
    double cross = 0.0, own = 0.0;
    const int draws = 1000;
    for (int i = 0; i < draws; ++i) {
        auto env = radio::generate_channels(rng, users, rrhs, serving, 32, 20e6, 2e-11, 0.5,
                                            0.6e9);
        cross += env.gain[0][1];
        own += env.gain[0][0];
    }
    cross /= draws;
    own /= draws;
    CHECK(cross > qj / 2.0);
    CHECK(cross < qj * 2.0);
    CHECK(own > 32 * qk / 2.0);
    CHECK(own < 32 * qk * 2.0);
}

TEST_CASE("rate is monotone in own power") {
    auto env = drawn_env(21);
    std::vector<double> rho(env.num_users, 0.05);
    double prev = -1.0;
    for (double p = 0.01; p <= 0.5; p += 0.01) {
        rho[0] = p;
        double r = radio::rate(env, rho, 0);
        CHECK(r > prev);
        prev = r;
    }
}

TEST_CASE("fronthaul aggregation") {
    auto env = toy_env(1e-10, 0.0, 0.0, 1e-10);
    env.serving = {0, 0};
    std::vector<double> rates = {0.25e9, 0.30e9};
    CHECK(radio::fronthaul_usage(env, rates, 0) == doctest::Approx(0.55e9));
    CHECK(radio::fronthaul_ok(env, rates, 0.0));
    rates[1] = 0.40e9;
    CHECK_FALSE(radio::fronthaul_ok(env, rates, 0.0));
    CHECK(radio::fronthaul_ok(env, rates, 0.06e9));
}

TEST_SUITE_END();
