#include "offsim/radio.hpp"

#include <cassert>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace offsim::radio {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Strictly-in-(0,1) uniform from raw engine output; avoids the
// implementation-defined std:: distributions for reproducibility.
double uniform01(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

// Box-Muller pair, N(0,1) each.
void gauss_pair(std::mt19937_64& rng, double& z0, double& z1) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    double r = std::sqrt(-2.0 * std::log(u1));
    z0 = r * std::cos(2.0 * M_PI * u2);
    z1 = r * std::sin(2.0 * M_PI * u2);
}

double interference_den(const Environment& env, const std::vector<double>& rho, int k) {
    double den = env.noise_w;
    for (int j = 0; j < env.num_users; ++j) {
        if (j == k) continue;
        den += env.gain[k][j] * rho[j];
    }
    return den;
}

}  // namespace

double pathloss_db(double d_km) {
    if (d_km < 1e-3) d_km = 1e-3;  // 1 m floor
    return 128.1 + 37.6 * std::log10(d_km);
}

double mean_gain(double d_km) { return std::pow(10.0, -pathloss_db(d_km) / 10.0); }

double noise_power_w(double noise_dbm_per_hz, double bandwidth_hz) {
    return std::pow(10.0, noise_dbm_per_hz / 10.0) * 1e-3 * bandwidth_hz;
}

Environment generate_channels(std::mt19937_64& rng,
                              const std::vector<std::array<double, 2>>& user_pos_m,
                              const std::vector<std::array<double, 2>>& rrh_pos_m,
                              const std::vector<int>& serving, int antennas, double bandwidth_hz,
                              double noise_w, double p_max_w, double fronthaul_bps) {
    const int K = static_cast<int>(user_pos_m.size());
    const int U = static_cast<int>(rrh_pos_m.size());
    if (static_cast<int>(serving.size()) != K)
        throw std::invalid_argument("serving assignment size mismatch");

    Environment env;
    env.num_users = K;
    env.num_rrhs = U;
    env.antennas = antennas;
    env.bandwidth_hz = bandwidth_hz;
    env.noise_w = noise_w;
    env.p_max_w.assign(K, p_max_w);
    env.fronthaul_bps = fronthaul_bps;
    env.serving = serving;

    // h[u][k]: channel of user k at RRH u, CN(0, Q_{u,k} I_M). Draw order is
    // part of the reproducibility contract: users outer, RRHs inner, antennas
    // innermost.
    std::vector<std::vector<std::vector<std::complex<double>>>> h(
        U, std::vector<std::vector<std::complex<double>>>(K));
    for (int k = 0; k < K; ++k) {
        for (int u = 0; u < U; ++u) {
            double dx = user_pos_m[k][0] - rrh_pos_m[u][0];
            double dy = user_pos_m[k][1] - rrh_pos_m[u][1];
            double q = mean_gain(std::sqrt(dx * dx + dy * dy) / 1000.0);
            double s = std::sqrt(q / 2.0);
            auto& vec = h[u][k];
            vec.resize(antennas);
            for (int m = 0; m < antennas; ++m) {
                double z0, z1;
                gauss_pair(rng, z0, z1);
                vec[m] = {s * z0, s * z1};
            }
        }
    }

    env.gain.assign(K, std::vector<double>(K, 0.0));
    for (int k = 0; k < K; ++k) {
        int u = serving[k];
        double own = 0.0;
        for (int m = 0; m < antennas; ++m) own += std::norm(h[u][k][m]);
        env.gain[k][k] = own;
        for (int j = 0; j < K; ++j) {
            if (j == k) continue;
            std::complex<double> ip{0.0, 0.0};
            double other = 0.0;
            for (int m = 0; m < antennas; ++m) {
                ip += std::conj(h[u][k][m]) * h[u][j][m];
                other += std::norm(h[u][j][m]);
            }
            env.gain[k][j] = std::norm(ip) / own;
            assert(env.gain[k][j] <= other * (1.0 + 1e-9));  // Cauchy-Schwarz
        }
    }
    return env;
}

double sinr(const Environment& env, const std::vector<double>& rho, int k) {
    return env.gain[k][k] * rho[k] / interference_den(env, rho, k);
}

double rate(const Environment& env, const std::vector<double>& rho, int k) {
    if (rho[k] <= 0.0) return 0.0;
    return env.bandwidth_hz * std::log2(1.0 + sinr(env, rho, k));
}

double tx_latency(double data_bits, double rate_bps) {
    if (rate_bps <= 0.0) return std::numeric_limits<double>::infinity();
    return data_bits / rate_bps;
}

double h_val(const Environment& env, const std::vector<double>& rho, int k) {
    return env.bandwidth_hz * std::log2(interference_den(env, rho, k) + env.gain[k][k] * rho[k]);
}

double g_val(const Environment& env, const std::vector<double>& rho, int k) {
    return env.bandwidth_hz * std::log2(interference_den(env, rho, k));
}

void grad_h(const Environment& env, const std::vector<double>& rho, int k,
            std::vector<double>& out) {
    out.assign(env.num_users, 0.0);
    double den = interference_den(env, rho, k) + env.gain[k][k] * rho[k];
    double c = env.bandwidth_hz / (kLn2 * den);
    for (int j = 0; j < env.num_users; ++j) out[j] = c * env.gain[k][j];
}

void grad_g(const Environment& env, const std::vector<double>& rho, int k,
            std::vector<double>& out) {
    out.assign(env.num_users, 0.0);
    double c = env.bandwidth_hz / (kLn2 * interference_den(env, rho, k));
    for (int j = 0; j < env.num_users; ++j)
        out[j] = (j == k) ? 0.0 : c * env.gain[k][j];
}

double g_hat(const Environment& env, const std::vector<double>& rho0,
             const std::vector<double>& rho, int k) {
    std::vector<double> gr;
    grad_g(env, rho0, k, gr);
    double v = g_val(env, rho0, k);
    for (int j = 0; j < env.num_users; ++j) v += gr[j] * (rho[j] - rho0[j]);
    return v;
}

double h_hat(const Environment& env, const std::vector<double>& rho0,
             const std::vector<double>& rho, int k) {
    std::vector<double> gr;
    grad_h(env, rho0, k, gr);
    double v = h_val(env, rho0, k);
    for (int j = 0; j < env.num_users; ++j) v += gr[j] * (rho[j] - rho0[j]);
    return v;
}

double fronthaul_usage(const Environment& env, const std::vector<double>& rate_bps, int u) {
    double sum = 0.0;
    for (int k = 0; k < env.num_users; ++k)
        if (env.serving[k] == u) sum += rate_bps[k];
    return sum;
}

bool fronthaul_ok(const Environment& env, const std::vector<double>& rate_bps, double tol_bps) {
    for (int u = 0; u < env.num_rrhs; ++u)
        if (fronthaul_usage(env, rate_bps, u) > env.fronthaul_bps + tol_bps) return false;
    return true;
}

void write_gain_csv(const Environment& env, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os.precision(17);
    for (int k = 0; k < env.num_users; ++k) {
        for (int j = 0; j < env.num_users; ++j) {
            if (j) os << ',';
            os << env.gain[k][j];
        }
        os << '\n';
    }
}

}  // namespace offsim::radio
