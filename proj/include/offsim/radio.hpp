#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace offsim::radio {

// Uplink radio state after MRC combining. Channel vectors are reduced to the
// K x K effective gain matrix at generation time and then discarded:
//   gain[k][k] = ||h_{u(k),k}||^2
//   gain[k][j] = |h_{u(k),k}^H h_{u(k),j}|^2 / ||h_{u(k),k}||^2   (j != k)
// where u(k) is the RRH serving user k.
struct Environment {
    int num_users = 0;
    int num_rrhs = 0;
    int antennas = 0;
    double bandwidth_hz = 0.0;
    double noise_w = 0.0;  // sigma^2 over the full band
    std::vector<double> p_max_w;
    double fronthaul_bps = 0.0;  // per RRH
    std::vector<int> serving;    // user -> RRH
    std::vector<std::vector<double>> gain;
};

// 128.1 + 37.6 log10(d_km); distances below 1 m are clamped to 1 m.
double pathloss_db(double d_km);
// Mean channel gain Q = 10^(-PL/10).
double mean_gain(double d_km);

double noise_power_w(double noise_dbm_per_hz, double bandwidth_hz);

// i.i.d. CN(0,1) entries scaled by sqrt(Q(distance)), then folded into the
// gain matrix. Rayleigh draws use an explicit Box-Muller transform so the
// result is bit-reproducible for a given engine state.
Environment generate_channels(std::mt19937_64& rng,
                              const std::vector<std::array<double, 2>>& user_pos_m,
                              const std::vector<std::array<double, 2>>& rrh_pos_m,
                              const std::vector<int>& serving, int antennas, double bandwidth_hz,
                              double noise_w, double p_max_w, double fronthaul_bps);

double sinr(const Environment& env, const std::vector<double>& rho, int k);
// Achievable uplink rate, bps. Zero power means zero rate.
double rate(const Environment& env, const std::vector<double>& rho, int k);
// D/R; returns +inf for zero rate.
double tx_latency(double data_bits, double rate_bps);

// Difference-of-concave split of the rate: rate_k = h_k - g_k with
//   h_k = W log2(sum_j gain[k][j] rho_j + sigma^2)
//   g_k = W log2(sum_{j != k} gain[k][j] rho_j + sigma^2)
double h_val(const Environment& env, const std::vector<double>& rho, int k);
double g_val(const Environment& env, const std::vector<double>& rho, int k);
void grad_h(const Environment& env, const std::vector<double>& rho, int k,
            std::vector<double>& out);
void grad_g(const Environment& env, const std::vector<double>& rho, int k,
            std::vector<double>& out);

// First-order upper bounds at anchor rho0 (g and h are concave):
//   g_hat(rho) = g(rho0) + grad_g(rho0)^T (rho - rho0), same for h_hat.
double g_hat(const Environment& env, const std::vector<double>& rho0,
             const std::vector<double>& rho, int k);
double h_hat(const Environment& env, const std::vector<double>& rho0,
             const std::vector<double>& rho, int k);

// Aggregate uplink rate entering RRH u.
double fronthaul_usage(const Environment& env, const std::vector<double>& rate_bps, int u);
bool fronthaul_ok(const Environment& env, const std::vector<double>& rate_bps, double tol_bps);

void write_gain_csv(const Environment& env, const std::string& path);

}  // namespace offsim::radio
