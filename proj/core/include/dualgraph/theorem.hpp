#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dgr {

/// Synthetic two-channel scenario. Each trial draws per-channel sharpness
/// s = sharpness * Exp(1) and a uniform true answer y. A channel is a peak
/// distribution over K answers: mass e^s / (e^s + K - 1) on its peak and
/// 1 / (e^s + K - 1) elsewhere.
///  - calibrated: each peak lands on y with probability equal to its own
///    peak mass, so the expected log-loss given entropy equals the entropy.
///  - anti-calibrated: the sharper channel's peak is wrong and the flatter
///    channel's peak is on y.
struct SyntheticScenario {
    std::size_t answer_count = 4;
    double sharpness_breadth = 2.0;
    double sharpness_depth = 2.0;
    bool calibrated = true;
    std::size_t trials = 10000;
    std::uint64_t rng_seed = 20240601;

    void validate() const;
};

struct ChannelSample {
    std::vector<double> p_breadth;
    std::vector<double> p_depth;
    std::size_t truth = 0;
    double s_breadth = 0.0;
    double s_depth = 0.0;
};

/// Reproducible from (scenario.rng_seed, index) alone.
ChannelSample sample_channel_pair(const SyntheticScenario& scenario, std::size_t index);

/// [(1 - a) l_B + a l_D] - (-log P_fused(y)), with P_fused the log-linear
/// pool at gate a. Non-negative up to rounding.
double check_pointwise_bound(const std::vector<double>& p_breadth, const std::vector<double>& p_depth,
                             double alpha, std::size_t y);

/// Random simplex points (flat Dirichlet, some sharpened), gate and answer
/// for the bound sweep; answer count cycles through 2..8.
struct BoundTriple {
    std::vector<double> p_breadth;
    std::vector<double> p_depth;
    double alpha = 0.5;
    std::size_t y = 0;
};
BoundTriple random_bound_triple(std::uint64_t seed, std::size_t index);

/// Closed-form pieces of one trial's conditional losses given sharpness.
struct ConditionalLosses {
    double breadth = 0.0;   // E[l_B | H]
    double depth = 0.0;     // E[l_D | H]
    double fused = 0.0;     // E[l_F | H] under gate alpha
    double alpha = 0.5;     // entropy gate
    double oracle_alpha = 0.0;
    double h_breadth = 0.0;
    double h_depth = 0.0;
};

/// Peak-distribution entropy log(e^s + K - 1) - s * m.
double peak_entropy(double sharpness, std::size_t answer_count);

ConditionalLosses conditional_losses(const SyntheticScenario& scenario, double s_breadth,
                                     double s_depth);

/// Expected fused log-loss at gate `alpha` for one trial.
double conditional_fused_loss(const SyntheticScenario& scenario, double s_breadth, double s_depth,
                              double alpha);

struct RiskReport {
    std::size_t trials = 0;
    double risk_breadth = 0.0;
    double risk_depth = 0.0;
    double risk_fused = 0.0;
    double risk_oracle = 0.0;
    double gate_regret = 0.0;
    std::size_t bound_violations = 0;
    // Monte Carlo standard errors of the per-trial means.
    double se_breadth = 0.0;
    double se_depth = 0.0;
    double se_fused = 0.0;
    double se_gate_regret = 0.0;
    /// Standard error of the paired per-trial gap between fused loss and the
    /// better channel's loss.
    double se_gap = 0.0;
    /// Realized (sampled) log-loss means, for comparison with the
    /// conditional means above.
    double realized_breadth = 0.0;
    double realized_depth = 0.0;
    double realized_fused = 0.0;
    /// Largest |bound - (min + (alpha - alpha*) Delta)| over trials.
    double decomposition_residual = 0.0;
    double mean_alpha = 0.0;

    /// risk_fused <= min(risk_breadth, risk_depth) + k * se_gap
    bool fused_beats_better_channel(double k = 3.0) const;
    /// risk_fused <= risk_oracle + gate_regret, up to 1e-9
    bool oracle_inequality_holds() const;
    /// gate_regret <= k * se_gate_regret
    bool regret_within_tolerance(double k = 3.0) const;
};

/// Runs every trial (optionally on several threads; results do not depend on
/// the count) and averages.
RiskReport estimate_risks(const SyntheticScenario& scenario, std::size_t threads = 1);

std::string risk_report_text(const SyntheticScenario& scenario, const RiskReport& report);
std::string risk_report_csv_header();
std::string risk_report_csv_row(const SyntheticScenario& scenario, const RiskReport& report);

}  // namespace dgr
