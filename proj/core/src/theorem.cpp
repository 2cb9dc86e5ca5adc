#include "dualgraph/theorem.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "dualgraph/error.hpp"
#include "dualgraph/fusion.hpp"
#include "dualgraph/units.hpp"

namespace dgr {
namespace {

std::mt19937_64 trial_rng(std::uint64_t seed, std::size_t index) {
    const auto i = static_cast<std::uint64_t>(index);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
    return std::mt19937_64(seq);
}

// log(e^s + K - 1) for s >= 0.
double log_peak_normalizer(double s, double k) { return s + std::log1p((k - 1.0) * std::exp(-s)); }

double peak_mass(double s, double k) { return 1.0 / (1.0 + (k - 1.0) * std::exp(-s)); }

std::vector<double> peak_distribution(double s, std::size_t k, std::size_t peak) {
    const double m = peak_mass(s, static_cast<double>(k));
    const double rest = std::exp(-log_peak_normalizer(s, static_cast<double>(k)));
    std::vector<double> p(k, rest);
    p[peak] = m;
    return p;
}

std::size_t other_answer(std::mt19937_64& rng, std::size_t k, std::size_t y) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 2);
    const std::size_t r = pick(rng);
    return r >= y ? r + 1 : r;
}

// Hit probabilities of the two peaks for one trial.
std::pair<double, double> hit_probabilities(const SyntheticScenario& sc, double sb, double sd) {
    const double k = static_cast<double>(sc.answer_count);
    if (sc.calibrated) return {peak_mass(sb, k), peak_mass(sd, k)};
    return sb > sd ? std::pair{0.0, 1.0} : std::pair{1.0, 0.0};
}

struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
    void add(double x) {
        sum += x;
        sum_sq += x * x;
    }
    double mean(std::size_t n) const { return sum / static_cast<double>(n); }
    double se(std::size_t n) const {
        if (n < 2) return 0.0;
        const double dn = static_cast<double>(n);
        const double var = std::max(0.0, (sum_sq - sum * sum / dn) / (dn - 1.0));
        return std::sqrt(var / dn);
    }
};

struct TrialRecord {
    ConditionalLosses c;
    double realized_b = 0.0;
    double realized_d = 0.0;
    double realized_f = 0.0;
    bool violation = false;
    double residual = 0.0;
};

TrialRecord run_trial(const SyntheticScenario& sc, std::size_t index) {
    const ChannelSample s = sample_channel_pair(sc, index);
    TrialRecord r;
    r.c = conditional_losses(sc, s.s_breadth, s.s_depth);

    r.realized_b = -std::log(s.p_breadth[s.truth]);
    r.realized_d = -std::log(s.p_depth[s.truth]);
    const AnswerDistribution fused =
        fuse(make_distribution(std::vector<std::string>(sc.answer_count), s.p_breadth),
             make_distribution(std::vector<std::string>(sc.answer_count), s.p_depth), r.c.alpha);
    r.realized_f = -std::log(fused.probs[s.truth]);
    r.violation = check_pointwise_bound(s.p_breadth, s.p_depth, r.c.alpha, s.truth) < -1e-9;

    const double delta = r.c.depth - r.c.breadth;
    const double bound = (1.0 - r.c.alpha) * r.c.breadth + r.c.alpha * r.c.depth;
    const double min_term = std::min(r.c.breadth, r.c.depth);
    r.residual = std::abs(bound - (min_term + (r.c.alpha - r.c.oracle_alpha) * delta));
    return r;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(6);
    os << x;
    return os.str();
}

}  // namespace

void SyntheticScenario::validate() const {
    if (answer_count < 2) throw ConfigError("scenario answer_count must be at least 2");
    if (!(sharpness_breadth > 0.0) || !(sharpness_depth > 0.0)) {
        throw ConfigError("scenario sharpness must be positive");
    }
    if (trials < 1) throw ConfigError("scenario trials must be at least 1");
}

ChannelSample sample_channel_pair(const SyntheticScenario& sc, std::size_t index) {
    auto rng = trial_rng(sc.rng_seed, index);
    std::exponential_distribution<double> expo(1.0);
    std::uniform_int_distribution<std::size_t> answer(0, sc.answer_count - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    ChannelSample out;
    out.s_breadth = sc.sharpness_breadth * expo(rng);
    out.s_depth = sc.sharpness_depth * expo(rng);
    out.truth = answer(rng);

    const auto [hit_b, hit_d] = hit_probabilities(sc, out.s_breadth, out.s_depth);
    // Both draws are consumed in every mode so the stream layout is fixed.
    const double ub = unit(rng);
    const double ud = unit(rng);
    const std::size_t miss_b = other_answer(rng, sc.answer_count, out.truth);
    const std::size_t miss_d = other_answer(rng, sc.answer_count, out.truth);
    const std::size_t peak_b = ub < hit_b ? out.truth : miss_b;
    const std::size_t peak_d = ud < hit_d ? out.truth : miss_d;

    out.p_breadth = peak_distribution(out.s_breadth, sc.answer_count, peak_b);
    out.p_depth = peak_distribution(out.s_depth, sc.answer_count, peak_d);
    return out;
}

double check_pointwise_bound(const std::vector<double>& p_breadth, const std::vector<double>& p_depth,
                             double alpha, std::size_t y) {
    const std::vector<std::string> ids(p_breadth.size());
    const AnswerDistribution fused =
        fuse(make_distribution(ids, p_breadth), make_distribution(ids, p_depth), alpha);
    const double lb = -std::log(p_breadth[y]);
    const double ld = -std::log(p_depth[y]);
    return (1.0 - alpha) * lb + alpha * ld - (-std::log(fused.probs[y]));
}

BoundTriple random_bound_triple(std::uint64_t seed, std::size_t index) {
    auto rng = trial_rng(seed, index);
    const std::size_t k = 2 + index % 7;
    std::gamma_distribution<double> flat(1.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto simplex = [&] {
        // Raising a flat Dirichlet draw to a random power spreads samples
        // from near-uniform to near-degenerate.
        const double power = std::exp(4.0 * unit(rng) - 1.0);
        std::vector<double> p(k);
        double total = 0.0;
        for (double& x : p) {
            x = std::pow(flat(rng), power);
            total += x;
        }
        for (double& x : p) x /= total;
        for (double& x : p) x = std::max(x, 1e-300);
        return p;
    };
    BoundTriple t;
    t.p_breadth = simplex();
    t.p_depth = simplex();
    t.alpha = unit(rng);
    t.y = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
    return t;
}

double peak_entropy(double s, std::size_t answer_count) {
    const double k = static_cast<double>(answer_count);
    return log_peak_normalizer(s, k) - s * peak_mass(s, k);
}

double conditional_fused_loss(const SyntheticScenario& sc, double sb, double sd, double alpha) {
    const double k = static_cast<double>(sc.answer_count);
    const auto [pb, pd] = hit_probabilities(sc, sb, sd);
    const double b = (1.0 - alpha) * sb;
    const double d = alpha * sd;
    const double u = b + d;
    const double log_same = log_peak_normalizer(u, k);
    const double hi = std::max({b, d, 0.0});
    const double log_split = hi + std::log(std::exp(b - hi) + std::exp(d - hi) + (k - 2.0) * std::exp(-hi));

    const double both_miss = (1.0 - pb) * (1.0 - pd);
    double loss = pb * pd * (log_same - u) + pb * (1.0 - pd) * (log_split - b) +
                  (1.0 - pb) * pd * (log_split - d);
    if (both_miss > 0.0) {
        loss += both_miss / (k - 1.0) * log_same + both_miss * (k - 2.0) / (k - 1.0) * log_split;
    }
    return loss;
}

ConditionalLosses conditional_losses(const SyntheticScenario& sc, double sb, double sd) {
    const double k = static_cast<double>(sc.answer_count);
    const auto [pb, pd] = hit_probabilities(sc, sb, sd);
    ConditionalLosses c;
    c.breadth = log_peak_normalizer(sb, k) - pb * sb;
    c.depth = log_peak_normalizer(sd, k) - pd * sd;
    c.h_breadth = peak_entropy(sb, sc.answer_count);
    c.h_depth = peak_entropy(sd, sc.answer_count);
    c.alpha = entropy_gate(c.h_breadth, c.h_depth);
    c.oracle_alpha = c.depth - c.breadth < 0.0 ? 1.0 : 0.0;
    c.fused = conditional_fused_loss(sc, sb, sd, c.alpha);
    return c;
}

bool RiskReport::fused_beats_better_channel(double k) const {
    return risk_fused <= std::min(risk_breadth, risk_depth) + k * se_gap;
}

bool RiskReport::oracle_inequality_holds() const { return risk_fused <= risk_oracle + gate_regret + 1e-9; }

bool RiskReport::regret_within_tolerance(double k) const { return gate_regret <= k * se_gate_regret; }

RiskReport estimate_risks(const SyntheticScenario& sc, std::size_t threads) {
    sc.validate();
    std::vector<TrialRecord> records(sc.trials);
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < sc.trials; i += stride) records[i] = run_trial(sc, i);
    };
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, sc.trials);
    if (workers == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    }

    Moments mb, md, mf, mo, mg, rb, rd, rf, alpha;
    std::vector<double> fused(sc.trials), better_b(sc.trials), better_d(sc.trials);
    RiskReport r;
    r.trials = sc.trials;
    for (std::size_t i = 0; i < sc.trials; ++i) {
        const auto& t = records[i];
        mb.add(t.c.breadth);
        md.add(t.c.depth);
        mf.add(t.c.fused);
        mo.add(std::min(t.c.breadth, t.c.depth));
        mg.add(std::abs(t.c.depth - t.c.breadth) * std::abs(t.c.alpha - t.c.oracle_alpha));
        rb.add(t.realized_b);
        rd.add(t.realized_d);
        rf.add(t.realized_f);
        alpha.add(t.c.alpha);
        r.bound_violations += t.violation ? 1 : 0;
        r.decomposition_residual = std::max(r.decomposition_residual, t.residual);
    }
    const std::size_t n = sc.trials;
    r.risk_breadth = mb.mean(n);
    r.risk_depth = md.mean(n);
    r.risk_fused = mf.mean(n);
    r.risk_oracle = mo.mean(n);
    r.gate_regret = mg.mean(n);
    r.se_breadth = mb.se(n);
    r.se_depth = md.se(n);
    r.se_fused = mf.se(n);
    r.se_gate_regret = mg.se(n);
    r.realized_breadth = rb.mean(n);
    r.realized_depth = rd.mean(n);
    r.realized_fused = rf.mean(n);
    r.mean_alpha = alpha.mean(n);

    const bool breadth_better = r.risk_breadth <= r.risk_depth;
    Moments gap;
    for (const auto& t : records) {
        gap.add(t.c.fused - (breadth_better ? t.c.breadth : t.c.depth));
    }
    r.se_gap = gap.se(n);
    return r;
}

std::string risk_report_text(const SyntheticScenario& sc, const RiskReport& r) {
    std::ostringstream os;
    os << "scenario K=" << sc.answer_count << " sharpness_B=" << format_number(sc.sharpness_breadth)
       << " sharpness_D=" << format_number(sc.sharpness_depth)
       << (sc.calibrated ? " calibrated" : " anti-calibrated") << " trials=" << sc.trials
       << " seed=" << sc.rng_seed << "\n";
    os << "risk_B       " << fmt(r.risk_breadth) << " (se " << fmt(r.se_breadth) << ", realized "
       << fmt(r.realized_breadth) << ")\n";
    os << "risk_D       " << fmt(r.risk_depth) << " (se " << fmt(r.se_depth) << ", realized "
       << fmt(r.realized_depth) << ")\n";
    os << "risk_fused   " << fmt(r.risk_fused) << " (se " << fmt(r.se_fused) << ", realized "
       << fmt(r.realized_fused) << ")\n";
    os << "risk_oracle  " << fmt(r.risk_oracle) << "\n";
    os << "gate_regret  " << fmt(r.gate_regret) << " (se " << fmt(r.se_gate_regret) << ")\n";
    os << "mean_alpha   " << fmt(r.mean_alpha) << "\n";
    os << "bound_violations " << r.bound_violations << "\n";
    os << "oracle_inequality " << (r.oracle_inequality_holds() ? "holds" : "violated") << "\n";
    os << "fused_vs_better_channel " << (r.fused_beats_better_channel() ? "within 3 se" : "worse")
       << " (gap se " << fmt(r.se_gap) << ")\n";
    return os.str();
}

std::string risk_report_csv_header() {
    return "answer_count,sharpness_b,sharpness_d,calibrated,trials,seed,risk_b,risk_d,risk_fused,"
           "risk_oracle,gate_regret,se_b,se_d,se_fused,se_gate_regret,se_gap,bound_violations,"
           "mean_alpha\n";
}

std::string risk_report_csv_row(const SyntheticScenario& sc, const RiskReport& r) {
    std::ostringstream os;
    os << sc.answer_count << ',' << format_number(sc.sharpness_breadth) << ','
       << format_number(sc.sharpness_depth) << ',' << (sc.calibrated ? 1 : 0) << ',' << sc.trials
       << ',' << sc.rng_seed;
    for (double x : {r.risk_breadth, r.risk_depth, r.risk_fused, r.risk_oracle, r.gate_regret,
                     r.se_breadth, r.se_depth, r.se_fused, r.se_gate_regret, r.se_gap}) {
        os << ',' << format_number(x);
    }
    os << ',' << r.bound_violations << ',' << format_number(r.mean_alpha) << '\n';
    return os.str();
}

}  // namespace dgr
