// Acceptance driver: one PASS/FAIL line per criterion.

#include <algorithm>
#include <array>
#include <bitset>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <dualgraph/breadth_graph.hpp>
#include <dualgraph/depth_graph.hpp>
#include <dualgraph/embedding.hpp>
#include <dualgraph/error.hpp>
#include <dualgraph/evidence_chain.hpp>
#include <dualgraph/fusion.hpp>
#include <dualgraph/graph_io.hpp>
#include <dualgraph/merge.hpp>
#include <dualgraph/ops.hpp>
#include <dualgraph/outcome_io.hpp>
#include <dualgraph/pipeline.hpp>
#include <dualgraph/query.hpp>
#include <dualgraph/text.hpp>
#include <dualgraph/theorem.hpp>
#include <dualgraph/trace.hpp>

#include "test_support.hpp"

using namespace dgr;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

// Collects failed sub-checks; the first few are reported.
class Tally {
public:
    void expect(bool ok, const std::string& what) {
        ++checks_;
        if (ok) return;
        ++failures_;
        if (notes_.size() < 3) notes_.push_back(what);
    }
    std::size_t checks() const { return checks_; }
    Verdict verdict(const std::string& summary) const {
        std::string detail = summary;
        for (const auto& n : notes_) detail += "; " + n;
        if (failures_ > 0) detail += "; " + std::to_string(failures_) + " failed check(s)";
        return {failures_ == 0, detail};
    }

private:
    std::size_t checks_ = 0;
    std::size_t failures_ = 0;
    std::vector<std::string> notes_;
};

std::string fmt(double x, int precision = 4) {
    std::ostringstream os;
    os.precision(precision);
    os << x;
    return os.str();
}

const nlohmann::json& goldens() {
    static const auto j = nlohmann::json::parse(dgr_test::slurp(dgr_test::golden("fixture_graphs.json")));
    return j;
}

Trace fixture_trace(const std::string& name) { return parse_trace_file(dgr_test::fixture(name)); }

Query fixture_query(const std::string& name) { return parse_query(read_file(dgr_test::fixture(name))); }

const HashingEmbedder& embedder() {
    static const HashingEmbedder e;
    return e;
}

// Random admissible trace: strictly increasing ticks, inputs only to earlier
// events, kind invariants respected. Unit mixes make some carryovers fail.
Trace random_trace(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    static const std::vector<std::string> units{"acre", "acres", "thousand_acres", "person", "people", "furlong", ""};
    static const std::vector<std::string> terms{"grant", "census", "busy beaver", "TM-2", "tape"};

    Trace t;
    t.run_id = "rand" + std::to_string(seed);
    t.question_id = "q";
    const std::size_t n = 3 + pick(23);
    std::int64_t tick = 0;
    for (std::size_t i = 0; i < n; ++i) {
        TraceEvent e;
        char id[8];
        std::snprintf(id, sizeof id, "x%02zu", i);
        e.event_id = id;
        e.run_id = t.run_id;
        e.timestamp = (tick += 1 + static_cast<std::int64_t>(pick(3)));
        const std::size_t roll = pick(10);
        e.kind = roll < 3 ? EventKind::action : roll < 7 ? EventKind::artifact : roll < 9 ? EventKind::validator : EventKind::note;
        e.text = "step " + std::to_string(i) + " on [[" + terms[pick(terms.size())] + "]]";
        e.params_digest = "p" + std::to_string(pick(4));
        if (e.kind == EventKind::action) {
            e.tool = "tool" + std::to_string(pick(3));
            e.op_type = static_cast<OpType>(pick(5));
            if (pick(2)) e.unit = units[pick(units.size() - 1)];
        }
        if (e.kind == EventKind::artifact) {
            if (pick(4) == 0) {
                e.value = std::string("text ") + std::to_string(pick(5));
            } else {
                e.value = 0.5 * static_cast<double>(pick(400));
                const auto& u = units[pick(units.size())];
                if (!u.empty()) e.unit = u;
            }
        }
        const std::size_t status = pick(10);
        e.status = status < 7 ? EventStatus::ok : status < 9 ? EventStatus::fail : EventStatus::retry;
        for (std::size_t j = 0; j < i && e.inputs.size() < 3; ++j) {
            if (pick(5) == 0) e.inputs.push_back(t.events[j].event_id);
        }
        t.events.push_back(std::move(e));
    }
    return t;
}

// ---------------------------------------------------------------------------

Verdict holder_bound() {
    const std::size_t n = 100000;
    std::size_t violations = 0;
    double worst = std::numeric_limits<double>::infinity();
    std::set<std::size_t> counts;
    for (std::size_t i = 0; i < n; ++i) {
        const BoundTriple t = random_bound_triple(20240917, i);
        const double slack = check_pointwise_bound(t.p_breadth, t.p_depth, t.alpha, t.y);
        worst = std::min(worst, slack);
        if (!(slack >= -1e-9)) ++violations;
        counts.insert(t.p_breadth.size());
    }
    const bool all_k = counts == std::set<std::size_t>{2, 3, 4, 5, 6, 7, 8};
    return {violations == 0 && all_k,
            std::to_string(n) + " triples, K in 2..8" + (all_k ? "" : " (incomplete)") + ", " +
                std::to_string(violations) + " violations, min slack " + fmt(worst, 3)};
}

Verdict oracle_inequality() {
    const std::vector<std::pair<double, double>> sharpness{{1, 1}, {2, 2}, {1, 3}};
    std::size_t settings = 0, fused_ok = 0, regret_ok = 0, anti_ok = 0, bound_ok = 0;
    double worst_ratio = 0.0;
    for (const auto& [sb, sd] : sharpness) {
        for (std::size_t k : {2u, 4u, 8u}) {
            SyntheticScenario sc;
            sc.answer_count = k;
            sc.sharpness_breadth = sb;
            sc.sharpness_depth = sd;
            sc.trials = 10000;
            const RiskReport r = estimate_risks(sc);
            ++settings;
            fused_ok += r.fused_beats_better_channel(3.0);
            regret_ok += r.regret_within_tolerance(3.0);
            bound_ok += r.bound_violations == 0 && r.oracle_inequality_holds();
            worst_ratio = std::max(worst_ratio, r.gate_regret / r.se_gate_regret);

            sc.calibrated = false;
            const RiskReport a = estimate_risks(sc);
            anti_ok += a.gate_regret > 0.0 && a.oracle_inequality_holds();
        }
    }
    const bool pass = fused_ok == settings && regret_ok == settings && anti_ok == settings && bound_ok == settings;
    return {pass, "fused<=min+3se " + std::to_string(fused_ok) + "/" + std::to_string(settings) +
                      ", gate_regret<=3se " + std::to_string(regret_ok) + "/" + std::to_string(settings) +
                      " (max regret/se " + fmt(worst_ratio, 3) + ")" + ", bound+oracle " +
                      std::to_string(bound_ok) + "/" + std::to_string(settings) +
                      ", anti-calibrated regret>0 " + std::to_string(anti_ok) + "/" + std::to_string(settings)};
}

Verdict fusion_algebra() {
    Tally t;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto random_probs = [&](std::size_t k) {
        std::exponential_distribution<double> e(1.0);
        std::vector<double> p(k);
        double z = 0;
        for (double& x : p) z += (x = e(rng));
        for (double& x : p) x /= z;
        return p;
    };
    auto ids = [](std::size_t k) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < k; ++i) out.push_back("a" + std::to_string(i));
        return out;
    };

    t.expect(entropy_gate(0.3, 0.3) == 0.5, "equal entropies give 1/2");
    t.expect(std::abs(entropy_gate(std::log(2.0), 0.0) - 2.0 / 3) < 1e-12, "H_B=log2, H_D=0 gives 2/3");

    for (int i = 0; i < 2000; ++i) {
        const std::size_t k = 2 + rng() % 7;
        const auto a = ids(k);
        const auto p = make_distribution(a, random_probs(k));
        const auto q = make_distribution(a, random_probs(k));
        const double alpha = unit(rng);

        const auto same = fuse(p, p, alpha);
        double err = 0;
        for (std::size_t j = 0; j < k; ++j) err = std::max(err, std::abs(same.probs[j] - p.probs[j]));
        t.expect(err < 1e-9, "fuse(P,P) != P");

        const auto at0 = fuse(p, q, 0.0);
        const auto at1 = fuse(p, q, 1.0);
        double e0 = 0, e1 = 0;
        for (std::size_t j = 0; j < k; ++j) {
            e0 = std::max(e0, std::abs(at0.probs[j] - p.probs[j]));
            e1 = std::max(e1, std::abs(at1.probs[j] - q.probs[j]));
        }
        t.expect(e0 < 1e-12 && e1 < 1e-12, "gate endpoints do not select a channel");

        const double hb = 3 * unit(rng), hd = 3 * unit(rng);
        t.expect(std::abs(entropy_gate(hb, hd) + entropy_gate(hd, hb) - 1.0) < 1e-12, "gate not symmetric");
        t.expect((hd < hb) == (entropy_gate(hb, hd) > 0.5) || hd == hb, "gate favours the wrong channel");

        const auto fused = fuse(p, q, alpha);
        double total = 0;
        for (double x : fused.probs) total += x;
        t.expect(std::abs(total - 1.0) < 1e-9, "fused mass != 1");

        const auto id = calibrate(fused, 1.0, 0.0, hb, hd);
        double ce = 0;
        for (std::size_t j = 0; j < k; ++j) ce = std::max(ce, std::abs(id.probs[j] - fused.probs[j]));
        t.expect(ce < 1e-12, "gamma=1, beta=0 is not the identity");

        const double gamma = 0.2 + 2 * unit(rng);
        const auto base = calibrate(fused, gamma, 0.0, hb, hd);
        const auto shifted = calibrate(fused, gamma, 5 * unit(rng), hb, hd);
        double be = 0;
        for (std::size_t j = 0; j < k; ++j) be = std::max(be, std::abs(base.probs[j] - shifted.probs[j]));
        t.expect(be < 1e-12, "beta changes the calibrated distribution");

        const auto cold = calibrate(fused, 1e-3, 0.0, hb, hd);
        const auto top = std::max_element(fused.probs.begin(), fused.probs.end()) - fused.probs.begin();
        std::vector<double> sorted = fused.probs;
        std::sort(sorted.rbegin(), sorted.rend());
        if (std::log(sorted[0] / sorted[1]) > 0.05) {
            t.expect(cold.probs[top] > 1 - 1e-9, "small gamma does not concentrate");
        }

        // log-sum-exp aggregation is shift invariant and leaves unsupported answers at 0.
        std::vector<ScoredPath> paths;
        for (std::size_t j = 0; j < 6; ++j) {
            ScoredPath sp;
            sp.answer = a[rng() % (k - 1)];  // the last answer is never supported
            sp.score = -20 * unit(rng);
            paths.push_back(sp);
        }
        const auto d0 = answer_distribution(paths, a);
        for (auto& sp : paths) sp.score += 500.0;
        const auto d1 = answer_distribution(paths, a);
        double se = 0;
        for (std::size_t j = 0; j < k; ++j) se = std::max(se, std::abs(d0.probs[j] - d1.probs[j]));
        t.expect(se < 1e-9, "aggregation not shift invariant");
        t.expect(d0.probs.back() == 0.0 && d1.probs.back() == 0.0, "unsupported answer has mass");
    }
    return t.verdict(std::to_string(t.checks()) + " checks: idempotence, gate endpoints and symmetry, "
                                                  "calibration identity, beta invariance, cold limit, shift invariance");
}

// Exhaustive sweep over a four-symbol alphabet (search, compute and compute
// tagged with each of two units), all sequences of length <= 6, plus a
// random sweep over every op type with optional units.
Verdict lcs_oracle() {
    Tally t;
    constexpr std::size_t kMaxLen = 6;
    constexpr std::size_t kCodes = 15625;  // 5^6, digits 1..4 in base 5
    static const std::array<std::vector<std::string>, 2> spellings{
        std::vector<std::string>{"acre", "acres", "thousand_acres", "hectares"},
        std::vector<std::string>{"person", "persons", "people", "thousand_persons"}};

    std::vector<std::vector<int>> seqs{{}};
    for (std::size_t len = 1; len <= kMaxLen; ++len) {
        const std::size_t start = seqs.size();
        for (std::size_t i = 0; i < start; ++i) {
            if (seqs[i].size() != len - 1) continue;
            for (int s = 0; s < 4; ++s) {
                auto next = seqs[i];
                next.push_back(s);
                seqs.push_back(std::move(next));
            }
        }
    }

    // Oracle side: per sequence, its distinct subsequence codes longest first,
    // and a membership bitset.
    std::vector<std::vector<std::pair<int, std::uint32_t>>> subs(seqs.size());
    std::vector<std::bitset<kCodes>> member(seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        const auto& s = seqs[i];
        std::set<std::pair<int, std::uint32_t>> seen;
        for (std::uint32_t mask = 0; mask < (1u << s.size()); ++mask) {
            std::uint32_t code = 0;
            int len = 0;
            for (std::size_t j = 0; j < s.size(); ++j) {
                if (mask & (1u << j)) {
                    code = code * 5 + static_cast<std::uint32_t>(s[j] + 1);
                    ++len;
                }
            }
            seen.insert({-len, code});
            member[i].set(code);
        }
        subs[i].assign(seen.begin(), seen.end());
    }

    // Library side: the same symbols with varied unit spellings.
    auto to_ops = [&](std::size_t index, int side) {
        OpSequence ops;
        const auto& s = seqs[index];
        for (std::size_t j = 0; j < s.size(); ++j) {
            TypedOp op;
            op.op = s[j] == 0 ? OpType::search : OpType::compute;
            if (s[j] >= 2) {
                const auto& names = spellings[s[j] - 2];
                op.unit = names[(index * 7 + j * 3 + static_cast<std::size_t>(side)) % names.size()];
            }
            ops.push_back(op);
        }
        return ops;
    };
    std::vector<OpSequence> left, right;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        left.push_back(to_ops(i, 0));
        right.push_back(to_ops(i, 1));
    }

    std::size_t pairs = 0, mismatches = 0;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        for (std::size_t j = 0; j < seqs.size(); ++j) {
            std::size_t expected = 0;
            for (const auto& [neg_len, code] : subs[i]) {
                if (member[j].test(code)) {
                    expected = static_cast<std::size_t>(-neg_len);
                    break;
                }
            }
            ++pairs;
            if (lcs_typed(left[i], right[j]) != expected) {
                if (++mismatches <= 3) t.expect(false, "mismatch at pair " + std::to_string(i) + "," + std::to_string(j));
            }
        }
    }
    t.expect(mismatches == 0, std::to_string(mismatches) + " exhaustive mismatches");

    // Random sweep: five op types, units absent or one of two, lengths 0..6.
    std::mt19937_64 rng(515);
    static const std::vector<OpType> kinds{OpType::search, OpType::parse, OpType::compute, OpType::verify, OpType::other};
    auto random_ops = [&] {
        OpSequence ops(rng() % (kMaxLen + 1));
        for (auto& op : ops) {
            op.op = kinds[rng() % kinds.size()];
            const auto tag = rng() % 3;
            if (tag > 0) op.unit = spellings[tag - 1][rng() % 4];
        }
        return ops;
    };
    const std::size_t random_pairs = 200000;
    std::size_t random_mismatches = 0;
    for (std::size_t i = 0; i < random_pairs; ++i) {
        const auto a = random_ops();
        const auto b = random_ops();
        if (lcs_typed(a, b) != dgr_test::brute_force_lcs(a, b)) ++random_mismatches;
    }
    t.expect(random_mismatches == 0, std::to_string(random_mismatches) + " random mismatches");

    return t.verdict(std::to_string(pairs) + " exhaustive pairs (4 symbols, length <= 6) and " +
                     std::to_string(random_pairs) + " random typed pairs against subsequence enumeration");
}

Verdict path_enumeration() {
    Tally t;
    static const std::vector<std::string> words{"grant", "census", "acre", "tape", "halt", "beaver", "table", "step"};
    const HashingEmbedder emb(64);
    std::size_t breadth_paths = 0, depth_paths = 0;

    for (std::uint64_t g = 0; g < 100; ++g) {
        std::mt19937_64 rng(1000 + g);
        std::uniform_real_distribution<double> conf(0.05, 1.0);

        // Breadth: undirected multigraph with up to 8 nodes.
        const std::size_t n = 1 + rng() % 8;
        std::vector<BreadthNode> nodes;
        for (std::size_t i = 0; i < n; ++i) {
            nodes.push_back(dgr_test::entity("ent:n" + std::to_string(i),
                                             words[rng() % words.size()] + " " + words[rng() % words.size()]));
        }
        std::vector<BreadthEdge> edges;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (rng() % 100 >= 40) continue;
                const bool flip = rng() % 2;
                const auto rel = static_cast<BreadthRelation>(rng() % 6);
                edges.push_back({nodes[flip ? j : i].id, nodes[flip ? i : j].id, rel, conf(rng)});
                if (rng() % 10 == 0) {
                    edges.push_back({nodes[i].id, nodes[j].id, static_cast<BreadthRelation>((static_cast<int>(rel) + 1) % 6),
                                     conf(rng)});
                }
            }
        }
        const BreadthGraph bg(nodes, edges);
        const BreadthEmbeddings be(bg, emb);
        const Vector query = emb.embed(words[rng() % words.size()]);
        std::vector<std::size_t> seeds;
        for (std::size_t i = 0; i < n; ++i) {
            if (rng() % 2) seeds.push_back(i);
        }
        if (seeds.empty()) seeds.push_back(rng() % n);
        BreadthSearch search;
        search.max_length = 1 + rng() % 5;
        search.beam = kUnboundedBeam;
        search.lambda_off = 0.5;
        search.answers_of = [](std::size_t) { return std::vector<std::size_t>{}; };

        const auto got = enumerate_breadth_paths(bg, be, seeds, query, search);
        std::set<dgr_test::RawPath> got_set;
        for (std::size_t i = 0; i < got.size(); ++i) {
            got_set.insert({got[i].nodes, got[i].edges});
            const double rescored = score_breadth_path(bg, be, query, got[i], search.lambda_off);
            t.expect(std::abs(rescored - got[i].score) < 1e-12, "breadth score drift in graph " + std::to_string(g));
            if (i > 0) t.expect(!breadth_path_before(got[i], got[i - 1]), "breadth order broken in graph " + std::to_string(g));
        }
        const auto expected = dgr_test::dfs_breadth_paths(bg, seeds, search.max_length);
        t.expect(got_set.size() == got.size(), "duplicate breadth path in graph " + std::to_string(g));
        t.expect(got_set == expected, "breadth path set differs in graph " + std::to_string(g));
        breadth_paths += got.size();

        // Depth: a random admissible DAG over up to 8 events in tick order.
        const std::size_t m = 1 + rng() % 8;
        std::vector<DepthNode> dnodes;
        for (std::size_t i = 0; i < m; ++i) {
            TraceEvent e;
            e.event_id = "d" + std::to_string(i);
            e.run_id = "r";
            e.timestamp = static_cast<std::int64_t>(i + 1);
            const auto kind = rng() % 3;
            e.kind = kind == 0 ? EventKind::action : kind == 1 ? EventKind::artifact : EventKind::validator;
            if (e.kind == EventKind::action) {
                e.tool = "t";
                e.op_type = OpType::compute;
            }
            if (e.kind == EventKind::artifact) {
                e.value = static_cast<double>(rng() % 10);
                e.unit = "acre";
            }
            dnodes.push_back(*make_depth_node(e));
        }
        std::vector<DepthEdge> dedges;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i + 1; j < m; ++j) {
                if (rng() % 100 >= 45) continue;
                const auto verdict = admit_edge(dnodes[i], dnodes[j]);
                if (const auto* rel = std::get_if<DepthRelation>(&verdict)) {
                    dedges.push_back({dnodes[i].id, dnodes[j].id, *rel, conf(rng)});
                }
            }
        }
        const DepthGraph dg(dnodes, dedges);
        for (std::size_t target = 0; target < m; ++target) {
            const std::size_t max_len = 1 + rng() % 6;
            const auto dp = enumerate_admissible_paths(dg, target, max_len);
            t.expect(dp == enumerate_admissible_paths(dg, target, max_len), "depth enumeration not repeatable");
            std::set<dgr_test::RawPath> dset;
            for (const auto& p : dp) dset.insert({p.nodes, p.edges});
            t.expect(dset.size() == dp.size(), "duplicate depth path in graph " + std::to_string(g));
            t.expect(dset == dgr_test::dfs_depth_paths(dg, target, max_len),
                     "depth path set differs in graph " + std::to_string(g));
            depth_paths += dp.size();
        }
    }
    return t.verdict("100 random graphs: " + std::to_string(breadth_paths) + " breadth and " +
                     std::to_string(depth_paths) + " depth paths match DFS enumeration");
}

Verdict graph_admission() {
    Tally t;
    auto node = [](std::string id, std::int64_t ts, EventKind kind, std::optional<ScalarValue> value = std::nullopt,
                   std::optional<std::string> unit = std::nullopt) {
        TraceEvent e;
        e.event_id = std::move(id);
        e.run_id = "r";
        e.timestamp = ts;
        e.kind = kind;
        if (kind == EventKind::action) {
            e.tool = "calc";
            e.op_type = OpType::compute;
        }
        e.value = std::move(value);
        e.unit = std::move(unit);
        return *make_depth_node(e);
    };
    auto rejected_by = [&](const DepthNode& a, const DepthNode& b, AdmissionGate gate, const std::string& needle) {
        const auto v = admit_edge(a, b);
        const auto* r = std::get_if<EdgeRejection>(&v);
        const std::string label = a.id + "->" + b.id;
        t.expect(r != nullptr, label + " admitted");
        if (r) {
            t.expect(r->gate == gate, label + " rejected by " + std::string(to_string(r->gate)));
            t.expect(r->reason.find(needle) != std::string::npos, label + " reason '" + r->reason + "'");
        }
    };
    auto admitted_as = [&](const DepthNode& a, const DepthNode& b, DepthRelation rel) {
        const auto v = admit_edge(a, b);
        const auto* got = std::get_if<DepthRelation>(&v);
        t.expect(got && *got == rel, a.id + "->" + b.id + " not admitted as " + std::string(to_string(rel)));
    };

    const auto act1 = node("act1", 1, EventKind::action);
    const auto act2 = node("act2", 2, EventKind::action);
    const auto acre3 = node("acre3", 3, EventKind::artifact, 60.0, "acres");
    const auto kacre4 = node("kacre4", 4, EventKind::artifact, 0.06, "thousand_acres");
    const auto person5 = node("person5", 5, EventKind::artifact, 12.0, "people");
    const auto text6 = node("text6", 6, EventKind::artifact, std::string("a table"));
    const auto furlong7 = node("furlong7", 7, EventKind::artifact, 3.0, "furlong");
    const auto val8 = node("val8", 8, EventKind::validator);
    const auto act9 = node("act9", 9, EventKind::action);

    rejected_by(act1, act2, AdmissionGate::relation_typing, "action -> action");
    rejected_by(val8, act9, AdmissionGate::relation_typing, "validator -> action");
    rejected_by(act1, val8, AdmissionGate::relation_typing, "action -> validator");
    rejected_by(act9, acre3, AdmissionGate::temporal_order, "9");
    rejected_by(acre3, node("same3", 3, EventKind::action), AdmissionGate::temporal_order, "3");
    rejected_by(acre3, person5, AdmissionGate::unit_compatibility, "person");
    rejected_by(acre3, text6, AdmissionGate::unit_compatibility, "non-number");
    rejected_by(acre3, furlong7, AdmissionGate::unit_compatibility, "furlong");
    admitted_as(acre3, kacre4, DepthRelation::carryover);
    admitted_as(act1, acre3, DepthRelation::produces);
    admitted_as(acre3, act9, DepthRelation::consumes);
    admitted_as(acre3, val8, DepthRelation::verified_by);

    // A trace whose references break each gate once: the edges are dropped
    // with the matching gate and the rest of the graph survives.
    Trace bad{"r", "q", {}};
    auto ev = [&](std::string id, std::int64_t ts, EventKind kind, std::vector<std::string> inputs,
                  std::optional<ScalarValue> value = std::nullopt, std::optional<std::string> unit = std::nullopt) {
        TraceEvent e;
        e.event_id = std::move(id);
        e.run_id = "r";
        e.timestamp = ts;
        e.kind = kind;
        if (kind == EventKind::action) {
            e.tool = "calc";
            e.op_type = OpType::compute;
        }
        e.inputs = std::move(inputs);
        e.value = std::move(value);
        e.unit = std::move(unit);
        bad.events.push_back(std::move(e));
    };
    ev("a1", 1, EventKind::action, {});
    ev("f2", 2, EventKind::artifact, {"a1"}, 5.0, "acre");
    ev("a3", 3, EventKind::action, {"a1"});
    ev("f4", 4, EventKind::artifact, {"f2"}, 7.0, "person");
    ev("a5", 5, EventKind::action, {"f6"});
    ev("f6", 6, EventKind::artifact, {"a3"}, 1.0, "acre");
    const auto built = build_depth_graph(bad);
    std::map<std::pair<std::string, std::string>, AdmissionGate> drops;
    for (const auto& d : built.dropped) drops[{d.src, d.dst}] = d.gate;
    t.expect(drops.size() == 3, std::to_string(drops.size()) + " drops instead of 3");
    t.expect(drops.count({"r/a1", "r/a3"}) && drops[{"r/a1", "r/a3"}] == AdmissionGate::relation_typing, "typing drop");
    t.expect(drops.count({"r/f2", "r/f4"}) && drops[{"r/f2", "r/f4"}] == AdmissionGate::unit_compatibility, "unit drop");
    t.expect(drops.count({"r/f6", "r/a5"}) && drops[{"r/f6", "r/a5"}] == AdmissionGate::temporal_order, "temporal drop");
    t.expect(built.graph.edges().size() == 2, "surviving edges");

    // Random admissible traces: every candidate is either an admitted edge or
    // a reported drop, and the graph is a DAG consistent with the gates.
    std::size_t edges = 0, dropped = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const Trace tr = random_trace(s);
        t.expect(validate_trace(tr).empty(), "random trace " + std::to_string(s) + " not admissible");
        const auto b = build_depth_graph(tr);
        const auto& g = b.graph;
        t.expect(g.is_acyclic(), "cycle in random trace " + std::to_string(s));
        std::size_t candidates = 0;
        for (const auto& e : tr.events) {
            if (e.kind == EventKind::note) continue;
            for (const auto& in : e.inputs) {
                const auto* src = &tr.events[std::stoul(in.substr(1))];
                candidates += src->kind != EventKind::note;
            }
        }
        t.expect(candidates == g.edges().size() + b.dropped.size(), "candidate count in trace " + std::to_string(s));
        for (std::size_t e = 0; e < g.edges().size(); ++e) {
            const auto& src = g.nodes()[g.edge_src(e)];
            const auto& dst = g.nodes()[g.edge_dst(e)];
            const auto v = admit_edge(src, dst);
            t.expect(std::holds_alternative<DepthRelation>(v) && std::get<DepthRelation>(v) == g.edges()[e].relation,
                     "edge re-admission in trace " + std::to_string(s));
            t.expect(src.timestamp < dst.timestamp, "edge against time in trace " + std::to_string(s));
        }
        for (const auto& d : b.dropped) {
            const auto v = admit_edge(g.nodes()[g.index_of(d.src)], g.nodes()[g.index_of(d.dst)]);
            t.expect(std::holds_alternative<EdgeRejection>(v) && std::get<EdgeRejection>(v).gate == d.gate,
                     "drop not reproduced in trace " + std::to_string(s));
        }
        edges += g.edges().size();
        dropped += b.dropped.size();
    }
    return t.verdict("gate cases and 100 random traces (" + std::to_string(edges) + " admitted, " +
                     std::to_string(dropped) + " dropped), all acyclic");
}

Verdict end_to_end() {
    Tally t;
    std::string summary;
    for (const auto& [key, g] : goldens()["outcomes"].items()) {
        const Trace tr = fixture_trace(g["trace"].get<std::string>());
        const DepthGraph dg = build_depth_graph(tr).graph;
        const Engine engine(build_breadth_graph(tr), dg, embedder());
        const Query q = fixture_query(g["query"].get<std::string>());
        const FusionOutcome out = engine.run(q, HyperParams{});
        const std::string expected = g["answer"].get<std::string>();
        t.expect(!out.abstained && out.map_answer == expected, key + " answered '" + out.map_answer + "'");

        const std::string bytes = serialize_outcome(out);
        t.expect(serialize_outcome(engine.run(q, HyperParams{})) == bytes, key + " repeat differs");
        for (std::size_t threads : {2u, 4u}) {
            t.expect(serialize_outcome(engine.run(q, HyperParams{}, {threads, {}})) == bytes,
                     key + " differs with " + std::to_string(threads) + " threads");
        }

        if (g.contains("display")) {
            const std::string display = g["display"].get<std::string>();
            t.expect(normalize_label(q.answers[q.answer_index(expected)].display) == display, key + " display");
            bool grounded = false;
            for (const auto& p : out.depth_paths) {
                if (p.answer != expected || p.nodes.empty()) continue;
                grounded = grounded || dg.nodes()[dg.index_of(p.nodes.back())].match_key() == display;
            }
            t.expect(grounded, key + " has no depth path ending at " + display);
        }
        if (g.contains("breadth_only_answer")) {
            const std::string breadth_only = g["breadth_only_answer"].get<std::string>();
            t.expect(out.p_breadth && select_answer(*out.p_breadth) == breadth_only, key + " breadth-only answer");
            t.expect(breadth_only != expected && out.alpha > 0.5, key + " depth channel did not decide");
        }
        summary += (summary.empty() ? "" : ", ") + key + "=" + out.map_answer + " (p=" +
                   fmt(out.p_calibrated.prob(out.map_answer), 3) + ", alpha=" + fmt(out.alpha, 3) + ")";
    }
    return t.verdict(summary + "; byte-identical across repeats and thread counts");
}

Verdict minimal_chain() {
    Tally t;
    std::size_t chains = 0;
    std::size_t marginals = 0;
    for (const auto& [key, g] : goldens()["outcomes"].items()) {
        const Trace tr = fixture_trace(g["trace"].get<std::string>());
        const Engine engine(build_breadth_graph(tr), build_depth_graph(tr).graph, embedder());
        const Query q = fixture_query(g["query"].get<std::string>());
        for (double delta : {0.01, 0.05, 0.2, 0.5}) {
            HyperParams params;
            params.delta = delta;
            const FusionOutcome out = engine.run(q, params);
            const std::string label = key + " delta=" + fmt(delta, 2);
            if (out.abstained) {
                t.expect(false, label + " abstained");
                continue;
            }
            const std::string& a = out.map_answer;
            const double base = dgr_test::direct_calibrated_prob(out.breadth_paths, out.depth_paths, out.answers, params, a);
            std::set<EdgeRef> pruned;
            for (const auto& m : out.edge_marginals) {
                const double without =
                    dgr_test::direct_calibrated_prob(out.breadth_paths, out.depth_paths, out.answers, params, a, {m.edge});
                t.expect(std::abs(m.delta - (base - without)) < 1e-9, label + " marginal of " + format_edge(m.edge));
                pruned.insert(m.edge);
                ++marginals;
            }
            for (const auto& e : out.chain) pruned.erase(e);
            const double kept = dgr_test::direct_calibrated_prob(out.breadth_paths, out.depth_paths, out.answers, params, a, pruned);
            t.expect(std::abs(kept - out.chain_prob) < 1e-9, label + " chain probability");
            t.expect(base - kept <= delta + 1e-12, label + " drop " + fmt(base - kept) + " exceeds budget");
            t.expect(!out.chain.empty(), label + " empty chain");
            ++chains;
        }
    }
    return t.verdict(std::to_string(chains) + " chains over 4 budgets, " + std::to_string(marginals) +
                     " leave-one-out marginals match direct recomputation");
}

Verdict determinism() {
    Tally t;
    std::vector<Trace> traces{fixture_trace("turing.jsonl"), fixture_trace("land_grant.jsonl")};
    for (std::uint64_t s = 0; s < 20; ++s) traces.push_back(random_trace(500 + s));

    for (const auto& tr : traces) {
        const std::string bytes = serialize_trace(tr);
        t.expect(serialize_trace(parse_trace(bytes)) == bytes, tr.run_id + " trace bytes");
        Trace shuffled = tr;
        std::reverse(shuffled.events.begin(), shuffled.events.end());
        t.expect(serialize_trace(shuffled) == bytes, tr.run_id + " event order leaks into bytes");

        const std::string bb = serialize_breadth_graph(build_breadth_graph(tr));
        t.expect(serialize_breadth_graph(parse_breadth_graph(bb)) == bb, tr.run_id + " breadth bytes");
        t.expect(serialize_breadth_graph(build_breadth_graph(shuffled)) == bb, tr.run_id + " breadth build order");
        const std::string db = serialize_depth_graph(build_depth_graph(tr).graph);
        t.expect(serialize_depth_graph(parse_depth_graph(db)) == db, tr.run_id + " depth bytes");
        t.expect(serialize_depth_graph(build_depth_graph(shuffled).graph) == db, tr.run_id + " depth build order");
    }

    const std::vector<Trace> subject{traces[0], traces[1], traces[2], traces[3]};
    std::vector<std::size_t> order{0, 1, 2, 3};
    std::string ref_b, ref_d;
    std::size_t permutations = 0;
    do {
        std::vector<BreadthGraph> bs;
        std::vector<DepthGraph> ds;
        for (auto i : order) {
            bs.push_back(build_breadth_graph(subject[i]));
            ds.push_back(build_depth_graph(subject[i]).graph);
        }
        const std::string b = serialize_breadth_graph(merge_breadth_graphs(bs));
        const std::string d = serialize_depth_graph(merge_depth_graphs(ds));
        if (ref_b.empty()) {
            ref_b = b;
            ref_d = d;
        }
        t.expect(b == ref_b && d == ref_d, "merge depends on input order");
        ++permutations;
    } while (std::next_permutation(order.begin(), order.end()));

    return t.verdict(std::to_string(traces.size()) + " traces round-trip byte-identically through trace and graph "
                                                     "formats; merge identical over " +
                     std::to_string(permutations) + " input orders");
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"holder_bound", holder_bound},         {"oracle_inequality", oracle_inequality},
        {"fusion_algebra", fusion_algebra},     {"lcs_oracle", lcs_oracle},
        {"path_enumeration", path_enumeration}, {"graph_admission", graph_admission},
        {"end_to_end", end_to_end},             {"minimal_chain", minimal_chain},
        {"determinism", determinism}};

    CLI::App app{"acceptance checks"};
    std::vector<std::string> only;
    app.add_option("--only", only, "run only the named criteria");
    CLI11_PARSE(app, argc, argv);

    int failed = 0;
    std::size_t ran = 0;
    for (const auto& [name, check] : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
        ++ran;
        Verdict v;
        const auto start = std::chrono::steady_clock::now();
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << " [" << fmt(secs, 3) << "s]"
                  << std::endl;
        failed += !v.pass;
    }
    if (ran == 0) {
        std::cerr << "no such criterion\n";
        return 2;
    }
    return failed == 0 ? 0 : 1;
}
