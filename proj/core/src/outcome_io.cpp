#include "dualgraph/outcome_io.hpp"

#include <map>
#include <sstream>

#include <json.hpp>

#include "dualgraph/error.hpp"
#include "dualgraph/units.hpp"

namespace dgr {
namespace {

using json = nlohmann::ordered_json;

json dist_to_json(const std::optional<AnswerDistribution>& d) {
    if (!d) return nullptr;
    json probs = json::object();
    for (std::size_t i = 0; i < d->answers.size(); ++i) probs[d->answers[i]] = d->probs[i];
    json out;
    out["probs"] = std::move(probs);
    out["entropy"] = d->entropy;
    return out;
}

std::optional<AnswerDistribution> dist_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    AnswerDistribution d;
    for (const auto& [id, p] : j.at("probs").items()) {
        d.answers.push_back(id);
        d.probs.push_back(p.get<double>());
    }
    d.entropy = j.at("entropy").get<double>();
    return d;
}

json edge_to_json(const EdgeRef& e) {
    json out;
    out["channel"] = to_string(e.channel);
    out["src"] = e.src;
    out["dst"] = e.dst;
    out["relation"] = e.relation;
    return out;
}

EdgeRef edge_from_json(const json& j) {
    EdgeRef e;
    const auto channel = j.at("channel").get<std::string>();
    const auto parsed = parse_channel(channel);
    if (!parsed) throw SchemaMismatch("unknown channel '" + channel + "'");
    e.channel = *parsed;
    e.src = j.at("src").get<std::string>();
    e.dst = j.at("dst").get<std::string>();
    e.relation = j.at("relation").get<std::string>();
    return e;
}

json paths_to_json(const std::vector<ScoredPath>& paths) {
    json out = json::array();
    for (const auto& p : paths) {
        json r;
        r["answer"] = p.answer;
        r["score"] = p.score;
        r["nodes"] = p.nodes;
        json edges = json::array();
        for (const auto& e : p.edges) edges.push_back(edge_to_json(e));
        r["edges"] = std::move(edges);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ScoredPath> paths_from_json(const json& j, Channel channel) {
    std::vector<ScoredPath> out;
    for (const auto& r : j) {
        ScoredPath p;
        p.channel = channel;
        p.answer = r.at("answer").get<std::string>();
        p.score = r.at("score").get<double>();
        p.nodes = r.at("nodes").get<std::vector<std::string>>();
        for (const auto& e : r.at("edges")) p.edges.push_back(edge_from_json(e));
        out.push_back(std::move(p));
    }
    return out;
}

json params_to_json(const HyperParams& p) {
    json out;
    out["lambda_off"] = p.lambda_off;
    out["lambda_ord"] = p.lambda_ord;
    out["tau"] = p.tau;
    out["gamma"] = p.gamma;
    out["beta"] = p.beta;
    out["delta"] = p.delta;
    out["max_breadth_length"] = p.max_breadth_length;
    out["max_depth_length"] = p.max_depth_length;
    out["seeds"] = p.seeds;
    out["beam"] = p.beam;
    out["floor"] = p.floor;
    return out;
}

HyperParams params_from_json(const json& j) {
    HyperParams p;
    p.lambda_off = j.at("lambda_off").get<double>();
    p.lambda_ord = j.at("lambda_ord").get<double>();
    p.tau = j.at("tau").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.beta = j.at("beta").get<double>();
    p.delta = j.at("delta").get<double>();
    p.max_breadth_length = j.at("max_breadth_length").get<std::size_t>();
    p.max_depth_length = j.at("max_depth_length").get<std::size_t>();
    p.seeds = j.at("seeds").get<std::size_t>();
    p.beam = j.at("beam").get<std::size_t>();
    p.floor = j.at("floor").get<double>();
    return p;
}

std::string fixed(double x, int digits = 6) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << x;
    return os.str();
}

}  // namespace

std::string serialize_outcome(const FusionOutcome& o) {
    json out;
    out["format"] = kOutcomeFormat;
    out["version"] = kOutcomeFormatVersion;
    out["question_id"] = o.question_id;
    out["answers"] = o.answers;
    out["status"] = o.abstained ? "abstain" : "answered";
    out["map_answer"] = o.abstained ? json(nullptr) : json(o.map_answer);
    out["alpha"] = o.alpha;
    out["breadth"] = dist_to_json(o.p_breadth);
    out["depth"] = dist_to_json(o.p_depth);
    out["fused"] = o.abstained ? json(nullptr) : dist_to_json(o.p_fused);
    out["calibrated"] = o.abstained ? json(nullptr) : dist_to_json(o.p_calibrated);

    std::map<EdgeRef, double> delta;
    for (const auto& m : o.edge_marginals) delta[m.edge] = m.delta;
    json chain = json::array();
    for (const auto& e : o.chain) {
        json r = edge_to_json(e);
        r["delta"] = delta.count(e) ? delta.at(e) : 0.0;
        chain.push_back(std::move(r));
    }
    out["chain"] = std::move(chain);
    out["chain_prob"] = o.chain_prob;
    json marginals = json::array();
    for (const auto& m : o.edge_marginals) {
        json r = edge_to_json(m.edge);
        r["delta"] = m.delta;
        marginals.push_back(std::move(r));
    }
    out["edge_marginals"] = std::move(marginals);

    json ops = json::array();
    for (const auto& op : o.query_ops) {
        json r;
        r["op"] = to_string(op.op);
        if (op.unit) r["unit"] = *op.unit;
        ops.push_back(std::move(r));
    }
    out["query_ops"] = std::move(ops);
    out["paths"]["breadth"] = paths_to_json(o.breadth_paths);
    out["paths"]["depth"] = paths_to_json(o.depth_paths);
    out["params"] = params_to_json(o.params);
    return out.dump(2) + "\n";
}

FusionOutcome parse_outcome(std::string_view text) {
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw MalformedRecord(1, "outcome is not a JSON object");
    }
    if (j.value("format", "") != kOutcomeFormat || j.value("version", 0) != kOutcomeFormatVersion) {
        throw SchemaMismatch("not a dualgraph.outcome version 1 file");
    }
    try {
        FusionOutcome o;
        o.question_id = j.at("question_id").get<std::string>();
        o.answers = j.at("answers").get<std::vector<std::string>>();
        o.abstained = j.at("status").get<std::string>() == "abstain";
        if (!o.abstained) o.map_answer = j.at("map_answer").get<std::string>();
        o.alpha = j.at("alpha").get<double>();
        o.p_breadth = dist_from_json(j.at("breadth"));
        o.p_depth = dist_from_json(j.at("depth"));
        if (!o.abstained) {
            o.p_fused = *dist_from_json(j.at("fused"));
            o.p_calibrated = *dist_from_json(j.at("calibrated"));
        }
        for (const auto& r : j.at("chain")) o.chain.push_back(edge_from_json(r));
        o.chain_prob = j.at("chain_prob").get<double>();
        for (const auto& r : j.at("edge_marginals")) {
            o.edge_marginals.push_back({edge_from_json(r), r.at("delta").get<double>()});
        }
        for (const auto& r : j.at("query_ops")) {
            const auto name = r.at("op").get<std::string>();
            const auto op = parse_op_type(name);
            if (!op) throw SchemaMismatch("unknown op '" + name + "'");
            TypedOp t{*op, std::nullopt};
            if (r.contains("unit")) t.unit = r.at("unit").get<std::string>();
            o.query_ops.push_back(std::move(t));
        }
        o.breadth_paths = paths_from_json(j.at("paths").at("breadth"), Channel::breadth);
        o.depth_paths = paths_from_json(j.at("paths").at("depth"), Channel::depth);
        o.params = params_from_json(j.at("params"));
        return o;
    } catch (const json::exception& e) {
        throw MalformedRecord(1, std::string("bad outcome field: ") + e.what());
    }
}

std::string explain_outcome(const FusionOutcome& o) {
    std::ostringstream os;
    os << "question " << o.question_id << "\n";
    if (o.abstained) {
        os << "abstained: no path in either graph supports a listed answer\n";
        return os.str();
    }
    os << "answer " << o.map_answer << " (p = " << fixed(o.p_calibrated.prob(o.map_answer)) << ")\n";
    os << "gate alpha = " << fixed(o.alpha) << " (weight on the depth channel)\n";
    auto row = [&](const char* name, const std::optional<AnswerDistribution>& d) {
        os << "  " << name;
        if (!d) {
            os << " abstained\n";
            return;
        }
        os << " H=" << fixed(d->entropy, 4);
        for (std::size_t i = 0; i < d->answers.size(); ++i) {
            os << "  " << d->answers[i] << "=" << fixed(d->probs[i], 4);
        }
        os << "\n";
    };
    row("breadth   ", o.p_breadth);
    row("depth     ", o.p_depth);
    row("fused     ", o.p_fused);
    row("calibrated", o.p_calibrated);

    std::map<EdgeRef, double> delta;
    for (const auto& m : o.edge_marginals) delta[m.edge] = m.delta;
    os << "evidence chain (" << o.chain.size() << " of " << o.edge_marginals.size()
       << " edges kept, budget " << format_number(o.params.delta) << ", p after pruning "
       << fixed(o.chain_prob) << ")\n";
    for (const auto& e : o.chain) {
        os << "  " << format_edge(e) << "  delta=" << fixed(delta[e]) << "\n";
    }
    return os.str();
}

}  // namespace dgr
