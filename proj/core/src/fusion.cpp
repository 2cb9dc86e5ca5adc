#include "dualgraph/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "dualgraph/error.hpp"

namespace dgr {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> softmax(const std::vector<double>& logits) {
    const double z = log_sum_exp(logits);
    std::vector<double> out(logits.size(), 0.0);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = logits[i] == kNegInf ? 0.0 : std::exp(logits[i] - z);
    }
    return out;
}

}  // namespace

std::string_view to_string(Channel channel) {
    return channel == Channel::breadth ? "breadth" : "depth";
}

std::optional<Channel> parse_channel(std::string_view text) {
    if (text == "breadth") return Channel::breadth;
    if (text == "depth") return Channel::depth;
    return std::nullopt;
}

std::string format_edge(const EdgeRef& edge) {
    return std::string(to_string(edge.channel)) + ":" + edge.src + " -[" + edge.relation + "]-> " +
           edge.dst;
}

double AnswerDistribution::prob(std::string_view answer) const {
    for (std::size_t i = 0; i < answers.size(); ++i) {
        if (answers[i] == answer) return probs[i];
    }
    return 0.0;
}

AnswerDistribution make_distribution(std::vector<std::string> answers, std::vector<double> probs) {
    AnswerDistribution d{std::move(answers), std::move(probs), 0.0};
    d.entropy = shannon_entropy(d.probs);
    return d;
}

double log_sum_exp(std::span<const double> xs) {
    double hi = kNegInf;
    for (double x : xs) hi = std::max(hi, x);
    if (hi == kNegInf) return kNegInf;
    double sum = 0.0;
    for (double x : xs) sum += std::exp(x - hi);
    return hi + std::log(sum);
}

AnswerDistribution answer_distribution(std::span<const ScoredPath> paths,
                                       const std::vector<std::string>& answers) {
    std::map<std::string_view, std::size_t> slot;
    for (std::size_t i = 0; i < answers.size(); ++i) slot.emplace(answers[i], i);

    std::vector<std::vector<double>> scores(answers.size());
    bool any = false;
    for (const auto& p : paths) {
        auto it = slot.find(p.answer);
        if (it == slot.end()) continue;
        scores[it->second].push_back(p.score);
        any = true;
    }
    if (!any) throw NoSupportingPaths();

    std::vector<double> logits(answers.size(), kNegInf);
    for (std::size_t i = 0; i < answers.size(); ++i) {
        logits[i] = log_sum_exp(scores[i]);
    }
    return make_distribution(answers, softmax(logits));
}

double shannon_entropy(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return std::max(h, 0.0);
}

double entropy_gate(double h_breadth, double h_depth) {
    // Written as a logistic in the entropy gap so that equal inputs give 0.5
    // exactly and large entropies do not underflow.
    return 1.0 / (1.0 + std::exp(h_depth - h_breadth));
}

AnswerDistribution fuse(const AnswerDistribution& breadth, const AnswerDistribution& depth,
                        double alpha, double floor) {
    if (breadth.answers != depth.answers) {
        throw Error("fused distributions must share one answer set");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw Error("gate weight must lie in [0, 1]");
    }
    std::vector<double> logits(breadth.answers.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double lb = std::log(std::max(breadth.probs[i], floor));
        const double ld = std::log(std::max(depth.probs[i], floor));
        logits[i] = alpha * ld + (1.0 - alpha) * lb;
    }
    return make_distribution(breadth.answers, softmax(logits));
}

ChannelFusion fuse_channels(const std::optional<AnswerDistribution>& breadth,
                            const std::optional<AnswerDistribution>& depth, double floor) {
    if (breadth && depth) {
        const double alpha = entropy_gate(breadth->entropy, depth->entropy);
        return {alpha, fuse(*breadth, *depth, alpha, floor), breadth->entropy, depth->entropy};
    }
    if (breadth) return {0.0, *breadth, breadth->entropy, 0.0};
    if (depth) return {1.0, *depth, 0.0, depth->entropy};
    throw BothChannelsEmpty();
}

AnswerDistribution calibrate(const AnswerDistribution& fused, double gamma, double beta,
                             double h_breadth, double h_depth) {
    if (!(gamma > 0.0)) throw Error("temperature must be positive");
    if (!(beta >= 0.0)) throw Error("entropy penalty must be non-negative");
    const double penalty = beta * (h_breadth + h_depth);
    std::vector<double> logits(fused.probs.size(), kNegInf);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (fused.probs[i] > 0.0) {
            logits[i] = std::log(fused.probs[i]) / gamma - penalty;
        }
    }
    return make_distribution(fused.answers, softmax(logits));
}

std::string select_answer(const AnswerDistribution& dist) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < dist.probs.size(); ++i) {
        if (dist.probs[i] > dist.probs[best] ||
            (dist.probs[i] == dist.probs[best] && dist.answers[i] < dist.answers[best])) {
            best = i;
        }
    }
    return dist.answers.empty() ? std::string() : dist.answers[best];
}

}  // namespace dgr
