#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dgr {

enum class Channel { breadth, depth };

std::string_view to_string(Channel channel);
std::optional<Channel> parse_channel(std::string_view text);

/// Stable identity of one graph edge across runs and files.
struct EdgeRef {
    Channel channel = Channel::breadth;
    std::string src;
    std::string dst;
    std::string relation;

    auto operator<=>(const EdgeRef&) const = default;
    bool operator==(const EdgeRef&) const = default;
};

std::string format_edge(const EdgeRef& edge);

struct ScoredPath {
    Channel channel = Channel::breadth;
    std::vector<std::string> nodes;
    std::vector<EdgeRef> edges;
    std::string answer;
    double score = 0.0;  // log domain

    bool operator==(const ScoredPath&) const = default;
};

/// Probabilities aligned with `answers` (query order).
struct AnswerDistribution {
    std::vector<std::string> answers;
    std::vector<double> probs;
    double entropy = 0.0;

    double prob(std::string_view answer) const;
    bool operator==(const AnswerDistribution&) const = default;
};

/// Builds a distribution and fills in its entropy.
AnswerDistribution make_distribution(std::vector<std::string> answers, std::vector<double> probs);

/// log sum exp(x_i), shifted by the maximum. -inf for an empty input.
double log_sum_exp(std::span<const double> xs);

/// Softmax of per-answer log masses aggregated by log-sum-exp over the paths
/// supporting each answer. Unsupported answers get exactly 0.
/// Throws NoSupportingPaths when no path names a listed answer.
AnswerDistribution answer_distribution(std::span<const ScoredPath> paths,
                                       const std::vector<std::string>& answers);

/// -sum p log p, natural log, 0 log 0 = 0.
double shannon_entropy(std::span<const double> probs);

/// exp(-H_D) / (exp(-H_D) + exp(-H_B)); the weight on the depth channel.
double entropy_gate(double h_breadth, double h_depth);

inline constexpr double kProbabilityFloor = 1e-12;

/// softmax(alpha log P_D + (1 - alpha) log P_B) with every probability
/// floored at `floor` before the logs.
AnswerDistribution fuse(const AnswerDistribution& breadth, const AnswerDistribution& depth,
                        double alpha, double floor = kProbabilityFloor);

struct ChannelFusion {
    double alpha = 0.5;
    AnswerDistribution fused;
    double h_breadth = 0.0;  // 0 for an abstaining channel
    double h_depth = 0.0;
};

/// Gate and fuse two channels, either of which may abstain. A lone channel is
/// passed through with alpha saturated at 0 (breadth) or 1 (depth).
/// Throws BothChannelsEmpty.
ChannelFusion fuse_channels(const std::optional<AnswerDistribution>& breadth,
                            const std::optional<AnswerDistribution>& depth,
                            double floor = kProbabilityFloor);

/// softmax((1/gamma) log P(a) - beta (H_B + H_D)), evaluated as written.
/// Zero probabilities stay zero.
AnswerDistribution calibrate(const AnswerDistribution& fused, double gamma, double beta,
                             double h_breadth, double h_depth);

/// argmax; ties go to the smallest answer id.
std::string select_answer(const AnswerDistribution& dist);

}  // namespace dgr
