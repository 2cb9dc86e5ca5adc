#include "dualgraph/config.hpp"

#include <charconv>
#include <functional>
#include <map>

#include "dualgraph/error.hpp"
#include "dualgraph/graph_io.hpp"
#include "dualgraph/units.hpp"

namespace dgr {
namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view text, std::string_view key) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ConfigError("bad value '" + std::string(text) + "' for " + std::string(key));
    }
    return value;
}

bool parse_bool(std::string_view text, std::string_view key) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError("bad boolean '" + std::string(text) + "' for " + std::string(key));
}

using Setter = std::function<void(RunConfig&, std::string_view value, std::string_view key)>;

template <typename T, typename Field>
Setter number(Field field) {
    return [field](RunConfig& c, std::string_view v, std::string_view k) {
        field(c) = parse_number<T>(v, k);
    };
}

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"lambda_off", number<double>([](RunConfig& c) -> double& { return c.params.lambda_off; })},
        {"lambda_ord", number<double>([](RunConfig& c) -> double& { return c.params.lambda_ord; })},
        {"tau", number<double>([](RunConfig& c) -> double& { return c.params.tau; })},
        {"gamma", number<double>([](RunConfig& c) -> double& { return c.params.gamma; })},
        {"beta", number<double>([](RunConfig& c) -> double& { return c.params.beta; })},
        {"delta", number<double>([](RunConfig& c) -> double& { return c.params.delta; })},
        {"floor", number<double>([](RunConfig& c) -> double& { return c.params.floor; })},
        {"max_breadth_length",
         number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.params.max_breadth_length; })},
        {"max_depth_length",
         number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.params.max_depth_length; })},
        {"seeds", number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.params.seeds; })},
        {"beam", number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.params.beam; })},
        {"embedder", [](RunConfig& c, std::string_view v, std::string_view) { c.embedder = v; }},
        {"endpoint", [](RunConfig& c, std::string_view v, std::string_view) { c.endpoint = v; }},
        {"dim", number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.dim; })},
        {"mode",
         [](RunConfig& c, std::string_view v, std::string_view) {
             const auto mode = parse_aggregation_mode(v);
             if (!mode) throw ConfigError("mode must be signal or subject");
             c.mode = *mode;
         }},
        {"rng_seed", number<std::uint64_t>([](RunConfig& c) -> std::uint64_t& { return c.rng_seed; })},
        {"threads", number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.threads; })},
        {"aliases", [](RunConfig& c, std::string_view v, std::string_view) { c.aliases = v; }},
        {"verifier_command",
         [](RunConfig& c, std::string_view v, std::string_view) { c.verifier_command = v; }},
        {"embedding_cache",
         [](RunConfig& c, std::string_view v, std::string_view) { c.embedding_cache = v; }},
        {"confidence.mentions",
         number<double>([](RunConfig& c) -> double& { return c.confidences.mentions; })},
        {"confidence.aliases",
         number<double>([](RunConfig& c) -> double& { return c.confidences.aliases; })},
        {"confidence.defines",
         number<double>([](RunConfig& c) -> double& { return c.confidences.defines; })},
        {"confidence.cites",
         number<double>([](RunConfig& c) -> double& { return c.confidences.cites; })},
        {"confidence.supports_scale",
         number<double>([](RunConfig& c) -> double& { return c.confidences.supports_scale; })},
        {"confidence.derived_from",
         number<double>([](RunConfig& c) -> double& { return c.confidences.derived_from; })},
        {"scenario.answer_count",
         number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.scenario.answer_count; })},
        {"scenario.sharpness_breadth",
         number<double>([](RunConfig& c) -> double& { return c.scenario.sharpness_breadth; })},
        {"scenario.sharpness_depth",
         number<double>([](RunConfig& c) -> double& { return c.scenario.sharpness_depth; })},
        {"scenario.trials",
         number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.scenario.trials; })},
        {"scenario.calibrated",
         [](RunConfig& c, std::string_view v, std::string_view k) {
             c.scenario.calibrated = parse_bool(v, k);
         }},
    };
    return table;
}

}  // namespace

std::string_view to_string(AggregationMode mode) {
    return mode == AggregationMode::signal ? "signal" : "subject";
}

std::optional<AggregationMode> parse_aggregation_mode(std::string_view text) {
    if (text == "signal") return AggregationMode::signal;
    if (text == "subject") return AggregationMode::subject;
    return std::nullopt;
}

void RunConfig::validate() const {
    params.validate();
    scenario.validate();
    if (embedder != "reference" && embedder != "remote") {
        throw ConfigError("embedder must be reference or remote");
    }
    if (embedder == "remote" && endpoint.empty()) {
        throw ConfigError("remote embedder needs an endpoint");
    }
    if (dim == 0) throw ConfigError("dim must be positive");
    if (threads == 0) throw ConfigError("threads must be positive");
    const std::pair<const char*, double> confidences[] = {
        {"mentions", this->confidences.mentions},     {"aliases", this->confidences.aliases},
        {"defines", this->confidences.defines},       {"cites", this->confidences.cites},
        {"supports_scale", this->confidences.supports_scale},
        {"derived_from", this->confidences.derived_from}};
    for (const auto& [name, value] : confidences) {
        if (!(value > 0.0 && value <= 1.0)) {
            throw ConfigError(std::string("confidence.") + name + " must be in (0, 1]");
        }
    }
}

RunConfig parse_config(std::string_view text) {
    RunConfig config;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        const auto& table = setters();
        const auto it = table.find(key);
        if (it == table.end()) {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" +
                              std::string(key) + "'");
        }
        try {
            it->second(config, value, key);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    config.scenario.rng_seed = config.rng_seed;
    config.validate();
    return config;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

std::string format_config(const RunConfig& c) {
    std::string out;
    auto line = [&](std::string_view key, const std::string& value) {
        out += std::string(key) + " = " + value + "\n";
    };
    line("lambda_off", format_number(c.params.lambda_off));
    line("lambda_ord", format_number(c.params.lambda_ord));
    line("tau", format_number(c.params.tau));
    line("gamma", format_number(c.params.gamma));
    line("beta", format_number(c.params.beta));
    line("delta", format_number(c.params.delta));
    line("floor", format_number(c.params.floor));
    line("max_breadth_length", std::to_string(c.params.max_breadth_length));
    line("max_depth_length", std::to_string(c.params.max_depth_length));
    line("seeds", std::to_string(c.params.seeds));
    line("beam", std::to_string(c.params.beam));
    line("embedder", c.embedder);
    line("endpoint", c.endpoint);
    line("dim", std::to_string(c.dim));
    line("mode", std::string(to_string(c.mode)));
    line("rng_seed", std::to_string(c.rng_seed));
    line("threads", std::to_string(c.threads));
    line("aliases", c.aliases);
    line("verifier_command", c.verifier_command);
    line("embedding_cache", c.embedding_cache);
    line("confidence.mentions", format_number(c.confidences.mentions));
    line("confidence.aliases", format_number(c.confidences.aliases));
    line("confidence.defines", format_number(c.confidences.defines));
    line("confidence.cites", format_number(c.confidences.cites));
    line("confidence.supports_scale", format_number(c.confidences.supports_scale));
    line("confidence.derived_from", format_number(c.confidences.derived_from));
    line("scenario.answer_count", std::to_string(c.scenario.answer_count));
    line("scenario.sharpness_breadth", format_number(c.scenario.sharpness_breadth));
    line("scenario.sharpness_depth", format_number(c.scenario.sharpness_depth));
    line("scenario.trials", std::to_string(c.scenario.trials));
    line("scenario.calibrated", c.scenario.calibrated ? "true" : "false");
    return out;
}

}  // namespace dgr
