#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dualgraph/breadth_graph.hpp"
#include "dualgraph/depth_graph.hpp"

namespace dgr {

inline constexpr std::string_view kBreadthFormat = "dualgraph.breadth";
inline constexpr std::string_view kDepthFormat = "dualgraph.depth";
inline constexpr int kGraphFormatVersion = 1;

// Canonical JSONL: one header record, then node records sorted by id, then
// edge records sorted by (src, dst, relation). Answer support rides on the
// node records.
std::string serialize_breadth_graph(const BreadthGraph& graph);
std::string serialize_depth_graph(const DepthGraph& graph);

// Throw MalformedRecord on unreadable lines and SchemaMismatch on a wrong
// header, version or enum value.
BreadthGraph parse_breadth_graph(std::string_view bytes);
DepthGraph parse_depth_graph(std::string_view bytes);

// One record per dropped candidate: src, dst, gate, reason.
std::string serialize_dropped_edges(const std::vector<DroppedEdge>& dropped);

/// JSON object mapping a term to its canonical term.
AliasTable parse_alias_table(std::string_view json_text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace dgr
