#pragma once

#include <span>

#include "dualgraph/breadth_graph.hpp"
#include "dualgraph/depth_graph.hpp"

namespace dgr {

/// Subject-level union of per-trace breadth graphs. Nodes are unified by
/// label; parallel edges keep their highest confidence; answer support is
/// unioned. Throws MergeConflict when one label carries two node kinds.
/// The result does not depend on input order.
BreadthGraph merge_breadth_graphs(std::span<const BreadthGraph> graphs);

/// Union of per-trace depth graphs. Node ids embed the run id, so distinct
/// runs never collide; a shared id must carry identical payloads, otherwise
/// MergeConflict.
DepthGraph merge_depth_graphs(std::span<const DepthGraph> graphs);

}  // namespace dgr
