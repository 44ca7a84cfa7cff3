#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "slw/model/propagation.hpp"

namespace slw {

inline constexpr std::size_t kDefaultMaxPaths = 100;

/// Hop sequence from the primary gene to a partner. nodes.size() == hops + 1.
struct InterpretivePath {
    std::vector<EntityId> nodes;
    std::vector<RelationId> relations;
    std::vector<std::uint32_t> edges;  // PropagationGraph edge per hop
    double weight = 0.0;

    std::size_t hops() const { return relations.size(); }
    EntityId partner() const { return nodes.back(); }
};

/// Orders paths by weight descending, then node sequence, then edges.
inline bool path_before(const InterpretivePath& a, const InterpretivePath& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.nodes != b.nodes) return a.nodes < b.nodes;
    return a.edges < b.edges;
}

/// The max_paths highest-weight paths of 1..3 hops reaching the partner
/// through active edges, each weighted by the product of its hop attentions,
/// in path_before order. Walks backwards from the partner and drops partial
/// paths already lighter than the current max_paths-th best, which is exact
/// because every attention is at most 1.
template <typename Scalar>
std::vector<InterpretivePath> extract_paths(const PropagationGraph& graph, const Propagation<Scalar>& prop,
                                            EntityId partner, std::size_t max_paths = kDefaultMaxPaths) {
    std::vector<InterpretivePath> best;  // heap, worst path on top
    if (partner == prop.primary || max_paths == 0) return best;
    auto worse_on_top = [](const InterpretivePath& a, const InterpretivePath& b) { return path_before(a, b); };

    std::array<std::uint32_t, kHops + 1> slot{};  // slot[t]: chosen edge slot at layer t
    auto emit = [&](int m, double w) {
        InterpretivePath p;
        p.nodes.resize(static_cast<std::size_t>(m) + 1);
        p.nodes[0] = prop.primary;
        for (int t = 1; t <= m; ++t) {
            const std::uint32_t e = prop.layers[t].edges[slot[t]];
            p.nodes[static_cast<std::size_t>(t)] = graph.edge(e).dst;
            p.relations.push_back(graph.edge(e).relation);
            p.edges.push_back(e);
        }
        p.weight = w;
        if (best.size() < max_paths) {
            best.push_back(std::move(p));
            std::push_heap(best.begin(), best.end(), worse_on_top);
        } else if (path_before(p, best.front())) {
            std::pop_heap(best.begin(), best.end(), worse_on_top);
            best.back() = std::move(p);
            std::push_heap(best.begin(), best.end(), worse_on_top);
        }
    };
    // w is the product of attentions from layer t + 1 up to the partner.
    auto descend = [&](auto&& self, int m, int t, std::int32_t row, double w) -> void {
        const auto& layer = prop.layers[t];
        for (std::uint32_t s = layer.edge_begin[row]; s < layer.edge_begin[row + 1]; ++s) {
            const double ws = w * static_cast<double>(layer.alpha[s]);
            if (best.size() == max_paths && ws < best.front().weight) continue;
            slot[t] = s;
            if (t == 1) {
                emit(m, ws);
            } else {
                self(self, m, t - 1, layer.src_row[s], ws);
            }
        }
    };
    for (int m = 1; m <= kHops; ++m) {
        const std::int32_t top = prop.layers[m].row_of(partner);
        if (top >= 0) descend(descend, m, m, top, 1.0);
    }
    std::sort(best.begin(), best.end(), path_before);
    return best;
}

struct EntityWeight {
    EntityId entity;
    double weight;
};

/// Path statistics per hop layer for the treemap, flow bar and path bar views.
struct LayerAggregate {
    /// Entities at each layer with weights normalised to sum 1, descending.
    std::array<std::vector<EntityWeight>, kHops + 1> entities;
    /// Share of each entity type at each layer.
    std::array<std::array<double, kNumEntityTypes>, kHops + 1> type_weights{};
    /// flow[l](a, b): share of layer-l mass moving from type a to type b at layer l + 1.
    std::array<Eigen::Matrix<double, kNumEntityTypes, kNumEntityTypes>, kHops> flow;
    /// terminal[l][a]: share of layer-l mass on paths that end there with type a, so
    /// flow row a plus terminal a equals type_weights[l][a].
    std::array<std::array<double, kNumEntityTypes>, kHops> terminal{};
    /// Relation shares of each layer transition, summing to 1 when non-empty.
    std::array<std::map<RelationId, double>, kHops> relations;
    /// Total path weight at each layer before normalisation.
    std::array<double, kHops + 1> mass{};

    bool empty() const { return mass[0] == 0.0; }
};

LayerAggregate aggregate_layers(const KnowledgeGraph& kg, std::span<const InterpretivePath> paths);

}  // namespace slw
