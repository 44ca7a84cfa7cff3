#include "slw/model/paths.hpp"

#include <algorithm>
#include <unordered_map>

namespace slw {

LayerAggregate aggregate_layers(const KnowledgeGraph& kg, std::span<const InterpretivePath> paths) {
    LayerAggregate agg;
    for (auto& f : agg.flow) f.setZero();

    std::array<std::unordered_map<EntityId, double>, kHops + 1> weights;
    for (const auto& p : paths) {
        for (std::size_t l = 0; l < p.nodes.size(); ++l) {
            const auto type = static_cast<std::size_t>(kg.type_of(p.nodes[l]));
            weights[l][p.nodes[l]] += p.weight;
            agg.type_weights[l][type] += p.weight;
            agg.mass[l] += p.weight;
            if (l + 1 < p.nodes.size()) {
                const auto next = static_cast<std::size_t>(kg.type_of(p.nodes[l + 1]));
                agg.flow[l](static_cast<Eigen::Index>(type), static_cast<Eigen::Index>(next)) += p.weight;
                agg.relations[l][p.relations[l]] += p.weight;
            } else if (l < kHops) {
                agg.terminal[l][type] += p.weight;
            }
        }
    }

    for (std::size_t l = 0; l <= kHops; ++l) {
        const double m = agg.mass[l];
        if (m == 0.0) continue;
        for (const auto& [e, w] : weights[l]) agg.entities[l].push_back({e, w / m});
        std::sort(agg.entities[l].begin(), agg.entities[l].end(), [](const EntityWeight& a, const EntityWeight& b) {
            return a.weight != b.weight ? a.weight > b.weight : a.entity < b.entity;
        });
        for (auto& w : agg.type_weights[l]) w /= m;
        if (l == kHops) continue;
        agg.flow[l] /= m;
        for (auto& w : agg.terminal[l]) w /= m;
        double transit = 0.0;
        for (const auto& [r, w] : agg.relations[l]) transit += w;
        for (auto& [r, w] : agg.relations[l]) w /= transit;
    }
    return agg;
}

}  // namespace slw
