#include "slw/model/propagation_graph.hpp"

#include <unordered_set>

namespace slw {

namespace {

void csr(std::size_t n, const std::vector<TraversalEdge>& edges, bool by_src, std::vector<std::uint32_t>& offsets,
         std::vector<std::uint32_t>& index) {
    offsets.assign(n + 1, 0);
    for (const auto& e : edges) ++offsets[(by_src ? e.src : e.dst) + 1];
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    index.resize(edges.size());
    std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::uint32_t i = 0; i < edges.size(); ++i) index[cursor[by_src ? edges[i].src : edges[i].dst]++] = i;
}

}  // namespace

PropagationGraph::PropagationGraph(std::shared_ptr<const KnowledgeGraph> kg, std::span<const Triple> held_out)
    : kg_(std::move(kg)) {
    std::unordered_set<Triple, TripleHash> skip(held_out.begin(), held_out.end());
    const auto sl = kg_->sl_relation();
    edges_.reserve(kg_->num_triples() * 2);
    for (std::uint32_t i = 0; i < kg_->num_triples(); ++i) {
        const Triple& t = kg_->triple(i);
        if (skip.contains(t)) continue;
        edges_.push_back({t.head, t.tail, t.relation, i, false});
        if (sl && t.relation == *sl) edges_.push_back({t.tail, t.head, t.relation, i, true});
    }
    csr(num_entities(), edges_, true, out_offsets_, out_index_);
    csr(num_entities(), edges_, false, in_offsets_, in_index_);
}

std::span<const std::uint32_t> PropagationGraph::out(EntityId v) const {
    return std::span<const std::uint32_t>(out_index_).subspan(out_offsets_[v], out_offsets_[v + 1] - out_offsets_[v]);
}

std::span<const std::uint32_t> PropagationGraph::in(EntityId v) const {
    return std::span<const std::uint32_t>(in_index_).subspan(in_offsets_[v], in_offsets_[v + 1] - in_offsets_[v]);
}

}  // namespace slw
