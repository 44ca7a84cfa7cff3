#pragma once

#include <memory>
#include <span>
#include <vector>

#include "slw/kg.hpp"

namespace slw {

/// A directed step the ranking model may take: every triple head -> tail, and
/// SL triples additionally tail -> head.
struct TraversalEdge {
    EntityId src;
    EntityId dst;
    RelationId relation;
    std::uint32_t triple;  // index into the source graph's triple list
    bool reversed;
};

/// Traversal view of a knowledge graph with some triples held out.
class PropagationGraph {
public:
    PropagationGraph(std::shared_ptr<const KnowledgeGraph> kg, std::span<const Triple> held_out = {});

    const KnowledgeGraph& kg() const { return *kg_; }
    std::shared_ptr<const KnowledgeGraph> shared_kg() const { return kg_; }
    std::size_t num_entities() const { return kg_->vocab().num_entities(); }
    std::size_t num_relations() const { return kg_->vocab().num_relations(); }
    std::size_t num_edges() const { return edges_.size(); }

    const TraversalEdge& edge(std::uint32_t e) const { return edges_[e]; }
    std::span<const TraversalEdge> edges() const { return edges_; }
    /// Edge indices leaving / entering an entity, in ascending edge order.
    std::span<const std::uint32_t> out(EntityId v) const;
    std::span<const std::uint32_t> in(EntityId v) const;

    Triple triple_of(const TraversalEdge& e) const { return kg_->triple(e.triple); }

private:
    std::shared_ptr<const KnowledgeGraph> kg_;
    std::vector<TraversalEdge> edges_;
    std::vector<std::uint32_t> out_offsets_, out_index_;
    std::vector<std::uint32_t> in_offsets_, in_index_;
};

}  // namespace slw
