#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "slw/model/propagation_graph.hpp"

namespace slw {

inline constexpr int kHops = 3;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Entity and relation embeddings, one row each.
template <typename Scalar>
struct ModelParams {
    RowMatrix<Scalar> entity;
    RowMatrix<Scalar> relation;

    Eigen::Index dim() const { return entity.cols(); }

    static ModelParams zeros_like(const ModelParams& other) {
        return {RowMatrix<Scalar>::Zero(other.entity.rows(), other.entity.cols()),
                RowMatrix<Scalar>::Zero(other.relation.rows(), other.relation.cols())};
    }

    static ModelParams random(Eigen::Index entities, Eigen::Index relations, Eigen::Index dim, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
        ModelParams p{RowMatrix<Scalar>(entities, dim), RowMatrix<Scalar>(relations, dim)};
        for (Eigen::Index i = 0; i < p.entity.size(); ++i) p.entity.data()[i] = static_cast<Scalar>(normal(rng));
        for (Eigen::Index i = 0; i < p.relation.size(); ++i) p.relation.data()[i] = static_cast<Scalar>(normal(rng));
        return p;
    }

    template <typename Other>
    ModelParams<Other> cast() const {
        return {entity.template cast<Other>(), relation.template cast<Other>()};
    }
};

/// Node states and attention of one hop layer.
template <typename Scalar>
struct PropagationLayer {
    std::vector<EntityId> nodes;       // ascending entity id; row i holds nodes[i]
    RowMatrix<Scalar> h;
    // Active incoming edges of row i are edges[edge_begin[i] .. edge_begin[i + 1]).
    std::vector<std::uint32_t> edge_begin{0};
    std::vector<std::uint32_t> edges;  // PropagationGraph edge index
    std::vector<std::int32_t> src_row;  // row of the edge source in the previous layer
    std::vector<Scalar> alpha;

    std::int32_t row_of(EntityId v) const {
        auto it = std::lower_bound(nodes.begin(), nodes.end(), v);
        return it != nodes.end() && *it == v ? static_cast<std::int32_t>(it - nodes.begin()) : -1;
    }
    std::size_t num_rows() const { return nodes.size(); }
};

enum class FinalLayer {
    All,        // states for every node reached at the last hop
    Genes,      // last-hop states only for Gene nodes (all that scoring needs)
    Requested,  // last-hop states only for the requested nodes
};

struct PropagationOptions {
    FinalLayer final_layer = FinalLayer::Genes;
    std::span<const EntityId> requested;
    /// Per traversal edge, non-zero excludes the edge.
    const std::vector<std::uint8_t>* edge_mask = nullptr;
    /// Adds the node's own embedding to its aggregated message at every hop.
    bool residual = true;
};

template <typename Scalar>
struct Propagation {
    EntityId primary = 0;
    std::array<PropagationLayer<Scalar>, kHops + 1> layers;
    std::vector<std::uint8_t> reach;  // per entity, bit t set when reached at hop t

    /// Deepest hop at which the entity was reached, 0 if never after the start.
    int last_layer(EntityId v) const {
        for (int t = kHops; t >= 1; --t) {
            if (reach[v] & (1U << t)) return t;
        }
        return 0;
    }
};

/// Per-entity bitmask of the hops at which it is reached from the primary.
inline std::vector<std::uint8_t> reach_layers(const PropagationGraph& graph, EntityId primary,
                                              const std::vector<std::uint8_t>* edge_mask = nullptr) {
    std::vector<std::uint8_t> reach(graph.num_entities(), 0);
    reach[primary] = 1;
    std::vector<EntityId> frontier{primary};
    for (int t = 1; t <= kHops; ++t) {
        std::vector<EntityId> next;
        const auto bit = static_cast<std::uint8_t>(1U << t);
        for (EntityId u : frontier) {
            for (auto ei : graph.out(u)) {
                if (edge_mask && (*edge_mask)[ei]) continue;
                const EntityId v = graph.edge(ei).dst;
                if (!(reach[v] & bit)) {
                    reach[v] |= bit;
                    next.push_back(v);
                }
            }
        }
        frontier = std::move(next);
    }
    return reach;
}

/// Attentive 3-hop propagation from the primary gene. At hop t each active
/// triple (u, r, v) with u reached at hop t-1 sends m = h_u + r_r; the logits
/// <m, e_v> / sqrt(d) are softmax-normalised over v's incoming messages and
/// h_v = [e_v] + sum alpha * m.
template <typename Scalar>
Propagation<Scalar> propagate(const PropagationGraph& graph, const ModelParams<Scalar>& params, EntityId primary,
                              const PropagationOptions& options = {}) {
    using Vec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
    const Eigen::Index d = params.dim();
    const Scalar inv_sqrt_d = Scalar(1) / std::sqrt(static_cast<Scalar>(d));

    Propagation<Scalar> prop;
    prop.primary = primary;
    prop.reach = reach_layers(graph, primary, options.edge_mask);

    auto& base = prop.layers[0];
    base.nodes = {primary};
    base.h = params.entity.row(primary);

    std::vector<std::int32_t> prev_row(graph.num_entities(), -1);
    std::vector<Scalar> logits;
    Vec message(d);
    for (int t = 1; t <= kHops; ++t) {
        const auto& prev = prop.layers[t - 1];
        auto& layer = prop.layers[t];
        std::fill(prev_row.begin(), prev_row.end(), -1);
        for (std::size_t r = 0; r < prev.nodes.size(); ++r) prev_row[prev.nodes[r]] = static_cast<std::int32_t>(r);

        const auto bit = static_cast<std::uint8_t>(1U << t);
        if (t < kHops || options.final_layer == FinalLayer::All) {
            for (EntityId v = 0; v < graph.num_entities(); ++v) {
                if (prop.reach[v] & bit) layer.nodes.push_back(v);
            }
        } else if (options.final_layer == FinalLayer::Genes) {
            for (EntityId v = 0; v < graph.num_entities(); ++v) {
                if ((prop.reach[v] & bit) && graph.kg().type_of(v) == EntityType::Gene) layer.nodes.push_back(v);
            }
        } else {
            for (EntityId v : options.requested) {
                if (prop.reach[v] & bit) layer.nodes.push_back(v);
            }
            std::sort(layer.nodes.begin(), layer.nodes.end());
            layer.nodes.erase(std::unique(layer.nodes.begin(), layer.nodes.end()), layer.nodes.end());
        }

        const auto rows = static_cast<Eigen::Index>(layer.nodes.size());
        layer.h.resize(rows, d);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const EntityId v = layer.nodes[static_cast<std::size_t>(r)];
            const std::size_t first = layer.edges.size();
            for (auto ei : graph.in(v)) {
                if (options.edge_mask && (*options.edge_mask)[ei]) continue;
                const std::int32_t src = prev_row[graph.edge(ei).src];
                if (src < 0) continue;
                layer.edges.push_back(ei);
                layer.src_row.push_back(src);
            }
            const std::size_t count = layer.edges.size() - first;
            const auto e_v = params.entity.row(v);

            logits.resize(count);
            Scalar max_logit = -std::numeric_limits<Scalar>::infinity();
            for (std::size_t k = 0; k < count; ++k) {
                const auto& edge = graph.edge(layer.edges[first + k]);
                message.noalias() = prev.h.row(layer.src_row[first + k]) + params.relation.row(edge.relation);
                logits[k] = message.dot(e_v) * inv_sqrt_d;
                max_logit = std::max(max_logit, logits[k]);
            }
            Scalar total = 0;
            for (auto& z : logits) {
                z = std::exp(z - max_logit);
                total += z;
            }
            if (options.residual) {
                layer.h.row(r) = e_v;
            } else {
                layer.h.row(r).setZero();
            }
            for (std::size_t k = 0; k < count; ++k) {
                const Scalar a = logits[k] / total;
                layer.alpha.push_back(a);
                const auto& edge = graph.edge(layer.edges[first + k]);
                layer.h.row(r) += a * (prev.h.row(layer.src_row[first + k]) + params.relation.row(edge.relation));
            }
            layer.edge_begin.push_back(static_cast<std::uint32_t>(layer.edges.size()));
        }
    }
    return prop;
}

/// dLoss/dscore for the score of one candidate.
template <typename Scalar>
struct ScoreGradient {
    EntityId candidate;
    Scalar dscore;
};

/// Decoder score <h_c, e_primary> using the deepest layer holding c.
template <typename Scalar>
std::optional<Scalar> candidate_score(const Propagation<Scalar>& prop, const ModelParams<Scalar>& params,
                                      EntityId candidate) {
    for (int t = kHops; t >= 1; --t) {
        if (!(prop.reach[candidate] & (1U << t))) continue;
        const auto row = prop.layers[t].row_of(candidate);
        if (row < 0) return std::nullopt;
        return prop.layers[t].h.row(row).dot(params.entity.row(prop.primary));
    }
    return std::nullopt;
}

/// Accumulates parameter gradients of sum_c dscore_c * score_c into grad.
template <typename Scalar>
void backpropagate(const PropagationGraph& graph, const ModelParams<Scalar>& params, const Propagation<Scalar>& prop,
                   std::span<const ScoreGradient<Scalar>> score_grads, ModelParams<Scalar>& grad,
                   bool residual = true) {
    using Vec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
    const Eigen::Index d = params.dim();
    const Scalar inv_sqrt_d = Scalar(1) / std::sqrt(static_cast<Scalar>(d));
    const EntityId g = prop.primary;

    std::array<RowMatrix<Scalar>, kHops + 1> gh;
    std::array<std::vector<std::uint8_t>, kHops + 1> touched;
    for (int t = 0; t <= kHops; ++t) {
        gh[t] = RowMatrix<Scalar>::Zero(static_cast<Eigen::Index>(prop.layers[t].num_rows()), d);
        touched[t].assign(prop.layers[t].num_rows(), 0);
    }

    for (const auto& sg : score_grads) {
        const int t = prop.last_layer(sg.candidate);
        if (t == 0) continue;
        const auto row = prop.layers[t].row_of(sg.candidate);
        if (row < 0) continue;
        grad.entity.row(g) += sg.dscore * prop.layers[t].h.row(row);
        gh[t].row(row) += sg.dscore * params.entity.row(g);
        touched[t][static_cast<std::size_t>(row)] = 1;
    }

    Vec message(d), dmessage(d);
    std::vector<Scalar> dalpha;
    for (int t = kHops; t >= 1; --t) {
        const auto& layer = prop.layers[t];
        const auto& prev = prop.layers[t - 1];
        for (std::size_t r = 0; r < layer.num_rows(); ++r) {
            if (!touched[t][r]) continue;
            const EntityId v = layer.nodes[r];
            const auto G = gh[t].row(static_cast<Eigen::Index>(r));
            const auto e_v = params.entity.row(v);
            if (residual) grad.entity.row(v) += G;

            const std::uint32_t first = layer.edge_begin[r];
            const std::uint32_t last = layer.edge_begin[r + 1];
            dalpha.resize(last - first);
            Scalar mean = 0;
            for (std::uint32_t k = first; k < last; ++k) {
                message.noalias() = prev.h.row(layer.src_row[k]) + params.relation.row(graph.edge(layer.edges[k]).relation);
                dalpha[k - first] = G.dot(message);
                mean += layer.alpha[k] * dalpha[k - first];
            }
            for (std::uint32_t k = first; k < last; ++k) {
                const auto& edge = graph.edge(layer.edges[k]);
                const Scalar a = layer.alpha[k];
                const Scalar dz = a * (dalpha[k - first] - mean) * inv_sqrt_d;
                message.noalias() = prev.h.row(layer.src_row[k]) + params.relation.row(edge.relation);
                grad.entity.row(v) += dz * message;
                dmessage.noalias() = a * G + dz * e_v;
                gh[t - 1].row(layer.src_row[k]) += dmessage;
                touched[t - 1][static_cast<std::size_t>(layer.src_row[k])] = 1;
                grad.relation.row(edge.relation) += dmessage;
            }
        }
    }
    grad.entity.row(g) += gh[0].row(0);
}

/// Sampled-softmax loss of one primary: for each positive p with its negative
/// set N_p, -log(exp s_p / (exp s_p + sum_n exp s_n)). Returns the summed loss
/// and writes dLoss/dscore per candidate occurrence.
template <typename Scalar>
Scalar sampled_softmax_loss(const Propagation<Scalar>& prop, const ModelParams<Scalar>& params,
                            std::span<const EntityId> positives, std::span<const std::vector<EntityId>> negatives,
                            std::vector<ScoreGradient<Scalar>>& score_grads) {
    Scalar loss = 0;
    std::vector<Scalar> scores;
    for (std::size_t i = 0; i < positives.size(); ++i) {
        const auto sp = candidate_score(prop, params, positives[i]);
        if (!sp) continue;
        scores.assign(1, *sp);
        std::vector<EntityId> ids{positives[i]};
        for (EntityId n : negatives[i]) {
            if (auto sn = candidate_score(prop, params, n)) {
                scores.push_back(*sn);
                ids.push_back(n);
            }
        }
        const Scalar mx = *std::max_element(scores.begin(), scores.end());
        Scalar z = 0;
        for (Scalar s : scores) z += std::exp(s - mx);
        loss += -(scores[0] - mx) + std::log(z);
        for (std::size_t j = 0; j < scores.size(); ++j) {
            const Scalar p = std::exp(scores[j] - mx) / z;
            score_grads.push_back({ids[j], j == 0 ? p - Scalar(1) : p});
        }
    }
    return loss;
}

}  // namespace slw
