#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "slw/model/metrics.hpp"
#include "slw/model/paths.hpp"
#include "slw/model/propagation.hpp"

namespace slw {

struct ModelConfig {
    int embed_dim = 64;
    int hops = kHops;  // fixed
    int negatives_per_positive = 32;
    double learning_rate = 1e-3;
    int epochs = 50;
    int top_k = 50;
    std::uint64_t seed = 42;
    int patience = 5;
    /// Targets per primary gene per step; each is a train partner whose SL edge
    /// is hidden from the encoder for that step.
    int max_targets_per_step = 16;
    bool residual = true;
    bool double_precision = false;  // train in 64-bit instead of 32-bit floats

    nlohmann::json to_json() const;
    static ModelConfig from_json(const nlohmann::json& j);  // missing keys keep defaults
};

struct SplitConfig {
    double train_frac = 0.8;
    double valid_frac = 0.1;
    double test_frac = 0.1;
    std::uint64_t seed = 42;
};

/// Partition of the SL triples. Each pair is placed by a keyed hash of its
/// gene ids, so a pair keeps its split when unrelated triples change.
struct SlSplit {
    std::vector<Triple> train, valid, test;

    std::vector<Triple> held_out() const;
};

SlSplit split_sl(const KnowledgeGraph& kg, const SplitConfig& config);

/// Symmetric partner sets per gene.
using PartnerMap = std::unordered_map<EntityId, std::unordered_set<EntityId>>;
PartnerMap partner_map(std::span<const Triple> sl_triples);

struct EvaluationResult {
    RankingMetrics at_k;         // at config.top_k
    RankingMetrics at_10;
    double random_precision_at_10 = 0.0;
    double random_precision_at_k = 0.0;
    std::size_t queries = 0;
};

struct ModelVersion {
    std::uint64_t id = 0;
    std::uint64_t kg_version = 0;
    ModelConfig config;
    SplitConfig split;
    ModelParams<double> params;
    EvaluationResult test;
    EvaluationResult valid;
    double initial_loss = 0.0;
    std::vector<double> loss_curve;         // mean training loss per epoch
    std::vector<double> valid_precision;    // validation precision@top_k per epoch
    int best_epoch = 0;
    double train_seconds = 0.0;

    nlohmann::json metrics_json() const;
};

struct TrainProgress {
    int epoch;
    double loss;
    double valid_precision;
};

/// Trains on the train SL split plus every non-SL triple and evaluates on
/// the test split. Throws std::invalid_argument for corpora with fewer than
/// ten SL triples.
ModelVersion train(std::shared_ptr<const KnowledgeGraph> kg, const ModelConfig& config, const SplitConfig& split,
                   const std::function<void(const TrainProgress&)>& progress = {});

/// Filtered ranking evaluation over every gene with a partner in `truth`.
/// Candidates exclude the primary, its partners in `exclude`, and anything
/// not reached by propagation.
template <typename Scalar>
EvaluationResult evaluate(const PropagationGraph& graph, const ModelParams<Scalar>& params, const PartnerMap& truth,
                          const PartnerMap& exclude, const ModelConfig& config);

struct Prediction {
    EntityId partner;
    double score;
    int rank;
    bool correct;
};

/// Read-only serving view of one model version against its own graph.
class Predictor {
public:
    Predictor(std::shared_ptr<const ModelVersion> model, std::shared_ptr<const KnowledgeGraph> kg);

    const ModelVersion& model() const { return *model_; }
    const KnowledgeGraph& kg() const { return graph_.kg(); }
    std::shared_ptr<const KnowledgeGraph> shared_kg() const { return graph_.shared_kg(); }
    const PropagationGraph& graph() const { return graph_; }

    /// Top-k candidates ordered by score then gene id; correct against every SL split.
    std::vector<Prediction> predictions(EntityId gene) const;
    std::shared_ptr<const Propagation<double>> propagation(EntityId gene) const;
    std::vector<InterpretivePath> paths(EntityId gene, EntityId partner,
                                        std::size_t max_paths = kDefaultMaxPaths) const;
    bool is_known_partner(EntityId gene, EntityId other) const;

private:
    std::shared_ptr<const ModelVersion> model_;
    PropagationGraph graph_;
    PartnerMap all_partners_;
    mutable std::mutex cache_mutex_;
    mutable std::map<EntityId, std::shared_ptr<const Propagation<double>>> cache_;
};

/// Ranks reached genes other than the primary and `exclude` by score, ties by gene id.
template <typename Scalar>
std::vector<std::pair<EntityId, Scalar>> rank_candidates(const KnowledgeGraph& kg, const Propagation<Scalar>& prop,
                                                         const ModelParams<Scalar>& params,
                                                         const std::unordered_set<EntityId>* exclude,
                                                         std::size_t k);

}  // namespace slw
