#pragma once

#include <span>
#include <unordered_set>
#include <vector>

#include "slw/kg.hpp"

namespace slw {

struct RankingMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double ndcg = 0.0;
};

/// Binary-gain precision@k, recall@k and ndcg@k of one ranked list.
RankingMetrics ranking_metrics(std::span<const EntityId> ranked, const std::unordered_set<EntityId>& truth,
                               std::size_t k);

/// Accumulates per-query metrics into a mean.
class MetricsAccumulator {
public:
    void add(const RankingMetrics& m);
    RankingMetrics mean() const;
    std::size_t count() const { return n_; }

private:
    RankingMetrics sum_;
    std::size_t n_ = 0;
};

/// Expected precision@k of a uniformly random ordering of the candidates.
double random_precision(std::size_t candidates, std::size_t hits_available, std::size_t k);

}  // namespace slw
