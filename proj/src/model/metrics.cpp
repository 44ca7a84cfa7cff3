#include "slw/model/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slw {

RankingMetrics ranking_metrics(std::span<const EntityId> ranked, const std::unordered_set<EntityId>& truth,
                               std::size_t k) {
    if (k == 0) throw std::invalid_argument("k must be at least 1");
    RankingMetrics m;
    const std::size_t n = std::min(k, ranked.size());
    std::size_t hits = 0;
    double dcg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (truth.contains(ranked[i])) {
            ++hits;
            dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
        }
    }
    double idcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, truth.size()); ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);

    m.precision = static_cast<double>(hits) / static_cast<double>(k);
    m.recall = truth.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
    m.ndcg = idcg > 0.0 ? dcg / idcg : 0.0;
    return m;
}

void MetricsAccumulator::add(const RankingMetrics& m) {
    sum_.precision += m.precision;
    sum_.recall += m.recall;
    sum_.ndcg += m.ndcg;
    ++n_;
}

RankingMetrics MetricsAccumulator::mean() const {
    if (n_ == 0) return {};
    const auto n = static_cast<double>(n_);
    return {sum_.precision / n, sum_.recall / n, sum_.ndcg / n};
}

double random_precision(std::size_t candidates, std::size_t hits_available, std::size_t k) {
    if (candidates == 0 || k == 0) return 0.0;
    const double shown = static_cast<double>(std::min(k, candidates));
    return shown / static_cast<double>(k) * static_cast<double>(hits_available) / static_cast<double>(candidates);
}

}  // namespace slw
