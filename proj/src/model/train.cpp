#include "slw/model/train.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace slw {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t keyed_hash(std::uint64_t seed, std::string_view a, std::string_view b) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ splitmix(seed);
    auto mix = [&h](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= 0xff;
        h *= 0x100000001b3ULL;
    };
    mix(a);
    mix(b);
    return splitmix(h);
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t threads = std::min<std::size_t>(std::max(1U, std::thread::hardware_concurrency()), 8);
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
}

std::vector<EntityId> sorted_keys(const PartnerMap& m) {
    std::vector<EntityId> keys;
    keys.reserve(m.size());
    for (const auto& [k, v] : m) {
        if (!v.empty()) keys.push_back(k);
    }
    std::sort(keys.begin(), keys.end());
    return keys;
}

PartnerMap merge(const PartnerMap& a, const PartnerMap& b) {
    PartnerMap out = a;
    for (const auto& [k, v] : b) out[k].insert(v.begin(), v.end());
    return out;
}

template <typename Scalar>
struct Adam {
    ModelParams<Scalar> m, v;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step = 0;

    explicit Adam(const ModelParams<Scalar>& like)
        : m(ModelParams<Scalar>::zeros_like(like)), v(ModelParams<Scalar>::zeros_like(like)) {}

    void update(RowMatrix<Scalar>& p, RowMatrix<Scalar>& mm, RowMatrix<Scalar>& vv, const RowMatrix<Scalar>& g,
                Scalar lr_t) {
        const auto b1 = static_cast<Scalar>(beta1);
        const auto b2 = static_cast<Scalar>(beta2);
        mm.array() = b1 * mm.array() + (Scalar(1) - b1) * g.array();
        vv.array() = b2 * vv.array() + (Scalar(1) - b2) * g.array().square();
        p.array() -= lr_t * mm.array() / (vv.array().sqrt() + static_cast<Scalar>(eps));
    }

    void apply(ModelParams<Scalar>& params, const ModelParams<Scalar>& grad, double lr) {
        ++step;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        const auto lr_t = static_cast<Scalar>(lr * std::sqrt(c2) / c1);
        update(params.entity, m.entity, v.entity, grad.entity, lr_t);
        update(params.relation, m.relation, v.relation, grad.relation, lr_t);
    }
};

/// SL traversal edges keyed by unordered gene pair.
std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> sl_edges(const PropagationGraph& graph) {
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> out;
    const auto sl = graph.kg().sl_relation();
    if (!sl) return out;
    for (std::uint32_t e = 0; e < graph.num_edges(); ++e) {
        const auto& edge = graph.edge(e);
        if (edge.relation != *sl) continue;
        const auto lo = std::min(edge.src, edge.dst), hi = std::max(edge.src, edge.dst);
        out[(static_cast<std::uint64_t>(lo) << 32) | hi].push_back(e);
    }
    return out;
}

std::uint64_t pair_key(EntityId a, EntityId b) {
    return (static_cast<std::uint64_t>(std::min(a, b)) << 32) | std::max(a, b);
}

struct StepResult {
    double loss = 0.0;
    std::size_t targets = 0;
};

template <typename Scalar>
class Trainer {
public:
    Trainer(const PropagationGraph& graph, const PartnerMap& train_partners, const ModelConfig& config)
        : graph_(graph), partners_(train_partners), config_(config), pair_edges_(sl_edges(graph)),
          mask_(graph.num_edges(), 0), genes_(graph.kg().vocab().entities_of_type(EntityType::Gene)) {}

    /// One primary: sample targets and negatives, compute the loss and, when
    /// grad is given, its gradient scaled to the mean over targets.
    StepResult step(EntityId g, const ModelParams<Scalar>& params, ModelParams<Scalar>* grad, std::mt19937_64& rng) {
        StepResult result;
        const auto& own = partners_.at(g);
        std::vector<EntityId> partners(own.begin(), own.end());
        std::sort(partners.begin(), partners.end());
        std::shuffle(partners.begin(), partners.end(), rng);
        const std::size_t want = std::min<std::size_t>(std::max<std::size_t>(1, partners.size() / 2),
                                                       static_cast<std::size_t>(config_.max_targets_per_step));
        partners.resize(want);
        std::sort(partners.begin(), partners.end());

        for (EntityId p : partners) {
            for (auto e : pair_edges_.at(pair_key(g, p))) mask_[e] = 1;
        }
        const auto reach = reach_layers(graph_, g, &mask_);
        std::vector<EntityId> pool, targets;
        for (EntityId c : genes_) {
            if (c == g || reach[c] <= 1) continue;
            if (own.contains(c)) continue;
            pool.push_back(c);
        }
        for (EntityId p : partners) {
            if (reach[p] > 1) targets.push_back(p);
        }
        if (!pool.empty() && !targets.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            std::vector<std::vector<EntityId>> negatives(targets.size());
            std::vector<EntityId> requested = targets;
            for (auto& n : negatives) {
                n.resize(static_cast<std::size_t>(config_.negatives_per_positive));
                for (auto& x : n) {
                    x = pool[pick(rng)];
                    requested.push_back(x);
                }
            }
            PropagationOptions options;
            options.final_layer = FinalLayer::Requested;
            options.requested = requested;
            options.edge_mask = &mask_;
            options.residual = config_.residual;
            const auto prop = propagate(graph_, params, g, options);

            std::vector<ScoreGradient<Scalar>> score_grads;
            result.loss = static_cast<double>(sampled_softmax_loss<Scalar>(prop, params, targets, negatives, score_grads));
            result.targets = targets.size();
            if (grad) {
                const Scalar scale = Scalar(1) / static_cast<Scalar>(targets.size());
                for (auto& sg : score_grads) sg.dscore *= scale;
                backpropagate<Scalar>(graph_, params, prop, score_grads, *grad, config_.residual);
            }
        }
        for (EntityId p : partners) {
            for (auto e : pair_edges_.at(pair_key(g, p))) mask_[e] = 0;
        }
        return result;
    }

private:
    const PropagationGraph& graph_;
    const PartnerMap& partners_;
    const ModelConfig& config_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> pair_edges_;
    std::vector<std::uint8_t> mask_;
    std::vector<EntityId> genes_;
};

template <typename Scalar>
ModelParams<Scalar> fit(const PropagationGraph& graph, const PartnerMap& train_p, const PartnerMap& valid_p,
                        const PartnerMap& exclude_valid, const ModelConfig& config, ModelVersion& out,
                        const std::function<void(const TrainProgress&)>& progress) {
    const auto d = static_cast<Eigen::Index>(config.embed_dim);
    auto params = ModelParams<double>::random(static_cast<Eigen::Index>(graph.num_entities()),
                                              static_cast<Eigen::Index>(graph.num_relations()), d, config.seed)
                      .template cast<Scalar>();
    Trainer<Scalar> trainer(graph, train_p, config);
    Adam<Scalar> adam(params);
    auto grad = ModelParams<Scalar>::zeros_like(params);
    const auto primaries = sorted_keys(train_p);

    {
        std::mt19937_64 rng(splitmix(config.seed ^ 0x1badbeefULL));
        double total = 0.0;
        std::size_t n = 0;
        for (EntityId g : primaries) {
            const auto r = trainer.step(g, params, nullptr, rng);
            total += r.loss;
            n += r.targets;
        }
        out.initial_loss = n ? total / static_cast<double>(n) : 0.0;
    }

    std::mt19937_64 rng(splitmix(config.seed));
    auto best = params;
    double best_precision = -1.0;
    int wait = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        auto order = primaries;
        std::shuffle(order.begin(), order.end(), rng);
        double total = 0.0;
        std::size_t n = 0;
        for (EntityId g : order) {
            grad.entity.setZero();
            grad.relation.setZero();
            const auto r = trainer.step(g, params, &grad, rng);
            if (r.targets == 0) continue;
            total += r.loss;
            n += r.targets;
            adam.apply(params, grad, config.learning_rate);
        }
        const double loss = n ? total / static_cast<double>(n) : 0.0;
        const auto valid = evaluate(graph, params, valid_p, exclude_valid, config);
        out.loss_curve.push_back(loss);
        out.valid_precision.push_back(valid.at_k.precision);
        if (progress) progress({epoch, loss, valid.at_k.precision});
        if (valid.at_k.precision > best_precision) {
            best_precision = valid.at_k.precision;
            best = params;
            out.best_epoch = epoch;
            wait = 0;
        } else if (++wait >= config.patience) {
            break;
        }
    }
    return best;
}

}  // namespace

nlohmann::json ModelConfig::to_json() const {
    return {{"embed_dim", embed_dim},
            {"hops", hops},
            {"negatives_per_positive", negatives_per_positive},
            {"learning_rate", learning_rate},
            {"epochs", epochs},
            {"top_k", top_k},
            {"seed", seed},
            {"patience", patience},
            {"max_targets_per_step", max_targets_per_step},
            {"residual", residual},
            {"double_precision", double_precision}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.embed_dim = j.value("embed_dim", c.embed_dim);
    c.negatives_per_positive = j.value("negatives_per_positive", c.negatives_per_positive);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.top_k = j.value("top_k", c.top_k);
    c.seed = j.value("seed", c.seed);
    c.patience = j.value("patience", c.patience);
    c.max_targets_per_step = j.value("max_targets_per_step", c.max_targets_per_step);
    c.residual = j.value("residual", c.residual);
    c.double_precision = j.value("double_precision", c.double_precision);
    if (j.value("hops", kHops) != kHops) throw std::invalid_argument("hops is fixed at 3");
    if (c.embed_dim < 1 || c.top_k < 1 || c.epochs < 0 || c.negatives_per_positive < 1 || c.patience < 1 ||
        c.max_targets_per_step < 1) {
        throw std::invalid_argument("model config out of range");
    }
    return c;
}

std::vector<Triple> SlSplit::held_out() const {
    std::vector<Triple> out = valid;
    out.insert(out.end(), test.begin(), test.end());
    return out;
}

SlSplit split_sl(const KnowledgeGraph& kg, const SplitConfig& config) {
    if (std::abs(config.train_frac + config.valid_frac + config.test_frac - 1.0) > 1e-9 || config.train_frac < 0 ||
        config.valid_frac < 0 || config.test_frac < 0) {
        throw std::invalid_argument("split fractions must be non-negative and sum to 1");
    }
    SlSplit split;
    const auto sl = kg.sl_relation();
    if (!sl) return split;
    struct Keyed {
        std::uint64_t key;
        Triple t;
    };
    std::vector<Keyed> keyed;
    const auto& vocab = kg.vocab();
    for (const auto& t : kg.triples()) {
        if (t.relation != *sl) continue;
        std::string_view a = vocab.entity(t.head).id, b = vocab.entity(t.tail).id;
        if (b < a) std::swap(a, b);
        keyed.push_back({keyed_hash(config.seed, a, b), t});
    }
    std::sort(keyed.begin(), keyed.end(), [](const Keyed& x, const Keyed& y) {
        return x.key != y.key ? x.key < y.key : x.t < y.t;
    });
    const auto n = keyed.size();
    const auto n_train = static_cast<std::size_t>(std::llround(config.train_frac * static_cast<double>(n)));
    const auto n_valid = std::min(n - n_train,
                                  static_cast<std::size_t>(std::llround(config.valid_frac * static_cast<double>(n))));
    for (std::size_t i = 0; i < n; ++i) {
        auto& bucket = i < n_train ? split.train : i < n_train + n_valid ? split.valid : split.test;
        bucket.push_back(keyed[i].t);
    }
    for (auto* b : {&split.train, &split.valid, &split.test}) std::sort(b->begin(), b->end());
    return split;
}

PartnerMap partner_map(std::span<const Triple> sl_triples) {
    PartnerMap m;
    for (const auto& t : sl_triples) {
        m[t.head].insert(t.tail);
        m[t.tail].insert(t.head);
    }
    return m;
}

template <typename Scalar>
std::vector<std::pair<EntityId, Scalar>> rank_candidates(const KnowledgeGraph& kg, const Propagation<Scalar>& prop,
                                                         const ModelParams<Scalar>& params,
                                                         const std::unordered_set<EntityId>* exclude,
                                                         std::size_t k) {
    std::vector<std::pair<EntityId, Scalar>> scored;
    for (EntityId c = 0; c < prop.reach.size(); ++c) {
        if (c == prop.primary || prop.reach[c] <= 1 || kg.type_of(c) != EntityType::Gene) continue;
        if (exclude && exclude->contains(c)) continue;
        if (auto s = candidate_score(prop, params, c)) scored.emplace_back(c, *s);
    }
    const auto& vocab = kg.vocab();
    auto better = [&vocab](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return vocab.entity(a.first).id < vocab.entity(b.first).id;
    };
    if (scored.size() > k) {
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(), better);
        scored.resize(k);
    } else {
        std::sort(scored.begin(), scored.end(), better);
    }
    return scored;
}

template <typename Scalar>
EvaluationResult evaluate(const PropagationGraph& graph, const ModelParams<Scalar>& params, const PartnerMap& truth,
                          const PartnerMap& exclude, const ModelConfig& config) {
    const auto queries = sorted_keys(truth);
    struct PerQuery {
        RankingMetrics at_k, at_10;
        double rand_10 = 0, rand_k = 0;
    };
    std::vector<PerQuery> results(queries.size());
    const auto k = static_cast<std::size_t>(config.top_k);
    parallel_for(queries.size(), [&](std::size_t i) {
        const EntityId g = queries[i];
        PropagationOptions options;
        options.residual = config.residual;
        const auto prop = propagate(graph, params, g, options);
        auto ex = exclude.find(g);
        const auto* ex_set = ex == exclude.end() ? nullptr : &ex->second;
        const auto all = rank_candidates(graph.kg(), prop, params, ex_set, std::numeric_limits<std::size_t>::max());
        const auto& t = truth.at(g);
        std::vector<EntityId> ranked;
        ranked.reserve(all.size());
        std::size_t available = 0;
        for (const auto& [c, s] : all) {
            ranked.push_back(c);
            available += t.contains(c);
        }
        results[i].at_k = ranking_metrics(ranked, t, k);
        results[i].at_10 = ranking_metrics(ranked, t, 10);
        results[i].rand_10 = random_precision(ranked.size(), available, 10);
        results[i].rand_k = random_precision(ranked.size(), available, k);
    });
    EvaluationResult out;
    MetricsAccumulator acc_k, acc_10;
    for (const auto& r : results) {
        acc_k.add(r.at_k);
        acc_10.add(r.at_10);
        out.random_precision_at_10 += r.rand_10;
        out.random_precision_at_k += r.rand_k;
    }
    out.at_k = acc_k.mean();
    out.at_10 = acc_10.mean();
    out.queries = results.size();
    if (out.queries) {
        out.random_precision_at_10 /= static_cast<double>(out.queries);
        out.random_precision_at_k /= static_cast<double>(out.queries);
    }
    return out;
}

template EvaluationResult evaluate<double>(const PropagationGraph&, const ModelParams<double>&, const PartnerMap&,
                                           const PartnerMap&, const ModelConfig&);
template EvaluationResult evaluate<float>(const PropagationGraph&, const ModelParams<float>&, const PartnerMap&,
                                          const PartnerMap&, const ModelConfig&);
template std::vector<std::pair<EntityId, double>> rank_candidates<double>(const KnowledgeGraph&,
                                                                          const Propagation<double>&,
                                                                          const ModelParams<double>&,
                                                                          const std::unordered_set<EntityId>*,
                                                                          std::size_t);

nlohmann::json ModelVersion::metrics_json() const {
    auto block = [](const EvaluationResult& r, int k) {
        const std::string sk = std::to_string(k);
        return nlohmann::json{{"precision@" + sk, r.at_k.precision},
                              {"recall@" + sk, r.at_k.recall},
                              {"ndcg@" + sk, r.at_k.ndcg},
                              {"precision@10", r.at_10.precision},
                              {"recall@10", r.at_10.recall},
                              {"ndcg@10", r.at_10.ndcg},
                              {"random_precision@10", r.random_precision_at_10},
                              {"random_precision@" + sk, r.random_precision_at_k},
                              {"queries", r.queries}};
    };
    return {{"test", block(test, config.top_k)},
            {"valid", block(valid, config.top_k)},
            {"initial_loss", initial_loss},
            {"loss_curve", loss_curve},
            {"valid_precision_curve", valid_precision},
            {"best_epoch", best_epoch},
            {"train_seconds", train_seconds}};
}

ModelVersion train(std::shared_ptr<const KnowledgeGraph> kg, const ModelConfig& config, const SplitConfig& split_config,
                   const std::function<void(const TrainProgress&)>& progress) {
    const auto started = std::chrono::steady_clock::now();
    const auto split = split_sl(*kg, split_config);
    if (split.train.size() + split.valid.size() + split.test.size() < 10) {
        throw std::invalid_argument("training needs at least 10 SL triples");
    }
    const auto held_out = split.held_out();
    PropagationGraph graph(kg, held_out);
    const auto train_p = partner_map(split.train);
    const auto valid_p = partner_map(split.valid);
    const auto test_p = partner_map(split.test);
    const auto exclude_valid = merge(train_p, test_p);
    const auto exclude_test = merge(train_p, valid_p);

    ModelVersion mv;
    mv.kg_version = kg->version();
    mv.config = config;
    mv.split = split_config;
    if (config.double_precision) {
        mv.params = fit<double>(graph, train_p, valid_p, exclude_valid, config, mv, progress);
    } else {
        mv.params = fit<float>(graph, train_p, valid_p, exclude_valid, config, mv, progress).cast<double>();
    }
    mv.valid = evaluate(graph, mv.params, valid_p, exclude_valid, config);
    mv.test = evaluate(graph, mv.params, test_p, exclude_test, config);
    mv.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return mv;
}

Predictor::Predictor(std::shared_ptr<const ModelVersion> model, std::shared_ptr<const KnowledgeGraph> kg)
    : model_(std::move(model)), graph_(kg, split_sl(*kg, model_->split).held_out()) {
    const auto sl = kg->sl_relation();
    std::vector<Triple> all;
    for (const auto& t : kg->triples()) {
        if (sl && t.relation == *sl) all.push_back(t);
    }
    all_partners_ = partner_map(all);
    if (static_cast<std::size_t>(model_->params.entity.rows()) != graph_.num_entities() ||
        static_cast<std::size_t>(model_->params.relation.rows()) != graph_.num_relations()) {
        throw std::invalid_argument("model shape does not match the graph vocabulary");
    }
}

std::shared_ptr<const Propagation<double>> Predictor::propagation(EntityId gene) const {
    {
        std::lock_guard lock(cache_mutex_);
        if (auto it = cache_.find(gene); it != cache_.end()) return it->second;
    }
    PropagationOptions options;
    options.residual = model_->config.residual;
    auto prop = std::make_shared<const Propagation<double>>(propagate(graph_, model_->params, gene, options));
    std::lock_guard lock(cache_mutex_);
    if (cache_.size() >= 64) cache_.erase(cache_.begin());
    cache_.emplace(gene, prop);
    return prop;
}

std::vector<Prediction> Predictor::predictions(EntityId gene) const {
    const auto prop = propagation(gene);
    const auto ranked = rank_candidates(kg(), *prop, model_->params, nullptr,
                                        static_cast<std::size_t>(model_->config.top_k));
    std::vector<Prediction> out;
    out.reserve(ranked.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        out.push_back({ranked[i].first, ranked[i].second, static_cast<int>(i) + 1,
                       is_known_partner(gene, ranked[i].first)});
    }
    return out;
}

std::vector<InterpretivePath> Predictor::paths(EntityId gene, EntityId partner, std::size_t max_paths) const {
    return extract_paths(graph_, *propagation(gene), partner, max_paths);
}

bool Predictor::is_known_partner(EntityId gene, EntityId other) const {
    auto it = all_partners_.find(gene);
    return it != all_partners_.end() && it->second.contains(other);
}

}  // namespace slw
