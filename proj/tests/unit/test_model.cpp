#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "slw/datagen.hpp"
#include "slw/model/metrics.hpp"
#include "slw/model/paths.hpp"
#include "slw/model/propagation.hpp"
#include "slw/model/train.hpp"

using namespace slw;

namespace {

struct Builder {
    std::shared_ptr<Vocabulary> v = std::make_shared<Vocabulary>();
    std::vector<Triple> triples;

    EntityId node(const std::string& id, EntityType type = EntityType::BP) {
        if (auto e = v->find_entity(id)) return *e;
        return v->add_entity({id, type, id});
    }
    RelationId rel(const std::string& id) {
        if (auto r = v->find_relation(id)) return *r;
        return v->add_relation(id);
    }
    void add(EntityId h, const std::string& r, EntityId t) { triples.push_back({h, rel(r), t}); }
    std::shared_ptr<const KnowledgeGraph> build() { return std::make_shared<const KnowledgeGraph>(v, triples, 1); }
};

ModelParams<double> zero_params(const PropagationGraph& g, Eigen::Index d = 4) {
    return {RowMatrix<double>::Zero(static_cast<Eigen::Index>(g.num_entities()), d),
            RowMatrix<double>::Zero(static_cast<Eigen::Index>(g.num_relations()), d)};
}

CorpusSpec tiny_spec() {
    CorpusSpec s;
    s.genes = 60;
    s.bp = 30;
    s.pathways = 10;
    s.mf = 10;
    s.cc = 10;
    s.clusters = 3;
    s.bp_per_gene = 5;
    s.diseases = 2;
    s.genes_per_disease = 5;
    s.sequence_length = 60;
    return s;
}

}  // namespace

TEST_CASE("metric formulas") {
    const EntityId A = 0, B = 1, X = 2;
    SUBCASE("hand example") {
        const std::vector<EntityId> r{A, X, B};
        const auto m = ranking_metrics(r, {A, B}, 3);
        CHECK(m.precision == doctest::Approx(2.0 / 3.0));
        CHECK(m.recall == doctest::Approx(1.0));
        CHECK(m.ndcg == doctest::Approx(1.5 / (1.0 + 1.0 / std::log2(3.0))));
    }
    SUBCASE("perfect ranking") {
        const std::vector<EntityId> r{A, B};
        const auto m = ranking_metrics(r, {A, B}, 2);
        CHECK(m.precision == 1.0);
        CHECK(m.recall == 1.0);
        CHECK(m.ndcg == doctest::Approx(1.0));
    }
    SUBCASE("no hits") {
        const std::vector<EntityId> r{X, 7, 8};
        const auto m = ranking_metrics(r, {A, B}, 3);
        CHECK(m.precision == 0.0);
        CHECK(m.recall == 0.0);
        CHECK(m.ndcg == 0.0);
    }
    CHECK_THROWS_AS(ranking_metrics(std::vector<EntityId>{A}, {A}, 0), std::invalid_argument);
    CHECK(random_precision(100, 5, 10) == doctest::Approx(0.05));
    CHECK(random_precision(4, 2, 10) == doctest::Approx(0.4 * 0.5));

    MetricsAccumulator acc;
    acc.add({1.0, 0.5, 0.25});
    acc.add({0.0, 0.5, 0.75});
    CHECK(acc.mean().precision == doctest::Approx(0.5));
    CHECK(acc.mean().ndcg == doctest::Approx(0.5));
}

TEST_CASE("attention on singleton and symmetric inputs") {
    Builder b;
    const auto g = b.node("g", EntityType::Gene);
    const auto a = b.node("a");
    const auto c = b.node("c");
    b.add(g, "r1", a);
    b.add(g, "r1", c);
    b.add(g, "r2", c);
    const PropagationGraph graph(b.build());
    PropagationOptions all;
    all.final_layer = FinalLayer::All;
    const auto prop = propagate(graph, zero_params(graph), g, all);
    const auto& l1 = prop.layers[1];
    const auto ra = static_cast<std::size_t>(l1.row_of(a));
    const auto rc = static_cast<std::size_t>(l1.row_of(c));
    CHECK(l1.edge_begin[ra + 1] - l1.edge_begin[ra] == 1);
    CHECK(l1.alpha[l1.edge_begin[ra]] == doctest::Approx(1.0));
    REQUIRE(l1.edge_begin[rc + 1] - l1.edge_begin[rc] == 2);
    CHECK(l1.alpha[l1.edge_begin[rc]] == doctest::Approx(0.5));
    CHECK(l1.alpha[l1.edge_begin[rc] + 1] == doctest::Approx(0.5));
}

TEST_CASE("a gene without edges propagates to nothing") {
    Builder b;
    const auto g = b.node("g", EntityType::Gene);
    b.node("h", EntityType::Gene);
    b.rel("SL_GsG");
    const PropagationGraph graph(b.build());
    const auto params = ModelParams<double>::random(2, 1, 4, 1);
    const auto prop = propagate(graph, params, g);
    for (int t = 1; t <= kHops; ++t) CHECK(prop.layers[t].num_rows() == 0);
    CHECK(rank_candidates(graph.kg(), prop, params, nullptr, 50).empty());
}

TEST_CASE("SL edges are walked in both directions") {
    Builder b;
    const auto g = b.node("g", EntityType::Gene);
    const auto h = b.node("h", EntityType::Gene);
    b.add(h, "SL_GsG", g);
    const PropagationGraph graph(b.build());
    CHECK(graph.num_edges() == 2);
    const auto reach = reach_layers(graph, g);
    CHECK((reach[h] & 2U) != 0);
}

TEST_CASE("path weights on a chain and a binary fan") {
    SUBCASE("chain") {
        Builder b;
        const auto g = b.node("g", EntityType::Gene);
        const auto a = b.node("a");
        const auto c = b.node("c");
        const auto p = b.node("p", EntityType::Gene);
        b.add(g, "r", a);
        b.add(a, "r", c);
        b.add(c, "r", p);
        const PropagationGraph graph(b.build());
        const auto prop = propagate(graph, ModelParams<double>::random(4, 1, 4, 9), g);
        const auto paths = extract_paths(graph, prop, p);
        REQUIRE(paths.size() == 1);
        CHECK(paths[0].weight == doctest::Approx(1.0));
        CHECK(paths[0].nodes == std::vector<EntityId>{g, a, c, p});
        CHECK(paths[0].hops() == 3);
    }
    SUBCASE("two relations per hop with uniform logits") {
        Builder b;
        const auto g = b.node("g", EntityType::Gene);
        const auto a = b.node("a");
        const auto c = b.node("c");
        const auto p = b.node("p", EntityType::Gene);
        for (const char* r : {"r1", "r2"}) {
            b.add(g, r, a);
            b.add(a, r, c);
            b.add(c, r, p);
        }
        const PropagationGraph graph(b.build());
        const auto prop = propagate(graph, zero_params(graph), g);
        const auto paths = extract_paths(graph, prop, p);
        REQUIRE(paths.size() == 8);
        for (const auto& path : paths) CHECK(path.weight == doctest::Approx(0.125));
        CHECK(extract_paths(graph, prop, p, 3).size() == 3);
        CHECK(extract_paths(graph, prop, g).empty());
    }
}

TEST_CASE("truncated extraction keeps the heaviest paths in order") {
    Builder b;
    const auto g = b.node("g", EntityType::Gene);
    const auto p = b.node("p", EntityType::Gene);
    std::vector<EntityId> mids;
    for (int i = 0; i < 6; ++i) {
        mids.push_back(b.node("m" + std::to_string(i)));
        b.add(g, "r" + std::to_string(i % 3), mids.back());
        b.add(mids.back(), "s", p);
    }
    const PropagationGraph graph(b.build());
    const auto prop = propagate(graph, ModelParams<double>::random(8, 4, 6, 3), g);
    const auto all = extract_paths(graph, prop, p, std::numeric_limits<std::size_t>::max());
    REQUIRE(all.size() == 6);
    double total = 0.0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        total += all[i].weight;
        if (i > 0) CHECK(all[i - 1].weight >= all[i].weight);
    }
    CHECK(total == doctest::Approx(1.0));
    const auto top = extract_paths(graph, prop, p, 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].nodes == all[0].nodes);
    CHECK(top[1].nodes == all[1].nodes);
}

TEST_CASE("layer aggregate tallies") {
    Builder b;
    const auto g = b.node("g", EntityType::Gene);
    const auto x = b.node("x");
    const auto y = b.node("y", EntityType::Pathway);
    const auto p = b.node("p", EntityType::Gene);
    b.add(g, "r", x);
    b.add(g, "s", y);
    b.add(x, "r", p);
    b.add(g, "SL_GsG", p);
    const auto kg = b.build();
    const auto r = kg->vocab().relation_id("r");
    const auto s = kg->vocab().relation_id("s");
    const auto sl = kg->vocab().relation_id("SL_GsG");

    SUBCASE("single path") {
        const std::vector<InterpretivePath> paths{{{g, x, p}, {r, r}, {0, 1}, 0.3}};
        const auto agg = aggregate_layers(*kg, paths);
        for (int l = 0; l <= 2; ++l) {
            REQUIRE(agg.entities[l].size() == 1);
            CHECK(agg.entities[l][0].weight == doctest::Approx(1.0));
        }
        CHECK(agg.mass[0] == doctest::Approx(0.3));
    }
    SUBCASE("two paths split by weight") {
        const std::vector<InterpretivePath> paths{{{g, x, p}, {r, r}, {0, 1}, 0.75}, {{g, y}, {s}, {2}, 0.25}};
        const auto agg = aggregate_layers(*kg, paths);
        REQUIRE(agg.entities[1].size() == 2);
        CHECK(agg.entities[1][0].entity == x);
        CHECK(agg.entities[1][0].weight == doctest::Approx(0.75));
        CHECK(agg.entities[1][1].weight == doctest::Approx(0.25));
    }
    SUBCASE("flow equals a brute-force tally") {
        const std::vector<InterpretivePath> paths{
            {{g, x, p}, {r, r}, {0, 1}, 0.5}, {{g, y}, {s}, {2}, 0.2}, {{g, p}, {sl}, {3}, 0.3}};
        const auto agg = aggregate_layers(*kg, paths);
        const auto G = static_cast<Eigen::Index>(EntityType::Gene);
        const auto BP = static_cast<Eigen::Index>(EntityType::BP);
        const auto PW = static_cast<Eigen::Index>(EntityType::Pathway);
        CHECK(agg.flow[0](G, BP) == doctest::Approx(0.5));
        CHECK(agg.flow[0](G, PW) == doctest::Approx(0.2));
        CHECK(agg.flow[0](G, G) == doctest::Approx(0.3));
        CHECK(agg.flow[0].sum() == doctest::Approx(1.0));
        // Layer 1 carries 1.0 of mass: BP 0.5 continues, Pathway 0.2 and Gene 0.3 stop.
        CHECK(agg.flow[1](BP, G) == doctest::Approx(0.5));
        CHECK(agg.terminal[1][static_cast<std::size_t>(PW)] == doctest::Approx(0.2));
        CHECK(agg.terminal[1][static_cast<std::size_t>(G)] == doctest::Approx(0.3));
        CHECK(agg.relations[0].at(r) == doctest::Approx(0.5));
        CHECK(agg.relations[1].at(r) == doctest::Approx(1.0));
        CHECK(agg.type_weights[2][static_cast<std::size_t>(G)] == doctest::Approx(1.0));
    }
    CHECK(aggregate_layers(*kg, {}).empty());
}

TEST_CASE("the only other gene ranks first once its SL edge is held out") {
    Builder b;
    const auto g = b.node("A", EntityType::Gene);
    const auto h = b.node("B", EntityType::Gene);
    const auto bp = b.node("bp");
    b.add(g, "SL_GsG", h);
    b.add(g, "involved_in", bp);
    b.add(bp, "involved_in_inv", h);
    const auto kg = b.build();
    const std::vector<Triple> held{kg->triple(0)};
    const PropagationGraph graph(kg, held);
    CHECK(graph.num_edges() == 2);
    const auto params = ModelParams<double>::random(3, 3, 4, 5);
    const auto prop = propagate(graph, params, g);
    const auto ranked = rank_candidates(*kg, prop, params, nullptr, 50);
    REQUIRE(ranked.size() == 1);
    CHECK(ranked[0].first == h);
}

TEST_CASE("SL split is stable and keyed by pair") {
    fixtures::TempDir dir("split");
    generate_corpus(tiny_spec(), dir.path);
    const auto kg = ingest(DataFiles::in_directory(dir.path)).graph;
    const SplitConfig cfg;
    const auto a = split_sl(*kg, cfg);
    const auto b = split_sl(*kg, cfg);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    const auto n = a.train.size() + a.valid.size() + a.test.size();
    CHECK(n == static_cast<std::size_t>(std::count_if(kg->triples().begin(), kg->triples().end(),
                                                      [&](const Triple& t) { return t.relation == *kg->sl_relation(); })));
    CHECK(a.train.size() == static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n))));

    // Removing an unrelated triple leaves every pair where it was.
    std::vector<Triple> fewer;
    for (const auto& t : kg->triples()) {
        if (t.relation != *kg->sl_relation() && fewer.size() + 1 < kg->num_triples()) fewer.push_back(t);
        if (t.relation == *kg->sl_relation()) fewer.push_back(t);
    }
    auto pruned = std::make_shared<const KnowledgeGraph>(kg->shared_vocab(), std::vector<Triple>(fewer.begin() + 1, fewer.end()), 2);
    const auto c = split_sl(*pruned, cfg);
    std::set<Triple> ta(a.test.begin(), a.test.end()), tc(c.test.begin(), c.test.end());
    CHECK(ta == tc);

    SplitConfig bad;
    bad.train_frac = 0.9;
    CHECK_THROWS_AS(split_sl(*kg, bad), std::invalid_argument);
}

TEST_CASE("training is deterministic and serves ranked predictions") {
    fixtures::TempDir dir("train");
    generate_corpus(tiny_spec(), dir.path);
    const auto kg = ingest(DataFiles::in_directory(dir.path)).graph;
    ModelConfig cfg;
    cfg.embed_dim = 8;
    cfg.epochs = 3;
    cfg.negatives_per_positive = 8;
    const auto a = train(kg, cfg, SplitConfig{});
    const auto b = train(kg, cfg, SplitConfig{});
    CHECK(a.loss_curve == b.loss_curve);
    CHECK(a.test.at_k.precision == b.test.at_k.precision);
    CHECK(a.params.entity == b.params.entity);
    CHECK(a.loss_curve.size() <= 3);
    CHECK(a.kg_version == kg->version());
    CHECK(a.initial_loss > 0.0);

    const Predictor predictor(std::make_shared<ModelVersion>(a), kg);
    for (EntityId g : kg->vocab().entities_of_type(EntityType::Gene)) {
        const auto preds = predictor.predictions(g);
        CHECK(preds.size() <= 50);
        for (std::size_t i = 0; i < preds.size(); ++i) {
            CHECK(preds[i].rank == static_cast<int>(i) + 1);
            CHECK(preds[i].partner != g);
            if (i > 0) CHECK(preds[i - 1].score >= preds[i].score);
            CHECK(preds[i].correct == predictor.is_known_partner(g, preds[i].partner));
        }
    }
}

TEST_CASE("model config JSON keeps defaults for missing keys") {
    const auto c = ModelConfig::from_json({{"epochs", 7}});
    CHECK(c.epochs == 7);
    CHECK(c.embed_dim == 64);
    CHECK(ModelConfig::from_json(c.to_json()).to_json() == c.to_json());
}
