#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "slw/canonical_json.hpp"
#include "slw/datagen.hpp"
#include "slw/session.hpp"

using namespace slw;

namespace {

struct Fixture {
    fixtures::TempDir dir{"session"};
    nlohmann::json manifest;
    SessionOptions opts;

    Fixture() {
        CorpusSpec spec;
        spec.genes = 60;
        spec.bp = 30;
        spec.pathways = 10;
        spec.mf = 10;
        spec.cc = 10;
        spec.clusters = 3;
        spec.bp_per_gene = 5;
        spec.diseases = 2;
        spec.genes_per_disease = 5;
        spec.sequence_length = 60;
        manifest = generate_corpus(spec, dir.path / "corpus");
        opts.data_dir = dir.path / "corpus";
        opts.models_dir = dir.path / "models";
        opts.model.embed_dim = 8;
        opts.model.epochs = 2;
        opts.model.negatives_per_positive = 8;
    }
};

}  // namespace

TEST_CASE("canonical JSON sorts keys and fixes float format") {
    const nlohmann::json j{{"b", 0.1}, {"a", {1, 2.5, "x"}}, {"c", nullptr}, {"d", -0.0}};
    CHECK(canonical_dump(j) == R"({"a":[1,2.5,"x"],"b":0.1,"c":null,"d":0})");
    CHECK(canonical_dump(nlohmann::json(0.1 + 0.2)) == "0.3");
    CHECK(canonical_dump(nlohmann::json(1.0 / 3.0)) == "0.333333333");
}

TEST_CASE("gene search, diseases and errors") {
    Fixture f;
    Session s(f.opts);
    const auto hits = s.search_genes("CDK");
    REQUIRE(!hits.empty());
    CHECK(hits[0]["symbol"] == "CDK1");
    CHECK(s.search_genes("").empty());

    const auto& d = f.manifest["diseases"][0];
    std::set<std::string> want, got;
    for (const auto& g : d["genes"]) want.insert(g.get<std::string>());
    const auto listed = s.disease_genes(d["id"]);
    for (const auto& g : listed["genes"]) got.insert(g["id"].get<std::string>());
    CHECK(got == want);
    CHECK_THROWS_AS(s.disease_genes("D999"), NotFound);
    CHECK_THROWS_AS(s.ego("NOPE", 1), NotFound);
    CHECK_THROWS_AS(s.apply("nothing pending"), std::invalid_argument);
    CHECK_THROWS_AS(s.activate(5), NotFound);
}

TEST_CASE("retrain, activation and operation records") {
    Fixture f;
    Session s(f.opts);
    const auto job = s.retrain();
    // The job holds the training slot from the moment retrain returns.
    const std::string gene = f.manifest["noise"]["genes"][0];
    const std::string bp = f.manifest["noise"]["bp"];
    const nlohmann::json strategy{{"anchor", {{"head", gene}, {"relation", "involved_in"}, {"tail", bp}}},
                                  {"pattern", "H-H-L"}};
    const auto formulated = s.formulate(strategy);
    CHECK(formulated["matched"] == f.manifest["noise"]["genes"].size());
    CHECK(formulated["lattice"]["counts"].size() == 8);
    CHECK_THROWS_AS(s.retrain(), Conflict);
    CHECK_THROWS_AS(s.apply("too early"), Conflict);
    const auto done = s.wait_for_job(job.at("job"));
    REQUIRE(done["state"] == "done");
    CHECK(done["model_version"] == 1);

    const auto preds = s.predictions(gene);
    REQUIRE(!preds["predictions"].empty());
    CHECK(preds["predictions"][0]["rank"] == 1);
    CHECK_THROWS_AS(s.predictions("G9999"), NotFound);

    const auto op = s.apply("drop noise");
    CHECK(op["deleted"] == f.manifest["noise"]["triples"].size());
    CHECK(op["model_version"].is_null());
    CHECK(s.ego(gene, 2)["kg_version"] == done["kg_version"]);
    CHECK(s.ego(gene, 2, true)["kg_version"] == op["kg_version"]);

    const auto job2 = s.wait_for_job(s.retrain().at("job"));
    REQUIRE(job2["state"] == "done");
    CHECK(s.operations()[0]["model_version"] == 2);
    auto models = s.models();
    REQUIRE(models.size() == 2);
    CHECK(models[0]["active"] == true);
    CHECK(models[1]["active"] == false);
    models = s.activate(2);
    CHECK(models[0]["active"] == false);
    CHECK(models[1]["active"] == true);

    const auto served = s.paths(gene, {});
    for (const auto& partner : served["partners"]) {
        for (const auto& path : partner["paths"]) {
            for (const auto& n : path["nodes"]) CHECK(n["id"] != bp);
        }
    }
    CHECK(s.edit_note(op["id"], "renamed")["note"] == "renamed");

    // State survives a restart.
    const auto before = canonical_dump(s.predictions(gene));
    Session again(f.opts);
    CHECK(again.models().size() == 2);
    CHECK(again.operations().size() == 1);
    CHECK(canonical_dump(again.predictions(gene)) == before);
}
