#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "slw/graph_store.hpp"
#include "slw/kg.hpp"

using namespace slw;

namespace {

std::set<std::string> ring_ids(const KnowledgeGraph& kg, const EgoNetwork& ego, std::size_t k) {
    std::set<std::string> out;
    if (k < ego.rings.size()) {
        for (const auto& e : ego.rings[k]) out.insert(kg.vocab().entity(e.entity).id);
    }
    return out;
}

const char* kEntities = "G1\tGene\tCDK1\nG2\tGene\tMYC\nB1\tBP\tDNA_replication\n";

}  // namespace

TEST_CASE("ego network rings on MINI5") {
    const auto kg = fixtures::mini5();
    const auto& v = kg->vocab();
    const auto ego = ego_subgraph(*kg, v.entity_id("CDK1"), 2);
    CHECK(ring_ids(*kg, ego, 0) == std::set<std::string>{"CDK1"});
    CHECK(ring_ids(*kg, ego, 1) == std::set<std::string>{"FARSA", "DNAREP"});
    CHECK(ring_ids(*kg, ego, 2) == std::set<std::string>{"SPS"});

    const auto one = ego_subgraph(*kg, v.entity_id("FARSA"), 1);
    CHECK(ring_ids(*kg, one, 1) == std::set<std::string>{"SPS", "CDK1"});
    CHECK(one.links.at(0).size() == 2);

    CHECK_THROWS_AS(ego_subgraph(*kg, v.entity_id("SPS"), 1), std::invalid_argument);
    CHECK_THROWS_AS(ego_subgraph(*kg, v.entity_id("CDK1"), 0), std::invalid_argument);
}

TEST_CASE("ego network of an isolated gene is empty") {
    auto v = std::make_shared<Vocabulary>();
    v->add_entity({"G1", EntityType::Gene, "A"});
    v->add_entity({"G2", EntityType::Gene, "B"});
    v->add_relation("SL_GsG");
    KnowledgeGraph kg(v, {}, 1);
    const auto ego = ego_subgraph(kg, 0, 2);
    CHECK(ring_ids(kg, ego, 1).empty());
    CHECK(ring_ids(kg, ego, 2).empty());
}

TEST_CASE("ingest reads flat files and counts per type") {
    fixtures::TempDir dir("ingest");
    dir.write("entities.tsv", kEntities);
    dir.write("triples.tsv", "G1\tinvolved_in\tB1\nB1\tinvolved_in_inv\tG1\nG1\tSL_GsG\tG2\n");
    dir.write("diseases.tsv", "D1\tthyroid cancer\tG1\nD1\tthyroid cancer\tG2\n");
    const auto r = ingest(DataFiles::in_directory(dir.path));
    CHECK(r.counts.entities == 3);
    CHECK(r.counts.triples == 3);
    CHECK(r.counts.relations == 3);
    CHECK(r.counts.per_type[static_cast<std::size_t>(EntityType::Gene)] == 2);
    CHECK(r.counts.per_type[static_cast<std::size_t>(EntityType::BP)] == 1);
    REQUIRE(r.diseases.size() == 1);
    CHECK(r.diseases[0].genes.size() == 2);
    const auto& v = r.graph->vocab();
    const auto fwd = v.relation_id("involved_in");
    REQUIRE(v.relation(fwd).inverse.has_value());
    CHECK(v.relation(*v.relation(fwd).inverse).id == "involved_in_inv");
    CHECK(r.graph->sl_relation() == v.relation_id("SL_GsG"));
}

TEST_CASE("ingest accepts an empty triples file") {
    fixtures::TempDir dir("empty");
    dir.write("entities.tsv", kEntities);
    dir.write("triples.tsv", "");
    const auto r = ingest(DataFiles::in_directory(dir.path));
    CHECK(r.graph->num_triples() == 0);
    CHECK(r.counts.entities == 3);
}

TEST_CASE("ingest rejects malformed input with file and line") {
    fixtures::TempDir dir("bad");
    dir.write("entities.tsv", kEntities);
    SUBCASE("dangling reference") {
        dir.write("triples.tsv", "G1\tinvolved_in\tB1\nG1\tinvolved_in\tNOPE\n");
        try {
            ingest(DataFiles::in_directory(dir.path));
            FAIL("expected IngestError");
        } catch (const IngestError& e) {
            CHECK(e.line() == 2);
            CHECK(std::string(e.what()).find("NOPE") != std::string::npos);
        }
    }
    SUBCASE("duplicate triple") {
        dir.write("triples.tsv", "G1\tinvolved_in\tB1\nG1\tinvolved_in\tB1\n");
        CHECK_THROWS_AS(ingest(DataFiles::in_directory(dir.path)), IngestError);
    }
    SUBCASE("SL self loop") {
        dir.write("triples.tsv", "G1\tSL_GsG\tG1\n");
        CHECK_THROWS_AS(ingest(DataFiles::in_directory(dir.path)), IngestError);
    }
    SUBCASE("unknown entity type") {
        dir.write("entities.tsv", "G1\tProtein\tX\n");
        dir.write("triples.tsv", "");
        CHECK_THROWS_AS(ingest(DataFiles::in_directory(dir.path)), IngestError);
    }
    SUBCASE("wrong column count") {
        dir.write("triples.tsv", "G1\tinvolved_in\n");
        CHECK_THROWS_AS(ingest(DataFiles::in_directory(dir.path)), IngestError);
    }
}

TEST_CASE("relations.tsv pairs inverses explicitly") {
    fixtures::TempDir dir("rel");
    dir.write("entities.tsv", kEntities);
    dir.write("relations.tsv", "has_part\tpart_of\n");
    dir.write("triples.tsv", "G1\thas_part\tB1\nB1\tpart_of\tG1\n");
    const auto r = ingest(DataFiles::in_directory(dir.path));
    const auto& v = r.graph->vocab();
    CHECK(v.relation(v.relation_id("has_part")).inverse == v.relation_id("part_of"));
    const auto inverse = r.graph->inverse_of(r.graph->triple(0));
    REQUIRE(inverse.has_value());
    CHECK(*inverse == r.graph->triple(1));
}

TEST_CASE("triples round-trip through the flat format") {
    const auto kg = fixtures::mini5();
    fixtures::TempDir dir("rt");
    write_triples(dir.path / "triples.tsv", *kg);
    const auto back = read_triples(dir.path / "triples.tsv", kg->vocab());
    CHECK(std::vector<Triple>(kg->triples().begin(), kg->triples().end()) == back);
}

TEST_CASE("deleting triples publishes a new version") {
    GraphStore store(fixtures::mini5());
    const auto& kg = *store.current();
    const Triple t1 = fixtures::t(kg, "FARSA", "involved_in", "SPS");
    const auto v0 = store.version();
    const auto r = store.delete_triples(std::vector<Triple>{t1});
    CHECK(r.deleted == 1);
    CHECK(r.version == v0 + 1);
    CHECK(store.current()->num_triples() == 3);
    CHECK_FALSE(store.current()->contains(t1));

    const auto again = store.delete_triples(std::vector<Triple>{t1});
    CHECK(again.deleted == 0);
    CHECK(again.skipped.size() == 1);
    CHECK(again.version == v0 + 1);
}

TEST_CASE("deleting a triple removes its paired inverse") {
    fixtures::TempDir dir("inv");
    dir.write("entities.tsv", kEntities);
    dir.write("triples.tsv", "G1\tinvolved_in\tB1\nB1\tinvolved_in_inv\tG1\nG2\tinvolved_in\tB1\n");
    const auto r = ingest(DataFiles::in_directory(dir.path));
    GraphStore store(r.graph);
    const auto rep = store.delete_triples(std::vector<Triple>{fixtures::t(*r.graph, "G1", "involved_in", "B1")});
    CHECK(rep.deleted == 2);
    CHECK(rep.inverse_deleted == 1);
    // Oracle: every surviving triple's inverse either survives or never existed.
    const auto now = store.current();
    CHECK(now->num_triples() == 1);
    for (const auto& t : now->triples()) {
        if (auto inv = r.graph->inverse_of(t); inv && r.graph->contains(*inv)) CHECK(now->contains(*inv));
    }
}

TEST_CASE("snapshot and restore round-trip") {
    GraphStore store(fixtures::mini5());
    const auto original = store.current();
    const auto pinned = store.snapshot();
    store.delete_triples(std::vector<Triple>(original->triples().begin(), original->triples().begin() + 2));
    const auto mid = store.snapshot();
    store.delete_triples(std::vector<Triple>{original->triple(3)});
    const auto restored = store.restore(pinned);
    CHECK(restored > mid);
    const auto now = store.current();
    CHECK(std::vector<Triple>(now->triples().begin(), now->triples().end()) ==
          std::vector<Triple>(original->triples().begin(), original->triples().end()));
    CHECK(content_hash(*now) == content_hash(*original));

    const auto before = store.version();
    CHECK_THROWS(store.restore(9999));
    CHECK(store.version() == before);
    CHECK(store.mutation_log().size() == 3);
}

TEST_CASE("snapshots persist with a verified hash") {
    const auto kg = fixtures::mini5();
    fixtures::TempDir dir("snap");
    const auto where = write_snapshot(dir.path, *kg);
    const auto back = read_snapshot(where, kg->shared_vocab());
    CHECK(back->version() == kg->version());
    CHECK(content_hash(*back) == content_hash(*kg));
    CHECK(content_hash(*kg).size() == 64);
}
