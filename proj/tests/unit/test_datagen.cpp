#include <doctest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "slw/datagen.hpp"

using namespace slw;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> rows(const std::filesystem::path& p) {
    std::vector<std::vector<std::string>> out;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, '\t')) cols.push_back(c);
        out.push_back(cols);
    }
    return out;
}

CorpusSpec small() {
    CorpusSpec s;
    s.genes = 80;
    s.bp = 40;
    s.pathways = 10;
    s.mf = 10;
    s.cc = 10;
    s.clusters = 4;
    s.bp_per_gene = 6;
    s.diseases = 3;
    s.genes_per_disease = 6;
    s.sequence_length = 50;
    return s;
}

}  // namespace

TEST_CASE("same spec writes byte-identical corpora") {
    fixtures::TempDir a("dg-a"), b("dg-b");
    generate_corpus(small(), a.path);
    generate_corpus(small(), b.path);
    for (const char* f : {"entities.tsv", "triples.tsv", "relations.tsv", "diseases.tsv", "genes.tsv",
                          "sequences.fasta", "manifest.json"}) {
        CHECK_MESSAGE(slurp(a.path / f) == slurp(b.path / f), f);
    }
    auto other = small();
    other.seed = 43;
    fixtures::TempDir c("dg-c");
    generate_corpus(other, c.path);
    CHECK(slurp(a.path / "triples.tsv") != slurp(c.path / "triples.tsv"));
}

TEST_CASE("SL pairs follow the planted rule") {
    fixtures::TempDir dir("dg-rule");
    const auto spec = small();
    const auto manifest = generate_corpus(spec, dir.path);
    std::set<std::string> competent;
    for (const auto& g : manifest["competent_genes"]) competent.insert(g.get<std::string>());
    std::map<std::string, std::string> type;
    std::vector<std::string> genes;
    for (const auto& r : rows(dir.path / "entities.tsv")) {
        type[r[0]] = r[1];
        if (r[1] == "Gene") genes.push_back(r[0]);
    }
    std::map<std::string, std::set<std::string>> bps;
    std::set<std::pair<std::string, std::string>> sl;
    for (const auto& r : rows(dir.path / "triples.tsv")) {
        if (r[1] == "SL_GsG") sl.insert({std::min(r[0], r[2]), std::max(r[0], r[2])});
        if (type[r[0]] == "Gene" && type[r[2]] == "BP" && r[2] != spec.noise_bp) bps[r[0]].insert(r[2]);
    }
    std::set<std::pair<std::string, std::string>> expected;
    for (std::size_t i = 0; i < genes.size(); ++i) {
        for (std::size_t j = i + 1; j < genes.size(); ++j) {
            const auto &a = genes[i], &b = genes[j];
            int shared = 0;
            for (const auto& x : bps[a]) shared += bps[b].contains(x);
            if (shared >= spec.sl_share && competent.contains(a) && competent.contains(b)) {
                expected.insert({std::min(a, b), std::max(a, b)});
            }
        }
    }
    CHECK(sl == expected);
    CHECK(manifest["counts"]["sl_pairs"] == sl.size());
    CHECK(!sl.empty());
}

TEST_CASE("noise BP covers f_noise of the genes") {
    fixtures::TempDir dir("dg-noise");
    const auto spec = small();
    const auto manifest = generate_corpus(spec, dir.path);
    const auto& noise = manifest["noise"];
    const double frac = static_cast<double>(noise["genes"].size()) / spec.genes;
    CHECK(std::abs(frac - spec.f_noise) <= 1.0 / spec.genes);
    CHECK(noise["triples"].size() == 2 * noise["genes"].size());
    std::size_t in_file = 0;
    for (const auto& r : rows(dir.path / "triples.tsv")) in_file += r[0] == spec.noise_bp || r[2] == spec.noise_bp;
    CHECK(in_file == noise["triples"].size());
    const double tf = noise["triple_fraction"];
    CHECK(tf == doctest::Approx(static_cast<double>(in_file) / manifest["counts"]["triples"].get<double>()));
}

TEST_CASE("manifest counts match the files and ingest") {
    fixtures::TempDir dir("dg-count");
    const auto manifest = generate_corpus(small(), dir.path);
    const auto r = ingest(DataFiles::in_directory(dir.path));
    CHECK(manifest["counts"]["entities"] == rows(dir.path / "entities.tsv").size());
    CHECK(manifest["counts"]["triples"] == rows(dir.path / "triples.tsv").size());
    CHECK(r.counts.triples == rows(dir.path / "triples.tsv").size());
    CHECK(r.counts.relations == manifest["counts"]["relations"]);
    CHECK(r.diseases.size() == 3);
}

TEST_CASE("infeasible specs are rejected") {
    fixtures::TempDir dir("dg-bad");
    auto s = small();
    s.sl_share = s.bp_per_gene + 1;
    CHECK_THROWS_AS(generate_corpus(s, dir.path), std::invalid_argument);
    s = small();
    s.f_noise = 1.5;
    CHECK_THROWS_AS(generate_corpus(s, dir.path), std::invalid_argument);
    CHECK(CorpusSpec::from_json(small().to_json()).to_json() == small().to_json());
}
