#include <doctest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "slw/features.hpp"

using namespace slw;

TEST_CASE("k-mer counts slide one base at a time") {
    const auto c = kmer_raw_counts("ACGTACGT", 3);
    CHECK(c.size() == 64);
    CHECK(c[kmer_index("ACG")] == 2);
    CHECK(c[kmer_index("CGT")] == 2);
    CHECK(c[kmer_index("GTA")] == 1);
    CHECK(c[kmer_index("TAC")] == 1);
    CHECK(c.sum() == 6);

    const auto a = kmer_raw_counts("AAAA", 4);
    CHECK(a[0] == 1);
    CHECK(a.sum() == 1);

    const auto shortseq = kmer_counts("ACG", 4);
    CHECK(shortseq.vector.size() == 256);
    CHECK(shortseq.vector.isZero());
    CHECK(shortseq.windows == 0);
}

TEST_CASE("k-mer windows with other bases are skipped") {
    const auto c = kmer_counts("ACNGT", 2);
    CHECK(c.windows == 2);
    CHECK(c.skipped == 2);
    CHECK(c.vector.norm() == doctest::Approx(1.0));
    CHECK(kmer_index("TT") == 15);
}

TEST_CASE("text features") {
    const std::string d = "cyclin dependent kinase regulating the cell cycle";
    CHECK(text_vector(d) == text_vector(d));
    CHECK(text_vector("").isZero());
    CHECK(text_vector("").size() == kTextDim);
    CHECK(tokenize("RNA-binding, Protein 2") == std::vector<std::string>{"rna", "binding", "protein", "2"});
}

TEST_CASE("descriptions without shared tokens are near orthogonal") {
    // Pairs of 30-token descriptions drawn from two disjoint 200-word vocabularies.
    std::mt19937_64 rng(42);
    auto vocabulary = [](char prefix) {
        std::vector<std::string> words;
        for (int i = 0; i < 200; ++i) words.push_back(std::string(1, prefix) + "word" + std::to_string(i));
        return words;
    };
    const auto va = vocabulary('a'), vb = vocabulary('b');
    auto describe = [&](const std::vector<std::string>& words) {
        std::string d;
        for (int i = 0; i < 30; ++i) d += words[rng() % words.size()] + " ";
        return d;
    };
    double worst = 0.0, mean = 0.0;
    constexpr int kPairs = 2000;
    for (int i = 0; i < kPairs; ++i) {
        const auto x = text_vector(describe(va)), y = text_vector(describe(vb));
        const double c = std::abs(x.dot(y));
        worst = std::max(worst, c);
        mean += c / kPairs;
    }
    MESSAGE("max |cos| " << worst << ", mean " << mean);
    CHECK(worst < 0.3);
    CHECK(mean < 0.1);
}

TEST_CASE("fused features and FASTA parsing") {
    const auto dir = std::filesystem::temp_directory_path() / "slw-unit-fasta";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "s.fasta") << ">G1 some header\nACGT\nACGT\n>G2\nTTTT\n";
        std::ofstream(dir / "genes.tsv") << "G1\tCDK1\tcyclin kinase\nG2\tMYC\ttranscription factor\nG3\tX\tnone\n";
    }
    const auto seqs = read_fasta(dir / "s.fasta");
    CHECK(seqs.at("G1") == "ACGTACGT");
    CHECK(seqs.at("G2") == "TTTT");
    const auto genes = read_genes(dir / "genes.tsv");
    REQUIRE(genes.size() == 3);
    const auto f = gene_features(genes, seqs);
    CHECK(f[0].fused.size() == 256 + kTextDim);
    CHECK(f[2].kmer.isZero());
    CHECK(stack_fused(f).rows() == 3);
    std::filesystem::remove_all(dir);
}

TEST_CASE("duplicated rows land together and runs repeat exactly") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    Eigen::MatrixXd x(40, 8);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
    x.row(7) = x.row(3);
    const auto a = neighbor_embedding(x);
    const auto b = neighbor_embedding(x);
    CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0);
    const auto nn = knn_indices(a, 1);
    CHECK(((nn[3][0] == 7) || (a.row(3) - a.row(7)).norm() < 1e-6));
    CHECK(knn_indices(x, 1)[3][0] == 7);
}

TEST_CASE("PCA scores have the expected shape and sign") {
    Eigen::MatrixXd x(4, 2);
    x << -2, 0, -1, 0, 1, 0, 2, 0;
    const auto p = pca_project(x, 1);
    CHECK(p.rows() == 4);
    CHECK(std::abs(p(0, 0)) == doctest::Approx(2.0));
    CHECK(p(0, 0) * p(3, 0) < 0);
}
