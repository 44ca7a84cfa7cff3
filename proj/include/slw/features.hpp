#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace slw {

inline constexpr int kDefaultKmer = 4;
inline constexpr int kTextDim = 256;

struct KmerCounts {
    Eigen::VectorXd vector;       // L2-normalised counts over the 4^k alphabet
    std::size_t windows = 0;      // windows counted
    std::size_t skipped = 0;      // windows dropped for containing a non-ACGT base
};

/// Sliding-window k-mer profile. Index of a k-mer is its base-4 value with
/// A=0, C=1, G=2, T=3 and the first base most significant.
KmerCounts kmer_counts(std::string_view sequence, int k = kDefaultKmer);
Eigen::VectorXd kmer_vector(std::string_view sequence, int k = kDefaultKmer);
/// Raw counts before normalisation.
Eigen::VectorXd kmer_raw_counts(std::string_view sequence, int k, std::size_t* skipped = nullptr);
std::size_t kmer_index(std::string_view kmer);

/// Signed feature hashing of lowercase alphanumeric tokens into 256 buckets.
Eigen::VectorXd text_vector(std::string_view description);
std::vector<std::string> tokenize(std::string_view text);

struct GeneRecord {
    std::string id;
    std::string symbol;
    std::string description;
};

struct GeneFeature {
    std::string gene_id;
    Eigen::VectorXd kmer;
    Eigen::VectorXd text;
    Eigen::VectorXd fused;  // [kmer; text]
};

std::vector<GeneRecord> read_genes(const std::filesystem::path& path);
/// Record id is the first whitespace-delimited header token.
std::map<std::string, std::string> read_fasta(const std::filesystem::path& path);

/// Genes without a sequence get an all-zero k-mer half.
std::vector<GeneFeature> gene_features(const std::vector<GeneRecord>& genes,
                                       const std::map<std::string, std::string>& sequences,
                                       int k = kDefaultKmer);

/// Rows are genes.
Eigen::MatrixXd stack_fused(const std::vector<GeneFeature>& features);

struct ProjectionConfig {
    std::uint64_t seed = 42;
    int pca_dims = 10;
    int neighbors = 15;
    int iterations = 200;
    int negative_samples = 5;
};

struct EmbeddingPoint {
    std::string gene_id;
    double x = 0;
    double y = 0;
    std::vector<std::string> neighbors;  // nearest fused-space neighbours
};

/// Principal-component scores of the row-centred data, sign-fixed so each
/// component's largest loading is positive.
Eigen::MatrixXd pca_project(const Eigen::MatrixXd& rows, int dims);

/// Indices of the k nearest rows (Euclidean, ties by index), excluding self.
std::vector<std::vector<int>> knn_indices(const Eigen::MatrixXd& rows, int k);

/// Seeded neighbour embedding: PCA initialisation, kNN attraction and sampled
/// repulsion. Deterministic for a given (input, seed).
Eigen::MatrixX2d neighbor_embedding(const Eigen::MatrixXd& rows, const ProjectionConfig& config = {});

std::vector<EmbeddingPoint> project_2d(const std::vector<GeneFeature>& features, const ProjectionConfig& config = {});

}  // namespace slw
