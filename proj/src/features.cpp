#include "slw/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "slw/kg.hpp"

namespace slw {

namespace {

int base_code(char c) {
    switch (c) {
        case 'A': case 'a': return 0;
        case 'C': case 'c': return 1;
        case 'G': case 'g': return 2;
        case 'T': case 't': return 3;
        default: return -1;
    }
}

void normalize(Eigen::VectorXd& v) {
    const double n = v.norm();
    if (n > 0.0) v /= n;
}

constexpr std::uint64_t kTextHashSeed = 0x5eed5eed2024ULL;

std::uint64_t seeded_fnv1a(std::string_view s, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    // final avalanche so neighbouring buckets are not correlated with suffixes
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return h;
}

}  // namespace

std::size_t kmer_index(std::string_view kmer) {
    std::size_t idx = 0;
    for (char c : kmer) {
        const int code = base_code(c);
        if (code < 0) throw std::invalid_argument("non-ACGT base in k-mer");
        idx = idx * 4 + static_cast<std::size_t>(code);
    }
    return idx;
}

Eigen::VectorXd kmer_raw_counts(std::string_view sequence, int k, std::size_t* skipped) {
    if (k < 1 || k > 8) throw std::invalid_argument("k must be in [1, 8]");
    const std::size_t dim = std::size_t{1} << (2 * k);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    std::size_t dropped = 0;
    const auto ku = static_cast<std::size_t>(k);
    if (sequence.size() >= ku) {
        const std::size_t mask = dim - 1;
        std::size_t code = 0;
        std::size_t valid_run = 0;  // consecutive valid bases ending here
        for (std::size_t i = 0; i < sequence.size(); ++i) {
            const int b = base_code(sequence[i]);
            if (b < 0) {
                valid_run = 0;
            } else {
                code = ((code << 2) | static_cast<std::size_t>(b)) & mask;
                ++valid_run;
            }
            if (i + 1 < ku) continue;
            if (valid_run >= ku) {
                counts[static_cast<Eigen::Index>(code)] += 1.0;
            } else {
                ++dropped;
            }
        }
    }
    if (skipped) *skipped = dropped;
    return counts;
}

KmerCounts kmer_counts(std::string_view sequence, int k) {
    KmerCounts out;
    out.vector = kmer_raw_counts(sequence, k, &out.skipped);
    out.windows = static_cast<std::size_t>(out.vector.sum());
    normalize(out.vector);
    return out;
}

Eigen::VectorXd kmer_vector(std::string_view sequence, int k) { return kmer_counts(sequence, k).vector; }

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

Eigen::VectorXd text_vector(std::string_view description) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(kTextDim);
    for (const auto& token : tokenize(description)) {
        const std::uint64_t h = seeded_fnv1a(token, kTextHashSeed);
        const auto bucket = static_cast<Eigen::Index>(h % kTextDim);
        v[bucket] += (h >> 63) ? -1.0 : 1.0;
    }
    normalize(v);
    return v;
}

std::vector<GeneRecord> read_genes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError(path.string(), 0, "cannot open file");
    std::vector<GeneRecord> genes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto f = split_tabs(line);
        if (f.size() != 3) throw IngestError(path.string(), line_no, "expected 3 tab-separated fields");
        genes.push_back({std::string(f[0]), std::string(f[1]), std::string(f[2])});
    }
    return genes;
}

std::map<std::string, std::string> read_fasta(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError(path.string(), 0, "cannot open file");
    std::map<std::string, std::string> records;
    std::string line;
    std::string* current = nullptr;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '>') {
            std::istringstream header(line.substr(1));
            std::string id;
            header >> id;
            if (id.empty()) throw IngestError(path.string(), line_no, "FASTA header without id");
            current = &records[id];
            current->clear();
        } else {
            if (!current) throw IngestError(path.string(), line_no, "sequence data before first header");
            *current += line;
        }
    }
    return records;
}

std::vector<GeneFeature> gene_features(const std::vector<GeneRecord>& genes,
                                       const std::map<std::string, std::string>& sequences, int k) {
    std::vector<GeneFeature> out;
    out.reserve(genes.size());
    const auto kdim = static_cast<Eigen::Index>(std::size_t{1} << (2 * k));
    for (const auto& g : genes) {
        GeneFeature f;
        f.gene_id = g.id;
        auto seq = sequences.find(g.id);
        f.kmer = seq == sequences.end() ? Eigen::VectorXd::Zero(kdim) : kmer_vector(seq->second, k);
        f.text = text_vector(g.description);
        f.fused.resize(f.kmer.size() + f.text.size());
        f.fused << f.kmer, f.text;
        out.push_back(std::move(f));
    }
    return out;
}

Eigen::MatrixXd stack_fused(const std::vector<GeneFeature>& features) {
    if (features.empty()) return {};
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(features.size()), features.front().fused.size());
    for (std::size_t i = 0; i < features.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = features[i].fused.transpose();
    return rows;
}

Eigen::MatrixXd pca_project(const Eigen::MatrixXd& rows, int dims) {
    const Eigen::MatrixXd centered = rows.rowwise() - rows.colwise().mean();
    const Eigen::Index out_dims = std::min<Eigen::Index>(dims, rows.cols());
    // Gram matrix side keeps the eigenproblem at min(n, D).
    Eigen::MatrixXd basis;
    if (rows.rows() < rows.cols()) {
        const Eigen::MatrixXd gram = centered * centered.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
        Eigen::MatrixXd vecs = centered.transpose() * solver.eigenvectors().rowwise().reverse();
        basis = vecs.leftCols(std::min(out_dims, vecs.cols()));
        for (Eigen::Index c = 0; c < basis.cols(); ++c) {
            const double n = basis.col(c).norm();
            if (n > 1e-12) basis.col(c) /= n;
        }
    } else {
        const Eigen::MatrixXd cov = centered.transpose() * centered;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
        basis = solver.eigenvectors().rowwise().reverse().leftCols(out_dims);
    }
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
        Eigen::Index arg;
        basis.col(c).cwiseAbs().maxCoeff(&arg);
        if (basis(arg, c) < 0) basis.col(c) *= -1.0;
    }
    return centered * basis;
}

std::vector<std::vector<int>> knn_indices(const Eigen::MatrixXd& rows, int k) {
    const auto n = static_cast<int>(rows.rows());
    const Eigen::VectorXd sq = rows.rowwise().squaredNorm();
    const Eigen::MatrixXd dist = (sq.replicate(1, n) + sq.transpose().replicate(n, 1) - 2.0 * rows * rows.transpose());
    const int kk = std::min(k, n - 1);
    std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), 0);
        auto closer = [&](int a, int b) {
            const double da = a == i ? -1.0 : std::max(0.0, dist(i, a));
            const double db = b == i ? -1.0 : std::max(0.0, dist(i, b));
            return da != db ? da < db : a < b;
        };
        std::partial_sort(order.begin(), order.begin() + kk + 1, order.end(), closer);
        out[static_cast<std::size_t>(i)].assign(order.begin() + 1, order.begin() + kk + 1);
    }
    return out;
}

Eigen::MatrixX2d neighbor_embedding(const Eigen::MatrixXd& rows, const ProjectionConfig& config) {
    const auto n = static_cast<int>(rows.rows());
    if (n < 2) throw std::invalid_argument("projection needs at least two genes");

    const Eigen::MatrixXd reduced = pca_project(rows, config.pca_dims);
    Eigen::MatrixX2d y = Eigen::MatrixX2d::Zero(n, 2);
    const Eigen::Index init_dims = std::min<Eigen::Index>(2, reduced.cols());
    y.leftCols(init_dims) = reduced.leftCols(init_dims);
    const double extent = y.cwiseAbs().maxCoeff();
    if (extent > 0.0) y *= 10.0 / extent;

    // Symmetrised kNN edge list.
    const auto knn = knn_indices(reduced, config.neighbors);
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) {
        for (int j : knn[static_cast<std::size_t>(i)]) edges.emplace_back(std::min(i, j), std::max(i, j));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    // Curve parameters of the low-dimensional similarity 1 / (1 + a d^(2b)).
    constexpr double a = 1.577;
    constexpr double b = 0.895;
    static constexpr double clip = 4.0;

    std::mt19937_64 rng(config.seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    auto clamp = [](double g) { return std::clamp(g, -clip, clip); };

    for (int it = 0; it < config.iterations; ++it) {
        const double lr = 1.0 - static_cast<double>(it) / config.iterations;
        for (auto [i, j] : edges) {
            Eigen::RowVector2d diff = y.row(i) - y.row(j);
            double d2 = diff.squaredNorm();
            if (d2 > 0.0) {
                const double coeff = -2.0 * a * b * std::pow(d2, b - 1.0) / (1.0 + a * std::pow(d2, b));
                for (int c = 0; c < 2; ++c) {
                    const double g = clamp(coeff * diff[c]) * lr;
                    y(i, c) += g;
                    y(j, c) -= g;
                }
            }
            for (int s = 0; s < config.negative_samples; ++s) {
                const int k = pick(rng);
                if (k == i) continue;
                diff = y.row(i) - y.row(k);
                d2 = diff.squaredNorm();
                const double coeff = 2.0 * b / ((0.001 + d2) * (1.0 + a * std::pow(d2, b)));
                for (int c = 0; c < 2; ++c) {
                    y(i, c) += clamp(coeff * diff[c]) * lr;
                }
            }
        }
    }
    return y;
}

std::vector<EmbeddingPoint> project_2d(const std::vector<GeneFeature>& features, const ProjectionConfig& config) {
    if (features.size() < 2) throw std::invalid_argument("projection needs at least two genes");
    const Eigen::MatrixXd rows = stack_fused(features);
    const Eigen::MatrixX2d y = neighbor_embedding(rows, config);
    const auto knn = knn_indices(rows, config.neighbors);
    std::vector<EmbeddingPoint> points;
    points.reserve(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        EmbeddingPoint p{features[i].gene_id, y(static_cast<Eigen::Index>(i), 0), y(static_cast<Eigen::Index>(i), 1), {}};
        for (int j : knn[i]) p.neighbors.push_back(features[static_cast<std::size_t>(j)].gene_id);
        points.push_back(std::move(p));
    }
    return points;
}

}  // namespace slw
