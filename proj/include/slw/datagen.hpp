#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace slw {

/// Parameters of a synthetic corpus. Genes fall into clusters; each cluster
/// owns a block of BPs and genes draw their BPs from their own block. A pair
/// is SL when it shares at least `sl_share` BPs and both genes are
/// SL-competent, a per-gene trait drawn with probability sqrt(p_sl).
struct CorpusSpec {
    std::uint64_t seed = 42;
    int genes = 500;
    int bp = 200;
    int pathways = 50;
    int mf = 40;
    int cc = 60;
    int clusters = 5;
    int bp_per_gene = 16;
    int mf_per_gene = 3;
    int cc_per_gene = 3;
    int pathways_per_gene = 2;
    int bp_links_per_bp = 1;
    int sl_share = 2;
    double p_sl = 0.8;
    double f_noise = 0.1;
    std::string noise_bp = "sensory_perception_of_smell";
    int sequence_length = 600;
    int diseases = 6;
    int genes_per_disease = 15;

    nlohmann::json to_json() const;
    static CorpusSpec from_json(const nlohmann::json& j);  // missing keys keep defaults
};

/// Writes entities.tsv, triples.tsv, relations.tsv, diseases.tsv, genes.tsv,
/// sequences.fasta and manifest.json into `out`. Output depends only on the
/// spec. Throws std::invalid_argument for infeasible specs.
nlohmann::json generate_corpus(const CorpusSpec& spec, const std::filesystem::path& out);

}  // namespace slw
