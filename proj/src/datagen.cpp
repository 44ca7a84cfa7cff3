#include "slw/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

namespace slw {

namespace {

struct RelationSpec {
    const char* id;
    const char* head_type;
    const char* tail_type;
};

// Sixteen forward relations; with their "_inv" partners and SL_GsG the corpus
// carries 33 relation types.
constexpr RelationSpec kRelations[] = {
    {"involved_in", "Gene", "BP"},
    {"acts_upstream_of", "Gene", "BP"},
    {"enables", "Gene", "MF"},
    {"contributes_to", "Gene", "MF"},
    {"part_of", "Gene", "CC"},
    {"located_in", "Gene", "CC"},
    {"is_active_in", "Gene", "CC"},
    {"colocalizes_with", "Gene", "CC"},
    {"PARTICIPATES_GpPW", "Gene", "Pathway"},
    {"has_part", "BP", "BP"},
    {"is_a", "BP", "BP"},
    {"regulates", "BP", "BP"},
    {"positively_regulates", "BP", "BP"},
    {"negatively_regulates", "BP", "BP"},
    {"happens_during", "BP", "BP"},
    {"occurs_in", "BP", "CC"},
};

constexpr const char* kPrefixes[] = {"CDK", "RPL", "RPS", "MCM", "POLR", "PSM", "SMC", "ATR", "BRC", "KIF",
                                     "NUP", "EIF", "CCN", "RAD", "MYB", "TOP", "ORC", "PLK", "AUR", "CHK"};

constexpr const char* kCommonWords[] = {"protein", "gene", "encodes", "member", "family", "cellular", "activity",
                                        "binding", "complex", "human", "expressed", "role", "regulation", "domain"};

constexpr const char* kClusterWords[][8] = {
    {"replication", "helicase", "origin", "licensing", "fork", "primase", "chromatin", "s-phase"},
    {"ribosome", "translation", "rrna", "subunit", "elongation", "initiation", "nucleolus", "peptide"},
    {"kinase", "mitosis", "spindle", "checkpoint", "cyclin", "centrosome", "kinetochore", "phosphorylation"},
    {"proteasome", "ubiquitin", "degradation", "chaperone", "folding", "peptidase", "lysosome", "autophagy"},
    {"repair", "recombination", "damage", "nuclease", "mismatch", "crosslink", "telomere", "break"},
    {"transport", "membrane", "channel", "vesicle", "golgi", "secretion", "export", "import"},
    {"transcription", "promoter", "enhancer", "polymerase", "splicing", "mrna", "capping", "termination"},
    {"metabolism", "oxidase", "synthase", "mitochondrial", "glycolysis", "lipid", "redox", "dehydrogenase"},
};

constexpr const char* kDiseaseNames[] = {"thyroid cancer", "breast cancer", "lung adenocarcinoma",
                                         "colorectal cancer", "glioblastoma", "acute myeloid leukemia",
                                         "ovarian cancer", "pancreatic cancer", "melanoma", "prostate cancer"};

constexpr char kBases[] = {'A', 'C', 'G', 'T'};

std::string pad(int value, int width) {
    std::string s = std::to_string(value);
    return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

/// k distinct values from [0, n), ascending.
std::vector<int> sample_distinct(std::mt19937_64& rng, int n, int k) {
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    k = std::min(k, n);
    for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
    }
    all.resize(static_cast<std::size_t>(k));
    std::sort(all.begin(), all.end());
    return all;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument("infeasible corpus spec: " + message);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace

nlohmann::json CorpusSpec::to_json() const {
    return {{"seed", seed},
            {"genes", genes},
            {"bp", bp},
            {"pathways", pathways},
            {"mf", mf},
            {"cc", cc},
            {"clusters", clusters},
            {"bp_per_gene", bp_per_gene},
            {"mf_per_gene", mf_per_gene},
            {"cc_per_gene", cc_per_gene},
            {"pathways_per_gene", pathways_per_gene},
            {"bp_links_per_bp", bp_links_per_bp},
            {"sl_share", sl_share},
            {"p_sl", p_sl},
            {"f_noise", f_noise},
            {"noise_bp", noise_bp},
            {"sequence_length", sequence_length},
            {"diseases", diseases},
            {"genes_per_disease", genes_per_disease}};
}

CorpusSpec CorpusSpec::from_json(const nlohmann::json& j) {
    CorpusSpec s;
    s.seed = j.value("seed", s.seed);
    s.genes = j.value("genes", s.genes);
    s.bp = j.value("bp", s.bp);
    s.pathways = j.value("pathways", s.pathways);
    s.mf = j.value("mf", s.mf);
    s.cc = j.value("cc", s.cc);
    s.clusters = j.value("clusters", s.clusters);
    s.bp_per_gene = j.value("bp_per_gene", s.bp_per_gene);
    s.mf_per_gene = j.value("mf_per_gene", s.mf_per_gene);
    s.cc_per_gene = j.value("cc_per_gene", s.cc_per_gene);
    s.pathways_per_gene = j.value("pathways_per_gene", s.pathways_per_gene);
    s.bp_links_per_bp = j.value("bp_links_per_bp", s.bp_links_per_bp);
    s.sl_share = j.value("sl_share", s.sl_share);
    s.p_sl = j.value("p_sl", s.p_sl);
    s.f_noise = j.value("f_noise", s.f_noise);
    s.noise_bp = j.value("noise_bp", s.noise_bp);
    s.sequence_length = j.value("sequence_length", s.sequence_length);
    s.diseases = j.value("diseases", s.diseases);
    s.genes_per_disease = j.value("genes_per_disease", s.genes_per_disease);
    return s;
}

nlohmann::json generate_corpus(const CorpusSpec& spec, const std::filesystem::path& out) {
    require(spec.genes >= 20, "at least 20 genes are required");
    require(spec.clusters >= 1 && spec.clusters <= static_cast<int>(std::size(kClusterWords)),
            "clusters must be between 1 and 8");
    require(spec.genes >= spec.clusters, "fewer genes than clusters");
    require(spec.bp >= spec.clusters + 1, "need one BP per cluster plus the noise BP");
    const int real_bp = spec.bp - 1;
    const int min_block = real_bp / spec.clusters;
    require(spec.bp_per_gene >= 0 && spec.bp_per_gene <= min_block, "bp_per_gene exceeds the per-cluster BP block");
    require(spec.sl_share >= 1, "sl_share must be positive");
    require(spec.sl_share <= spec.bp_per_gene || spec.p_sl == 0.0,
            "SL rule demands more shared BPs than any gene has, so no SL pair can be planted");
    require(spec.p_sl >= 0.0 && spec.p_sl <= 1.0, "p_sl must be in [0, 1]");
    require(spec.f_noise >= 0.0 && spec.f_noise <= 1.0, "f_noise must be in [0, 1]");
    require(spec.mf >= 0 && spec.cc >= 0 && spec.pathways >= 0, "negative entity count");
    require(spec.mf_per_gene <= spec.mf && spec.cc_per_gene <= spec.cc && spec.pathways_per_gene <= spec.pathways,
            "per-gene annotation count exceeds the entity count");
    require(spec.diseases >= 0 && spec.diseases <= static_cast<int>(std::size(kDiseaseNames)),
            "too many diseases");
    require(spec.genes_per_disease <= spec.genes, "genes_per_disease exceeds genes");
    require(!spec.noise_bp.empty(), "noise_bp must be named");
    require(spec.sequence_length >= 0, "negative sequence length");

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::filesystem::create_directories(out);

    // Entities.
    std::string entities;
    std::vector<std::string> gene_ids, gene_symbols, bp_ids, mf_ids, cc_ids, pw_ids;
    std::vector<int> cluster(static_cast<std::size_t>(spec.genes));
    std::map<std::string, int> prefix_counter;
    for (int i = 0; i < spec.genes; ++i) {
        cluster[static_cast<std::size_t>(i)] = i % spec.clusters;
        gene_ids.push_back("G" + pad(i + 1, 4));
        const char* prefix = kPrefixes[static_cast<std::size_t>(i) % std::size(kPrefixes)];
        gene_symbols.push_back(prefix + std::to_string(++prefix_counter[prefix]));
        entities += gene_ids.back() + "\tGene\t" + gene_symbols.back() + "\n";
    }
    std::vector<int> bp_cluster;
    for (int i = 0; i < real_bp; ++i) {
        const int c = i % spec.clusters;
        bp_cluster.push_back(c);
        bp_ids.push_back("BP" + pad(i + 1, 4));
        const auto& words = kClusterWords[c];
        entities += bp_ids.back() + "\tBP\t" + words[static_cast<std::size_t>(i / spec.clusters) % 8] + "_process_" +
                    std::to_string(i + 1) + "\n";
    }
    entities += spec.noise_bp + "\tBP\t" + spec.noise_bp + "\n";
    for (int i = 0; i < spec.mf; ++i) {
        mf_ids.push_back("MF" + pad(i + 1, 4));
        entities += mf_ids.back() + "\tMF\tmolecular_function_" + std::to_string(i + 1) + "\n";
    }
    for (int i = 0; i < spec.cc; ++i) {
        cc_ids.push_back("CC" + pad(i + 1, 4));
        entities += cc_ids.back() + "\tCC\tcellular_component_" + std::to_string(i + 1) + "\n";
    }
    for (int i = 0; i < spec.pathways; ++i) {
        pw_ids.push_back("PW" + pad(i + 1, 4));
        entities += pw_ids.back() + "\tPathway\tpathway_" + std::to_string(i + 1) + "\n";
    }

    // Annotation triples, each emitted with its inverse.
    std::vector<std::array<std::string, 3>> triples;
    std::set<std::array<std::string, 3>> seen;
    auto emit = [&](const std::string& h, const std::string& r, const std::string& t) {
        if (!seen.insert({h, r, t}).second) return false;
        triples.push_back({h, r, t});
        triples.push_back({t, r + "_inv", h});
        seen.insert({t, r + "_inv", h});
        return true;
    };

    std::vector<std::vector<int>> block(static_cast<std::size_t>(spec.clusters));
    for (int i = 0; i < real_bp; ++i) block[static_cast<std::size_t>(bp_cluster[static_cast<std::size_t>(i)])].push_back(i);
    std::vector<std::set<int>> gene_bps(static_cast<std::size_t>(spec.genes));
    for (int g = 0; g < spec.genes; ++g) {
        const auto& own = block[static_cast<std::size_t>(cluster[static_cast<std::size_t>(g)])];
        for (int idx : sample_distinct(rng, static_cast<int>(own.size()), spec.bp_per_gene)) {
            const int b = own[static_cast<std::size_t>(idx)];
            gene_bps[static_cast<std::size_t>(g)].insert(b);
            emit(gene_ids[static_cast<std::size_t>(g)], unit(rng) < 0.8 ? "involved_in" : "acts_upstream_of",
                 bp_ids[static_cast<std::size_t>(b)]);
        }
        for (int m : sample_distinct(rng, spec.mf, spec.mf_per_gene)) {
            emit(gene_ids[static_cast<std::size_t>(g)], unit(rng) < 0.7 ? "enables" : "contributes_to",
                 mf_ids[static_cast<std::size_t>(m)]);
        }
        static constexpr const char* cc_rel[] = {"part_of", "located_in", "is_active_in", "colocalizes_with"};
        for (int c : sample_distinct(rng, spec.cc, spec.cc_per_gene)) {
            std::uniform_int_distribution<int> pick(0, 3);
            emit(gene_ids[static_cast<std::size_t>(g)], cc_rel[pick(rng)], cc_ids[static_cast<std::size_t>(c)]);
        }
        // Pathways lean towards the gene's cluster: two thirds come from its slice.
        for (int k = 0; k < spec.pathways_per_gene && spec.pathways > 0; ++k) {
            int p;
            const int per = std::max(1, spec.pathways / spec.clusters);
            if (unit(rng) < 0.67) {
                std::uniform_int_distribution<int> pick(0, per - 1);
                p = std::min(spec.pathways - 1, cluster[static_cast<std::size_t>(g)] * per + pick(rng));
            } else {
                std::uniform_int_distribution<int> pick(0, spec.pathways - 1);
                p = pick(rng);
            }
            emit(gene_ids[static_cast<std::size_t>(g)], "PARTICIPATES_GpPW", pw_ids[static_cast<std::size_t>(p)]);
        }
    }

    // BP structure inside each block; the noise BP stays isolated from it.
    static constexpr const char* bp_rel[] = {"has_part", "is_a", "regulates", "positively_regulates",
                                             "negatively_regulates", "happens_during"};
    for (int b = 0; b < real_bp; ++b) {
        const auto& own = block[static_cast<std::size_t>(bp_cluster[static_cast<std::size_t>(b)])];
        if (own.size() < 2) continue;
        for (int k = 0; k < spec.bp_links_per_bp; ++k) {
            std::uniform_int_distribution<std::size_t> pick(0, own.size() - 1);
            const int other = own[pick(rng)];
            std::uniform_int_distribution<int> rel(0, 5);
            const char* r = bp_rel[rel(rng)];
            if (other != b) emit(bp_ids[static_cast<std::size_t>(b)], r, bp_ids[static_cast<std::size_t>(other)]);
        }
        if (!cc_ids.empty() && unit(rng) < 0.5) {
            std::uniform_int_distribution<std::size_t> pick(0, cc_ids.size() - 1);
            emit(bp_ids[static_cast<std::size_t>(b)], "occurs_in", cc_ids[pick(rng)]);
        }
    }

    // Planted SL pairs.
    const double competence = std::sqrt(spec.p_sl);
    std::vector<bool> competent(static_cast<std::size_t>(spec.genes));
    for (int g = 0; g < spec.genes; ++g) competent[static_cast<std::size_t>(g)] = unit(rng) < competence;
    nlohmann::json sl_pairs = nlohmann::json::array();
    std::size_t eligible = 0;
    for (int a = 0; a < spec.genes; ++a) {
        for (int b = a + 1; b < spec.genes; ++b) {
            const auto& A = gene_bps[static_cast<std::size_t>(a)];
            const auto& B = gene_bps[static_cast<std::size_t>(b)];
            int shared = 0;
            for (int x : A) shared += static_cast<int>(B.contains(x));
            if (shared < spec.sl_share) continue;
            ++eligible;
            if (!competent[static_cast<std::size_t>(a)] || !competent[static_cast<std::size_t>(b)]) continue;
            const auto& ga = gene_ids[static_cast<std::size_t>(a)];
            const auto& gb = gene_ids[static_cast<std::size_t>(b)];
            triples.push_back({ga, "SL_GsG", gb});
            sl_pairs.push_back({ga, gb});
        }
    }

    // Noise: one BP attached to a fixed-size random gene subset, independent of SL.
    const int noise_count = static_cast<int>(std::lround(spec.f_noise * spec.genes));
    nlohmann::json noise_genes = nlohmann::json::array();
    nlohmann::json noise_triples = nlohmann::json::array();
    for (int g : sample_distinct(rng, spec.genes, noise_count)) {
        const auto& id = gene_ids[static_cast<std::size_t>(g)];
        emit(id, "involved_in", spec.noise_bp);
        noise_genes.push_back(id);
        noise_triples.push_back({id, "involved_in", spec.noise_bp});
        noise_triples.push_back({spec.noise_bp, "involved_in_inv", id});
    }

    std::string triples_text;
    for (const auto& t : triples) triples_text += t[0] + "\t" + t[1] + "\t" + t[2] + "\n";

    std::string relations_text;
    for (const auto& r : kRelations) relations_text += std::string(r.id) + "\t" + r.id + "_inv\n";

    // Diseases draw mostly from one cluster each.
    std::string diseases_text;
    nlohmann::json diseases = nlohmann::json::array();
    for (int d = 0; d < spec.diseases; ++d) {
        const int home = d % spec.clusters;
        std::vector<int> members, others;
        for (int g = 0; g < spec.genes; ++g) (cluster[static_cast<std::size_t>(g)] == home ? members : others).push_back(g);
        std::set<int> chosen;
        const int from_home = std::min<int>(static_cast<int>(members.size()), (spec.genes_per_disease * 2 + 2) / 3);
        for (int idx : sample_distinct(rng, static_cast<int>(members.size()), from_home)) chosen.insert(members[static_cast<std::size_t>(idx)]);
        for (int idx : sample_distinct(rng, static_cast<int>(others.size()), spec.genes_per_disease - from_home)) {
            chosen.insert(others[static_cast<std::size_t>(idx)]);
        }
        const std::string did = "D" + pad(d + 1, 3);
        nlohmann::json genes = nlohmann::json::array();
        for (int g : chosen) {
            diseases_text += did + "\t" + kDiseaseNames[d] + "\t" + gene_ids[static_cast<std::size_t>(g)] + "\n";
            genes.push_back(gene_ids[static_cast<std::size_t>(g)]);
        }
        diseases.push_back({{"id", did}, {"name", kDiseaseNames[d]}, {"genes", genes}});
    }

    // Gene descriptions and sequences carry cluster signal.
    std::string genes_text, fasta;
    std::vector<std::vector<std::string>> motifs(static_cast<std::size_t>(spec.clusters));
    std::uniform_int_distribution<int> base(0, 3);
    for (auto& m : motifs) {
        for (int k = 0; k < 6; ++k) {
            std::string s;
            for (int i = 0; i < 6; ++i) s += kBases[base(rng)];
            m.push_back(s);
        }
    }
    for (int g = 0; g < spec.genes; ++g) {
        const int c = cluster[static_cast<std::size_t>(g)];
        std::string desc = gene_symbols[static_cast<std::size_t>(g)];
        std::uniform_int_distribution<std::size_t> cw(0, 7), ow(0, std::size(kCommonWords) - 1);
        for (int w = 0; w < 10; ++w) desc += std::string(" ") + (w % 2 == 0 ? kClusterWords[c][cw(rng)] : kCommonWords[ow(rng)]);
        genes_text += gene_ids[static_cast<std::size_t>(g)] + "\t" + gene_symbols[static_cast<std::size_t>(g)] + "\t" + desc + "\n";

        std::string seq;
        std::uniform_int_distribution<std::size_t> pick_motif(0, motifs[static_cast<std::size_t>(c)].size() - 1);
        while (static_cast<int>(seq.size()) < spec.sequence_length) {
            if (unit(rng) < 0.12) {
                seq += motifs[static_cast<std::size_t>(c)][pick_motif(rng)];
            } else {
                seq += kBases[base(rng)];
            }
        }
        seq.resize(static_cast<std::size_t>(spec.sequence_length));
        fasta += ">" + gene_ids[static_cast<std::size_t>(g)] + " " + gene_symbols[static_cast<std::size_t>(g)] + "\n";
        for (std::size_t i = 0; i < seq.size(); i += 60) fasta += seq.substr(i, 60) + "\n";
    }

    write_file(out / "entities.tsv", entities);
    write_file(out / "triples.tsv", triples_text);
    write_file(out / "relations.tsv", relations_text);
    write_file(out / "diseases.tsv", diseases_text);
    write_file(out / "genes.tsv", genes_text);
    write_file(out / "sequences.fasta", fasta);

    nlohmann::json clusters = nlohmann::json::object();
    nlohmann::json competent_ids = nlohmann::json::array();
    for (int g = 0; g < spec.genes; ++g) {
        clusters[gene_ids[static_cast<std::size_t>(g)]] = cluster[static_cast<std::size_t>(g)];
        if (competent[static_cast<std::size_t>(g)]) competent_ids.push_back(gene_ids[static_cast<std::size_t>(g)]);
    }
    std::set<std::string> relation_ids;
    for (const auto& r : kRelations) {
        relation_ids.insert(r.id);
        relation_ids.insert(std::string(r.id) + "_inv");
    }
    for (const auto& t : triples) relation_ids.insert(t[1]);

    const auto n_genes = static_cast<std::size_t>(spec.genes);
    nlohmann::json manifest{
        {"format", "slw-corpus-1"},
        {"spec", spec.to_json()},
        {"counts",
         {{"entities", n_genes + static_cast<std::size_t>(spec.bp + spec.mf + spec.cc + spec.pathways)},
          {"relations", relation_ids.size()},
          {"triples", triples.size()},
          {"per_type",
           {{"Gene", spec.genes}, {"BP", spec.bp}, {"MF", spec.mf}, {"CC", spec.cc}, {"Pathway", spec.pathways}}},
          {"sl_pairs", sl_pairs.size()},
          {"sl_eligible_pairs", eligible},
          {"disease_links", std::count(diseases_text.begin(), diseases_text.end(), '\n')}}},
        {"clusters", clusters},
        {"competent_genes", competent_ids},
        {"sl_pairs", sl_pairs},
        {"noise",
         {{"bp", spec.noise_bp},
          {"genes", noise_genes},
          {"triples", noise_triples},
          {"gene_fraction", static_cast<double>(noise_count) / static_cast<double>(spec.genes)},
          {"triple_fraction", static_cast<double>(noise_triples.size()) / static_cast<double>(triples.size())}}},
        {"diseases", diseases},
    };
    write_file(out / "manifest.json", manifest.dump(2) + "\n");
    return manifest;
}

}  // namespace slw
