#include "slw/graph_store.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <unordered_set>

#include <json.hpp>

namespace slw {

GraphStore::GraphStore(std::shared_ptr<const KnowledgeGraph> initial)
    : current_(std::move(initial)), latest_version_(current_->version()) {}

std::shared_ptr<const KnowledgeGraph> GraphStore::current() const {
    std::lock_guard lock(read_mutex_);
    return current_;
}

DeletionReport GraphStore::delete_triples(std::span<const Triple> triples) {
    std::lock_guard writer(write_mutex_);
    auto base = current();
    DeletionReport report;
    report.requested = triples.size();
    report.triples_before = base->num_triples();

    std::unordered_set<Triple, TripleHash> doomed;
    std::unordered_set<Triple, TripleHash> requested;
    for (const auto& t : triples) {
        if (!requested.insert(t).second) continue;
        if (!base->contains(t)) {
            report.skipped.push_back(t);
            continue;
        }
        doomed.insert(t);
    }
    const std::size_t direct = doomed.size();
    for (const auto& t : std::vector<Triple>(doomed.begin(), doomed.end())) {
        if (auto inv = base->inverse_of(t); inv && base->contains(*inv)) doomed.insert(*inv);
    }
    report.inverse_deleted = doomed.size() - direct;

    if (doomed.empty()) {
        report.version = base->version();
        return report;
    }

    std::vector<Triple> kept;
    kept.reserve(base->num_triples() - doomed.size());
    for (const auto& t : base->triples()) {
        if (doomed.contains(t)) {
            report.removed.push_back(t);
        } else {
            kept.push_back(t);
        }
    }
    report.deleted = report.removed.size();
    auto next = std::make_shared<const KnowledgeGraph>(base->shared_vocab(), std::move(kept), ++latest_version_);
    report.version = next->version();
    std::lock_guard lock(read_mutex_);
    log_.push_back({MutationRecord::Kind::Delete, base->version(), next->version(), report.removed, 0});
    current_ = std::move(next);
    return report;
}

std::uint64_t GraphStore::snapshot() {
    std::lock_guard writer(write_mutex_);
    auto graph = current();
    std::lock_guard lock(read_mutex_);
    snapshots_[graph->version()] = graph;
    return graph->version();
}

std::shared_ptr<const KnowledgeGraph> GraphStore::snapshot_at(std::uint64_t version) const {
    std::lock_guard lock(read_mutex_);
    auto it = snapshots_.find(version);
    if (it == snapshots_.end()) throw NotFound("no snapshot for graph version " + std::to_string(version));
    return it->second;
}

std::vector<std::uint64_t> GraphStore::snapshot_versions() const {
    std::lock_guard lock(read_mutex_);
    std::vector<std::uint64_t> out;
    for (const auto& [v, _] : snapshots_) out.push_back(v);
    return out;
}

std::uint64_t GraphStore::restore(std::uint64_t version) {
    std::lock_guard writer(write_mutex_);
    auto source = snapshot_at(version);
    auto base = current();
    std::vector<Triple> triples(source->triples().begin(), source->triples().end());
    auto next = std::make_shared<const KnowledgeGraph>(source->shared_vocab(), std::move(triples), ++latest_version_);
    const auto v = next->version();
    std::lock_guard lock(read_mutex_);
    log_.push_back({MutationRecord::Kind::Restore, base->version(), v, {}, version});
    current_ = std::move(next);
    return v;
}

std::vector<MutationRecord> GraphStore::mutation_log() const {
    std::lock_guard lock(read_mutex_);
    return log_;
}

// ---------------------------------------------------------------------------

std::string content_hash(const KnowledgeGraph& kg) {
    const std::string bytes = triples_tsv(kg);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::filesystem::path write_snapshot(const std::filesystem::path& root, const KnowledgeGraph& kg) {
    auto dir = root / "snapshots" / std::to_string(kg.version());
    std::filesystem::create_directories(dir);
    write_triples(dir / "triples.tsv", kg);
    nlohmann::json manifest = {
        {"version", kg.version()},
        {"entities", kg.vocab().num_entities()},
        {"relations", kg.vocab().num_relations()},
        {"triples", kg.num_triples()},
        {"sha256", content_hash(kg)},
    };
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
    return dir;
}

std::shared_ptr<const KnowledgeGraph> read_snapshot(const std::filesystem::path& dir,
                                                    std::shared_ptr<const Vocabulary> vocab) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw NotFound("missing snapshot manifest in " + dir.string());
    const auto manifest = nlohmann::json::parse(in);
    auto triples = read_triples(dir / "triples.tsv", *vocab);
    auto graph = std::make_shared<const KnowledgeGraph>(std::move(vocab), std::move(triples),
                                                        manifest.at("version").get<std::uint64_t>());
    if (content_hash(*graph) != manifest.at("sha256").get<std::string>()) {
        throw std::runtime_error("snapshot hash mismatch in " + dir.string());
    }
    return graph;
}

}  // namespace slw
