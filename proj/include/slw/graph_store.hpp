#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "slw/kg.hpp"

namespace slw {

struct DeletionReport {
    std::size_t requested = 0;
    std::size_t deleted = 0;          // includes paired inverses
    std::size_t inverse_deleted = 0;  // inverses removed beyond the request
    std::size_t triples_before = 0;
    std::vector<Triple> removed;
    std::vector<Triple> skipped;      // requested but absent
    std::uint64_t version = 0;        // graph version after the call
};

struct MutationRecord {
    enum class Kind { Delete, Restore };
    Kind kind;
    std::uint64_t parent_version;
    std::uint64_t version;
    std::vector<Triple> removed;        // Delete
    std::uint64_t restored_from = 0;    // Restore
};

/// Versioned home of the knowledge graph. Readers take an immutable graph
/// pointer; mutations go through one writer at a time and publish a new
/// version atomically.
class GraphStore {
public:
    explicit GraphStore(std::shared_ptr<const KnowledgeGraph> initial);

    std::shared_ptr<const KnowledgeGraph> current() const;
    std::uint64_t version() const { return current()->version(); }

    /// Removes the listed triples and their paired inverses. Absent triples
    /// are skipped and reported. A call that removes nothing publishes no
    /// new version.
    DeletionReport delete_triples(std::span<const Triple> triples);

    /// Pins the current version so it can be restored later.
    std::uint64_t snapshot();
    std::shared_ptr<const KnowledgeGraph> snapshot_at(std::uint64_t version) const;
    std::vector<std::uint64_t> snapshot_versions() const;
    /// Publishes a new version whose triples equal the pinned one.
    std::uint64_t restore(std::uint64_t version);

    std::vector<MutationRecord> mutation_log() const;

private:
    mutable std::mutex read_mutex_;
    std::mutex write_mutex_;
    std::shared_ptr<const KnowledgeGraph> current_;
    std::map<std::uint64_t, std::shared_ptr<const KnowledgeGraph>> snapshots_;
    std::vector<MutationRecord> log_;
    std::uint64_t latest_version_;
};

/// Lowercase hex SHA-256 of the graph's canonical triples.tsv bytes.
std::string content_hash(const KnowledgeGraph& kg);

/// Writes `<root>/snapshots/<version>/{triples.tsv,manifest.json}`.
std::filesystem::path write_snapshot(const std::filesystem::path& root, const KnowledgeGraph& kg);
/// Reads a snapshot directory back and checks its manifest hash.
std::shared_ptr<const KnowledgeGraph> read_snapshot(const std::filesystem::path& dir,
                                                    std::shared_ptr<const Vocabulary> vocab);

}  // namespace slw
