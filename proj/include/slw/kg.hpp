#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace slw {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

enum class EntityType : std::uint8_t { Gene = 0, BP, MF, CC, Pathway };

inline constexpr std::size_t kNumEntityTypes = 5;
inline constexpr std::array<EntityType, kNumEntityTypes> kEntityTypes = {
    EntityType::Gene, EntityType::BP, EntityType::MF, EntityType::CC, EntityType::Pathway};

/// Relation id holding validated synthetic-lethal gene pairs. Stored once per
/// unordered pair and read as symmetric by the ranking model.
inline constexpr std::string_view kSlRelation = "SL_GsG";

std::string_view to_string(EntityType type);
std::optional<EntityType> parse_entity_type(std::string_view text);

struct Entity {
    std::string id;
    EntityType type;
    std::string name;
};

struct Relation {
    std::string id;
    std::optional<RelationId> inverse;
};

struct Triple {
    EntityId head = 0;
    RelationId relation = 0;
    EntityId tail = 0;

    auto operator<=>(const Triple&) const = default;
};

struct TripleHash {
    std::size_t operator()(const Triple& t) const noexcept;
};

class NotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IngestError : public std::runtime_error {
public:
    IngestError(std::string file, std::size_t line, const std::string& message);

    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

/// Entity and relation tables. Shared, never mutated once a graph is built.
class Vocabulary {
public:
    EntityId add_entity(Entity entity);
    RelationId add_relation(std::string id);
    /// Pairs two relations as inverses, replacing any earlier pairing of either.
    void link_inverse(RelationId a, RelationId b);
    /// Applies the "_inv" suffix convention to every relation not yet paired.
    void link_inverse_by_suffix();

    std::optional<EntityId> find_entity(std::string_view id) const;
    std::optional<RelationId> find_relation(std::string_view id) const;
    EntityId entity_id(std::string_view id) const;      // throws NotFound
    RelationId relation_id(std::string_view id) const;  // throws NotFound

    const Entity& entity(EntityId id) const { return entities_.at(id); }
    const Relation& relation(RelationId id) const { return relations_.at(id); }
    std::size_t num_entities() const { return entities_.size(); }
    std::size_t num_relations() const { return relations_.size(); }
    std::span<const Entity> entities() const { return entities_; }
    std::span<const Relation> relations() const { return relations_; }

    std::vector<EntityId> entities_of_type(EntityType type) const;

private:
    std::vector<Entity> entities_;
    std::vector<Relation> relations_;
    std::unordered_map<std::string, EntityId> entity_index_;
    std::unordered_map<std::string, RelationId> relation_index_;
};

/// Immutable directed heterogeneous graph at one version.
class KnowledgeGraph {
public:
    /// Validates uniqueness, referential integrity and SL self-loops.
    KnowledgeGraph(std::shared_ptr<const Vocabulary> vocab, std::vector<Triple> triples,
                   std::uint64_t version);

    const Vocabulary& vocab() const { return *vocab_; }
    std::shared_ptr<const Vocabulary> shared_vocab() const { return vocab_; }
    std::uint64_t version() const { return version_; }

    std::span<const Triple> triples() const { return triples_; }
    std::size_t num_triples() const { return triples_.size(); }
    const Triple& triple(std::uint32_t index) const { return triples_[index]; }
    bool contains(const Triple& t) const { return lookup_.contains(t); }

    /// Triple indices whose head (resp. tail) is the entity.
    std::span<const std::uint32_t> out_edges(EntityId e) const;
    std::span<const std::uint32_t> in_edges(EntityId e) const;

    EntityType type_of(EntityId e) const { return vocab_->entity(e).type; }
    std::optional<RelationId> sl_relation() const { return sl_relation_; }
    /// (tail, inverse(relation), head) when the relation has an inverse.
    std::optional<Triple> inverse_of(const Triple& t) const;

    std::string describe(const Triple& t) const;

private:
    std::shared_ptr<const Vocabulary> vocab_;
    std::vector<Triple> triples_;
    std::unordered_set<Triple, TripleHash> lookup_;
    std::vector<std::uint32_t> out_offsets_, out_index_;
    std::vector<std::uint32_t> in_offsets_, in_index_;
    std::optional<RelationId> sl_relation_;
    std::uint64_t version_;
};

struct DiseaseMapping {
    std::string disease_id;
    std::string name;
    std::vector<EntityId> genes;
};

struct IngestCounts {
    std::size_t entities = 0;
    std::size_t relations = 0;
    std::size_t triples = 0;
    std::array<std::size_t, kNumEntityTypes> per_type{};
};

struct IngestResult {
    std::shared_ptr<const KnowledgeGraph> graph;
    std::vector<DiseaseMapping> diseases;
    IngestCounts counts;
};

struct DataFiles {
    std::filesystem::path entities;
    std::filesystem::path triples;
    std::filesystem::path diseases;  // optional; empty path skips
    std::filesystem::path relations;  // optional explicit inverse table

    static DataFiles in_directory(const std::filesystem::path& dir);
};

IngestResult ingest(const DataFiles& files);

/// Parses the triples file against an existing vocabulary (snapshot reload).
std::vector<Triple> read_triples(const std::filesystem::path& path, const Vocabulary& vocab);
void write_triples(const std::filesystem::path& path, const KnowledgeGraph& kg);
std::string triples_tsv(const KnowledgeGraph& kg);

/// Splits a line on tabs. Exposed for the other flat-file readers.
std::vector<std::string_view> split_tabs(std::string_view line);

struct EgoRingEntry {
    EntityId entity;
    EntityType type;
};

struct EgoNetwork {
    EntityId center = 0;
    /// rings[k] holds entities first reached at hop k, ordered by (type, id).
    std::vector<std::vector<EgoRingEntry>> rings;
    /// links[k] holds triples joining ring k and ring k + 1.
    std::vector<std::vector<Triple>> links;
};

/// Layered neighbourhood of a gene, walking edges in both directions.
EgoNetwork ego_subgraph(const KnowledgeGraph& kg, EntityId center, int max_hops);

}  // namespace slw
