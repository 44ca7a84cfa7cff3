#include "slw/kg.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

namespace slw {

namespace {

constexpr std::array<std::string_view, kNumEntityTypes> kTypeNames = {"Gene", "BP", "MF", "CC",
                                                                       "Pathway"};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestError(path.string(), 0, "cannot open file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Calls fn(line_number, fields) for every data line.
template <typename Fn>
void for_each_record(const std::filesystem::path& path, std::size_t expected_fields, Fn&& fn) {
    const std::string text = read_file(path);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        auto fields = split_tabs(line);
        if (fields.size() != expected_fields) {
            throw IngestError(path.string(), line_no,
                              "expected " + std::to_string(expected_fields) + " tab-separated fields, got " +
                                  std::to_string(fields.size()));
        }
        for (auto f : fields) {
            if (f.empty()) throw IngestError(path.string(), line_no, "empty field");
        }
        fn(line_no, fields);
    }
}

void build_csr(std::size_t n, std::span<const Triple> triples, bool by_head,
               std::vector<std::uint32_t>& offsets, std::vector<std::uint32_t>& index) {
    offsets.assign(n + 1, 0);
    for (const auto& t : triples) ++offsets[(by_head ? t.head : t.tail) + 1];
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    index.resize(triples.size());
    std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::uint32_t i = 0; i < triples.size(); ++i) {
        const auto& t = triples[i];
        index[cursor[by_head ? t.head : t.tail]++] = i;
    }
}

}  // namespace

std::string_view to_string(EntityType type) { return kTypeNames[static_cast<std::size_t>(type)]; }

std::optional<EntityType> parse_entity_type(std::string_view text) {
    for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
        if (kTypeNames[i] == text) return static_cast<EntityType>(i);
    }
    if (text == "PW") return EntityType::Pathway;
    return std::nullopt;
}

std::size_t TripleHash::operator()(const Triple& t) const noexcept {
    std::uint64_t h = t.head;
    h = h * 0x9E3779B97F4A7C15ULL ^ t.relation;
    h = h * 0x9E3779B97F4A7C15ULL ^ t.tail;
    return static_cast<std::size_t>(h ^ (h >> 29));
}

IngestError::IngestError(std::string file, std::size_t line, const std::string& message)
    : std::runtime_error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + message),
      file_(std::move(file)),
      line_(line) {}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Vocabulary

EntityId Vocabulary::add_entity(Entity entity) {
    if (entity.name.empty()) throw std::invalid_argument("entity '" + entity.id + "' has an empty name");
    auto id = static_cast<EntityId>(entities_.size());
    auto [it, inserted] = entity_index_.emplace(entity.id, id);
    if (!inserted) throw std::invalid_argument("duplicate entity id '" + entity.id + "'");
    entities_.push_back(std::move(entity));
    return id;
}

RelationId Vocabulary::add_relation(std::string id) {
    if (auto found = find_relation(id)) return *found;
    auto rid = static_cast<RelationId>(relations_.size());
    relation_index_.emplace(id, rid);
    relations_.push_back(Relation{std::move(id), std::nullopt});
    return rid;
}

void Vocabulary::link_inverse(RelationId a, RelationId b) {
    for (RelationId r : {a, b}) {
        if (auto old = relations_.at(r).inverse) relations_[*old].inverse.reset();
    }
    relations_[a].inverse = b;
    relations_[b].inverse = a;
}

void Vocabulary::link_inverse_by_suffix() {
    constexpr std::string_view suffix = "_inv";
    for (RelationId r = 0; r < relations_.size(); ++r) {
        const std::string& id = relations_[r].id;
        if (relations_[r].inverse || id.size() <= suffix.size() || !id.ends_with(suffix)) continue;
        auto base = find_relation(std::string_view(id).substr(0, id.size() - suffix.size()));
        if (base && !relations_[*base].inverse) link_inverse(*base, r);
    }
}

std::optional<EntityId> Vocabulary::find_entity(std::string_view id) const {
    auto it = entity_index_.find(std::string(id));
    if (it == entity_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<RelationId> Vocabulary::find_relation(std::string_view id) const {
    auto it = relation_index_.find(std::string(id));
    if (it == relation_index_.end()) return std::nullopt;
    return it->second;
}

EntityId Vocabulary::entity_id(std::string_view id) const {
    if (auto e = find_entity(id)) return *e;
    throw NotFound("unknown entity '" + std::string(id) + "'");
}

RelationId Vocabulary::relation_id(std::string_view id) const {
    if (auto r = find_relation(id)) return *r;
    throw NotFound("unknown relation '" + std::string(id) + "'");
}

std::vector<EntityId> Vocabulary::entities_of_type(EntityType type) const {
    std::vector<EntityId> out;
    for (EntityId e = 0; e < entities_.size(); ++e) {
        if (entities_[e].type == type) out.push_back(e);
    }
    return out;
}

// ---------------------------------------------------------------------------
// KnowledgeGraph

KnowledgeGraph::KnowledgeGraph(std::shared_ptr<const Vocabulary> vocab, std::vector<Triple> triples,
                               std::uint64_t version)
    : vocab_(std::move(vocab)), triples_(std::move(triples)), version_(version) {
    sl_relation_ = vocab_->find_relation(kSlRelation);
    const auto n = vocab_->num_entities();
    lookup_.reserve(triples_.size());
    for (const auto& t : triples_) {
        if (t.head >= n || t.tail >= n || t.relation >= vocab_->num_relations()) {
            throw std::invalid_argument("triple references an unknown entity or relation");
        }
        if (sl_relation_ && t.relation == *sl_relation_ && t.head == t.tail) {
            throw std::invalid_argument("SL self-pair on '" + vocab_->entity(t.head).id + "'");
        }
        if (!lookup_.insert(t).second) {
            throw std::invalid_argument("duplicate triple " + describe(t));
        }
    }
    build_csr(n, triples_, true, out_offsets_, out_index_);
    build_csr(n, triples_, false, in_offsets_, in_index_);
}

std::span<const std::uint32_t> KnowledgeGraph::out_edges(EntityId e) const {
    return std::span<const std::uint32_t>(out_index_).subspan(out_offsets_[e], out_offsets_[e + 1] - out_offsets_[e]);
}

std::span<const std::uint32_t> KnowledgeGraph::in_edges(EntityId e) const {
    return std::span<const std::uint32_t>(in_index_).subspan(in_offsets_[e], in_offsets_[e + 1] - in_offsets_[e]);
}

std::optional<Triple> KnowledgeGraph::inverse_of(const Triple& t) const {
    const auto& inv = vocab_->relation(t.relation).inverse;
    if (!inv) return std::nullopt;
    return Triple{t.tail, *inv, t.head};
}

std::string KnowledgeGraph::describe(const Triple& t) const {
    return "(" + vocab_->entity(t.head).id + ", " + vocab_->relation(t.relation).id + ", " +
           vocab_->entity(t.tail).id + ")";
}

// ---------------------------------------------------------------------------
// Flat files

DataFiles DataFiles::in_directory(const std::filesystem::path& dir) {
    DataFiles files{dir / "entities.tsv", dir / "triples.tsv", dir / "diseases.tsv", dir / "relations.tsv"};
    if (!std::filesystem::exists(files.diseases)) files.diseases.clear();
    if (!std::filesystem::exists(files.relations)) files.relations.clear();
    return files;
}

namespace {

std::vector<Triple> parse_triples(const std::filesystem::path& path, Vocabulary* mutable_vocab,
                                  const Vocabulary& vocab) {
    std::vector<Triple> triples;
    std::unordered_set<Triple, TripleHash> seen;
    std::size_t duplicates = 0;
    std::size_t first_duplicate_line = 0;
    const auto sl = vocab.find_relation(kSlRelation);
    for_each_record(path, 3, [&](std::size_t line, const std::vector<std::string_view>& f) {
        auto head = vocab.find_entity(f[0]);
        auto tail = vocab.find_entity(f[2]);
        if (!head) throw IngestError(path.string(), line, "dangling entity reference '" + std::string(f[0]) + "'");
        if (!tail) throw IngestError(path.string(), line, "dangling entity reference '" + std::string(f[2]) + "'");
        RelationId rel;
        if (mutable_vocab) {
            rel = mutable_vocab->add_relation(std::string(f[1]));
        } else if (auto r = vocab.find_relation(f[1])) {
            rel = *r;
        } else {
            throw IngestError(path.string(), line, "unknown relation '" + std::string(f[1]) + "'");
        }
        const bool is_sl = f[1] == kSlRelation || (sl && rel == *sl);
        if (is_sl && *head == *tail) {
            throw IngestError(path.string(), line, "SL triple with identical head and tail");
        }
        Triple t{*head, rel, *tail};
        if (!seen.insert(t).second) {
            if (duplicates++ == 0) first_duplicate_line = line;
            return;
        }
        triples.push_back(t);
    });
    if (duplicates > 0) {
        throw IngestError(path.string(), first_duplicate_line,
                          std::to_string(duplicates) + " duplicate triple(s) rejected");
    }
    return triples;
}

}  // namespace

std::vector<Triple> read_triples(const std::filesystem::path& path, const Vocabulary& vocab) {
    return parse_triples(path, nullptr, vocab);
}

IngestResult ingest(const DataFiles& files) {
    auto vocab = std::make_shared<Vocabulary>();
    IngestResult result;

    for_each_record(files.entities, 3, [&](std::size_t line, const std::vector<std::string_view>& f) {
        auto type = parse_entity_type(f[1]);
        if (!type) throw IngestError(files.entities.string(), line, "unknown entity type '" + std::string(f[1]) + "'");
        if (vocab->find_entity(f[0])) {
            throw IngestError(files.entities.string(), line, "duplicate entity id '" + std::string(f[0]) + "'");
        }
        vocab->add_entity(Entity{std::string(f[0]), *type, std::string(f[2])});
        ++result.counts.per_type[static_cast<std::size_t>(*type)];
    });

    // Relations appear in first-seen order: explicit table first, then triples.
    std::vector<std::pair<RelationId, RelationId>> explicit_pairs;
    if (!files.relations.empty()) {
        for_each_record(files.relations, 2, [&](std::size_t, const std::vector<std::string_view>& f) {
            auto a = vocab->add_relation(std::string(f[0]));
            auto b = vocab->add_relation(std::string(f[1]));
            explicit_pairs.emplace_back(a, b);
        });
    }
    auto triples = parse_triples(files.triples, vocab.get(), *vocab);
    for (auto [a, b] : explicit_pairs) vocab->link_inverse(a, b);
    vocab->link_inverse_by_suffix();

    if (!files.diseases.empty()) {
        std::unordered_map<std::string, std::size_t> index;
        for_each_record(files.diseases, 3, [&](std::size_t line, const std::vector<std::string_view>& f) {
            auto gene = vocab->find_entity(f[2]);
            if (!gene) throw IngestError(files.diseases.string(), line, "dangling gene reference '" + std::string(f[2]) + "'");
            if (vocab->entity(*gene).type != EntityType::Gene) {
                throw IngestError(files.diseases.string(), line, "'" + std::string(f[2]) + "' is not a Gene");
            }
            auto [it, inserted] = index.emplace(std::string(f[0]), result.diseases.size());
            if (inserted) result.diseases.push_back(DiseaseMapping{std::string(f[0]), std::string(f[1]), {}});
            auto& genes = result.diseases[it->second].genes;
            if (std::find(genes.begin(), genes.end(), *gene) == genes.end()) genes.push_back(*gene);
        });
    }

    result.counts.entities = vocab->num_entities();
    result.counts.relations = vocab->num_relations();
    result.counts.triples = triples.size();
    result.graph = std::make_shared<const KnowledgeGraph>(std::move(vocab), std::move(triples), 1);
    return result;
}

std::string triples_tsv(const KnowledgeGraph& kg) {
    std::string out;
    const auto& v = kg.vocab();
    for (const auto& t : kg.triples()) {
        out += v.entity(t.head).id;
        out += '\t';
        out += v.relation(t.relation).id;
        out += '\t';
        out += v.entity(t.tail).id;
        out += '\n';
    }
    return out;
}

void write_triples(const std::filesystem::path& path, const KnowledgeGraph& kg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << triples_tsv(kg);
}

// ---------------------------------------------------------------------------
// Ego network

EgoNetwork ego_subgraph(const KnowledgeGraph& kg, EntityId center, int max_hops) {
    if (center >= kg.vocab().num_entities()) throw NotFound("unknown entity");
    if (kg.type_of(center) != EntityType::Gene) {
        throw std::invalid_argument("ego network center '" + kg.vocab().entity(center).id + "' is not a Gene");
    }
    if (max_hops < 1 || max_hops > 2) throw std::invalid_argument("max_hops must be 1 or 2");

    std::vector<int> ring_of(kg.vocab().num_entities(), -1);
    EgoNetwork ego;
    ego.center = center;
    ego.rings.push_back({{center, EntityType::Gene}});
    ring_of[center] = 0;

    std::vector<EntityId> frontier{center};
    for (int hop = 1; hop <= max_hops; ++hop) {
        std::vector<EntityId> next;
        std::vector<Triple> links;
        for (EntityId u : frontier) {
            auto visit = [&](std::uint32_t ti, EntityId other) {
                if (ring_of[other] == -1) {
                    ring_of[other] = hop;
                    next.push_back(other);
                }
                if (ring_of[other] == hop) links.push_back(kg.triple(ti));
            };
            for (auto ti : kg.out_edges(u)) visit(ti, kg.triple(ti).tail);
            for (auto ti : kg.in_edges(u)) visit(ti, kg.triple(ti).head);
        }
        std::vector<EgoRingEntry> ring;
        for (EntityId e : next) ring.push_back({e, kg.type_of(e)});
        std::sort(ring.begin(), ring.end(), [&](const EgoRingEntry& a, const EgoRingEntry& b) {
            if (a.type != b.type) return a.type < b.type;
            return kg.vocab().entity(a.entity).id < kg.vocab().entity(b.entity).id;
        });
        std::sort(links.begin(), links.end());
        links.erase(std::unique(links.begin(), links.end()), links.end());
        ego.rings.push_back(std::move(ring));
        ego.links.push_back(std::move(links));
        frontier = std::move(next);
    }
    return ego;
}

}  // namespace slw
