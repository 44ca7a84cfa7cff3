#include "slw/session.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>
#include <unordered_set>

#include "slw/canonical_json.hpp"
#include "slw/model/model_io.hpp"

namespace slw {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

const char* slot_name(Slot s) {
    switch (s) {
        case Slot::Source: return "source";
        case Slot::Relation: return "relation";
        case Slot::Target: return "target";
    }
    return "";
}

nlohmann::json segment_json(const BarSegment& s) {
    return {{"pattern", s.pattern.str()}, {"count", s.count}, {"fraction", s.fraction}};
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

bool is_version_dir(const std::filesystem::directory_entry& e) {
    if (!e.is_directory()) return false;
    const auto name = e.path().filename().string();
    return !name.empty() && std::all_of(name.begin(), name.end(), [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

nlohmann::json to_json(const LatticeReport& report) {
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& p : all_patterns()) counts[p.str()] = report.count(p);
    nlohmann::json primary{{"height", report.primary.height}, {"display_scale", report.primary.display_scale}};
    auto& ps = primary["segments"] = nlohmann::json::array();
    for (const auto& s : report.primary.segments) ps.push_back(segment_json(s));
    const char* rule = "none";
    if (report.secondary.rule == LatticeReport::SecondaryBar::Rule::Children) rule = "children";
    if (report.secondary.rule == LatticeReport::SecondaryBar::Rule::Parents) rule = "parents";
    nlohmann::json secondary{{"rule", rule}, {"height", report.secondary.height}};
    auto& ss = secondary["segments"] = nlohmann::json::array();
    for (const auto& s : report.secondary.segments) ss.push_back(segment_json(s));
    return {{"selection", report.selection.str()}, {"counts", counts}, {"primary", primary}, {"secondary", secondary}};
}

nlohmann::json to_json(const SlotStats& stats, const Vocabulary& vocab) {
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& b : stats.histogram) hist.push_back({{"lower", b.lower}, {"upper", b.upper}, {"count", b.count}});
    nlohmann::json counts = nlohmann::json::array();
    for (const auto& [e, n] : stats.counts) counts.push_back({{"id", vocab.entity(e).id}, {"count", n}});
    return {{"slot", slot_name(stats.slot)},
            {"histogram", hist},
            {"boxplot",
             {{"min", stats.boxplot.min},
              {"q1", stats.boxplot.q1},
              {"median", stats.boxplot.median},
              {"q3", stats.boxplot.q3},
              {"max", stats.boxplot.max}}},
            {"current", stats.current},
            {"counts", counts}};
}

Session::Session(SessionOptions options) : options_(std::move(options)) {
    auto ingested = ingest(DataFiles::in_directory(options_.data_dir));
    vocab_ = ingested.graph->shared_vocab();
    diseases_ = std::move(ingested.diseases);
    std::filesystem::create_directories(options_.models_dir);

    std::shared_ptr<const KnowledgeGraph> working = ingested.graph;
    const auto snap_root = options_.models_dir / "snapshots";
    if (std::filesystem::exists(snap_root)) {
        for (const auto& e : std::filesystem::directory_iterator(snap_root)) {
            if (!is_version_dir(e)) continue;
            auto g = read_snapshot(e.path(), vocab_);
            graphs_[g->version()] = g;
        }
    }
    if (graphs_.empty()) {
        write_snapshot(options_.models_dir, *working);
        graphs_[working->version()] = working;
    } else {
        working = graphs_.rbegin()->second;
    }
    store_ = std::make_unique<GraphStore>(working);

    const auto genes_file = options_.data_dir / "genes.tsv";
    if (std::filesystem::exists(genes_file)) {
        std::map<std::string, std::string> sequences;
        if (std::filesystem::exists(options_.data_dir / "sequences.fasta")) {
            sequences = read_fasta(options_.data_dir / "sequences.fasta");
        }
        auto features = gene_features(read_genes(genes_file), sequences);
        if (features.size() >= 2) {
            ProjectionConfig pc;
            pc.seed = options_.seed;
            projection_ = project_2d(features, pc);
        }
    }
    load_state();
}

Session::~Session() = default;

void Session::load_state() {
    for (const auto& e : std::filesystem::directory_iterator(options_.models_dir)) {
        if (!is_version_dir(e) || !std::filesystem::exists(e.path() / "config.json")) continue;
        std::shared_ptr<const ModelVersion> mv = load_model(e.path(), *vocab_);
        auto kg = graph_for(mv->kg_version);
        models_[mv->id] = {mv, std::make_shared<const Predictor>(mv, kg)};
    }
    const auto active_file = options_.models_dir / "active.json";
    if (std::filesystem::exists(active_file)) {
        std::ifstream in(active_file);
        const auto j = nlohmann::json::parse(in);
        if (j.contains("active") && !j["active"].is_null() && models_.contains(j["active"].get<std::uint64_t>())) {
            active_ = j["active"].get<std::uint64_t>();
        }
    }
    if (!active_ && !models_.empty()) active_ = models_.rbegin()->first;

    const auto ops_file = options_.models_dir / "operations.jsonl";
    if (std::filesystem::exists(ops_file)) {
        std::ifstream in(ops_file);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) operations_.push_back(nlohmann::json::parse(line));
        }
    }
}

void Session::persist_operations() const {
    std::string text;
    for (const auto& op : operations_) text += canonical_dump(op) + "\n";
    write_atomic(options_.models_dir / "operations.jsonl", text);
}

void Session::persist_active() const {
    nlohmann::json j{{"active", active_ ? nlohmann::json(*active_) : nlohmann::json(nullptr)}};
    write_atomic(options_.models_dir / "active.json", canonical_dump(j) + "\n");
}

std::shared_ptr<const KnowledgeGraph> Session::graph_for(std::uint64_t kg_version) const {
    auto it = graphs_.find(kg_version);
    if (it == graphs_.end()) throw NotFound("no snapshot of graph version " + std::to_string(kg_version));
    return it->second;
}

EntityId Session::gene(const std::string& id) const {
    auto e = vocab_->find_entity(id);
    if (!e || vocab_->entity(*e).type != EntityType::Gene) throw NotFound("unknown gene '" + id + "'");
    return *e;
}

std::shared_ptr<const Predictor> Session::active_predictor() const {
    std::lock_guard lock(mutex_);
    if (!active_) throw Conflict("no active model");
    return models_.at(*active_).predictor;
}

nlohmann::json Session::entity_json(EntityId e) const {
    const auto& ent = vocab_->entity(e);
    return {{"id", ent.id}, {"name", ent.name}, {"type", std::string(to_string(ent.type))}};
}

nlohmann::json Session::search_genes(const std::string& query) const {
    nlohmann::json out = nlohmann::json::array();
    if (query.empty()) return out;
    const auto q = lower(query);
    struct Hit {
        bool prefix;
        std::string symbol;
        EntityId id;
    };
    std::vector<Hit> hits;
    for (EntityId e : vocab_->entities_of_type(EntityType::Gene)) {
        const auto& name = vocab_->entity(e).name;
        const auto l = lower(name);
        const auto pos = l.find(q);
        if (pos == std::string::npos) continue;
        hits.push_back({pos == 0, name, e});
    }
    std::sort(hits.begin(), hits.end(), [&](const Hit& a, const Hit& b) {
        if (a.prefix != b.prefix) return a.prefix;
        if (a.symbol != b.symbol) return a.symbol < b.symbol;
        return vocab_->entity(a.id).id < vocab_->entity(b.id).id;
    });
    if (hits.size() > 20) hits.resize(20);
    for (const auto& h : hits) out.push_back({{"id", vocab_->entity(h.id).id}, {"symbol", h.symbol}});
    return out;
}

nlohmann::json Session::diseases() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& d : diseases_) out.push_back({{"id", d.disease_id}, {"name", d.name}, {"gene_count", d.genes.size()}});
    return out;
}

nlohmann::json Session::disease_genes(const std::string& disease_id) const {
    for (const auto& d : diseases_) {
        if (d.disease_id != disease_id) continue;
        std::vector<EntityId> genes = d.genes;
        std::sort(genes.begin(), genes.end(),
                  [&](EntityId a, EntityId b) { return vocab_->entity(a).id < vocab_->entity(b).id; });
        nlohmann::json list = nlohmann::json::array();
        for (EntityId g : genes) list.push_back({{"id", vocab_->entity(g).id}, {"symbol", vocab_->entity(g).name}});
        return {{"id", d.disease_id}, {"name", d.name}, {"genes", list}};
    }
    throw NotFound("unknown disease '" + disease_id + "'");
}

nlohmann::json Session::predictions(const std::string& gene_id) const {
    const EntityId g = gene(gene_id);
    const auto predictor = active_predictor();
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& p : predictor->predictions(g)) {
        rows.push_back({{"partner", vocab_->entity(p.partner).id},
                        {"name", vocab_->entity(p.partner).name},
                        {"score", p.score},
                        {"rank", p.rank},
                        {"correct", p.correct}});
    }
    return {{"gene", gene_id},
            {"name", vocab_->entity(g).name},
            {"model_version", predictor->model().id},
            {"kg_version", predictor->model().kg_version},
            {"predictions", rows}};
}

std::vector<EntityId> Session::resolve_partners(const Predictor& p, EntityId g,
                                                const std::vector<std::string>& ids) const {
    std::vector<EntityId> out;
    if (ids.empty()) {
        for (const auto& pred : p.predictions(g)) out.push_back(pred.partner);
        return out;
    }
    for (const auto& id : ids) out.push_back(gene(id));
    return out;
}

nlohmann::json Session::paths(const std::string& gene_id, const std::vector<std::string>& partners,
                              std::size_t max_paths) const {
    const EntityId g = gene(gene_id);
    const auto predictor = active_predictor();
    const auto chosen = resolve_partners(*predictor, g, partners);
    std::map<EntityId, Prediction> ranked;
    for (const auto& p : predictor->predictions(g)) ranked.emplace(p.partner, p);

    nlohmann::json list = nlohmann::json::array();
    for (EntityId partner : chosen) {
        nlohmann::json plist = nlohmann::json::array();
        for (const auto& path : predictor->paths(g, partner, max_paths)) {
            nlohmann::json nodes = nlohmann::json::array();
            for (EntityId n : path.nodes) nodes.push_back(entity_json(n));
            nlohmann::json rels = nlohmann::json::array();
            for (RelationId r : path.relations) rels.push_back(vocab_->relation(r).id);
            plist.push_back({{"nodes", nodes}, {"relations", rels}, {"weight", path.weight}});
        }
        auto it = ranked.find(partner);
        list.push_back({{"partner", vocab_->entity(partner).id},
                        {"name", vocab_->entity(partner).name},
                        {"rank", it == ranked.end() ? nlohmann::json(nullptr) : nlohmann::json(it->second.rank)},
                        {"score", it == ranked.end() ? nlohmann::json(nullptr) : nlohmann::json(it->second.score)},
                        {"paths", plist}});
    }
    return {{"gene", gene_id}, {"model_version", predictor->model().id}, {"partners", list}};
}

nlohmann::json Session::aggregate(const std::string& gene_id, const std::vector<std::string>& partners) const {
    const EntityId g = gene(gene_id);
    const auto predictor = active_predictor();
    const auto chosen = resolve_partners(*predictor, g, partners);
    std::vector<InterpretivePath> all;
    nlohmann::json partner_ids = nlohmann::json::array();
    for (EntityId p : chosen) {
        auto ps = predictor->paths(g, p);
        all.insert(all.end(), ps.begin(), ps.end());
        partner_ids.push_back(vocab_->entity(p).id);
    }
    const auto agg = aggregate_layers(predictor->kg(), all);

    auto type_map = [](const std::array<double, kNumEntityTypes>& w) {
        nlohmann::json j = nlohmann::json::object();
        for (auto t : kEntityTypes) j[std::string(to_string(t))] = w[static_cast<std::size_t>(t)];
        return j;
    };
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l <= kHops; ++l) {
        nlohmann::json ents = nlohmann::json::array();
        for (const auto& ew : agg.entities[l]) {
            auto j = entity_json(ew.entity);
            j["weight"] = ew.weight;
            ents.push_back(j);
        }
        layers.push_back({{"layer", l}, {"mass", agg.mass[l]}, {"entities", ents}, {"type_weights", type_map(agg.type_weights[l])}});
    }
    nlohmann::json transitions = nlohmann::json::array();
    for (std::size_t l = 0; l < kHops; ++l) {
        nlohmann::json flow = nlohmann::json::object();
        for (auto a : kEntityTypes) {
            nlohmann::json row = nlohmann::json::object();
            for (auto b : kEntityTypes) {
                row[std::string(to_string(b))] = agg.flow[l](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            }
            flow[std::string(to_string(a))] = row;
        }
        nlohmann::json rels = nlohmann::json::object();
        for (const auto& [r, w] : agg.relations[l]) rels[vocab_->relation(r).id] = w;
        transitions.push_back({{"from", l}, {"to", l + 1}, {"flow", flow}, {"terminal", type_map(agg.terminal[l])}, {"relations", rels}});
    }
    return {{"gene", gene_id},
            {"model_version", predictor->model().id},
            {"partners", partner_ids},
            {"paths", all.size()},
            {"layers", layers},
            {"transitions", transitions}};
}

nlohmann::json Session::embedding(const std::string& disease_id, const std::string& primary_id,
                                  const std::vector<std::string>& partners,
                                  const std::vector<std::string>& lasso) const {
    std::unordered_set<std::string> disease_genes;
    if (!disease_id.empty()) {
        for (const auto& g : disease_genes_list(disease_id)) disease_genes.insert(g);
    }
    std::map<std::string, int> predicted;  // gene -> rank
    std::unordered_set<std::string> known, tagged(partners.begin(), partners.end()), lassoed(lasso.begin(), lasso.end());
    std::optional<std::uint64_t> model_version;
    if (!primary_id.empty()) {
        const EntityId g = gene(primary_id);
        const auto predictor = active_predictor();
        model_version = predictor->model().id;
        for (const auto& p : predictor->predictions(g)) predicted[vocab_->entity(p.partner).id] = p.rank;
        for (EntityId e : vocab_->entities_of_type(EntityType::Gene)) {
            if (predictor->is_known_partner(g, e)) known.insert(vocab_->entity(e).id);
        }
    }
    for (const auto& p : partners) gene(p);

    nlohmann::json points = nlohmann::json::array();
    for (const auto& pt : projection_) {
        const auto& id = pt.gene_id;
        std::vector<std::string> classes;
        const bool is_primary = id == primary_id;
        const auto pred = predicted.find(id);
        const bool is_pred = pred != predicted.end();
        if (is_primary) classes.push_back("selected");
        if (lassoed.contains(id)) classes.push_back("lasso");
        if (is_pred && known.contains(id)) classes.push_back("correct");
        if (is_pred) classes.push_back("predicted");
        if (!is_pred && known.contains(id)) classes.push_back("validated");
        if (disease_genes.contains(id)) classes.push_back("disease");
        nlohmann::json p{{"id", id},
                         {"x", pt.x},
                         {"y", pt.y},
                         {"class", classes.empty() ? std::string("none") : classes.front()},
                         {"classes", classes},
                         {"neighbors", pt.neighbors}};
        if (auto e = vocab_->find_entity(id)) p["symbol"] = vocab_->entity(*e).name;
        if (is_pred) {
            p["rank"] = pred->second;
            p["line"] = tagged.contains(id) ? "solid" : "dashed";
        }
        points.push_back(p);
    }
    return {{"disease", disease_id.empty() ? nlohmann::json(nullptr) : nlohmann::json(disease_id)},
            {"primary", primary_id.empty() ? nlohmann::json(nullptr) : nlohmann::json(primary_id)},
            {"partners", partners},
            {"model_version", model_version ? nlohmann::json(*model_version) : nlohmann::json(nullptr)},
            {"points", points}};
}

std::vector<std::string> Session::disease_genes_list(const std::string& disease_id) const {
    std::vector<std::string> out;
    for (const auto& g : disease_genes(disease_id).at("genes")) out.push_back(g.at("id"));
    return out;
}

nlohmann::json Session::ego(const std::string& gene_id, int hops, bool current_graph) const {
    const EntityId g = gene(gene_id);
    std::shared_ptr<const KnowledgeGraph> kg;
    if (current_graph) {
        kg = store_->current();
    } else {
        std::lock_guard lock(mutex_);
        kg = active_ ? models_.at(*active_).predictor->shared_kg() : store_->current();
    }
    const auto ego = ego_subgraph(*kg, g, hops);
    nlohmann::json rings = nlohmann::json::array();
    for (const auto& ring : ego.rings) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& e : ring) r.push_back(entity_json(e.entity));
        rings.push_back(r);
    }
    nlohmann::json links = nlohmann::json::array();
    for (const auto& layer : ego.links) {
        nlohmann::json l = nlohmann::json::array();
        for (const auto& t : layer) {
            l.push_back({{"head", vocab_->entity(t.head).id},
                         {"relation", vocab_->relation(t.relation).id},
                         {"tail", vocab_->entity(t.tail).id}});
        }
        links.push_back(l);
    }
    return {{"center", gene_id}, {"hops", hops}, {"kg_version", kg->version()}, {"rings", rings}, {"links", links}};
}

nlohmann::json Session::formulate(const nlohmann::json& body) {
    MetapathStrategy s;
    try {
        s = strategy_from_json(body, *vocab_);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed strategy: ") + e.what());
    }
    const auto kg = store_->current();
    if (!kg->contains(s.anchor)) throw std::invalid_argument("anchor triple is not in the graph");
    const auto report = lattice_report(*kg, s);
    nlohmann::json stats = nlohmann::json::array();
    stats.push_back(to_json(slot_stats(*kg, s, Slot::Source), *vocab_));
    stats.push_back(to_json(slot_stats(*kg, s, Slot::Target), *vocab_));
    std::lock_guard lock(mutex_);
    pending_.push_back(s);
    return {{"index", pending_.size() - 1},
            {"strategy", to_json(s, *vocab_)},
            {"matched", report.count(s.pattern)},
            {"kg_version", kg->version()},
            {"lattice", to_json(report)},
            {"slot_stats", stats}};
}

nlohmann::json Session::pending() const {
    std::lock_guard lock(mutex_);
    const auto kg = store_->current();
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t i = 0; i < pending_.size(); ++i) {
        out.push_back({{"index", i}, {"strategy", to_json(pending_[i], *vocab_)}, {"matched", match_count(*kg, pending_[i])}});
    }
    return out;
}

nlohmann::json Session::remove_pending(std::size_t index) {
    {
        std::lock_guard lock(mutex_);
        if (index >= pending_.size()) throw NotFound("no pending strategy " + std::to_string(index));
        pending_.erase(pending_.begin() + static_cast<std::ptrdiff_t>(index));
    }
    return pending();
}

nlohmann::json Session::apply(const std::string& note) {
    std::lock_guard lock(mutex_);
    if (training_) throw Conflict("a retrain is running");
    if (pending_.empty()) throw std::invalid_argument("no pending strategies");
    const auto before = store_->current();
    const auto report = slw::apply(*store_, pending_);
    const auto after = store_->current();
    if (!graphs_.contains(after->version())) {
        write_snapshot(options_.models_dir, *after);
        graphs_[after->version()] = after;
    }
    nlohmann::json strategies = nlohmann::json::array();
    for (std::size_t i = 0; i < pending_.size(); ++i) {
        strategies.push_back({{"strategy", to_json(pending_[i], *vocab_)}, {"matched", report.matched[i]}});
    }
    const std::uint64_t id = operations_.empty() ? 1 : operations_.back().at("id").get<std::uint64_t>() + 1;
    nlohmann::json record{{"id", id},
                          {"timestamp", utc_timestamp()},
                          {"strategies", strategies},
                          {"note", note},
                          {"parent_kg_version", before->version()},
                          {"kg_version", after->version()},
                          {"deleted", report.total_deleted},
                          {"inverse_deleted", report.deletion.inverse_deleted},
                          {"triples_before", report.triples_before},
                          {"deleted_fraction", report.deleted_fraction},
                          {"model_version", nullptr}};
    operations_.push_back(record);
    persist_operations();
    pending_.clear();
    return record;
}

nlohmann::json Session::operations() const {
    std::lock_guard lock(mutex_);
    return operations_;
}

nlohmann::json Session::edit_note(std::uint64_t operation_id, const std::string& note) {
    std::lock_guard lock(mutex_);
    for (auto& op : operations_) {
        if (op.at("id").get<std::uint64_t>() != operation_id) continue;
        op["note"] = note;
        persist_operations();
        return op;
    }
    throw NotFound("unknown operation " + std::to_string(operation_id));
}

nlohmann::json Session::retrain() {
    std::lock_guard lock(mutex_);
    if (training_) throw Conflict("a retrain is already running");
    const auto kg = store_->current();
    store_->snapshot();
    if (!graphs_.contains(kg->version())) {
        write_snapshot(options_.models_dir, *kg);
        graphs_[kg->version()] = kg;
    }
    std::uint64_t model_version = models_.empty() ? 1 : models_.rbegin()->first + 1;
    for (const auto& [id, j] : jobs_) {
        if (j.model_version) model_version = std::max(model_version, *j.model_version + 1);
    }
    const std::uint64_t job_id = jobs_.empty() ? 1 : jobs_.rbegin()->first + 1;
    Job job;
    job.id = job_id;
    job.kg_version = kg->version();
    jobs_[job_id] = job;
    training_ = true;
    worker_ = std::jthread([this, job_id, kg, model_version] { run_job(job_id, kg, model_version); });
    return {{"job", job_id}, {"state", "queued"}, {"kg_version", kg->version()}};
}

void Session::run_job(std::uint64_t job_id, std::shared_ptr<const KnowledgeGraph> kg, std::uint64_t model_version) {
    {
        std::lock_guard lock(mutex_);
        jobs_[job_id].state = "running";
    }
    try {
        auto mv = std::make_shared<ModelVersion>(train(kg, options_.model, options_.split, [&](const TrainProgress& p) {
            std::lock_guard lock(mutex_);
            jobs_[job_id].epoch = p.epoch;
            jobs_[job_id].loss = p.loss;
        }));
        mv->id = model_version;
        save_model(options_.models_dir / std::to_string(model_version), *mv, *vocab_);
        auto predictor = std::make_shared<const Predictor>(mv, kg);
        std::lock_guard lock(mutex_);
        models_[model_version] = {mv, predictor};
        if (!active_) {
            active_ = model_version;
            persist_active();
        }
        bool touched = false;
        for (auto& op : operations_) {
            if (op.at("kg_version").get<std::uint64_t>() == kg->version() && op.at("model_version").is_null()) {
                op["model_version"] = model_version;
                touched = true;
            }
        }
        if (touched) persist_operations();
        jobs_[job_id].state = "done";
        jobs_[job_id].model_version = model_version;
        training_ = false;
    } catch (const std::exception& e) {
        std::lock_guard lock(mutex_);
        jobs_[job_id].state = "failed";
        jobs_[job_id].error = e.what();
        training_ = false;
    }
}

nlohmann::json Session::job(std::uint64_t job_id) const {
    std::lock_guard lock(mutex_);
    auto it = jobs_.find(job_id);
    if (it == jobs_.end()) throw NotFound("unknown job " + std::to_string(job_id));
    const auto& j = it->second;
    return {{"job", j.id},
            {"state", j.state},
            {"kg_version", j.kg_version},
            {"epoch", j.epoch},
            {"loss", j.loss},
            {"model_version", j.model_version ? nlohmann::json(*j.model_version) : nlohmann::json(nullptr)},
            {"error", j.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(j.error)}};
}

nlohmann::json Session::wait_for_job(std::uint64_t job_id) {
    for (;;) {
        auto status = job(job_id);
        if (status["state"] == "done" || status["state"] == "failed") return status;
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
}

nlohmann::json Session::models() const {
    std::lock_guard lock(mutex_);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [v, entry] : models_) {
        const auto& m = *entry.model;
        const std::string k = std::to_string(m.config.top_k);
        out.push_back({{"version", v},
                       {"kg_version", m.kg_version},
                       {"precision@" + k, m.test.at_k.precision},
                       {"recall@" + k, m.test.at_k.recall},
                       {"ndcg@" + k, m.test.at_k.ndcg},
                       {"precision@10", m.test.at_10.precision},
                       {"train_seconds", m.train_seconds},
                       {"active", active_ && *active_ == v}});
    }
    return out;
}

nlohmann::json Session::activate(std::uint64_t model_version) {
    {
        std::lock_guard lock(mutex_);
        if (!models_.contains(model_version)) throw NotFound("unknown model version " + std::to_string(model_version));
        active_ = model_version;
        persist_active();
    }
    return models();
}

}  // namespace slw
