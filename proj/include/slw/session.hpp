#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "slw/features.hpp"
#include "slw/graph_store.hpp"
#include "slw/metapath.hpp"
#include "slw/model/train.hpp"

namespace slw {

/// Request conflicts with the service state (HTTP 409).
class Conflict : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SessionOptions {
    std::filesystem::path data_dir;
    std::filesystem::path models_dir;
    std::uint64_t seed = 42;
    ModelConfig model;
    SplitConfig split;
};

/// State behind the workbench HTTP API. Every method returns the JSON body of
/// the matching endpoint and throws NotFound (404), Conflict (409) or
/// std::invalid_argument (400). Safe to call from many threads; reads never
/// wait for a running retrain.
class Session {
public:
    explicit Session(SessionOptions options);
    ~Session();

    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    nlohmann::json search_genes(const std::string& query) const;
    nlohmann::json diseases() const;
    nlohmann::json disease_genes(const std::string& disease_id) const;

    nlohmann::json predictions(const std::string& gene_id) const;
    nlohmann::json paths(const std::string& gene_id, const std::vector<std::string>& partners,
                         std::size_t max_paths = kDefaultMaxPaths) const;
    nlohmann::json aggregate(const std::string& gene_id, const std::vector<std::string>& partners) const;
    nlohmann::json embedding(const std::string& disease_id, const std::string& primary_id,
                             const std::vector<std::string>& partners, const std::vector<std::string>& lasso) const;
    /// Ego network on the active model's graph, or on the working graph when current_graph is set.
    nlohmann::json ego(const std::string& gene_id, int hops, bool current_graph = false) const;

    nlohmann::json formulate(const nlohmann::json& strategy);
    nlohmann::json pending() const;
    nlohmann::json remove_pending(std::size_t index);
    nlohmann::json apply(const std::string& note);
    nlohmann::json operations() const;
    nlohmann::json edit_note(std::uint64_t operation_id, const std::string& note);

    nlohmann::json retrain();
    nlohmann::json job(std::uint64_t job_id) const;
    nlohmann::json models() const;
    nlohmann::json activate(std::uint64_t model_version);

    /// Blocks until the job finishes; returns its final status.
    nlohmann::json wait_for_job(std::uint64_t job_id);
    std::shared_ptr<const KnowledgeGraph> current_graph() const { return store_->current(); }
    GraphStore& store() { return *store_; }

private:
    struct Job {
        std::uint64_t id = 0;
        std::string state = "queued";
        std::optional<std::uint64_t> model_version;
        std::string error;
        int epoch = 0;
        double loss = 0.0;
        std::uint64_t kg_version = 0;
    };

    struct ModelEntry {
        std::shared_ptr<const ModelVersion> model;
        std::shared_ptr<const Predictor> predictor;
    };

    EntityId gene(const std::string& id) const;
    std::shared_ptr<const Predictor> active_predictor() const;
    std::shared_ptr<const KnowledgeGraph> graph_for(std::uint64_t kg_version) const;
    std::vector<EntityId> resolve_partners(const Predictor& p, EntityId g, const std::vector<std::string>& ids) const;
    nlohmann::json entity_json(EntityId e) const;
    std::vector<std::string> disease_genes_list(const std::string& disease_id) const;
    void load_state();
    void persist_operations() const;
    void persist_active() const;
    void run_job(std::uint64_t job_id, std::shared_ptr<const KnowledgeGraph> kg, std::uint64_t model_version);

    SessionOptions options_;
    std::shared_ptr<const Vocabulary> vocab_;
    std::vector<DiseaseMapping> diseases_;
    std::unique_ptr<GraphStore> store_;
    std::vector<EmbeddingPoint> projection_;  // empty when the corpus has no genes.tsv

    mutable std::mutex mutex_;  // guards everything below
    std::vector<MetapathStrategy> pending_;
    std::vector<nlohmann::json> operations_;
    std::map<std::uint64_t, ModelEntry> models_;
    std::optional<std::uint64_t> active_;
    std::map<std::uint64_t, Job> jobs_;
    std::map<std::uint64_t, std::shared_ptr<const KnowledgeGraph>> graphs_;  // by KG version
    bool training_ = false;
    std::jthread worker_;
};

nlohmann::json to_json(const LatticeReport& report);
nlohmann::json to_json(const SlotStats& stats, const Vocabulary& vocab);

}  // namespace slw
