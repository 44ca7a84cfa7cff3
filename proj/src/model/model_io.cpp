#include "slw/model/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace slw {

namespace {

static_assert(std::endian::native == std::endian::little, "embeddings.bin is written in host order");

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return nlohmann::json::parse(in);
}

EvaluationResult evaluation_from_json(const nlohmann::json& j, int k) {
    const std::string sk = std::to_string(k);
    EvaluationResult r;
    r.at_k = {j.at("precision@" + sk), j.at("recall@" + sk), j.at("ndcg@" + sk)};
    r.at_10 = {j.at("precision@10"), j.at("recall@10"), j.at("ndcg@10")};
    r.random_precision_at_10 = j.at("random_precision@10");
    r.random_precision_at_k = j.at("random_precision@" + sk);
    r.queries = j.at("queries");
    return r;
}

}  // namespace

void save_model(const std::filesystem::path& dir, const ModelVersion& model, const Vocabulary& vocab) {
    std::filesystem::create_directories(dir);
    const auto& p = model.params;
    nlohmann::json header{{"format", "slw-embeddings-1"},
                          {"dtype", "float64"},
                          {"byte_order", "little"},
                          {"entity_shape", {p.entity.rows(), p.entity.cols()}},
                          {"relation_shape", {p.relation.rows(), p.relation.cols()}}};
    auto& ents = header["entities"] = nlohmann::json::array();
    for (const auto& e : vocab.entities()) ents.push_back(e.id);
    auto& rels = header["relations"] = nlohmann::json::array();
    for (const auto& r : vocab.relations()) rels.push_back(r.id);

    std::ofstream out(dir / "embeddings.bin", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / "embeddings.bin").string());
    out << header.dump() << '\n';
    out.write(reinterpret_cast<const char*>(p.entity.data()),
              static_cast<std::streamsize>(p.entity.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(p.relation.data()),
              static_cast<std::streamsize>(p.relation.size() * sizeof(double)));
    out.close();

    nlohmann::json config{{"model", model.config.to_json()},
                          {"split",
                           {{"train_frac", model.split.train_frac},
                            {"valid_frac", model.split.valid_frac},
                            {"test_frac", model.split.test_frac},
                            {"seed", model.split.seed}}},
                          {"version", model.id},
                          {"kg_version", model.kg_version}};
    write_text(dir / "config.json", config.dump(2) + "\n");
    write_text(dir / "metrics.json", model.metrics_json().dump(2) + "\n");
}

std::shared_ptr<ModelVersion> load_model(const std::filesystem::path& dir, const Vocabulary& vocab) {
    auto mv = std::make_shared<ModelVersion>();
    const auto config = read_json(dir / "config.json");
    mv->config = ModelConfig::from_json(config.at("model"));
    const auto& s = config.at("split");
    mv->split = {s.at("train_frac"), s.at("valid_frac"), s.at("test_frac"), s.at("seed")};
    mv->id = config.at("version");
    mv->kg_version = config.at("kg_version");

    const auto metrics = read_json(dir / "metrics.json");
    mv->test = evaluation_from_json(metrics.at("test"), mv->config.top_k);
    mv->valid = evaluation_from_json(metrics.at("valid"), mv->config.top_k);
    mv->initial_loss = metrics.at("initial_loss");
    mv->loss_curve = metrics.at("loss_curve").get<std::vector<double>>();
    mv->valid_precision = metrics.at("valid_precision_curve").get<std::vector<double>>();
    mv->best_epoch = metrics.at("best_epoch");
    mv->train_seconds = metrics.at("train_seconds");

    std::ifstream in(dir / "embeddings.bin", std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + (dir / "embeddings.bin").string());
    std::string line;
    std::getline(in, line);
    const auto header = nlohmann::json::parse(line);
    if (header.at("dtype") != "float64") throw std::runtime_error("unsupported embedding dtype");
    const auto& ents = header.at("entities");
    const auto& rels = header.at("relations");
    if (ents.size() != vocab.num_entities() || rels.size() != vocab.num_relations()) {
        throw std::runtime_error("embedding header does not match the vocabulary size");
    }
    for (std::size_t i = 0; i < ents.size(); ++i) {
        if (ents[i].get<std::string>() != vocab.entity(static_cast<EntityId>(i)).id) {
            throw std::runtime_error("embedding entity order differs at row " + std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < rels.size(); ++i) {
        if (rels[i].get<std::string>() != vocab.relation(static_cast<RelationId>(i)).id) {
            throw std::runtime_error("embedding relation order differs at row " + std::to_string(i));
        }
    }
    const auto es = header.at("entity_shape");
    const auto rs = header.at("relation_shape");
    mv->params.entity.resize(es[0].get<Eigen::Index>(), es[1].get<Eigen::Index>());
    mv->params.relation.resize(rs[0].get<Eigen::Index>(), rs[1].get<Eigen::Index>());
    in.read(reinterpret_cast<char*>(mv->params.entity.data()),
            static_cast<std::streamsize>(mv->params.entity.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(mv->params.relation.data()),
            static_cast<std::streamsize>(mv->params.relation.size() * sizeof(double)));
    if (!in) throw std::runtime_error("embeddings.bin is truncated");
    return mv;
}

}  // namespace slw
