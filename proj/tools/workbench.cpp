// Command-line entry point: serve, train, prune, datagen.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "slw/canonical_json.hpp"
#include "slw/datagen.hpp"
#include "slw/graph_store.hpp"
#include "slw/http_server.hpp"
#include "slw/metapath.hpp"
#include "slw/model/model_io.hpp"
#include "slw/session.hpp"

namespace {

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return nlohmann::json::parse(in);
}

std::uint64_t effective_seed(std::uint64_t cli_seed) {
    if (const char* env = std::getenv("WORKBENCH_SEED"); env && *env) return std::stoull(env);
    return cli_seed;
}

void load_config(const std::string& path, std::uint64_t seed, slw::ModelConfig& model, slw::SplitConfig& split) {
    nlohmann::json j = path.empty() ? nlohmann::json::object() : read_json_file(path);
    model = slw::ModelConfig::from_json(j.value("model", j));
    model.seed = seed;
    split.seed = seed;
    if (j.contains("split")) {
        const auto& s = j["split"];
        split.train_frac = s.value("train_frac", split.train_frac);
        split.valid_frac = s.value("valid_frac", split.valid_frac);
        split.test_frac = s.value("test_frac", split.test_frac);
    }
}

void copy_if_exists(const std::filesystem::path& from, const std::filesystem::path& to) {
    if (std::filesystem::exists(from)) {
        std::filesystem::copy_file(from, to, std::filesystem::copy_options::overwrite_existing);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic-lethality knowledge-graph workbench"};
    app.require_subcommand(1);

    std::string data, models = "models", config, out, strategy, spec_file, host = "127.0.0.1";
    int port = 8080;
    std::uint64_t seed = 42;

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--data", data, "Corpus directory")->required();
    serve->add_option("--models", models, "Model and session state directory");
    serve->add_option("--port", port, "Listen port");
    serve->add_option("--host", host, "Listen address");
    serve->add_option("--seed", seed, "Base seed (WORKBENCH_SEED overrides)");
    serve->add_option("--config", config, "Model config JSON");

    auto* train = app.add_subcommand("train", "Train one model and write it to a directory");
    train->add_option("--data", data, "Corpus directory")->required();
    train->add_option("--out", out, "Output model directory")->required();
    train->add_option("--config", config, "Model config JSON");
    train->add_option("--seed", seed, "Base seed (WORKBENCH_SEED overrides)");

    auto* prune = app.add_subcommand("prune", "Apply metapath strategies to a corpus");
    prune->add_option("--data", data, "Corpus directory")->required();
    prune->add_option("--strategy", strategy, "Strategy JSON (object or array)")->required();
    prune->add_option("--out", out, "Write the pruned corpus here");

    auto* datagen = app.add_subcommand("datagen", "Generate a synthetic corpus");
    datagen->add_option("--spec", spec_file, "Corpus spec JSON; defaults when omitted");
    datagen->add_option("--out", out, "Output directory")->required();
    auto* datagen_seed = datagen->add_option("--seed", seed, "Seed (overrides the spec)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (serve->parsed()) {
            slw::SessionOptions opts;
            opts.data_dir = data;
            opts.models_dir = models;
            opts.seed = effective_seed(seed);
            load_config(config, opts.seed, opts.model, opts.split);
            slw::Session session(opts);
            if (session.models().empty()) {
                auto job = session.retrain();
                std::cerr << "no model yet; training job " << job["job"] << " started\n";
            }
            std::cerr << "listening on http://" << host << ":" << port << "\n";
            return slw::serve(session, host, port) ? 0 : 1;
        }
        if (train->parsed()) {
            slw::ModelConfig model;
            slw::SplitConfig split;
            load_config(config, effective_seed(seed), model, split);
            auto ingested = slw::ingest(slw::DataFiles::in_directory(data));
            auto mv = slw::train(ingested.graph, model, split, [](const slw::TrainProgress& p) {
                std::cerr << "epoch " << p.epoch << " loss " << p.loss << " valid precision@k " << p.valid_precision
                          << "\n";
            });
            mv.id = 1;
            slw::save_model(out, mv, ingested.graph->vocab());
            std::cout << mv.metrics_json()["test"].dump(2) << "\n";
            return 0;
        }
        if (prune->parsed()) {
            auto ingested = slw::ingest(slw::DataFiles::in_directory(data));
            const auto& vocab = ingested.graph->vocab();
            auto j = read_json_file(strategy);
            if (!j.is_array()) j = nlohmann::json::array({j});
            std::vector<slw::MetapathStrategy> strategies;
            for (const auto& s : j) strategies.push_back(slw::strategy_from_json(s, vocab));
            slw::GraphStore store(ingested.graph);
            const auto report = slw::apply(store, strategies);
            nlohmann::json result{{"matched", report.matched},
                                  {"deleted", report.total_deleted},
                                  {"inverse_deleted", report.deletion.inverse_deleted},
                                  {"triples_before", report.triples_before},
                                  {"deleted_fraction", report.deleted_fraction},
                                  {"kg_version", report.deletion.version}};
            if (!out.empty()) {
                const std::filesystem::path src(data), dst(out);
                std::filesystem::create_directories(dst);
                for (const char* f : {"entities.tsv", "relations.tsv", "diseases.tsv", "genes.tsv", "sequences.fasta"}) {
                    copy_if_exists(src / f, dst / f);
                }
                slw::write_triples(dst / "triples.tsv", *store.current());
            }
            std::cout << slw::canonical_dump(result) << "\n";
            return 0;
        }
        if (datagen->parsed()) {
            slw::CorpusSpec spec;
            if (!spec_file.empty()) spec = slw::CorpusSpec::from_json(read_json_file(spec_file));
            if (datagen_seed->count() > 0 || std::getenv("WORKBENCH_SEED")) spec.seed = effective_seed(seed);
            const auto manifest = slw::generate_corpus(spec, out);
            std::cout << manifest["counts"].dump(2) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
