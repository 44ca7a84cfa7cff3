#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <unistd.h>

#include "slw/kg.hpp"

namespace fixtures {

// Genes CDK1, FARSA, OR1A1; BPs SPS, DNAREP.
// t1 = (FARSA, involved_in, SPS), t2 = (OR1A1, involved_in, SPS),
// t3 = (CDK1, SL_GsG, FARSA), t4 = (CDK1, involved_in, DNAREP).
inline std::shared_ptr<const slw::KnowledgeGraph> mini5() {
    auto v = std::make_shared<slw::Vocabulary>();
    for (const char* g : {"CDK1", "FARSA", "OR1A1"}) v->add_entity({g, slw::EntityType::Gene, g});
    for (const char* b : {"SPS", "DNAREP"}) v->add_entity({b, slw::EntityType::BP, b});
    const auto inv = v->add_relation("involved_in");
    const auto sl = v->add_relation("SL_GsG");
    auto e = [&](const char* id) { return v->entity_id(id); };
    std::vector<slw::Triple> t{{e("FARSA"), inv, e("SPS")},
                               {e("OR1A1"), inv, e("SPS")},
                               {e("CDK1"), sl, e("FARSA")},
                               {e("CDK1"), inv, e("DNAREP")}};
    return std::make_shared<const slw::KnowledgeGraph>(v, t, 1);
}

inline slw::Triple t(const slw::KnowledgeGraph& kg, const char* h, const char* r, const char* tail) {
    const auto& v = kg.vocab();
    return {v.entity_id(h), v.relation_id(r), v.entity_id(tail)};
}

/// Fresh directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("slw-unit-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    void write(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
    }
};

}  // namespace fixtures
