#pragma once

#include <filesystem>
#include <memory>

#include "slw/model/train.hpp"

namespace slw {

/// Writes `<dir>/{embeddings.bin,config.json,metrics.json}`. embeddings.bin is
/// one JSON header line followed by little-endian row-major doubles, entity
/// rows first, then relation rows.
void save_model(const std::filesystem::path& dir, const ModelVersion& model, const Vocabulary& vocab);

/// Reads a model written by save_model. Entity and relation ids recorded in
/// the header must match the vocabulary row for row.
std::shared_ptr<ModelVersion> load_model(const std::filesystem::path& dir, const Vocabulary& vocab);

}  // namespace slw
