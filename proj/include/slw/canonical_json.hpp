#pragma once

#include <string>

#include <json.hpp>

namespace slw {

/// Compact JSON with keys sorted and every floating-point number printed
/// with 9 significant digits. Equal documents give equal bytes.
std::string canonical_dump(const nlohmann::json& j);

}  // namespace slw
