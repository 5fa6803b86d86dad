#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace glassbox {

/// Canonical JSON text: sorted object keys, no insignificant whitespace,
/// floating point numbers printed with 17 significant digits (round-trip
/// exact), integers verbatim, NaN/inf as null.
std::string canonical_json(const nlohmann::json& value);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

/// Content address of a JSON payload: sha256 of its canonical text.
inline std::string content_id(const nlohmann::json& value) { return sha256_hex(canonical_json(value)); }

}  // namespace glassbox
