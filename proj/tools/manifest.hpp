#pragma once

#include <string>

#include "json.hpp"

namespace reshare::cli {

/// Hex SHA-256 of a file's bytes. Throws Error(Io) if unreadable.
std::string sha256_file(const std::string& path);

/// Rounds to the 12 significant digits used for every text output, so JSON
/// numbers print the same way as CSV fields. NaN and infinities become null.
nlohmann::ordered_json json_real(double x);

void write_json_file(const std::string& path, const nlohmann::ordered_json& doc);

}  // namespace reshare::cli
