#pragma once

#include <optional>
#include <string>

#include "n4d/solver.hpp"

namespace n4d {

// Key of everything the subspace operators depend on.
std::string operator_cache_key(const ProblemConfig& cfg);

// Flat binary blob: one JSON header line, then H0, B and C as raw doubles
// (column major).  Loading returns nothing when the file is absent or its
// header does not match the key.
void save_operators(const std::string& path, const std::string& key, const SubspaceOperators& ops);
std::optional<SubspaceOperators> load_operators(const std::string& path, const std::string& key);

}  // namespace n4d
