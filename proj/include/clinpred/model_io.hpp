#pragma once

#include <string>

#include "clinpred/models.hpp"

namespace clinpred {

// Versioned structured-text model file with an embedded FNV-1a content
// checksum on the last line. Text on purpose: clinical users can audit the
// parameters with a pager. Doubles are printed with 17 significant digits so
// a load reproduces predictions bit-exactly.
std::string serialize_model(const fitted_model& m);
fitted_model deserialize_model(const std::string& text);

void model_save(const fitted_model& m, const std::string& path);
fitted_model model_load(const std::string& path);

} // namespace clinpred
