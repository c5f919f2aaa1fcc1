#pragma once

#include "tda/model.hpp"

#include <string>

namespace tda {

/// Versioned JSON document for a fitted model. Reals are written in the
/// shortest form that parses back to the identical double.
std::string model_to_json(const FittedTda& model);
/// Throws ParseError on malformed documents or unsupported versions.
FittedTda model_from_json(const std::string& text);

void save_model(const FittedTda& model, const std::string& path);
FittedTda load_model(const std::string& path);

} // namespace tda
