#pragma once

#include "tdnn/training.hpp"

#include <json.hpp>

#include <string>

namespace tdnn {

// Checkpoints hold the model kind, family specs, activation names and every
// parameter tensor as a row-major array. Doubles are serialized with a
// shortest round-trip decimal representation, so save → load is value-exact.
// Generic heads, custom bump metrics and custom mass channels have no named
// form and are rejected.

nlohmann::json test_function_to_json(const TestFunction& g);
TestFunction test_function_from_json(const nlohmann::json& doc);

nlohmann::json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& doc);

void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace tdnn
