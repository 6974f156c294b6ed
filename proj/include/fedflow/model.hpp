#pragma once

#include <span>
#include <string>
#include <variant>

#include "fedflow/forest.hpp"
#include "fedflow/hoeffding.hpp"
#include "fedflow/linear.hpp"

namespace fedflow {

enum class ModelKind { svm, lr, dt, rf };

const char* model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

using Model = std::variant<LinearModelParams, HoeffdingTree, ForestModel>;

int model_predict(const Model& model, std::span<const double> x);

// Versioned JSON. Linear parameters encode doubles as fixed-width IEEE-754
// hex, so every linear model of a given dimension serializes to the same
// byte count (the ledger's B). Trees and forests are nested node documents.
std::string model_serialize(const Model& model);
Model model_deserialize(const std::string& text);

}  // namespace fedflow
