#pragma once

#include <span>
#include <string>
#include <vector>

#include "fedflow/dataset.hpp"

namespace fedflow {

struct Standardizer {
  std::vector<double> means;
  std::vector<double> stddevs;           // zero-variance columns get 1
  std::vector<uint8_t> zero_variance;    // flag per column

  std::vector<double> apply(std::span<const double> x) const;
};

// Principal components of the standardized data. Rows of `components`
// (row-major k x input_dim) are orthonormal loading vectors, ordered by
// descending explained variance, sign-fixed so the largest-magnitude
// loading in each row is positive.
struct PcaModel {
  int input_dim = 0;
  int k = 0;
  std::vector<double> components;
  std::vector<double> explained_variance;

  std::span<const double> component(int i) const {
    return {components.data() + static_cast<size_t>(i) * static_cast<size_t>(input_dim),
            static_cast<size_t>(input_dim)};
  }
};

Standardizer fit_standardizer(const std::vector<FlowRecord>& records);
Standardizer fit_standardizer_rows(const std::vector<std::vector<double>>& rows);

PcaModel fit_pca(const std::vector<std::vector<double>>& standardized_rows, int k);

// components * standardize(record), truncated to the first k_use components
// (k_use <= pca.k; -1 means all fitted components).
std::vector<double> transform(const PcaModel& pca, const Standardizer& st,
                              std::span<const double> record, int k_use = -1);

// Back-projection into standardized space (used by reconstruction checks).
std::vector<double> inverse_transform(const PcaModel& pca, std::span<const double> reduced);

// Versioned JSON document holding both fitted models.
std::string preprocess_to_json(const Standardizer& st, const PcaModel& pca);
void preprocess_from_json(const std::string& text, Standardizer& st, PcaModel& pca);

}  // namespace fedflow
