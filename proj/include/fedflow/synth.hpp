#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedflow/dataset.hpp"

namespace fedflow {

// Isotropic Gaussian cluster; label comes from the cluster, not the draw.
struct GaussianCluster {
  std::vector<double> center;
  double sigma = 1.0;
  int64_t count = 0;
  int label = 0;
};

struct SyntheticEntitySpec {
  std::string name;
  std::vector<GaussianCluster> clusters;
};

struct SyntheticSpec {
  int dimension = 0;
  std::vector<SyntheticEntitySpec> entities;
};

// Desk-scale dataset generator. Each entity draws from its declared mixture,
// deterministically under the seed; supports disjoint-attack layouts where
// each entity sees one attack cluster.
std::vector<std::vector<FlowRecord>> generate_synthetic(const SyntheticSpec& spec, uint64_t seed);

}  // namespace fedflow
