#include "fedflow/synth.hpp"

#include "fedflow/errors.hpp"
#include "fedflow/rng.hpp"

namespace fedflow {

std::vector<std::vector<FlowRecord>> generate_synthetic(const SyntheticSpec& spec, uint64_t seed) {
  if (spec.dimension < 1) throw ConfigError("synthetic spec: dimension must be >= 1");
  if (spec.entities.empty()) throw ConfigError("synthetic spec: no entities");
  for (const auto& ent : spec.entities) {
    if (ent.clusters.empty())
      throw ConfigError("synthetic spec: entity '" + ent.name + "' has no clusters");
    for (const auto& cl : ent.clusters) {
      if (static_cast<int>(cl.center.size()) != spec.dimension)
        throw ConfigError("synthetic spec: cluster dimension mismatch in entity '" + ent.name +
                          "' (center has " + std::to_string(cl.center.size()) + " coords, spec says " +
                          std::to_string(spec.dimension) + ")");
      if (cl.sigma <= 0) throw ConfigError("synthetic spec: cluster sigma must be positive");
      if (cl.count <= 0) throw ConfigError("synthetic spec: cluster count must be positive");
    }
  }

  std::vector<std::vector<FlowRecord>> out(spec.entities.size());
  int64_t row = 0;
  for (size_t e = 0; e < spec.entities.size(); ++e) {
    Rng rng(derive_stream(seed, "synth", e));
    for (const auto& cl : spec.entities[e].clusters) {
      for (int64_t i = 0; i < cl.count; ++i) {
        FlowRecord rec;
        rec.features.resize(static_cast<size_t>(spec.dimension));
        for (int d = 0; d < spec.dimension; ++d)
          rec.features[static_cast<size_t>(d)] =
              cl.center[static_cast<size_t>(d)] + cl.sigma * rng.normal();
        rec.label = cl.label;
        rec.entity_id = static_cast<int>(e);
        rec.source_row = row++;
        out[e].push_back(std::move(rec));
      }
    }
  }
  return out;
}

}  // namespace fedflow
