#include "fedflow/model.hpp"

#include <json.hpp>

#include "fedflow/errors.hpp"
#include "fedflow/io.hpp"

namespace fedflow {

using nlohmann::json;

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::svm: return "svm";
    case ModelKind::lr: return "lr";
    case ModelKind::dt: return "dt";
    case ModelKind::rf: return "rf";
  }
  return "?";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "svm") return ModelKind::svm;
  if (name == "lr") return ModelKind::lr;
  if (name == "dt") return ModelKind::dt;
  if (name == "rf") return ModelKind::rf;
  throw ConfigError("unknown model kind: '" + name + "' (expected svm|lr|dt|rf)");
}

int model_predict(const Model& model, std::span<const double> x) {
  if (const auto* lin = std::get_if<LinearModelParams>(&model)) return linear_predict(*lin, x);
  if (const auto* tree = std::get_if<HoeffdingTree>(&model)) return tree->predict(x);
  return std::get<ForestModel>(model).predict(x);
}

namespace {

json tree_to_json(const HoeffdingTree& tree) {
  json j;
  j["dim"] = tree.dim();
  j["samples"] = tree.samples_seen();
  const auto& cfg = tree.config();
  j["config"] = {{"delta", cfg.delta},
                 {"grace", cfg.grace_period},
                 {"tie", cfg.tie_threshold},
                 {"range", cfg.value_range},
                 {"candidates", cfg.candidates_per_feature},
                 {"mask", cfg.allowed_features}};
  json nodes = json::array();
  for (const auto& node : tree.nodes()) {
    if (!node.is_leaf()) {
      nodes.push_back({{"f", node.feature}, {"t", node.threshold}, {"l", node.left}, {"r", node.right}});
      continue;
    }
    const auto& leaf = node.leaf;
    json g = json::array();
    for (int c = 0; c < 2; ++c) {
      json per_class = json::array();
      for (const auto& stat : leaf.gauss[c])
        per_class.push_back({stat.weight, stat.mean, stat.m2});
      g.push_back(std::move(per_class));
    }
    nodes.push_back({{"c", {leaf.obs[0], leaf.obs[1]}},
                     {"p", {leaf.prior[0], leaf.prior[1]}},
                     {"g", std::move(g)},
                     {"lo", leaf.fmin},
                     {"hi", leaf.fmax},
                     {"n", leaf.since_check}});
  }
  j["nodes"] = std::move(nodes);
  return j;
}

HoeffdingTree tree_from_json(const json& j) {
  const int dim = j.at("dim").get<int>();
  HoeffdingConfig cfg;
  const auto& jc = j.at("config");
  cfg.delta = jc.at("delta").get<double>();
  cfg.grace_period = jc.at("grace").get<int>();
  cfg.tie_threshold = jc.at("tie").get<double>();
  cfg.value_range = jc.at("range").get<double>();
  cfg.candidates_per_feature = jc.at("candidates").get<int>();
  cfg.allowed_features = jc.at("mask").get<std::vector<int>>();

  HoeffdingTree tree(dim, cfg);
  tree.set_samples_seen(j.at("samples").get<int64_t>());
  auto& nodes = tree.nodes();
  nodes.clear();
  for (const auto& jn : j.at("nodes")) {
    TreeNode node;
    if (jn.contains("f")) {
      node.feature = jn.at("f").get<int>();
      node.threshold = jn.at("t").get<double>();
      node.left = jn.at("l").get<int>();
      node.right = jn.at("r").get<int>();
    } else {
      node.leaf.obs[0] = jn.at("c")[0].get<int64_t>();
      node.leaf.obs[1] = jn.at("c")[1].get<int64_t>();
      node.leaf.prior[0] = jn.at("p")[0].get<double>();
      node.leaf.prior[1] = jn.at("p")[1].get<double>();
      for (int c = 0; c < 2; ++c) {
        const auto& per_class = jn.at("g")[static_cast<size_t>(c)];
        node.leaf.gauss[c].resize(static_cast<size_t>(dim));
        if (per_class.size() != static_cast<size_t>(dim))
          throw DataError("tree document: gaussian vector length mismatch");
        for (size_t f = 0; f < per_class.size(); ++f) {
          node.leaf.gauss[c][f].weight = per_class[f][0].get<double>();
          node.leaf.gauss[c][f].mean = per_class[f][1].get<double>();
          node.leaf.gauss[c][f].m2 = per_class[f][2].get<double>();
        }
      }
      node.leaf.fmin = jn.at("lo").get<std::vector<double>>();
      node.leaf.fmax = jn.at("hi").get<std::vector<double>>();
      node.leaf.since_check = jn.at("n").get<int64_t>();
    }
    nodes.push_back(std::move(node));
  }
  if (nodes.empty()) throw DataError("tree document has no nodes");
  return tree;
}

}  // namespace

std::string model_serialize(const Model& model) {
  json j;
  j["version"] = 1;
  if (const auto* lin = std::get_if<LinearModelParams>(&model)) {
    j["kind"] = "linear";
    j["loss"] = lin->loss == LossKind::hinge ? "hinge" : "log";
    j["dim"] = lin->weights.size();
    j["weights"] = doubles_to_hex(lin->weights);
    j["bias"] = double_to_hex(lin->bias);
    j["steps"] = u64_to_hex(lin->steps);
  } else if (const auto* tree = std::get_if<HoeffdingTree>(&model)) {
    j["kind"] = "tree";
    j["tree"] = tree_to_json(*tree);
  } else {
    const auto& forest = std::get<ForestModel>(model);
    j["kind"] = "forest";
    j["dim"] = forest.dim();
    j["cap"] = forest.cap();
    json trees = json::array();
    for (const auto& member : forest.trees())
      trees.push_back({{"rng", u64_to_hex(member.rng_state)},
                       {"mask", member.mask},
                       {"tree", tree_to_json(member.tree)}});
    j["trees"] = std::move(trees);
  }
  return j.dump();
}

Model model_deserialize(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError("model document is not valid json");
  try {
    if (j.at("version").get<int>() != 1) throw DataError("unsupported model version");
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "linear") {
      LinearModelParams p;
      p.loss = j.at("loss").get<std::string>() == "hinge" ? LossKind::hinge : LossKind::log_loss;
      p.weights = doubles_from_hex(j.at("weights").get<std::string>());
      if (p.weights.size() != j.at("dim").get<size_t>())
        throw DataError("linear model document: weight count mismatch");
      p.bias = double_from_hex(j.at("bias").get<std::string>());
      p.steps = u64_from_hex(j.at("steps").get<std::string>());
      return p;
    }
    if (kind == "tree") return tree_from_json(j.at("tree"));
    if (kind == "forest") {
      ForestModel forest;
      ForestConfig cfg;
      cfg.n_trees = 1;
      cfg.cap = j.at("cap").get<int>();
      forest = ForestModel(1, j.at("dim").get<int>(), cfg, 0);
      forest.set_cap(cfg.cap);
      forest.trees().clear();
      for (const auto& jt : j.at("trees")) {
        ForestTree member;
        member.rng_state = u64_from_hex(jt.at("rng").get<std::string>());
        member.mask = jt.at("mask").get<std::vector<int>>();
        member.tree = tree_from_json(jt.at("tree"));
        forest.trees().push_back(std::move(member));
      }
      if (forest.trees().empty()) throw DataError("forest document has no trees");
      return forest;
    }
    throw DataError("unknown model kind in document: " + kind);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace fedflow
