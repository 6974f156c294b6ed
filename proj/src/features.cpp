#include "fedflow/features.hpp"

#include <Eigen/Dense>
#include <cmath>

#include <json.hpp>

#include "fedflow/errors.hpp"
#include "fedflow/kernels.hpp"

namespace fedflow {

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  if (x.size() != means.size()) throw DataError("standardize: dimension mismatch");
  std::vector<double> out(x.size());
  for (size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - means[j]) / stddevs[j];
  return out;
}

Standardizer fit_standardizer_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.size() < 2) throw DataError("fit_standardizer: need at least 2 records");
  const size_t d = rows[0].size();
  for (const auto& r : rows)
    if (r.size() != d) throw DataError("fit_standardizer: ragged feature dimensions");

  Standardizer st;
  st.means = column_means(rows);
  st.stddevs.assign(d, 0.0);
  st.zero_variance.assign(d, 0);

  std::vector<double> m2(d, 0.0);
  for (const auto& r : rows)
    for (size_t j = 0; j < d; ++j) {
      const double c = r[j] - st.means[j];
      m2[j] += c * c;
    }
  const double denom = static_cast<double>(rows.size()) - 1.0;
  for (size_t j = 0; j < d; ++j) {
    const double var = m2[j] / denom;
    if (var > 0.0) {
      st.stddevs[j] = std::sqrt(var);
    } else {
      st.stddevs[j] = 1.0;
      st.zero_variance[j] = 1;
    }
  }
  return st;
}

Standardizer fit_standardizer(const std::vector<FlowRecord>& records) {
  std::vector<std::vector<double>> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(r.features);
  return fit_standardizer_rows(rows);
}

PcaModel fit_pca(const std::vector<std::vector<double>>& standardized_rows, int k) {
  if (standardized_rows.empty()) throw DataError("fit_pca: no records");
  const int d = static_cast<int>(standardized_rows[0].size());
  if (k < 1 || k > d) throw ConfigError("fit_pca: k must lie in [1, dim]");
  if (static_cast<int>(standardized_rows.size()) < k)
    throw DataError("fit_pca: fewer records than requested components");

  const auto means = column_means(standardized_rows);
  const auto cov = covariance_blocked(standardized_rows, means);

  Eigen::MatrixXd C(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) C(a, b) = cov[static_cast<size_t>(a) * d + static_cast<size_t>(b)];

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(C);
  if (solver.info() != Eigen::Success) throw ModelError("fit_pca: eigendecomposition failed");

  // Eigen returns ascending eigenvalues; take the top k in descending order.
  PcaModel pca;
  pca.input_dim = d;
  pca.k = k;
  pca.components.resize(static_cast<size_t>(k) * static_cast<size_t>(d));
  pca.explained_variance.resize(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    const int src = d - 1 - i;
    pca.explained_variance[static_cast<size_t>(i)] = std::max(0.0, solver.eigenvalues()(src));
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    // sign convention: largest-magnitude loading is positive
    int arg = 0;
    for (int j = 1; j < d; ++j)
      if (std::abs(v(j)) > std::abs(v(arg))) arg = j;
    if (v(arg) < 0) v = -v;
    for (int j = 0; j < d; ++j)
      pca.components[static_cast<size_t>(i) * d + static_cast<size_t>(j)] = v(j);
  }
  return pca;
}

std::vector<double> transform(const PcaModel& pca, const Standardizer& st,
                              std::span<const double> record, int k_use) {
  if (static_cast<int>(record.size()) != pca.input_dim)
    throw DataError("transform: record dimension mismatch");
  if (k_use < 0) k_use = pca.k;
  if (k_use > pca.k) throw ConfigError("transform: k exceeds fitted components");

  const auto z = st.apply(record);
  std::vector<double> out(static_cast<size_t>(k_use), 0.0);
  for (int i = 0; i < k_use; ++i) {
    const auto c = pca.component(i);
    double acc = 0.0;
    for (size_t j = 0; j < z.size(); ++j) acc += c[j] * z[j];
    out[static_cast<size_t>(i)] = acc;
  }
  return out;
}

std::vector<double> inverse_transform(const PcaModel& pca, std::span<const double> reduced) {
  if (static_cast<int>(reduced.size()) > pca.k)
    throw ConfigError("inverse_transform: more coefficients than components");
  std::vector<double> out(static_cast<size_t>(pca.input_dim), 0.0);
  for (size_t i = 0; i < reduced.size(); ++i) {
    const auto c = pca.component(static_cast<int>(i));
    for (size_t j = 0; j < out.size(); ++j) out[j] += c[j] * reduced[i];
  }
  return out;
}

std::string preprocess_to_json(const Standardizer& st, const PcaModel& pca) {
  nlohmann::json j;
  j["version"] = 1;
  j["dims"] = pca.input_dim;
  j["k"] = pca.k;
  j["means"] = st.means;
  j["stddevs"] = st.stddevs;
  j["zero_variance"] = st.zero_variance;
  j["components"] = pca.components;
  j["explained_variance"] = pca.explained_variance;
  return j.dump();
}

void preprocess_from_json(const std::string& text, Standardizer& st, PcaModel& pca) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError("preprocess document is not valid json");
  try {
    if (j.at("version").get<int>() != 1) throw DataError("unsupported preprocess version");
    pca.input_dim = j.at("dims").get<int>();
    pca.k = j.at("k").get<int>();
    st.means = j.at("means").get<std::vector<double>>();
    st.stddevs = j.at("stddevs").get<std::vector<double>>();
    st.zero_variance = j.at("zero_variance").get<std::vector<uint8_t>>();
    pca.components = j.at("components").get<std::vector<double>>();
    pca.explained_variance = j.at("explained_variance").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed preprocess document: ") + e.what());
  }
  if (st.means.size() != static_cast<size_t>(pca.input_dim) ||
      pca.components.size() != static_cast<size_t>(pca.k) * static_cast<size_t>(pca.input_dim))
    throw DataError("preprocess document has inconsistent dimensions");
}

}  // namespace fedflow
