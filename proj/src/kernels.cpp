#include "fedflow/kernels.hpp"

#include "fedflow/errors.hpp"

namespace fedflow {

std::vector<double> column_means(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DataError("column_means: no rows");
  const size_t d = rows[0].size();
  std::vector<double> means(d, 0.0);
  for (const auto& row : rows)
    for (size_t j = 0; j < d; ++j) means[j] += row[j];
  const auto n = static_cast<double>(rows.size());
  for (double& m : means) m /= n;
  return means;
}

std::vector<double> covariance_serial(const std::vector<std::vector<double>>& rows,
                                      const std::vector<double>& means) {
  const size_t n = rows.size();
  const size_t d = means.size();
  if (n < 2) throw DataError("covariance: need at least 2 rows");
  std::vector<double> cov(d * d, 0.0);
  std::vector<double> centered(d);
  for (const auto& row : rows) {
    for (size_t j = 0; j < d; ++j) centered[j] = row[j] - means[j];
    for (size_t a = 0; a < d; ++a) {
      const double ca = centered[a];
      for (size_t b = a; b < d; ++b) cov[a * d + b] += ca * centered[b];
    }
  }
  const double denom = static_cast<double>(n) - 1.0;
  for (size_t a = 0; a < d; ++a)
    for (size_t b = a; b < d; ++b) {
      cov[a * d + b] /= denom;
      cov[b * d + a] = cov[a * d + b];
    }
  return cov;
}

std::vector<double> covariance_blocked(const std::vector<std::vector<double>>& rows,
                                       const std::vector<double>& means) {
  const size_t n = rows.size();
  const size_t d = means.size();
  if (n < 2) throw DataError("covariance: need at least 2 rows");

  // Fixed block size: partials are combined in block order, so the sum does
  // not depend on how blocks were scheduled across threads.
  constexpr size_t kBlock = 2048;
  const size_t n_blocks = (n + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> partials(n_blocks);

#pragma omp parallel for schedule(dynamic)
  for (int64_t blk = 0; blk < static_cast<int64_t>(n_blocks); ++blk) {
    const size_t begin = static_cast<size_t>(blk) * kBlock;
    const size_t end = std::min(begin + kBlock, n);
    std::vector<double> local(d * d, 0.0);
    std::vector<double> centered(d);
    for (size_t i = begin; i < end; ++i) {
      for (size_t j = 0; j < d; ++j) centered[j] = rows[i][j] - means[j];
      for (size_t a = 0; a < d; ++a) {
        const double ca = centered[a];
        for (size_t b = a; b < d; ++b) local[a * d + b] += ca * centered[b];
      }
    }
    partials[static_cast<size_t>(blk)] = std::move(local);
  }

  std::vector<double> cov(d * d, 0.0);
  for (const auto& local : partials)
    for (size_t k = 0; k < cov.size(); ++k) cov[k] += local[k];

  const double denom = static_cast<double>(n) - 1.0;
  for (size_t a = 0; a < d; ++a)
    for (size_t b = a; b < d; ++b) {
      cov[a * d + b] /= denom;
      cov[b * d + a] = cov[a * d + b];
    }
  return cov;
}

}  // namespace fedflow
