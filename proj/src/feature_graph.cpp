#include "dpgnn/feature_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dpgnn/simd/kernels.hpp"

namespace dpgnn {

Matrix cosine_similarity_matrix(const NodeFeatures& features) {
  const Matrix& x = features.matrix();
  const std::size_t n = x.rows();
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = std::sqrt(simd::dot(x.row(i), x.row(i)));

  Matrix sim(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    sim(i, i) = 1.0;
    if (norms[i] == 0.0) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (norms[j] == 0.0) continue;
      const double value = simd::dot(x.row(i), x.row(j)) / (norms[i] * norms[j]);
      sim(i, j) = sim(j, i) = std::clamp(value, 0.0, 1.0);
    }
  }
  return sim;
}

std::vector<std::size_t> top_k_neighbors(const Matrix& similarity, std::size_t i, std::size_t k) {
  const std::size_t n = similarity.rows();
  std::vector<std::size_t> others;
  others.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j)
    if (j != i) others.push_back(j);
  // Rank on a 2^-40 grid: similarities that differ only by rounding (scaled
  // inputs, a different dot-product kernel) tie and fall back to the index.
  const auto row = similarity.row(i);
  std::vector<std::int64_t> key(n);
  for (std::size_t j = 0; j < n; ++j) key[j] = std::llround(row[j] * 0x1.0p40);
  const std::size_t take = k - 1;
  std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(take), others.end(),
                    [&](std::size_t a, std::size_t b) { return key[a] != key[b] ? key[a] > key[b] : a < b; });
  std::vector<std::size_t> selected{i};
  selected.insert(selected.end(), others.begin(), others.begin() + static_cast<std::ptrdiff_t>(take));
  return selected;
}

namespace {

void check_k(const Matrix& similarity, std::size_t k) {
  if (similarity.rows() != similarity.cols()) throw std::invalid_argument("feature graph: similarity not square");
  if (k < 1 || k > similarity.rows()) {
    throw std::invalid_argument("feature graph: top-k must lie in [1, " + std::to_string(similarity.rows()) +
                                "], got " + std::to_string(k));
  }
}

}  // namespace

Matrix build_feature_graph(const Matrix& similarity, std::size_t k) {
  check_k(similarity, k);
  const std::size_t n = similarity.rows();
  Matrix adjacency(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : top_k_neighbors(similarity, i, k)) {
      adjacency(i, j) = 1.0;
      adjacency(j, i) = 1.0;
    }
  }
  return adjacency;
}

std::size_t directed_selection_count(const Matrix& similarity, std::size_t k) {
  check_k(similarity, k);
  std::size_t count = 0;
  for (std::size_t i = 0; i < similarity.rows(); ++i) count += top_k_neighbors(similarity, i, k).size();
  return count;
}

}  // namespace dpgnn
