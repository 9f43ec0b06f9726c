#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "dpgnn/dataset.hpp"

namespace dpgnn {

DataSplit make_standard_split(const LabeledGraph& graph, Rng& rng, std::size_t per_class) {
  const auto classes = static_cast<std::size_t>(graph.num_classes());
  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i = 0; i < graph.num_nodes(); ++i) members[static_cast<std::size_t>(graph.label(i))].push_back(i);

  std::size_t smallest = graph.num_nodes();
  for (const auto& m : members) smallest = std::min(smallest, m.size());
  const std::size_t take = std::min(per_class, smallest / 2);
  if (take == 0) throw std::invalid_argument("split: every class needs at least 2 nodes");

  DataSplit split;
  std::vector<std::size_t> rest;
  for (auto& m : members) {
    rng.shuffle(m.begin(), m.end());
    split.train.insert(split.train.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(take));
    rest.insert(rest.end(), m.begin() + static_cast<std::ptrdiff_t>(take), m.end());
  }
  if (rest.size() < 3) throw std::invalid_argument("split: too few nodes left for validation and test");
  std::sort(rest.begin(), rest.end());
  rng.shuffle(rest.begin(), rest.end());
  const std::size_t val = std::min<std::size_t>(500, rest.size() / 3);
  const std::size_t test = std::min<std::size_t>(1000, rest.size() - val);
  split.val.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(val));
  split.test.assign(rest.begin() + static_cast<std::ptrdiff_t>(val),
                    rest.begin() + static_cast<std::ptrdiff_t>(val + test));
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

DatasetBundle generate_synthetic(const SyntheticSpec& spec) {
  if (spec.classes < 2) throw std::invalid_argument("generate_synthetic: need at least 2 classes");
  if (!(0.0 <= spec.p_out && spec.p_out <= spec.p_in && spec.p_in <= 1.0))
    throw std::invalid_argument("generate_synthetic: need 0 <= p_out <= p_in <= 1");
  if (spec.dim < static_cast<std::size_t>(spec.classes))
    throw std::invalid_argument("generate_synthetic: feature dimension must be >= number of classes");
  if (!(spec.feature_noise >= 0.0 && spec.feature_noise <= 1.0))
    throw std::invalid_argument("generate_synthetic: feature_noise must lie in [0, 1]");
  const std::size_t n = spec.nodes;
  const auto classes = static_cast<std::size_t>(spec.classes);
  if (n < 2 * classes) throw std::invalid_argument("generate_synthetic: too few nodes for the class count");

  Rng rng(derive_seed(spec.seed, 0x5b3));
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i * classes / n);

  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = labels[i] == labels[j] ? spec.p_in : spec.p_out;
      if (rng.bernoulli(p)) edges.emplace_back(i, j);
    }
  }

  // Class c owns the coordinate block [c*w, (c+1)*w) with w = d / C; its
  // centroid is the indicator of that block. With probability feature_noise
  // a node shows the centroid of a uniformly drawn class instead of its own,
  // and every coordinate gets U[0, feature_noise) jitter.
  const std::size_t block = spec.dim / classes;
  Matrix x(n, spec.dim);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t centroid = static_cast<std::size_t>(labels[i]);
    if (rng.bernoulli(spec.feature_noise)) centroid = rng.below(classes);
    for (std::size_t j = 0; j < spec.dim; ++j) x(i, j) = std::max(0.0, rng.uniform(0.0, spec.feature_noise));
    for (std::size_t j = centroid * block; j < (centroid + 1) * block; ++j) x(i, j) += 1.0;
  }

  DatasetBundle bundle;
  bundle.name = fmt::format("sbm-n{}-c{}-s{}", n, spec.classes, spec.seed);
  bundle.graph = LabeledGraph(n, std::move(edges), std::move(labels), spec.classes);
  bundle.features = NodeFeatures(std::move(x));
  bundle.split = make_standard_split(bundle.graph, rng);
  bundle.validate();
  return bundle;
}

}  // namespace dpgnn
