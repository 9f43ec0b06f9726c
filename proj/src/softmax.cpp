#include "dpgnn/softmax.hpp"

#include <algorithm>
#include <cmath>

namespace dpgnn {

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto in = logits.row(i);
    auto dst = out.row(i);
    const double top = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) total += dst[c] = std::exp(in[c] - top);
    for (double& v : dst) v /= total;
  }
  return out;
}

void softmax_row_backward(std::span<const double> probs, std::span<const double> grad_probs, std::span<double> grad_logits) {
  double inner = 0.0;
  for (std::size_t c = 0; c < probs.size(); ++c) inner += grad_probs[c] * probs[c];
  for (std::size_t c = 0; c < probs.size(); ++c) grad_logits[c] = probs[c] * (grad_probs[c] - inner);
}

}  // namespace dpgnn
