#pragma once

#include "dpgnn/matrix.hpp"

namespace dpgnn {

/// Row-wise softmax with per-row max subtraction; safe for large logits.
Matrix softmax_rows(const Matrix& logits);

/// Backward of softmax_rows for one row: given p = softmax(z) and dL/dp,
/// returns dL/dz = p * (dL/dp - <dL/dp, p>).
void softmax_row_backward(std::span<const double> probs, std::span<const double> grad_probs, std::span<double> grad_logits);

}  // namespace dpgnn
