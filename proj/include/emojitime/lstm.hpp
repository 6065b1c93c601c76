#pragma once

#include <vector>

#include <Eigen/Core>

namespace emojitime {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Standard LSTM cell. W is 4H x (input + H) acting on [x_t; h_{t-1}], b is
// 4H x 1; gate blocks are stacked as input, forget, output, candidate.

struct LstmStep {
  Vector z;  // [x_t; h_{t-1}]
  Vector i, f, o, g;
  Vector c_prev, c, tanh_c, h;
};

struct LstmTrace {
  std::vector<LstmStep> steps;
  const Vector& last_h() const { return steps.back().h; }
};

/// Runs the recurrence from a zero state over `inputs` (in the given order).
void lstm_forward(const Matrix& w, const Matrix& b, const std::vector<Vector>& inputs, LstmTrace& trace);

/// Backpropagates per-step hidden-state gradients `dh` (one per step, may be
/// zero vectors). Accumulates into dw/db and returns input gradients.
std::vector<Vector> lstm_backward(const Matrix& w, const LstmTrace& trace, const std::vector<Vector>& dh,
                                  Matrix& dw, Matrix& db);

}  // namespace emojitime
