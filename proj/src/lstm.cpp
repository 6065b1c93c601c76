#include "emojitime/lstm.hpp"

#include <cmath>

namespace emojitime {

namespace {
double logistic(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }
}  // namespace

void lstm_forward(const Matrix& w, const Matrix& b, const std::vector<Vector>& inputs, LstmTrace& trace) {
  const Eigen::Index h = w.rows() / 4;
  const Eigen::Index in = w.cols() - h;
  trace.steps.resize(inputs.size());
  Vector h_prev = Vector::Zero(h);
  Vector c_prev = Vector::Zero(h);
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    auto& s = trace.steps[t];
    s.z.resize(in + h);
    s.z.head(in) = inputs[t];
    s.z.tail(h) = h_prev;
    Vector a = w * s.z + b.col(0);
    s.i = a.segment(0, h).unaryExpr(&logistic);
    s.f = a.segment(h, h).unaryExpr(&logistic);
    s.o = a.segment(2 * h, h).unaryExpr(&logistic);
    s.g = a.segment(3 * h, h).array().tanh();
    s.c_prev = c_prev;
    s.c = s.f.cwiseProduct(c_prev) + s.i.cwiseProduct(s.g);
    s.tanh_c = s.c.array().tanh();
    s.h = s.o.cwiseProduct(s.tanh_c);
    h_prev = s.h;
    c_prev = s.c;
  }
}

std::vector<Vector> lstm_backward(const Matrix& w, const LstmTrace& trace, const std::vector<Vector>& dh,
                                  Matrix& dw, Matrix& db) {
  const Eigen::Index h = w.rows() / 4;
  const Eigen::Index in = w.cols() - h;
  std::vector<Vector> dx(trace.steps.size());
  Vector dh_next = Vector::Zero(h);
  Vector dc_next = Vector::Zero(h);
  Vector da(4 * h);
  for (std::size_t t = trace.steps.size(); t-- > 0;) {
    const auto& s = trace.steps[t];
    const Vector dht = dh[t] + dh_next;
    const Vector d_o = dht.cwiseProduct(s.tanh_c);
    const Vector dc = dc_next + dht.cwiseProduct(s.o).cwiseProduct((1.0 - s.tanh_c.array().square()).matrix());
    const Vector d_i = dc.cwiseProduct(s.g);
    const Vector d_g = dc.cwiseProduct(s.i);
    const Vector d_f = dc.cwiseProduct(s.c_prev);
    dc_next = dc.cwiseProduct(s.f);
    da.segment(0, h) = d_i.array() * s.i.array() * (1.0 - s.i.array());
    da.segment(h, h) = d_f.array() * s.f.array() * (1.0 - s.f.array());
    da.segment(2 * h, h) = d_o.array() * s.o.array() * (1.0 - s.o.array());
    da.segment(3 * h, h) = d_g.array() * (1.0 - s.g.array().square());
    dw.noalias() += da * s.z.transpose();
    db.col(0) += da;
    const Vector dz = w.transpose() * da;
    dx[t] = dz.head(in);
    dh_next = dz.tail(h);
  }
  return dx;
}

}  // namespace emojitime
