#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace emojitime {

/// log(1 + exp(x)) without overflow.
template <class T>
T softplus(T x) {
  return x > T(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <class T>
T sigmoid(T x) {
  return x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
}

/// One skip-gram negative-sampling update for a center input vector against
/// a positive context output row and negative output rows. Loss is
///   -log s(u_pos . v) - sum_n log s(-u_n . v)
/// and every row moves by -lr * gradient. Output rows update in order using
/// the pre-update center vector; the center vector moves last using the
/// pre-update output rows, so for distinct rows this is an exact gradient
/// step. Returns the loss before the update. `scratch` needs center.size().
template <class T>
T sgns_step(std::span<T> center, std::span<T> positive, const std::vector<std::span<T>>& negatives,
            T lr, std::span<T> scratch) {
  const std::size_t dim = center.size();
  for (std::size_t d = 0; d < dim; ++d) scratch[d] = T(0);
  T loss = T(0);
  auto apply = [&](std::span<T> out_row, T label) {
    T dot = T(0);
    for (std::size_t d = 0; d < dim; ++d) dot += out_row[d] * center[d];
    // label 1: -log s(dot) = softplus(-dot); label 0: -log s(-dot) = softplus(dot)
    loss += label > T(0) ? softplus(-dot) : softplus(dot);
    const T g = sigmoid(dot) - label;
    for (std::size_t d = 0; d < dim; ++d) {
      scratch[d] += g * out_row[d];
      out_row[d] -= lr * g * center[d];
    }
  };
  apply(positive, T(1));
  for (const auto& n : negatives) apply(n, T(0));
  for (std::size_t d = 0; d < dim; ++d) center[d] -= lr * scratch[d];
  return loss;
}

/// Loss of the same objective without touching parameters.
template <class T>
T sgns_loss(std::span<const T> center, std::span<const T> positive,
            const std::vector<std::span<const T>>& negatives) {
  auto dot = [&](std::span<const T> row) {
    T s = T(0);
    for (std::size_t d = 0; d < center.size(); ++d) s += row[d] * center[d];
    return s;
  };
  T loss = softplus(-dot(positive));
  for (const auto& n : negatives) loss += softplus(dot(n));
  return loss;
}

}  // namespace emojitime
