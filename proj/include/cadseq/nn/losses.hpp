#pragma once

#include <memory>
#include <span>
#include <vector>

#include "cadseq/nn/autograd.hpp"

namespace cadseq::nn {

/// Mean cross-entropy over rows with nonzero weight: sum_i w_i * CE_i / norm.
/// Row targets are class indices; `norm` is the count the mean divides by.
template <class T>
Var<T> cross_entropy(const Var<T>& logits, std::shared_ptr<std::vector<int>> targets,
                     std::shared_ptr<std::vector<T>> weights, T norm) {
  const std::size_t rows = logits.value().dim(0);
  const std::size_t classes = logits.value().dim(1);
  if (targets->size() != rows || weights->size() != rows)
    fail(ErrorKind::shape_mismatch, "cross_entropy target/weight rows");

  auto probs = std::make_shared<Array<T>>(logits.value());
  double loss = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    T* row = probs->v.data() + r * classes;
    T mx = row[0];
    for (std::size_t j = 1; j < classes; ++j) mx = std::max(mx, row[j]);
    for (std::size_t j = 0; j < classes; ++j) row[j] -= mx;
    detail::exp_inplace(row, classes);
    const T s = kernels::sum(row, classes);
    for (std::size_t j = 0; j < classes; ++j) row[j] /= s;
    if ((*weights)[r] != T(0)) {
      const int t = (*targets)[r];
      loss -= static_cast<double>((*weights)[r]) *
              std::log(std::max(static_cast<double>(row[t]), 1e-30));
    }
  }
  Array<T> out({1});
  out.v[0] = static_cast<T>(loss / static_cast<double>(norm));

  return Var<T>::make_op(std::move(out), {logits},
                         [probs, targets, weights, norm, rows, classes](const Var<T>& g) {
                           const T go = g.value().v[0] / norm;
                           Array<T> gx(probs->shape);
                           for (std::size_t r = 0; r < rows; ++r) {
                             const T w = (*weights)[r];
                             if (w == T(0)) continue;
                             const T* p = probs->v.data() + r * classes;
                             T* o = gx.v.data() + r * classes;
                             const T c = go * w;
                             for (std::size_t j = 0; j < classes; ++j) o[j] = c * p[j];
                             o[(*targets)[r]] -= c;
                           }
                           return std::vector<Var<T>>{constant(std::move(gx))};
                         });
}

/// InfoNCE over a 2m x 2m cosine-similarity matrix. Anchor i's positive is
/// (i+m) mod 2m; the denominator runs over every k != i with the same
/// temperature as the numerator. Returns the mean over all 2m anchors.
template <class T>
Var<T> info_nce(const Var<T>& sim, T tau) {
  const std::size_t n = sim.value().dim(0);  // 2m
  if (sim.value().dim(1) != n || n % 2 != 0)
    fail(ErrorKind::shape_mismatch, "info_nce needs a 2m x 2m matrix");
  const std::size_t m = n / 2;
  if (m == 0) fail(ErrorKind::shape_mismatch, "info_nce needs m >= 1");

  // softmax over k != i of sim[i,k]/tau, computed per row
  auto probs = std::make_shared<Array<T>>(Array<T>({n, n}));
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = sim.value().v.data() + i * n;
    double mx = -1e300;
    for (std::size_t k = 0; k < n; ++k)
      if (k != i) mx = std::max(mx, static_cast<double>(row[k]) / tau);
    double denom = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      denom += std::exp(static_cast<double>(row[k]) / tau - mx);
    }
    const std::size_t pos = (i + m) % n;
    const double lse = mx + std::log(denom);
    loss += lse - static_cast<double>(row[pos]) / tau;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      probs->v[i * n + k] =
          static_cast<T>(std::exp(static_cast<double>(row[k]) / tau - lse));
    }
  }
  Array<T> out({1});
  out.v[0] = static_cast<T>(loss / static_cast<double>(n));

  return Var<T>::make_op(std::move(out), {sim}, [probs, tau, n, m](const Var<T>& g) {
    const T go = g.value().v[0] / (tau * static_cast<T>(n));
    Array<T> gx({n, n});
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t pos = (i + m) % n;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i) continue;
        T v = probs->v[i * n + k];
        if (k == pos) v -= T(1);
        gx.v[i * n + k] = go * v;
      }
    }
    return std::vector<Var<T>>{constant(std::move(gx))};
  });
}

/// Contrastive loss over stacked masked views [2m, d] (rows i and i+m are
/// the positive pair).
template <class T>
Var<T> contrastive_loss(const Var<T>& views, T tau) {
  const Var<T> normalized = l2_normalize_rows(views);
  const Var<T> sim = matmul_nt(normalized, normalized);
  return info_nce(sim, tau);
}

/// Plain cosine similarity (metric-side helper).
template <class T>
double cosine_similarity(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) fail(ErrorKind::shape_mismatch, "cosine_similarity sizes");
  double uu = 0, vv = 0, uv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uu += static_cast<double>(u[i]) * u[i];
    vv += static_cast<double>(v[i]) * v[i];
    uv += static_cast<double>(u[i]) * v[i];
  }
  if (uu == 0.0 || vv == 0.0) fail(ErrorKind::zero_vector, "cosine_similarity on zero vector");
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

}  // namespace cadseq::nn
