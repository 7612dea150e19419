#pragma once

#include <cmath>

#include "cadseq/nn/model.hpp"

namespace cadseq::nn {

/// Global-norm gradient clipping over every parameter; returns the pre-clip
/// norm.
template <class T>
double clip_global_norm(ParamStore<T>& params, double max_norm) {
  double sq = 0.0;
  for (auto& [name, p] : params.items) {
    const Array<T>& g = p.grad_store();
    sq += static_cast<double>(kernels::dot(g.v.data(), g.v.data(), g.size()));
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const T s = static_cast<T>(max_norm / norm);
    for (auto& [name, p] : params.items)
      for (T& x : p.grad_store().v) x *= s;
  }
  return norm;
}

template <class T>
class Adam {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamStore<T>& params, double lr) {
    if (m_.empty()) {
      for (auto& [name, p] : params.items) {
        m_.emplace_back(p.value().shape);
        v_.emplace_back(p.value().shape);
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.items.size(); ++i) {
      Var<T>& p = params.items[i].second;
      const Array<T>& g = p.grad_store();
      Array<T>& m = m_[i];
      Array<T>& v = v_[i];
      Array<T>& w = const_cast<Array<T>&>(p.value());
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double gj = static_cast<double>(g.v[j]);
        const double mj = beta1_ * m.v[j] + (1.0 - beta1_) * gj;
        const double vj = beta2_ * v.v[j] + (1.0 - beta2_) * gj * gj;
        m.v[j] = static_cast<T>(mj);
        v.v[j] = static_cast<T>(vj);
        const double mhat = mj / bc1;
        const double vhat = vj / bc2;
        w.v[j] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

  std::int64_t t() const { return t_; }
  void set_t(std::int64_t t) { t_ = t; }

  std::vector<Array<T>>& first_moments() { return m_; }
  std::vector<Array<T>>& second_moments() { return v_; }

  /// Pre-sizes the moment buffers (used when restoring a checkpoint).
  void ensure_sized(ParamStore<T>& params) {
    if (!m_.empty()) return;
    for (auto& [name, p] : params.items) {
      m_.emplace_back(p.value().shape);
      v_.emplace_back(p.value().shape);
    }
  }

 private:
  double beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::vector<Array<T>> m_, v_;
};

}  // namespace cadseq::nn
