#pragma once

// Reverse-mode autodiff over Array<T>. Ops record a tape when grad mode is
// on and any input requires grad. Backward passes are themselves expressed
// through these ops, so calling grad(..., create_graph=true) yields gradient
// nodes that can be differentiated again (used by the critic's gradient
// penalty).

#include <functional>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "cadseq/kernels/kernels.hpp"
#include "cadseq/nn/array.hpp"
#include "cadseq/util/rng.hpp"

namespace cadseq::nn {

namespace detail {
inline thread_local bool g_grad_enabled = true;
}

struct GradMode {
  explicit GradMode(bool on) : prev(detail::g_grad_enabled) { detail::g_grad_enabled = on; }
  ~GradMode() { detail::g_grad_enabled = prev; }
  bool prev;
};

inline bool grad_enabled() { return detail::g_grad_enabled; }

template <class T>
class Var {
 public:
  struct Node {
    Array<T> value;
    Array<T> grad_store;  // leaves only, lazily sized
    bool requires_grad = false;
    bool leaf = true;
    std::vector<Var> parents;
    std::function<std::vector<Var>(const Var& gout)> vjp;
  };

  Var() = default;
  explicit Var(Array<T> value, bool requires = false) : n_(std::make_shared<Node>()) {
    n_->value = std::move(value);
    n_->requires_grad = requires;
  }

  bool defined() const { return n_ != nullptr; }
  const Array<T>& value() const { return n_->value; }
  bool requires_grad() const { return n_ && n_->requires_grad; }
  bool is_leaf() const { return n_->leaf; }

  Array<T>& grad_store() {
    if (n_->grad_store.size() == 0) n_->grad_store = Array<T>(n_->value.shape);
    return n_->grad_store;
  }
  void zero_grad() {
    if (n_->grad_store.size() != 0)
      std::fill(n_->grad_store.v.begin(), n_->grad_store.v.end(), T(0));
  }

  Node* node() const { return n_.get(); }

  T scalar() const {
    if (n_->value.size() != 1) fail(ErrorKind::shape_mismatch, "scalar() on non-scalar");
    return n_->value.v[0];
  }

  static Var make_op(Array<T> value, std::vector<Var> parents,
                     std::function<std::vector<Var>(const Var&)> vjp) {
    bool track = grad_enabled();
    if (track) {
      track = false;
      for (const Var& p : parents)
        if (p.defined() && p.requires_grad()) track = true;
    }
    Var out(std::move(value), track);
    if (track) {
      out.n_->leaf = false;
      out.n_->parents = std::move(parents);
      out.n_->vjp = std::move(vjp);
    }
    return out;
  }

 private:
  std::shared_ptr<Node> n_;
};

// ---------------------------------------------------------------------------
// elementwise / shape ops
// ---------------------------------------------------------------------------

template <class T>
Var<T> constant(Array<T> a) {
  return Var<T>(std::move(a), false);
}

template <class T>
Var<T> add(const Var<T>& a, const Var<T>& b);
template <class T>
Var<T> mul(const Var<T>& a, const Var<T>& b);

template <class T>
Var<T> neg(const Var<T>& a) {
  Array<T> out = a.value();
  for (T& x : out.v) x = -x;
  return Var<T>::make_op(std::move(out), {a}, [](const Var<T>& g) {
    return std::vector<Var<T>>{neg(g)};
  });
}

template <class T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  if (!a.value().same_shape(b.value()))
    fail(ErrorKind::shape_mismatch, "add " + shape_str(a.value()) + " vs " + shape_str(b.value()));
  Array<T> out = a.value();
  kernels::axpy(T(1), b.value().v.data(), out.v.data(), out.size());
  return Var<T>::make_op(std::move(out), {a, b}, [](const Var<T>& g) {
    return std::vector<Var<T>>{g, g};
  });
}

template <class T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  if (!a.value().same_shape(b.value())) fail(ErrorKind::shape_mismatch, "sub shapes differ");
  Array<T> out = a.value();
  kernels::axpy(T(-1), b.value().v.data(), out.v.data(), out.size());
  return Var<T>::make_op(std::move(out), {a, b}, [](const Var<T>& g) {
    return std::vector<Var<T>>{g, neg(g)};
  });
}

template <class T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  if (!a.value().same_shape(b.value())) fail(ErrorKind::shape_mismatch, "mul shapes differ");
  Array<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.v[i] *= b.value().v[i];
  return Var<T>::make_op(std::move(out), {a, b}, [a, b](const Var<T>& g) {
    return std::vector<Var<T>>{mul(g, b), mul(g, a)};
  });
}

template <class T>
Var<T> div(const Var<T>& a, const Var<T>& b) {
  if (!a.value().same_shape(b.value())) fail(ErrorKind::shape_mismatch, "div shapes differ");
  Array<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.v[i] /= b.value().v[i];
  return Var<T>::make_op(std::move(out), {a, b}, [a, b](const Var<T>& g) {
    Var<T> ga = div(g, b);
    return std::vector<Var<T>>{ga, neg(mul(ga, div(a, b)))};
  });
}

template <class T>
Var<T> scale(const Var<T>& a, T c) {
  Array<T> out = a.value();
  for (T& x : out.v) x *= c;
  return Var<T>::make_op(std::move(out), {a}, [c](const Var<T>& g) {
    return std::vector<Var<T>>{scale(g, c)};
  });
}

template <class T>
Var<T> add_scalar(const Var<T>& a, T c) {
  Array<T> out = a.value();
  for (T& x : out.v) x += c;
  return Var<T>::make_op(std::move(out), {a}, [](const Var<T>& g) {
    return std::vector<Var<T>>{g};
  });
}

template <class T>
Var<T> sqrt_op(const Var<T>& a) {
  Array<T> out = a.value();
  for (T& x : out.v) x = std::sqrt(x);
  return Var<T>::make_op(std::move(out), {a}, [a](const Var<T>& g) {
    return std::vector<Var<T>>{div(scale(g, T(0.5)), sqrt_op(a))};
  });
}

template <class T>
Var<T> reshape(const Var<T>& a, std::vector<std::size_t> shape) {
  if (Array<T>::count(shape) != a.value().size())
    fail(ErrorKind::shape_mismatch, "reshape element count mismatch");
  Array<T> out(shape, a.value().v);
  std::vector<std::size_t> old_shape = a.value().shape;
  return Var<T>::make_op(std::move(out), {a}, [old_shape](const Var<T>& g) {
    return std::vector<Var<T>>{reshape(g, old_shape)};
  });
}

/// Multiplies by a constant (detached) array of the same shape; the standard
/// dropout/step-mask primitive. Its second derivative w.r.t. the input is the
/// mask again, which is what a.e.-differentiable activations need.
template <class T>
Var<T> mul_const(const Var<T>& a, std::shared_ptr<Array<T>> mask) {
  if (!a.value().same_shape(*mask)) fail(ErrorKind::shape_mismatch, "mul_const shapes differ");
  Array<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.v[i] *= mask->v[i];
  return Var<T>::make_op(std::move(out), {a}, [mask](const Var<T>& g) {
    return std::vector<Var<T>>{mul_const(g, mask)};
  });
}

// ---------------------------------------------------------------------------
// reductions / broadcasts (adjoint pairs)
// ---------------------------------------------------------------------------

template <class T>
Var<T> broadcast_full(const Var<T>& a, std::vector<std::size_t> shape);

template <class T>
Var<T> sum_all(const Var<T>& a) {
  Array<T> out({1});
  out.v[0] = kernels::sum(a.value().v.data(), a.value().size());
  std::vector<std::size_t> shape = a.value().shape;
  return Var<T>::make_op(std::move(out), {a}, [shape](const Var<T>& g) {
    return std::vector<Var<T>>{broadcast_full(g, shape)};
  });
}

template <class T>
Var<T> broadcast_full(const Var<T>& a, std::vector<std::size_t> shape) {
  Array<T> out(shape);
  const T c = a.value().v[0];
  for (T& x : out.v) x = c;
  return Var<T>::make_op(std::move(out), {a}, [](const Var<T>& g) {
    return std::vector<Var<T>>{sum_all(g)};
  });
}

template <class T>
Var<T> mean_all(const Var<T>& a) {
  return scale(sum_all(a), T(1) / static_cast<T>(a.value().size()));
}

template <class T>
Var<T> broadcast_rows(const Var<T>& a, std::size_t m);

/// [m,n] -> [n]
template <class T>
Var<T> sum_rows(const Var<T>& a) {
  const std::size_t m = a.value().dim(0), n = a.value().dim(1);
  Array<T> out({n});
  for (std::size_t i = 0; i < m; ++i)
    kernels::axpy(T(1), a.value().v.data() + i * n, out.v.data(), n);
  return Var<T>::make_op(std::move(out), {a}, [m](const Var<T>& g) {
    return std::vector<Var<T>>{broadcast_rows(g, m)};
  });
}

/// [n] -> [m,n]
template <class T>
Var<T> broadcast_rows(const Var<T>& a, std::size_t m) {
  const std::size_t n = a.value().size();
  Array<T> out({m, n});
  for (std::size_t i = 0; i < m; ++i)
    std::copy(a.value().v.begin(), a.value().v.end(), out.v.begin() + i * n);
  return Var<T>::make_op(std::move(out), {a}, [](const Var<T>& g) {
    return std::vector<Var<T>>{sum_rows(g)};
  });
}

template <class T>
Var<T> broadcast_cols(const Var<T>& a, std::size_t n);

/// [m,n] -> [m]
template <class T>
Var<T> sum_cols(const Var<T>& a) {
  const std::size_t m = a.value().dim(0), n = a.value().dim(1);
  Array<T> out({m});
  for (std::size_t i = 0; i < m; ++i)
    out.v[i] = kernels::sum(a.value().v.data() + i * n, n);
  return Var<T>::make_op(std::move(out), {a}, [n](const Var<T>& g) {
    return std::vector<Var<T>>{broadcast_cols(g, n)};
  });
}

/// [m] -> [m,n]
template <class T>
Var<T> broadcast_cols(const Var<T>& a, std::size_t n) {
  const std::size_t m = a.value().size();
  Array<T> out({m, n});
  for (std::size_t i = 0; i < m; ++i)
    std::fill(out.v.begin() + i * n, out.v.begin() + (i + 1) * n, a.value().v[i]);
  return Var<T>::make_op(std::move(out), {a}, [](const Var<T>& g) {
    return std::vector<Var<T>>{sum_cols(g)};
  });
}

template <class T>
Var<T> repeat_mid(const Var<T>& a, std::size_t b_dim, std::size_t n_dim);

/// [B*N, d] viewed as (B,N,d) -> [B, d]
template <class T>
Var<T> sum_mid(const Var<T>& a, std::size_t b_dim, std::size_t n_dim) {
  const std::size_t d = a.value().dim(1);
  Array<T> out({b_dim, d});
  for (std::size_t b = 0; b < b_dim; ++b)
    for (std::size_t k = 0; k < n_dim; ++k)
      kernels::axpy(T(1), a.value().v.data() + (b * n_dim + k) * d,
                    out.v.data() + b * d, d);
  return Var<T>::make_op(std::move(out), {a}, [b_dim, n_dim](const Var<T>& g) {
    return std::vector<Var<T>>{repeat_mid(g, b_dim, n_dim)};
  });
}

/// [B, d] -> [B*N, d]
template <class T>
Var<T> repeat_mid(const Var<T>& a, std::size_t b_dim, std::size_t n_dim) {
  const std::size_t d = a.value().dim(1);
  Array<T> out({b_dim * n_dim, d});
  for (std::size_t b = 0; b < b_dim; ++b)
    for (std::size_t k = 0; k < n_dim; ++k)
      std::copy(a.value().v.begin() + b * d, a.value().v.begin() + (b + 1) * d,
                out.v.begin() + (b * n_dim + k) * d);
  return Var<T>::make_op(std::move(out), {a}, [b_dim, n_dim](const Var<T>& g) {
    return std::vector<Var<T>>{sum_mid(g, b_dim, n_dim)};
  });
}

/// Scales row i by r[i]: [m,n] * [m] -> [m,n]
template <class T>
Var<T> scale_rows(const Var<T>& a, const Var<T>& r) {
  const std::size_t m = a.value().dim(0), n = a.value().dim(1);
  if (r.value().size() != m) fail(ErrorKind::shape_mismatch, "scale_rows size mismatch");
  Array<T> out = a.value();
  for (std::size_t i = 0; i < m; ++i) {
    const T c = r.value().v[i];
    for (std::size_t j = 0; j < n; ++j) out.v[i * n + j] *= c;
  }
  return Var<T>::make_op(std::move(out), {a, r}, [a, r](const Var<T>& g) {
    return std::vector<Var<T>>{scale_rows(g, r), sum_cols(mul(g, a))};
  });
}

// ---------------------------------------------------------------------------
// matmul family
// ---------------------------------------------------------------------------

template <class T>
Var<T> matmul_nt(const Var<T>& a, const Var<T>& b);
template <class T>
Var<T> matmul_tn(const Var<T>& a, const Var<T>& b);

/// [m,k] x [k,n] -> [m,n]
template <class T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  const std::size_t m = a.value().dim(0), k = a.value().dim(1), n = b.value().dim(1);
  if (b.value().dim(0) != k) fail(ErrorKind::shape_mismatch, "matmul inner dims differ");
  Array<T> out({m, n});
  kernels::matmul_nn(a.value().v.data(), b.value().v.data(), out.v.data(),
                     static_cast<int>(m), static_cast<int>(k), static_cast<int>(n));
  return Var<T>::make_op(std::move(out), {a, b}, [a, b](const Var<T>& g) {
    return std::vector<Var<T>>{matmul_nt(g, b), matmul_tn(a, g)};
  });
}

/// [m,k] x [n,k]^T -> [m,n]
template <class T>
Var<T> matmul_nt(const Var<T>& a, const Var<T>& b) {
  const std::size_t m = a.value().dim(0), k = a.value().dim(1), n = b.value().dim(0);
  if (b.value().dim(1) != k) fail(ErrorKind::shape_mismatch, "matmul_nt inner dims differ");
  Array<T> out({m, n});
  kernels::matmul_nt(a.value().v.data(), b.value().v.data(), out.v.data(),
                     static_cast<int>(m), static_cast<int>(k), static_cast<int>(n));
  return Var<T>::make_op(std::move(out), {a, b}, [a, b](const Var<T>& g) {
    return std::vector<Var<T>>{matmul(g, b), matmul_tn(g, a)};
  });
}

/// [m,k]^T x [m,n] -> [k,n]
template <class T>
Var<T> matmul_tn(const Var<T>& a, const Var<T>& b) {
  const std::size_t m = a.value().dim(0), k = a.value().dim(1), n = b.value().dim(1);
  if (b.value().dim(0) != m) fail(ErrorKind::shape_mismatch, "matmul_tn inner dims differ");
  Array<T> out({k, n});
  kernels::matmul_tn(a.value().v.data(), b.value().v.data(), out.v.data(),
                     static_cast<int>(m), static_cast<int>(k), static_cast<int>(n));
  return Var<T>::make_op(std::move(out), {a, b}, [a, b](const Var<T>& g) {
    return std::vector<Var<T>>{matmul_nt(b, g), matmul(a, g)};
  });
}

template <class T>
Var<T> bmm_nt(const Var<T>& a, const Var<T>& b);
template <class T>
Var<T> bmm_tn(const Var<T>& a, const Var<T>& b);

/// [G,m,k] x [G,k,n] -> [G,m,n]
template <class T>
Var<T> bmm(const Var<T>& a, const Var<T>& b) {
  const std::size_t G = a.value().dim(0), m = a.value().dim(1), k = a.value().dim(2);
  const std::size_t n = b.value().dim(2);
  if (b.value().dim(0) != G || b.value().dim(1) != k)
    fail(ErrorKind::shape_mismatch, "bmm dims differ");
  Array<T> out({G, m, n});
  for (std::size_t g = 0; g < G; ++g)
    kernels::matmul_nn(a.value().v.data() + g * m * k, b.value().v.data() + g * k * n,
                       out.v.data() + g * m * n, static_cast<int>(m),
                       static_cast<int>(k), static_cast<int>(n));
  return Var<T>::make_op(std::move(out), {a, b}, [a, b](const Var<T>& g) {
    return std::vector<Var<T>>{bmm_nt(g, b), bmm_tn(a, g)};
  });
}

/// [G,m,k] x [G,n,k]^T -> [G,m,n]
template <class T>
Var<T> bmm_nt(const Var<T>& a, const Var<T>& b) {
  const std::size_t G = a.value().dim(0), m = a.value().dim(1), k = a.value().dim(2);
  const std::size_t n = b.value().dim(1);
  if (b.value().dim(0) != G || b.value().dim(2) != k)
    fail(ErrorKind::shape_mismatch, "bmm_nt dims differ");
  Array<T> out({G, m, n});
  for (std::size_t g = 0; g < G; ++g)
    kernels::matmul_nt(a.value().v.data() + g * m * k, b.value().v.data() + g * n * k,
                       out.v.data() + g * m * n, static_cast<int>(m),
                       static_cast<int>(k), static_cast<int>(n));
  return Var<T>::make_op(std::move(out), {a, b}, [a, b](const Var<T>& g) {
    return std::vector<Var<T>>{bmm(g, b), bmm_tn(g, a)};
  });
}

/// [G,m,k]^T x [G,m,n] -> [G,k,n]
template <class T>
Var<T> bmm_tn(const Var<T>& a, const Var<T>& b) {
  const std::size_t G = a.value().dim(0), m = a.value().dim(1), k = a.value().dim(2);
  const std::size_t n = b.value().dim(2);
  if (b.value().dim(0) != G || b.value().dim(1) != m)
    fail(ErrorKind::shape_mismatch, "bmm_tn dims differ");
  Array<T> out({G, k, n});
  for (std::size_t g = 0; g < G; ++g)
    kernels::matmul_tn(a.value().v.data() + g * m * k, b.value().v.data() + g * m * n,
                       out.v.data() + g * k * n, static_cast<int>(m),
                       static_cast<int>(k), static_cast<int>(n));
  return Var<T>::make_op(std::move(out), {a, b}, [a, b](const Var<T>& g) {
    return std::vector<Var<T>>{bmm_nt(b, g), bmm(a, g)};
  });
}

/// rank-4 transpose of dims 1 and 2
template <class T>
Var<T> transpose_12(const Var<T>& a) {
  const auto& s = a.value().shape;
  if (s.size() != 4) fail(ErrorKind::shape_mismatch, "transpose_12 needs rank 4");
  const std::size_t d0 = s[0], d1 = s[1], d2 = s[2], d3 = s[3];
  Array<T> out({d0, d2, d1, d3});
  for (std::size_t i = 0; i < d0; ++i)
    for (std::size_t j = 0; j < d1; ++j)
      for (std::size_t k = 0; k < d2; ++k)
        std::copy(a.value().v.begin() + ((i * d1 + j) * d2 + k) * d3,
                  a.value().v.begin() + ((i * d1 + j) * d2 + k + 1) * d3,
                  out.v.begin() + ((i * d2 + k) * d1 + j) * d3);
  return Var<T>::make_op(std::move(out), {a}, [](const Var<T>& g) {
    return std::vector<Var<T>>{transpose_12(g)};
  });
}

// ---------------------------------------------------------------------------
// gather / scatter, slicing
// ---------------------------------------------------------------------------

template <class T>
Var<T> scatter_rows(const Var<T>& g, std::shared_ptr<std::vector<int>> idx,
                    std::size_t table_rows);

/// table [V,d], idx values in [0,V) -> [n,d]
template <class T>
Var<T> embedding(const Var<T>& table, std::shared_ptr<std::vector<int>> idx) {
  const std::size_t d = table.value().dim(1);
  const std::size_t v_rows = table.value().dim(0);
  Array<T> out({idx->size(), d});
  for (std::size_t i = 0; i < idx->size(); ++i) {
    const int r = (*idx)[i];
    if (r < 0 || static_cast<std::size_t>(r) >= v_rows)
      fail(ErrorKind::index_out_of_range, "embedding index " + std::to_string(r));
    std::copy(table.value().v.begin() + static_cast<std::size_t>(r) * d,
              table.value().v.begin() + static_cast<std::size_t>(r + 1) * d,
              out.v.begin() + i * d);
  }
  return Var<T>::make_op(std::move(out), {table}, [idx, v_rows](const Var<T>& g) {
    return std::vector<Var<T>>{scatter_rows(g, idx, v_rows)};
  });
}

/// adjoint of embedding: accumulate rows of g into a [V,d] table
template <class T>
Var<T> scatter_rows(const Var<T>& g, std::shared_ptr<std::vector<int>> idx,
                    std::size_t table_rows) {
  const std::size_t d = g.value().dim(1);
  Array<T> out({table_rows, d});
  for (std::size_t i = 0; i < idx->size(); ++i)
    kernels::axpy(T(1), g.value().v.data() + i * d,
                  out.v.data() + static_cast<std::size_t>((*idx)[i]) * d, d);
  return Var<T>::make_op(std::move(out), {g}, [idx](const Var<T>& gg) {
    return std::vector<Var<T>>{embedding(gg, idx)};
  });
}

template <class T>
Var<T> concat_rows(const Var<T>& a, const Var<T>& b);

template <class T>
Var<T> slice_rows(const Var<T>& a, std::size_t r0, std::size_t r1) {
  const std::size_t m = a.value().dim(0), n = a.value().dim(1);
  if (r1 > m || r0 >= r1) fail(ErrorKind::shape_mismatch, "slice_rows bounds");
  Array<T> out({r1 - r0, n});
  std::copy(a.value().v.begin() + r0 * n, a.value().v.begin() + r1 * n, out.v.begin());
  return Var<T>::make_op(std::move(out), {a}, [r0, r1, m, n](const Var<T>& g) {
    // pad g back to [m,n] with zero blocks
    Var<T> result = g;
    if (r0 > 0) result = concat_rows(constant(Array<T>({r0, n})), result);
    if (r1 < m) result = concat_rows(result, constant(Array<T>({m - r1, n})));
    return std::vector<Var<T>>{result};
  });
}

template <class T>
Var<T> concat_rows(const Var<T>& a, const Var<T>& b) {
  const std::size_t ma = a.value().dim(0), mb = b.value().dim(0), n = a.value().dim(1);
  if (b.value().dim(1) != n) fail(ErrorKind::shape_mismatch, "concat_rows widths differ");
  Array<T> out({ma + mb, n});
  std::copy(a.value().v.begin(), a.value().v.end(), out.v.begin());
  std::copy(b.value().v.begin(), b.value().v.end(), out.v.begin() + ma * n);
  return Var<T>::make_op(std::move(out), {a, b}, [ma, mb, n](const Var<T>& g) {
    return std::vector<Var<T>>{slice_rows(g, 0, ma), slice_rows(g, ma, ma + mb)};
  });
}

// ---------------------------------------------------------------------------
// nonlinearities
// ---------------------------------------------------------------------------

template <class T>
Var<T> leaky_relu(const Var<T>& a, T slope) {
  Array<T> out = a.value();
  auto mask = std::make_shared<Array<T>>(a.value().shape);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const bool pos = out.v[i] > T(0);
    mask->v[i] = pos ? T(1) : slope;
    out.v[i] = pos ? out.v[i] : out.v[i] * slope;
  }
  return Var<T>::make_op(std::move(out), {a}, [mask](const Var<T>& g) {
    return std::vector<Var<T>>{mul_const(g, mask)};
  });
}

template <class T>
Var<T> gelu(const Var<T>& a) {
  Array<T> out = a.value();
  auto deriv = std::make_shared<Array<T>>(a.value().shape);
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  constexpr double inv_sqrt2pi = 0.39894228040143267794;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = static_cast<double>(out.v[i]);
    const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
    out.v[i] = static_cast<T>(x * cdf);
    deriv->v[i] = static_cast<T>(cdf + x * inv_sqrt2pi * std::exp(-0.5 * x * x));
  }
  return Var<T>::make_op(std::move(out), {a}, [deriv](const Var<T>& g) {
    return std::vector<Var<T>>{mul_const(g, deriv)};
  });
}

namespace detail {
inline void exp_inplace(float* x, std::size_t n) {
  kernels::vexp(x, x, n);
}
inline void exp_inplace(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(x[i]);
}
}  // namespace detail

/// softmax over the last dimension
template <class T>
Var<T> softmax_lastdim(const Var<T>& a) {
  const std::size_t n = a.value().shape.back();
  const std::size_t rows = a.value().size() / n;
  Array<T> out = a.value();
  for (std::size_t r = 0; r < rows; ++r) {
    T* row = out.v.data() + r * n;
    T mx = row[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    for (std::size_t j = 0; j < n; ++j) row[j] -= mx;
    detail::exp_inplace(row, n);
    const T s = kernels::sum(row, n);
    for (std::size_t j = 0; j < n; ++j) row[j] /= s;
  }
  auto y = std::make_shared<Array<T>>(out);
  return Var<T>::make_op(std::move(out), {a}, [y, n](const Var<T>& g) {
    const std::size_t rows = y->size() / n;
    Array<T> gx(y->shape);
    for (std::size_t r = 0; r < rows; ++r) {
      const T* yr = y->v.data() + r * n;
      const T* gr = g.value().v.data() + r * n;
      const T dotv = kernels::dot(yr, gr, n);
      T* o = gx.v.data() + r * n;
      for (std::size_t j = 0; j < n; ++j) o[j] = yr[j] * (gr[j] - dotv);
    }
    return std::vector<Var<T>>{constant(std::move(gx))};
  });
}

/// LayerNorm over the last dimension with affine parameters.
template <class T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps) {
  const std::size_t n = x.value().shape.back();
  const std::size_t rows = x.value().size() / n;
  Array<T> out(x.value().shape);
  auto xhat = std::make_shared<Array<T>>(x.value().shape);
  auto inv_sigma = std::make_shared<std::vector<T>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.value().v.data() + r * n;
    T mean = kernels::sum(xr, n) / static_cast<T>(n);
    T var = T(0);
    for (std::size_t j = 0; j < n; ++j) {
      const T d = xr[j] - mean;
      var += d * d;
    }
    var /= static_cast<T>(n);
    const T is = T(1) / std::sqrt(var + eps);
    (*inv_sigma)[r] = is;
    for (std::size_t j = 0; j < n; ++j) {
      const T h = (xr[j] - mean) * is;
      xhat->v[r * n + j] = h;
      out.v[r * n + j] = h * gamma.value().v[j] + beta.value().v[j];
    }
  }
  return Var<T>::make_op(
      std::move(out), {x, gamma, beta},
      [xhat, inv_sigma, gamma, n](const Var<T>& g) {
        const std::size_t rows = xhat->size() / n;
        Array<T> gx(xhat->shape);
        Array<T> ggamma({n});
        Array<T> gbeta({n});
        const T* gam = gamma.value().v.data();
        std::vector<T> gy(n);
        for (std::size_t r = 0; r < rows; ++r) {
          const T* gr = g.value().v.data() + r * n;
          const T* hr = xhat->v.data() + r * n;
          T mean_gy = T(0), mean_gyh = T(0);
          for (std::size_t j = 0; j < n; ++j) {
            gbeta.v[j] += gr[j];
            ggamma.v[j] += gr[j] * hr[j];
            gy[j] = gr[j] * gam[j];
            mean_gy += gy[j];
            mean_gyh += gy[j] * hr[j];
          }
          mean_gy /= static_cast<T>(n);
          mean_gyh /= static_cast<T>(n);
          const T is = (*inv_sigma)[r];
          T* o = gx.v.data() + r * n;
          for (std::size_t j = 0; j < n; ++j)
            o[j] = is * (gy[j] - mean_gy - hr[j] * mean_gyh);
        }
        return std::vector<Var<T>>{constant(std::move(gx)), constant(std::move(ggamma)),
                                   constant(std::move(gbeta))};
      });
}

/// Inverted dropout: zero with probability p, survivors scaled by 1/(1-p).
template <class T>
Var<T> dropout(const Var<T>& a, double p, Rng& rng) {
  if (p <= 0.0) return a;
  auto mask = std::make_shared<Array<T>>(a.value().shape);
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  for (T& m : mask->v) m = rng.uniform01() < p ? T(0) : keep_scale;
  return mul_const(a, mask);
}

/// Per-row L2 normalization (rows assumed nonzero; eps guards the division).
template <class T>
Var<T> l2_normalize_rows(const Var<T>& a, T eps = T(1e-12)) {
  const std::size_t m = a.value().dim(0), n = a.value().dim(1);
  Array<T> out = a.value();
  auto inv_norm = std::make_shared<std::vector<T>>(m);
  for (std::size_t i = 0; i < m; ++i) {
    T* row = out.v.data() + i * n;
    const T nrm = std::sqrt(kernels::dot(row, row, n)) + eps;
    (*inv_norm)[i] = T(1) / nrm;
    for (std::size_t j = 0; j < n; ++j) row[j] *= (*inv_norm)[i];
  }
  auto y = std::make_shared<Array<T>>(out);
  return Var<T>::make_op(std::move(out), {a}, [y, inv_norm, m, n](const Var<T>& g) {
    Array<T> gx({m, n});
    for (std::size_t i = 0; i < m; ++i) {
      const T* yr = y->v.data() + i * n;
      const T* gr = g.value().v.data() + i * n;
      const T d = kernels::dot(yr, gr, n);
      T* o = gx.v.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) o[j] = (*inv_norm)[i] * (gr[j] - yr[j] * d);
    }
    return std::vector<Var<T>>{constant(std::move(gx))};
  });
}

/// Row L2 norms, [m,n] -> [m], differentiable twice (built from primitives).
template <class T>
Var<T> rows_norm(const Var<T>& a, T eps = T(1e-24)) {
  return sqrt_op(add_scalar(sum_cols(mul(a, a)), eps));
}

// ---------------------------------------------------------------------------
// backward engine
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
struct GradSlot {
  Var<T> v;
  bool owned = false;  // true when v wraps a scratch buffer we may mutate
};

template <class T>
void accumulate(GradSlot<T>& slot, const Var<T>& g, bool create_graph) {
  if (!slot.v.defined()) {
    slot.v = g;
    slot.owned = false;
    return;
  }
  if (create_graph) {
    slot.v = add(slot.v, g);
    slot.owned = false;
    return;
  }
  if (!slot.owned) {
    Array<T> copy = slot.v.value();
    slot.v = Var<T>(std::move(copy), false);
    slot.owned = true;
  }
  Array<T>& acc = const_cast<Array<T>&>(slot.v.value());
  kernels::axpy(T(1), g.value().v.data(), acc.v.data(), acc.size());
}

}  // namespace detail

/// Reverse pass from a scalar (or explicitly seeded) root. Gradients of
/// `wrt` are returned in order; when `accumulate_leaves` is set, every
/// reachable requires-grad leaf also receives its gradient in grad_store().
/// With create_graph the returned gradients are differentiable nodes.
template <class T>
std::vector<Var<T>> backward_engine(const Var<T>& root, std::span<const Var<T>> wrt,
                                    bool create_graph, bool accumulate_leaves,
                                    const Array<T>* seed = nullptr) {
  using Node = typename Var<T>::Node;

  // topo order over the requires-grad subgraph
  std::vector<Node*> order;
  std::unordered_map<Node*, int> state;  // 0 new, 1 open, 2 done
  std::unordered_map<Node*, Var<T>> vars;
  std::vector<Node*> stack{root.node()};
  vars[root.node()] = root;
  if (root.requires_grad()) {
    while (!stack.empty()) {
      Node* n = stack.back();
      int& st = state[n];
      if (st == 0) {
        st = 1;
        for (const Var<T>& p : n->parents)
          if (p.defined() && p.requires_grad() && state[p.node()] == 0) {
            vars[p.node()] = p;
            stack.push_back(p.node());
          }
      } else {
        stack.pop_back();
        if (st == 1) {
          st = 2;
          order.push_back(n);
        }
      }
    }
  }

  std::unordered_map<Node*, detail::GradSlot<T>> grads;
  {
    Array<T> s = seed ? *seed : Array<T>(root.value().shape);
    if (!seed) {
      if (root.value().size() != 1)
        fail(ErrorKind::shape_mismatch, "backward on a non-scalar needs a seed");
      s.v[0] = T(1);
    }
    grads[root.node()] = {Var<T>(std::move(s), false), true};
  }

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    auto git = grads.find(n);
    if (git == grads.end()) continue;
    if (!n->vjp) continue;  // leaf
    std::vector<Var<T>> parent_grads;
    {
      GradMode mode(create_graph);
      parent_grads = n->vjp(git->second.v);
    }
    for (std::size_t i = 0; i < n->parents.size(); ++i) {
      const Var<T>& p = n->parents[i];
      if (!p.defined() || !p.requires_grad()) continue;
      if (i >= parent_grads.size() || !parent_grads[i].defined()) continue;
      detail::accumulate(grads[p.node()], parent_grads[i], create_graph);
    }
  }

  if (accumulate_leaves) {
    for (Node* n : order) {
      if (!n->leaf || !n->requires_grad) continue;
      auto git = grads.find(n);
      if (git == grads.end()) continue;
      Var<T>& holder = vars[n];
      Array<T>& store = holder.grad_store();
      kernels::axpy(T(1), git->second.v.value().v.data(), store.v.data(), store.size());
    }
  }

  std::vector<Var<T>> out;
  out.reserve(wrt.size());
  for (const Var<T>& w : wrt) {
    auto git = grads.find(w.node());
    out.push_back(git == grads.end() ? Var<T>(Array<T>(w.value().shape), false)
                                     : git->second.v);
  }
  return out;
}

template <class T>
void backward(const Var<T>& root) {
  backward_engine<T>(root, std::span<const Var<T>>(), /*create_graph=*/false,
                     /*accumulate_leaves=*/true);
}

template <class T>
std::vector<Var<T>> grad(const Var<T>& root, std::span<const Var<T>> wrt,
                         bool create_graph) {
  return backward_engine<T>(root, wrt, create_graph, /*accumulate_leaves=*/false);
}

}  // namespace cadseq::nn
