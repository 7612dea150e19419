#include <cmath>
#include <limits>

#include "cadseq/kernels/detail/exp_poly.hpp"
#include "cadseq/kernels/kernels.hpp"

namespace cadseq::kernels::scalar {

namespace {

template <class T>
void matmul_nn_impl(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    T* crow = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) crow[j] = T(0);
    const T* arow = a + static_cast<std::size_t>(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const T av = arow[kk];
      const T* brow = b + static_cast<std::size_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <class T>
void matmul_nt_impl(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<std::size_t>(i) * k;
    T* crow = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const T* brow = b + static_cast<std::size_t>(j) * k;
      T acc = T(0);
      for (int kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
      crow[j] = acc;
    }
  }
}

template <class T>
void matmul_tn_impl(const T* a, const T* b, T* c, int m, int k, int n) {
  for (std::size_t idx = 0; idx < static_cast<std::size_t>(k) * n; ++idx) c[idx] = T(0);
  for (int mm = 0; mm < m; ++mm) {
    const T* arow = a + static_cast<std::size_t>(mm) * k;
    const T* brow = b + static_cast<std::size_t>(mm) * n;
    for (int p = 0; p < k; ++p) {
      const T av = arow[p];
      T* crow = c + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <class T>
T dot_impl(const T* x, const T* y, std::size_t n) {
  T acc = T(0);
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

template <class T>
T sum_impl(const T* x, std::size_t n) {
  T acc = T(0);
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

template <class T>
void axpy_impl(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <class T>
T min_sqdist3_impl(T px, T py, T pz, const T* xs, const T* ys, const T* zs,
                   std::size_t n) {
  T best = std::numeric_limits<T>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const T dx = px - xs[i];
    const T dy = py - ys[i];
    const T dz = pz - zs[i];
    const T d2 = dx * dx + dy * dy + dz * dz;
    if (d2 < best) best = d2;
  }
  return best;
}

}  // namespace

void matmul_nn(const float* a, const float* b, float* c, int m, int k, int n) {
  matmul_nn_impl(a, b, c, m, k, n);
}
void matmul_nt(const float* a, const float* b, float* c, int m, int k, int n) {
  matmul_nt_impl(a, b, c, m, k, n);
}
void matmul_tn(const float* a, const float* b, float* c, int m, int k, int n) {
  matmul_tn_impl(a, b, c, m, k, n);
}
void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n) {
  matmul_nn_impl(a, b, c, m, k, n);
}
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n) {
  matmul_nt_impl(a, b, c, m, k, n);
}
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n) {
  matmul_tn_impl(a, b, c, m, k, n);
}

float dot(const float* x, const float* y, std::size_t n) { return dot_impl(x, y, n); }
double dot(const double* x, const double* y, std::size_t n) { return dot_impl(x, y, n); }
float sum(const float* x, std::size_t n) { return sum_impl(x, n); }
double sum(const double* x, std::size_t n) { return sum_impl(x, n); }
void axpy(float alpha, const float* x, float* y, std::size_t n) { axpy_impl(alpha, x, y, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { axpy_impl(alpha, x, y, n); }

void vexp(const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = detail::exp_poly_scalar(x[i]);
}
void vexp(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::exp(x[i]);
}

float min_sqdist3(float px, float py, float pz, const float* xs, const float* ys,
                  const float* zs, std::size_t n) {
  return min_sqdist3_impl(px, py, pz, xs, ys, zs, n);
}
double min_sqdist3(double px, double py, double pz, const double* xs,
                   const double* ys, const double* zs, std::size_t n) {
  return min_sqdist3_impl(px, py, pz, xs, ys, zs, n);
}

}  // namespace cadseq::kernels::scalar
