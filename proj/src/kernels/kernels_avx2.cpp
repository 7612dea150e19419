// AVX2+FMA kernel variants. Built as plain C++ with per-function target
// attributes; callers must gate on avx2::available().

#include "cadseq/kernels/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <limits>

#include "cadseq/kernels/detail/exp_poly.hpp"

#define CADSEQ_AVX2 __attribute__((target("avx2,fma")))

namespace cadseq::kernels::avx2 {

bool available() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

namespace {

CADSEQ_AVX2 inline float hsum8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 sh = _mm_movehl_ps(lo, lo);
  lo = _mm_add_ps(lo, sh);
  sh = _mm_shuffle_ps(lo, lo, 0x1);
  lo = _mm_add_ss(lo, sh);
  return _mm_cvtss_f32(lo);
}

CADSEQ_AVX2 inline double hsum4(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  lo = _mm_add_sd(lo, sh);
  return _mm_cvtsd_f64(lo);
}

CADSEQ_AVX2 inline float hmin8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_min_ps(lo, hi);
  __m128 sh = _mm_movehl_ps(lo, lo);
  lo = _mm_min_ps(lo, sh);
  sh = _mm_shuffle_ps(lo, lo, 0x1);
  lo = _mm_min_ss(lo, sh);
  return _mm_cvtss_f32(lo);
}

CADSEQ_AVX2 inline double hmin4(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_min_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  lo = _mm_min_sd(lo, sh);
  return _mm_cvtsd_f64(lo);
}

}  // namespace

CADSEQ_AVX2 void matmul_nn(const float* a, const float* b, float* c, int m, int k,
                           int n) {
  const std::size_t ks = static_cast<std::size_t>(k);
  const std::size_t ns = static_cast<std::size_t>(n);
  int i = 0;
  for (; i + 4 <= m; i += 4) {
    const float* a0 = a + (i + 0) * ks;
    const float* a1 = a + (i + 1) * ks;
    const float* a2 = a + (i + 2) * ks;
    const float* a3 = a + (i + 3) * ks;
    float* c0 = c + (i + 0) * ns;
    float* c1 = c + (i + 1) * ns;
    float* c2 = c + (i + 2) * ns;
    float* c3 = c + (i + 3) * ns;
    int j = 0;
    for (; j + 16 <= n; j += 16) {
      __m256 s00 = _mm256_setzero_ps(), s01 = _mm256_setzero_ps();
      __m256 s10 = _mm256_setzero_ps(), s11 = _mm256_setzero_ps();
      __m256 s20 = _mm256_setzero_ps(), s21 = _mm256_setzero_ps();
      __m256 s30 = _mm256_setzero_ps(), s31 = _mm256_setzero_ps();
      for (int kk = 0; kk < k; ++kk) {
        const float* brow = b + kk * ns + j;
        const __m256 b0 = _mm256_loadu_ps(brow);
        const __m256 b1 = _mm256_loadu_ps(brow + 8);
        __m256 av = _mm256_broadcast_ss(a0 + kk);
        s00 = _mm256_fmadd_ps(av, b0, s00);
        s01 = _mm256_fmadd_ps(av, b1, s01);
        av = _mm256_broadcast_ss(a1 + kk);
        s10 = _mm256_fmadd_ps(av, b0, s10);
        s11 = _mm256_fmadd_ps(av, b1, s11);
        av = _mm256_broadcast_ss(a2 + kk);
        s20 = _mm256_fmadd_ps(av, b0, s20);
        s21 = _mm256_fmadd_ps(av, b1, s21);
        av = _mm256_broadcast_ss(a3 + kk);
        s30 = _mm256_fmadd_ps(av, b0, s30);
        s31 = _mm256_fmadd_ps(av, b1, s31);
      }
      _mm256_storeu_ps(c0 + j, s00);
      _mm256_storeu_ps(c0 + j + 8, s01);
      _mm256_storeu_ps(c1 + j, s10);
      _mm256_storeu_ps(c1 + j + 8, s11);
      _mm256_storeu_ps(c2 + j, s20);
      _mm256_storeu_ps(c2 + j + 8, s21);
      _mm256_storeu_ps(c3 + j, s30);
      _mm256_storeu_ps(c3 + j + 8, s31);
    }
    for (; j + 8 <= n; j += 8) {
      __m256 s0 = _mm256_setzero_ps(), s1 = _mm256_setzero_ps();
      __m256 s2 = _mm256_setzero_ps(), s3 = _mm256_setzero_ps();
      for (int kk = 0; kk < k; ++kk) {
        const __m256 bv = _mm256_loadu_ps(b + kk * ns + j);
        s0 = _mm256_fmadd_ps(_mm256_broadcast_ss(a0 + kk), bv, s0);
        s1 = _mm256_fmadd_ps(_mm256_broadcast_ss(a1 + kk), bv, s1);
        s2 = _mm256_fmadd_ps(_mm256_broadcast_ss(a2 + kk), bv, s2);
        s3 = _mm256_fmadd_ps(_mm256_broadcast_ss(a3 + kk), bv, s3);
      }
      _mm256_storeu_ps(c0 + j, s0);
      _mm256_storeu_ps(c1 + j, s1);
      _mm256_storeu_ps(c2 + j, s2);
      _mm256_storeu_ps(c3 + j, s3);
    }
    for (; j < n; ++j) {
      float r0 = 0.f, r1 = 0.f, r2 = 0.f, r3 = 0.f;
      for (int kk = 0; kk < k; ++kk) {
        const float bv = b[kk * ns + j];
        r0 += a0[kk] * bv;
        r1 += a1[kk] * bv;
        r2 += a2[kk] * bv;
        r3 += a3[kk] * bv;
      }
      c0[j] = r0;
      c1[j] = r1;
      c2[j] = r2;
      c3[j] = r3;
    }
  }
  for (; i < m; ++i) {
    const float* arow = a + i * ks;
    float* crow = c + i * ns;
    int j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256 s = _mm256_setzero_ps();
      for (int kk = 0; kk < k; ++kk)
        s = _mm256_fmadd_ps(_mm256_broadcast_ss(arow + kk),
                            _mm256_loadu_ps(b + kk * ns + j), s);
      _mm256_storeu_ps(crow + j, s);
    }
    for (; j < n; ++j) {
      float r = 0.f;
      for (int kk = 0; kk < k; ++kk) r += arow[kk] * b[kk * ns + j];
      crow[j] = r;
    }
  }
}

CADSEQ_AVX2 void matmul_nn(const double* a, const double* b, double* c, int m,
                           int k, int n) {
  const std::size_t ks = static_cast<std::size_t>(k);
  const std::size_t ns = static_cast<std::size_t>(n);
  for (int i = 0; i < m; ++i) {
    const double* arow = a + i * ks;
    double* crow = c + i * ns;
    int j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
      for (int kk = 0; kk < k; ++kk) {
        const __m256d av = _mm256_broadcast_sd(arow + kk);
        s0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + kk * ns + j), s0);
        s1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + kk * ns + j + 4), s1);
      }
      _mm256_storeu_pd(crow + j, s0);
      _mm256_storeu_pd(crow + j + 4, s1);
    }
    for (; j < n; ++j) {
      double r = 0.0;
      for (int kk = 0; kk < k; ++kk) r += arow[kk] * b[kk * ns + j];
      crow[j] = r;
    }
  }
}

CADSEQ_AVX2 void matmul_nt(const float* a, const float* b, float* c, int m, int k,
                           int n) {
  const std::size_t ks = static_cast<std::size_t>(k);
  const std::size_t ns = static_cast<std::size_t>(n);
  for (int i = 0; i < m; ++i) {
    const float* arow = a + i * ks;
    float* crow = c + i * ns;
    int j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256 s0 = _mm256_setzero_ps(), s1 = _mm256_setzero_ps();
      __m256 s2 = _mm256_setzero_ps(), s3 = _mm256_setzero_ps();
      const float* b0 = b + (j + 0) * ks;
      const float* b1 = b + (j + 1) * ks;
      const float* b2 = b + (j + 2) * ks;
      const float* b3 = b + (j + 3) * ks;
      int kk = 0;
      for (; kk + 8 <= k; kk += 8) {
        const __m256 av = _mm256_loadu_ps(arow + kk);
        s0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b0 + kk), s0);
        s1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b1 + kk), s1);
        s2 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b2 + kk), s2);
        s3 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b3 + kk), s3);
      }
      float r0 = hsum8(s0), r1 = hsum8(s1), r2 = hsum8(s2), r3 = hsum8(s3);
      for (; kk < k; ++kk) {
        const float av = arow[kk];
        r0 += av * b0[kk];
        r1 += av * b1[kk];
        r2 += av * b2[kk];
        r3 += av * b3[kk];
      }
      crow[j + 0] = r0;
      crow[j + 1] = r1;
      crow[j + 2] = r2;
      crow[j + 3] = r3;
    }
    for (; j < n; ++j) {
      const float* brow = b + j * ks;
      __m256 s = _mm256_setzero_ps();
      int kk = 0;
      for (; kk + 8 <= k; kk += 8)
        s = _mm256_fmadd_ps(_mm256_loadu_ps(arow + kk), _mm256_loadu_ps(brow + kk), s);
      float r = hsum8(s);
      for (; kk < k; ++kk) r += arow[kk] * brow[kk];
      crow[j] = r;
    }
  }
}

CADSEQ_AVX2 void matmul_nt(const double* a, const double* b, double* c, int m,
                           int k, int n) {
  const std::size_t ks = static_cast<std::size_t>(k);
  const std::size_t ns = static_cast<std::size_t>(n);
  for (int i = 0; i < m; ++i) {
    const double* arow = a + i * ks;
    double* crow = c + i * ns;
    for (int j = 0; j < n; ++j) {
      const double* brow = b + j * ks;
      __m256d s = _mm256_setzero_pd();
      int kk = 0;
      for (; kk + 4 <= k; kk += 4)
        s = _mm256_fmadd_pd(_mm256_loadu_pd(arow + kk), _mm256_loadu_pd(brow + kk), s);
      double r = hsum4(s);
      for (; kk < k; ++kk) r += arow[kk] * brow[kk];
      crow[j] = r;
    }
  }
}

CADSEQ_AVX2 void matmul_tn(const float* a, const float* b, float* c, int m, int k,
                           int n) {
  const std::size_t ks = static_cast<std::size_t>(k);
  const std::size_t ns = static_cast<std::size_t>(n);
  for (std::size_t idx = 0; idx < ks * ns; ++idx) c[idx] = 0.f;
  for (int mm = 0; mm < m; ++mm) {
    const float* arow = a + mm * ks;
    const float* brow = b + mm * ns;
    for (int p = 0; p < k; ++p) {
      const __m256 av = _mm256_broadcast_ss(arow + p);
      float* crow = c + p * ns;
      int j = 0;
      for (; j + 8 <= n; j += 8)
        _mm256_storeu_ps(crow + j, _mm256_fmadd_ps(av, _mm256_loadu_ps(brow + j),
                                                   _mm256_loadu_ps(crow + j)));
      const float afl = arow[p];
      for (; j < n; ++j) crow[j] += afl * brow[j];
    }
  }
}

CADSEQ_AVX2 void matmul_tn(const double* a, const double* b, double* c, int m,
                           int k, int n) {
  const std::size_t ks = static_cast<std::size_t>(k);
  const std::size_t ns = static_cast<std::size_t>(n);
  for (std::size_t idx = 0; idx < ks * ns; ++idx) c[idx] = 0.0;
  for (int mm = 0; mm < m; ++mm) {
    const double* arow = a + mm * ks;
    const double* brow = b + mm * ns;
    for (int p = 0; p < k; ++p) {
      const __m256d av = _mm256_broadcast_sd(arow + p);
      double* crow = c + p * ns;
      int j = 0;
      for (; j + 4 <= n; j += 4)
        _mm256_storeu_pd(crow + j, _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + j),
                                                   _mm256_loadu_pd(crow + j)));
      const double afl = arow[p];
      for (; j < n; ++j) crow[j] += afl * brow[j];
    }
  }
}

CADSEQ_AVX2 float dot(const float* x, const float* y, std::size_t n) {
  __m256 s0 = _mm256_setzero_ps(), s1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    s0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), s0);
    s1 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i + 8), _mm256_loadu_ps(y + i + 8), s1);
  }
  for (; i + 8 <= n; i += 8)
    s0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), s0);
  float r = hsum8(_mm256_add_ps(s0, s1));
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

CADSEQ_AVX2 double dot(const double* x, const double* y, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4)
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
  double r = hsum4(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

CADSEQ_AVX2 float sum(const float* x, std::size_t n) {
  __m256 s = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) s = _mm256_add_ps(s, _mm256_loadu_ps(x + i));
  float r = hsum8(s);
  for (; i < n; ++i) r += x[i];
  return r;
}

CADSEQ_AVX2 double sum(const double* x, std::size_t n) {
  __m256d s = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) s = _mm256_add_pd(s, _mm256_loadu_pd(x + i));
  double r = hsum4(s);
  for (; i < n; ++i) r += x[i];
  return r;
}

CADSEQ_AVX2 void axpy(float alpha, const float* x, float* y, std::size_t n) {
  const __m256 av = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i),
                                            _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

CADSEQ_AVX2 void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

CADSEQ_AVX2 void vexp(const float* x, float* y, std::size_t n) {
  using namespace detail;
  const __m256 lov = _mm256_set1_ps(kExpClampLo);
  const __m256 hiv = _mm256_set1_ps(kExpClampHi);
  const __m256 log2e = _mm256_set1_ps(kLog2e);
  const __m256 half = _mm256_set1_ps(0.5f);
  const __m256 c1 = _mm256_set1_ps(kExpC1);
  const __m256 c2 = _mm256_set1_ps(kExpC2);
  const __m256 one = _mm256_set1_ps(1.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(x + i);
    v = _mm256_min_ps(hiv, _mm256_max_ps(lov, v));
    const __m256 nn = _mm256_floor_ps(_mm256_fmadd_ps(v, log2e, half));
    __m256 r = _mm256_fnmadd_ps(nn, c1, v);
    r = _mm256_fnmadd_ps(nn, c2, r);
    __m256 p = _mm256_set1_ps(kExpP0);
    p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(kExpP1));
    p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(kExpP2));
    p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(kExpP3));
    p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(kExpP4));
    p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(kExpP5));
    p = _mm256_add_ps(_mm256_fmadd_ps(p, _mm256_mul_ps(r, r), r), one);
    const __m256i e = _mm256_slli_epi32(
        _mm256_add_epi32(_mm256_cvtps_epi32(nn), _mm256_set1_epi32(127)), 23);
    _mm256_storeu_ps(y + i, _mm256_mul_ps(p, _mm256_castsi256_ps(e)));
  }
  for (; i < n; ++i) y[i] = exp_poly_scalar(x[i]);
}

CADSEQ_AVX2 void vexp(const double* x, double* y, std::size_t n) {
  scalar::vexp(x, y, n);
}

// No FMA here: per-point arithmetic must match the scalar scan bit-for-bit.
CADSEQ_AVX2 float min_sqdist3(float px, float py, float pz, const float* xs,
                              const float* ys, const float* zs, std::size_t n) {
  const __m256 pxv = _mm256_set1_ps(px);
  const __m256 pyv = _mm256_set1_ps(py);
  const __m256 pzv = _mm256_set1_ps(pz);
  __m256 best = _mm256_set1_ps(std::numeric_limits<float>::infinity());
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 dx = _mm256_sub_ps(pxv, _mm256_loadu_ps(xs + i));
    const __m256 dy = _mm256_sub_ps(pyv, _mm256_loadu_ps(ys + i));
    const __m256 dz = _mm256_sub_ps(pzv, _mm256_loadu_ps(zs + i));
    const __m256 d2 = _mm256_add_ps(
        _mm256_add_ps(_mm256_mul_ps(dx, dx), _mm256_mul_ps(dy, dy)),
        _mm256_mul_ps(dz, dz));
    best = _mm256_min_ps(best, d2);
  }
  float r = hmin8(best);
  for (; i < n; ++i) {
    const float dx = px - xs[i];
    const float dy = py - ys[i];
    const float dz = pz - zs[i];
    const float d2 = dx * dx + dy * dy + dz * dz;
    if (d2 < r) r = d2;
  }
  return r;
}

CADSEQ_AVX2 double min_sqdist3(double px, double py, double pz, const double* xs,
                               const double* ys, const double* zs, std::size_t n) {
  const __m256d pxv = _mm256_set1_pd(px);
  const __m256d pyv = _mm256_set1_pd(py);
  const __m256d pzv = _mm256_set1_pd(pz);
  __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(pxv, _mm256_loadu_pd(xs + i));
    const __m256d dy = _mm256_sub_pd(pyv, _mm256_loadu_pd(ys + i));
    const __m256d dz = _mm256_sub_pd(pzv, _mm256_loadu_pd(zs + i));
    const __m256d d2 = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
        _mm256_mul_pd(dz, dz));
    best = _mm256_min_pd(best, d2);
  }
  double r = hmin4(best);
  for (; i < n; ++i) {
    const double dx = px - xs[i];
    const double dy = py - ys[i];
    const double dz = pz - zs[i];
    const double d2 = dx * dx + dy * dy + dz * dz;
    if (d2 < r) r = d2;
  }
  return r;
}

}  // namespace cadseq::kernels::avx2

#else  // non-x86: route the avx2 names to the scalar reference

namespace cadseq::kernels::avx2 {

bool available() { return false; }

void matmul_nn(const float* a, const float* b, float* c, int m, int k, int n) {
  scalar::matmul_nn(a, b, c, m, k, n);
}
void matmul_nt(const float* a, const float* b, float* c, int m, int k, int n) {
  scalar::matmul_nt(a, b, c, m, k, n);
}
void matmul_tn(const float* a, const float* b, float* c, int m, int k, int n) {
  scalar::matmul_tn(a, b, c, m, k, n);
}
void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n) {
  scalar::matmul_nn(a, b, c, m, k, n);
}
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n) {
  scalar::matmul_nt(a, b, c, m, k, n);
}
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n) {
  scalar::matmul_tn(a, b, c, m, k, n);
}
float dot(const float* x, const float* y, std::size_t n) { return scalar::dot(x, y, n); }
double dot(const double* x, const double* y, std::size_t n) { return scalar::dot(x, y, n); }
float sum(const float* x, std::size_t n) { return scalar::sum(x, n); }
double sum(const double* x, std::size_t n) { return scalar::sum(x, n); }
void axpy(float alpha, const float* x, float* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
void vexp(const float* x, float* y, std::size_t n) { scalar::vexp(x, y, n); }
void vexp(const double* x, double* y, std::size_t n) { scalar::vexp(x, y, n); }
float min_sqdist3(float px, float py, float pz, const float* xs, const float* ys,
                  const float* zs, std::size_t n) {
  return scalar::min_sqdist3(px, py, pz, xs, ys, zs, n);
}
double min_sqdist3(double px, double py, double pz, const double* xs,
                   const double* ys, const double* zs, std::size_t n) {
  return scalar::min_sqdist3(px, py, pz, xs, ys, zs, n);
}

}  // namespace cadseq::kernels::avx2

#endif
