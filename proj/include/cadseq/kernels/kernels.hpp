#pragma once

#include <cstddef>

// Data-parallel inner loops used by the tensor stack and the point-cloud
// metrics. Every kernel has a scalar reference implementation and, on x86
// with AVX2+FMA, a vectorized variant. The active variant is selected once
// at runtime; CADSEQ_KERNELS=scalar|avx2 forces a choice (falls back to
// scalar when the requested ISA is unavailable).
//
// Matrix conventions: row-major, dimensions m/k/n as in C[m x n] = A * B.
//   matmul_nn: A is m x k, B is k x n
//   matmul_nt: A is m x k, B is n x k   (B used transposed)
//   matmul_tn: A is k x m ... no — A is m x k interpreted transposed:
//              C[k x n] = A^T * B with A m x k, B m x n
// All matmuls overwrite C.

namespace cadseq::kernels {

enum class Isa { scalar, avx2 };

Isa active_isa();
const char* isa_name(Isa isa);

void matmul_nn(const float* a, const float* b, float* c, int m, int k, int n);
void matmul_nt(const float* a, const float* b, float* c, int m, int k, int n);
void matmul_tn(const float* a, const float* b, float* c, int m, int k, int n);
void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n);

float dot(const float* x, const float* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);

float sum(const float* x, std::size_t n);
double sum(const double* x, std::size_t n);

// y += alpha * x
void axpy(float alpha, const float* x, float* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);

// Elementwise exp. The float version uses a polynomial scheme whose scalar
// and AVX2 variants are bit-identical (~1e-7 relative error vs std::exp);
// the double version is std::exp in both variants.
void vexp(const float* x, float* y, std::size_t n);
void vexp(const double* x, double* y, std::size_t n);

// Minimum squared distance from point p to an SoA point set. Scalar and AVX2
// variants use the same mul/add arithmetic (no FMA) so results are
// bit-identical to a naive scan.
float min_sqdist3(float px, float py, float pz, const float* xs, const float* ys,
                  const float* zs, std::size_t n);
double min_sqdist3(double px, double py, double pz, const double* xs,
                   const double* ys, const double* zs, std::size_t n);

namespace scalar {
void matmul_nn(const float* a, const float* b, float* c, int m, int k, int n);
void matmul_nt(const float* a, const float* b, float* c, int m, int k, int n);
void matmul_tn(const float* a, const float* b, float* c, int m, int k, int n);
void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n);
float dot(const float* x, const float* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
float sum(const float* x, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void vexp(const float* x, float* y, std::size_t n);
void vexp(const double* x, double* y, std::size_t n);
float min_sqdist3(float px, float py, float pz, const float* xs, const float* ys,
                  const float* zs, std::size_t n);
double min_sqdist3(double px, double py, double pz, const double* xs,
                   const double* ys, const double* zs, std::size_t n);
}  // namespace scalar

namespace avx2 {
bool available();
void matmul_nn(const float* a, const float* b, float* c, int m, int k, int n);
void matmul_nt(const float* a, const float* b, float* c, int m, int k, int n);
void matmul_tn(const float* a, const float* b, float* c, int m, int k, int n);
void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n);
float dot(const float* x, const float* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
float sum(const float* x, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void vexp(const float* x, float* y, std::size_t n);
void vexp(const double* x, double* y, std::size_t n);
float min_sqdist3(float px, float py, float pz, const float* xs, const float* ys,
                  const float* zs, std::size_t n);
double min_sqdist3(double px, double py, double pz, const double* xs,
                   const double* ys, const double* zs, std::size_t n);
}  // namespace avx2

}  // namespace cadseq::kernels
