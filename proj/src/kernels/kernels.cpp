#include "cadseq/kernels/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace cadseq::kernels {

namespace {

Isa detect() {
  const char* env = std::getenv("CADSEQ_KERNELS");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0 && avx2::available()) return Isa::avx2;
    return Isa::scalar;
  }
  return avx2::available() ? Isa::avx2 : Isa::scalar;
}

inline bool use_avx2() {
  static const Isa isa = detect();
  return isa == Isa::avx2;
}

}  // namespace

Isa active_isa() { return use_avx2() ? Isa::avx2 : Isa::scalar; }

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

#define CADSEQ_DISPATCH(fn, ...) \
  do {                           \
    if (use_avx2())              \
      avx2::fn(__VA_ARGS__);     \
    else                         \
      scalar::fn(__VA_ARGS__);   \
  } while (0)

#define CADSEQ_DISPATCH_R(fn, ...) \
  return use_avx2() ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)

void matmul_nn(const float* a, const float* b, float* c, int m, int k, int n) {
  CADSEQ_DISPATCH(matmul_nn, a, b, c, m, k, n);
}
void matmul_nt(const float* a, const float* b, float* c, int m, int k, int n) {
  CADSEQ_DISPATCH(matmul_nt, a, b, c, m, k, n);
}
void matmul_tn(const float* a, const float* b, float* c, int m, int k, int n) {
  CADSEQ_DISPATCH(matmul_tn, a, b, c, m, k, n);
}
void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n) {
  CADSEQ_DISPATCH(matmul_nn, a, b, c, m, k, n);
}
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n) {
  CADSEQ_DISPATCH(matmul_nt, a, b, c, m, k, n);
}
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n) {
  CADSEQ_DISPATCH(matmul_tn, a, b, c, m, k, n);
}
float dot(const float* x, const float* y, std::size_t n) { CADSEQ_DISPATCH_R(dot, x, y, n); }
double dot(const double* x, const double* y, std::size_t n) { CADSEQ_DISPATCH_R(dot, x, y, n); }
float sum(const float* x, std::size_t n) { CADSEQ_DISPATCH_R(sum, x, n); }
double sum(const double* x, std::size_t n) { CADSEQ_DISPATCH_R(sum, x, n); }
void axpy(float alpha, const float* x, float* y, std::size_t n) {
  CADSEQ_DISPATCH(axpy, alpha, x, y, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  CADSEQ_DISPATCH(axpy, alpha, x, y, n);
}
void vexp(const float* x, float* y, std::size_t n) { CADSEQ_DISPATCH(vexp, x, y, n); }
void vexp(const double* x, double* y, std::size_t n) { CADSEQ_DISPATCH(vexp, x, y, n); }
float min_sqdist3(float px, float py, float pz, const float* xs, const float* ys,
                  const float* zs, std::size_t n) {
  CADSEQ_DISPATCH_R(min_sqdist3, px, py, pz, xs, ys, zs, n);
}
double min_sqdist3(double px, double py, double pz, const double* xs,
                   const double* ys, const double* zs, std::size_t n) {
  CADSEQ_DISPATCH_R(min_sqdist3, px, py, pz, xs, ys, zs, n);
}

#undef CADSEQ_DISPATCH
#undef CADSEQ_DISPATCH_R

}  // namespace cadseq::kernels
