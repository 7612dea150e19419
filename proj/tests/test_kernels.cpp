#include <doctest.h>

#include <cmath>
#include <vector>

#include "cadseq/kernels/kernels.hpp"
#include "cadseq/util/rng.hpp"

using namespace cadseq;
namespace k = cadseq::kernels;

namespace {

template <class T>
std::vector<T> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.uniform(-scale, scale));
  return v;
}

template <class T>
void check_close(const std::vector<T>& a, const std::vector<T>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({1.0, std::abs(double(a[i])), std::abs(double(b[i]))});
    CHECK(std::abs(double(a[i]) - double(b[i])) / denom < tol);
  }
}

template <class T>
void matmul_equivalence(double tol) {
  Rng rng(7);
  const int shapes[][3] = {{1, 1, 1}, {3, 5, 7}, {4, 16, 16}, {13, 31, 33}, {64, 64, 96}};
  for (const auto& s : shapes) {
    const int m = s[0], kk = s[1], n = s[2];
    auto a = random_vec<T>(rng, std::size_t(m) * kk);
    auto b = random_vec<T>(rng, std::size_t(kk) * n);
    auto bt = random_vec<T>(rng, std::size_t(n) * kk);
    auto bt2 = random_vec<T>(rng, std::size_t(m) * n);
    std::vector<T> c_ref(std::size_t(m) * n), c_simd(c_ref.size());

    k::scalar::matmul_nn(a.data(), b.data(), c_ref.data(), m, kk, n);
    k::avx2::matmul_nn(a.data(), b.data(), c_simd.data(), m, kk, n);
    check_close(c_ref, c_simd, tol);

    k::scalar::matmul_nt(a.data(), bt.data(), c_ref.data(), m, kk, n);
    k::avx2::matmul_nt(a.data(), bt.data(), c_simd.data(), m, kk, n);
    check_close(c_ref, c_simd, tol);

    std::vector<T> d_ref(std::size_t(kk) * n), d_simd(d_ref.size());
    k::scalar::matmul_tn(a.data(), bt2.data(), d_ref.data(), m, kk, n);
    k::avx2::matmul_tn(a.data(), bt2.data(), d_simd.data(), m, kk, n);
    check_close(d_ref, d_simd, tol);
  }
}

}  // namespace

TEST_CASE("kernels: active isa resolves") {
  const k::Isa isa = k::active_isa();
  CHECK((isa == k::Isa::scalar || isa == k::Isa::avx2));
  CHECK(k::isa_name(isa) != nullptr);
}

TEST_CASE("kernels: matmul scalar/simd equivalence f32") { matmul_equivalence<float>(2e-5); }
TEST_CASE("kernels: matmul scalar/simd equivalence f64") { matmul_equivalence<double>(1e-12); }

TEST_CASE("kernels: matmul_nn against hand computation") {
  // [1 2; 3 4] * [5 6; 7 8] = [19 22; 43 50]
  const double a[] = {1, 2, 3, 4};
  const double b[] = {5, 6, 7, 8};
  double c[4];
  k::matmul_nn(a, b, c, 2, 2, 2);
  CHECK(c[0] == doctest::Approx(19));
  CHECK(c[1] == doctest::Approx(22));
  CHECK(c[2] == doctest::Approx(43));
  CHECK(c[3] == doctest::Approx(50));
}

TEST_CASE("kernels: transpose variants agree with explicit transposition") {
  Rng rng(11);
  const int m = 9, kk = 14, n = 10;
  auto a = random_vec<double>(rng, std::size_t(m) * kk);
  auto b = random_vec<double>(rng, std::size_t(m) * n);
  // C = A^T B via matmul_tn vs building A^T then matmul_nn
  std::vector<double> at(std::size_t(kk) * m);
  for (int i = 0; i < m; ++i)
    for (int p = 0; p < kk; ++p) at[std::size_t(p) * m + i] = a[std::size_t(i) * kk + p];
  std::vector<double> c1(std::size_t(kk) * n), c2(c1.size());
  k::matmul_tn(a.data(), b.data(), c1.data(), m, kk, n);
  k::matmul_nn(at.data(), b.data(), c2.data(), kk, m, n);
  check_close(c1, c2, 1e-12);
}

TEST_CASE("kernels: dot / sum / axpy equivalence") {
  Rng rng(23);
  for (std::size_t n : {std::size_t(1), std::size_t(7), std::size_t(64), std::size_t(1000)}) {
    auto x = random_vec<float>(rng, n);
    auto y = random_vec<float>(rng, n);
    const double tol = 1e-4;
    CHECK(std::abs(k::scalar::dot(x.data(), y.data(), n) - k::avx2::dot(x.data(), y.data(), n)) < tol);
    CHECK(std::abs(k::scalar::sum(x.data(), n) - k::avx2::sum(x.data(), n)) < tol);
    auto y1 = y, y2 = y;
    k::scalar::axpy(0.37f, x.data(), y1.data(), n);
    k::avx2::axpy(0.37f, x.data(), y2.data(), n);
    check_close(y1, y2, tol);

    auto xd = random_vec<double>(rng, n);
    auto yd = random_vec<double>(rng, n);
    CHECK(std::abs(k::scalar::dot(xd.data(), yd.data(), n) - k::avx2::dot(xd.data(), yd.data(), n)) < 1e-12);
  }
}

TEST_CASE("kernels: vexp f32 scalar/simd bit-identical and accurate") {
  Rng rng(31);
  std::vector<float> x(4097);
  for (auto& v : x) v = static_cast<float>(rng.uniform(-30.0, 30.0));
  x[0] = 0.f;
  x[1] = 1.f;
  x[2] = -87.5f;  // clamps
  x[3] = 90.f;    // clamps
  std::vector<float> y_ref(x.size()), y_simd(x.size());
  k::scalar::vexp(x.data(), y_ref.data(), x.size());
  k::avx2::vexp(x.data(), y_simd.data(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(y_ref[i] == y_simd[i]);  // bit-identical by construction
    const double exact = std::exp(double(x[i] < -87.f ? -87.f : (x[i] > 88.f ? 88.f : x[i])));
    CHECK(std::abs(y_ref[i] - exact) / exact < 3e-7);
  }
}

TEST_CASE("kernels: min_sqdist3 scalar/simd bit-identical") {
  Rng rng(41);
  for (std::size_t n : {std::size_t(1), std::size_t(5), std::size_t(8), std::size_t(253)}) {
    auto xs = random_vec<double>(rng, n), ys = random_vec<double>(rng, n), zs = random_vec<double>(rng, n);
    for (int q = 0; q < 20; ++q) {
      const double px = rng.uniform(-2, 2), py = rng.uniform(-2, 2), pz = rng.uniform(-2, 2);
      const double a = k::scalar::min_sqdist3(px, py, pz, xs.data(), ys.data(), zs.data(), n);
      const double b = k::avx2::min_sqdist3(px, py, pz, xs.data(), ys.data(), zs.data(), n);
      CHECK(a == b);
    }
    auto xf = random_vec<float>(rng, n), yf = random_vec<float>(rng, n), zf = random_vec<float>(rng, n);
    for (int q = 0; q < 20; ++q) {
      const float px = float(rng.uniform(-2, 2)), py = float(rng.uniform(-2, 2)), pz = float(rng.uniform(-2, 2));
      CHECK(k::scalar::min_sqdist3(px, py, pz, xf.data(), yf.data(), zf.data(), n) ==
            k::avx2::min_sqdist3(px, py, pz, xf.data(), yf.data(), zf.data(), n));
    }
  }
}
