#include <doctest.h>

#include <cmath>
#include <vector>

#include "qos/kernels.hpp"
#include "qos/rng.hpp"

using namespace qos;
namespace K = qos::kernels;

namespace {

std::vector<double> randv(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

// Reassociation in SIMD sums moves the last few bits only.
void close(double a, double b, double scale) {
  CHECK(std::abs(a - b) <= 1e-12 * (1.0 + scale));
}

std::vector<const K::Table*> simd_tables() {
  std::vector<const K::Table*> out;
  if (K::avx2_table() && K::cpu_supports(K::Isa::avx2)) out.push_back(K::avx2_table());
  if (K::neon_table() && K::cpu_supports(K::Isa::neon)) out.push_back(K::neon_table());
  out.push_back(&K::active());
  return out;
}

}  // namespace

TEST_CASE("scalar kernels on hand values") {
  const auto& s = K::scalar_table();
  const double a[] = {1, 2, 3};
  const double b[] = {4, 5, 6};
  CHECK(s.dot(a, b, 3) == 32.0);

  double y[] = {1, 1, 1};
  s.axpy(2.0, a, y, 3);
  CHECK(y[2] == 7.0);

  const double w[] = {1, 2, 3, 4, 5, 6};  // 2 x 3
  const double bias[] = {0.5, -0.5};
  double out[2];
  s.gemv(w, bias, a, out, 2, 3);
  CHECK(out[0] == 14.5);
  CHECK(out[1] == 31.5);
  s.gemv(w, nullptr, a, out, 2, 3);
  CHECK(out[0] == 14.0);

  const double d[] = {1, -1};
  double acc[] = {0, 0, 0};
  s.gemv_t(w, d, acc, 2, 3);
  CHECK(acc[0] == -3.0);
  CHECK(acc[2] == -3.0);

  double wt[] = {1.0, 1.0};
  double v[] = {1.0, 0.0};
  const double x[] = {2.0, 4.0};
  s.momentum_step(wt, v, x, -0.5, 0.9, 2);
  CHECK(v[0] == doctest::Approx(-0.1));
  CHECK(v[1] == doctest::Approx(-2.0));
  CHECK(wt[0] == doctest::Approx(0.9));
  CHECK(wt[1] == doctest::Approx(-1.0));
}

TEST_CASE("simd kernels match scalar over lengths and tails") {
  const auto& s = K::scalar_table();
  Rng rng(11);
  for (const K::Table* t : simd_tables()) {
    CAPTURE(K::name(t->isa));
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 129u}) {
      CAPTURE(n);
      auto a = randv(n, rng);
      auto b = randv(n, rng);
      close(t->dot(a.data(), b.data(), n), s.dot(a.data(), b.data(), n), double(n));

      auto y1 = randv(n, rng);
      auto y2 = y1;
      t->axpy(0.37, a.data(), y1.data(), n);
      s.axpy(0.37, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) close(y1[i], y2[i], 1.0);

      auto w1 = randv(n, rng);
      auto w2 = w1;
      auto v1 = randv(n, rng);
      auto v2 = v1;
      t->momentum_step(w1.data(), v1.data(), a.data(), -0.01, 0.9, n);
      s.momentum_step(w2.data(), v2.data(), a.data(), -0.01, 0.9, n);
      for (std::size_t i = 0; i < n; ++i) {
        close(w1[i], w2[i], 1.0);
        close(v1[i], v2[i], 1.0);
      }
    }
    for (std::size_t rows : {1u, 3u, 8u, 13u}) {
      for (std::size_t cols : {1u, 4u, 5u, 17u, 33u}) {
        auto w = randv(rows * cols, rng);
        auto x = randv(cols, rng);
        auto bias = randv(rows, rng);
        std::vector<double> o1(rows), o2(rows);
        t->gemv(w.data(), bias.data(), x.data(), o1.data(), rows, cols);
        s.gemv(w.data(), bias.data(), x.data(), o2.data(), rows, cols);
        for (std::size_t r = 0; r < rows; ++r) close(o1[r], o2[r], double(cols));

        auto d = randv(rows, rng);
        std::vector<double> g1(cols, 0.5), g2(cols, 0.5);
        t->gemv_t(w.data(), d.data(), g1.data(), rows, cols);
        s.gemv_t(w.data(), d.data(), g2.data(), rows, cols);
        for (std::size_t c = 0; c < cols; ++c) close(g1[c], g2[c], double(rows));
      }
    }
  }
}

TEST_CASE("force switches the active table and rejects unavailable variants") {
  const K::Isa before = K::active().isa;
  CHECK(K::force(K::Isa::scalar));
  CHECK(K::active().isa == K::Isa::scalar);
  for (K::Isa isa : {K::Isa::avx2, K::Isa::neon}) {
    const bool available =
        (isa == K::Isa::avx2 ? K::avx2_table() : K::neon_table()) != nullptr && K::cpu_supports(isa);
    CHECK(K::force(isa) == available);
    if (!available) CHECK(K::active().isa == K::Isa::scalar);
    K::force(K::Isa::scalar);
  }
  K::force(before);
  CHECK(K::name(K::Isa::scalar) == "scalar");
}
