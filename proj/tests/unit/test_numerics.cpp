#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "wpmec/numerics.hpp"

using namespace wpmec;

TEST_CASE("hermitian_eig agrees with a reference eigensolver") {
  std::mt19937_64 gen(11);
  for (std::size_t n : {1u, 2u, 3u, 4u, 8u}) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto m = testing::random_hermitian(gen, n);
      const auto ours = hermitian_eig(m);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ref(testing::to_eigen(m));
      const double scale = std::max(1.0, m.frobenius_norm());
      for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(ours.values[k] - ref.eigenvalues()(k)) <= 1e-11 * scale);
      CHECK((ours.reconstruct() - m).frobenius_norm() <= 1e-11 * scale);
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          CHECK(std::abs(inner(ours.vectors[a], ours.vectors[b]) - (a == b ? 1.0 : 0.0)) <= 1e-12);
    }
  }
}

TEST_CASE("hermitian_eig on a diagonal matrix returns the sorted diagonal") {
  HermitianMatrix m(3);
  m.set(0, 0, 3.0);
  m.set(1, 1, -1.0);
  m.set(2, 2, 2.0);
  const auto e = hermitian_eig(m);
  CHECK(e.values[0] == doctest::Approx(-1.0));
  CHECK(e.values[1] == doctest::Approx(2.0));
  CHECK(e.values[2] == doctest::Approx(3.0));
}

TEST_CASE("rank-one matrix has eigenvalue ‖h‖² along h") {
  const ComplexVector h{{1.0, 2.0}, {-0.5, 0.25}, {0.0, 3.0}};
  const auto e = hermitian_eig(outer(h));
  CHECK(e.values.back() == doctest::Approx(h.norm_squared()).epsilon(1e-13));
  CHECK(std::abs(inner(e.vectors.back(), h)) == doctest::Approx(h.norm()).epsilon(1e-12));
  CHECK(std::abs(e.values.front()) <= 1e-12 * h.norm_squared());
}

TEST_CASE("min_eigpair and is_psd") {
  std::mt19937_64 gen(5);
  const auto m = testing::random_hermitian(gen, 4);
  const auto p = min_eigpair(m);
  CHECK(p.value == doctest::Approx(hermitian_eig(m).values.front()).epsilon(1e-12));
  auto resid = m.apply(p.vector);
  resid -= Complex(p.value) * p.vector;
  CHECK(resid.norm() <= 1e-10 * m.frobenius_norm());
  CHECK(is_psd(HermitianMatrix::identity(3), 0.0));
  HermitianMatrix neg = HermitianMatrix::identity(2);
  neg.set(1, 1, -1e-3);
  CHECK_FALSE(is_psd(neg, 1e-6));
  CHECK(is_psd(neg, 1e-2));
}

TEST_CASE("Hermitian invariants are kept by mutators") {
  HermitianMatrix m(2);
  m.set(0, 1, Complex(1.0, 2.0));
  CHECK(m(1, 0) == Complex(1.0, -2.0));
  m.set(1, 1, Complex(4.0, 9.0));
  CHECK(m(1, 1).imag() == 0.0);
}

TEST_CASE("trace_product, quadratic_form and congruence") {
  std::mt19937_64 gen(3);
  const auto a = testing::random_hermitian(gen, 3);
  const auto b = testing::random_hermitian(gen, 3);
  const auto ea = testing::to_eigen(a), eb = testing::to_eigen(b);
  CHECK(a.trace_product(b) == doctest::Approx((ea * eb).trace().real()).epsilon(1e-12));
  const auto v = testing::random_vector(gen, 3);
  Eigen::VectorXcd ev(3);
  for (int i = 0; i < 3; ++i) ev(i) = v[i];
  CHECK(a.quadratic_form(v) == doctest::Approx((ev.adjoint() * ea * ev)(0, 0).real()).epsilon(1e-12));
  const auto c = a.congruence(b);
  const Eigen::MatrixXcd ec = eb * ea * eb;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(c(i, j) - ec(i, j)) <= 1e-11 * ec.norm());
}

TEST_CASE("lambert_w0 reference values") {
  CHECK(lambert_w0(0.0) == 0.0);
  CHECK(lambert_w0(1.0) == doctest::Approx(0.5671432904097838).epsilon(1e-15));  // omega constant
  CHECK(lambert_w0(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lambert_w0(-std::exp(-1.0)) == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(lambert_w0(2.0 * std::exp(2.0)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(lambert_w0(-0.5), std::domain_error);
}

TEST_CASE("lambert_w0 inverts w eʷ over many decades") {
  for (double x = -0.3678; x < 1e12; x = x < 0 ? x + 0.01 : x * 1.7 + 1e-3) {
    const double w = lambert_w0(x);
    const double back = w * std::exp(w);
    CHECK(std::abs(back - x) <= 1e-13 * std::max(1.0, std::abs(x)));
  }
}

TEST_CASE("shifted_lambert_w0 solves (v − 1)eᵛ + 1 = q near the branch point") {
  for (double q : {1e-20, 1e-12, 1e-6, 1e-3, 0.1, 1.0, 10.0, 1e6}) {
    const double v = shifted_lambert_w0(q);
    // (v − 1)eᵛ + 1 ≈ v²/2 for small v; compare in the form that is accurate there.
    const double lhs = v < 1e-3 ? v * v / 2.0 + v * v * v / 3.0 : (v - 1.0) * std::exp(v) + 1.0;
    CHECK(testing::rel(lhs, q) <= 1e-10);
  }
  CHECK(shifted_lambert_w0(0.0) == 0.0);
}

TEST_CASE("solve_spd matches a reference Cholesky") {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> nd;
  for (int n : {1, 3, 6}) {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = nd(gen);
    Eigen::MatrixXd a = m * m.transpose() + Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b(i) = nd(gen);
    std::vector<double> av(a.data(), a.data() + n * n), bv(b.data(), b.data() + n);
    const auto x = solve_spd(av, bv);
    const Eigen::VectorXd ref = a.llt().solve(b);
    for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(ref(i)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(solve_spd({1.0, 2.0, 2.0, 1.0}, {1.0, 1.0}), NumericalError);
}
