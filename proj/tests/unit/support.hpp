#pragma once

#include <Eigen/Dense>
#include <random>

#include "wpmec/numerics.hpp"

namespace testing {

inline wpmec::ComplexVector random_vector(std::mt19937_64& gen, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  wpmec::ComplexVector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = {nd(gen), nd(gen)};
  return v;
}

inline wpmec::HermitianMatrix random_hermitian(std::mt19937_64& gen, std::size_t n) {
  wpmec::HermitianMatrix m(n);
  for (int k = 0; k < 3; ++k) m.add_outer(random_vector(gen, n), k == 1 ? -1.0 : 1.0);
  return m;
}

inline Eigen::MatrixXcd to_eigen(const wpmec::HermitianMatrix& m) {
  Eigen::MatrixXcd e(m.dim(), m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) e(i, j) = m(i, j);
  return e;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace testing
