#pragma once

// Small dense complex-Hermitian linear algebra and the principal-branch
// Lambert W function. Sizes here are tiny (N <= 16), so everything is plain
// row-major storage with value semantics.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wpmec {

using Complex = std::complex<double>;

/// Raised when an iterative numerical kernel fails to converge or hits a
/// non-positive-definite pivot.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ComplexVector {
 public:
  ComplexVector() = default;
  explicit ComplexVector(std::size_t dim) : entries_(dim) {}
  ComplexVector(std::initializer_list<Complex> entries) : entries_(entries) {}
  explicit ComplexVector(std::vector<Complex> entries) : entries_(std::move(entries)) {}

  std::size_t dim() const { return entries_.size(); }
  Complex& operator[](std::size_t i) { return entries_[i]; }
  const Complex& operator[](std::size_t i) const { return entries_[i]; }

  std::span<const Complex> entries() const { return entries_; }

  double norm_squared() const;
  double norm() const;
  bool all_finite() const;

  ComplexVector& operator*=(Complex s);
  ComplexVector& operator+=(const ComplexVector& other);
  ComplexVector& operator-=(const ComplexVector& other);

  static ComplexVector basis(std::size_t dim, std::size_t k);

 private:
  std::vector<Complex> entries_;
};

ComplexVector operator*(Complex s, ComplexVector v);

/// aᴴ b
Complex inner(const ComplexVector& a, const ComplexVector& b);

/// Hermitian N×N matrix. Every mutator keeps M = Mᴴ exactly: off-diagonal
/// writes mirror the conjugate, diagonal writes drop the imaginary part.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(std::size_t dim) : dim_(dim), data_(dim * dim) {}

  static HermitianMatrix identity(std::size_t dim);
  static HermitianMatrix zero(std::size_t dim) { return HermitianMatrix(dim); }

  std::size_t dim() const { return dim_; }
  Complex operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
  void set(std::size_t i, std::size_t j, Complex value);

  /// M += weight · h hᴴ
  void add_outer(const ComplexVector& h, double weight);

  HermitianMatrix& operator+=(const HermitianMatrix& other);
  HermitianMatrix& operator-=(const HermitianMatrix& other);
  HermitianMatrix& operator*=(double s);

  double trace() const;
  double frobenius_norm() const;
  bool all_finite() const;

  ComplexVector apply(const ComplexVector& v) const;
  /// Re(vᴴ M v); the imaginary part is zero up to rounding.
  double quadratic_form(const ComplexVector& v) const;
  /// Re tr(M · other); real for two Hermitian matrices.
  double trace_product(const HermitianMatrix& other) const;
  /// S · M · S for Hermitian S (a congruence, so the result stays Hermitian).
  HermitianMatrix congruence(const HermitianMatrix& s) const;

 private:
  std::size_t dim_ = 0;
  std::vector<Complex> data_;
};

HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b);
HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b);
HermitianMatrix operator*(double s, HermitianMatrix a);

/// h hᴴ
HermitianMatrix outer(const ComplexVector& h);

struct EigenDecomposition {
  std::vector<double> values;          // ascending
  std::vector<ComplexVector> vectors;  // orthonormal, vectors[k] pairs with values[k]

  /// Σ_k g(values[k]) v_k v_kᴴ
  template <class Fn>
  HermitianMatrix map(Fn&& g) const {
    HermitianMatrix out(vectors.empty() ? 0 : vectors.front().dim());
    for (std::size_t k = 0; k < values.size(); ++k) out.add_outer(vectors[k], g(values[k]));
    return out;
  }
  HermitianMatrix reconstruct() const {
    return map([](double x) { return x; });
  }
};

/// Full eigendecomposition by cyclic Jacobi on the real symmetric embedding
/// [[Re M, -Im M], [Im M, Re M]]. Throws NumericalError if the sweep cap is hit.
EigenDecomposition hermitian_eig(const HermitianMatrix& m);

struct EigenPair {
  double value = 0.0;
  ComplexVector vector;
};

EigenPair min_eigpair(const HermitianMatrix& m);

bool is_psd(const HermitianMatrix& m, double tol);

/// Principal branch W₀ on [-1/e, ∞). Arguments below -1/e by at most 1e-12
/// are clamped to the branch point; anything further out is a domain error.
double lambert_w0(double x);

/// 1 + W₀((q − 1)/e) for q ≥ 0, i.e. the v ≥ 0 solving (v − 1)eᵛ + 1 = q.
/// Taking q = e·x + 1 directly keeps full relative accuracy next to the
/// branch point, where forming x first would cancel.
double shifted_lambert_w0(double q);

/// Solves A x = b for a symmetric positive definite n×n A (row-major) by
/// Cholesky. Throws NumericalError on a non-positive pivot.
std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b);

}  // namespace wpmec
