#include "wpmec/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wpmec {

double ComplexVector::norm_squared() const {
  double s = 0.0;
  for (const auto& z : entries_) s += std::norm(z);
  return s;
}

double ComplexVector::norm() const { return std::sqrt(norm_squared()); }

bool ComplexVector::all_finite() const {
  return std::all_of(entries_.begin(), entries_.end(), [](Complex z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

ComplexVector& ComplexVector::operator*=(Complex s) {
  for (auto& z : entries_) z *= s;
  return *this;
}

ComplexVector& ComplexVector::operator+=(const ComplexVector& other) {
  if (other.dim() != dim()) throw std::invalid_argument("ComplexVector: dimension mismatch");
  for (std::size_t i = 0; i < dim(); ++i) entries_[i] += other[i];
  return *this;
}

ComplexVector& ComplexVector::operator-=(const ComplexVector& other) {
  if (other.dim() != dim()) throw std::invalid_argument("ComplexVector: dimension mismatch");
  for (std::size_t i = 0; i < dim(); ++i) entries_[i] -= other[i];
  return *this;
}

ComplexVector ComplexVector::basis(std::size_t dim, std::size_t k) {
  ComplexVector e(dim);
  e[k] = 1.0;
  return e;
}

ComplexVector operator*(Complex s, ComplexVector v) {
  v *= s;
  return v;
}

Complex inner(const ComplexVector& a, const ComplexVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("inner: dimension mismatch");
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

HermitianMatrix HermitianMatrix::identity(std::size_t dim) {
  HermitianMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.data_[i * dim + i] = 1.0;
  return m;
}

void HermitianMatrix::set(std::size_t i, std::size_t j, Complex value) {
  if (i == j) {
    data_[i * dim_ + i] = value.real();
    return;
  }
  data_[i * dim_ + j] = value;
  data_[j * dim_ + i] = std::conj(value);
}

void HermitianMatrix::add_outer(const ComplexVector& h, double weight) {
  if (h.dim() != dim_) throw std::invalid_argument("add_outer: dimension mismatch");
  for (std::size_t i = 0; i < dim_; ++i) {
    data_[i * dim_ + i] += weight * std::norm(h[i]);
    for (std::size_t j = i + 1; j < dim_; ++j) {
      const Complex v = weight * h[i] * std::conj(h[j]);
      data_[i * dim_ + j] += v;
      data_[j * dim_ + i] = std::conj(data_[i * dim_ + j]);
    }
  }
}

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& other) {
  if (other.dim_ != dim_) throw std::invalid_argument("HermitianMatrix: dimension mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

HermitianMatrix& HermitianMatrix::operator-=(const HermitianMatrix& other) {
  if (other.dim_ != dim_) throw std::invalid_argument("HermitianMatrix: dimension mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

HermitianMatrix& HermitianMatrix::operator*=(double s) {
  for (auto& z : data_) z *= s;
  return *this;
}

double HermitianMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += data_[i * dim_ + i].real();
  return t;
}

double HermitianMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

bool HermitianMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](Complex z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

ComplexVector HermitianMatrix::apply(const ComplexVector& v) const {
  if (v.dim() != dim_) throw std::invalid_argument("apply: dimension mismatch");
  ComplexVector out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    Complex s = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) s += data_[i * dim_ + j] * v[j];
    out[i] = s;
  }
  return out;
}

double HermitianMatrix::quadratic_form(const ComplexVector& v) const {
  return inner(v, apply(v)).real();
}

double HermitianMatrix::trace_product(const HermitianMatrix& other) const {
  if (other.dim_ != dim_) throw std::invalid_argument("trace_product: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j)
      s += (data_[i * dim_ + j] * other.data_[j * dim_ + i]).real();
  return s;
}

HermitianMatrix HermitianMatrix::congruence(const HermitianMatrix& s) const {
  if (s.dim_ != dim_) throw std::invalid_argument("congruence: dimension mismatch");
  const std::size_t n = dim_;
  std::vector<Complex> tmp(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Complex acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += s.data_[i * n + k] * data_[k * n + j];
      tmp[i * n + j] = acc;
    }
  HermitianMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      Complex acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += tmp[i * n + k] * s.data_[k * n + j];
      out.set(i, j, acc);
    }
  return out;
}

HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }

HermitianMatrix outer(const ComplexVector& h) {
  HermitianMatrix m(h.dim());
  m.add_outer(h, 1.0);
  return m;
}

namespace {

constexpr int kMaxJacobiSweeps = 100;

// Cyclic Jacobi on a dense real symmetric matrix. On return `a` holds the
// eigenvalues on its diagonal and column k of `v` the matching eigenvector.
void jacobi_symmetric(std::vector<double>& a, std::vector<double>& v, std::size_t n) {
  v.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  double total = 0.0;
  for (double x : a) total += x * x;
  if (total == 0.0) return;

  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (off <= 1e-34 * total) return;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        // Skip rotations whose effect is below rounding of both diagonals.
        if (sweep > 3 && std::abs(apq) < 1e-18 * (std::abs(app) + std::abs(aqq))) {
          a[p * n + q] = a[q * n + p] = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        a[p * n + q] = a[q * n + p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  throw NumericalError("hermitian_eig: Jacobi sweep limit reached");
}

// Residual of z after projecting out the accepted orthonormal set.
ComplexVector project_out(ComplexVector z, const std::vector<ComplexVector>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis) z -= inner(b, z) * b;
  return z;
}

}  // namespace

EigenDecomposition hermitian_eig(const HermitianMatrix& m) {
  const std::size_t n = m.dim();
  if (n == 0) return {};
  if (!m.all_finite()) throw std::invalid_argument("hermitian_eig: non-finite entries");

  const std::size_t n2 = 2 * n;
  std::vector<double> a(n2 * n2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Complex z = m(i, j);
      a[i * n2 + j] = z.real();
      a[(i + n) * n2 + (j + n)] = z.real();
      a[i * n2 + (j + n)] = -z.imag();
      a[(i + n) * n2 + j] = z.imag();
    }
  std::vector<double> v;
  jacobi_symmetric(a, v, n2);

  // Every eigenvalue of M appears twice in the embedding, once for u and once
  // for i·u. Walk the real pairs in ascending order and keep a complex
  // orthonormal set, picking the best-conditioned candidate within each cluster.
  std::vector<std::size_t> order(n2);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x * n2 + x] < a[y * n2 + y]; });

  auto candidate = [&](std::size_t col) {
    ComplexVector z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = Complex(v[i * n2 + col], v[(i + n) * n2 + col]);
    return z;
  };

  double scale = 0.0;
  for (std::size_t k = 0; k < n2; ++k) scale = std::max(scale, std::abs(a[k * n2 + k]));
  const double cluster_tol = 1e-9 * std::max(scale, 1e-300);

  std::vector<ComplexVector> basis;
  std::vector<bool> used(n2, false);
  std::size_t start = 0;
  while (start < n2 && basis.size() < n) {
    std::size_t end = start + 1;
    while (end < n2 && a[order[end] * n2 + order[end]] - a[order[end - 1] * n2 + order[end - 1]] <= cluster_tol)
      ++end;
    const std::size_t want = std::min((end - start + 1) / 2, n - basis.size());
    for (std::size_t pick = 0; pick < want; ++pick) {
      double best = -1.0;
      std::size_t best_k = end;
      ComplexVector best_z;
      for (std::size_t k = start; k < end; ++k) {
        if (used[order[k]]) continue;
        ComplexVector r = project_out(candidate(order[k]), basis);
        const double nr = r.norm_squared();
        if (nr > best) {
          best = nr;
          best_k = k;
          best_z = std::move(r);
        }
      }
      if (best_k == end || best < 1e-6) break;
      used[order[best_k]] = true;
      best_z *= 1.0 / std::sqrt(best);
      basis.push_back(std::move(best_z));
    }
    start = end;
  }
  // Clustering could only under-fill if rounding split a pair across
  // clusters; complete the basis from whatever candidates remain.
  while (basis.size() < n) {
    double best = -1.0;
    std::size_t best_c = n2;
    ComplexVector best_z;
    for (std::size_t c = 0; c < n2; ++c) {
      if (used[c]) continue;
      ComplexVector r = project_out(candidate(c), basis);
      if (r.norm_squared() > best) {
        best = r.norm_squared();
        best_c = c;
        best_z = std::move(r);
      }
    }
    if (best_c == n2 || best < 1e-12) throw NumericalError("hermitian_eig: could not assemble eigenbasis");
    used[best_c] = true;
    best_z *= 1.0 / std::sqrt(best);
    basis.push_back(std::move(best_z));
  }

  EigenDecomposition out;
  std::vector<std::pair<double, std::size_t>> rq(n);
  for (std::size_t k = 0; k < n; ++k) rq[k] = {m.quadratic_form(basis[k]), k};
  std::stable_sort(rq.begin(), rq.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  out.values.reserve(n);
  out.vectors.reserve(n);
  for (const auto& [value, k] : rq) {
    out.values.push_back(value);
    out.vectors.push_back(basis[k]);
  }
  return out;
}

EigenPair min_eigpair(const HermitianMatrix& m) {
  auto eig = hermitian_eig(m);
  if (eig.values.empty()) throw std::invalid_argument("min_eigpair: empty matrix");
  return {eig.values.front(), std::move(eig.vectors.front())};
}

bool is_psd(const HermitianMatrix& m, double tol) {
  if (tol < 0.0) throw std::invalid_argument("is_psd: tol must be non-negative");
  if (m.dim() == 0) return true;
  return min_eigpair(m).value >= -tol;
}

double lambert_w0(double x) {
  constexpr double kInvE = 0.36787944117144233;
  constexpr double kE = 2.718281828459045;
  if (std::isnan(x)) throw std::domain_error("lambert_w0: NaN argument");
  if (x < -kInvE - 1e-12) throw std::domain_error("lambert_w0: argument below -1/e");
  if (x <= -kInvE) return -1.0;
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;

  // e·x + 1 written as a sum so the branch-point distance keeps its digits.
  const double branch_gap = std::fma(kE, x, 1.0);
  double w;
  if (x < -0.25) {
    const double p = std::sqrt(2.0 * std::max(branch_gap, 0.0));
    if (p < 1e-9) return -1.0 + p;
    w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)));
  } else if (x < 3.0) {
    w = std::log1p(x);
    if (x > 0.5) w *= 0.75;
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }

  for (int iter = 0; iter < 50; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 <= 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double step = f / denom;
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w))) break;
  }
  return std::max(w, -1.0);
}

namespace {

// (v − 1)eᵛ + 1, with its series Σ_{k≥2} (k−1) vᵏ / k! for small |v|.
double shifted_w_residual_base(double v) {
  if (std::abs(v) < 0.05) {
    double term = v * v / 2.0;  // vᵏ / k! at k = 2
    double sum = term;
    for (int k = 3; k <= 12; ++k) {
      term *= v / k;
      sum += (k - 1) * term;
    }
    return sum;
  }
  return (v - 1.0) * std::exp(v) + 1.0;
}

}  // namespace

double shifted_lambert_w0(double q) {
  constexpr double kInvE = 0.36787944117144233;
  if (std::isnan(q)) throw std::domain_error("shifted_lambert_w0: NaN argument");
  if (q < -1e-12) throw std::domain_error("shifted_lambert_w0: argument below the branch point");
  if (q <= 0.0) return 0.0;
  if (std::isinf(q)) return q;

  double v;
  if (q < 0.5) {
    const double p = std::sqrt(2.0 * q);
    v = p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)));
  } else {
    v = 1.0 + lambert_w0((q - 1.0) * kInvE);
  }
  // Halley on φ(v) = q with φ′ = v eᵛ, φ″ = (v + 1) eᵛ.
  for (int iter = 0; iter < 50 && v > 0.0; ++iter) {
    const double ev = std::exp(v);
    const double f = shifted_w_residual_base(v) - q;
    const double d1 = v * ev;
    const double d2 = (v + 1.0) * ev;
    const double step = f / (d1 - f * d2 / (2.0 * d1));
    v -= step;
    if (!(v > 0.0)) v = 0.5 * (v + step);  // stay on the v > 0 side
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * v) break;
  }
  return v;
}

std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  if (a.size() != n * n) throw std::invalid_argument("solve_spd: dimension mismatch");
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) throw NumericalError("solve_spd: matrix not positive definite");
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
    b[i] = s / a[i * n + i];
  }
  return b;
}

}  // namespace wpmec
