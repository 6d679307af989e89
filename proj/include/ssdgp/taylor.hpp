#pragma once

// Truncated multivariate Taylor arithmetic.
//
// A Taylor value holds the coefficients of f(x0 + h) as a polynomial in h up to a
// fixed total degree. Products are truncated at that degree, so every coefficient
// of total degree <= k is exact whenever the operands are exact up to degree k.
// Differentiating lowers the exact degree by one. The transition moments use this
// to obtain iterated generator terms and their state derivatives without
// finite differences.

#include <array>
#include <span>
#include <utility>
#include <vector>

namespace ssdgp {

class TaylorSpace {
 public:
  TaylorSpace(int num_vars, int degree);

  int num_vars() const { return num_vars_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  /// Coefficient index of the monomial h_v.
  int linear_index(int v) const { return 1 + v; }
  const std::vector<int>& exponent(int index) const { return exponents_[index]; }
  int total_degree(int index) const { return degrees_[index]; }

  /// (rhs index, output index) pairs whose degree sum stays within the truncation.
  const std::vector<std::pair<int, int>>& products_of(int lhs) const { return products_[lhs]; }
  /// (source index, target index, factor) triples for d/dh_v.
  const std::vector<std::array<int, 3>>& derivative_map(int v) const { return derivatives_[v]; }

 private:
  int num_vars_;
  int degree_;
  std::vector<std::vector<int>> exponents_;
  std::vector<int> degrees_;
  std::vector<std::vector<std::pair<int, int>>> products_;
  std::vector<std::vector<std::array<int, 3>>> derivatives_;
};

/// Shared, immutable space for (num_vars, degree); safe to call concurrently.
const TaylorSpace& taylor_space(int num_vars, int degree);

class Taylor {
 public:
  Taylor() = default;
  Taylor(const TaylorSpace& space, double constant);

  /// x0[v] + h_v.
  static Taylor variable(const TaylorSpace& space, int v, double value);

  const TaylorSpace& space() const { return *space_; }
  double value() const { return coeffs_[0]; }
  /// d/dx_v at the expansion point.
  double gradient(int v) const { return coeffs_[space_->linear_index(v)]; }
  std::span<const double> coefficients() const { return coeffs_; }
  bool is_constant() const;

  Taylor derivative(int v) const;

  Taylor& operator+=(const Taylor& rhs);
  Taylor& operator-=(const Taylor& rhs);
  Taylor& operator*=(double s);
  /// this += a * b
  void add_product(const Taylor& a, const Taylor& b);

  friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
  friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
  friend Taylor operator*(Taylor a, double s) { return a *= s; }
  friend Taylor operator*(double s, Taylor a) { return a *= s; }
  friend Taylor operator*(const Taylor& a, const Taylor& b);
  friend Taylor operator-(Taylor a) { return a *= -1.0; }

  /// sum_r c[r] (this - value())^r, with c[r] = f^(r)(value()) / r!.
  Taylor compose(std::span<const double> taylor_coeffs) const;

 private:
  const TaylorSpace* space_ = nullptr;
  std::vector<double> coeffs_;
};

Taylor exp(const Taylor& x);
Taylor reciprocal(const Taylor& x);
/// x^p for real p, requires value() > 0 unless p is a non-negative integer.
Taylor pow(const Taylor& x, double p);

// Scalar counterparts used by code templated on the scalar type.
inline double reciprocal(double x) { return 1.0 / x; }
inline double constant_like(double, double v) { return v; }
inline Taylor constant_like(const Taylor& like, double v) { return Taylor(like.space(), v); }
inline double scalar_value(double x) { return x; }
inline double scalar_value(const Taylor& x) { return x.value(); }

}  // namespace ssdgp
