#include "ssdgp/taylor.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace ssdgp {

namespace {

void enumerate_exponents(int num_vars, int total, int var, std::vector<int>& current,
                         std::vector<std::vector<int>>& out) {
  if (var == num_vars - 1) {
    current[var] = total;
    out.push_back(current);
    current[var] = 0;
    return;
  }
  for (int e = total; e >= 0; --e) {
    current[var] = e;
    enumerate_exponents(num_vars, total - e, var + 1, current, out);
  }
  current[var] = 0;
}

}  // namespace

TaylorSpace::TaylorSpace(int num_vars, int degree) : num_vars_(num_vars), degree_(degree) {
  if (num_vars < 1 || degree < 0) throw std::invalid_argument("TaylorSpace: bad dimensions");
  std::vector<int> current(num_vars, 0);
  for (int total = 0; total <= degree; ++total) {
    const std::size_t first = exponents_.size();
    enumerate_exponents(num_vars, total, 0, current, exponents_);
    degrees_.resize(exponents_.size(), total);
    (void)first;
  }
  // Graded order puts h_v at index 1 + v: enumerate_exponents emits (1,0,..), (0,1,..), ...
  std::map<std::vector<int>, int> index;
  for (int i = 0; i < size(); ++i) index.emplace(exponents_[i], i);

  products_.resize(size());
  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < size(); ++j) {
      if (degrees_[i] + degrees_[j] > degree_) continue;
      std::vector<int> sum(num_vars_);
      for (int v = 0; v < num_vars_; ++v) sum[v] = exponents_[i][v] + exponents_[j][v];
      products_[i].emplace_back(j, index.at(sum));
    }
  }

  derivatives_.resize(num_vars_);
  for (int v = 0; v < num_vars_; ++v) {
    for (int i = 0; i < size(); ++i) {
      const int e = exponents_[i][v];
      if (e == 0) continue;
      std::vector<int> lowered = exponents_[i];
      --lowered[v];
      derivatives_[v].push_back({i, index.at(lowered), e});
    }
  }
}

const TaylorSpace& taylor_space(int num_vars, int degree) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<TaylorSpace>> registry;
  std::lock_guard lock(mutex);
  auto& slot = registry[{num_vars, degree}];
  if (!slot) slot = std::make_unique<TaylorSpace>(num_vars, degree);
  return *slot;
}

Taylor::Taylor(const TaylorSpace& space, double constant) : space_(&space), coeffs_(space.size(), 0.0) {
  coeffs_[0] = constant;
}

Taylor Taylor::variable(const TaylorSpace& space, int v, double value) {
  Taylor out(space, value);
  if (space.degree() >= 1) out.coeffs_[space.linear_index(v)] = 1.0;
  return out;
}

bool Taylor::is_constant() const {
  for (std::size_t i = 1; i < coeffs_.size(); ++i) {
    if (coeffs_[i] != 0.0) return false;
  }
  return true;
}

Taylor Taylor::derivative(int v) const {
  Taylor out(*space_, 0.0);
  for (const auto& [src, dst, factor] : space_->derivative_map(v)) out.coeffs_[dst] += factor * coeffs_[src];
  return out;
}

Taylor& Taylor::operator+=(const Taylor& rhs) {
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += rhs.coeffs_[i];
  return *this;
}

Taylor& Taylor::operator-=(const Taylor& rhs) {
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= rhs.coeffs_[i];
  return *this;
}

Taylor& Taylor::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

void Taylor::add_product(const Taylor& a, const Taylor& b) {
  const int n = space_->size();
  for (int i = 0; i < n; ++i) {
    const double ai = a.coeffs_[i];
    if (ai == 0.0) continue;
    for (const auto& [j, k] : space_->products_of(i)) coeffs_[k] += ai * b.coeffs_[j];
  }
}

Taylor operator*(const Taylor& a, const Taylor& b) {
  Taylor out(*a.space_, 0.0);
  out.add_product(a, b);
  return out;
}

Taylor Taylor::compose(std::span<const double> taylor_coeffs) const {
  const int top = std::min<int>(space_->degree(), static_cast<int>(taylor_coeffs.size()) - 1);
  Taylor delta = *this;
  delta.coeffs_[0] = 0.0;
  Taylor out(*space_, taylor_coeffs[top]);
  for (int r = top - 1; r >= 0; --r) {
    out = out * delta;
    out.coeffs_[0] += taylor_coeffs[r];
  }
  return out;
}

Taylor exp(const Taylor& x) {
  const int d = x.space().degree();
  std::vector<double> c(d + 1);
  const double e = std::exp(x.value());
  double fact = 1.0;
  for (int r = 0; r <= d; ++r) {
    if (r > 0) fact *= r;
    c[r] = e / fact;
  }
  return x.compose(c);
}

Taylor reciprocal(const Taylor& x) {
  const int d = x.space().degree();
  std::vector<double> c(d + 1);
  const double inv = 1.0 / x.value();
  double term = inv;
  for (int r = 0; r <= d; ++r) {
    c[r] = term;
    term *= -inv;
  }
  return x.compose(c);
}

Taylor pow(const Taylor& x, double p) {
  const int d = x.space().degree();
  std::vector<double> c(d + 1);
  const double x0 = x.value();
  // generalized binomial coefficient C(p, r) x0^(p - r)
  double binom = 1.0;
  for (int r = 0; r <= d; ++r) {
    if (r > 0) binom *= (p - (r - 1)) / r;
    c[r] = binom * std::pow(x0, p - r);
  }
  return x.compose(c);
}

}  // namespace ssdgp
