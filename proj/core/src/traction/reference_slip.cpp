#include <algorithm>
#include <cmath>

#include "pnmpc/errors.hpp"
#include "pnmpc/plant/tire.hpp"
#include "pnmpc/traction/traction.hpp"

namespace pnmpc::traction {

namespace {

// Golden-section maximisation of the longitudinal force curve.
double argmax_force(const plant::TireParams& t, double mu, double fz) {
  auto f = [&](double s) { return plant::magic_formula(s, mu, fz, t, plant::TireAxis::longitudinal); };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0, b = 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-10) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Index i with grid[i] <= x <= grid[i+1] and the weight of grid[i+1].
std::pair<std::size_t, double> bracket(const std::vector<double>& grid, double x, bool& clamped) {
  if (grid.size() == 1) {
    clamped = clamped || x != grid.front();
    return {0, 0.0};
  }
  if (x <= grid.front()) {
    clamped = clamped || x < grid.front();
    return {0, 0.0};
  }
  if (x >= grid.back()) {
    clamped = clamped || x > grid.back();
    return {grid.size() - 2, 1.0};
  }
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const auto i = static_cast<std::size_t>(it - grid.begin()) - 1;
  return {i, (x - grid[i]) / (grid[i + 1] - grid[i])};
}

}  // namespace

ReferenceSlipTable::ReferenceSlipTable(std::vector<double> mu_grid, std::vector<double> fz_grid,
                                       std::vector<double> values, double margin)
    : mu_(std::move(mu_grid)), fz_(std::move(fz_grid)), v_(std::move(values)), margin_(margin) {
  if (mu_.empty() || fz_.empty() || v_.size() != mu_.size() * fz_.size())
    throw ConfigError("reference slip table: grid/value size mismatch");
  for (std::size_t i = 1; i < mu_.size(); ++i)
    if (!(mu_[i] > mu_[i - 1])) throw ConfigError("reference slip table: mu grid not increasing");
  for (std::size_t i = 1; i < fz_.size(); ++i)
    if (!(fz_[i] > fz_[i - 1])) throw ConfigError("reference slip table: Fz grid not increasing");
}

ReferenceSlipTable ReferenceSlipTable::build(const plant::TireParams& tires, double margin,
                                             std::vector<double> mu_grid,
                                             std::vector<double> fz_grid) {
  if (!(margin > 0.0 && margin <= 1.0)) throw ConfigError("slip_margin must be in (0, 1]");
  std::vector<double> v;
  v.reserve(mu_grid.size() * fz_grid.size());
  for (double mu : mu_grid)
    for (double fz : fz_grid) v.push_back(std::min(0.2, margin * argmax_force(tires, mu, fz)));
  return ReferenceSlipTable(std::move(mu_grid), std::move(fz_grid), std::move(v), margin);
}

double ReferenceSlipTable::lookup(double mu, double Fz, bool* clamped) const {
  if (v_.empty()) throw ConfigError("reference slip table is empty");
  bool c = false;
  const auto [i, wi] = bracket(mu_, mu, c);
  const auto [j, wj] = bracket(fz_, Fz, c);
  if (clamped) *clamped = c;
  const std::size_t i1 = std::min(i + 1, mu_.size() - 1);
  const std::size_t j1 = std::min(j + 1, fz_.size() - 1);
  const double v00 = value(i, j), v01 = value(i, j1), v10 = value(i1, j), v11 = value(i1, j1);
  return (1.0 - wi) * ((1.0 - wj) * v00 + wj * v01) + wi * ((1.0 - wj) * v10 + wj * v11);
}

double reference_slip(double mu, double Fz, const ReferenceSlipTable& table, bool* clamped) {
  return table.lookup(mu, Fz, clamped);
}

double slip_error(double sigma_ref, double s, double omega, double R) {
  return sigma_ref - s / std::max(omega * R, plant::kSlipSpeedEps);
}

}  // namespace pnmpc::traction
