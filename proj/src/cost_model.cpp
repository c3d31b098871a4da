#include "proshape/cost_model.hpp"

#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace proshape {
namespace {

// Loads this far below zero are rounding noise from x - x cancellation.
constexpr double kNegativeLoadSlack = 1e-9;
constexpr int kProbePoints = 1000;

}  // namespace

DomainError::DomainError(double load)
    : std::domain_error(fmt::format("load {} outside cost domain", load)),
      load_(load) {}

std::string to_string(CostKind kind) {
  switch (kind) {
    case CostKind::quadratic: return "quadratic";
    case CostKind::outage: return "outage";
    case CostKind::polynomial: return "polynomial";
  }
  return "unknown";
}

CostModel::CostModel(CostKind kind, double mu, std::vector<double> coeffs)
    : kind_(kind), mu_(mu), coeffs_(std::move(coeffs)) {}

CostModel CostModel::quadratic() {
  return CostModel(CostKind::quadratic, 0.0, {0.0, 0.0, 1.0});
}

CostModel CostModel::outage(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw std::invalid_argument(fmt::format("outage capacity {} must be > 0", mu));
  }
  CostModel c(CostKind::outage, mu, {});
  c.probe_shape(mu * (1.0 - 1e-6));
  return c;
}

CostModel CostModel::polynomial(std::vector<double> coeffs, double probe_max) {
  while (!coeffs.empty() && coeffs.back() == 0.0) coeffs.pop_back();
  if (coeffs.size() < 3) {
    throw std::invalid_argument("polynomial cost needs degree >= 2");
  }
  for (double c : coeffs) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw std::invalid_argument(
          fmt::format("polynomial coefficient {} must be finite and >= 0", c));
    }
  }
  CostModel model(CostKind::polynomial, 0.0, std::move(coeffs));
  model.probe_shape(probe_max);
  return model;
}

void CostModel::probe_shape(double probe_max) const {
  for (int i = 1; i <= kProbePoints; ++i) {
    const double load = probe_max * i / kProbePoints;
    if (!(marginal(load) > 0.0) || !(curvature(load) > 0.0)) {
      throw std::invalid_argument(fmt::format(
          "{} cost is not increasing and strictly convex at load {}",
          to_string(kind_), load));
    }
  }
}

bool CostModel::in_domain(double load) const noexcept {
  if (load < -kNegativeLoadSlack) return false;
  return kind_ != CostKind::outage || load < mu_;
}

void CostModel::check_load(double load) const {
  if (!in_domain(load)) throw DomainError(load);
}

double CostModel::cost(double load) const {
  check_load(load);
  switch (kind_) {
    case CostKind::quadratic: return load * load;
    case CostKind::outage: return load / (mu_ - load);
    case CostKind::polynomial: {
      double acc = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        acc = acc * load + *it;
      }
      return acc;
    }
  }
  return 0.0;
}

double CostModel::marginal(double load) const {
  check_load(load);
  switch (kind_) {
    case CostKind::quadratic: return 2.0 * load;
    case CostKind::outage: {
      const double gap = mu_ - load;
      return mu_ / (gap * gap);
    }
    case CostKind::polynomial: {
      double acc = 0.0;
      for (std::size_t k = coeffs_.size() - 1; k >= 1; --k) {
        acc = acc * load + static_cast<double>(k) * coeffs_[k];
      }
      return acc;
    }
  }
  return 0.0;
}

double CostModel::curvature(double load) const {
  check_load(load);
  switch (kind_) {
    case CostKind::quadratic: return 2.0;
    case CostKind::outage: {
      const double gap = mu_ - load;
      return 2.0 * mu_ / (gap * gap * gap);
    }
    case CostKind::polynomial: {
      double acc = 0.0;
      for (std::size_t k = coeffs_.size() - 1; k >= 2; --k) {
        acc = acc * load + static_cast<double>(k * (k - 1)) * coeffs_[k];
      }
      return acc;
    }
  }
  return 0.0;
}

std::optional<std::array<double, 3>> CostModel::quadratic_form() const noexcept {
  if (kind_ == CostKind::outage || coeffs_.size() > 3) return std::nullopt;
  std::array<double, 3> c{0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < coeffs_.size(); ++k) c[k] = coeffs_[k];
  return c;
}

std::string CostModel::describe() const {
  switch (kind_) {
    case CostKind::quadratic: return "quadratic";
    case CostKind::outage: return fmt::format("outage(mu={})", mu_);
    case CostKind::polynomial:
      return fmt::format("polynomial({})", fmt::join(coeffs_, ","));
  }
  return "unknown";
}

}  // namespace proshape
