#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace proshape {

/// Raised when a load falls outside the cost function's domain.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(double load);
  [[nodiscard]] double load() const noexcept { return load_; }

 private:
  double load_;
};

enum class CostKind { quadratic, outage, polynomial };

[[nodiscard]] std::string to_string(CostKind kind);

/// Smooth, strictly convex, increasing delivery cost C(L).
///
///   quadratic    C(L) = L^2
///   outage       C(L) = L / (mu - L), domain [0, mu)
///   polynomial   C(L) = sum_k c_k L^k, c_k >= 0, degree >= 2
///
/// Construction probes C' > 0 and C'' > 0 on a 1000-point grid over
/// (0, probe_max] and throws std::invalid_argument if either fails.
class CostModel {
 public:
  static CostModel quadratic();
  static CostModel outage(double mu);
  static CostModel polynomial(std::vector<double> coeffs,
                              double probe_max = 100.0);

  [[nodiscard]] CostKind kind() const noexcept { return kind_; }
  [[nodiscard]] double mu() const noexcept { return mu_; }
  [[nodiscard]] const std::vector<double>& coeffs() const noexcept {
    return coeffs_;
  }
  [[nodiscard]] std::size_t degree() const noexcept {
    return coeffs_.empty() ? 0 : coeffs_.size() - 1;
  }

  [[nodiscard]] bool in_domain(double load) const noexcept;

  /// C(load); throws DomainError outside the domain.
  [[nodiscard]] double cost(double load) const;
  /// C'(load).
  [[nodiscard]] double marginal(double load) const;
  /// C''(load).
  [[nodiscard]] double curvature(double load) const;

  /// (c0, c1, c2) when C is a polynomial of degree <= 2, else nullopt.
  [[nodiscard]] std::optional<std::array<double, 3>> quadratic_form()
      const noexcept;

  [[nodiscard]] std::string describe() const;

 private:
  CostModel(CostKind kind, double mu, std::vector<double> coeffs);
  void check_load(double load) const;
  void probe_shape(double probe_max) const;

  CostKind kind_;
  double mu_ = 0.0;
  std::vector<double> coeffs_;
};

}  // namespace proshape
