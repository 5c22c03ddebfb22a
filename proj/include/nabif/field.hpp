#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nabif/expr.hpp"

namespace nabif {

/// Time-dependent coefficient: an expression in t alone, optionally paired
/// with an antiderivative (also in t alone). Construction rejects bodies
/// that mention x or mu.
class CoefficientFunction {
 public:
  CoefficientFunction() = default;

  static CoefficientFunction make(expr::Expression body,
                                  std::optional<expr::Expression> antiderivative =
                                      std::nullopt,
                                  const std::string& slot_name = "coefficient");

  static CoefficientFunction parse(std::string_view body_source,
                                   std::optional<std::string_view> anti_source =
                                       std::nullopt,
                                   const std::string& slot_name = "coefficient");

  double operator()(double t) const noexcept { return body_.eval(t, 0.0, 0.0); }

  bool has_antiderivative() const noexcept { return anti_.has_value(); }

  /// Value of the stored antiderivative; throws BindError when absent.
  double anti(double t) const;

  const expr::Expression& body() const noexcept { return body_; }
  const std::optional<expr::Expression>& antiderivative() const noexcept {
    return anti_;
  }

  /// Verifies d/dt antiderivative == body by centered differences on the
  /// given sample times (relative tolerance 1e-6); throws BindError on
  /// mismatch. No-op when no antiderivative is stored.
  void check_antiderivative(std::span<const double> t_samples) const;

 private:
  expr::Expression body_;
  std::optional<expr::Expression> anti_;
};

enum class Family { ConcreteSN, ConcreteTC, GeneralSN, GeneralTC, BlackBox };
enum class FamilyHint { SN, TC };

const char* family_name(Family f) noexcept;

/// A scalar non-autonomous vector field dx/dt = G(t, x, mu) in one of the
/// supported families:
///
///   ConcreteSN:  mu^(2m-1) f(t) - g(t) x^(2n)
///   ConcreteTC:  mu^(2m-1) f(t) x - g(t) x^(2n)
///   GeneralSN:   mu^(2m-1) [f(t) + phi(t,x,mu)] - x^(2n) [g(t) + psi(t,x)]
///   GeneralTC:   mu^(2m-1) [f(t) + mu*phi(t,x,mu)] x - [g(t) + r(t,x,mu)] x^(2n)
///   BlackBox:    a free-form expression G(t,x,mu) plus a family hint
///
/// Immutable after validate(); rhs() is pure and safe to share across
/// worker threads.
struct FieldSpec {
  Family family{Family::ConcreteSN};
  int m{1};
  int n{1};
  double mu{0.0};
  std::optional<CoefficientFunction> f;
  std::optional<CoefficientFunction> g;
  std::optional<CoefficientFunction> h;  // dominating function for audits
  std::optional<expr::Expression> phi;
  std::optional<expr::Expression> psi_or_r;
  std::optional<expr::Expression> G;
  std::optional<FamilyHint> hint;  // BlackBox only

  /// Checks family-required slots, exponent ranges, and the perturbation
  /// anchoring identities phi(t,0,0)=0, psi(t,0)=0 / r(t,0,0)=0 on sampled
  /// t. Throws BindError on violation.
  void validate() const;

  double rhs(double t, double x) const noexcept;

  double mu_power() const noexcept { return expr::ipow(mu, 2 * m - 1); }

  FieldSpec with_mu(double new_mu) const {
    FieldSpec c = *this;
    c.mu = new_mu;
    return c;
  }

  bool saddle_node_like() const noexcept {
    if (family == Family::BlackBox) return hint != FamilyHint::TC;
    return family == Family::ConcreteSN || family == Family::GeneralSN;
  }
};

struct ExtractedCoefficients {
  std::vector<double> t;
  std::vector<double> f_hat;
  std::vector<double> f_err;
  std::vector<double> g_hat;
  std::vector<double> g_err;
};

/// Recovers the leading Taylor coefficients of a black-box G at (t, 0, 0)
/// by centered finite differences with three Richardson levels:
///
///   SN:  f = (1/(2m-1)!) d^(2m-1)G/dmu^(2m-1),
///   TC:  f = (1/(2m)!) C(2m, 2m-1) d^(2m)G/(dx dmu^(2m-1)),
///   both: g = -(1/(2n)!) d^(2n)G/dx^(2n).
///
/// Derivative orders above 8 are rejected. Throws NumericError
/// (StencilUnderflow) when the step underflows for the requested order.
ExtractedCoefficients extract_coefficients(const expr::Expression& G, int m,
                                           int n, FamilyHint hint,
                                           std::span<const double> t_samples);

}  // namespace nabif
