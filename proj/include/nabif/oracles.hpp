#pragma once

#include "nabif/field.hpp"
#include "nabif/quadrature.hpp"

namespace nabif {

/// The unique real k-th root of y for odd k; sign(result) = sign(y).
double odd_root(double y, int k) noexcept;

struct ExactResult {
  bool blew_up{false};
  double value{0.0};   // state at the requested time (when !blew_up)
  double t_star{0.0};  // blow-up time (when blew_up)
};

/// Closed-form solution of dx/dt = -g(t) x^(2n) (the mu = 0 member of the
/// saddle-node family):
///
///   x(t) = [x0^-(2n-1) + (2n-1) Int_s^t g]^(-1/(2n-1))
///
/// For x0 < 0 the bracket can cross zero; the crossing time is located by
/// bisection and reported as a blow-up.
ExactResult exact_mu0_sn(int n, const CoefficientFunction& g, double s,
                         double t, double x0, double tol = 1e-10);

/// Closed-form solution of dx/dt = mu^(2m-1) f(t) x - g(t) x^(2n) via the
/// substitution u = x^-(2n-1). Requires f to carry an antiderivative F.
/// All exponentials are combined in log space before exponentiation; with
/// mu = 0 this reduces exactly to exact_mu0_sn.
ExactResult exact_tc(int m, int n, double mu, const CoefficientFunction& f,
                     const CoefficientFunction& g, double s, double t,
                     double x0, double tol = 1e-10);

struct OrbitEval {
  double x{0.0};
  QuadratureResult integral;  // diagnostics of the improper integral
};

/// The pullback attracting orbit of the transcritical family for mu > 0:
///
///   x_mu(t) = e^(mu^(2m-1) F(t)) / [(2n-1) Int_{-inf}^t g e^((2n-1) mu^(2m-1) F)]^(1/(2n-1))
///
/// evaluated with the shared exponential factored into the integrand.
/// Throws NumericError (TailDivergence) when the improper integral fails
/// its tail check.
OrbitEval attractor_orbit_tc(int m, int n, double mu,
                             const CoefficientFunction& f,
                             const CoefficientFunction& g, double t,
                             double tol = 1e-10);

/// Mirror orbit for mu < 0 with the integral over [t, +inf).
OrbitEval repeller_orbit_tc(int m, int n, double mu,
                            const CoefficientFunction& f,
                            const CoefficientFunction& g, double t,
                            double tol = 1e-10);

/// Finite-start pullback quotient of the transcritical family,
///
///   q(s, t) = e^(mu^(2m-1) F(s)) / [(2n-1) Int_s^t g e^((2n-1) mu^(2m-1) F)]^(1/(2n-1)),
///
/// whose liminf over s -> -inf is the lower attraction bound probed by the
/// hypothesis audit for mu <= 0.
double pullback_quotient_tc(int m, int n, double mu,
                            const CoefficientFunction& f,
                            const CoefficientFunction& g, double s, double t,
                            double tol = 1e-10);

}  // namespace nabif
