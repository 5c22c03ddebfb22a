#include "nabif/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace nabif {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integrand g(r) e^(c F(r) - anchor_exponent).
struct WeightedG {
  const CoefficientFunction& g;
  const CoefficientFunction& f;  // provides F through anti()
  double c;
  double anchor_exponent;

  double operator()(double r) const {
    return g(r) * std::exp(c * f.anti(r) - anchor_exponent);
  }
};

// Tail integral of g e^(c(F(r) - F(end))) over (-inf, end] (direction -1)
// or [end, +inf) (direction +1). Windows double away from the finite end;
// the tail is accepted when extending it changes the value by < tol/4
// twice in a row.
QuadratureResult exp_weighted_tail(const CoefficientFunction& g,
                                   const CoefficientFunction& f, double c,
                                   double finite_end, int direction,
                                   double tol) {
  const double anchor = c * f.anti(finite_end);
  const WeightedG integrand{g, f, c, anchor};

  QuadratureResult out;
  // Start tiny so that a boundary layer of the weight at the anchored end
  // (decay length ~ 1/(c f(end))) is resolved before the windows widen.
  // The tail stop/divergence rules only engage once the windows have grown
  // past unit width; the prefix merely accumulates.
  double width = 1e-9 * std::max(1.0, std::fabs(finite_end));
  double edge = finite_end;
  int calm = 0;
  double prev_increment = kInf;
  int growth_streak = 0;
  constexpr int kMaxWindows = 140;
  for (int k = 0; k < kMaxWindows; ++k) {
    const double next = edge + direction * width;
    const QuadratureResult piece =
        direction < 0 ? quad(integrand, next, edge, tol)
                      : quad(integrand, edge, next, tol);
    out.value += piece.value;
    out.error_estimate += piece.error_estimate;
    out.evaluations += piece.evaluations;
    out.tail_truncation = next;
    if (piece.status != QuadStatus::Ok || !std::isfinite(out.value)) {
      out.status = piece.status == QuadStatus::Ok ? QuadStatus::TailDivergence
                                                  : piece.status;
      return out;
    }
    if (width >= 1.0) {
      const double inc = std::fabs(piece.value);
      if (inc < 0.25 * tol * std::max(1.0, std::fabs(out.value))) {
        if (++calm >= 2) return out;
      } else {
        calm = 0;
      }
      if (inc >= prev_increment && inc > tol) {
        if (++growth_streak >= 8) {
          out.status = QuadStatus::TailDivergence;
          return out;
        }
      } else {
        growth_streak = 0;
      }
      prev_increment = inc;
    }
    edge = next;
    width *= 2.0;
  }
  out.status = QuadStatus::TailDivergence;
  return out;
}

// Largest value of c F(r) over [a, b], sampled at the endpoints and 255
// interior points. Used to pull the dominating exponential out of the
// integral before any exp() is taken.
double max_exponent(const CoefficientFunction& f, double c, double a,
                    double b) {
  double emax = -kInf;
  constexpr int kSamples = 256;
  for (int i = 0; i <= kSamples; ++i) {
    const double r = a + (b - a) * (static_cast<double>(i) / kSamples);
    emax = std::max(emax, c * f.anti(r));
  }
  return emax;
}

double orbit_from_integral(double c_f_anchor, double estar, double integral,
                           int two_n_minus_1) {
  // x = exp((cF(anchor) - E* - log((2n-1) I)) / (2n-1)) with c = (2n-1) mu^..;
  // the anchor exponent cancels exactly when E* is taken at the anchor.
  const double log_u = std::log(static_cast<double>(two_n_minus_1) * integral) +
                       estar - c_f_anchor;
  return std::exp(-log_u / two_n_minus_1);
}

}  // namespace

double odd_root(double y, int k) noexcept {
  if (y == 0.0) return 0.0;
  return std::copysign(std::pow(std::fabs(y), 1.0 / k), y);
}

namespace {

// Shared accumulation walk of the substituted linear solution:
//
//   A(tau) = a0 + p Int_s^tau integrand,   u(tau) = A(tau) e^(E* - cF(tau)),
//
// advanced over windows doubling away from s. A zero crossing of A is a
// zero crossing of u and therefore a blow-up of x = u^(-1/p); the crossing
// is refined by bisection with local quadratures. Otherwise the state is
// recovered in log space: |x| = exp(-(log|A| + E* - cF(t)) / p).
ExactResult bernoulli_walk(int p, const std::function<double(double)>& integrand,
                           double a0, double s, double t, double estar,
                           double cf_at_t, double tol) {
  ExactResult res;
  double a_acc = a0;
  double edge = s;
  double width = std::max(1e-12, 1e-9 * (t - s));
  bool crossed = false;
  double cross_lo = s, cross_hi = t, a_at_lo = a_acc;
  while (edge < t) {
    const double next = std::min(t, edge + width);
    const double piece = p * quad_value(quad(integrand, edge, next, tol));
    const double a_next = a_acc + piece;
    if (a_acc != 0.0 && a_next != 0.0 && (a_next > 0) != (a_acc > 0)) {
      crossed = true;
      cross_lo = edge;
      cross_hi = next;
      a_at_lo = a_acc;
      a_acc = a_next;
      break;
    }
    a_acc = a_next;
    edge = next;
    width *= 2.0;
  }
  if (!crossed) {
    const double log_u = std::log(std::fabs(a_acc)) + estar - cf_at_t;
    const double magnitude = std::exp(-log_u / p);
    res.value = a_acc > 0 ? magnitude : -magnitude;
    return res;
  }
  double lo = cross_lo, hi = cross_hi;
  double a_lo = a_at_lo;
  for (int iter = 0; iter < 200; ++iter) {
    if (hi - lo <= 1e-10 * std::max(1.0, std::fabs(lo))) break;
    const double mid = 0.5 * (lo + hi);
    const double a_mid = a_lo + p * quad_value(quad(integrand, lo, mid, tol));
    if (a_mid != 0.0 && (a_mid > 0) == (a_lo > 0)) {
      lo = mid;
      a_lo = a_mid;
    } else {
      hi = mid;
    }
  }
  res.blew_up = true;
  res.t_star = 0.5 * (lo + hi);
  return res;
}

}  // namespace

ExactResult exact_mu0_sn(int n, const CoefficientFunction& g, double s,
                         double t, double x0, double tol) {
  ExactResult res;
  if (x0 == 0.0) {
    res.value = 0.0;  // the zero solution is invariant
    return res;
  }
  if (t < s) {
    throw BindError("exact_mu0_sn is defined for t >= s");
  }
  const int p = 2 * n - 1;
  const auto integrand = [&g](double r) { return g(r); };
  const double a0 = expr::ipow(1.0 / x0, p);
  return bernoulli_walk(p, integrand, a0, s, t, 0.0, 0.0, tol);
}

ExactResult exact_tc(int m, int n, double mu, const CoefficientFunction& f,
                     const CoefficientFunction& g, double s, double t,
                     double x0, double tol) {
  ExactResult res;
  if (x0 == 0.0) {
    res.value = 0.0;
    return res;
  }
  if (!f.has_antiderivative()) {
    throw BindError("exact_tc requires f to carry an antiderivative");
  }
  if (t < s) {
    throw BindError("exact_tc is defined for t >= s");
  }
  const int p = 2 * n - 1;
  const double c = p * expr::ipow(mu, 2 * m - 1);
  const double estar = max_exponent(f, c, s, t);
  const WeightedG integrand{g, f, c, estar};
  const double a0 = expr::ipow(1.0 / x0, p) * std::exp(c * f.anti(s) - estar);
  return bernoulli_walk(
      p, [&integrand](double r) { return integrand(r); }, a0, s, t, estar,
      c * f.anti(t), tol);
}

OrbitEval attractor_orbit_tc(int m, int n, double mu,
                             const CoefficientFunction& f,
                             const CoefficientFunction& g, double t,
                             double tol) {
  if (!f.has_antiderivative()) {
    throw BindError("attractor_orbit_tc requires f to carry an antiderivative");
  }
  const int p = 2 * n - 1;
  const double c = p * expr::ipow(mu, 2 * m - 1);
  OrbitEval out;
  out.integral = exp_weighted_tail(g, f, c, t, -1, tol);
  if (out.integral.status == QuadStatus::TailDivergence) {
    throw NumericError(NumericErrorKind::TailDivergence,
                       "attractor orbit integral fails its tail check");
  }
  if (out.integral.status == QuadStatus::NoConvergence) {
    throw NumericError(NumericErrorKind::NoConvergence,
                       "attractor orbit integral did not converge");
  }
  const double cfa = c * f.anti(t);
  out.x = orbit_from_integral(cfa, cfa, out.integral.value, p);
  return out;
}

OrbitEval repeller_orbit_tc(int m, int n, double mu,
                            const CoefficientFunction& f,
                            const CoefficientFunction& g, double t,
                            double tol) {
  if (!f.has_antiderivative()) {
    throw BindError("repeller_orbit_tc requires f to carry an antiderivative");
  }
  const int p = 2 * n - 1;
  const double c = p * expr::ipow(mu, 2 * m - 1);
  OrbitEval out;
  out.integral = exp_weighted_tail(g, f, c, t, +1, tol);
  if (out.integral.status == QuadStatus::TailDivergence) {
    throw NumericError(NumericErrorKind::TailDivergence,
                       "repeller orbit integral fails its tail check");
  }
  if (out.integral.status == QuadStatus::NoConvergence) {
    throw NumericError(NumericErrorKind::NoConvergence,
                       "repeller orbit integral did not converge");
  }
  const double cfa = c * f.anti(t);
  out.x = orbit_from_integral(cfa, cfa, out.integral.value, p);
  return out;
}

double pullback_quotient_tc(int m, int n, double mu,
                            const CoefficientFunction& f,
                            const CoefficientFunction& g, double s, double t,
                            double tol) {
  if (!f.has_antiderivative()) {
    throw BindError("pullback_quotient_tc requires f to carry an antiderivative");
  }
  if (t <= s) {
    throw BindError("pullback_quotient_tc is defined for s < t");
  }
  const int p = 2 * n - 1;
  const double c = p * expr::ipow(mu, 2 * m - 1);
  // For mu <= 0 the weight is anchored (and maximal) at r = s, with a sharp
  // boundary layer when |c f(s)| is large; walk the interval in windows
  // doubling away from s so the layer is resolved.
  const double estar = c * f.anti(s);
  const WeightedG integrand{g, f, c, estar};
  double integral = 0.0;
  double edge = s;
  double width = std::max(1e-12, 1e-9 * (t - s));
  while (edge < t) {
    const double next = std::min(t, edge + width);
    integral += quad_value(quad(integrand, edge, next, tol));
    edge = next;
    width *= 2.0;
  }
  const double log_u = std::log(p * integral);
  return std::exp(-log_u / p);
}

}  // namespace nabif
