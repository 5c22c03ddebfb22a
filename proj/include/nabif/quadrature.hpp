#pragma once

#include <functional>

#include "nabif/errors.hpp"

namespace nabif {

enum class QuadStatus { Ok, NoConvergence, TailDivergence };

struct QuadratureResult {
  double value{0.0};
  double error_estimate{0.0};
  /// Finite cutoff substituted for an infinite endpoint (0 when both
  /// endpoints were finite).
  double tail_truncation{0.0};
  long evaluations{0};
  QuadStatus status{QuadStatus::Ok};

  bool ok() const noexcept { return status == QuadStatus::Ok; }
};

/// Adaptive Gauss–Kronrod (G7,K15) integration of fn over [a, b].
///
/// a may be -inf and/or b may be +inf. Infinite tails are mapped through
/// the monotone substitution u = 1/(1+|r|) and integrated over doubling
/// cutoff windows; the tail is accepted once extending the cutoff changes
/// the value by less than tol/4 twice in a row. A tail that keeps growing
/// instead reports TailDivergence (the expected answer when probing a
/// divergent improper integral, not a fault).
///
/// The target accuracy is tol * max(1, |result|).
QuadratureResult quad(const std::function<double(double)>& fn, double a,
                      double b, double tol = 1e-10);

/// Throws NumericError unless r.status == Ok; returns r.value.
double quad_value(const QuadratureResult& r);

}  // namespace nabif
