#pragma once

#include <limits>
#include <vector>

#include "nabif/field.hpp"

namespace nabif {

struct Tolerances {
  double rel{1e-9};
  double abs{1e-12};
};

enum class OutcomeKind { Completed, BlowUp, StepFailure };

struct Outcome {
  OutcomeKind kind{OutcomeKind::Completed};
  double t_star{0.0};        // BlowUp: located escape time
  double bracket_lo{0.0};    // BlowUp: bracketing interval around t_star
  double bracket_hi{0.0};
  int sign{0};               // BlowUp: escape direction
  double t_fail{0.0};        // StepFailure: where the step size underflowed
};

struct StepStats {
  long steps{0};
  long rejections{0};
  double min_step{std::numeric_limits<double>::infinity()};
};

struct Trajectory {
  std::vector<double> t;  // strictly monotone: increasing forward, decreasing backward
  std::vector<double> x;
  Outcome outcome;
  StepStats stats;

  bool completed() const noexcept { return outcome.kind == OutcomeKind::Completed; }
  double last_t() const noexcept { return t.back(); }
  double last_x() const noexcept { return x.back(); }
};

struct IntegrateOptions {
  Tolerances tol{};
  double blowup_threshold{1e8};
  bool record{true};
  long max_steps{100'000'000};
};

/// Integrates dx/dt = G(t, x, mu) from (s, x0) to t_end with the embedded
/// Dormand-Prince 5(4) pair under PI step control. t_end < s integrates the
/// time-reversed field through the substitution tau = -t, so one forward
/// code path serves both directions. The final value is taken from the
/// fourth-order dense interpolant of the last step.
Trajectory advance(const FieldSpec& field, double s, double x0, double t_end,
                   const IntegrateOptions& opts = {});

/// Endpoint-only variant of advance(); the process evaluation S(t, s) x0.
struct ProcessResult {
  OutcomeKind kind{OutcomeKind::Completed};
  double value{0.0};
  Outcome outcome;
  StepStats stats;

  bool ok() const noexcept { return kind == OutcomeKind::Completed; }
};

ProcessResult process(const FieldSpec& field, double t, double s, double x0,
                      const IntegrateOptions& opts = {});

enum class BlowUpKind { BlowUp, NoBlowUp, StepFailure };

struct BlowUpResult {
  BlowUpKind kind{BlowUpKind::NoBlowUp};
  double t_star{0.0};
  double bracket_lo{0.0};
  double bracket_hi{0.0};
  int sign{0};
  double x_end{0.0};   // NoBlowUp: state at t_max
  double t_fail{0.0};  // StepFailure
};

/// Integrates forward until |x| crosses opts.blowup_threshold; the crossing
/// is bracketed by the accepted step and refined on the dense interpolant to
/// width 1e-6 * max(1, |t*|). NoBlowUp when t_max is reached first.
BlowUpResult detect_blowup(const FieldSpec& field, double s, double x0,
                           double t_max, const IntegrateOptions& opts = {});

/// One forward Dormand-Prince step from (t, x); exposed for convergence
/// order measurements.
struct DormandPrinceStep {
  double x_next;
  double error;  // unscaled embedded-pair difference
};

DormandPrinceStep dopri5_step(const FieldSpec& field, double t, double x,
                              double h);

}  // namespace nabif
