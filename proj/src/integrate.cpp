#include "nabif/integrate.hpp"

#include <algorithm>
#include <cmath>

namespace nabif {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// Embedded fourth-order error weights (b5 - b4).
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense output weights (Hairer's contd5).
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

// Step controller constants (PI control with beta = 0.04).
constexpr double kBeta = 0.04;
constexpr double kExpo1 = 0.2 - kBeta * 0.75;
constexpr double kSafe = 0.9;
constexpr double kFacc1 = 5.0;   // max shrink per step
constexpr double kFacc2 = 0.1;   // max growth per step (h / 0.1)

struct Rhs {
  const FieldSpec& field;
  bool reversed;

  double operator()(double tau, double x) const noexcept {
    return reversed ? -field.rhs(-tau, x) : field.rhs(tau, x);
  }
};

struct Stages {
  double k1, k2, k3, k4, k5, k6, k7;
  double x_next;
  double err_abs;  // |h * sum(e_i k_i)|
  bool finite;
};

Stages stages(const Rhs& f, double tau, double x, double h, double k1) {
  Stages s;
  s.k1 = k1;
  double xs = x + h * a21 * k1;
  s.k2 = f(tau + c2 * h, xs);
  xs = x + h * (a31 * k1 + a32 * s.k2);
  s.k3 = f(tau + c3 * h, xs);
  xs = x + h * (a41 * k1 + a42 * s.k2 + a43 * s.k3);
  s.k4 = f(tau + c4 * h, xs);
  xs = x + h * (a51 * k1 + a52 * s.k2 + a53 * s.k3 + a54 * s.k4);
  s.k5 = f(tau + c5 * h, xs);
  xs = x + h * (a61 * k1 + a62 * s.k2 + a63 * s.k3 + a64 * s.k4 + a65 * s.k5);
  s.k6 = f(tau + h, xs);
  s.x_next =
      x + h * (a71 * k1 + a73 * s.k3 + a74 * s.k4 + a75 * s.k5 + a76 * s.k6);
  s.k7 = f(tau + h, s.x_next);  // FSAL
  const double e = h * (e1 * k1 + e3 * s.k3 + e4 * s.k4 + e5 * s.k5 +
                        e6 * s.k6 + e7 * s.k7);
  s.err_abs = std::fabs(e);
  s.finite = std::isfinite(s.x_next) && std::isfinite(s.err_abs) &&
             std::isfinite(s.k7);
  return s;
}

struct DenseCoeffs {
  double r1, r2, r3, r4, r5;

  double eval(double theta) const noexcept {
    const double theta1 = 1.0 - theta;
    return r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
  }
};

DenseCoeffs dense_coeffs(double x0, double x1, double h, const Stages& s) {
  DenseCoeffs d;
  d.r1 = x0;
  d.r2 = x1 - x0;
  d.r3 = h * s.k1 - d.r2;
  d.r4 = d.r2 - h * s.k7 - d.r3;
  d.r5 = h * (d1 * s.k1 + d3 * s.k3 + d4 * s.k4 + d5 * s.k5 + d6 * s.k6 +
              d7 * s.k7);
  return d;
}

double initial_step(const Rhs& f, double tau0, double x0, double k1,
                    double hmax, const Tolerances& tol) {
  const double sk = tol.abs + tol.rel * std::fabs(x0);
  const double dn0 = std::fabs(x0) / sk;
  const double dn1 = std::fabs(k1) / sk;
  double h0 = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
  h0 = std::min(h0, hmax);
  const double k2 = f(tau0 + h0, x0 + h0 * k1);
  double d2 = std::fabs(k2 - k1) / sk / h0;
  if (!std::isfinite(d2)) d2 = 1e30;
  const double der = std::max(d2, dn1);
  const double h1 = der <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                 : std::pow(0.01 / der, 0.2);
  return std::min({100.0 * h0, h1, hmax});
}

double min_step_floor(double tau) noexcept {
  return 1e-13 * std::max(1.0, std::fabs(tau));
}

}  // namespace

DormandPrinceStep dopri5_step(const FieldSpec& field, double t, double x,
                              double h) {
  const Rhs f{field, false};
  const Stages s = stages(f, t, x, h, f(t, x));
  return {s.x_next, s.err_abs};
}

Trajectory advance(const FieldSpec& field, double s, double x0, double t_end,
                   const IntegrateOptions& opts) {
  Trajectory traj;
  const auto record_sample = [&](double t, double x) {
    if (opts.record) {
      traj.t.push_back(t);
      traj.x.push_back(x);
    }
  };

  record_sample(s, x0);
  if (t_end == s) {
    if (!opts.record) {
      traj.t.push_back(s);
      traj.x.push_back(x0);
    }
    return traj;
  }

  // Backward runs integrate the time-reversed field forward in tau = -t.
  const bool reversed = t_end < s;
  const Rhs f{field, reversed};
  const auto map_time = [reversed](double tau) { return reversed ? -tau : tau; };
  const double tau0 = reversed ? -s : s;
  const double tau_end = reversed ? -t_end : t_end;
  const double hmax = tau_end - tau0;

  double tau = tau0;
  double x = x0;
  double k1 = f(tau, x);
  double h = std::isfinite(k1) ? initial_step(f, tau, x, k1, hmax, opts.tol)
                               : min_step_floor(tau) * 64.0;
  double facold = 1e-4;

  const auto finish_last_sample = [&](double t, double x_val) {
    // The start sample was recorded unconditionally only when recording;
    // endpoint must exist for both modes.
    traj.t.push_back(t);
    traj.x.push_back(x_val);
  };

  for (;;) {
    if (traj.stats.steps >= opts.max_steps) {
      traj.outcome.kind = OutcomeKind::StepFailure;
      traj.outcome.t_fail = map_time(tau);
      finish_last_sample(map_time(tau), x);
      return traj;
    }
    if (h < min_step_floor(tau)) {
      // The step collapsed below the resolvable floor. For superlinear
      // escapes (x' ~ x^2n) this happens while |x| is still far below the
      // blow-up threshold, because the crossing time shrinks like x^-(2n-1).
      // When the local e-fold time already fits inside the bracketing
      // tolerance the escape is certain: report the blow-up instead of a
      // step failure.
      const double gval = f(tau, x);
      const double efold = std::fabs(x / gval);
      const bool outward = x * gval > 0.0;
      const bool escaped = std::fabs(x) >= 100.0 * std::max(1.0, std::fabs(x0));
      if (outward && escaped && std::isfinite(gval) &&
          efold <= 1e-6 * std::max(1.0, std::fabs(tau))) {
        const double t_lo = map_time(tau);
        const double t_hi = map_time(tau + efold);
        traj.outcome.kind = OutcomeKind::BlowUp;
        traj.outcome.t_star = 0.5 * (t_lo + t_hi);
        traj.outcome.bracket_lo = std::min(t_lo, t_hi);
        traj.outcome.bracket_hi = std::max(t_lo, t_hi);
        traj.outcome.sign = x > 0 ? 1 : -1;
        // Last sample marks the certified threshold crossing.
        finish_last_sample(t_hi,
                           std::copysign(opts.blowup_threshold, x));
        return traj;
      }
      traj.outcome.kind = OutcomeKind::StepFailure;
      traj.outcome.t_fail = map_time(tau);
      finish_last_sample(map_time(tau), x);
      return traj;
    }

    const bool reaches_end = tau + h >= tau_end;
    const Stages st = stages(f, tau, x, h, k1);
    ++traj.stats.steps;

    if (!st.finite) {
      ++traj.stats.rejections;
      h *= 0.25;
      continue;
    }

    const double sk =
        opts.tol.abs + opts.tol.rel * std::max(std::fabs(x), std::fabs(st.x_next));
    const double err = st.err_abs / sk;
    const double fac11 = std::pow(err, kExpo1);

    if (err <= 1.0) {
      // Accepted.
      facold = std::max(err, 1e-4);
      traj.stats.min_step = std::min(traj.stats.min_step, h);
      const DenseCoeffs dense = dense_coeffs(x, st.x_next, h, st);

      // Blow-up crossing inside this step?
      if (std::fabs(st.x_next) >= opts.blowup_threshold) {
        double lo = 0.0, hi = 1.0;
        while ((hi - lo) * h >
               1e-6 * std::max(1.0, std::fabs(tau + 0.5 * (lo + hi) * h))) {
          const double mid = 0.5 * (lo + hi);
          if (std::fabs(dense.eval(mid)) >= opts.blowup_threshold) {
            hi = mid;
          } else {
            lo = mid;
          }
        }
        const double t_lo = map_time(tau + lo * h);
        const double t_hi = map_time(tau + hi * h);
        traj.outcome.kind = OutcomeKind::BlowUp;
        traj.outcome.t_star = 0.5 * (t_lo + t_hi);
        traj.outcome.bracket_lo = std::min(t_lo, t_hi);
        traj.outcome.bracket_hi = std::max(t_lo, t_hi);
        const double x_cross = dense.eval(hi);
        traj.outcome.sign = x_cross > 0 ? 1 : -1;
        finish_last_sample(map_time(tau + hi * h), x_cross);
        return traj;
      }

      if (reaches_end) {
        // Dense interpolation of the final step at t_end.
        const double theta = (tau_end - tau) / h;
        finish_last_sample(map_time(tau_end), dense.eval(theta));
        return traj;
      }

      tau += h;
      x = st.x_next;
      k1 = st.k7;
      record_sample(map_time(tau), x);

      double fac = fac11 / std::pow(facold, kBeta);
      fac = std::max(kFacc2, std::min(kFacc1, fac / kSafe));
      double hnew = h / fac;
      if (hnew > hmax) hnew = hmax;
      h = hnew;
    } else {
      ++traj.stats.rejections;
      h = h / std::min(kFacc1, fac11 / kSafe);
    }
  }
}

ProcessResult process(const FieldSpec& field, double t, double s, double x0,
                      const IntegrateOptions& opts) {
  IntegrateOptions o = opts;
  o.record = false;
  const Trajectory traj = advance(field, s, x0, t, o);
  ProcessResult r;
  r.kind = traj.outcome.kind;
  r.outcome = traj.outcome;
  r.stats = traj.stats;
  r.value = traj.x.back();
  return r;
}

BlowUpResult detect_blowup(const FieldSpec& field, double s, double x0,
                           double t_max, const IntegrateOptions& opts) {
  IntegrateOptions o = opts;
  o.record = false;
  const Trajectory traj = advance(field, s, x0, t_max, o);
  BlowUpResult r;
  switch (traj.outcome.kind) {
    case OutcomeKind::BlowUp:
      r.kind = BlowUpKind::BlowUp;
      r.t_star = traj.outcome.t_star;
      r.bracket_lo = traj.outcome.bracket_lo;
      r.bracket_hi = traj.outcome.bracket_hi;
      r.sign = traj.outcome.sign;
      break;
    case OutcomeKind::Completed:
      r.kind = BlowUpKind::NoBlowUp;
      r.x_end = traj.x.back();
      break;
    case OutcomeKind::StepFailure:
      r.kind = BlowUpKind::StepFailure;
      r.t_fail = traj.outcome.t_fail;
      break;
  }
  return r;
}

}  // namespace nabif
