#include "nabif/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace nabif {

namespace {

// Kronrod 15-point nodes on [0, 1] with the embedded Gauss 7 rule on the
// even-index nodes (QUADPACK values).
constexpr int kPoints = 8;
constexpr double kNode[kPoints] = {
    0.991455371120812639206854697526,
    0.949107912342758524526189684048,
    0.864864423359769072789712788641,
    0.741531185599394439863864773281,
    0.586087235467691130294144838259,
    0.405845151377397166906606412077,
    0.207784955007898467600689403773,
    0.0,
};
constexpr double kWeightK[kPoints] = {
    0.022935322010529224963732008059,
    0.063092092629978553290700663189,
    0.104790010322250183839876322542,
    0.140653259715525918745189590510,
    0.169004726639267902826583426599,
    0.190350578064785409913256402421,
    0.204432940075298892414161999235,
    0.209482141084727828012999174892,
};
constexpr double kWeightG[4] = {
    0.129484966168869693270611432679,
    0.279705391489276667901467771424,
    0.381830050505118944950369775489,
    0.417959183673469387755102040816,
};

struct Panel {
  double a, b;
  double value;
  double error;
};

struct GkState {
  long evaluations{0};
};

Panel gk15(const std::function<double(double)>& fn, double a, double b,
           GkState& st) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum_k = 0.0;
  double sum_g = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    double y;
    if (kNode[i] == 0.0) {
      y = fn(center);
      ++st.evaluations;
    } else {
      const double dx = half * kNode[i];
      y = fn(center + dx) + fn(center - dx);
      st.evaluations += 2;
    }
    sum_k += kWeightK[i] * y;
    // Gauss nodes are the odd-index Kronrod nodes plus the center.
    if (i % 2 == 1) sum_g += kWeightG[i / 2] * y;
  }
  Panel p;
  p.a = a;
  p.b = b;
  p.value = sum_k * half;
  double diff = std::fabs((sum_k - sum_g) * half);
  p.error = diff;
  // QUADPACK-style sharpened estimate.
  if (diff > 0.0) p.error = std::pow(200.0 * diff, 1.5);
  if (!std::isfinite(p.error) || p.error < diff) p.error = diff;
  return p;
}

constexpr int kMaxPanels = 4096;

// Adaptive refinement over a finite interval; worst panel split first.
QuadratureResult adapt_finite(const std::function<double(double)>& fn,
                              double a, double b, double tol, GkState& st) {
  QuadratureResult out;
  if (a == b) return out;
  std::vector<Panel> panels;
  panels.push_back(gk15(fn, a, b, st));
  double total = panels[0].value;
  double err = panels[0].error;
  for (;;) {
    if (!std::isfinite(total) || !std::isfinite(err)) {
      out.value = total;
      out.error_estimate = err;
      out.status = QuadStatus::NoConvergence;
      out.evaluations = st.evaluations;
      return out;
    }
    if (err <= tol * std::max(1.0, std::fabs(total)) ||
        panels.size() >= kMaxPanels) {
      out.value = total;
      out.error_estimate = err;
      out.evaluations = st.evaluations;
      if (err > tol * std::max(1.0, std::fabs(total))) {
        out.status = QuadStatus::NoConvergence;
      }
      return out;
    }
    std::size_t worst = 0;
    for (std::size_t i = 1; i < panels.size(); ++i) {
      if (panels[i].error > panels[worst].error) worst = i;
    }
    Panel p = panels[worst];
    const double mid = 0.5 * (p.a + p.b);
    if (mid <= p.a || mid >= p.b) {
      // Interval collapsed to rounding; keep its contribution as is.
      err -= panels[worst].error;
      panels[worst].error = 0.0;
      continue;
    }
    const Panel left = gk15(fn, p.a, mid, st);
    const Panel right = gk15(fn, mid, p.b, st);
    total += left.value + right.value - p.value;
    err += left.error + right.error - p.error;
    panels[worst] = left;
    panels.push_back(right);
  }
}

// Tail over r in [cut, +inf) for positive direction (or (-inf, -cut] for
// negative), via u = 1/(1+r): r = 1/u - 1, dr = -du/u^2, with doubling
// cutoff windows in u. `cut` must be >= 0.
struct TailOutcome {
  double value{0.0};
  double error{0.0};
  double final_cut{0.0};
  QuadStatus status{QuadStatus::Ok};
};

TailOutcome tail_integral(const std::function<double(double)>& fn, double cut,
                          int direction, double tol, GkState& st) {
  TailOutcome out;
  const auto fu = [&fn, direction](double u) {
    const double r = 1.0 / u - 1.0;
    const double y = fn(direction > 0 ? r : -r);
    return y / (u * u);
  };
  double u_hi = 1.0 / (1.0 + cut);
  out.final_cut = cut;
  int calm = 0;
  double prev_increment = std::numeric_limits<double>::infinity();
  int growth_streak = 0;
  constexpr int kMaxWindows = 64;
  for (int k = 0; k < kMaxWindows; ++k) {
    const double u_lo = 0.5 * u_hi;
    const QuadratureResult piece =
        adapt_finite(fu, u_lo, u_hi, tol * 0.25, st);
    // f is integrated in decreasing r direction through u; orientation of
    // the u-interval already accounts for the sign of dr.
    out.value += piece.value;
    out.error += piece.error_estimate;
    out.final_cut = 1.0 / u_lo - 1.0;
    const double inc = std::fabs(piece.value);
    if (!std::isfinite(out.value)) {
      out.status = QuadStatus::TailDivergence;
      return out;
    }
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
    u_hi = u_lo;
  }
  out.status = QuadStatus::TailDivergence;
  return out;
}

}  // namespace

QuadratureResult quad(const std::function<double(double)>& fn, double a,
                      double b, double tol) {
  GkState st;
  const bool inf_a = std::isinf(a);
  const bool inf_b = std::isinf(b);
  if (!inf_a && !inf_b) {
    double sign = 1.0;
    if (a > b) {
      std::swap(a, b);
      sign = -1.0;
    }
    QuadratureResult r = adapt_finite(fn, a, b, tol, st);
    r.value *= sign;
    r.evaluations = st.evaluations;
    return r;
  }

  QuadratureResult out;
  // Finite core between the cut points; tails beyond.
  const double core_lo = inf_a ? std::min(b, 0.0) - 1.0 : a;
  const double core_hi = inf_b ? std::max(a, 0.0) + 1.0 : b;
  if (inf_a && inf_b) {
    // split at 0 with cores [-1, 0] and [0, 1]
  }
  double value = 0.0, error = 0.0;
  if (core_hi > core_lo) {
    QuadratureResult core = adapt_finite(fn, core_lo, core_hi, tol, st);
    value += core.value;
    error += core.error_estimate;
    if (core.status != QuadStatus::Ok) out.status = core.status;
  }
  if (inf_a) {
    TailOutcome tail = tail_integral(fn, std::fabs(core_lo), -1, tol, st);
    value += tail.value;
    error += tail.error;
    out.tail_truncation = -tail.final_cut;
    if (tail.status != QuadStatus::Ok) out.status = tail.status;
  }
  if (inf_b) {
    TailOutcome tail = tail_integral(fn, std::fabs(core_hi), +1, tol, st);
    value += tail.value;
    error += tail.error;
    out.tail_truncation = tail.final_cut;
    if (tail.status != QuadStatus::Ok) out.status = tail.status;
  }
  out.value = value;
  out.error_estimate = error;
  out.evaluations = st.evaluations;
  return out;
}

double quad_value(const QuadratureResult& r) {
  if (r.status == QuadStatus::NoConvergence) {
    throw NumericError(NumericErrorKind::NoConvergence,
                       "quadrature failed to converge");
  }
  if (r.status == QuadStatus::TailDivergence) {
    throw NumericError(NumericErrorKind::TailDivergence,
                       "improper integral tail failed its extension check");
  }
  return r.value;
}

}  // namespace nabif
