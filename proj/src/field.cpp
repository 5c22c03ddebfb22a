#include "nabif/field.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace nabif {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_t_only(const expr::Expression& e, const std::string& slot) {
  if (e.uses_x() || e.uses_mu()) {
    std::string vars;
    if (e.uses_x()) vars += "x";
    if (e.uses_mu()) vars += vars.empty() ? "mu" : ", mu";
    throw BindError(slot + " must be a function of t alone but mentions " +
                    vars + ": " + e.str());
  }
}

constexpr std::array<double, 7> kAnchorSamples{-10.0, -3.0, -1.0, 0.0,
                                               1.0,   3.0,  10.0};

}  // namespace

CoefficientFunction CoefficientFunction::make(
    expr::Expression body, std::optional<expr::Expression> antiderivative,
    const std::string& slot_name) {
  require_t_only(body, slot_name);
  if (antiderivative) require_t_only(*antiderivative, slot_name + " antiderivative");
  CoefficientFunction c;
  c.body_ = std::move(body);
  c.anti_ = std::move(antiderivative);
  return c;
}

CoefficientFunction CoefficientFunction::parse(
    std::string_view body_source, std::optional<std::string_view> anti_source,
    const std::string& slot_name) {
  std::optional<expr::Expression> anti;
  if (anti_source) anti = expr::Expression::parse(*anti_source);
  return make(expr::Expression::parse(body_source), std::move(anti), slot_name);
}

double CoefficientFunction::anti(double t) const {
  if (!anti_) {
    throw BindError("coefficient has no antiderivative attached");
  }
  return anti_->eval(t, 0.0, 0.0);
}

void CoefficientFunction::check_antiderivative(
    std::span<const double> t_samples) const {
  if (!anti_) return;
  for (double t : t_samples) {
    const double step = std::max(std::fabs(t), 1.0) * std::cbrt(kEps);
    const double derivative =
        (anti_->eval(t + step, 0, 0) - anti_->eval(t - step, 0, 0)) /
        (2.0 * step);
    const double expected = body_.eval(t, 0, 0);
    const double scale = std::max({1.0, std::fabs(expected)});
    if (!(std::fabs(derivative - expected) <= 1e-6 * scale)) {
      throw BindError(
          "antiderivative mismatch at t=" + std::to_string(t) +
          ": d/dt gives " + std::to_string(derivative) + ", body gives " +
          std::to_string(expected));
    }
  }
}

const char* family_name(Family f) noexcept {
  switch (f) {
    case Family::ConcreteSN: return "concrete_sn";
    case Family::ConcreteTC: return "concrete_tc";
    case Family::GeneralSN: return "general_sn";
    case Family::GeneralTC: return "general_tc";
    case Family::BlackBox: return "blackbox";
  }
  return "?";
}

void FieldSpec::validate() const {
  if (m < 1 || n < 1) {
    throw BindError("exponents m and n must be positive integers");
  }
  const auto need_coeff = [this](const std::optional<CoefficientFunction>& c,
                                 const char* slot) {
    if (!c) {
      throw BindError(std::string(family_name(family)) +
                      " field requires coefficient '" + slot + "'");
    }
  };
  const auto need_expr = [this](const std::optional<expr::Expression>& e,
                                const char* slot) {
    if (!e) {
      throw BindError(std::string(family_name(family)) +
                      " field requires expression '" + slot + "'");
    }
  };
  switch (family) {
    case Family::ConcreteSN:
    case Family::ConcreteTC:
      need_coeff(f, "f");
      need_coeff(g, "g");
      break;
    case Family::GeneralSN:
      need_coeff(f, "f");
      need_coeff(g, "g");
      need_expr(phi, "phi");
      need_expr(psi_or_r, "psi");
      break;
    case Family::GeneralTC:
      need_coeff(f, "f");
      need_coeff(g, "g");
      need_expr(phi, "phi");
      need_expr(psi_or_r, "r");
      break;
    case Family::BlackBox:
      need_expr(G, "G");
      if (!hint) {
        throw BindError("blackbox field requires a family hint (sn or tc)");
      }
      break;
  }
  // Perturbation anchoring: phi(t,0,0)=0, psi(t,0)=0 (general SN),
  // r(t,0,0)=0 (general TC), sampled over t.
  if (family == Family::GeneralSN || family == Family::GeneralTC) {
    for (double t : kAnchorSamples) {
      const double pv = phi->eval(t, 0.0, 0.0);
      if (!(std::fabs(pv) <= 1e-9)) {
        throw BindError("perturbation phi is not anchored: phi(" +
                        std::to_string(t) + ",0,0) = " + std::to_string(pv));
      }
      const double qv = psi_or_r->eval(t, 0.0, 0.0);
      if (!(std::fabs(qv) <= 1e-9)) {
        const char* slot = family == Family::GeneralSN ? "psi" : "r";
        const char* args = family == Family::GeneralSN ? ",0" : ",0,0";
        throw BindError(std::string("perturbation ") + slot +
                        " is not anchored: " + slot + "(" + std::to_string(t) +
                        args + ") = " + std::to_string(qv));
      }
    }
  }
  if (f) f->check_antiderivative(kAnchorSamples);
}

double FieldSpec::rhs(double t, double x) const noexcept {
  const double mp = mu_power();
  switch (family) {
    case Family::ConcreteSN:
      return mp * (*f)(t) - (*g)(t) * expr::ipow(x, 2 * n);
    case Family::ConcreteTC:
      return mp * (*f)(t) * x - (*g)(t) * expr::ipow(x, 2 * n);
    case Family::GeneralSN:
      return mp * ((*f)(t) + phi->eval(t, x, mu)) -
             expr::ipow(x, 2 * n) * ((*g)(t) + psi_or_r->eval(t, x, mu));
    case Family::GeneralTC:
      return mp * ((*f)(t) + mu * phi->eval(t, x, mu)) * x -
             ((*g)(t) + psi_or_r->eval(t, x, mu)) * expr::ipow(x, 2 * n);
    case Family::BlackBox:
      return G->eval(t, x, mu);
  }
  return 0.0;
}

namespace {

double factorial(int k) {
  double v = 1.0;
  for (int i = 2; i <= k; ++i) v *= i;
  return v;
}

double binomial(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

// Central difference of order `order` with O(h^2) accuracy; nodes sit at
// (order/2 - i) h, half-integer offsets when the order is odd.
template <class F>
double central_difference(const F& fn, int order, double h) {
  double sum = 0.0;
  double sign = 1.0;
  for (int i = 0; i <= order; ++i) {
    const double offset = (0.5 * order - i) * h;
    sum += sign * binomial(order, i) * fn(offset);
    sign = -sign;
  }
  const double hp = expr::ipow(h, order);
  if (hp == 0.0 || !std::isfinite(hp)) {
    throw NumericError(NumericErrorKind::StencilUnderflow,
                       "finite-difference step underflowed for order " +
                           std::to_string(order));
  }
  return sum / hp;
}

struct DiffEstimate {
  double value;
  double error;
};

// Three Richardson levels over the h^2 error expansion of the central
// difference. The reported error is the gap between the last two levels.
template <class F>
DiffEstimate richardson(const F& fn, int order, double h) {
  const double a0 = central_difference(fn, order, h);
  const double a1 = central_difference(fn, order, 0.5 * h);
  const double a2 = central_difference(fn, order, 0.25 * h);
  const double r1a = (4.0 * a1 - a0) / 3.0;
  const double r1b = (4.0 * a2 - a1) / 3.0;
  const double r2 = (16.0 * r1b - r1a) / 15.0;
  const double scale = std::max(1.0, std::fabs(r2));
  double err = std::fabs(r2 - r1b);
  err = std::max(err, 32.0 * kEps * scale);
  return {r2, err};
}

double diff_step(int order, double t_scale) {
  return std::max(std::fabs(t_scale), 1.0) *
         std::pow(kEps, 1.0 / (order + 2));
}

}  // namespace

ExtractedCoefficients extract_coefficients(const expr::Expression& G, int m,
                                           int n, FamilyHint hint,
                                           std::span<const double> t_samples) {
  const int mu_order = 2 * m - 1;
  const int x_order = 2 * n;
  const int f_order = hint == FamilyHint::SN ? mu_order : mu_order + 1;
  if (mu_order > 8 || x_order > 8 || f_order > 8) {
    throw BindError("extraction supports derivative orders up to 8 (got m=" +
                    std::to_string(m) + ", n=" + std::to_string(n) + ")");
  }

  ExtractedCoefficients out;
  for (double t : t_samples) {
    const double hx = diff_step(x_order, t);
    const double hmu = diff_step(f_order, t);

    DiffEstimate fe{};
    if (hint == FamilyHint::SN) {
      // f = (1/(2m-1)!) d^(2m-1)/dmu^(2m-1) G(t,0,0)
      const auto slice = [&](double dmu) { return G.eval(t, 0.0, dmu); };
      fe = richardson(slice, mu_order, hmu);
      fe.value /= factorial(mu_order);
      fe.error /= factorial(mu_order);
    } else {
      // f = (1/(2m)!) C(2m,2m-1) d^(2m)/(dx dmu^(2m-1)) G(t,0,0);
      // tensor-product stencil: first order in x, 2m-1 in mu.
      const auto mixed = [&](double h) {
        double sum = 0.0;
        double sign = 1.0;
        for (int i = 0; i <= mu_order; ++i) {
          const double dmu = (0.5 * mu_order - i) * h;
          const double dx = 0.5 * h;
          const double slice =
              (G.eval(t, dx, dmu) - G.eval(t, -dx, dmu)) / h;
          sum += sign * binomial(mu_order, i) * slice;
          sign = -sign;
        }
        const double hp = expr::ipow(h, mu_order);
        if (hp == 0.0 || !std::isfinite(hp)) {
          throw NumericError(NumericErrorKind::StencilUnderflow,
                             "finite-difference step underflowed");
        }
        return sum / hp;
      };
      const double a0 = mixed(hmu);
      const double a1 = mixed(0.5 * hmu);
      const double a2 = mixed(0.25 * hmu);
      const double r1a = (4.0 * a1 - a0) / 3.0;
      const double r1b = (4.0 * a2 - a1) / 3.0;
      const double r2 = (16.0 * r1b - r1a) / 15.0;
      fe.value = r2 * binomial(2 * m, 2 * m - 1) / factorial(2 * m);
      fe.error = std::max(std::fabs(r2 - r1b), 32.0 * kEps) *
                 binomial(2 * m, 2 * m - 1) / factorial(2 * m);
    }

    const auto x_slice = [&](double dx) { return G.eval(t, dx, 0.0); };
    DiffEstimate ge = richardson(x_slice, x_order, hx);
    ge.value = -ge.value / factorial(x_order);
    ge.error /= factorial(x_order);

    if (!std::isfinite(fe.value) || !std::isfinite(ge.value)) {
      throw NonFiniteError(G.str(), "extraction at t=" + std::to_string(t));
    }

    out.t.push_back(t);
    out.f_hat.push_back(fe.value);
    out.f_err.push_back(fe.error);
    out.g_hat.push_back(ge.value);
    out.g_err.push_back(ge.error);
  }
  return out;
}

}  // namespace nabif
