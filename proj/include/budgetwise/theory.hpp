#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "budgetwise/core.hpp"
#include "budgetwise/errors.hpp"
#include "budgetwise/normal.hpp"
#include "budgetwise/planner.hpp"

namespace budgetwise {

/// A leading-order risk bound together with its ingredients. `budget` holds
/// the plan's actual spend c'n, so recombining the components reproduces
/// `leading_term` exactly rather than up to integer-rounding slack.
struct BoundReport {
  double leading_term;
  double avg_cost;
  double discrepancy;
  double budget;
  double sigma2;
  int k;
};

namespace detail {

/// Integrand of the truncated-normal variance integral,
/// (phi(x+C) - phi(x-C))^2 / (Phi(x+C) - Phi(x-C)), for x >= 0. Even in x.
inline double truncnorm_integrand(double x, double c) {
  if (x == 0.0) return 0.0;
  const double u = x - c;
  const double v = x + c;
  // phi(v)/phi(u) = exp(-2xc), so |phi(v)-phi(u)| = phi(u)(1 - exp(-2xc)).
  const double one_minus_ratio = -std::expm1(-2.0 * x * c);
  if (u <= 35.0) {
    const double denom = 0.5 * (std::erfc(u * kInvSqrt2) - std::erfc(v * kInvSqrt2));
    if (denom <= 0.0) return 0.0;
    const double amp = norm_pdf(u) * one_minus_ratio;
    return amp * amp / denom;
  }
  // Far tail: the erfc difference underflows, so switch to the Mills-ratio
  // series Phi(-t) ~ phi(t)(1/t - 1/t^3 + 3/t^5) and work in log space.
  auto mills = [](double t) {
    const double t2 = t * t;
    return (1.0 - 1.0 / t2 + 3.0 / (t2 * t2)) / t;
  };
  const double ratio = std::exp(-2.0 * x * c);
  const double denom_factor = mills(u) - ratio * mills(v);
  if (denom_factor <= 0.0) return 0.0;
  const double log_f = -0.5 * u * u - 0.5 * std::log(2.0 * 3.14159265358979323846) +
                       2.0 * std::log(one_minus_ratio) - std::log(denom_factor);
  return std::exp(log_f);
}

inline double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson(double a, double b, double fa, double fm, double fb,
                               double whole, double tol, int depth, double c) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = truncnorm_integrand(lm, c);
  const double frm = truncnorm_integrand(rm, c);
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, c) +
         adaptive_simpson(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, c);
}

}  // namespace detail

/// Numerically evaluates int_R (phi(x+C)-phi(x-C))^2 / (Phi(x+C)-Phi(x-C)) dx
/// by doubling the [0, C+40] half-line integral (the integrand is even and
/// decays super-exponentially past x = C; the discarded tail is < 1e-100).
/// The integrand has a plateau of width ~6 around x = C that sparse initial
/// samples would miss, so the domain is split there before going adaptive.
inline double truncnorm_integral(double c, double tol = 1e-8) {
  if (!(c > 0.0)) throw DomainError("truncnorm_integral requires C > 0");
  std::vector<double> knots{0.0};
  if (c - 6.0 > 0.0) knots.push_back(c - 6.0);
  knots.push_back(c + 6.0);
  knots.push_back(c + 40.0);
  const double piece_tol = 0.5 * tol / static_cast<double>(knots.size() - 1);

  double half = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a = knots[i];
    const double b = knots[i + 1];
    const double fa = detail::truncnorm_integrand(a, c);
    const double fb = detail::truncnorm_integrand(b, c);
    const double fm = detail::truncnorm_integrand(0.5 * (a + b), c);
    const double whole = detail::simpson(fa, fm, fb, b - a);
    half += detail::adaptive_simpson(a, b, fa, fm, fb, whole, piece_tol, 60, c);
  }
  return 2.0 * half;
}

/// Expected posterior variance of a bounded mean under the truncated-normal
/// posterior: (sigma^2/n)(1 - sigma/(2 sqrt(n) R) * I(sqrt(n) R / sigma)).
inline double posterior_variance_expectation(std::int64_t n_z, double r, double sigma) {
  if (n_z < 1) throw DomainError("posterior_variance_expectation requires n_z >= 1");
  if (!(r > 0.0) || !(sigma > 0.0)) {
    throw DomainError("posterior_variance_expectation requires positive r and sigma");
  }
  const double n = static_cast<double>(n_z);
  const double c = std::sqrt(n) * r / sigma;
  const double integral = truncnorm_integral(c);
  return sigma * sigma / n * (1.0 - sigma / (2.0 * std::sqrt(n) * r) * integral);
}

/// Leading term of the budgeted minimax risk for population-mean estimation:
/// sigma^2 / n_eff(n*_T, q_T), decomposed as sigma^2 cbar d / spend.
inline BoundReport minimax_pm_leading(const ProblemInstance& problem, double sigma2) {
  if (!(sigma2 > 0.0)) throw DomainError("sigma2 must be > 0");
  const PlanResult opt = solve_optimal_plan(problem);
  const double d = chi2_discrepancy(problem.target, mixture(opt.plan, problem));
  const double leading = sigma2 * opt.avg_cost * d / opt.total_cost;
  return BoundReport{leading, opt.avg_cost, d, opt.total_cost, sigma2, problem.num_groups()};
}

/// Leading term for the vector of group means: K^2 sigma^2 / n_eff(n*_U, U).
inline BoundReport minimax_gm_leading(const ProblemInstance& problem, double sigma2) {
  if (!(sigma2 > 0.0)) throw DomainError("sigma2 must be > 0");
  const int k = problem.num_groups();
  const GroupDist unif = GroupDist::uniform(k);
  const PlanResult opt = solve_group_means_plan(problem);
  const double d = chi2_discrepancy(unif, mixture(opt.plan, problem));
  const double kk = static_cast<double>(k) * static_cast<double>(k);
  const double leading = kk * sigma2 * opt.avg_cost * d / opt.total_cost;
  return BoundReport{leading, opt.avg_cost, d, opt.total_cost, sigma2, k};
}

/// Shape of the classification minimax lower bound, sqrt(V q_min / n_eff).
/// The universal constant in front is not computable; callers supply their
/// own scale when plotting reference slopes.
inline double prediction_lb_shape(const ProblemInstance& problem, const SamplingPlan& plan,
                                  int vcdim) {
  if (vcdim < 1) throw DomainError("VC dimension must be >= 1");
  double qmin = 1.0;
  for (int z = 0; z < problem.num_groups(); ++z) qmin = std::min(qmin, problem.target[z]);
  const double neff = effective_sample_size(plan, problem.target, problem);
  if (neff <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(static_cast<double>(vcdim) * qmin / neff);
}

/// Excess-risk upper bound for IWERM with per-group pseudo-dimension `pdim`:
///   log(e rho / sqrt(d)) sqrt(192 pdim K log(2e n / (pdim K)) / n_eff)
///   + 64 pdim K cbar rho log(2e n / (pdim K)) / B,
/// with rho = max_z q_T(z)/qbar(z).
inline double prediction_ub(const ProblemInstance& problem, const SamplingPlan& plan,
                            int pdim) {
  if (pdim < 1) throw DomainError("pseudo-dimension must be >= 1");
  const double k = static_cast<double>(problem.num_groups());
  const double n = static_cast<double>(plan.total());
  const double dk = static_cast<double>(pdim) * k;
  if (n < dk) {
    throw InsufficientDataError("plan collects " + std::to_string(plan.total()) +
                                " samples but the bound needs at least pdim * K = " +
                                std::to_string(pdim * problem.num_groups()));
  }
  const GroupDist mix = mixture(plan, problem);
  double rho = 0.0;
  for (int z = 0; z < problem.num_groups(); ++z) {
    if (problem.target[z] == 0.0) continue;
    if (mix[z] <= 0.0) return std::numeric_limits<double>::infinity();
    rho = std::max(rho, problem.target[z] / mix[z]);
  }
  const double d = chi2_discrepancy(problem.target, mix);
  const double neff = n / d;
  const double log_cover = std::log(2.0 * std::exp(1.0) * n / dk);
  const double cbar = average_cost(plan, problem);
  const double term1 = std::log(std::exp(1.0) * rho / std::sqrt(d)) *
                       std::sqrt(192.0 * dk * log_cover / neff);
  const double term2 = 64.0 * dk * cbar * rho * log_cover / problem.budget;
  return term1 + term2;
}

}  // namespace budgetwise
