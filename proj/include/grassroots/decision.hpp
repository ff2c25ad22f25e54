#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "grassroots/errors.hpp"

namespace grassroots {

/// Two sigmoid families mapping a mental probability m onto the probability
/// of producing the innovative signal.
///
/// clog (cognitive logistic) keeps fixed points at 0 and 1 for every
/// temperature and reduces to the identity at phi = 45 degrees. The plain
/// logistic in the probability domain tends to the constant 0.5 as the
/// temperature grows and never fixes 0 or 1 below phi = 90 degrees.
enum class Family { clog, logistic };

inline std::string_view to_string(Family f) {
  return f == Family::clog ? "clog" : "logistic";
}

inline Family family_from_string(std::string_view s) {
  if (s == "clog") return Family::clog;
  if (s == "logistic") return Family::logistic;
  throw DomainError("unknown decision family '" + std::string(s) + "'");
}

/// Categoriality angle (degrees, slope angle at the unbiased inflection
/// point) and bias. The unstable clog fixed point sits at 0.5 + beta.
struct DecisionParams {
  double phi_deg = 45.0;
  double beta = 0.0;
};

inline constexpr double kMinBeta = -0.5;
inline constexpr double kMaxBeta = 0.5;

inline double min_phi(Family f) { return f == Family::clog ? 45.0 : 0.0; }

inline void validate(Family family, const DecisionParams& p) {
  if (!std::isfinite(p.phi_deg) || p.phi_deg < min_phi(family) || p.phi_deg > 90.0) {
    throw DomainError("phi_deg " + std::to_string(p.phi_deg) + " outside [" +
                      std::to_string(min_phi(family)) + ", 90] for " +
                      std::string(to_string(family)));
  }
  if (!std::isfinite(p.beta) || p.beta < kMinBeta || p.beta > kMaxBeta) {
    throw DomainError("beta " + std::to_string(p.beta) + " outside [-0.5, 0.5]");
  }
}

namespace detail {

inline double tan_deg(double phi_deg) {
  return std::tan(phi_deg * std::numbers::pi / 180.0);
}

inline void check_probability(double m) {
  if (!std::isfinite(m) || m < 0.0 || m > 1.0) {
    throw DomainError("probability " + std::to_string(m) + " outside [0, 1]");
  }
}

}  // namespace detail

/// Temperature for a categoriality angle.
///   clog:     tau = 1 / (2 (tan phi - 1)),  phi in [45, 90]
///   logistic: tau = 1 / (2 tan phi),        phi in [0, 90]
/// +infinity at the lower end of the range, 0 at 90 degrees.
inline double phi_to_tau(double phi_deg, Family family) {
  validate(family, DecisionParams{phi_deg, 0.0});
  if (phi_deg == 90.0) return 0.0;
  if (phi_deg == min_phi(family)) return std::numeric_limits<double>::infinity();
  const double t = detail::tan_deg(phi_deg);
  return family == Family::clog ? 1.0 / (2.0 * (t - 1.0)) : 1.0 / (2.0 * t);
}

/// Precomputed decision function for one individual. Validation happens once
/// at construction; the call operator is the simulation hot path and trusts
/// its argument to lie in [0, 1].
class DecisionRule {
 public:
  DecisionRule() = default;

  DecisionRule(Family family, DecisionParams params)
      : family_(family), params_(params), threshold_(0.5 + params.beta) {
    validate(family, params);
    if (family == Family::clog && params.phi_deg == 45.0) {
      shape_ = Shape::identity;
    } else if (family == Family::logistic && params.phi_deg == 0.0) {
      shape_ = Shape::constant_half;
    } else if (params.phi_deg == 90.0) {
      shape_ = Shape::step;
    } else {
      shape_ = Shape::smooth;
      inv_tau_ = 1.0 / phi_to_tau(params.phi_deg, family);
    }
  }

  Family family() const noexcept { return family_; }
  const DecisionParams& params() const noexcept { return params_; }

  double operator()(double m) const noexcept {
    switch (shape_) {
      case Shape::identity:
        return m;
      case Shape::constant_half:
        return 0.5;
      case Shape::step:
        if (m < threshold_) return 0.0;
        if (m > threshold_) return 1.0;
        // clog's pointwise limit fixes its threshold; the logistic mirrors
        // the unbiased criterion rule and returns one half.
        return family_ == Family::clog ? threshold_ : 0.5;
      case Shape::smooth:
        break;
    }
    // Both families share the exponent (1 - 2m + 2beta) / tau.
    const double e = std::exp(inv_tau_ * (1.0 - 2.0 * m + 2.0 * params_.beta));
    if (family_ == Family::logistic) return 1.0 / (1.0 + e);
    if (m == 0.0 || m == 1.0) return m;
    return m / (m + (1.0 - m) * e);
  }

 private:
  enum class Shape { identity, constant_half, step, smooth };

  Family family_ = Family::clog;
  DecisionParams params_{};
  Shape shape_ = Shape::identity;
  double threshold_ = 0.5;
  double inv_tau_ = 0.0;
};

/// clog_{tau,beta}(m) = m e^{(m-beta)/tau} / (m e^{(m-beta)/tau} + (1-m) e^{(1-m+beta)/tau})
inline double clog_eval(double m, const DecisionParams& params) {
  detail::check_probability(m);
  return DecisionRule(Family::clog, params)(m);
}

/// logistic_{tau,beta}(m) = 1 / (1 + e^{(1 - 2m + 2beta)/tau})
inline double logistic_eval(double m, const DecisionParams& params) {
  detail::check_probability(m);
  return DecisionRule(Family::logistic, params)(m);
}

inline double decision_eval(Family family, double m, const DecisionParams& params) {
  return family == Family::clog ? clog_eval(m, params) : logistic_eval(m, params);
}

// --- fixed points ----------------------------------------------------------

enum class Stability { stable, unstable, marginal };

inline std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::marginal: return "marginal";
  }
  return "?";
}

struct FixedPoint {
  double location = 0.0;
  Stability stability = Stability::marginal;
  double derivative = 0.0;
};

/// Result of a fixed-point search. At phi = 45 the clog is the identity and
/// every m is fixed; that case is reported as a continuum with no points.
struct FixedPointSet {
  bool continuum = false;
  std::vector<FixedPoint> points;
};

struct FixedPointOptions {
  std::size_t grid_points = 10000;
  double residual_tol = 1e-12;
  double fd_step = 1e-6;
  double slope_tol = 1e-6;
};

inline Stability classify_slope(double derivative, double slope_tol) {
  const double a = std::abs(derivative);
  if (a < 1.0 - slope_tol) return Stability::stable;
  if (a > 1.0 + slope_tol) return Stability::unstable;
  return Stability::marginal;
}

/// Solutions of f(m) = m on [0, 1]: sign-change scan of f(m) - m on a
/// uniform grid, bisection of each bracket, then a finite-difference slope
/// (central inside, one-sided within fd_step of an endpoint).
inline FixedPointSet find_fixed_points(Family family, const DecisionParams& params,
                                       const FixedPointOptions& opt = {}) {
  const DecisionRule f(family, params);
  if (family == Family::clog && params.phi_deg == 45.0) return {true, {}};

  const auto g = [&](double m) { return f(m) - m; };
  const auto slope = [&](double m) {
    const double h = opt.fd_step;
    if (m < h) return (f(m + h) - f(m)) / h;
    if (m > 1.0 - h) return (f(m) - f(m - h)) / h;
    return (f(m + h) - f(m - h)) / (2.0 * h);
  };
  const auto bisect = [&](double lo, double hi, double glo) {
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      mid = 0.5 * (lo + hi);
      const double gm = g(mid);
      if (std::abs(gm) < opt.residual_tol || mid <= lo || mid >= hi) break;
      if ((gm < 0.0) == (glo < 0.0)) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
      }
    }
    return mid;
  };

  FixedPointSet out;
  const std::size_t n = opt.grid_points < 2 ? 2 : opt.grid_points;
  const double denom = static_cast<double>(n - 1);
  double m_prev = 0.0;
  double g_prev = g(0.0);
  const auto emit = [&](double m) {
    const double d = slope(m);
    out.points.push_back({m, classify_slope(d, opt.slope_tol), d});
  };
  if (g_prev == 0.0) emit(0.0);
  for (std::size_t k = 1; k < n; ++k) {
    const double m = static_cast<double>(k) / denom;
    const double gm = g(m);
    if (gm == 0.0) {
      emit(m);
    } else if (g_prev != 0.0 && (gm < 0.0) != (g_prev < 0.0)) {
      emit(bisect(m_prev, m, g_prev));
    }
    m_prev = m;
    g_prev = gm;
  }
  return out;
}

// --- tabulation ------------------------------------------------------------

struct CurvePoint {
  double m = 0.0;
  double f_m = 0.0;
};

/// n_points samples of the decision function on a uniform grid over [0, 1].
inline std::vector<CurvePoint> tabulate_curve(Family family, const DecisionParams& params,
                                              std::size_t n_points) {
  if (n_points < 2) throw DomainError("tabulate_curve needs at least 2 points");
  const DecisionRule f(family, params);
  std::vector<CurvePoint> table;
  table.reserve(n_points);
  const double denom = static_cast<double>(n_points - 1);
  for (std::size_t k = 0; k < n_points; ++k) {
    const double m = static_cast<double>(k) / denom;
    table.push_back({m, f(m)});
  }
  return table;
}

}  // namespace grassroots
