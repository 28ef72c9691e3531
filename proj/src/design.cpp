#include "quantnet/design.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quantnet/error.hpp"

namespace quantnet {
namespace {

void require_admissible(Variant variant, const DesignInputs& in) {
  if (!kappa_admissible(variant, in.constants.gamma, in.kappa)) {
    throw Error(ErrorCode::kInadmissibleKappa,
                std::string(to_string(variant)) + " needs " + std::to_string(rate_constant(variant, in.constants.gamma)) +
                    " < kappa < 1, got " + std::to_string(in.kappa));
  }
  if (rate_constant(variant, in.constants.gamma) <= 0.0) {
    throw Error(ErrorCode::kDegenerateProblem,
                std::string(to_string(variant)) + " design is undefined for a zero rate constant (gamma = 1)");
  }
}

double two_pow(int e) { return std::ldexp(1.0, e); }

}  // namespace

const char* to_string(Variant v) { return v == Variant::kPgm ? "pgm" : "apgm"; }

double rate_constant(Variant variant, double gamma) {
  if (variant == Variant::kPgm) return 1.0 - gamma;
  return std::sqrt(std::max(0.0, 1.0 - std::sqrt(gamma)));
}

bool kappa_admissible(Variant variant, double gamma, double kappa) {
  return kappa > rate_constant(variant, gamma) && kappa < 1.0;
}

double default_kappa(Variant variant, double gamma) { return 0.5 * (rate_constant(variant, gamma) + 1.0); }

DesignInputs make_design_inputs(const DistributedQP& qp, const ProblemConstants& constants, double kappa,
                                const Eigen::VectorXd& x0, const Eigen::VectorXd& x_star) {
  DesignInputs in;
  in.constants = constants;
  in.num_subsystems = qp.num_subsystems();
  in.degree = qp.topology().degree();
  in.max_local_dim = qp.maps().max_local_dim();
  in.kappa = kappa;
  const Eigen::VectorXd delta = x0 - x_star;
  in.R = std::max(delta.norm(), 1e-12);
  // f(x0) - f(x*) = grad f(x*)^T d + d^T H_g d / 2, both terms non-negative at the optimum.
  const double linear = std::max(0.0, global_gradient(qp, x_star).dot(delta));
  const double quadratic = 0.5 * delta.dot(qp.global_hessian() * delta);
  in.phi_gap = std::max(linear + quadratic, 1e-12);
  return in;
}

Coefficients coefficients_pgm(const DesignInputs& in) {
  require_admissible(Variant::kPgm, in);
  const double k = in.kappa;
  const double g = in.constants.gamma;
  const double L = in.constants.L;
  const double lmax = in.constants.L_max;
  const double M = in.num_subsystems;
  const double d = in.degree;
  const double sm = std::sqrt(static_cast<double>(in.max_local_dim));
  const double sdm = std::sqrt(d * in.max_local_dim);
  const double gap = (k + g - 1.0) * (1.0 - g);  // (kappa + gamma - 1)(1 - gamma)

  Coefficients c;
  c.a1 = (k + 1.0) * in.R / k;
  c.a2 = (M * sm * k * (k + 1.0) * (d * lmax + std::sqrt(L)) + M * sm * L * gap) / (L * k * gap);
  c.a3 = M * sdm * (k + 1.0) / (L * gap);
  c.b1 = lmax * (k + 1.0) * in.R / k;
  c.b2 = (lmax * M * sm * k * (k + 1.0) * (d * lmax + std::sqrt(L)) + lmax * d * sm * L * (k + 1.0) * gap) /
         (L * k * gap);
  c.b3 = (lmax * M * sdm * k * (k + 1.0) + L * sdm * gap) / (L * k * gap);
  return c;
}

Coefficients coefficients_apgm(const DesignInputs& in) {
  require_admissible(Variant::kApgm, in);
  const double k = in.kappa;
  const double L = in.constants.L;
  const double s = in.constants.sigma_f;
  const double lmax = in.constants.L_max;
  const double M = in.num_subsystems;
  const double d = in.degree;
  const double sm = std::sqrt(static_cast<double>(in.max_local_dim));
  const double sdm = std::sqrt(d * in.max_local_dim);
  const double rho = rate_constant(Variant::kApgm, in.constants.gamma);
  const double gap = (k - rho) * rho;  // (kappa - sqrt(1-sqrt(gamma))) sqrt(1-sqrt(gamma))
  const double poly = 2.0 * k * k + 3.0 * k + 1.0;
  const double root_gap = std::sqrt(in.phi_gap);
  const double mix = 2.0 * std::sqrt(L) + std::sqrt(s);

  Coefficients c;
  c.a1 = 2.0 * (k + 1.0) * root_gap / (k * std::sqrt(s));
  c.a2 = (6.0 * M * sm * (k + 1.0) * d * lmax + M * sm * k * (k + 1.0) * mix + s * M * sm * gap) / (s * k * gap);
  c.a3 = 2.0 * M * sdm * (k + 1.0) / (s * gap);
  c.b1 = 2.0 * lmax * poly * root_gap / (k * k * std::sqrt(s));
  c.b2 = lmax * sm * poly / (k * k) * (d + (6.0 * M * d * lmax + M * k * mix) / (s * gap));
  c.b3 = (2.0 * lmax * M * sdm * poly + s * sdm * gap) / (s * k * gap);
  return c;
}

Coefficients coefficients(Variant variant, const DesignInputs& in) {
  return variant == Variant::kPgm ? coefficients_pgm(in) : coefficients_apgm(in);
}

std::optional<Intervals> min_intervals(const Coefficients& c, int bits) {
  if (bits < 1) throw Error(ErrorCode::kInvalidArgument, "bits must be at least 1");
  if (c.a1 <= 0.0 && c.b1 <= 0.0) return Intervals{0.0, 0.0};
  const double s = two_pow(bits + 1);
  // Rewritten as  p Ca - u Cb >= a1,  -w Ca + q Cb >= b1.
  const double p = 0.5 - c.a2 / s;
  const double q = 0.5 - c.b3 / s;
  const double u = c.a3 / s;
  const double w = c.b2 / s;
  const double det = p * q - u * w;
  if (!(p > 0.0) || !(q > 0.0) || !(det > 0.0)) return std::nullopt;
  // With p, q, det > 0 the constraint matrix is an M-matrix, so its inverse is
  // non-negative and the vertex is the componentwise-least feasible point.
  Intervals iv{(c.a1 * q + u * c.b1) / det, (p * c.b1 + w * c.a1) / det};
  if (!(iv.C_alpha >= 0.0) || !(iv.C_beta >= 0.0) || !std::isfinite(iv.C_alpha) || !std::isfinite(iv.C_beta)) {
    return std::nullopt;
  }
  return iv;
}

int min_bits(const std::function<Coefficients(int)>& coeffs_for_n, int n_cap) {
  for (int n = 1; n <= n_cap; ++n) {
    if (min_intervals(coeffs_for_n(n), n)) return n;
  }
  throw Error(ErrorCode::kNoFeasibleBits, "no n <= " + std::to_string(n_cap) + " admits feasible intervals");
}

int min_bits(const Coefficients& c, int n_cap) {
  return min_bits([&c](int) { return c; }, n_cap);
}

BoundConstants bound_constants(const DesignInputs& in, const Intervals& iv, int bits) {
  const double s = two_pow(bits + 1);
  const double M = in.num_subsystems;
  const double d = in.degree;
  const double sm = std::sqrt(static_cast<double>(in.max_local_dim));
  const double lmax = in.constants.L_max;
  BoundConstants bc;
  bc.C1 = M * sm * (lmax * d * iv.C_alpha + std::sqrt(d) * iv.C_beta) / s;
  bc.C2 = std::sqrt(2.0) / 2.0 * M * sm * iv.C_alpha / s;
  bc.C3 = M * sm * (3.0 * lmax * d * iv.C_alpha + in.kappa * std::sqrt(d) * iv.C_beta) / (in.kappa * s);
  bc.C4 = bc.C2;
  return bc;
}

double theorem_envelope(Variant variant, const DesignInputs& in, const BoundConstants& bc, int k) {
  if (!kappa_admissible(variant, in.constants.gamma, in.kappa)) {
    throw Error(ErrorCode::kInadmissibleKappa, "theorem envelope needs an admissible kappa");
  }
  const auto& cst = in.constants;
  const double kap = in.kappa;
  double bracket = 0.0;
  if (variant == Variant::kPgm) {
    const double num = bc.C1 + std::sqrt(2.0 * cst.L) * bc.C2;
    bracket = in.R;
    if (num != 0.0) {
      const double mu = 1.0 - cst.gamma;
      if (mu <= 0.0) throw Error(ErrorCode::kDegenerateProblem, "PGM envelope undefined for gamma = 1");
      bracket += num * kap / (cst.L * (kap - mu) * mu);
    }
  } else {
    const double s = cst.sigma_f;
    const double num = 2.0 * bc.C3 + 2.0 * std::sqrt(2.0 * cst.L) * bc.C4 + std::sqrt(2.0 * s) * bc.C4;
    bracket = 2.0 * std::sqrt(in.phi_gap) / std::sqrt(s);
    if (num != 0.0) {
      const double rho = rate_constant(Variant::kApgm, cst.gamma);
      if (rho <= 0.0) throw Error(ErrorCode::kDegenerateProblem, "APGM envelope undefined for gamma = 1");
      bracket += num * kap / (s * (kap - rho) * rho);
    }
  }
  return std::pow(kap, k + 1) * bracket;
}

double proposition_envelope(Variant variant, const ProblemConstants& constants, double initial,
                            std::span<const double> e_norms, std::span<const double> sqrt_eps, int k) {
  if (k < 0) throw Error(ErrorCode::kInvalidArgument, "k must be non-negative");
  if (static_cast<int>(e_norms.size()) < k + 1 || static_cast<int>(sqrt_eps.size()) < k + 1) {
    throw Error(ErrorCode::kSeriesTooShort, "need error series for p = 0.." + std::to_string(k));
  }
  const double L = constants.L;
  // (rate)^{k+1} (initial + sum_p rate^{-p-1} term_p), evaluated as
  // rate^{k+1} initial + sum_p rate^{k-p} term_p so nothing overflows.
  if (variant == Variant::kPgm) {
    const double mu = 1.0 - constants.gamma;
    double total = std::pow(mu, k + 1) * initial;
    for (int p = 0; p <= k; ++p) {
      total += std::pow(mu, k - p) * (e_norms[p] / L + std::sqrt(2.0 / L) * sqrt_eps[p]);
    }
    return total;
  }
  const double s = constants.sigma_f;
  const double nu = 1.0 - std::sqrt(constants.gamma);
  const double weight = std::sqrt(2.0 * L) + std::sqrt(s / 2.0);
  double total = std::pow(nu, 0.5 * (k + 1)) * 2.0 * std::sqrt(initial) / std::sqrt(s);
  for (int p = 0; p <= k; ++p) {
    total += 2.0 / s * std::pow(nu, 0.5 * (k - p)) * (e_norms[p] + weight * sqrt_eps[p]);
  }
  return total;
}

DesignResult design(Variant variant, const DesignInputs& in, int extra_bits, int n_cap) {
  DesignResult result;
  result.variant = variant;
  result.kappa = in.kappa;
  result.coeffs = coefficients(variant, in);
  result.n_min = min_bits(result.coeffs, n_cap);
  for (int n = result.n_min; n <= std::min(n_cap, result.n_min + extra_bits); ++n) {
    const auto iv = min_intervals(result.coeffs, n);
    if (!iv) continue;
    result.per_n.push_back({n, *iv, bound_constants(in, *iv, n)});
  }
  return result;
}

}  // namespace quantnet
