#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "quantnet/constants.hpp"

namespace quantnet {

enum class Variant { kPgm, kApgm };

const char* to_string(Variant v);

// 1 - gamma for PGM, sqrt(1 - sqrt(gamma)) for APGM.
double rate_constant(Variant variant, double gamma);
// rate_constant(variant, gamma) < kappa < 1
bool kappa_admissible(Variant variant, double gamma, double kappa);
// Midpoint between the admissibility bound and 1.
double default_kappa(Variant variant, double gamma);

struct DesignInputs {
  ProblemConstants constants;
  int num_subsystems = 1;  // M
  int degree = 1;          // d, max |N_i| including i
  int max_local_dim = 1;   // m-bar
  double kappa = 0.5;
  double R = 1.0;        // bound on ||x^0 - x*||
  double phi_gap = 1.0;  // bound on Phi(x^0) - Phi(x*)
};

// Takes R and phi_gap from a known optimum x_star and start x0. Both are
// floored at 1e-12 so the interval design stays strictly positive.
DesignInputs make_design_inputs(const DistributedQP& qp, const ProblemConstants& constants, double kappa,
                                const Eigen::VectorXd& x0, const Eigen::VectorXd& x_star);

// Coefficients of the two containment inequalities
//   a1 + a2 Ca / 2^(n+1) + a3 Cb / 2^(n+1) <= Ca / 2
//   b1 + b2 Ca / 2^(n+1) + b3 Cb / 2^(n+1) <= Cb / 2
// For APGM the fields hold a4..a6 and b4..b6.
struct Coefficients {
  double a1 = 0, a2 = 0, a3 = 0;
  double b1 = 0, b2 = 0, b3 = 0;
};

// Both throw kInadmissibleKappa when kappa is outside the variant's range and
// kDegenerateProblem when the rate constant is zero (gamma == 1), where the
// coefficients are unbounded.
Coefficients coefficients_pgm(const DesignInputs& in);
Coefficients coefficients_apgm(const DesignInputs& in);
Coefficients coefficients(Variant variant, const DesignInputs& in);

struct Intervals {
  double C_alpha = 0.0;
  double C_beta = 0.0;
};

// Minimizes C_alpha + C_beta subject to both inequalities at n bits; nullopt
// when infeasible.
std::optional<Intervals> min_intervals(const Coefficients& c, int bits);

inline constexpr int kDefaultBitCap = 64;

// Smallest n in [1, n_cap] for which min_intervals is feasible. Throws
// kNoFeasibleBits otherwise.
int min_bits(const std::function<Coefficients(int)>& coeffs_for_n, int n_cap = kDefaultBitCap);
int min_bits(const Coefficients& c, int n_cap = kDefaultBitCap);

struct BoundConstants {
  double C1 = 0, C2 = 0;  // PGM: ||e^p|| <= C1 kappa^p, sqrt(eps^p) <= C2 kappa^p
  double C3 = 0, C4 = 0;  // APGM analogues
};

BoundConstants bound_constants(const DesignInputs& in, const Intervals& iv, int bits);

// Bound on ||x^{k+1} - x*|| for the quantized algorithms.
double theorem_envelope(Variant variant, const DesignInputs& in, const BoundConstants& bc, int k);

// Bound on ||x^{k+1} - x*|| for inexact PGM/APGM given the realized error
// series ||e^p|| and sqrt(eps^p), p = 0..k. `initial` is R (PGM) or the
// objective gap (APGM). Throws kSeriesTooShort.
double proposition_envelope(Variant variant, const ProblemConstants& constants, double initial,
                            std::span<const double> e_norms, std::span<const double> sqrt_eps, int k);

struct DesignRow {
  int bits = 0;
  Intervals intervals;
  BoundConstants bounds;
};

struct DesignResult {
  Variant variant = Variant::kPgm;
  double kappa = 0.0;
  Coefficients coeffs;
  int n_min = 0;
  std::vector<DesignRow> per_n;  // n_min .. n_min + extra_bits
};

DesignResult design(Variant variant, const DesignInputs& in, int extra_bits = 10, int n_cap = kDefaultBitCap);

}  // namespace quantnet
