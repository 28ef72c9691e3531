#pragma once

// Independent reference implementations used only by the tests. None of them
// calls into the library's numerics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;
using Vector = std::vector<double>;

// Cyclic Jacobi rotations until the off-diagonal mass vanishes.
inline Vector jacobi_eigenvalues(Matrix a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    }
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  Vector eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a[i][i];
  std::sort(eig.begin(), eig.end());
  return eig;
}

inline bool bfs_connected(int m, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(m);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> seen(m, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        q.push(v);
      }
    }
  }
  return count == m;
}

inline Vector central_difference(const std::function<double(const Vector&)>& f, Vector x, double h = 1e-6) {
  Vector g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = f(x);
    x[i] = orig - h;
    const double fm = f(x);
    x[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Scans every level mid + j*step, j = -2^(n-1)..2^(n-1), keeping the nearest
// and breaking ties away from the mid-value.
inline std::pair<std::int64_t, double> nearest_level(double v, double mid, double interval, int bits) {
  const double step = interval / std::pow(2.0, bits);
  const std::int64_t half = std::int64_t{1} << (bits - 1);
  std::int64_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::int64_t j = -half; j <= half; ++j) {
    const double level = mid + static_cast<double>(j) * step;
    const double dist = std::abs(v - level);
    if (dist < best_dist - 1e-15 * std::max(1.0, std::abs(v)) ||
        (std::abs(dist - best_dist) <= 1e-15 * std::max(1.0, std::abs(v)) && std::abs(j) > std::abs(best))) {
      best = j;
      best_dist = dist;
    }
  }
  return {best, mid + static_cast<double>(best) * step};
}

struct LpCoeffs {
  double a1, a2, a3, b1, b2, b3;
};

inline bool lp_feasible(const LpCoeffs& c, double s, double ca, double cb, double slack = 0.0) {
  return c.a1 + c.a2 * ca / s + c.a3 * cb / s <= ca / 2 + slack && c.b1 + c.b2 * ca / s + c.b3 * cb / s <= cb / 2 + slack;
}

// Coarse-to-fine grid search for min Ca + Cb. Returns the best feasible grid
// point found, or nullopt if the coarse grid has none.
inline std::optional<std::pair<double, double>> lp_grid_search(const LpCoeffs& c, int bits, double hi) {
  const double s = std::pow(2.0, bits + 1);
  double lo_a = 0.0, hi_a = hi, lo_b = 0.0, hi_b = hi;
  std::optional<std::pair<double, double>> best;
  for (int level = 0; level < 6; ++level) {
    const int steps = 400;
    const double da = (hi_a - lo_a) / steps;
    const double db = (hi_b - lo_b) / steps;
    std::optional<std::pair<double, double>> round_best;
    for (int i = 0; i <= steps; ++i) {
      const double ca = lo_a + i * da;
      for (int j = 0; j <= steps; ++j) {
        const double cb = lo_b + j * db;
        if (!lp_feasible(c, s, ca, cb)) continue;
        if (!round_best || ca + cb < round_best->first + round_best->second) round_best = std::make_pair(ca, cb);
      }
    }
    if (!round_best) return best;
    best = round_best;
    lo_a = std::max(0.0, best->first - 3 * da);
    hi_a = best->first + 3 * da;
    lo_b = std::max(0.0, best->second - 3 * db);
    hi_b = best->second + 3 * db;
  }
  return best;
}

inline Vector matvec(const Matrix& m, const Vector& v) {
  Vector out(m.size(), 0.0);
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t c = 0; c < v.size(); ++c) out[r] += m[r][c] * v[c];
  }
  return out;
}

inline double quad(const Matrix& m, const Vector& v) {
  const Vector mv = matvec(m, v);
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * mv[i];
  return s;
}

// Plain forward simulation of networked linear dynamics with stage cost
// z'Qz + u'Ru for t < N and terminal z(N)'Pz(N). inputs[i][t] is u_i(t).
struct SimSubsystem {
  Matrix A, Q, R, P;
  std::vector<std::pair<int, Matrix>> B;
  Vector z0;
};

inline double simulate_cost(const std::vector<SimSubsystem>& subs, int horizon,
                            const std::vector<std::vector<Vector>>& inputs) {
  const std::size_t m = subs.size();
  std::vector<Vector> z(m);
  for (std::size_t i = 0; i < m; ++i) z[i] = subs[i].z0;
  double cost = 0.0;
  for (int t = 0; t < horizon; ++t) {
    std::vector<Vector> next(m);
    for (std::size_t i = 0; i < m; ++i) {
      cost += quad(subs[i].Q, z[i]) + quad(subs[i].R, inputs[i][t]);
      next[i] = matvec(subs[i].A, z[i]);
      for (const auto& [j, b] : subs[i].B) {
        const Vector bu = matvec(b, inputs[j][t]);
        for (std::size_t r = 0; r < bu.size(); ++r) next[i][r] += bu[r];
      }
    }
    z = std::move(next);
  }
  for (std::size_t i = 0; i < m; ++i) cost += quad(subs[i].P, z[i]);
  return cost;
}

}  // namespace oracle
