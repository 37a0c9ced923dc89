#pragma once

// Independent oracles for the test suites. Everything here recomputes
// expected values through a different route than the library code under
// test: adaptive quadrature instead of the model's fixed tables, a plain
// fixed-step RK4 instead of the adaptive steppers, a dense Jacobi
// eigensolver instead of inverse power iteration, and closed forms where
// they exist.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracles {

// Adaptive Simpson quadrature.
inline double simpson_rec(const std::function<double(double)>& f, double a, double b,
                          double fa, double fm, double fb, double whole, double tol,
                          int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol)
    return left + right + (left + right - whole) / 15;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
}

// Plain fixed-step classical RK4, independent of the adaptive steppers.
inline std::vector<double> rk4(
    const std::function<void(double, std::span<const double>, std::span<double>)>& rhs,
    std::vector<double> y, double t0, double t1, int steps) {
  const int n = static_cast<int>(y.size());
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  const double h = (t1 - t0) / steps;
  double t = t0;
  for (int s = 0; s < steps; ++s) {
    rhs(t, y, k1);
    for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(t + 0.5 * h, tmp, k2);
    for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(t + 0.5 * h, tmp, k3);
    for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(t + h, tmp, k4);
    for (int i = 0; i < n; ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    t += h;
  }
  return y;
}

// Hopf normal form closed-form radius: r(t)^2 = 1 / (1 + ((1-r0^2)/r0^2) e^{-2t}).
inline double hopf_radius(double r0, double t) {
  const double q = (1.0 - r0 * r0) / (r0 * r0);
  return std::sqrt(1.0 / (1.0 + q * std::exp(-2.0 * t)));
}

// u' = u^2 from u0 > 0 hits level B at t = 1/u0 - 1/B.
inline double blowup_crossing_time(double u0, double B) { return 1.0 / u0 - 1.0 / B; }

// Dense symmetric eigensolver (cyclic Jacobi); returns eigenvalues ascending
// and overwrites `a` with the eigenvectors in columns.
inline std::vector<double> jacobi_eigen(std::vector<std::vector<double>>& a) {
  const int n = static_cast<int>(a.size());
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-24) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<double> evals(n);
  for (int i = 0; i < n; ++i) evals[i] = a[i][i];
  // selection sort keeping vectors aligned
  for (int i = 0; i < n; ++i) {
    int best = i;
    for (int j = i + 1; j < n; ++j)
      if (evals[j] < evals[best]) best = j;
    std::swap(evals[i], evals[best]);
    for (int k = 0; k < n; ++k) std::swap(v[k][i], v[k][best]);
  }
  a = v;
  return evals;
}

// Shooting oracle for the radial stationary problem
//   u'' + ((n-1)/r) u' = a u - b(r) |u|^gamma u,   u'(0) = 0,  u(inf) = 0.
// Integrates outward with RK4 on a fine grid; classifies the shot as
// "crossed zero" (alpha too large) or "turned back up" (alpha too small).
struct ShotResult {
  bool crossed = false;
  bool diverged = false;
  std::vector<double> profile;  // samples at the requested radii
};

inline ShotResult shoot_radial(double alpha, int n, double a_const,
                               const std::function<double(double)>& b, double gamma,
                               const std::vector<double>& radii, double r_end, double dr) {
  ShotResult res;
  res.profile.assign(radii.size(), 0.0);
  double r = 1e-6;
  // series start: u = alpha + c2 r^2, u'' (0) = (a u - f) / n
  const double f0 = b(0.0) * std::pow(std::abs(alpha), gamma) * alpha;
  const double c2 = (a_const * alpha - f0) / (2.0 * n);
  double u = alpha + c2 * r * r;
  double up = 2.0 * c2 * r;
  std::size_t next = 0;
  double min_u = u;
  while (r < r_end) {
    // RK4 on (u, u')
    auto f = [&](double rr, double uu, double vv, double& du, double& dv) {
      du = vv;
      dv = -((n - 1) / rr) * vv + a_const * uu -
           b(rr) * std::pow(std::abs(uu), gamma) * uu;
    };
    double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
    f(r, u, up, k1u, k1v);
    f(r + dr / 2, u + dr / 2 * k1u, up + dr / 2 * k1v, k2u, k2v);
    f(r + dr / 2, u + dr / 2 * k2u, up + dr / 2 * k2v, k3u, k3v);
    f(r + dr, u + dr * k3u, up + dr * k3v, k4u, k4v);
    u += dr / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
    up += dr / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    r += dr;
    while (next < radii.size() && radii[next] <= r) {
      res.profile[next] = u;
      ++next;
    }
    if (u <= 0) {
      res.crossed = true;
      return res;
    }
    min_u = std::min(min_u, u);
    if (u > 2.0 * alpha || (u > 20.0 * min_u && up > 0)) {
      res.diverged = true;  // turned back upward: the linear term won
      return res;
    }
  }
  return res;
}

// Ground-state profile by bisection on the shooting parameter.
inline std::vector<double> ground_state_profile(int n, double a_const,
                                                const std::function<double(double)>& b,
                                                double gamma,
                                                const std::vector<double>& radii,
                                                double r_end, double alpha_hi_start,
                                                double dr = 5e-4) {
  double lo = 1e-8, hi = alpha_hi_start;
  // make sure hi crosses and lo diverges
  for (int k = 0; k < 60; ++k) {
    const ShotResult s = shoot_radial(hi, n, a_const, b, gamma, radii, r_end, dr);
    if (s.crossed) break;
    hi *= 2;
    if (hi > 1e8) throw std::runtime_error("shooting oracle: no crossing bracket");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const ShotResult s = shoot_radial(mid, n, a_const, b, gamma, radii, r_end, dr);
    if (s.crossed)
      hi = mid;
    else
      lo = mid;
    if (hi - lo < 1e-13 * hi) break;
  }
  return shoot_radial(0.5 * (lo + hi), n, a_const, b, gamma, radii, r_end, dr).profile;
}

}  // namespace oracles
