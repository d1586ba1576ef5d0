#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature for scalar- or matrix-valued
// integrands, plus Gauss-Legendre rules.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "krein/error.hpp"

namespace krein {

struct AdaptiveOptions {
  double rel_tol = 1e-11;
  double abs_tol = 0.0;
  std::size_t max_panels = 4000;
};

template <class T>
struct QuadResult {
  T value;
  double error = 0.0;
  std::size_t panels = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for kXgk[1], kXgk[3], kXgk[5], kXgk[7].
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Panel {
  double a;
  double b;
  T value;
  double error;
  double floor;  // round-off level of this panel
};

template <class T, class F, class Norm>
Panel<T> gk15_panel(F& f, double a, double b, Norm& norm) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  std::array<T, 15> fv;
  fv[0] = f(mid);
  for (std::size_t k = 0; k < 7; ++k) {
    fv[1 + 2 * k] = f(mid - half * kXgk[k]);
    fv[2 + 2 * k] = f(mid + half * kXgk[k]);
  }
  T kron = fv[0] * kWgk[7];
  T gauss = fv[0] * kWg[3];
  double resabs = kWgk[7] * norm(fv[0]);
  for (std::size_t k = 0; k < 7; ++k) {
    const T pair = fv[1 + 2 * k] + fv[2 + 2 * k];
    kron = kron + pair * kWgk[k];
    if (k % 2 == 1) gauss = gauss + pair * kWg[k / 2];
    resabs += kWgk[k] * (norm(fv[1 + 2 * k]) + norm(fv[2 + 2 * k]));
  }
  // Spread of the integrand around its mean, as in QUADPACK's resasc.
  const T mean = kron * 0.5;
  double resasc = kWgk[7] * norm(fv[0] - mean);
  for (std::size_t k = 0; k < 7; ++k) {
    resasc += kWgk[k] * (norm(fv[1 + 2 * k] - mean) + norm(fv[2 + 2 * k] - mean));
  }
  const double ah = std::abs(half);
  resabs *= ah;
  resasc *= ah;
  kron = kron * half;
  gauss = gauss * half;
  double err = norm(kron - gauss);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  const double floor = 50.0 * std::numeric_limits<double>::epsilon() * resabs;
  err = std::max(err, floor);
  return {a, b, std::move(kron), err, floor};
}

}  // namespace detail

/// Globally adaptive GK15 over consecutive intervals [x0,x1], [x1,x2], ...
/// given by `breakpoints`. The panel with the largest error estimate is
/// bisected until the summed estimate meets max(abs_tol, rel_tol*|I|) or
/// reaches the round-off floor. Panels are summed in position order so the
/// result is independent of evaluation scheduling.
template <class T, class F, class Norm>
QuadResult<T> integrate_adaptive(F&& f, std::span<const double> breakpoints,
                                 const AdaptiveOptions& opt, Norm&& norm) {
  if (breakpoints.size() < 2) throw PreconditionError("integrate_adaptive: need >= 2 breakpoints");
  std::vector<detail::Panel<T>> panels;
  panels.reserve(std::max<std::size_t>(64, breakpoints.size()));
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (breakpoints[i + 1] == breakpoints[i]) continue;
    panels.push_back(detail::gk15_panel<T>(f, breakpoints[i], breakpoints[i + 1], norm));
  }
  if (panels.empty()) throw PreconditionError("integrate_adaptive: empty integration range");

  for (;;) {
    T total = panels.front().value;
    double err = panels.front().error;
    double floor = panels.front().floor;
    std::size_t worst = 0;
    for (std::size_t i = 1; i < panels.size(); ++i) {
      total = total + panels[i].value;
      err += panels[i].error;
      floor += panels[i].floor;
      if (panels[i].error > panels[worst].error) worst = i;
    }
    const double tol = std::max(opt.abs_tol, opt.rel_tol * norm(total));
    if (err <= tol || err <= floor) return {std::move(total), err, panels.size()};
    if (panels.size() >= opt.max_panels) {
      throw ConvergenceError("integrate_adaptive: no convergence within " +
                             std::to_string(opt.max_panels) + " panels (error " +
                             std::to_string(err) + ", target " + std::to_string(tol) + ")");
    }
    const double a = panels[worst].a;
    const double b = panels[worst].b;
    const double m = 0.5 * (a + b);
    if (!(m > std::min(a, b) && m < std::max(a, b))) {
      throw ConvergenceError("integrate_adaptive: panel width underflow");
    }
    auto left = detail::gk15_panel<T>(f, a, m, norm);
    auto right = detail::gk15_panel<T>(f, m, b, norm);
    panels[worst] = std::move(left);
    panels.insert(panels.begin() + static_cast<std::ptrdiff_t>(worst) + 1, std::move(right));
  }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussLegendre gauss_legendre(std::size_t n) {
  if (n == 0) throw PreconditionError("gauss_legendre: n must be positive");
  GaussLegendre r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double pi = std::acos(-1.0);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
      p0 = p1;
      p1 = p2;
    }
    dp = n == 1 ? 1.0 : static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

/// Gauss-Legendre rule mapped to [a, b].
template <class T, class F>
T integrate_gauss_legendre(F&& f, double a, double b, const GaussLegendre& rule) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  T acc = f(mid + half * rule.nodes[0]) * (rule.weights[0] * half);
  for (std::size_t i = 1; i < rule.nodes.size(); ++i) {
    acc = acc + f(mid + half * rule.nodes[i]) * (rule.weights[i] * half);
  }
  return acc;
}

}  // namespace krein
