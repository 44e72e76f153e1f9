#pragma once

// Independent reference implementations used only by tests: central finite
// differences, an RK4 integrator over the continuous-time cell dynamics,
// brute-force ECDF comparison, and naive metric re-implementations. These
// must stay independent of the library code paths they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ltcnet/ltc_cell.hpp"

namespace oracles {

// Central finite differences of a scalar function of a flat vector.
inline std::vector<double> finite_diff(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double orig = x[i];
    x[i] = orig + h;
    double up = f(x);
    x[i] = orig - h;
    double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// `floor` bounds the relative-error denominator so that finite-difference
// rounding noise on negligible gradients does not register as disagreement.
inline double max_rel_error(const std::vector<double>& got,
                            const std::vector<double>& want,
                            double floor = 1e-8) {
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    double denom = std::max({std::abs(got[i]), std::abs(want[i]), floor});
    worst = std::max(worst, std::abs(got[i] - want[i]) / denom);
  }
  return worst;
}

// dx_i/dt = -(1/tau_i + F_i(x, I)) x_i + G_i(x, I), with F the summed gate
// activations and G the summed reversal-weighted drives.
inline std::vector<double> ltc_derivative(const std::vector<double>& x,
                                          const std::vector<double>& input,
                                          const ltcnet::LtcTopology& topo,
                                          const ltcnet::LtcCellParams& p) {
  std::size_t n = topo.neuron_count;
  std::vector<double> f_sum(n, 0.0), drive(n, 0.0);
  auto walk = [&](const std::vector<double>& pre,
                  const std::vector<std::size_t>& src,
                  const std::vector<std::size_t>& dst, const ltcnet::Tensor& w_raw,
                  const ltcnet::Tensor& slope, const ltcnet::Tensor& offset,
                  const ltcnet::Tensor& rev) {
    for (std::size_t e = 0; e < src.size(); ++e) {
      double w = ltcnet::softplus_scalar(w_raw[e]);
      double f = w * ltcnet::sigmoid_scalar(slope[e] * (pre[src[e]] - offset[e]));
      f_sum[dst[e]] += f;
      drive[dst[e]] += f * rev[e];
    }
  };
  walk(x, *topo.rec_src, *topo.rec_dst, p.w_raw, p.gate_slope, p.gate_offset,
       p.reversal);
  walk(input, *topo.in_src, *topo.in_dst, p.in_w_raw, p.in_gate_slope,
       p.in_gate_offset, p.in_reversal);
  std::vector<double> dx(n);
  for (std::size_t i = 0; i < n; ++i) {
    double tau = ltcnet::softplus_scalar(p.tau_raw[i]);
    dx[i] = -(1.0 / tau + f_sum[i]) * x[i] + drive[i];
  }
  return dx;
}

inline std::vector<double> rk4_integrate(std::vector<double> x,
                                         const std::vector<double>& input,
                                         const ltcnet::LtcTopology& topo,
                                         const ltcnet::LtcCellParams& p,
                                         double total_time, double dt) {
  std::size_t steps = static_cast<std::size_t>(std::llround(total_time / dt));
  std::size_t n = x.size();
  for (std::size_t s = 0; s < steps; ++s) {
    auto k1 = ltc_derivative(x, input, topo, p);
    std::vector<double> x2(n), x3(n), x4(n);
    for (std::size_t i = 0; i < n; ++i) x2[i] = x[i] + 0.5 * dt * k1[i];
    auto k2 = ltc_derivative(x2, input, topo, p);
    for (std::size_t i = 0; i < n; ++i) x3[i] = x[i] + 0.5 * dt * k2[i];
    auto k3 = ltc_derivative(x3, input, topo, p);
    for (std::size_t i = 0; i < n; ++i) x4[i] = x[i] + dt * k3[i];
    auto k4 = ltc_derivative(x4, input, topo, p);
    for (std::size_t i = 0; i < n; ++i)
      x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return x;
}

// Evaluate both ECDFs at every pooled sample point.
inline double brute_ks(const std::vector<double>& a,
                       const std::vector<double>& b) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  double d = 0.0;
  for (double x : pooled) {
    double fa = 0.0, fb = 0.0;
    for (double v : a)
      if (v <= x) fa += 1.0;
    for (double v : b)
      if (v <= x) fb += 1.0;
    d = std::max(d, std::abs(fa / a.size() - fb / b.size()));
  }
  return d;
}

inline double naive_mse(const std::vector<double>& pred,
                        const std::vector<double>& actual) {
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    s += (pred[i] - actual[i]) * (pred[i] - actual[i]);
  return s / pred.size();
}

inline double naive_r2(const std::vector<double>& actual,
                       const std::vector<double>& pred) {
  double mean = 0.0;
  for (double a : actual) mean += a;
  mean /= actual.size();
  double res = 0.0, tot = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    res += (actual[i] - pred[i]) * (actual[i] - pred[i]);
    tot += (actual[i] - mean) * (actual[i] - mean);
  }
  return 1.0 - res / tot;
}

inline double naive_tail_mse(std::vector<double> actual,
                             const std::vector<double>& pred,
                             double percentile) {
  std::vector<double> sorted = actual;
  std::sort(sorted.begin(), sorted.end());
  double h = (sorted.size() - 1.0) * percentile / 100.0;
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  double thr = lo + 1 < sorted.size()
                   ? sorted[lo] + (h - lo) * (sorted[lo + 1] - sorted[lo])
                   : sorted.back();
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] >= thr) {
      s += (actual[i] - pred[i]) * (actual[i] - pred[i]);
      ++n;
    }
  }
  return s / n;
}

}  // namespace oracles
