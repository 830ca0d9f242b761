// Copyright 2026 The chopkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Uniform-precision iterative refinement for Ax = b, run once with a native
// scalar type and once in binary64 with every arithmetic result rounded to
// an emulated format.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "chopkit/counter_rng.hpp"
#include "chopkit/formats.hpp"
#include "chopkit/fpchop.hpp"

namespace chopkit {

/// Arithmetic carried out directly in T.
template <typename T>
struct NativeArithmetic {
  using value_type = T;

  T from(double x) const { return static_cast<T>(x); }
  double to_double(T x) const { return static_cast<double>(x); }
  T add(T a, T b) const { return a + b; }
  T sub(T a, T b) const { return a - b; }
  T mul(T a, T b) const { return a * b; }
  T div(T a, T b) const { return a / b; }
};

/// Binary64 arithmetic with each result rounded by `chop`. Stochastic draws
/// advance a per-instance counter, one per rounded result.
class EmulatedArithmetic {
 public:
  using value_type = double;

  explicit EmulatedArithmetic(Chop chop) : chop_(std::move(chop)) {}

  double from(double x) const { return round(x); }
  double to_double(double x) const { return x; }
  double add(double a, double b) const { return round(a + b); }
  double sub(double a, double b) const { return round(a - b); }
  double mul(double a, double b) const { return round(a * b); }
  double div(double a, double b) const { return round(a / b); }

 private:
  double round(double x) const { return chop_(x, counter_++); }

  Chop chop_;
  mutable std::uint64_t counter_ = 0;
};

/// Dense row-major square matrix.
struct Matrix {
  std::size_t n = 0;
  std::vector<double> a;

  double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }

  static Matrix identity(std::size_t n) {
    Matrix m{n, std::vector<double>(n * n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

/// LU factors with partial pivoting, stored in the arithmetic's value type.
template <typename Arith>
class LuFactors {
 public:
  using V = typename Arith::value_type;

  LuFactors(const Matrix& m, const Arith& ar) : n_(m.n), lu_(m.n * m.n) {
    for (std::size_t i = 0; i < lu_.size(); ++i) lu_[i] = ar.from(m.a[i]);
    perm_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) perm_[i] = i;
    for (std::size_t k = 0; k < n_; ++k) {
      std::size_t piv = k;
      for (std::size_t i = k + 1; i < n_; ++i) {
        if (std::fabs(ar.to_double(at(i, k))) >
            std::fabs(ar.to_double(at(piv, k)))) {
          piv = i;
        }
      }
      if (ar.to_double(at(piv, k)) == 0.0) {
        throw std::runtime_error("LU factorization: matrix is singular");
      }
      if (piv != k) {
        for (std::size_t j = 0; j < n_; ++j) std::swap(at(k, j), at(piv, j));
        std::swap(perm_[k], perm_[piv]);
      }
      for (std::size_t i = k + 1; i < n_; ++i) {
        const V l = ar.div(at(i, k), at(k, k));
        at(i, k) = l;
        for (std::size_t j = k + 1; j < n_; ++j) {
          at(i, j) = ar.sub(at(i, j), ar.mul(l, at(k, j)));
        }
      }
    }
  }

  std::vector<V> solve(const std::vector<V>& b, const Arith& ar) const {
    std::vector<V> y(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      V acc = b[perm_[i]];
      for (std::size_t j = 0; j < i; ++j) {
        acc = ar.sub(acc, ar.mul(at(i, j), y[j]));
      }
      y[i] = acc;
    }
    for (std::size_t i = n_; i-- > 0;) {
      V acc = y[i];
      for (std::size_t j = i + 1; j < n_; ++j) {
        acc = ar.sub(acc, ar.mul(at(i, j), y[j]));
      }
      y[i] = ar.div(acc, at(i, i));
    }
    return y;
  }

  /// Solves A^T x = b.
  std::vector<V> solve_transposed(const std::vector<V>& b,
                                  const Arith& ar) const {
    std::vector<V> z(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      V acc = b[i];
      for (std::size_t j = 0; j < i; ++j) {
        acc = ar.sub(acc, ar.mul(at(j, i), z[j]));
      }
      z[i] = ar.div(acc, at(i, i));
    }
    for (std::size_t i = n_; i-- > 0;) {
      V acc = z[i];
      for (std::size_t j = i + 1; j < n_; ++j) {
        acc = ar.sub(acc, ar.mul(at(j, i), z[j]));
      }
      z[i] = acc;
    }
    std::vector<V> x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[perm_[i]] = z[i];
    return x;
  }

 private:
  V& at(std::size_t i, std::size_t j) { return lu_[i * n_ + j]; }
  const V& at(std::size_t i, std::size_t j) const { return lu_[i * n_ + j]; }

  std::size_t n_;
  std::vector<V> lu_;
  std::vector<std::size_t> perm_;
};

namespace detail {

inline double norm_inf(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

inline double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Standard normal samples from the keyed generator (Box-Muller).
inline std::vector<double> gaussian(std::size_t count, std::uint64_t seed,
                                    std::uint64_t stream) {
  const Philox4x32 rng(seed);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto b = rng(i, stream);
    const double u1 = 1.0 - to_unit_double(b[0], b[1]);  // (0,1]
    const double u2 = to_unit_double(b[2], b[3]);
    out[i] = std::sqrt(-2.0 * std::log(u1)) *
             std::cos(2.0 * std::numbers::pi * u2);
  }
  return out;
}

}  // namespace detail

/// Nonsymmetric matrix with positive definite symmetric part and 2-norm
/// condition number close to `cond`:
///   A = Q diag(logspace(0, -log10(cond))) Q^T + K,
/// Q orthogonal, K skew-symmetric with Frobenius norm `skew_ratio / cond`. Since
/// x^T A x = x^T S x, sigma_min(A) >= 1/cond, hence
/// cond(A) <= (1 + skew_ratio / cond) * cond. K is kept at the scale of the
/// smallest singular value so it cannot lift sigma_min far above 1/cond.
inline Matrix make_refinement_matrix(std::size_t n, double cond,
                                     std::uint64_t seed,
                                     double skew_ratio = 0.1) {
  if (n < 2) throw std::invalid_argument("matrix size must be >= 2");
  if (!(cond >= 1.0)) throw std::invalid_argument("condition must be >= 1");

  // Q from modified Gram-Schmidt on a Gaussian matrix; columns stored as rows.
  std::vector<double> q = detail::gaussian(n * n, seed, 0);
  for (std::size_t k = 0; k < n; ++k) {
    double* qk = &q[k * n];
    for (std::size_t j = 0; j < k; ++j) {
      const double* qj = &q[j * n];
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += qj[i] * qk[i];
      for (std::size_t i = 0; i < n; ++i) qk[i] -= d * qj[i];
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += qk[i] * qk[i];
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < n; ++i) qk[i] /= nrm;
  }

  std::vector<double> sigma(n);
  for (std::size_t k = 0; k < n; ++k) {
    sigma[k] = std::pow(cond, -static_cast<double>(k) / double(n - 1));
  }

  Matrix a{n, std::vector<double>(n * n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += q[k * n + i] * sigma[k] * q[k * n + j];
      a(i, j) = s;
    }
  }

  const std::vector<double> g = detail::gaussian(n * n, seed, 1);
  std::vector<double> skew(n * n);
  double fro = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      skew[i * n + j] = 0.5 * (g[i * n + j] - g[j * n + i]);
      fro += skew[i * n + j] * skew[i * n + j];
    }
  }
  const double scale = skew_ratio / cond / std::sqrt(fro);
  for (std::size_t i = 0; i < n * n; ++i) a.a[i] += scale * skew[i];
  return a;
}

/// 2-norm condition estimate: power iteration on A^T A for sigma_max and
/// inverse iteration for sigma_min.
inline double estimate_condition(const Matrix& m, int iterations = 200) {
  const std::size_t n = m.n;
  const NativeArithmetic<double> ar;
  const LuFactors<NativeArithmetic<double>> lu(m, ar);
  auto normalize = [](std::vector<double>& v) {
    const double s = detail::norm2(v);
    for (double& x : v) x /= s;
    return s;
  };
  std::vector<double> v = detail::gaussian(n, 7, 0);
  normalize(v);
  double smax = 0.0;
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> w(n, 0.0), z(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) w[i] += m(i, j) * v[j];
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) z[j] += m(i, j) * w[i];
    }
    smax = std::sqrt(normalize(z));
    v = z;
  }
  v = detail::gaussian(n, 11, 0);
  normalize(v);
  double inv = 0.0;
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> z = lu.solve_transposed(lu.solve(v, ar), ar);
    inv = std::sqrt(normalize(z));
    v = z;
  }
  return smax * inv;
}

struct RefinementRun {
  std::vector<double> solution;
  std::vector<double> residuals;  // ||b - Ax||_inf / ||b||_inf per iteration
  int iterations = 0;
  bool converged = false;
};

/// Factor once, then repeat residual, correction solve and update in the
/// arithmetic `ar`. Stops when the relative residual is <= tol, when the
/// correction falls below `unit_roundoff` relative to x, or at max_iter.
template <typename Arith>
RefinementRun refine(const Matrix& m, const std::vector<double>& b_exact,
                     const Arith& ar, double unit_roundoff, int max_iter,
                     double tol) {
  using V = typename Arith::value_type;
  const std::size_t n = m.n;
  const LuFactors<Arith> lu(m, ar);
  std::vector<V> a(n * n), b(n);
  for (std::size_t i = 0; i < n * n; ++i) a[i] = ar.from(m.a[i]);
  for (std::size_t i = 0; i < n; ++i) b[i] = ar.from(b_exact[i]);

  std::vector<double> bd(n);
  for (std::size_t i = 0; i < n; ++i) bd[i] = ar.to_double(b[i]);
  const double bnorm = detail::norm_inf(bd);

  RefinementRun run;
  std::vector<V> x = lu.solve(b, ar);
  std::vector<V> r(n);
  std::vector<double> tmp(n);
  for (int it = 1; it <= max_iter; ++it) {
    run.iterations = it;
    for (std::size_t i = 0; i < n; ++i) {
      V acc = ar.from(0.0);
      for (std::size_t j = 0; j < n; ++j) {
        acc = ar.add(acc, ar.mul(a[i * n + j], x[j]));
      }
      r[i] = ar.sub(b[i], acc);
      tmp[i] = ar.to_double(r[i]);
    }
    const double rel = bnorm == 0.0 ? 0.0 : detail::norm_inf(tmp) / bnorm;
    run.residuals.push_back(rel);
    if (rel <= tol) {
      run.converged = true;
      break;
    }
    const std::vector<V> d = lu.solve(r, ar);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = ar.add(x[i], d[i]);
      tmp[i] = ar.to_double(d[i]);
    }
    const double dnorm = detail::norm_inf(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = ar.to_double(x[i]);
    if (dnorm <= unit_roundoff * detail::norm_inf(tmp)) {
      run.converged = true;
      break;
    }
  }
  run.solution.resize(n);
  for (std::size_t i = 0; i < n; ++i) run.solution[i] = ar.to_double(x[i]);
  return run;
}

struct RefinementOptions {
  std::size_t n = 200;
  double cond = 1e4;
  FloatFormat format = make_format(8, 23);
  RoundingMode mode = RoundingMode::kNearestEven;
  int max_iter = 50;
  double tol = 1e-8;
  std::uint64_t seed = 42;
};

struct IRReport {
  std::size_t n = 0;
  double condition_estimate = 0.0;
  RefinementRun native;
  RefinementRun emulated;
  double relative_difference = 0.0;  // ||x_emu - x_nat||_2 / ||x_nat||_2
};

namespace detail {

template <typename Native>
IRReport compare_refinement(const Matrix& m, const RefinementOptions& opt,
                            double native_u, bool with_condition) {
  std::vector<double> x_true = gaussian(m.n, opt.seed, 2);
  std::vector<double> b(m.n, 0.0);
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j < m.n; ++j) b[i] += m(i, j) * x_true[j];
  }
  ChopConfig cfg;
  cfg.mode = opt.mode;
  cfg.seed = opt.seed;
  IRReport rep;
  rep.n = m.n;
  if (with_condition) rep.condition_estimate = estimate_condition(m);
  rep.native = refine(m, b, Native{}, native_u, opt.max_iter, opt.tol);
  rep.emulated = refine(m, b, EmulatedArithmetic(Chop(opt.format, cfg)),
                        format_params(opt.format).u, opt.max_iter, opt.tol);
  std::vector<double> diff(m.n);
  for (std::size_t i = 0; i < m.n; ++i) {
    diff[i] = rep.emulated.solution[i] - rep.native.solution[i];
  }
  const double ref = norm2(rep.native.solution);
  rep.relative_difference = ref == 0.0 ? norm2(diff) : norm2(diff) / ref;
  return rep;
}

}  // namespace detail

/// Native single precision against binary64 rounded to `opt.format` after
/// every operation. Pass a binary64-width format with `native_double` to
/// compare against native double instead.
inline IRReport iterative_refinement(const Matrix& m,
                                     const RefinementOptions& opt,
                                     bool native_double = false,
                                     bool with_condition = true) {
  if (native_double) {
    return detail::compare_refinement<NativeArithmetic<double>>(
        m, opt, 0x1p-53, with_condition);
  }
  return detail::compare_refinement<NativeArithmetic<float>>(m, opt, 0x1p-24,
                                                             with_condition);
}

inline IRReport iterative_refinement(const RefinementOptions& opt = {}) {
  return iterative_refinement(
      make_refinement_matrix(opt.n, opt.cond, opt.seed), opt);
}

}  // namespace chopkit
