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

// Elementary functions and reductions in emulated precision. Every function
// rounds its inputs to the target format, evaluates in binary64 and rounds
// the result. Reductions and scans accumulate in binary64 and round only
// the final value of each output element, never the running partials.
//
// Draw streams for the stochastic modes: first operand 0, second operand 1,
// output 2. Element i uses counter i within its stream.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chopkit/fpchop.hpp"

namespace chopkit {

enum class Arity { kUnary, kBinary, kReduction, kScan, kSpecial };

enum class DomainPolicy { kThrow, kQuietNaN };

class DomainError : public std::domain_error {
 public:
  DomainError(std::string_view fn, double value)
      : std::domain_error(message(fn, value)), function_(fn), value_(value) {}

  const std::string& function() const { return function_; }
  double value() const { return value_; }

 private:
  static std::string message(std::string_view fn, double value) {
    std::ostringstream os;
    os.precision(17);
    os << std::string(fn) << ": argument " << value << " outside domain";
    return os.str();
  }

  std::string function_;
  double value_;
};

using UnaryFn = double (*)(double);
using BinaryFn = double (*)(double, double);
using UnaryDomain = bool (*)(double);
using BinaryDomain = bool (*)(double, double);

struct FunctionEntry {
  Arity arity = Arity::kUnary;
  UnaryFn unary = nullptr;
  BinaryFn binary = nullptr;
  UnaryDomain domain = nullptr;    // unary; null means unrestricted
  BinaryDomain domain2 = nullptr;  // binary; null means unrestricted
};

namespace detail {

inline bool is_integer_valued(double x) {
  return std::isfinite(x) && std::trunc(x) == x && std::fabs(x) < 0x1p53;
}

inline double sign_of(double x) {
  if (std::isnan(x)) return x;
  return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
}

// Python-style modulo: result takes the sign of the divisor.
inline double py_mod(double x, double y) {
  double r = std::fmod(x, y);
  if (r != 0.0 && (std::signbit(r) != std::signbit(y))) r += y;
  return r;
}

inline double logaddexp(double x, double y) {
  if (x == y) return x + std::numbers::ln2;
  const double hi = std::max(x, y);
  const double lo = std::min(x, y);
  return hi + std::log1p(std::exp(lo - hi));
}

template <typename Op>
double bitwise(double x, double y, Op op) {
  return static_cast<double>(
      op(static_cast<std::int64_t>(x), static_cast<std::int64_t>(y)));
}

inline std::map<std::string, FunctionEntry, std::less<>> build_registry() {
  using A = Arity;
  std::map<std::string, FunctionEntry, std::less<>> r;
  auto unary = [&](const char* n, UnaryFn f, UnaryDomain d = nullptr) {
    r.emplace(n, FunctionEntry{A::kUnary, f, nullptr, d, nullptr});
  };
  auto binary = [&](const char* n, BinaryFn f, BinaryDomain d = nullptr) {
    r.emplace(n, FunctionEntry{A::kBinary, nullptr, f, nullptr, d});
  };
  auto other = [&](const char* n, A a) { r.emplace(n, FunctionEntry{a}); };

  unary("sin", [](double x) { return std::sin(x); });
  unary("cos", [](double x) { return std::cos(x); });
  unary("tan", [](double x) { return std::tan(x); });
  unary("arcsin", [](double x) { return std::asin(x); },
        [](double x) { return x >= -1.0 && x <= 1.0; });
  unary("arccos", [](double x) { return std::acos(x); },
        [](double x) { return x >= -1.0 && x <= 1.0; });
  unary("arctan", [](double x) { return std::atan(x); });
  unary("sinh", [](double x) { return std::sinh(x); });
  unary("cosh", [](double x) { return std::cosh(x); });
  unary("tanh", [](double x) { return std::tanh(x); });
  unary("arcsinh", [](double x) { return std::asinh(x); });
  unary("arccosh", [](double x) { return std::acosh(x); },
        [](double x) { return x >= 1.0; });
  unary("arctanh", [](double x) { return std::atanh(x); },
        [](double x) { return x > -1.0 && x < 1.0; });
  unary("exp", [](double x) { return std::exp(x); });
  unary("expm1", [](double x) { return std::expm1(x); });
  unary("log", [](double x) { return std::log(x); },
        [](double x) { return x > 0.0; });
  unary("log10", [](double x) { return std::log10(x); },
        [](double x) { return x > 0.0; });
  unary("log2", [](double x) { return std::log2(x); },
        [](double x) { return x > 0.0; });
  unary("log1p", [](double x) { return std::log1p(x); },
        [](double x) { return x > -1.0; });
  unary("sqrt", [](double x) { return std::sqrt(x); },
        [](double x) { return x >= 0.0; });
  unary("cbrt", [](double x) { return std::cbrt(x); });
  unary("erf", [](double x) { return std::erf(x); });
  unary("erfc", [](double x) { return std::erfc(x); });
  unary("gamma", [](double x) { return std::tgamma(x); },
        [](double x) { return !(x <= 0.0 && std::trunc(x) == x); });
  unary("fabs", [](double x) { return std::fabs(x); });
  unary("abs", [](double x) { return std::fabs(x); });
  unary("degrees", [](double x) { return x * (180.0 / std::numbers::pi); });
  unary("radians", [](double x) { return x * (std::numbers::pi / 180.0); });
  unary("floor", [](double x) { return std::floor(x); });
  unary("ceil", [](double x) { return std::ceil(x); });
  unary("sign", sign_of);
  unary("reciprocal", [](double x) { return 1.0 / x; },
        [](double x) { return x != 0.0; });
  unary("square", [](double x) { return x * x; });

  binary("add", [](double x, double y) { return x + y; });
  binary("subtract", [](double x, double y) { return x - y; });
  binary("multiply", [](double x, double y) { return x * y; });
  binary("divide", [](double x, double y) { return x / y; },
         [](double, double y) { return y != 0.0; });
  binary("mod", py_mod, [](double, double y) { return y != 0.0; });
  binary("floor_divide", [](double x, double y) { return std::floor(x / y); },
         [](double, double y) { return y != 0.0; });
  binary("power", [](double x, double y) { return std::pow(x, y); },
         [](double x, double y) {
           if (x < 0.0 && std::isfinite(y) && std::trunc(y) != y) return false;
           return !(x == 0.0 && y < 0.0);
         });
  binary("hypot", [](double x, double y) { return std::hypot(x, y); });
  binary("logaddexp", logaddexp);
  binary("maximum", [](double x, double y) {
    return (std::isnan(x) || std::isnan(y)) ? x + y : std::max(x, y);
  });
  binary("minimum", [](double x, double y) {
    return (std::isnan(x) || std::isnan(y)) ? x + y : std::min(x, y);
  });
  binary("ldexp",
         [](double x, double y) { return std::ldexp(x, static_cast<int>(y)); },
         [](double, double y) { return is_integer_valued(y); });
  auto both_int = [](double x, double y) {
    return is_integer_valued(x) && is_integer_valued(y);
  };
  binary("bitwise_and",
         [](double x, double y) {
           return bitwise(x, y, [](auto a, auto b) { return a & b; });
         },
         both_int);
  binary("bitwise_or",
         [](double x, double y) {
           return bitwise(x, y, [](auto a, auto b) { return a | b; });
         },
         both_int);
  binary("bitwise_xor",
         [](double x, double y) {
           return bitwise(x, y, [](auto a, auto b) { return a ^ b; });
         },
         both_int);

  for (const char* n : {"sum", "prod", "mean", "std", "var", "dot", "matmul"}) {
    other(n, A::kReduction);
  }
  for (const char* n : {"cumsum", "cumprod", "diff"}) other(n, A::kScan);
  for (const char* n : {"frexp", "modf", "round", "clip", "angle", "real",
                        "imag", "conj"}) {
    other(n, A::kSpecial);
  }
  return r;
}

}  // namespace detail

/// Name -> (arity, evaluator, domain predicate) for every supported function.
inline const std::map<std::string, FunctionEntry, std::less<>>&
function_registry() {
  static const auto registry = detail::build_registry();
  return registry;
}

inline const FunctionEntry& lookup_function(std::string_view name,
                                            Arity expected) {
  const auto& reg = function_registry();
  auto it = reg.find(name);
  if (it == reg.end()) {
    throw std::invalid_argument("unknown function '" + std::string(name) + "'");
  }
  if (it->second.arity != expected) {
    throw std::invalid_argument("function '" + std::string(name) +
                                "' has a different arity");
  }
  return it->second;
}

/// Emulated math over one (format, policy) pair.
class MathEmulator {
 public:
  static constexpr std::uint64_t kFirstOperandStream = 0;
  static constexpr std::uint64_t kSecondOperandStream = 1;
  static constexpr std::uint64_t kOutputStream = 2;

  explicit MathEmulator(FloatFormat fmt, ChopConfig cfg = {},
                        DomainPolicy policy = DomainPolicy::kThrow)
      : chop_(fmt, cfg), policy_(policy) {}

  const Chop& chopper() const { return chop_; }

  // -- elementwise ----------------------------------------------------------

  std::vector<double> unary(std::string_view name,
                            std::span<const double> xs) const {
    const auto& fn = lookup_function(name, Arity::kUnary);
    std::vector<double> in = chop_(xs, kFirstOperandStream);
    for (double& x : in) {
      x = (fn.domain && !std::isnan(x) && !fn.domain(x)) ? violation(name, x)
                                                         : fn.unary(x);
    }
    chop_.apply(std::span<double>(in), kOutputStream);
    return in;
  }

  /// Scalar form; `index` selects the draw counter for stochastic modes.
  double unary(std::string_view name, double x, std::uint64_t index = 0) const {
    const auto& fn = lookup_function(name, Arity::kUnary);
    double v = chop_(x, index, kFirstOperandStream);
    v = (fn.domain && !std::isnan(v) && !fn.domain(v)) ? violation(name, v)
                                                       : fn.unary(v);
    return chop_(v, index, kOutputStream);
  }

  /// `ys` may hold a single value, which is broadcast.
  std::vector<double> binary(std::string_view name, std::span<const double> xs,
                             std::span<const double> ys) const {
    const auto& fn = lookup_function(name, Arity::kBinary);
    if (ys.size() != xs.size() && ys.size() != 1) {
      throw std::invalid_argument(std::string(name) +
                                  ": operand lengths differ");
    }
    std::vector<double> a = chop_(xs, kFirstOperandStream);
    const std::vector<double> b = chop_(ys, kSecondOperandStream);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = apply_binary(fn, name, a[i], b.size() == 1 ? b[0] : b[i]);
    }
    chop_.apply(std::span<double>(a), kOutputStream);
    return a;
  }

  double binary(std::string_view name, double x, double y,
                std::uint64_t index = 0) const {
    const auto& fn = lookup_function(name, Arity::kBinary);
    const double a = chop_(x, index, kFirstOperandStream);
    const double b = chop_(y, index, kSecondOperandStream);
    return chop_(apply_binary(fn, name, a, b), index, kOutputStream);
  }

  // -- reductions and scans -------------------------------------------------

  /// sum, prod, mean, std, var over the whole array. `ddof` is the divisor
  /// offset for std/var (0 = population).
  double reduce(std::string_view name, std::span<const double> xs,
                int ddof = 0) const {
    lookup_function(name, Arity::kReduction);
    const std::vector<double> v = chop_(xs, kFirstOperandStream);
    return chop_(reduce_exact(name, v, ddof), 0, kOutputStream);
  }

  /// Reduces along `axis` of a row-major tensor; one output per fiber.
  std::vector<double> reduce(std::string_view name, std::span<const double> xs,
                             std::span<const std::size_t> shape,
                             std::size_t axis, int ddof = 0) const {
    lookup_function(name, Arity::kReduction);
    if (axis >= shape.size()) {
      throw std::invalid_argument(std::string(name) + ": axis out of range");
    }
    std::size_t count = 1;
    for (std::size_t d : shape) count *= d;
    if (count != xs.size()) {
      throw std::invalid_argument(std::string(name) + ": shape mismatch");
    }
    std::size_t inner = 1;
    for (std::size_t d = axis + 1; d < shape.size(); ++d) inner *= shape[d];
    const std::size_t len = shape[axis];
    const std::size_t outer = len == 0 ? 0 : count / (len * inner);
    const std::vector<double> v = chop_(xs, kFirstOperandStream);
    std::vector<double> out;
    out.reserve(outer * inner);
    std::vector<double> fiber(len);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < inner; ++in) {
        for (std::size_t k = 0; k < len; ++k) {
          fiber[k] = v[(o * len + k) * inner + in];
        }
        out.push_back(reduce_exact(name, fiber, ddof));
      }
    }
    chop_.apply(std::span<double>(out), kOutputStream);
    return out;
  }

  double dot(std::span<const double> xs, std::span<const double> ys) const {
    if (xs.size() != ys.size()) {
      throw std::invalid_argument("dot: operand lengths differ");
    }
    const std::vector<double> a = chop_(xs, kFirstOperandStream);
    const std::vector<double> b = chop_(ys, kSecondOperandStream);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return chop_(acc, 0, kOutputStream);
  }

  /// Row-major (rows x inner) times (inner x cols).
  std::vector<double> matmul(std::span<const double> lhs,
                             std::span<const double> rhs, std::size_t rows,
                             std::size_t inner, std::size_t cols) const {
    if (lhs.size() != rows * inner || rhs.size() != inner * cols) {
      throw std::invalid_argument("matmul: shape mismatch");
    }
    const std::vector<double> a = chop_(lhs, kFirstOperandStream);
    const std::vector<double> b = chop_(rhs, kSecondOperandStream);
    std::vector<double> c(rows * cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < inner; ++k) {
          acc += a[i * inner + k] * b[k * cols + j];
        }
        c[i * cols + j] = acc;
      }
    }
    chop_.apply(std::span<double>(c), kOutputStream);
    return c;
  }

  /// cumsum, cumprod, diff.
  std::vector<double> scan(std::string_view name,
                           std::span<const double> xs) const {
    lookup_function(name, Arity::kScan);
    const std::vector<double> v = chop_(xs, kFirstOperandStream);
    std::vector<double> out;
    if (name == "diff") {
      for (std::size_t i = 1; i < v.size(); ++i) out.push_back(v[i] - v[i - 1]);
    } else {
      const bool product = name == "cumprod";
      double acc = product ? 1.0 : 0.0;
      for (double x : v) {
        acc = product ? acc * x : acc + x;
        out.push_back(acc);
      }
    }
    chop_.apply(std::span<double>(out), kOutputStream);
    return out;
  }

  // -- special-shape functions ----------------------------------------------

  /// Significand in [0.5,1) (rounded) and unrounded exponent.
  std::pair<double, int> frexp(double x) const {
    int e = 0;
    const double m = std::frexp(chop_(x, 0, kFirstOperandStream), &e);
    return {chop_(m, 0, kOutputStream), e};
  }

  /// (fractional part rounded, integral part).
  std::pair<double, double> modf(double x) const {
    double whole = 0.0;
    const double frac = std::modf(chop_(x, 0, kFirstOperandStream), &whole);
    return {chop_(frac, 0, kOutputStream), whole};
  }

  /// Rounds to `decimals` decimal places, ties to even.
  std::vector<double> round(std::span<const double> xs, int decimals = 0) const {
    std::vector<double> v = chop_(xs, kFirstOperandStream);
    const double scale = std::pow(10.0, decimals);
    for (double& x : v) x = std::nearbyint(x * scale) / scale;
    chop_.apply(std::span<double>(v), kOutputStream);
    return v;
  }

  std::vector<double> clip(std::span<const double> xs, double lo,
                           double hi) const {
    if (lo > hi) throw std::invalid_argument("clip: lo > hi");
    std::vector<double> v = chop_(xs, kFirstOperandStream);
    for (double& x : v) x = std::isnan(x) ? x : std::clamp(x, lo, hi);
    chop_.apply(std::span<double>(v), kOutputStream);
    return v;
  }

  double angle(double re, double im) const {
    return chop_(std::atan2(chop_(im, 0, kSecondOperandStream),
                            chop_(re, 0, kFirstOperandStream)),
                 0, kOutputStream);
  }
  double real(double re, double /*im*/) const {
    return chop_(re, 0, kFirstOperandStream);
  }
  double imag(double /*re*/, double im) const {
    return chop_(im, 0, kSecondOperandStream);
  }
  std::pair<double, double> conj(double re, double im) const {
    return {chop_(re, 0, kFirstOperandStream),
            -chop_(im, 0, kSecondOperandStream)};
  }

 private:
  double violation(std::string_view name, double x) const {
    if (policy_ == DomainPolicy::kQuietNaN) return detail::quiet_nan();
    throw DomainError(name, x);
  }

  double apply_binary(const FunctionEntry& fn, std::string_view name,
                      double x, double y) const {
    const bool nan_in = std::isnan(x) || std::isnan(y);
    if (fn.domain2 && !nan_in && !fn.domain2(x, y)) {
      // Report the divisor/exponent when it alone is at fault.
      return violation(name, fn.domain2(x, 1.0) ? y : x);
    }
    return fn.binary(x, y);
  }

  static double reduce_exact(std::string_view name,
                             std::span<const double> v, int ddof) {
    if (name == "sum") {
      double acc = 0.0;
      for (double x : v) acc += x;
      return acc;
    }
    if (name == "prod") {
      double acc = 1.0;
      for (double x : v) acc *= x;
      return acc;
    }
    if (v.empty()) {
      throw std::invalid_argument(std::string(name) + ": empty input");
    }
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (name == "mean") return mean;
    if (name == "var" || name == "std") {
      if (ddof < 0 || static_cast<std::size_t>(ddof) >= v.size()) {
        throw std::invalid_argument(std::string(name) +
                                    ": ddof must be in [0, n)");
      }
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double var = ss / static_cast<double>(v.size() - ddof);
      return name == "var" ? var : std::sqrt(var);
    }
    throw std::invalid_argument(std::string(name) +
                                ": not an array reduction; use dot/matmul");
  }

  Chop chop_;
  DomainPolicy policy_;
};

}  // namespace chopkit
