// Copyright 2026 The smoothc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Closed-form convolutions of atomic functions (and their squares) with
// box, tent and Gaussian kernels of standard deviation sigma.

#ifndef SMOOTHC_KERNELS_HPP_
#define SMOOTHC_KERNELS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "smoothc/ir.hpp"

namespace smoothc {

enum class KernelFamily : std::uint8_t { kGaussian, kBox, kTent };

inline std::string_view kernel_name(KernelFamily k) {
  switch (k) {
    case KernelFamily::kGaussian: return "gaussian";
    case KernelFamily::kBox: return "box";
    case KernelFamily::kTent: return "tent";
  }
  return "?";
}

// Raised for table entries without a closed form (e.g. Gaussian 1/x).
class NoClosedFormError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when the kernel support reaches an undefined point of f.
class KernelDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kSqrt3 = 1.7320508075688772935;
inline constexpr double kSqrt6 = 2.4494897427831780982;

// Half-widths of the compact kernels with standard deviation sigma.
template <typename T>
T box_half_width(T sigma) { return T(kSqrt3) * sigma; }
template <typename T>
T tent_half_width(T sigma) { return T(kSqrt6) * sigma; }

template <typename T>
T kernel_pdf(KernelFamily k, T u, T sigma) {
  using std::abs;
  using std::exp;
  switch (k) {
    case KernelFamily::kGaussian:
      return exp(-u * u / (2 * sigma * sigma)) /
             (sigma * T(std::sqrt(2 * std::numbers::pi)));
    case KernelFamily::kBox: {
      T h = box_half_width(sigma);
      return abs(u) <= h ? T(1) / (2 * h) : T(0);
    }
    case KernelFamily::kTent: {
      T w = tent_half_width(sigma);
      return abs(u) <= w ? (w - abs(u)) / (w * w) : T(0);
    }
  }
  return T(0);
}

inline constexpr int kMaxHermiteOrder = 16;

// He_n^[alpha](x) = sum_k n!/((n-2k)! k!) (-1/2)^k alpha^k x^(n-2k).
// With alpha = -sigma^2 this is E[(x + sigma Z)^n].
template <typename T>
T hermite_generalized(int n, T alpha, T x) {
  if (n < 0 || n > kMaxHermiteOrder) {
    throw std::out_of_range("hermite order " + std::to_string(n) +
                            " outside [0, " + std::to_string(kMaxHermiteOrder) + "]");
  }
  T sum = T(0);
  T coeff = T(1);
  for (int k = 0; 2 * k <= n; ++k) {
    T xp = T(1);
    for (int j = 0; j < n - 2 * k; ++j) xp *= x;
    sum += coeff * xp;
    coeff *= T((n - 2 * k) * (n - 2 * k - 1)) / T(k + 1) * T(-0.5) * alpha;
  }
  return sum;
}

template <typename T>
struct PeriodicSpec {
  T period = T(1);
  std::function<T(T)> fp;   // integral of f over [0, x], x in [0, period)
  std::function<T(T)> fp2;  // integral of fp over [0, x]
};

template <typename T>
PeriodicSpec<T> fract_spec() {
  return {T(1), [](T x) { return x * x / 2; }, [](T x) { return x * x * x / 6; }};
}

template <typename T>
PeriodicSpec<T> fract_sq_spec() {
  return {T(1), [](T x) { return x * x * x / 3; },
          [](T x) { return x * x * x * x / 12; }};
}

// First and second integrals of a periodic function from 0 to x.
template <typename T>
std::pair<T, T> periodic_antiderivatives(const PeriodicSpec<T>& spec, T x) {
  using std::floor;
  const T per = spec.period;
  const T q = floor(x / per);
  const T r = x - per * q;
  const T fpt = spec.fp(per);
  const T f1 = q * fpt + spec.fp(r);
  const T f2 = fpt * (per * (q - 1) * q / 2 + r * q) + spec.fp2(per) * q + spec.fp2(r);
  return {f1, f2};
}

template <typename T>
T smooth_periodic(const PeriodicSpec<T>& spec, KernelFamily k, T x, T sigma) {
  if (!(sigma > T(0))) throw std::invalid_argument("smooth_periodic needs sigma > 0");
  switch (k) {
    case KernelFamily::kBox: {
      const T h = box_half_width(sigma);
      return (periodic_antiderivatives(spec, x + h).first -
              periodic_antiderivatives(spec, x - h).first) /
             (2 * h);
    }
    case KernelFamily::kTent: {
      const T w = tent_half_width(sigma);
      return (periodic_antiderivatives(spec, x + w).second -
              2 * periodic_antiderivatives(spec, x).second +
              periodic_antiderivatives(spec, x - w).second) /
             (w * w);
    }
    case KernelFamily::kGaussian:
      break;
  }
  throw std::invalid_argument("smooth_periodic supports box and tent kernels only");
}

namespace detail {

template <typename T>
T fract(T x) {
  using std::floor;
  return x - floor(x);
}

template <typename T>
T sinc(T x) {
  using std::abs;
  using std::sin;
  if (abs(x) < T(1e-4)) return T(1) - x * x / 6 + x * x * x * x / 120;
  return sin(x) / x;
}

template <typename T>
T log_cosh(T x) {
  using std::abs;
  using std::exp;
  using std::log1p;
  const T ax = abs(x);
  return ax + log1p(exp(-2 * ax)) - T(std::numbers::ln2);
}

// Sum of k^2 for 0 <= k < n, extended polynomially to negative n.
template <typename T>
T sum_sq(T n) { return (n - 1) * n * (2 * n - 1) / 6; }

// Sum of sum_sq(k) for 0 <= k < n, extended polynomially.
template <typename T>
T sum_sum_sq(T n) {
  const T tri = (n - 1) * n / 2;
  return (n - 1) * sum_sq(n) - tri * tri;
}

// Distance from x to the nearest odd multiple of pi/2.
template <typename T>
T tan_pole_distance(T x) {
  using std::abs;
  using std::round;
  const T pi = T(std::numbers::pi);
  const T k = round(x / pi - T(0.5));
  return abs(x - (k + T(0.5)) * pi);
}

template <typename T>
[[noreturn]] void domain_fail(OpCode code, T x, T half) {
  throw KernelDomainError(std::string(op_name(code.op)) + ": kernel support [" +
                          std::to_string(static_cast<double>(x - half)) + ", " +
                          std::to_string(static_cast<double>(x + half)) +
                          "] reaches an undefined point");
}

// Throws if [x - half, x + half] leaves the domain of f.
template <typename T>
void check_support(OpCode code, T x, T half) {
  using std::abs;
  const T slack = T(1e-12) * std::max(T(1), abs(x));
  switch (code.op) {
    case Op::kReciprocal:
      if (!(abs(x) > half)) domain_fail(code, x, half);
      break;
    case Op::kPowInt:
      if (code.power < 0 && !(abs(x) > half)) domain_fail(code, x, half);
      break;
    case Op::kSqrt:
      if (x - half < -slack) domain_fail(code, x, half);
      break;
    case Op::kLog:
      if (!(x - half > 0)) domain_fail(code, x, half);
      break;
    case Op::kTan:
      if (!(tan_pole_distance(x) > half)) domain_fail(code, x, half);
      break;
    default:
      break;
  }
}

// E[(x + u)^p] for u ~ U[-h, h], non-negative integer p, expanded so that
// there is no cancellation for small h.
template <typename T>
T power_box_poly(int p, T x, T h) {
  T sum = T(0);
  T binom = T(1);  // C(p, 2k)
  T h2k = T(1);
  for (int k = 0; 2 * k <= p; ++k) {
    T xp = T(1);
    for (int j = 0; j < p - 2 * k; ++j) xp *= x;
    sum += binom * xp * h2k / T(2 * k + 1);
    binom *= T((p - 2 * k) * (p - 2 * k - 1)) / T((2 * k + 1) * (2 * k + 2));
    h2k *= h * h;
  }
  return sum;
}

// E[(x + u)^p] for u ~ U[-h, h] and real p, support inside the domain.
template <typename T>
T power_box(T p, T x, T h) {
  using std::abs;
  using std::log;
  using std::max;
  using std::pow;
  if (p >= 0 && p == std::floor(p) && p <= 64) {
    return power_box_poly(static_cast<int>(p), x, h);
  }
  if (p == T(-1)) return log(abs((x + h) / (x - h))) / (2 * h);
  T lo = x - h, hi = x + h;
  if (p != std::floor(p)) lo = max(lo, T(0));
  return (pow(hi, p + 1) - pow(lo, p + 1)) / ((p + 1) * (hi - lo));
}

// Antiderivatives of x^p (first when order == 1, second when order == 2).
template <typename T>
T power_antiderivative(T p, T x, int order) {
  using std::abs;
  using std::log;
  using std::max;
  using std::pow;
  if (p != std::floor(p)) x = max(x, T(0));
  if (order == 1) {
    if (p == T(-1)) return log(abs(x));
    return pow(x, p + 1) / (p + 1);
  }
  if (p == T(-1)) return x * log(abs(x)) - x;
  if (p == T(-2)) return -log(abs(x));
  return pow(x, p + 2) / ((p + 1) * (p + 2));
}

// The real exponent of x^p-shaped entries (pow, reciprocal, sqrt) and the
// square flag folded in.
template <typename T>
bool power_exponent(OpCode code, bool square, T* p) {
  T base;
  switch (code.op) {
    case Op::kPowInt: base = T(code.power); break;
    case Op::kReciprocal: base = T(-1); break;
    case Op::kSqrt: base = T(0.5); break;
    default: return false;
  }
  *p = square ? 2 * base : base;
  return true;
}

}  // namespace detail

// f(x) or f(x)^2 for a unary operator (kInput acts as the identity).
template <typename T>
T atomic_value(OpCode code, T x, bool square) {
  T v;
  if (code.op == Op::kInput) {
    v = x;
  } else {
    const double a = static_cast<double>(x);
    v = T(apply_op(code, {&a, 1}));
  }
  return square ? v * v : v;
}

// Antiderivative of f (order 1) or of that antiderivative (order 2), or of
// f^2 when square is set. Returns NaN where no elementary form is known
// (second antiderivatives of tan and tanh).
template <typename T>
T antiderivative(OpCode code, bool square, T x, int order) {
  using std::cos;
  using std::cosh;
  using std::exp;
  using std::floor;
  using std::log;
  using std::max;
  using std::sin;
  using std::sinh;
  using std::tan;
  using std::tanh;
  using std::abs;
  const bool first = order == 1;
  const T nan = std::numeric_limits<T>::quiet_NaN();
  T p;
  if (detail::power_exponent(code, square, &p)) {
    return detail::power_antiderivative(p, x, order);
  }
  auto fract_f = [&](T v, bool sq) {
    const T n = floor(v);
    const T f = v - n;
    if (!sq) {
      return first ? n / 2 + f * f / 2
                   : (n - 1) * n / 4 + n * f / 2 + n / 6 + f * f * f / 6;
    }
    return first ? n / 3 + f * f * f / 3
                 : ((n - 1) * n / 2 + f * n) / 3 + n / 12 + f * f * f * f / 12;
  };
  auto floor_f = [&](T v) {
    return first ? v * v / 2 - fract_f(v, false) : v * v * v / 6 - fract_f(v, false);
  };
  auto floor_sq_f = [&](T v) {
    const T n = floor(v);
    const T f = v - n;
    const T s = detail::sum_sq(n);
    return first ? s + n * n * f
                 : detail::sum_sum_sq(n) + s / 2 + s * f + n * n * f * f / 2;
  };
  switch (code.op) {
    case Op::kInput:
      if (square) return first ? x * x * x / 3 : x * x * x * x / 12;
      return first ? x * x / 2 : x * x * x / 6;
    case Op::kNeg:
      if (square) return first ? x * x * x / 3 : x * x * x * x / 12;
      return first ? -x * x / 2 : -x * x * x / 6;
    case Op::kSin:
      if (square) return first ? x / 2 - sin(2 * x) / 4 : x * x / 4 + cos(2 * x) / 8;
      return first ? -cos(x) : -sin(x);
    case Op::kCos:
      if (square) return first ? x / 2 + sin(2 * x) / 4 : x * x / 4 - cos(2 * x) / 8;
      return first ? sin(x) : -cos(x);
    case Op::kTan:
      if (square) return first ? tan(x) - x : -log(abs(cos(x))) - x * x / 2;
      return first ? -log(abs(cos(x))) : nan;
    case Op::kSinh:
      if (square) return first ? sinh(2 * x) / 4 - x / 2 : cosh(2 * x) / 8 - x * x / 4;
      return first ? cosh(x) : sinh(x);
    case Op::kCosh:
      if (square) return first ? sinh(2 * x) / 4 + x / 2 : cosh(2 * x) / 8 + x * x / 4;
      return first ? sinh(x) : cosh(x);
    case Op::kTanh:
      if (square) return first ? x - tanh(x) : x * x / 2 - detail::log_cosh(x);
      return first ? detail::log_cosh(x) : nan;
    case Op::kExp:
      if (square) return first ? exp(2 * x) / 2 : exp(2 * x) / 4;
      return exp(x);
    case Op::kLog: {
      const T l = log(x);
      if (square) {
        return first ? x * (l * l - 2 * l + 2)
                     : x * x * l * l / 2 - 3 * x * x * l / 2 + 7 * x * x / 4;
      }
      return first ? x * l - x : x * x * l / 2 - 3 * x * x / 4;
    }
    case Op::kHeaviside: {
      const T r = max(x, T(0));
      return first ? r : r * r / 2;
    }
    case Op::kFract:
      return fract_f(x, square);
    case Op::kFloor:
      return square ? floor_sq_f(x) : floor_f(x);
    case Op::kCeil:
      // ceil(x) = -floor(-x)
      if (square) return first ? -floor_sq_f(-x) : floor_sq_f(-x);
      return first ? floor_f(-x) : -floor_f(-x);
    default:
      break;
  }
  throw std::invalid_argument(std::string("no antiderivative for ") +
                              std::string(op_name(code.op)));
}

// Mean of f (or f^2) over [lo, hi]; used for asymmetrically truncated boxes.
template <typename T>
T box_average(OpCode code, T lo, T hi, bool square) {
  using std::abs;
  const T width = hi - lo;
  if (!(width > T(1e-12) * std::max(T(1), abs(lo)))) {
    return atomic_value(code, (lo + hi) / 2, square);
  }
  return (antiderivative(code, square, hi, 1) - antiderivative(code, square, lo, 1)) /
         width;
}

// True when smooth_atomic has a form for (op, kernel); false means it
// throws NoClosedFormError.
inline bool has_closed_form(OpCode code, KernelFamily k) {
  if (arity(code.op) != 1 && code.op != Op::kInput) return false;
  if (k != KernelFamily::kGaussian) return true;
  switch (code.op) {
    case Op::kInput:
    case Op::kNeg:
    case Op::kSin:
    case Op::kCos:
    case Op::kSinh:
    case Op::kCosh:
    case Op::kExp:
    case Op::kHeaviside:
      return true;
    case Op::kPowInt:
      return code.power >= 0;
    default:
      return false;
  }
}

namespace detail {

template <typename T>
T smooth_gaussian(OpCode code, T x, T sigma, bool square) {
  using std::cos;
  using std::cosh;
  using std::erf;
  using std::exp;
  using std::sin;
  const T s2 = sigma * sigma;
  switch (code.op) {
    case Op::kInput:
      return square ? x * x + s2 : x;
    case Op::kNeg:
      return square ? x * x + s2 : -x;
    case Op::kPowInt:
      if (code.power < 0) break;
      return hermite_generalized(square ? 2 * code.power : code.power, -s2, x);
    case Op::kSin:
      return square ? T(0.5) - T(0.5) * cos(2 * x) * exp(-2 * s2) : sin(x) * exp(-s2 / 2);
    case Op::kCos:
      return square ? T(0.5) + T(0.5) * cos(2 * x) * exp(-2 * s2) : cos(x) * exp(-s2 / 2);
    case Op::kSinh:
      if (square) return (exp(2 * s2) * cosh(2 * x) - 1) / 2;
      return (exp(x + s2 / 2) - exp(-x + s2 / 2)) / 2;
    case Op::kCosh:
      if (square) return (exp(2 * s2) * cosh(2 * x) + 1) / 2;
      return (exp(x + s2 / 2) + exp(-x + s2 / 2)) / 2;
    case Op::kExp:
      return square ? exp(2 * x + 2 * s2) : exp(x + s2 / 2);
    case Op::kHeaviside:
      return (1 + erf(x / (T(std::numbers::sqrt2) * sigma))) / 2;
    default:
      break;
  }
  throw NoClosedFormError(std::string("no Gaussian closed form for ") +
                          std::string(op_name(code.op)) + (square ? "^2" : ""));
}

template <typename T>
T fract_box(T x, T h) {
  using std::floor;
  const T a = x + h, b = x - h;
  const T fa = fract(a), fb = fract(b);
  return (fa * fa + floor(a) - fb * fb - floor(b)) / (4 * h);
}

template <typename T>
T fract_sq_box(T x, T h) {
  using std::floor;
  const T a = x + h, b = x - h;
  const T fa = fract(a), fb = fract(b);
  return (fa * fa * fa + floor(a) - fb * fb * fb - floor(b)) / (6 * h);
}

// x * fract(x) integrated from 0.
template <typename T>
T x_fract_antiderivative(T x) {
  using std::floor;
  const T n = floor(x);
  const T f = x - n;
  return n * (n - 1) / 4 + n / 3 + n * f * f / 2 + f * f * f / 3;
}

// floor^2 via floor^2 = x^2 + fract^2 - 2 x fract(x).
template <typename T>
T floor_sq_box(T x, T h) {
  const T x_fract = (x_fract_antiderivative(x + h) - x_fract_antiderivative(x - h)) / (2 * h);
  return x * x + h * h / 3 + fract_sq_box(x, h) - 2 * x_fract;
}

template <typename T>
T smooth_box(OpCode code, T x, T sigma, bool square) {
  using std::clamp;
  using std::cos;
  using std::cosh;
  using std::exp;
  using std::abs;
  using std::log;
  using std::pow;
  using std::sin;
  using std::sinh;
  using std::tan;
  using std::tanh;
  const T h = box_half_width(sigma);
  const T s2 = sigma * sigma;
  T p;
  if (power_exponent(code, square, &p)) {
    if (code.op == Op::kSqrt && square) return x;
    return power_box(p, x, h);
  }
  switch (code.op) {
    case Op::kInput:
      return square ? x * x + s2 : x;
    case Op::kNeg:
      return square ? x * x + s2 : -x;
    case Op::kSin:
      return square ? T(0.5) - T(0.5) * cos(2 * x) * sinc(2 * h) : sin(x) * sinc(h);
    case Op::kCos:
      return square ? T(0.5) + T(0.5) * cos(2 * x) * sinc(2 * h) : cos(x) * sinc(h);
    case Op::kTan:
      if (square) return (tan(x + h) - tan(x - h)) / (2 * h) - 1;
      return -log(abs(cos(x + h) / cos(x - h))) / (2 * h);
    case Op::kSinh:
      if (square) return T(-0.5) + (sinh(2 * x + 2 * h) - sinh(2 * x - 2 * h)) / (8 * h);
      return (cosh(x + h) - cosh(x - h)) / (2 * h);
    case Op::kCosh:
      if (square) return T(0.5) + (sinh(2 * x + 2 * h) - sinh(2 * x - 2 * h)) / (8 * h);
      return (sinh(x + h) - sinh(x - h)) / (2 * h);
    case Op::kTanh:
      if (square) return 1 - (tanh(x + h) - tanh(x - h)) / (2 * h);
      return (log_cosh(x + h) - log_cosh(x - h)) / (2 * h);
    case Op::kExp:
      if (square) return (exp(2 * (x + h)) - exp(2 * (x - h))) / (4 * h);
      return (exp(x + h) - exp(x - h)) / (2 * h);
    case Op::kLog:
      return (antiderivative(code, square, x + h, 1) -
              antiderivative(code, square, x - h, 1)) /
             (2 * h);
    case Op::kHeaviside:
      return clamp(x / (2 * h) + T(0.5), T(0), T(1));
    case Op::kFract:
      return square ? fract_sq_box(x, h) : fract_box(x, h);
    case Op::kFloor:
      return square ? floor_sq_box(x, h) : x - fract_box(x, h);
    case Op::kCeil:
      return square ? floor_sq_box(-x, h) : x + fract_box(-x, h);
    default:
      break;
  }
  throw std::invalid_argument(std::string("not a unary function: ") +
                              std::string(op_name(code.op)));
}

inline constexpr std::array<double, 8> kGaussLegendreX = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
inline constexpr std::array<double, 8> kGaussLegendreW = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

// Tent as the convolution of two boxes of standard deviation sigma/sqrt(2),
// the outer one integrated with 16-point Gauss-Legendre.
template <typename T>
T smooth_tent_two_pass(OpCode code, T x, T sigma, bool square) {
  const T inner = sigma / T(std::numbers::sqrt2);
  const T hh = box_half_width(inner);
  T sum = T(0);
  for (std::size_t i = 0; i < kGaussLegendreX.size(); ++i) {
    const T u = hh * T(kGaussLegendreX[i]);
    sum += T(kGaussLegendreW[i]) *
           (smooth_box(code, x + u, inner, square) + smooth_box(code, x - u, inner, square));
  }
  return sum / 2;
}

template <typename T>
T smooth_tent(OpCode code, T x, T sigma, bool square) {
  using std::abs;
  using std::isfinite;
  const T w = tent_half_width(sigma);
  if (w < T(1e-3) * std::max(T(1), abs(x))) {
    return smooth_tent_two_pass(code, x, sigma, square);
  }
  if (code.op == Op::kSqrt && square) return x;
  const T f0 = antiderivative(code, square, x, 2);
  if (!isfinite(f0)) return smooth_tent_two_pass(code, x, sigma, square);
  return (antiderivative(code, square, x + w, 2) - 2 * f0 +
          antiderivative(code, square, x - w, 2)) /
         (w * w);
}

}  // namespace detail

// Convolution of f (or f^2 when square is set) with the kernel at x.
// sigma == 0 returns f(x) exactly; very narrow kernels also return f(x).
template <typename T>
T smooth_atomic(OpCode code, KernelFamily k, T x, T sigma, bool square) {
  using std::abs;
  if (!(sigma >= T(0))) throw std::invalid_argument("sigma must be >= 0");
  if (k == KernelFamily::kGaussian && !has_closed_form(code, k)) {
    throw NoClosedFormError(std::string("no Gaussian closed form for ") +
                            std::string(op_name(code.op)) + (square ? "^2" : ""));
  }
  const T half = k == KernelFamily::kTent ? tent_half_width(sigma)
                 : k == KernelFamily::kBox ? box_half_width(sigma)
                                           : T(0);
  if (k != KernelFamily::kGaussian) detail::check_support(code, x, half);
  if (sigma == T(0) || box_half_width(sigma) <= T(1e-7) * std::max(T(1), abs(x))) {
    if (code.op == Op::kSqrt && x < T(0)) x = T(0);
    return atomic_value(code, x, square);
  }
  switch (k) {
    case KernelFamily::kGaussian: return detail::smooth_gaussian(code, x, sigma, square);
    case KernelFamily::kBox: return detail::smooth_box(code, x, sigma, square);
    case KernelFamily::kTent: return detail::smooth_tent(code, x, sigma, square);
  }
  return T(0);
}

}  // namespace smoothc

#endif  // SMOOTHC_KERNELS_HPP_
