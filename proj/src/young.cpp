#include "omlab/young.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "omlab/random.hpp"

namespace omlab {

namespace {

constexpr double kInverseTol = 1e-12;
constexpr int kMaxBisection = 200;
constexpr double kRoundingSlack = 1e-12;

double int_or_pow(double x, double e) noexcept {
  if (e == 1.0) return x;
  if (e == 2.0) return x * x;
  if (e == 3.0) return x * x * x;
  return std::pow(x, e);
}

}  // namespace

YoungPhi::YoungPhi(double r, double delta) : r_(r), delta_(delta) {
  if (!(r >= 1.0) || !std::isfinite(r)) throw std::invalid_argument("Young function needs r >= 1");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("Young function needs delta >= 0");
  // Convexity spot check: midpoint values lie under the chord.
  for (double a : {0.0, 0.5, 1.0, 2.0, 10.0}) {
    const double b = 2.0 * a + 1.0;
    const double mid = (*this)(0.5 * (a + b));
    if (mid > 0.5 * ((*this)(a) + (*this)(b)) * (1.0 + kRoundingSlack)) {
      throw std::logic_error("Young function failed the convexity spot check");
    }
  }
}

double YoungPhi::power(double t) const noexcept { return int_or_pow(t, r_); }

double YoungPhi::log_power(double x) const noexcept { return int_or_pow(x, delta_); }

double YoungPhi::operator()(double t) const noexcept {
  if (t <= 0.0) return 0.0;
  const double power = int_or_pow(t, r_);
  if (delta_ == 0.0 || t <= 1.0) return power;
  return power * log_power(1.0 + std::log(t));
}

YoungPhi YoungPhi::parse(const std::string& text) {
  double r = 1.0;
  double delta = 0.0;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("malformed phi spec: " + text);
    const std::string key = item.substr(0, eq);
    const std::string number = item.substr(eq + 1);
    std::size_t used = 0;
    const double value = std::stod(number, &used);
    if (used != number.size()) throw std::invalid_argument("malformed phi spec: " + text);
    if (key == "r") {
      r = value;
    } else if (key == "delta") {
      delta = value;
    } else {
      throw std::invalid_argument("unknown phi parameter: " + key);
    }
  }
  return YoungPhi(r, delta);
}

std::string YoungPhi::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << "r=" << r_ << ",delta=" << delta_;
  return os.str();
}

double phi_eval(const YoungPhi& phi, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("phi_eval needs finite t >= 0");
  return phi(t);
}

double phi_inverse(const YoungPhi& phi, double y) {
  if (!(y >= 0.0) || !std::isfinite(y)) throw std::invalid_argument("phi_inverse needs finite y >= 0");
  if (y == 0.0) return 0.0;
  const double power_root = std::pow(y, 1.0 / phi.r());
  // Φ(t) = t^r on [0, 1].
  if (phi.is_power() || y <= 1.0) return power_root;

  // t^r <= Φ(t) <= t^(r+δ) for t >= 1, so the root lies in this bracket.
  double lo = std::pow(y, 1.0 / (phi.r() + phi.delta()));
  double hi = power_root;
  while (phi(lo) > y) lo *= 0.5;
  while (phi(hi) < y) hi *= 2.0;
  for (int it = 0; it < kMaxBisection && hi - lo > kInverseTol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (phi(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

GridFunction conjugate_weight(const GridFunction& v, const YoungPhi& phi) {
  if (!v.strictly_positive()) throw std::invalid_argument("conjugate_weight needs v > 0 on every cell");
  return transform(v, [&](double x) { return 1.0 / phi(1.0 / x); });
}

PowerBound power_bound_constant(const YoungPhi& phi, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("power bound needs eps > 0");
  const double delta = phi.delta();
  const double c = std::max(std::pow(delta / eps, delta), 1.0);
  PowerBound out{c, 0.0, 0};
  for (double t = 1.0; t <= 1e6; t += 0.5) {
    const double ratio = phi(t) / (c * std::pow(t, phi.r() + eps));
    out.max_ratio = std::max(out.max_ratio, ratio);
    ++out.samples;
  }
  if (out.max_ratio > 1.0 + kRoundingSlack) {
    throw std::logic_error("sampled power bound violated");
  }
  return out;
}

SubmultiplicativeReport check_submultiplicative(const YoungPhi& phi,
                                                std::span<const std::pair<double, double>> pairs) {
  SubmultiplicativeReport rep;
  for (const auto& [s, t] : pairs) {
    const double den = phi(s) * phi(t);
    ++rep.samples;
    if (den <= 0.0) continue;  // Φ(st) = 0 as well
    rep.max_ratio = std::max(rep.max_ratio, phi(s * t) / den);
  }
  rep.holds = rep.max_ratio <= 1.0 + kRoundingSlack;
  return rep;
}

SubmultiplicativeReport check_submultiplicative(const YoungPhi& phi, std::uint64_t seed,
                                                std::size_t count) {
  Rng rng(seed);
  std::vector<std::pair<double, double>> pairs{{0.0, 0.0}, {1.0, 1.0}, {0.0, 5.0}};
  pairs.reserve(count + pairs.size());
  const double span = std::log(1e12);
  for (std::size_t i = 0; i < count; ++i) {
    const double s = 1e-6 * std::exp(span * rng.unit());
    const double t = 1e-6 * std::exp(span * rng.unit());
    pairs.emplace_back(s, t);
  }
  return check_submultiplicative(phi, pairs);
}

}  // namespace omlab
