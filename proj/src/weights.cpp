#include "omlab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "omlab/summation.hpp"

namespace omlab {

namespace {

constexpr double kEpsStep = 0.05;
constexpr int kEpsCandidates = 19;
constexpr int kGoldenSteps = 60;

void require_positive(const GridFunction& w, const char* what) {
  if (!w.strictly_positive()) throw std::invalid_argument(std::string(what) + " needs w > 0 on every cell");
}

void check_grids(const Domain& d, const std::vector<int>& grids) {
  if (grids.empty()) throw std::invalid_argument("no grids selected");
  for (int g : grids) {
    if (g < 0 || g >= grid_count(d.dim())) throw std::invalid_argument("grid id out of range");
  }
}

/// Cubes of the selected grids lying inside the box, coarse to fine.
std::vector<DyadicCube> inbox_cubes(const Domain& d, const std::vector<int>& grids) {
  std::vector<DyadicCube> out;
  for (int g : grids) {
    for (int gen = d.box_exp(); gen >= d.min_gen(); --gen) {
      const CubeLattice lat(d, g, gen);
      for (Index i = 0; i < lat.size(); ++i) {
        const DyadicCube q = lat.cube(i);
        if (inside_box(q, d)) out.push_back(q);
      }
    }
  }
  return out;
}

struct PairSet {
  std::vector<double> x;  // |E|/|Q|
  std::vector<double> y;  // w(E)/w(Q)
  bool exhaustive = true;
};

PairSet superlevel_pairs(const GridFunction& w, const std::vector<int>& grids, std::size_t budget) {
  const Domain& d = w.domain();
  PairSet ps;
  std::vector<double> vals;
  for (const DyadicCube& q : inbox_cubes(d, grids)) {
    vals.clear();
    for_each_cell(clipped_cell_box(q, d), d, [&](Index i) { vals.push_back(w[i]); });
    if (ps.x.size() + vals.size() > budget) {
      ps.exhaustive = false;
      break;
    }
    std::sort(vals.begin(), vals.end(), std::greater<>());
    const double total = compensated_sum(vals);
    const double n = static_cast<double>(vals.size());
    CompensatedSum prefix;
    for (std::size_t j = 0; j < vals.size(); ++j) {
      prefix.add(vals[j]);
      ps.x.push_back(static_cast<double>(j + 1) / n);
      ps.y.push_back(j + 1 == vals.size() ? 1.0 : prefix.value() / total);
    }
  }
  return ps;
}

double constant_at(const PairSet& ps, double eps) {
  double c = 1.0;
  const auto n = static_cast<std::ptrdiff_t>(ps.x.size());
#pragma omp parallel for reduction(max : c) schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    c = std::max(c, ps.y[static_cast<std::size_t>(j)] / std::pow(ps.x[static_cast<std::size_t>(j)], eps));
  }
  return c;
}

double objective(double c, double eps) { return std::log(c) / (1.0 - eps); }

}  // namespace

A1Certificate a1_constant(const GridFunction& w, const std::vector<int>& grids, GenRange gens) {
  require_positive(w, "a1_constant");
  const Domain& d = w.domain();
  check_grids(d, grids);
  if (gens.hi < gens.lo || gens.lo < d.min_gen()) throw std::invalid_argument("bad generation range");

  A1Certificate cert{0.0, {}, grids};
  for (int g : grids) {
    for (int gen = gens.lo; gen <= gens.hi; ++gen) {
      const CubeLattice lat(d, g, gen);
      std::vector<double> ratio(static_cast<std::size_t>(lat.size()));
#pragma omp parallel for schedule(static)
      for (Index i = 0; i < lat.size(); ++i) {
        const DyadicCube q = lat.cube(i);
        ratio[static_cast<std::size_t>(i)] = average(w, q) / min_over(w, q);
      }
      for (Index i = 0; i < lat.size(); ++i) {
        if (ratio[static_cast<std::size_t>(i)] > cert.constant) {
          cert.constant = ratio[static_cast<std::size_t>(i)];
          cert.witness = lat.cube(i);
        }
      }
    }
  }
  return cert;
}

A1Certificate a1_constant(const GridFunction& w, const std::vector<int>& grids) {
  return a1_constant(w, grids, default_gens(w.domain()));
}

double ap_constant(const GridFunction& w, double p, const std::vector<int>& grids) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("ap_constant needs p > 1");
  require_positive(w, "ap_constant");
  check_grids(w.domain(), grids);
  const double dual = 1.0 - p / (p - 1.0);  // 1 - p'
  const GridFunction dual_w = transform(w, [&](double x) { return std::pow(x, dual); });
  const std::vector<DyadicCube> cubes = inbox_cubes(w.domain(), grids);
  double best = 0.0;
  const auto n = static_cast<std::ptrdiff_t>(cubes.size());
#pragma omp parallel for reduction(max : best) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const DyadicCube& q = cubes[static_cast<std::size_t>(i)];
    best = std::max(best, average(w, q) * std::pow(average(dual_w, q), p - 1.0));
  }
  return best;
}

double AInfParams::C0() const noexcept { return std::pow(C, 1.0 / (1.0 - eps)); }

AInfParams ainf_params(const GridFunction& w, const std::vector<int>& grids, std::size_t budget) {
  require_positive(w, "ainf_params");
  check_grids(w.domain(), grids);
  const PairSet ps = superlevel_pairs(w, grids, budget);

  double best_eps = kEpsStep;
  double best_c = constant_at(ps, best_eps);
  double best_j = objective(best_c, best_eps);
  for (int i = 2; i <= kEpsCandidates; ++i) {
    const double eps = kEpsStep * i;
    const double c = constant_at(ps, eps);
    const double j = objective(c, eps);
    if (j <= best_j) {  // ties go to the larger eps
      best_eps = eps;
      best_c = c;
      best_j = j;
    }
  }

  // One golden-section pass around the best candidate.
  const double phi_ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = std::max(0.01, best_eps - kEpsStep);
  double hi = std::min(0.99, best_eps + kEpsStep);
  double x1 = hi - phi_ratio * (hi - lo);
  double x2 = lo + phi_ratio * (hi - lo);
  double j1 = objective(constant_at(ps, x1), x1);
  double j2 = objective(constant_at(ps, x2), x2);
  for (int it = 0; it < kGoldenSteps; ++it) {
    if (j1 < j2) {
      hi = x2;
      x2 = x1;
      j2 = j1;
      x1 = hi - phi_ratio * (hi - lo);
      j1 = objective(constant_at(ps, x1), x1);
    } else {
      lo = x1;
      x1 = x2;
      j1 = j2;
      x2 = lo + phi_ratio * (hi - lo);
      j2 = objective(constant_at(ps, x2), x2);
    }
  }
  const double refined = 0.5 * (lo + hi);
  const double refined_c = constant_at(ps, refined);
  if (objective(refined_c, refined) < best_j) {
    best_eps = refined;
    best_c = refined_c;
  }
  return AInfParams{best_c, best_eps, ps.exhaustive, ps.x.size()};
}

double ainf_constant_at(const GridFunction& w, double eps, const std::vector<int>& grids) {
  require_positive(w, "ainf_constant_at");
  check_grids(w.domain(), grids);
  return constant_at(superlevel_pairs(w, grids, std::numeric_limits<std::size_t>::max()), eps);
}

Check levelset_bound_check(const GridFunction& w, const DyadicCube& q, double lambda,
                           const AInfParams& params) {
  if (!(lambda > 0.0)) throw std::invalid_argument("levelset_bound_check needs lambda > 0");
  const Domain& d = w.domain();
  Index above = 0;
  for_each_cell(clipped_cell_box(q, d), d, [&](Index i) {
    if (w[i] > lambda) ++above;
  });
  const double lhs = static_cast<double>(above) * d.cell_volume();
  const double vol = cube_volume(q, d.dim());
  const double mean_ratio = integrate(w, q) / (lambda * vol);
  const double rhs = params.C0() * vol * std::pow(mean_ratio, 1.0 + params.xi());
  return make_check("levelset", lhs, rhs, to_string(q, d.dim()));
}

double bk_value(double a, const YoungPhi& phi, int k) { return 1.0 / phi(std::pow(a, -k)); }

double bk_log(double a, const YoungPhi& phi, int k) {
  const double la = std::log(a);
  return phi.r() * k * la - phi.delta() * std::log1p(std::max(0.0, -k * la));
}

BkSequence::BkSequence(double a, YoungPhi phi, int k_lo, int k_hi)
    : a_(a), phi_(phi), k_lo_(k_lo), k_hi_(k_hi) {
  if (!(a > 1.0) || !std::isfinite(a)) throw std::invalid_argument("b_k sequence needs a > 1");
  if (k_hi < k_lo) throw std::invalid_argument("empty k range");
  const double lower = phi_.power(a_);
  const double upper = phi_(a_);
  for (int k = k_lo_; k < k_hi_; ++k) {
    const double q = ratio(k);
    const std::string at = "k=" + std::to_string(k);
    report_.add(make_check("bk.lower", lower, q, at));
    report_.add(make_check("bk.upper", q, upper, at));
    if (q == lower) lower_.push_back(k);
    if (q == upper) upper_.push_back(k);
  }
}

double BkSequence::value(int k) const {
  if (k < k_lo_ || k > k_hi_) throw std::out_of_range("k outside the sequence range");
  return bk_value(a_, phi_, k);
}

double BkSequence::log_value(int k) const {
  if (k < k_lo_ || k > k_hi_) throw std::out_of_range("k outside the sequence range");
  return bk_log(a_, phi_, k);
}

double BkSequence::ratio(int k) const {
  const double la = std::log(a_);
  const double num = 1.0 + std::max(0.0, -k * la);
  const double den = 1.0 + std::max(0.0, -(k + 1) * la);
  return phi_.power(a_) * phi_.log_power(num / den);
}

GridFunction truncate(const GridFunction& v, double r, double cap) {
  if (!(cap > 0.0)) throw std::invalid_argument("truncate needs cap > 0");
  const YoungPhi power(r);
  return transform(v, [&](double x) { return std::min(power.power(x), cap); });
}

}  // namespace omlab
