#include "omlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <stdexcept>

#include "omlab/random.hpp"
#include "omlab/summation.hpp"

namespace omlab {

namespace {

constexpr int kMaxLevelScan = 200;

std::string cube_at(int k, const DyadicCube& q, int dim) {
  return "k=" + std::to_string(k) + " " + to_string(q, dim);
}

double ratio_of(double lhs, double rhs) {
  if (rhs > 0.0) return lhs / rhs;
  return lhs > 0.0 ? INFINITY : 0.0;
}

/// Stand-in for a CZ family whose cubes lie beyond the representable
/// generations: the tabulated top cube, which holds the whole box. The true
/// cube contains it, so containment against cubes inside the box is unchanged.
CZDecomposition covering_family(const Domain& d, const CubeTable& table, const YoungPhi& phi, double lambda) {
  const CubeLattice& top = table.lattice(table.gens.hi);
  const DyadicCube q = top.cube(top.index_of_cell(d.cell_coords(0)));
  if (!(table.value(q) > lambda)) throw std::logic_error("covering family below its level");
  const auto n = static_cast<std::size_t>(d.cell_count());
  return CZDecomposition{lambda, phi, table.grid, {q}, std::vector<std::uint8_t>(n, 1), std::vector<Index>(n, 0)};
}

}  // namespace

std::string to_string(BoundSide side) {
  switch (side) {
    case BoundSide::dyadic: return "dyadic";
    case BoundSide::lower: return "lower";
    case BoundSide::upper: return "upper";
  }
  throw std::logic_error("unknown bound side");
}

BoundSide parse_side(const std::string& name) {
  if (name == "dyadic") return BoundSide::dyadic;
  if (name == "lower") return BoundSide::lower;
  if (name == "upper") return BoundSide::upper;
  throw std::invalid_argument("unknown bound side: " + name);
}

std::vector<double> maximal_surrogate(const GridFunction& fv, const YoungPhi& phi, BoundSide side,
                                      int grid) {
  switch (side) {
    case BoundSide::dyadic: return dyadic_maximal(fv, phi, grid).values;
    case BoundSide::lower: return full_maximal(fv, phi).lower.values;
    case BoundSide::upper: return full_maximal(fv, phi).upper.values;
  }
  throw std::logic_error("unknown bound side");
}

InequalityRecord mixed_record(const GridFunction& f, const GridFunction& u, const GridFunction& v,
                              const GridFunction& w, const YoungPhi& phi,
                              const std::vector<double>& m, double t, BoundSide side) {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("threshold must be positive");
  CompensatedSum lhs;
  CompensatedSum rhs;
  for (Index i = 0; i < f.size(); ++i) {
    if (m[static_cast<std::size_t>(i)] / v[i] > t) lhs.add(u[i] * w[i]);
    rhs.add(phi(f[i] * v[i] / t) * u[i]);
  }
  const double vol = f.domain().cell_volume();
  InequalityRecord rec{t, lhs.value() * vol, rhs.value() * vol, 0.0, side};
  rec.ratio = ratio_of(rec.lhs, rec.rhs);
  return rec;
}

InequalityRecord mixed_inequality_ratio(const GridFunction& f, const GridFunction& u,
                                        const GridFunction& v, const YoungPhi& phi, double t,
                                        BoundSide side, int grid) {
  require_same_domain(f, u);
  require_same_domain(f, v);
  if (!u.strictly_positive() || !v.strictly_positive()) {
    throw std::invalid_argument("weights must be positive on every cell");
  }
  const GridFunction w = conjugate_weight(v, phi);
  const GridFunction fv = combine(f, v, [](double x, double y) { return x * y; });
  return mixed_record(f, u, v, w, phi, maximal_surrogate(fv, phi, side, grid), t, side);
}

// ---------------------------------------------------------------------------
// Sweeps

namespace {

struct InstanceRows {
  std::vector<SweepRow> rows;
  std::vector<SweepRow> refined;
};

std::vector<InequalityRecord> records_for(const GridFunction& f, const GridFunction& u,
                                          const GridFunction& v, const YoungPhi& phi,
                                          BoundSide side, const std::vector<double>& ts) {
  const GridFunction w = conjugate_weight(v, phi);
  const GridFunction fv = combine(f, v, [](double x, double y) { return x * y; });
  const std::vector<double> m = maximal_surrogate(fv, phi, side);
  std::vector<InequalityRecord> out;
  out.reserve(ts.size());
  for (double t : ts) out.push_back(mixed_record(f, u, v, w, phi, m, t, side));
  return out;
}

InstanceRows run_instance(const SweepConfig& cfg, std::size_t i) {
  std::vector<std::pair<double, double>> combos;
  for (double r : cfg.r_values)
    for (double delta : cfg.delta_values) combos.emplace_back(r, delta);
  const auto [r, delta] = combos[i % combos.size()];
  const InstanceKind kind = cfg.kinds[(i / combos.size()) % cfg.kinds.size()];
  const std::uint64_t seed = derive_seed(cfg.seed, i);

  const Domain d(cfg.dim, cfg.box_exp, cfg.cell_exp);
  InstanceParams params;
  params.r = r;
  params.u_cap = cfg.u_cap;
  params.vr_cap = cfg.vr_cap;
  if (cfg.side != BoundSide::dyadic) {
    params.grids.clear();
    for (int g = 0; g < grid_count(cfg.dim); ++g) params.grids.push_back(g);
  }
  const Instance inst = gen_instance(kind, d, params, seed);
  const YoungPhi phi(r, delta);

  // Thresholds come from the coarse field and are reused after refinement.
  const GridFunction fv = combine(inst.f, inst.v, [](double x, double y) { return x * y; });
  const std::vector<double> m = maximal_surrogate(fv, phi, cfg.side);
  double top = 0.0;
  for (Index c = 0; c < fv.size(); ++c) top = std::max(top, m[static_cast<std::size_t>(c)] / inst.v[c]);
  if (!(top > 0.0)) top = 1.0;
  std::vector<double> ts(cfg.thresholds);
  for (std::size_t j = 0; j < ts.size(); ++j) {
    const double frac = ts.size() == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(ts.size() - 1);
    ts[j] = top * cfg.t_lo * std::pow(cfg.t_hi / cfg.t_lo, frac);
  }

  InstanceRows out;
  const auto emit = [&](std::vector<SweepRow>& dst, const std::vector<InequalityRecord>& recs) {
    for (const InequalityRecord& rec : recs) {
      dst.push_back(SweepRow{seed, kind, r, delta, inst.a1_u.constant, inst.a1_vr.constant, rec});
    }
  };
  emit(out.rows, records_for(inst.f, inst.u, inst.v, phi, cfg.side, ts));
  if (cfg.refine) {
    emit(out.refined, records_for(inst.f.refined(), inst.u.refined(), inst.v.refined(), phi, cfg.side, ts));
  }
  return out;
}

}  // namespace

bool SweepReport::stable() const {
  if (!config.refine) return true;
  return std::fabs(refined_sup_ratio - sup_ratio) <= config.stability * sup_ratio;
}

std::optional<bool> SweepReport::pass() const {
  if (config.mode == SweepMode::conjecture) return std::nullopt;
  bool ok = all_finite() && stable();
  if (config.sup_bound) ok = ok && sup_ratio <= *config.sup_bound && refined_sup_ratio <= *config.sup_bound;
  return ok;
}

SweepReport sweep(const SweepConfig& config) {
  if (config.r_values.empty() || config.delta_values.empty() || config.kinds.empty()) {
    throw std::invalid_argument("sweep needs at least one r, delta and kind");
  }
  if (config.thresholds == 0) throw std::invalid_argument("sweep needs thresholds");
  if (!(config.t_lo > 0.0) || !(config.t_hi >= config.t_lo)) throw std::invalid_argument("bad threshold span");

  const auto n = static_cast<std::ptrdiff_t>(config.instances);
  std::vector<InstanceRows> per(config.instances);
  std::vector<std::exception_ptr> errors(config.instances);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      per[static_cast<std::size_t>(i)] = run_instance(config, static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SweepReport rep;
  rep.config = config;
  for (InstanceRows& p : per) {
    rep.rows.insert(rep.rows.end(), p.rows.begin(), p.rows.end());
    rep.refined_rows.insert(rep.refined_rows.end(), p.refined.begin(), p.refined.end());
  }
  const auto scan = [&](const std::vector<SweepRow>& rows, double& sup) {
    for (const SweepRow& row : rows) {
      if (std::isfinite(row.record.ratio)) {
        sup = std::max(sup, row.record.ratio);
      } else {
        ++rep.infinite;
      }
    }
  };
  scan(rep.rows, rep.sup_ratio);
  scan(rep.refined_rows, rep.refined_sup_ratio);
  return rep;
}

MaskComparison mr_levelset_identity_check(const GridFunction& f, const GridFunction& v, double r,
                                          double t, int grid) {
  require_same_domain(f, v);
  if (!(t > 0.0)) throw std::invalid_argument("threshold must be positive");
  if (!v.strictly_positive()) throw std::invalid_argument("v must be positive on every cell");
  const YoungPhi power(r);
  const GridFunction fv = combine(f, v, [](double x, double y) { return x * y; });
  const GridFunction fv_r = transform(fv, [&](double x) { return power.power(x); });
  const MaximalField m_r = dyadic_maximal(fv, power, grid);
  const MaximalField m_1 = dyadic_maximal(fv_r, YoungPhi(), grid);
  const double t_r = power.power(t);
  MaskComparison out;
  for (Index i = 0; i < f.size(); ++i) {
    const bool left = m_r[i] / v[i] > t;
    const bool right = m_1[i] / power.power(v[i]) > t_r;
    if (left) ++out.level_set_cells;
    if (left != right) ++out.mismatches;
  }
  return out;
}

LpReport lp_boundedness_check(const GridFunction& f, const GridFunction& u, const GridFunction& v,
                              double r, double p) {
  require_same_domain(f, u);
  require_same_domain(f, v);
  if (!(p > r)) throw std::invalid_argument("lp_boundedness_check needs p > r");
  if (!u.strictly_positive() || !v.strictly_positive()) {
    throw std::invalid_argument("weights must be positive on every cell");
  }
  const MaximalSandwich m = full_maximal(f, YoungPhi(r));
  CompensatedSum lhs;
  CompensatedSum rhs;
  for (Index i = 0; i < f.size(); ++i) {
    const double w = u[i] * std::pow(v[i], r - p);
    lhs.add(std::pow(m.lower[i], p) * w);
    rhs.add(std::pow(f[i], p) * w);
  }
  const double vol = f.domain().cell_volume();
  LpReport out{lhs.value() * vol, rhs.value() * vol, 0.0};
  out.ratio = ratio_of(out.lhs, out.rhs);
  return out;
}

// ---------------------------------------------------------------------------
// Audit setup

AuditSetup prepare_audit(const GridFunction& f, const GridFunction& u, const GridFunction& v,
                         const YoungPhi& phi, const AuditOptions& options) {
  require_same_domain(f, u);
  require_same_domain(f, v);
  if (options.t && !(*options.t > 0.0)) throw std::invalid_argument("audit threshold must be positive");
  const Domain& d = f.domain();
  const std::vector<int> grids{options.grid};
  const YoungPhi identity;
  const YoungPhi power(phi.r());
  const GridFunction vr = transform(v, [&](double x) { return power.power(x); });

  const A1Certificate a1_u = a1_constant(u, grids);
  const A1Certificate a1_v = a1_constant(v, grids);
  const A1Certificate a1_vr = a1_constant(vr, grids);
  const AInfParams ainf_u = ainf_params(u, grids);
  const AInfParams ainf_vr = ainf_params(vr, grids);

  const double p = options.p.value_or(2.0 / ainf_vr.eps);
  if (!(p > 1.0 / ainf_vr.eps)) throw std::invalid_argument("p must exceed 1/eps");
  const double p_dual = p / (p - 1.0);
  const double eta = 1.0 / (p_dual * (1.0 - ainf_vr.eps));
  const double alpha = options.alpha.value_or(0.5 * (1.0 + eta));
  if (!(alpha > 1.0 && alpha < eta)) throw std::invalid_argument("alpha must lie in (1, eta)");

  const double r = phi.r();
  const double delta = phi.delta();
  const double two_n = std::ldexp(1.0, d.dim());
  const double beta = r * (alpha - 1.0) / 2.0;
  const double L = phi.is_power() ? 0.0 : std::pow(delta / beta, delta / (r * (alpha - 1.0) - beta));
  double a = options.a.value_or(std::max(two_n, L) + 1.0);
  // For large L the +1 is lost to rounding.
  if (!options.a && !(a > L)) a = std::nextafter(L, INFINITY);
  if (!std::isfinite(a)) throw std::invalid_argument("default a overflows; choose a explicitly");
  if (!(a > two_n && a > L)) throw std::invalid_argument("a must exceed max(2^n, L)");

  // γ = log_a(a^(αr-r-β)/C0) with C0 = max((δ/β)^δ, 1). Since β = r(α-1)/2,
  // log C0 = β log L and γ log a = β log(a/L), evaluated without cancellation.
  double gamma = (alpha - 1.0) * r;
  if (!phi.is_power()) {
    gamma = beta;
    if (delta > beta) gamma = beta * std::log1p((a - L) / L) / std::log(a);
  }

  const Lemma24Constant l24 = lemma24_constant(phi, a, ainf_vr, p, a1_v.constant, a1_vr.constant);
  const GridFunction fv = combine(f, v, [](double x, double y) { return x * y; });
  double t = options.t.value_or(0.0);
  if (!options.t) {
    const DyadicCube box{0, d.box_exp(), {}};
    t = a * luxemburg_average(fv, box, phi) / v.min_value();
    if (!(t > 0.0) || !std::isfinite(t)) t = 1.0;
  }
  const GridFunction g = transform(fv, [&](double x) { return x / t; });

  const GenRange gens = default_gens(d);
  const CubeTable tv = cube_averages(v, identity, options.grid, gens);
  const CubeTable tg = cube_averages(g, phi, options.grid, gens);
  MaximalField mdv = maximal_from_table(v, identity, tv);
  const MaximalField mg = maximal_from_table(g, phi, tg);

  double top_v = 0.0;
  double top_g = 0.0;
  for (Index i = 0; i < d.cell_count(); ++i) {
    top_v = std::max(top_v, mdv[i]);
    top_g = std::max(top_g, mg[i]);
  }

  std::vector<OmegaFamily> families;
  int N = options.N.value_or(0);
  int k_max = -1;
  const double top = std::min(top_v, top_g);
  if (top > 0.0) {
    int k = static_cast<int>(std::floor(std::log(top) / std::log(a)));
    while (std::pow(a, k) >= top) --k;
    while (std::pow(a, k + 1) < top) ++k;
    const auto family_at = [&](int level) {
      const double lambda = std::pow(a, level);
      const CZDecomposition s_family = cz_from_table(g, phi, tg, lambda);
      CZDecomposition r_family;
      try {
        r_family = cz_from_table(v, identity, tv, lambda);
      } catch (const std::invalid_argument&) {
        r_family = covering_family(d, tv, identity, lambda);
      }
      return gamma_set(omega_from(d, r_family, s_family, a, level), v);
    };
    const int k_hi = k;
    bool found = false;
    for (; k >= k_hi - kMaxLevelScan; --k) {
      std::optional<OmegaFamily> level;
      try {
        level = family_at(k);
      } catch (const std::invalid_argument&) {
        // CZ cubes beyond the representable generations: far outside the box.
        if (options.N || !found) throw;
        break;
      }
      OmegaFamily& fam = *level;
      if (!found && fam.cubes.empty()) continue;
      if (!found) k_max = k;
      found = true;
      if (options.N) {
        if (k < *options.N) break;
      } else if (!std::all_of(fam.cubes.begin(), fam.cubes.end(),
                              [&](const OmegaCube& c) { return inside_box(c.cube, d); })) {
        break;
      }
      families.push_back(std::move(fam));
    }
    std::reverse(families.begin(), families.end());
    if (!options.N) N = families.empty() ? k_max + 1 : families.front().k;
  }

  return AuditSetup{f,     u,     v,     g,      phi,  t, options, a1_u,  a1_v,         a1_vr,
                    ainf_u, ainf_vr, a,  alpha, l24,  gamma,   N,     k_max, std::move(mdv),
                    std::move(families)};
}

AuditReport omega_audit(const AuditSetup& s) {
  const Domain& d = s.v.domain();
  AuditReport rep;
  const OmegaFamily* below = nullptr;
  for (const OmegaFamily& fam : s.families) {
    rep.append(omega_checks(fam, s.v, s.a1_v.constant));
    Index mismatched = 0;
    for (Index i = 0; i < d.cell_count(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      const bool both = fam.r_family.mask[k] && fam.s_family.mask[k];
      if (both != (fam.mask[k] != 0)) ++mismatched;
    }
    rep.add(make_exact_check("omega.union_is_intersection", static_cast<double>(mismatched), 0.0,
                             "k=" + std::to_string(fam.k)));
    if (below != nullptr) {
      double uncontained = 0.0;
      for (const OmegaCube& c : fam.cubes) {
        const Index rep_cell = d.flat_index(clipped_cell_box(c.cube, d).lo);
        const Index j = below->label[static_cast<std::size_t>(rep_cell)];
        if (j < 0 || !contains(d, below->cubes[static_cast<std::size_t>(j)].cube, c.cube)) uncontained += 1.0;
      }
      rep.add(make_exact_check("omega.nested_in_lower_level", uncontained, 0.0, "k=" + std::to_string(fam.k)));
    }
    below = &fam;
  }
  return rep;
}

AuditReport levelset_audit(const AuditSetup& s) {
  const YoungPhi power(s.phi.r());
  const GridFunction vr = transform(s.v, [&](double x) { return power.power(x); });
  AuditReport rep;
  for (const OmegaFamily& fam : s.families) {
    for (const OmegaCube& c : fam.cubes) {
      if (!c.gamma) continue;
      for (int k = s.N; k <= s.k_max + 1; ++k) {
        const double lambda = power.power(std::pow(s.a, k) / s.a1_v.constant);
        rep.add(levelset_bound_check(vr, c.cube, lambda, s.ainf_vr));
      }
    }
  }
  return rep;
}

AuditReport lemma23_audit(const AuditSetup& s) {
  AuditReport rep;
  for (const OmegaFamily& fam : s.families) {
    for (int k = s.N; k <= fam.k; ++k) rep.append(lemma23_check(fam, s.v, s.phi, k, s.a1_v.constant));
  }
  return rep;
}

AuditReport lemma24_audit(const AuditSetup& s) {
  AuditReport rep;
  for (const OmegaFamily& fam : s.families) {
    for (const OmegaCube& c : fam.cubes) {
      if (!c.gamma) continue;
      for (int k = s.N; k <= s.k_max + 1; ++k) {
        rep.add(lemma24_check(c.cube, fam.k, s.v, s.mdv, s.phi, s.a, k, s.l24));
      }
    }
  }
  return rep;
}

PrincipalForest build_forest(const AuditSetup& s) {
  return principal_forest(s.families, s.u, s.phi, s.a, s.alpha);
}

AuditReport forest_audit(const AuditSetup& /*s*/, const PrincipalForest& forest) {
  return forest_check(forest);
}

// ---------------------------------------------------------------------------
// Claims

ClaimAudit claim_audits(const AuditSetup& s, const PrincipalForest& forest) {
  const Domain& d = s.u.domain();
  const int dim = d.dim();
  ClaimAudit out;
  const double au = s.a1_u.constant;
  const double av_r = std::pow(s.a1_v.constant, s.phi.r());
  const double eta = s.l24.eta;

  // Claim 1: Σ over I(t,s) of v_k(Q)u(Q)/|Q| against the principal term.
  std::vector<double> term(forest.nodes.size());
  {
    std::map<int, GridFunction> truncated;
    for (std::size_t x = 0; x < forest.nodes.size(); ++x) {
      const ForestNode& node = forest.nodes[x];
      auto it = truncated.find(node.level);
      if (it == truncated.end()) {
        it = truncated.emplace(node.level, truncate(s.v, s.phi.r(), bk_value(s.a, s.phi, node.level + 1))).first;
      }
      term[x] = integrate(it->second, node.cube) * node.u_integral / cube_volume(node.cube, dim);
    }
  }
  std::map<DyadicCube, std::vector<int>> same_cube;
  for (std::size_t x = 0; x < forest.nodes.size(); ++x) {
    same_cube[forest.nodes[x].cube].push_back(static_cast<int>(x));
  }
  std::vector<double> owned(forest.nodes.size(), 0.0);
  double orphans = 0.0;
  CompensatedSum gamma_sum;
  CompensatedSum principal_sum;
  for (std::size_t x = 0; x < forest.nodes.size(); ++x) {
    const ForestNode& node = forest.nodes[x];
    gamma_sum.add(term[x]);
    if (forest.principal(static_cast<int>(x))) principal_sum.add(term[x]);
    int best = -1;
    const auto consider = [&](int y) {
      if (!forest.principal(y)) return;
      const ForestNode& cand = forest.nodes[static_cast<std::size_t>(y)];
      if (best < 0) {
        best = y;
        return;
      }
      const ForestNode& cur = forest.nodes[static_cast<std::size_t>(best)];
      if (cand.cube.gen < cur.cube.gen || (cand.cube.gen == cur.cube.gen && cand.level > cur.level)) best = y;
    };
    for (int y : same_cube[node.cube]) {
      if (forest.nodes[static_cast<std::size_t>(y)].level <= node.level) consider(y);
    }
    for (int y : forest.ancestors[x]) consider(y);
    if (best < 0) {
      orphans += 1.0;
    } else {
      owned[static_cast<std::size_t>(best)] += term[x];
    }
  }
  out.gamma_sum = gamma_sum.value();
  out.principal_sum = principal_sum.value();
  out.claim1_ratio = ratio_of(out.gamma_sum, out.principal_sum);
  out.claim1_constant = s.l24.C * s.phi(s.a) * av_r / -std::expm1(-s.phi.r() * (eta - s.alpha) * std::log(s.a));
  out.report.add(make_exact_check("claim1.assigned", orphans, 0.0));
  out.report.add(Check{"claim1.finite", out.claim1_ratio, INFINITY, {}, std::isfinite(out.claim1_ratio)});
  // C·0 = 0 even when C overflows.
  const double total_rhs = out.principal_sum > 0.0 ? out.claim1_constant * out.principal_sum : 0.0;
  out.report.add(make_check("claim1.total", out.gamma_sum, total_rhs));
  for (std::size_t y = 0; y < forest.nodes.size(); ++y) {
    if (!forest.principal(static_cast<int>(y))) continue;
    out.report.add(make_check("claim1.per_principal", owned[y], out.claim1_constant * term[y],
                              cube_at(forest.nodes[y].level, forest.nodes[y].cube, dim)));
  }

  // Claim 2 and the pointwise bound for h.
  const double gamma = s.gamma;
  const double nu = s.ainf_u.eps;
  out.report.add(Check{"claim2.gamma_positive", 0.0, gamma, {}, gamma > 0.0});
  out.claim2_constant = gamma > 0.0
                            ? s.ainf_u.C * std::pow(2.0 * au * au, nu) / -std::expm1(-gamma * nu * std::log(s.a))
                            : INFINITY;

  // Principal nodes bucketed by the CZ cube of g holding them, per level.
  const std::size_t levels = s.families.size();
  std::vector<std::map<Index, std::vector<int>>> bucket(levels);
  for (std::size_t x = 0; x < forest.nodes.size(); ++x) {
    if (!forest.principal(static_cast<int>(x))) continue;
    const ForestNode& node = forest.nodes[x];
    const std::size_t fi = static_cast<std::size_t>(node.level - s.N);
    const CZDecomposition& sf = s.families[fi].s_family;
    const Index rep_cell = d.flat_index(clipped_cell_box(node.cube, d).lo);
    const Index si = sf.label[static_cast<std::size_t>(rep_cell)];
    const bool held = si >= 0 && contains(d, sf.cubes[static_cast<std::size_t>(si)], node.cube);
    out.report.add(make_exact_check("claim2.principal_in_cz_cube", held ? 0.0 : 1.0, 0.0,
                                    cube_at(node.level, node.cube, dim)));
    if (held) bucket[fi][si].push_back(static_cast<int>(x));
  }
  std::vector<std::map<Index, double>> s_integral(levels);
  for (std::size_t fi = 0; fi < levels; ++fi) {
    for (const auto& [si, nodes] : bucket[fi]) {
      s_integral[fi][si] = integrate(s.u, s.families[fi].s_family.cubes[static_cast<std::size_t>(si)]);
    }
  }

  const Index cells = d.cell_count();
  const Index stride = std::max<Index>(1, (cells + static_cast<Index>(s.options.max_samples) - 1) /
                                              static_cast<Index>(s.options.max_samples));
  const double la = std::log(s.a);
  struct Level {
    int k;
    std::size_t fi;
    Index si;
    double avg;  // (1/|Q̃|) ∫_Q̃ u
    double vol;
  };
  for (Index i = 0; i < cells; i += stride) {
    ++out.samples;
    std::vector<Level> G;
    for (std::size_t fi = 0; fi < levels; ++fi) {
      const Index si = s.families[fi].s_family.label[static_cast<std::size_t>(i)];
      if (si < 0) continue;
      auto it = bucket[fi].find(si);
      if (it == bucket[fi].end()) continue;
      const DyadicCube& sq = s.families[fi].s_family.cubes[static_cast<std::size_t>(si)];
      const double vol = cube_volume(sq, dim);
      G.push_back(Level{s.families[fi].k, fi, si, s_integral[fi].at(si) / vol, vol});
    }
    if (G.empty()) continue;

    // k_m: each next term is the first later level whose average doubles.
    std::vector<std::size_t> starts{0};
    for (std::size_t j = 1; j < G.size(); ++j) {
      if (G[j].avg > 2.0 * G[starts.back()].avg) starts.push_back(j);
    }
    out.max_sequence = std::max(out.max_sequence, starts.size());
    const std::string where = "cell=" + std::to_string(i);
    const double ux = s.u[i];
    const auto m0 = static_cast<double>(starts.size() - 1);
    out.report.add(make_check("claim2.doubling", std::exp2(m0) * G[0].avg, au * ux, where));

    double h = 0.0;
    for (std::size_t m = 0; m < starts.size(); ++m) {
      const std::size_t end = m + 1 < starts.size() ? starts[m + 1] : G.size();
      const int km = G[starts[m]].k;
      double block = 0.0;
      for (std::size_t j = starts[m]; j < end; ++j) {
        const Level& lv = G[j];
        const double scale = std::exp((lv.k - km) * gamma * la) / (2.0 * au) * lv.avg;
        double held = 0.0;
        for (int x : bucket[lv.fi].at(lv.si)) {
          const ForestNode& node = forest.nodes[static_cast<std::size_t>(x)];
          held += node.u_integral;
          out.report.add(make_check("claim2.decay", scale, node.u_integral / cube_volume(node.cube, dim),
                                    where + " " + cube_at(node.level, node.cube, dim)));
        }
        block += held / (lv.avg * lv.vol);
        h += held / lv.vol;
      }
      out.report.add(make_check("claim2.block_sum", block, out.claim2_constant,
                                where + " m=" + std::to_string(m)));
    }
    out.report.add(make_check("claim2.h_bound", h, 4.0 * au * out.claim2_constant * ux, where));
  }
  return out;
}

}  // namespace omlab
