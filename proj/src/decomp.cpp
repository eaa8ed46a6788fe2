#include "omlab/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "omlab/summation.hpp"

namespace omlab {

namespace {

constexpr int kMaxClimb = 60;

std::string at_level(int k, const DyadicCube& q, int dim) {
  return "k=" + std::to_string(k) + " " + to_string(q, dim);
}

/// Highest ancestor of `top` whose average exceeds λ; `top` itself exceeds λ
/// and contains the whole box, so averages only decrease further up.
DyadicCube climb(const GridFunction& f, const YoungPhi& phi, DyadicCube top, double lambda) {
  const Domain& d = f.domain();
  for (;;) {
    const DyadicCube up = parent(d, top);
    if (up.gen - d.cell_exp() > kMaxClimb) {
      throw std::runtime_error("level set extends beyond the largest representable cube");
    }
    if (!(luxemburg_average(f, up, phi) > lambda)) return top;
    top = up;
  }
}

void label_cells(const Domain& d, const std::vector<DyadicCube>& cubes, std::vector<Index>& label,
                 std::vector<std::uint8_t>& mask) {
  label.assign(static_cast<std::size_t>(d.cell_count()), -1);
  mask.assign(static_cast<std::size_t>(d.cell_count()), 0);
  for (std::size_t c = 0; c < cubes.size(); ++c) {
    for_each_cell(clipped_cell_box(cubes[c], d), d, [&](Index i) {
      label[static_cast<std::size_t>(i)] = static_cast<Index>(c);
      mask[static_cast<std::size_t>(i)] = 1;
    });
  }
}

}  // namespace

bool CZDecomposition::all_inside(const Domain& d) const {
  return std::all_of(cubes.begin(), cubes.end(), [&](const DyadicCube& q) { return inside_box(q, d); });
}

CZDecomposition cz_from_table(const GridFunction& f, const YoungPhi& phi, const CubeTable& table,
                              double lambda) {
  const Domain& d = f.domain();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("cz needs lambda > 0");
  if (table.gens.hi < d.default_max_gen()) {
    throw std::invalid_argument("cz needs averages up to the generation containing the box");
  }
  const Index n = d.cell_count();
  // Per cell: generation of the highest tabulated cube above λ and its index.
  std::vector<int> hit_gen(static_cast<std::size_t>(n), table.gens.lo - 1);
  std::vector<Index> hit_idx(static_cast<std::size_t>(n), -1);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    const Coords cell = d.cell_coords(i);
    for (int gen = table.gens.hi; gen >= table.gens.lo; --gen) {
      const Index j = table.lattice(gen).index_of_cell(cell);
      if (table.at(gen)[static_cast<std::size_t>(j)] > lambda) {
        hit_gen[static_cast<std::size_t>(i)] = gen;
        hit_idx[static_cast<std::size_t>(i)] = j;
        break;
      }
    }
  }

  std::vector<DyadicCube> cubes;
  std::map<Index, DyadicCube> climbed;
  for (Index i = 0; i < n; ++i) {
    const int gen = hit_gen[static_cast<std::size_t>(i)];
    if (gen < table.gens.lo) continue;
    const Index j = hit_idx[static_cast<std::size_t>(i)];
    const DyadicCube q = table.lattice(gen).cube(j);
    if (gen == table.gens.hi) {
      auto it = climbed.find(j);
      if (it == climbed.end()) it = climbed.emplace(j, climb(f, phi, q, lambda)).first;
      cubes.push_back(it->second);
    } else {
      cubes.push_back(q);
    }
  }
  std::sort(cubes.begin(), cubes.end());
  cubes.erase(std::unique(cubes.begin(), cubes.end()), cubes.end());

  CZDecomposition out{lambda, phi, table.grid, std::move(cubes), {}, {}};
  label_cells(d, out.cubes, out.label, out.mask);
  return out;
}

CZDecomposition cz_cubes(const GridFunction& f, const YoungPhi& phi, int grid, double lambda,
                         GenRange gens) {
  gens.hi = std::max(gens.hi, f.domain().default_max_gen());
  return cz_from_table(f, phi, cube_averages(f, phi, grid, gens), lambda);
}

CZDecomposition cz_cubes(const GridFunction& f, const YoungPhi& phi, int grid, double lambda) {
  return cz_cubes(f, phi, grid, lambda, default_gens(f.domain()));
}

AuditReport cz_check(const GridFunction& f, const CZDecomposition& cz, const MaximalField& m) {
  const Domain& d = f.domain();
  AuditReport rep;
  Index mismatched = 0;
  for (Index i = 0; i < d.cell_count(); ++i) {
    const bool in_level_set = m[i] > cz.lambda;
    if (in_level_set != (cz.mask[static_cast<std::size_t>(i)] != 0)) ++mismatched;
  }
  rep.add(make_exact_check("cz.union_is_level_set", static_cast<double>(mismatched), 0.0));
  for (const DyadicCube& q : cz.cubes) {
    const double inside = luxemburg_average(f, q, cz.phi);
    const double above = luxemburg_average(f, parent(d, q), cz.phi);
    Check c{"cz.cube_above_lambda", cz.lambda, inside, to_string(q, d.dim()), inside > cz.lambda};
    rep.add(std::move(c));
    rep.add(make_exact_check("cz.parent_at_most_lambda", above, cz.lambda, to_string(q, d.dim())));
  }
  return rep;
}

double OmegaFamily::level() const { return std::pow(a, k); }

OmegaFamily omega_from(const Domain& d, const CZDecomposition& r, const CZDecomposition& s,
                       double a, int k) {
  if (!(a > 1.0)) throw std::invalid_argument("omega decomposition needs a > 1");
  if (r.grid != s.grid) throw std::invalid_argument("omega decomposition mixes grids");
  std::vector<std::pair<Index, Index>> pairs;
  for (Index i = 0; i < d.cell_count(); ++i) {
    const Index rl = r.label[static_cast<std::size_t>(i)];
    const Index sl = s.label[static_cast<std::size_t>(i)];
    if (rl >= 0 && sl >= 0) pairs.emplace_back(rl, sl);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  OmegaFamily fam;
  fam.k = k;
  fam.a = a;
  fam.grid = r.grid;
  fam.r_family = r;
  fam.s_family = s;
  for (const auto& [rl, sl] : pairs) {
    const DyadicCube& rq = r.cubes[static_cast<std::size_t>(rl)];
    const DyadicCube& sq = s.cubes[static_cast<std::size_t>(sl)];
    if (contains(d, rq, sq)) {
      fam.cubes.push_back({sq, Source::S, false});
    } else {
      fam.cubes.push_back({rq, Source::R, false});
    }
  }
  std::sort(fam.cubes.begin(), fam.cubes.end(),
            [](const OmegaCube& x, const OmegaCube& y) { return x.cube < y.cube; });
  fam.cubes.erase(std::unique(fam.cubes.begin(), fam.cubes.end(),
                              [](const OmegaCube& x, const OmegaCube& y) { return x.cube == y.cube; }),
                  fam.cubes.end());
  std::vector<DyadicCube> plain;
  plain.reserve(fam.cubes.size());
  for (const OmegaCube& c : fam.cubes) plain.push_back(c.cube);
  label_cells(d, plain, fam.label, fam.mask);
  return fam;
}

OmegaFamily omega_decomposition(const GridFunction& v, const GridFunction& g, const YoungPhi& phi,
                                double a, int k, int grid) {
  require_same_domain(v, g);
  if (!(a > 1.0)) throw std::invalid_argument("omega decomposition needs a > 1");
  const double level = std::pow(a, k);
  const CZDecomposition r = cz_cubes(v, YoungPhi(), grid, level);
  const CZDecomposition s = cz_cubes(g, phi, grid, level);
  return omega_from(v.domain(), r, s, a, k);
}

OmegaFamily gamma_set(OmegaFamily fam, const GridFunction& v) {
  const Domain& d = v.domain();
  const double cap = std::pow(fam.a, fam.k + 1);
  for (OmegaCube& c : fam.cubes) {
    bool low = false;
    for_each_cell(clipped_cell_box(c.cube, d), d, [&](Index i) { low = low || v[i] <= cap; });
    c.gamma = low;
  }
  return fam;
}

AuditReport omega_checks(const OmegaFamily& fam, const GridFunction& v, double a1_v) {
  const Domain& d = v.domain();
  AuditReport rep;
  const double level = fam.level();
  const double cap = std::pow(fam.a, fam.k + 1);
  for (const OmegaCube& c : fam.cubes) {
    const std::string w = at_level(fam.k, c.cube, d.dim());
    const double inf = min_over(v, c.cube);
    rep.add(make_check("omega.inf_lower", level / a1_v, inf, w));
    if (!c.gamma) continue;
    const double avg = average(v, c.cube);
    // With v = 0 off the box, inf <= avg only holds for cubes inside it.
    if (inside_box(c.cube, d)) rep.add(make_check("gamma.inf_avg", inf, avg, w));
    rep.add(make_check("gamma.avg_a1", avg, a1_v * inf, w));
    rep.add(make_check("gamma.a1_cap", a1_v * inf, a1_v * cap, w));
  }
  return rep;
}

std::size_t PrincipalForest::principal_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const ForestNode& n) { return n.generation >= 0; }));
}

namespace {

bool has(const std::vector<int>& sorted, int x) {
  return std::binary_search(sorted.begin(), sorted.end(), x);
}

/// z ⊆ y for nodes z, y on the ancestor chain of a common node.
bool node_within(const PrincipalForest& f, int z, int y) {
  return f.nodes[static_cast<std::size_t>(z)].cube == f.nodes[static_cast<std::size_t>(y)].cube ||
         has(f.ancestors[static_cast<std::size_t>(z)], y);
}

/// x has y as a qualifying parent: μ(x) > μ(y), and μ(z) <= μ(y) for every
/// node z with x ⊊ z ⊆ y.
bool qualifies(const PrincipalForest& f, int x, int y) {
  const double mu_y = f.nodes[static_cast<std::size_t>(y)].log_mu;
  if (!(f.nodes[static_cast<std::size_t>(x)].log_mu > mu_y)) return false;
  for (int z : f.ancestors[static_cast<std::size_t>(x)]) {
    if (node_within(f, z, y) && f.nodes[static_cast<std::size_t>(z)].log_mu > mu_y) return false;
  }
  return true;
}

}  // namespace

PrincipalForest principal_forest(std::span<const OmegaFamily> families, const GridFunction& u,
                                 const YoungPhi& phi, double a, double alpha) {
  if (!(alpha > 1.0)) throw std::invalid_argument("principal forest needs alpha > 1");
  if (!(a > 1.0)) throw std::invalid_argument("principal forest needs a > 1");
  if (!u.strictly_positive()) throw std::invalid_argument("principal forest needs u > 0");
  const Domain& d = u.domain();
  PrincipalForest f;
  f.a = a;
  f.alpha = alpha;
  f.phi = phi;
  f.N = families.empty() ? 0 : families.front().k;
  for (std::size_t i = 1; i < families.size(); ++i) {
    if (families[i].k != families[i - 1].k + 1) throw std::invalid_argument("families must be consecutive levels");
  }

  const double la = std::log(a);
  std::vector<std::vector<int>> node_of(families.size());
  for (std::size_t fi = 0; fi < families.size(); ++fi) {
    const OmegaFamily& fam = families[fi];
    node_of[fi].assign(fam.cubes.size(), -1);
    for (std::size_t j = 0; j < fam.cubes.size(); ++j) {
      if (!fam.cubes[j].gamma) continue;
      ForestNode node;
      node.level = fam.k;
      node.member = static_cast<Index>(j);
      node.cube = fam.cubes[j].cube;
      node.u_integral = integrate(u, node.cube);
      const double avg = node.u_integral / cube_volume(node.cube, d.dim());
      node.log_mu = bk_log(a, phi, fam.k) - alpha * phi.r() * fam.k * la + std::log(avg);
      node_of[fi][j] = static_cast<int>(f.nodes.size());
      f.nodes.push_back(node);
    }
  }

  f.ancestors.resize(f.nodes.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t x = 0; x < f.nodes.size(); ++x) {
    const ForestNode& node = f.nodes[x];
    const Index rep = d.flat_index(clipped_cell_box(node.cube, d).lo);
    for (std::size_t fi = 0; fi < families.size(); ++fi) {
      const Index j = families[fi].label[static_cast<std::size_t>(rep)];
      if (j < 0) continue;
      const int y = node_of[fi][static_cast<std::size_t>(j)];
      if (y < 0) continue;
      const DyadicCube& outer = f.nodes[static_cast<std::size_t>(y)].cube;
      if (outer != node.cube && contains(d, outer, node.cube)) f.ancestors[x].push_back(y);
    }
    std::sort(f.ancestors[x].begin(), f.ancestors[x].end());
  }

  std::vector<int> current;
  for (std::size_t x = 0; x < f.nodes.size(); ++x) {
    if (f.ancestors[x].empty()) {
      f.nodes[x].generation = 0;
      current.push_back(static_cast<int>(x));
    }
  }
  int n = 0;
  while (!current.empty()) {
    f.generations.push_back(current);
    std::vector<int> next;
    for (std::size_t x = 0; x < f.nodes.size(); ++x) {
      if (f.nodes[x].generation >= 0) continue;
      for (int y : current) {
        if (has(f.ancestors[x], y) && qualifies(f, static_cast<int>(x), y)) {
          f.nodes[x].parent = y;
          next.push_back(static_cast<int>(x));
          break;
        }
      }
    }
    ++n;
    for (int x : next) f.nodes[static_cast<std::size_t>(x)].generation = n;
    current = std::move(next);
  }
  return f;
}

AuditReport forest_check(const PrincipalForest& f) {
  AuditReport rep;
  for (std::size_t x = 0; x < f.nodes.size(); ++x) {
    const ForestNode& node = f.nodes[x];
    const std::string w = "node=" + std::to_string(x) + " k=" + std::to_string(node.level);
    if (node.generation == 0) {
      rep.add(make_exact_check("forest.root_is_maximal", static_cast<double>(f.ancestors[x].size()), 0.0, w));
      continue;
    }
    if (node.generation > 0) {
      const ForestNode& p = f.nodes[static_cast<std::size_t>(node.parent)];
      rep.add(make_exact_check("forest.parent_generation", static_cast<double>(p.generation + 1),
                               static_cast<double>(node.generation), w));
      rep.add(Check{"forest.exceeds_parent", p.log_mu, node.log_mu, w, node.log_mu > p.log_mu});
      for (int z : f.ancestors[x]) {
        if (!node_within(f, z, node.parent)) continue;
        rep.add(make_exact_check("forest.intermediate_below_parent",
                                 f.nodes[static_cast<std::size_t>(z)].log_mu, p.log_mu, w));
      }
      continue;
    }
    // Not principal: no principal ancestor qualifies as its parent.
    double qualifying = 0.0;
    for (int y : f.ancestors[x]) {
      if (f.principal(y) && qualifies(f, static_cast<int>(x), y)) qualifying += 1.0;
    }
    rep.add(make_exact_check("forest.nonprincipal_unqualified", qualifying, 0.0, w));
  }
  return rep;
}

AuditReport lemma23_check(const OmegaFamily& fam, const GridFunction& v, const YoungPhi& phi, int k,
                          double a1_v) {
  if (fam.k < k) throw std::invalid_argument("lemma23_check needs the family level >= k");
  const Domain& d = v.domain();
  const double cap = bk_value(fam.a, phi, k + 1);
  const double lower = bk_value(fam.a, phi, k) / std::pow(a1_v, phi.r());
  const GridFunction vk = truncate(v, phi.r(), cap);
  AuditReport rep;
  for (const OmegaCube& c : fam.cubes) {
    const double avg = average(vk, c.cube);
    const std::string w = "k=" + std::to_string(k) + " l=" + std::to_string(fam.k) + " " +
                          to_string(c.cube, d.dim());
    rep.add(make_check("lemma23.lower", lower, avg, w));
    rep.add(make_check("lemma23.upper", avg, cap, w));
  }
  return rep;
}

Lemma24Constant lemma24_constant(const YoungPhi& phi, double a, const AInfParams& ainf_vr,
                                 double p, double a1_v, double a1_vr) {
  const double eps = ainf_vr.eps;
  if (!(p > 1.0 / eps)) throw std::invalid_argument("decay constant needs p > 1/eps");
  Lemma24Constant c;
  c.p = p;
  c.p_dual = p / (p - 1.0);
  c.eta = 1.0 / (c.p_dual * (1.0 - eps));
  const double vr = std::pow(a1_v, phi.r());
  c.C = phi(a) * vr * std::pow(ainf_vr.C0(), 1.0 / c.p_dual) *
        std::pow(vr * a1_vr * phi.power(a), c.eta);
  return c;
}

Check lemma24_check(const DyadicCube& q, int t, const GridFunction& v, const MaximalField& mdv,
                    const YoungPhi& phi, double a, int k, const Lemma24Constant& c) {
  const Domain& d = v.domain();
  const GridFunction vt = truncate(v, phi.r(), bk_value(a, phi, t + 1));
  const double level = std::pow(a, k);
  CompensatedSum on_e;
  for_each_cell(clipped_cell_box(q, d), d, [&](Index i) {
    if (mdv[i] > level) on_e.add(vt[i]);
  });
  const double lhs = on_e.value() * d.cell_volume();
  const double decay = std::exp((t - k) * phi.r() * c.eta * std::log(a));
  const double rhs = c.C * integrate(vt, q) * decay;
  return make_check("lemma24", lhs, rhs,
                    "t=" + std::to_string(t) + " k=" + std::to_string(k) + " " + to_string(q, d.dim()));
}

}  // namespace omlab
