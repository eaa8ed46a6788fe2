// Acceptance run: one pass/fail line per criterion, exit 1 if any fails.
//
//   omlab_acceptance [AC1 AC5 ...]    (default: all)

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "omlab/cli.hpp"
#include "omlab/harness.hpp"
#include "omlab/io.hpp"
#include "omlab/random.hpp"
#include "oracles.hpp"

using namespace omlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  const char* id;
  const char* title;
  double limit_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

GridFunction random_function(const Domain& d, Rng& rng, double zero_prob) {
  std::vector<double> v(static_cast<std::size_t>(d.cell_count()));
  for (double& x : v) x = rng.coin(zero_prob) ? 0.0 : rng.uniform(0.0, 10.0);
  return GridFunction(d, std::move(v));
}

GridFunction random_weight(const Domain& d, Rng& rng) {
  std::vector<double> v(static_cast<std::size_t>(d.cell_count()));
  for (double& x : v) x = rng.uniform(0.25, 4.0);
  return GridFunction(d, std::move(v));
}

bool is_overflow(const std::exception& e) {
  return std::string(e.what()).find("default a overflows") != std::string::npos;
}

// ---------------------------------------------------------------------------

Outcome ac1() {
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const int dim = 1 + i % 2;
    const Domain d(dim, 0, dim == 1 ? -8 : -4);
    const GridFunction f = random_function(d, rng, 0.2);
    const double r = 1.0 + static_cast<double>(i % 3);
    const int grid = static_cast<int>(rng.integer(0, grid_count(dim) - 1));
    const int gen = static_cast<int>(rng.integer(d.min_gen(), d.default_max_gen()));
    const CubeLattice lat(d, grid, gen);
    const DyadicCube q = lat.cube(rng.integer(0, lat.size() - 1));
    long double s = 0;
    for (Index c : cells_of(q, d)) s += std::pow(static_cast<long double>(f[c]), static_cast<long double>(r));
    const double closed = static_cast<double>(std::pow(s * d.cell_volume() / cube_volume(q, dim), 1.0L / r));
    const double got = luxemburg_average(f, q, YoungPhi(r, 0.0));
    if (closed == 0.0) {
      if (got != 0.0) worst = INFINITY;
      continue;
    }
    worst = std::max(worst, std::fabs(got - closed) / closed);
  }
  return {worst <= 1e-10, fmt("500 cubes, max relative error %.2e (tol 1e-10)", worst)};
}

Outcome ac2() {
  Rng rng(202);
  const YoungPhi phis[] = {YoungPhi(1, 0), YoungPhi(2, 0), YoungPhi(1, 1), YoungPhi(3, 2)};
  std::size_t cells = 0, mismatches = 0;
  double oracle_err = 0.0;
  for (int i = 0; i < 100; ++i) {
    // Every 1D domain with 2..64 cells, for box exponents -1..1.
    const int levels = 1 + i % 6;
    const int box_exp = (i / 6) % 3 - 1;
    const Domain d(1, box_exp, box_exp - levels);
    const GridFunction f = random_function(d, rng, 0.3);
    const std::vector<double> vals(f.values().begin(), f.values().end());
    for (const YoungPhi& phi : phis) {
      const std::vector<double> want = oracle::dyadic_maximal_1d(vals, box_exp, d.cell_exp(), phi);
      const MaximalField got = dyadic_maximal(f, phi, 0);
      for (std::size_t c = 0; c < want.size(); ++c) mismatches += got.values[c] != want[c];
      cells += want.size();
      // The per-interval averages themselves against a long-double bisection.
      const double box_avg = luxemburg_average(f, DyadicCube{0, box_exp, {0}}, phi);
      const double ref = oracle::luxemburg(vals, d.cell_volume(), std::ldexp(1.0, box_exp), phi.r(), phi.delta());
      if (ref > 0) oracle_err = std::max(oracle_err, std::fabs(box_avg - ref) / ref);
    }
  }
  return {mismatches == 0 && oracle_err <= 1e-11,
          fmt("100 functions x 4 phi, %zu cells, %zu mismatches; bisection vs long double %.1e", cells,
              mismatches, oracle_err)};
}

Outcome ac3() {
  Rng rng(303);
  std::size_t fails = 0, cubes = 0, checks = 0;
  for (int i = 0; i < 200; ++i) {
    const int dim = 1 + i % 2;
    const Domain d(dim, 0, dim == 1 ? -9 : -5);
    const GridFunction f = random_function(d, rng, 0.6);
    const YoungPhi phi(1.0 + static_cast<double>(rng.integer(0, 2)), static_cast<double>(rng.integer(0, 2)));
    const int grid = static_cast<int>(rng.integer(0, grid_count(dim) - 1));
    const MaximalField m = dyadic_maximal(f, phi, grid);
    const double top = *std::max_element(m.values.begin(), m.values.end());
    const double lambda = top * std::exp(rng.uniform(std::log(0.01), std::log(1.2)));
    const CZDecomposition cz = cz_cubes(f, phi, grid, lambda);
    const AuditReport rep = cz_check(f, cz, m);
    fails += rep.violations();
    cubes += cz.cubes.size();
    checks += rep.checks.size();
  }
  return {fails == 0, fmt("200 decompositions, %zu cubes, %zu checks, %zu violations", cubes, checks, fails)};
}

Outcome ac4() {
  Rng rng(404);
  double worst = 0.0;
  std::size_t bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const int dim = 1 + i % 2;
    RealCube q;
    q.side = std::exp2(rng.uniform(-10.0, 3.0));
    for (int a = 0; a < dim; ++a) q.lower[a] = rng.uniform(-8.0, 8.0);
    const Cover c = cover_cube(q, dim);
    const bool ok = real_contains(real_cube(c.cube, dim), q, dim) && c.ratio <= 3.0 &&
                    cube_side(c.cube) == oracle::best_cover_side(q.lower, q.side, dim);
    bad += !ok;
    worst = std::max(worst, c.ratio);
  }
  return {bad == 0, fmt("1000 cubes, max side ratio %.4f, %zu failures", worst, bad)};
}

Outcome ac5() {
  std::size_t bad = 0, pairs = 0;
  for (double a : {std::numbers::e, 3.0, 5.0, 10.0}) {
    for (double r : {1.0, 2.0}) {
      for (double delta : {0.0, 1.0, 2.0}) {
        const YoungPhi phi(r, delta);
        const BkSequence s(a, phi, -40, 40);
        bad += s.report().violations();
        pairs += s.report().checks.size();
        const std::set<int> lo(s.lower_attained().begin(), s.lower_attained().end());
        const std::set<int> up(s.upper_attained().begin(), s.upper_attained().end());
        for (int k = -40; k < 40; ++k) {
          if (delta == 0.0) {
            bad += !lo.count(k) + !up.count(k);
          } else {
            if (k >= 0) bad += !lo.count(k);
            if (k == -1) bad += !up.count(k);
          }
        }
      }
    }
  }
  return {bad == 0, fmt("24 settings, %zu ratio checks, %zu failures incl. endpoint equalities", pairs, bad)};
}

Outcome ac6() {
  const Domain d(1, 0, -10);
  std::size_t audited = 0, skipped = 0, violations = 0, checks = 0;
  double slack = INFINITY;
  for (std::size_t i = 0; audited < 100 && i < 300; ++i) {
    const double r = 1.0 + static_cast<double>(i % 2);
    const double delta = static_cast<double>((i / 2) % 2);
    InstanceParams params;
    params.r = r;
    const InstanceKind kind = all_kinds()[(i / 4) % all_kinds().size()];
    const Instance inst = gen_instance(kind, d, params, derive_seed(606, i));
    try {
      const AuditSetup s = prepare_audit(inst.f, inst.u, inst.v, YoungPhi(r, delta));
      for (const AuditReport& rep : {levelset_audit(s), lemma23_audit(s), lemma24_audit(s)}) {
        violations += rep.violations();
        checks += rep.checks.size();
        for (const Check& c : rep.checks) {
          if (c.rhs > 0) slack = std::min(slack, c.slack() / c.rhs);
        }
      }
      ++audited;
    } catch (const std::invalid_argument& e) {
      if (!is_overflow(e)) throw;
      ++skipped;
    }
  }
  return {audited == 100 && violations == 0 && checks > 0,
          fmt("%zu instances (%zu skipped: default a overflows), %zu checks, %zu violations, min relative slack %.3g",
              audited, skipped, checks, violations, slack)};
}

Outcome ac7() {
  Rng rng(707);
  std::size_t bad = 0, level_cells = 0;
  for (int i = 0; i < 100; ++i) {
    const int dim = 1 + i % 2;
    const Domain d(dim, 0, dim == 1 ? -9 : -5);
    const GridFunction f = random_function(d, rng, 0.5);
    const GridFunction v = random_weight(d, rng);
    const double r = 1.0 + static_cast<double>(i % 3);
    const double t = std::exp(rng.uniform(std::log(0.05), std::log(20.0)));
    const int grid = static_cast<int>(rng.integer(0, grid_count(dim) - 1));
    const MaskComparison m = mr_levelset_identity_check(f, v, r, t, grid);
    bad += !m.equal();
    level_cells += static_cast<std::size_t>(m.level_set_cells);
  }
  return {bad == 0, fmt("100 cases, %zu level-set cells, %zu mask mismatches", level_cells, bad)};
}

Outcome ac8() {
  std::string detail;
  bool ok = true;
  for (int dim : {1, 2}) {
    SweepConfig c;
    c.dim = dim;
    c.cell_exp = dim == 1 ? -10 : -6;
    c.instances = 200;
    c.thresholds = 12;
    const SweepReport rep = sweep(c);
    const bool pass = rep.pass().value_or(false) && rep.rows.size() == 2400;
    ok = ok && pass;
    detail += fmt("n=%d: %zu rows, infinite %zu, sup %.4g -> refined %.4g; ", dim, rep.rows.size(), rep.infinite,
                  rep.sup_ratio, rep.refined_sup_ratio);
  }
  for (int dim : {1, 2}) {
    SweepConfig c;
    c.dim = dim;
    c.cell_exp = dim == 1 ? -10 : -6;
    c.instances = 20;
    c.kinds = {InstanceKind::constant};
    c.r_values = {1.0};
    c.delta_values = {0.0};
    c.side = BoundSide::dyadic;
    c.sup_bound = 1.0;
    const SweepReport rep = sweep(c);
    ok = ok && rep.pass().value_or(false);
    detail += fmt("u=v=1 dyadic n=%d sup %.4g; ", dim, std::max(rep.sup_ratio, rep.refined_sup_ratio));
  }
  return {ok, detail};
}

Outcome ac9() {
  const Domain d(1, 0, -10);
  std::size_t audited = 0, skipped = 0, violations = 0, checks = 0, infinite = 0;
  double worst_claim1 = 0.0;
  for (std::size_t i = 0; audited < 50 && i < 150; ++i) {
    const double r = 1.0 + static_cast<double>(i % 2);
    const double delta = static_cast<double>((i / 2) % 2);
    InstanceParams params;
    params.r = r;
    const InstanceKind kind = all_kinds()[(i / 4) % all_kinds().size()];
    const Instance inst = gen_instance(kind, d, params, derive_seed(909, i));
    try {
      const AuditSetup s = prepare_audit(inst.f, inst.u, inst.v, YoungPhi(r, delta));
      const PrincipalForest forest = build_forest(s);
      const ClaimAudit c = claim_audits(s, forest);
      const AuditReport f = forest_audit(s, forest);
      violations += c.report.violations() + f.violations();
      checks += c.report.checks.size() + f.checks.size();
      infinite += !std::isfinite(c.claim1_ratio);
      if (std::isfinite(c.claim1_ratio)) worst_claim1 = std::max(worst_claim1, c.claim1_ratio);
      ++audited;
    } catch (const std::invalid_argument& e) {
      if (!is_overflow(e)) throw;
      ++skipped;
    }
  }

  // u = 1 and δ = 0: every Δ_N node is principal exactly when it is maximal.
  std::size_t special_bad = 0, special_nodes = 0;
  for (std::size_t i = 0; i < all_kinds().size(); ++i) {
    const Instance inst = gen_instance(all_kinds()[i], d, InstanceParams{}, derive_seed(919, i));
    const GridFunction one = GridFunction::constant(d, 1.0);
    const AuditSetup s = prepare_audit(inst.f, one, inst.v, YoungPhi(1.0, 0.0));
    const PrincipalForest forest = build_forest(s);
    special_nodes += forest.nodes.size();
    std::size_t g0 = forest.generations.empty() ? 0 : forest.generations[0].size();
    special_bad += forest.generations.size() > 1 || forest.principal_count() != g0;
    for (std::size_t n = 0; n < forest.nodes.size(); ++n) {
      special_bad += forest.principal(static_cast<int>(n)) != forest.ancestors[n].empty();
    }
    special_bad += claim_audits(s, forest).max_sequence > 1;
  }
  return {audited == 50 && violations == 0 && infinite == 0 && checks > 0 && special_bad == 0 && special_nodes > 0,
          fmt("%zu instances (%zu skipped: default a overflows), %zu checks, %zu violations, max Claim 1 ratio "
              "%.4g; u=1 case: %zu nodes, %zu mismatches with P=G_0",
              audited, skipped, checks, violations, worst_claim1, special_nodes, special_bad)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome ac10() {
  const fs::path dir = fs::temp_directory_path() / "omlab_acceptance";
  fs::create_directories(dir);
  write_text(dir / "sweep1.json", R"({"dim":1,"cell_exp":-9,"instances":60,"seed":5})");
  write_text(dir / "sweep2.json", R"({"dim":2,"cell_exp":-5,"instances":30,"seed":6,"side":"lower"})");
  write_text(dir / "audit.json", R"({"generate":{"kind":"staircase","seed":4,"cell_exp":-9},"phi":"r=2,delta=0"})");
  write_text(dir / "audit_d.json", R"({"generate":{"kind":"spike","seed":2,"cell_exp":-9},"phi":"r=1,delta=1"})");
  const Instance inst = gen_instance(InstanceKind::spike, Domain(2, 0, -5), InstanceParams{}, 9);
  write_text(dir / "f.json", to_json(inst.f).dump());

  const auto run_all = [&](const std::string& threads) {
    std::vector<std::string> outputs;
    const auto go = [&](std::vector<std::string> args, const std::string& out_name) {
      std::ostringstream out, err;
      const fs::path path = dir / (out_name + "_" + threads);
      fs::remove(path);
      args.insert(args.begin(), {"--threads", threads});
      args.insert(args.end(), {"--out", path.string()});
      const int code = run_cli(args, out, err);
      outputs.push_back(std::to_string(code) + "\n" + slurp(path));
    };
    go({"verify", "--config", (dir / "sweep1.json").string()}, "sweep1.csv");
    go({"verify", "--config", (dir / "sweep2.json").string()}, "sweep2.csv");
    go({"gen", "--kind", "spike", "--dim", "2", "--cell-exp", "-5", "--seed", "9"}, "inst.json");
    go({"maximal", "--in", (dir / "f.json").string(), "--side", "upper", "--phi", "r=2,delta=1"}, "max.json");
    for (const char* which : {"claims", "forest", "lemma24"}) {
      go({"audit", which, "--full", "--config", (dir / "audit.json").string()}, std::string(which) + ".json");
      go({"audit", which, "--full", "--config", (dir / "audit_d.json").string()}, std::string(which) + "_d.json");
    }
    return outputs;
  };
  const auto one = run_all("1");
  const auto four = run_all("4");
  std::size_t differ = 0, empty = 0, bytes = 0;
  for (std::size_t i = 0; i < one.size(); ++i) {
    differ += one[i] != four[i];
    empty += one[i].find('\n') + 1 == one[i].size();
    bytes += one[i].size();
  }
  return {differ == 0 && empty == 0,
          fmt("%zu reports (%zu bytes) at --threads 1 and 4, %zu differ in bytes or exit code, %zu empty", one.size(),
              bytes, differ, empty)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"AC1", "Luxemburg closed form", 5, ac1},
      {"AC2", "dyadic maximal vs interval enumeration", 30, ac2},
      {"AC3", "CZ decomposition invariants", 30, ac3},
      {"AC4", "shifted-grid covering", 5, ac4},
      {"AC5", "b_k ratio bounds", 1, ac5},
      {"AC6", "level-set and truncation audits", 120, ac6},
      {"AC7", "M_r level-set identity", 30, ac7},
      {"AC8", "mixed weak-type sweeps", 600, ac8},
      {"AC9", "claim audits", 300, ac9},
      {"AC10", "determinism across thread counts", 300, ac10},
  };
  std::set<std::string> only(argv + 1, argv + argc);
  std::printf("threads=%d\n", omp_get_max_threads());
  bool ok = true;
  for (const Criterion& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && s <= c.limit_s;
    ok = ok && pass;
    std::printf("[%s] %s %s: %s [%.2f s, limit %.0f s]\n", pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(), s,
                c.limit_s);
    std::fflush(stdout);
  }
  return ok ? 0 : 1;
}
