#include "omlab/cli.hpp"

#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "omlab/decomp.hpp"
#include "omlab/harness.hpp"
#include "omlab/instances.hpp"
#include "omlab/io.hpp"
#include "omlab/orlicz.hpp"
#include "omlab/weights.hpp"
#include "omlab/young.hpp"

namespace omlab {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scalars printed alone keep a decimal point, so 4 prints as 4.0.
std::string scalar_text(double x) {
  std::string s = format_double(x);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_text(path, text);
  }
}

int verdict(bool pass) { return pass ? 0 : 1; }

std::vector<int> all_grids(int dim) {
  std::vector<int> g;
  for (int i = 0; i < grid_count(dim); ++i) g.push_back(i);
  return g;
}

std::vector<int> grid_selection(const std::string& text, int dim) {
  if (text == "all") return all_grids(dim);
  const int g = std::stoi(text);
  if (g < 0 || g >= grid_count(dim)) throw UsageError("grid index out of range: " + text);
  return {g};
}

struct GenOptions {
  std::string kind = "constant";
  int dim = 1;
  int box_exp = 0;
  int cell_exp = -10;
  std::uint64_t seed = 1;
  double r = 1.0;
  double u_cap = 10.0;
  double vr_cap = 10.0;
  std::optional<double> strength;
  std::string grids = "0";
};

Instance generate(const GenOptions& o) {
  InstanceParams p;
  p.r = o.r;
  p.u_cap = o.u_cap;
  p.vr_cap = o.vr_cap;
  p.strength = o.strength;
  p.grids = grid_selection(o.grids, o.dim);
  return gen_instance(parse_kind(o.kind), Domain(o.dim, o.box_exp, o.cell_exp), p, o.seed);
}

Json gen_json(const GenOptions& o) {
  return Json{{"kind", o.kind},         {"dim", o.dim},         {"box_exp", o.box_exp},
              {"cell_exp", o.cell_exp}, {"seed", o.seed},       {"r", o.r},
              {"u_cap", o.u_cap},       {"vr_cap", o.vr_cap},   {"grids", o.grids},
              {"strength", o.strength ? Json(*o.strength) : Json(nullptr)}};
}

GenOptions gen_from_json(const Json& j) {
  GenOptions o;
  for (const auto& [key, val] : j.items()) {
    if (key == "kind") o.kind = val.get<std::string>();
    else if (key == "dim") o.dim = val.get<int>();
    else if (key == "box_exp") o.box_exp = val.get<int>();
    else if (key == "cell_exp") o.cell_exp = val.get<int>();
    else if (key == "seed") o.seed = val.get<std::uint64_t>();
    else if (key == "r") o.r = val.get<double>();
    else if (key == "u_cap") o.u_cap = val.get<double>();
    else if (key == "vr_cap") o.vr_cap = val.get<double>();
    else if (key == "grids") o.grids = val.get<std::string>();
    else if (key == "strength") {
      if (!val.is_null()) o.strength = val.get<double>();
    }
    else throw FormatError("unknown generate key: " + key);
  }
  return o;
}

/// Instance data for an audit: inline or referenced bundle, separate grid
/// function files, or a generator block. Paths resolve against `base`.
struct AuditInput {
  GridFunction f;
  GridFunction u;
  GridFunction v;
  Json source;
};

AuditInput audit_input(const Json& cfg, const fs::path& base) {
  const auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  if (cfg.contains("generate")) {
    const GenOptions o = gen_from_json(cfg.at("generate"));
    Instance inst = generate(o);
    return {std::move(inst.f), std::move(inst.u), std::move(inst.v), Json{{"generate", gen_json(o)}}};
  }
  if (cfg.contains("instance")) {
    const Json& ref = cfg.at("instance");
    Instance inst = instance_from_json(ref.is_string() ? read_json(resolve(ref.get<std::string>())) : ref);
    return {std::move(inst.f), std::move(inst.u), std::move(inst.v), Json{{"instance", ref}}};
  }
  const auto load = [&](const char* key) {
    const Json& ref = cfg.at(key);
    return ref.is_string() ? read_grid_function(resolve(ref.get<std::string>())) : grid_function_from_json(ref);
  };
  return {load("f"), load("u"), load("v"), Json{{"f", cfg.at("f")}, {"u", cfg.at("u")}, {"v", cfg.at("v")}}};
}

AuditOptions audit_options(const Json& cfg) {
  AuditOptions o;
  if (cfg.contains("grid")) o.grid = cfg.at("grid").get<int>();
  if (cfg.contains("t")) o.t = cfg.at("t").get<double>();
  if (cfg.contains("a")) o.a = cfg.at("a").get<double>();
  if (cfg.contains("alpha")) o.alpha = cfg.at("alpha").get<double>();
  if (cfg.contains("p")) o.p = cfg.at("p").get<double>();
  if (cfg.contains("N")) o.N = cfg.at("N").get<int>();
  if (cfg.contains("max_samples")) o.max_samples = cfg.at("max_samples").get<std::size_t>();
  static const char* known[] = {"generate", "instance", "f",  "u", "v",          "phi",
                                "grid",     "t",        "a", "alpha", "p", "N", "max_samples"};
  for (const auto& [key, val] : cfg.items()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known)) {
      throw FormatError("unknown audit config key: " + key);
    }
  }
  return o;
}

Json resolved_setup(const AuditSetup& s, const Json& source) {
  Json j = source;
  j["phi"] = s.phi.to_string();
  j["grid"] = s.options.grid;
  j["t"] = s.t;
  j["a"] = s.a;
  j["alpha"] = s.alpha;
  j["p"] = s.l24.p;
  j["eta"] = s.l24.eta;
  j["gamma"] = s.gamma;
  j["N"] = s.N;
  j["k_max"] = s.k_max;
  j["max_samples"] = s.options.max_samples;
  j["a1_u"] = s.a1_u.constant;
  j["a1_v"] = s.a1_v.constant;
  j["a1_vr"] = s.a1_vr.constant;
  j["ainf_u"] = Json{{"C", s.ainf_u.C}, {"eps", s.ainf_u.eps}};
  j["ainf_vr"] = Json{{"C", s.ainf_vr.C}, {"eps", s.ainf_vr.eps}};
  j["lemma24_constant"] = s.l24.C;
  return j;
}

int cmd_audit(const std::string& which, const std::string& config_path, const std::string& out_path, bool full,
              std::ostream& out) {
  const Json cfg = read_json(config_path);
  if (!cfg.is_object()) throw FormatError("audit config must be a JSON object");
  const AuditOptions opts = audit_options(cfg);
  AuditInput in = audit_input(cfg, fs::path(config_path).parent_path());
  const YoungPhi phi = YoungPhi::parse(cfg.value("phi", std::string("r=1,delta=0")));
  const AuditSetup s = prepare_audit(in.f, in.u, in.v, phi, opts);
  Json config = resolved_setup(s, in.source);
  config["audit"] = which;

  AuditReport rep;
  Json extra = Json::object();
  if (which == "omega") {
    rep = omega_audit(s);
  } else if (which == "levelset") {
    rep = levelset_audit(s);
  } else if (which == "lemma23") {
    rep = lemma23_audit(s);
  } else if (which == "lemma24") {
    rep = lemma24_audit(s);
  } else if (which == "forest" || which == "claims") {
    const PrincipalForest forest = build_forest(s);
    extra["nodes"] = forest.nodes.size();
    extra["principal"] = forest.principal_count();
    extra["generations"] = forest.generations.size();
    if (which == "forest") {
      rep = forest_audit(s, forest);
    } else {
      const ClaimAudit c = claim_audits(s, forest);
      rep = c.report;
      extra["gamma_sum"] = c.gamma_sum;
      extra["principal_sum"] = c.principal_sum;
      extra["claim1_ratio"] = format_double(c.claim1_ratio);
      extra["claim1_constant"] = format_double(c.claim1_constant);
      extra["claim2_constant"] = format_double(c.claim2_constant);
      extra["samples"] = c.samples;
      extra["max_sequence"] = c.max_sequence;
    }
  } else {
    throw UsageError("unknown audit: " + which);
  }

  Json j = report_json(full ? rep : rep.worst_per_name(), config);
  j["total_checks"] = rep.checks.size();
  j["violations"] = rep.violations();
  j["min_slack"] = format_double(rep.min_slack());
  j["pass"] = rep.pass();
  if (!extra.empty()) j["summary"] = extra;
  emit(j.dump(2) + "\n", out_path, out);
  return verdict(rep.pass());
}

int cmd_verify_instance(const std::string& path, const std::string& phi_text, const std::string& side_text,
                        std::size_t thresholds, const std::string& out_path, std::ostream& out) {
  const Instance inst = instance_from_json(read_json(path));
  const YoungPhi phi = YoungPhi::parse(phi_text);
  const BoundSide side = parse_side(side_text);
  SweepReport rep;
  rep.config.dim = inst.f.domain().dim();
  rep.config.box_exp = inst.f.domain().box_exp();
  rep.config.cell_exp = inst.f.domain().cell_exp();
  rep.config.instances = 1;
  rep.config.seed = inst.seed;
  rep.config.r_values = {phi.r()};
  rep.config.delta_values = {phi.delta()};
  rep.config.kinds = {inst.kind};
  rep.config.thresholds = thresholds;
  rep.config.side = side;
  rep.config.refine = false;

  const GridFunction w = conjugate_weight(inst.v, phi);
  const GridFunction fv = combine(inst.f, inst.v, [](double x, double y) { return x * y; });
  const std::vector<double> m = maximal_surrogate(fv, phi, side);
  double top = 0.0;
  for (Index c = 0; c < fv.size(); ++c) top = std::max(top, m[static_cast<std::size_t>(c)] / inst.v[c]);
  if (!(top > 0.0)) top = 1.0;
  for (std::size_t j = 0; j < thresholds; ++j) {
    const double frac = thresholds == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(thresholds - 1);
    const double t = top * rep.config.t_lo * std::pow(rep.config.t_hi / rep.config.t_lo, frac);
    const InequalityRecord rec = mixed_record(inst.f, inst.u, inst.v, w, phi, m, t, side);
    rep.rows.push_back(SweepRow{inst.seed, inst.kind, phi.r(), phi.delta(), inst.a1_u.constant,
                                inst.a1_vr.constant, rec});
    if (std::isfinite(rec.ratio)) {
      rep.sup_ratio = std::max(rep.sup_ratio, rec.ratio);
    } else {
      ++rep.infinite;
    }
  }
  std::ostringstream csv;
  write_sweep_csv(csv, rep);
  emit(csv.str(), out_path, out);
  return verdict(rep.pass().value_or(true));
}

int dispatch(CLI::App& app, std::ostream& out, std::ostream& err, const std::vector<std::string>& args) {
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (falls back to OMLAB_THREADS)");
  app.require_subcommand(1);

  // maximal
  std::string in_path, out_path, phi_text = "r=1,delta=0", side_text = "dyadic";
  int grid = 0;
  auto* maximal = app.add_subcommand("maximal", "dyadic Orlicz maximal function of a grid function");
  maximal->add_option("--in", in_path)->required();
  maximal->add_option("--phi", phi_text);
  maximal->add_option("--grid", grid);
  maximal->add_option("--side", side_text, "dyadic (one grid), lower or upper (all shifted grids)");
  maximal->add_option("--out", out_path);

  // luxemburg
  std::string cube_text;
  auto* lux = app.add_subcommand("luxemburg", "Luxemburg average over one cube");
  lux->add_option("--in", in_path)->required();
  lux->add_option("--cube", cube_text, "grid:gen:c0,c1,...")->required();
  lux->add_option("--phi", phi_text);

  // cz
  double lambda = 0.0;
  auto* cz = app.add_subcommand("cz", "Calderon-Zygmund cubes at a level");
  cz->add_option("--in", in_path)->required();
  cz->add_option("--phi", phi_text);
  cz->add_option("--lambda", lambda)->required();
  cz->add_option("--grid", grid);
  cz->add_option("--out", out_path);

  // apconst
  double p = 0.0;
  bool want_a1 = false, want_ainf = false;
  std::string grid_text = "0";
  auto* ap = app.add_subcommand("apconst", "weight constants");
  ap->add_option("--in", in_path)->required();
  auto* p_opt = ap->add_option("--p", p);
  auto* a1_opt = ap->add_flag("--a1", want_a1);
  auto* ainf_opt = ap->add_flag("--ainf", want_ainf);
  p_opt->excludes(a1_opt)->excludes(ainf_opt);
  a1_opt->excludes(ainf_opt);
  ap->add_option("--grids", grid_text, "grid index or 'all'");

  // verify
  std::string config_path, check_path, instance_path;
  std::size_t thresholds = 12;
  auto* verify = app.add_subcommand("verify", "mixed weak-type inequality sweep");
  auto* cfg_opt = verify->add_option("--config", config_path);
  auto* chk_opt = verify->add_option("--check", check_path, "re-derive a sweep CSV report");
  auto* inst_opt = verify->add_option("--instance", instance_path, "instance bundle from gen");
  cfg_opt->excludes(chk_opt)->excludes(inst_opt);
  chk_opt->excludes(inst_opt);
  verify->add_option("--phi", phi_text);
  verify->add_option("--side", side_text);
  verify->add_option("--thresholds", thresholds);
  verify->add_option("--out", out_path);

  // audit
  std::string which;
  bool full = false;
  auto* audit = app.add_subcommand("audit", "replay the decomposition lemmas on data");
  audit->add_option("which", which, "omega|forest|lemma23|lemma24|levelset|claims")
      ->required()
      ->check(CLI::IsMember({"omega", "forest", "lemma23", "lemma24", "levelset", "claims"}));
  audit->add_option("--config", config_path)->required();
  audit->add_option("--out", out_path);
  audit->add_flag("--full", full, "list every check instead of the worst per name");

  // gen
  GenOptions g;
  double strength = 0.0;
  auto* gen = app.add_subcommand("gen", "seeded certified instance");
  gen->add_option("--kind", g.kind);
  gen->add_option("--dim", g.dim);
  gen->add_option("--box-exp", g.box_exp);
  gen->add_option("--cell-exp", g.cell_exp);
  gen->add_option("--seed", g.seed);
  gen->add_option("--r", g.r);
  gen->add_option("--u-cap", g.u_cap);
  gen->add_option("--vr-cap", g.vr_cap);
  auto* strength_opt = gen->add_option("--strength", strength);
  gen->add_option("--grids", g.grids, "grids certifying the caps: index or 'all'");
  gen->add_option("--out", out_path);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  app.parse(std::move(rev));

  if (threads <= 0) {
    if (const char* env = std::getenv("OMLAB_THREADS")) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        throw UsageError(std::string("OMLAB_THREADS is not an integer: ") + env);
      }
    }
  }
  if (threads > 0) omp_set_num_threads(threads);

  if (*maximal) {
    const GridFunction f = read_grid_function(in_path);
    const YoungPhi phi = YoungPhi::parse(phi_text);
    const BoundSide side = parse_side(side_text);
    if (grid < 0 || grid >= grid_count(f.domain().dim())) throw UsageError("grid index out of range");
    GridFunction m(f.domain(), maximal_surrogate(f, phi, side, grid));
    Json j = to_json(m);
    emit(j.dump() + "\n", out_path, out);
    return 0;
  }
  if (*lux) {
    const GridFunction f = read_grid_function(in_path);
    const DyadicCube q = parse_cube(cube_text, f.domain().dim());
    out << scalar_text(luxemburg_average(f, q, YoungPhi::parse(phi_text))) << '\n';
    return 0;
  }
  if (*cz) {
    const GridFunction f = read_grid_function(in_path);
    const YoungPhi phi = YoungPhi::parse(phi_text);
    const int dim = f.domain().dim();
    if (grid < 0 || grid >= grid_count(dim)) throw UsageError("grid index out of range");
    const CZDecomposition d = cz_cubes(f, phi, grid, lambda);
    const AuditReport rep = cz_check(f, d, dyadic_maximal(f, phi, grid));
    Json cubes = Json::array();
    for (const DyadicCube& q : d.cubes) cubes.push_back(to_string(q, dim));
    Json j = report_json(rep, Json{{"phi", phi.to_string()}, {"lambda", lambda}, {"grid", grid}});
    j["cubes"] = cubes;
    j["inside_box"] = d.all_inside(f.domain());
    emit(j.dump(2) + "\n", out_path, out);
    return verdict(rep.pass());
  }
  if (*ap) {
    const GridFunction w = read_grid_function(in_path);
    const int dim = w.domain().dim();
    const std::vector<int> grids = grid_selection(grid_text, dim);
    Json j{{"schema", kSchema}, {"grids", grids}};
    if (*p_opt) {
      j["p"] = p;
      j["constant"] = ap_constant(w, p, grids);
    } else if (want_ainf) {
      const AInfParams a = ainf_params(w, grids);
      j["C"] = a.C;
      j["eps"] = a.eps;
      j["C0"] = a.C0();
      j["xi"] = a.xi();
      j["exhaustive"] = a.exhaustive;
      j["pairs"] = a.pairs;
    } else {
      const A1Certificate c = a1_constant(w, grids);
      j["constant"] = c.constant;
      j["witness"] = to_string(c.witness, dim);
    }
    out << j.dump(2) << '\n';
    return 0;
  }
  if (*verify) {
    if (!check_path.empty()) {
      std::ifstream in(check_path);
      if (!in) throw UsageError("cannot open " + check_path);
      const CsvVerdict v = check_sweep_csv(in);
      Json j{{"schema", kSchema}, {"rows", v.rows}, {"problems", v.problems}, {"pass", v.ok()}};
      if (!v.ok()) j["first_problem"] = v.first_problem;
      out << j.dump(2) << '\n';
      return verdict(v.ok());
    }
    if (!instance_path.empty()) {
      return cmd_verify_instance(instance_path, phi_text, side_text, thresholds, out_path, out);
    }
    if (config_path.empty()) throw UsageError("verify needs --config, --instance or --check");
    const SweepConfig cfg = sweep_config_from_json(read_json(config_path));
    const SweepReport rep = sweep(cfg);
    std::ostringstream csv;
    write_sweep_csv(csv, rep);
    emit(csv.str(), out_path, out);
    if (!out_path.empty()) {
      const auto v = rep.pass();
      err << "sup_ratio " << format_double(rep.sup_ratio) << " refined " << format_double(rep.refined_sup_ratio)
          << " infinite " << rep.infinite << " verdict " << (v ? (*v ? "pass" : "fail") : "none") << '\n';
    }
    return verdict(rep.pass().value_or(true));
  }
  if (*audit) return cmd_audit(which, config_path, out_path, full, out);
  if (*gen) {
    if (*strength_opt) g.strength = strength;
    const Instance inst = generate(g);
    Json j = to_json(inst);
    j["config"] = gen_json(g);
    emit(j.dump() + "\n", out_path, out);
    return 0;
  }
  throw UsageError("no subcommand");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Orlicz maximal operators and mixed weighted inequalities on dyadic grids", "omlab"};
  try {
    return dispatch(app, out, err, args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    err << "input error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace omlab
