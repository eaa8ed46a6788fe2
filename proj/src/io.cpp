#include "omlab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace omlab {

namespace {

Json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

double read_number(const Json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
  }
  throw FormatError(std::string("expected a number for ") + what);
}

double parse_double(const std::string& s) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("not a number: '" + s + "'");
  return x;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

Json certificate_json(const A1Certificate& c, int dim) {
  return Json{{"constant", number(c.constant)}, {"witness", to_string(c.witness, dim)}, {"grids", c.grids}};
}

A1Certificate certificate_from_json(const Json& j, int dim) {
  A1Certificate c;
  c.constant = read_number(j.at("constant"), "A1 constant");
  c.witness = parse_cube(j.at("witness").get<std::string>(), dim);
  c.grids = j.at("grids").get<std::vector<int>>();
  return c;
}

const char* kCsvHeader = "seed,r,delta,a1_u,a1_vr,t,lhs,rhs,ratio,bound_side";

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json to_json(const GridFunction& f) {
  const Domain& d = f.domain();
  return Json{{"dim", d.dim()}, {"box_exp", d.box_exp()}, {"cell_exp", d.cell_exp()}, {"values", f.values()}};
}

GridFunction grid_function_from_json(const Json& j) {
  try {
    const Domain d(j.at("dim").get<int>(), j.at("box_exp").get<int>(), j.at("cell_exp").get<int>());
    std::vector<double> values;
    for (const Json& x : j.at("values")) {
      if (!x.is_number()) throw FormatError("grid values must be numbers");
      values.push_back(x.get<double>());
    }
    return GridFunction(d, std::move(values));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed grid function: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("malformed grid function: ") + e.what());
  }
}

GridFunction grid_function_from_csv(std::istream& in) {
  std::string line;
  while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
  }
  if (line.empty() || line[0] != '#') throw FormatError("CSV grid function needs a '# dim,K,m' header");
  const auto fields = split(line.substr(1), ',');
  if (fields.size() != 3) throw FormatError("CSV header must be '# dim,K,m'");
  const auto field = [&](std::size_t i) {
    std::string s = fields[i];
    s.erase(0, s.find_first_not_of(' '));
    s.erase(s.find_last_not_of(" \r") + 1);
    return static_cast<int>(parse_double(s));
  };
  std::vector<double> values;
  while (std::getline(in, line)) {
    line.erase(line.find_last_not_of(" \t\r") + 1);
    line.erase(0, line.find_first_not_of(" \t"));
    if (line.empty()) continue;
    values.push_back(parse_double(line));
  }
  try {
    return GridFunction(Domain(field(0), field(1), -field(2)), std::move(values));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("malformed grid function: ") + e.what());
  }
}

GridFunction read_grid_function(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  in >> std::ws;
  if (in.peek() == '#') return grid_function_from_csv(in);
  try {
    return grid_function_from_json(Json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

DyadicCube parse_cube(const std::string& text, int dim) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw FormatError("cube must be 'grid:gen:c0,...': " + text);
  DyadicCube q;
  try {
    q.grid = std::stoi(parts[0]);
    q.gen = std::stoi(parts[1]);
    const auto coords = split(parts[2], ',');
    if (static_cast<int>(coords.size()) != dim) throw FormatError("cube needs " + std::to_string(dim) + " coordinates: " + text);
    for (int i = 0; i < dim; ++i) q.coords[i] = std::stoll(coords[static_cast<std::size_t>(i)]);
  } catch (const std::logic_error&) {
    throw FormatError("malformed cube: " + text);
  }
  if (q.grid < 0 || q.grid >= grid_count(dim)) throw FormatError("grid index out of range: " + text);
  return q;
}

Json to_json(const Instance& inst) {
  const int dim = inst.f.domain().dim();
  return Json{{"schema", kSchema},
              {"kind", to_string(inst.kind)},
              {"seed", inst.seed},
              {"f", to_json(inst.f)},
              {"u", to_json(inst.u)},
              {"v", to_json(inst.v)},
              {"a1_u", certificate_json(inst.a1_u, dim)},
              {"a1_vr", certificate_json(inst.a1_vr, dim)}};
}

Instance instance_from_json(const Json& j) {
  try {
    GridFunction f = grid_function_from_json(j.at("f"));
    const int dim = f.domain().dim();
    return Instance{parse_kind(j.at("kind").get<std::string>()),
                    j.at("seed").get<std::uint64_t>(),
                    std::move(f),
                    grid_function_from_json(j.at("u")),
                    grid_function_from_json(j.at("v")),
                    certificate_from_json(j.at("a1_u"), dim),
                    certificate_from_json(j.at("a1_vr"), dim)};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed instance: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("malformed instance: ") + e.what());
  }
}

Json to_json(const SweepConfig& c) {
  Json kinds = Json::array();
  for (InstanceKind k : c.kinds) kinds.push_back(to_string(k));
  return Json{{"dim", c.dim},
              {"box_exp", c.box_exp},
              {"cell_exp", c.cell_exp},
              {"instances", c.instances},
              {"seed", c.seed},
              {"r", c.r_values},
              {"delta", c.delta_values},
              {"kinds", kinds},
              {"u_cap", number(c.u_cap)},
              {"vr_cap", number(c.vr_cap)},
              {"thresholds", c.thresholds},
              {"t_lo", c.t_lo},
              {"t_hi", c.t_hi},
              {"side", to_string(c.side)},
              {"mode", c.mode == SweepMode::theorem ? "theorem" : "conjecture"},
              {"refine", c.refine},
              {"stability", c.stability},
              {"sup_bound", c.sup_bound ? Json(*c.sup_bound) : Json(nullptr)}};
}

SweepConfig sweep_config_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("sweep config must be a JSON object");
  SweepConfig c;
  try {
    for (const auto& [key, val] : j.items()) {
      if (key == "dim") c.dim = val.get<int>();
      else if (key == "box_exp") c.box_exp = val.get<int>();
      else if (key == "cell_exp") c.cell_exp = val.get<int>();
      else if (key == "instances") c.instances = val.get<std::size_t>();
      else if (key == "seed") c.seed = val.get<std::uint64_t>();
      else if (key == "r") c.r_values = val.get<std::vector<double>>();
      else if (key == "delta") c.delta_values = val.get<std::vector<double>>();
      else if (key == "kinds") {
        c.kinds.clear();
        for (const Json& k : val) c.kinds.push_back(parse_kind(k.get<std::string>()));
      }
      else if (key == "u_cap") c.u_cap = read_number(val, "u_cap");
      else if (key == "vr_cap") c.vr_cap = read_number(val, "vr_cap");
      else if (key == "thresholds") c.thresholds = val.get<std::size_t>();
      else if (key == "t_lo") c.t_lo = val.get<double>();
      else if (key == "t_hi") c.t_hi = val.get<double>();
      else if (key == "side") c.side = parse_side(val.get<std::string>());
      else if (key == "mode") {
        const std::string m = val.get<std::string>();
        if (m == "theorem") c.mode = SweepMode::theorem;
        else if (m == "conjecture") c.mode = SweepMode::conjecture;
        else throw FormatError("unknown sweep mode: " + m);
      }
      else if (key == "refine") c.refine = val.get<bool>();
      else if (key == "stability") c.stability = val.get<double>();
      else if (key == "sup_bound") {
        if (val.is_null()) c.sup_bound.reset();
        else c.sup_bound = val.get<double>();
      }
      else throw FormatError("unknown sweep config key: " + key);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed sweep config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("malformed sweep config: ") + e.what());
  }
  return c;
}

Json to_json(const AuditReport& rep) {
  Json checks = Json::array();
  for (const Check& c : rep.checks) {
    checks.push_back(Json{{"name", c.name},
                          {"lhs", number(c.lhs)},
                          {"rhs", number(c.rhs)},
                          {"slack", number(c.slack())},
                          {"witness", c.witness},
                          {"pass", c.pass}});
  }
  return checks;
}

Json report_json(const AuditReport& rep, const Json& config) {
  return Json{{"schema", kSchema},
              {"config", config},
              {"checks", to_json(rep)},
              {"violations", rep.violations()},
              {"pass", rep.pass()}};
}

void write_sweep_csv(std::ostream& out, const SweepReport& rep) {
  std::size_t coarse_infinite = 0;
  for (const SweepRow& row : rep.rows) coarse_infinite += std::isfinite(row.record.ratio) ? 0 : 1;
  const std::optional<bool> verdict = rep.pass();
  const Json summary{{"rows", rep.rows.size()},
                     {"sup_ratio", number(rep.sup_ratio)},
                     {"refined_sup_ratio", number(rep.refined_sup_ratio)},
                     {"infinite", coarse_infinite},
                     {"refined_infinite", rep.infinite - coarse_infinite},
                     {"stable", rep.stable()},
                     {"pass", verdict ? Json(*verdict) : Json(nullptr)}};
  out << "# config " << to_json(rep.config).dump() << '\n';
  out << "# summary " << summary.dump() << '\n';
  out << kCsvHeader << '\n';
  for (const SweepRow& row : rep.rows) {
    const InequalityRecord& rec = row.record;
    out << row.seed << ',' << format_double(row.r) << ',' << format_double(row.delta) << ','
        << format_double(row.a1_u) << ',' << format_double(row.a1_vr) << ',' << format_double(rec.t) << ','
        << format_double(rec.lhs) << ',' << format_double(rec.rhs) << ',' << format_double(rec.ratio) << ','
        << to_string(rec.side) << '\n';
  }
}

CsvVerdict check_sweep_csv(std::istream& in) {
  CsvVerdict v;
  const auto problem = [&](const std::string& what) {
    if (v.problems++ == 0) v.first_problem = what;
  };
  std::optional<Json> config;
  std::optional<Json> summary;
  bool header = false;
  double sup = 0.0;
  std::size_t infinite = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string at = "line " + std::to_string(line_no) + ": ";
    if (line.rfind("# config ", 0) == 0 || line.rfind("# summary ", 0) == 0) {
      const bool is_config = line[2] == 'c';
      try {
        Json j = Json::parse(line.substr(is_config ? 9 : 10));
        (is_config ? config : summary) = std::move(j);
      } catch (const nlohmann::json::exception&) {
        problem(at + "unparsable comment JSON");
      }
      continue;
    }
    if (!header) {
      if (line != kCsvHeader) problem(at + "unexpected header");
      header = true;
      continue;
    }
    ++v.rows;
    const auto f = split(line, ',');
    if (f.size() != 10) {
      problem(at + "expected 10 columns");
      continue;
    }
    try {
      const double lhs = parse_double(f[6]);
      const double rhs = parse_double(f[7]);
      const double ratio = parse_double(f[8]);
      parse_side(f[9]);
      if (!(lhs >= 0.0) || !(rhs >= 0.0) || !std::isfinite(lhs) || !std::isfinite(rhs)) {
        problem(at + "lhs and rhs must be finite and nonnegative");
      }
      const double expect = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0);
      if (ratio != expect) problem(at + "ratio is not lhs/rhs");
      if (std::isfinite(ratio)) {
        sup = std::max(sup, ratio);
      } else {
        ++infinite;
      }
    } catch (const std::exception& e) {
      problem(at + e.what());
    }
  }
  if (!config || !summary) {
    problem("missing '# config' or '# summary' line");
    return v;
  }
  if (!header) problem("missing header");
  try {
    const SweepConfig cfg = sweep_config_from_json(*config);
    if (summary->at("rows").get<std::size_t>() != v.rows) problem("row count differs from summary");
    if (read_number(summary->at("sup_ratio"), "sup_ratio") != sup) problem("sup_ratio differs from rows");
    if (summary->at("infinite").get<std::size_t>() != infinite) problem("infinite count differs from rows");
    const Json& pass = summary->at("pass");
    if (cfg.mode == SweepMode::conjecture) {
      if (!pass.is_null()) problem("conjecture mode carries a verdict");
    } else if (!pass.is_boolean()) {
      problem("theorem mode lacks a verdict");
    } else if (!pass.get<bool>()) {
      problem("sweep failed");
    } else {
      if (infinite > 0) problem("pass recorded with infinite ratios");
      if (cfg.sup_bound && sup > *cfg.sup_bound) problem("pass recorded above sup_bound");
    }
  } catch (const std::exception& e) {
    problem(std::string("summary: ") + e.what());
  }
  return v;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace omlab
