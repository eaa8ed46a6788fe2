#pragma once

// File formats: grid functions (JSON, or CSV on input), instance bundles,
// sweep and audit configs, JSON check reports and the sweep CSV.

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "omlab/geometry.hpp"
#include "omlab/harness.hpp"
#include "omlab/instances.hpp"
#include "omlab/report.hpp"

namespace omlab {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "omlab/1";

/// Raised for malformed input files and configs.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json to_json(const GridFunction& f);
GridFunction grid_function_from_json(const Json& j);
/// One value per line after a "# dim,K,m" header, where the cell side is 2^-m.
GridFunction grid_function_from_csv(std::istream& in);
/// JSON unless the first non-blank character is '#'.
GridFunction read_grid_function(const std::filesystem::path& path);

/// "g:k:c0,c1,..." with exactly `dim` coordinates.
DyadicCube parse_cube(const std::string& text, int dim);

Json to_json(const Instance& inst);
Instance instance_from_json(const Json& j);

Json to_json(const SweepConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
SweepConfig sweep_config_from_json(const Json& j);

Json to_json(const AuditReport& rep);
/// {"schema", "config", "checks": [...], "pass"}.
Json report_json(const AuditReport& rep, const Json& config);

/// "# config" and "# summary" comment lines, then the header and one row per
/// coarse record.
void write_sweep_csv(std::ostream& out, const SweepReport& rep);

struct CsvVerdict {
  std::size_t rows = 0;
  std::size_t problems = 0;
  std::string first_problem;
  bool ok() const noexcept { return problems == 0; }
};

/// Re-derives every ratio, the summary sup_ratio and the theorem-mode
/// verdict from the rows of a sweep CSV.
CsvVerdict check_sweep_csv(std::istream& in);

Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Shortest decimal that round-trips.
std::string format_double(double x);

}  // namespace omlab
