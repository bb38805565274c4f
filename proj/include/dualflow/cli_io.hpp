#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dualflow/fields.hpp"
#include "dualflow/gamma_sweep.hpp"
#include "dualflow/maximizer.hpp"
#include "dualflow/problem.hpp"
#include "dualflow/verification.hpp"

namespace dualflow {

enum class Command { solve_euler, solve_ns, solve_nsp, sweep_nu, verify };

const char* command_name(Command c);
/// Throws ConfigError for an unknown name.
Command parse_command(std::string_view name);

struct GridSpec {
  int d = 2;
  int n = 16;
  int n_t = 16;
  double T = 1.0;
};

/// Where the base states come from.
struct ProblemSpec {
  /// An exact-solution name, "modes" (built-in stream-function modes) or "file".
  std::string base = "steady_shear_2d";
  double nu = 0.0;
  double a_V = 1.0;
  double a_W = 1.0;
  double a_p = 1.0;
  double vbar_scale = 1.0;
  double perturbation = 0.1;  ///< norm of the random initial dual
  /// "kx ky amplitude" triples separated by ';' (d = 2, base = modes).
  std::string modes;
  /// Field files for base = file, keyed vbar / wbar / pbar / f / v0; missing ones are zero.
  std::map<std::string, std::filesystem::path> files;
};

struct VerifySpec {
  int fd_directions = 10;
  double fd_step = 1e-5;
  double fd_tol = 1e-6;
  int sup_samples = 10000;
  double sup_tol = 1e-10;
  bool consistency = true;  ///< also run a consistency solve with audits
};

struct RunConfig {
  Command command = Command::solve_euler;
  GridSpec grid;
  ProblemSpec problem;
  MaxOptions opts;
  SweepConfig sweep;  ///< base filled by build_problem at run time
  VerifySpec verify;
  std::filesystem::path output_dir = "out";
  bool dump_fields = false;
  std::uint64_t seed = 1;
};

/// Parses `key = value` lines with `[section]` headers and `#` comments.
/// Keys before the first header belong to [run]. Unknown sections or keys,
/// duplicates and out-of-range values throw ConfigError with line numbers.
/// Relative file paths resolve against base_dir.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
/// Canonical text of a resolved configuration; parse_config accepts it back.
std::string echo_config(const RunConfig& cfg);

/// Problem data described by the configuration. Throws ConfigError.
ProblemData build_problem(const RunConfig& cfg);

// ---- binary fields ----

inline constexpr char kFieldMagic[4] = {'D', 'F', 'L', 'D'};
inline constexpr std::uint16_t kFieldVersion = 1;
inline constexpr std::size_t kFieldHeaderBytes = 32;

/// 32-byte little-endian header (magic, u16 version, u16 d, u32 n, u32 n_t, u32 ncomp,
/// f64 T, u32 slice count with 0 meaning n_t) then little-endian doubles, time-major,
/// component-major, space row-major.
void write_field(const Field& f, const std::filesystem::path& path);
/// Throws FieldFormatError on magic, version, shape or length problems.
Field read_field(const std::filesystem::path& path);

// ---- CSV ----

using CsvCell = std::variant<double, std::int64_t, std::string>;
using CsvRow = std::vector<CsvCell>;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Doubles are written with 17 significant digits; LF line endings; atomic replace.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<CsvRow>& rows);
CsvTable read_csv(const std::filesystem::path& path);
/// Exact inverse of the double formatting used by write_csv.
double parse_csv_double(const std::string& cell);
/// Writes text atomically through a temporary file and rename.
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

void write_summary(const std::vector<ConsistencyReport>& records, const std::filesystem::path& path);
void write_summary(const std::vector<SweepRow>& records, const std::filesystem::path& path);
void write_summary(const std::vector<LimsupRow>& records, const std::filesystem::path& path);

/// One row of a verification summary.
struct CheckRecord {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};
void write_summary(const std::vector<CheckRecord>& records, const std::filesystem::path& path);

void write_iteration_log(const std::vector<IterationRecord>& log, const std::filesystem::path& path);

}  // namespace dualflow
