#include "dualflow/cli_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "dualflow/errors.hpp"
#include "dualflow/exact_solutions.hpp"
#include "dualflow/grid_ops.hpp"

namespace dualflow {

namespace fs = std::filesystem;

const char* command_name(Command c) {
  switch (c) {
    case Command::solve_euler: return "solve-euler";
    case Command::solve_ns: return "solve-ns";
    case Command::solve_nsp: return "solve-nsp";
    case Command::sweep_nu: return "sweep-nu";
    case Command::verify: return "verify";
  }
  return "?";
}

Command parse_command(std::string_view name) {
  for (Command c : {Command::solve_euler, Command::solve_ns, Command::solve_nsp, Command::sweep_nu,
                    Command::verify})
    if (name == command_name(c)) return c;
  throw ConfigError("unknown command '" + std::string(name) +
                    "' (expected solve-euler, solve-ns, solve-nsp, sweep-nu or verify)");
}

// ---------------------------------------------------------------- config

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& v, int line, const std::string& key) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
    fail(line, "'" + key + "' expects a finite number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& v, int line, const std::string& key) {
  long long out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    fail(line, "'" + key + "' expects an integer, got '" + v + "'");
  return out;
}

int to_int32(const std::string& v, int line, const std::string& key) {
  const long long x = to_int(v, line, key);
  if (x < -2147483647LL || x > 2147483647LL) fail(line, "'" + key + "' is out of range");
  return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string& v, int line, const std::string& key) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    fail(line, "'" + key + "' expects an unsigned integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(line, "'" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& v, int line, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) fail(line, "'" + key + "' has an empty list entry");
    out.push_back(to_double(t, line, key));
  }
  if (out.empty()) fail(line, "'" + key + "' expects a comma-separated list");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, int, const std::string&)>;
using SectionTable = std::map<std::string, Setter>;

const std::map<std::string, SectionTable>& config_schema() {
  static const std::map<std::string, SectionTable> schema = [] {
    std::map<std::string, SectionTable> s;
    s["run"] = {
        {"command", [](RunConfig& c, const std::string& v, int l, const std::string&) {
           try {
             c.command = parse_command(v);
           } catch (const ConfigError& e) {
             fail(l, e.what());
           }
         }},
        {"output", [](RunConfig& c, const std::string& v, int, const std::string&) { c.output_dir = v; }},
        {"dump_fields", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.dump_fields = to_bool(v, l, k); }},
        {"seed", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.seed = to_u64(v, l, k); }},
    };
    s["grid"] = {
        {"d", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.grid.d = to_int32(v, l, k); }},
        {"n", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.grid.n = to_int32(v, l, k); }},
        {"n_t", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.grid.n_t = to_int32(v, l, k); }},
        {"T", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.grid.T = to_double(v, l, k); }},
    };
    auto file_key = [](const char* name) {
      return [name](RunConfig& c, const std::string& v, int, const std::string&) {
        c.problem.files[name] = v;
      };
    };
    s["problem"] = {
        {"base", [](RunConfig& c, const std::string& v, int, const std::string&) { c.problem.base = v; }},
        {"nu", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.problem.nu = to_double(v, l, k); }},
        {"a_V", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.problem.a_V = to_double(v, l, k); }},
        {"a_W", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.problem.a_W = to_double(v, l, k); }},
        {"a_p", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.problem.a_p = to_double(v, l, k); }},
        {"vbar_scale", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.problem.vbar_scale = to_double(v, l, k); }},
        {"perturbation", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.problem.perturbation = to_double(v, l, k); }},
        {"modes", [](RunConfig& c, const std::string& v, int, const std::string&) { c.problem.modes = v; }},
        {"vbar_file", file_key("vbar")},
        {"wbar_file", file_key("wbar")},
        {"pbar_file", file_key("pbar")},
        {"f_file", file_key("f")},
        {"v0_file", file_key("v0")},
    };
    s["optimizer"] = {
        {"max_iters", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.opts.max_iters = to_int32(v, l, k); }},
        {"grad_tol", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.opts.grad_tol = to_double(v, l, k); }},
        {"memory", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.opts.memory = to_int32(v, l, k); }},
        {"backtrack", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.opts.backtrack = to_double(v, l, k); }},
        {"feas_floor", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.opts.feas_floor_rel = to_double(v, l, k); }},
        {"initial_step", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.opts.initial_step = to_double(v, l, k); }},
        {"max_line_search", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.opts.max_line_search = to_int32(v, l, k); }},
        {"armijo", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.opts.armijo = to_double(v, l, k); }},
        {"boundary_fraction", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.opts.boundary_fraction = to_double(v, l, k); }},
        {"precondition", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.opts.precondition = to_bool(v, l, k); }},
    };
    s["sweep"] = {
        {"nu_list", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.sweep.nu_list = to_list(v, l, k); }},
        {"alpha", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.sweep.alpha = to_double(v, l, k); }},
        {"kappa", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.sweep.kappa = to_double(v, l, k); }},
        {"reference_grad_tol", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.sweep.reference_grad_tol = to_double(v, l, k); }},
        {"compat_tol", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.sweep.compat_tol = to_double(v, l, k); }},
        {"chi_normalization", [](RunConfig& c, const std::string& v, int l, const std::string&) {
           if (v == "literal") c.sweep.chi_normalization = ChiNormalization::literal;
           else if (v == "divided") c.sweep.chi_normalization = ChiNormalization::divided;
           else fail(l, "'chi_normalization' expects literal or divided, got '" + v + "'");
         }},
    };
    s["verify"] = {
        {"fd_directions", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.verify.fd_directions = to_int32(v, l, k); }},
        {"fd_step", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.verify.fd_step = to_double(v, l, k); }},
        {"fd_tol", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.verify.fd_tol = to_double(v, l, k); }},
        {"sup_samples", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.verify.sup_samples = to_int32(v, l, k); }},
        {"sup_tol", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.verify.sup_tol = to_double(v, l, k); }},
        {"consistency", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.verify.consistency = to_bool(v, l, k); }},
    };
    return s;
  }();
  return schema;
}

/// First line on which each "section.key" was set.
using LineMap = std::map<std::string, int>;

int line_of(const LineMap& lines, const std::string& key) {
  auto it = lines.find(key);
  return it == lines.end() ? 0 : it->second;
}

[[noreturn]] void fail_key(const LineMap& lines, const std::string& key, const std::string& msg) {
  const int l = line_of(lines, key);
  if (l > 0) fail(l, msg);
  throw ConfigError(msg + " (default value)");
}

bool is_exact_name(const std::string& b) {
  return b == "steady_shear_2d" || b == "taylor_green_2d" || b == "gradient_flow_check";
}

void validate_config(RunConfig& c, const LineMap& lines, const fs::path& base_dir) {
  try {
    make_grid(c.grid.d, c.grid.n, c.grid.n_t, c.grid.T);
  } catch (const GridError& e) {
    fail_key(lines, "grid", e.what());
  }

  ProblemSpec& p = c.problem;
  if (!is_exact_name(p.base) && p.base != "modes" && p.base != "file")
    fail_key(lines, "problem.base",
             "unknown base '" + p.base +
                 "' (expected steady_shear_2d, taylor_green_2d, gradient_flow_check, modes or file)");
  if ((is_exact_name(p.base) || p.base == "modes") && c.grid.d != 2)
    fail_key(lines, "problem.base", "base '" + p.base + "' requires d = 2");
  if (p.base == "modes" && trim(p.modes).empty())
    fail_key(lines, "problem.base", "base 'modes' requires a 'modes' entry");
  if (p.base == "file") {
    for (const char* req : {"vbar", "v0"})
      if (!p.files.count(req))
        fail_key(lines, "problem.base", std::string("base 'file' requires ") + req + "_file");
  }
  for (auto& [name, path] : p.files) {
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    if (!fs::exists(path))
      fail_key(lines, "problem." + name + "_file", "file '" + path.string() + "' does not exist");
  }
  if (!(p.a_V > 0.0)) fail_key(lines, "problem.a_V", "'a_V' must be positive");
  if (!(p.a_W > 0.0)) fail_key(lines, "problem.a_W", "'a_W' must be positive");
  if (!(p.a_p > 0.0)) fail_key(lines, "problem.a_p", "'a_p' must be positive");
  if (!(p.nu >= 0.0)) fail_key(lines, "problem.nu", "'nu' must be nonnegative");
  if (!(p.perturbation >= 0.0))
    fail_key(lines, "problem.perturbation", "'perturbation' must be nonnegative");

  try {
    validate(c.opts);
  } catch (const std::invalid_argument& e) {
    fail_key(lines, "optimizer", std::string("optimizer: ") + e.what());
  }

  SweepConfig& s = c.sweep;
  const double bound = alpha_bound(c.grid.d);
  if (!(s.alpha > 0.0) || !(s.alpha < bound))
    fail_key(lines, "sweep.alpha",
             "alpha = " + format_double(s.alpha) + " violates 0 < alpha < 1/([d/2]+4) = " +
                 format_double(bound) + " for d = " + std::to_string(c.grid.d));
  const auto nus = s.positive_nus();
  if (nus.empty()) fail_key(lines, "sweep.nu_list", "'nu_list' needs a positive viscosity");
  for (std::size_t i = 0; i < nus.size(); ++i) {
    if (!(nus[i] > 0.0)) fail_key(lines, "sweep.nu_list", "'nu_list' entries must be positive");
    if (i > 0 && !(nus[i] < nus[i - 1]))
      fail_key(lines, "sweep.nu_list", "'nu_list' must be strictly decreasing");
  }
  if (!(s.kappa > 0.0)) fail_key(lines, "sweep.kappa", "'kappa' must be positive");
  if (!(s.reference_grad_tol > 0.0))
    fail_key(lines, "sweep.reference_grad_tol", "'reference_grad_tol' must be positive");
  if (!(s.compat_tol > 0.0)) fail_key(lines, "sweep.compat_tol", "'compat_tol' must be positive");
  s.opts = c.opts;

  const VerifySpec& v = c.verify;
  if (v.fd_directions <= 0) fail_key(lines, "verify.fd_directions", "'fd_directions' must be positive");
  if (!(v.fd_step > 0.0)) fail_key(lines, "verify.fd_step", "'fd_step' must be positive");
  if (!(v.fd_tol > 0.0)) fail_key(lines, "verify.fd_tol", "'fd_tol' must be positive");
  if (v.sup_samples <= 0) fail_key(lines, "verify.sup_samples", "'sup_samples' must be positive");
  if (!(v.sup_tol > 0.0)) fail_key(lines, "verify.sup_tol", "'sup_tol' must be positive");
}

}  // namespace

RunConfig parse_config(std::string_view text, const fs::path& base_dir) {
  RunConfig cfg;
  const auto& schema = config_schema();
  std::string section = "run";
  LineMap lines;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) continue;
    if (content.front() == '[') {
      if (content.back() != ']') fail(line, "malformed section header '" + content + "'");
      section = trim(content.substr(1, content.size() - 2));
      if (!schema.count(section)) fail(line, "unknown section [" + section + "]");
      lines.emplace(section, line);
      continue;
    }
    const auto eq = content.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value', got '" + content + "'");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (key.empty()) fail(line, "missing key before '='");
    const SectionTable& table = schema.at(section);
    auto it = table.find(key);
    if (it == table.end()) fail(line, "unknown key '" + key + "' in [" + section + "]");
    const std::string full = section + "." + key;
    if (auto prev = lines.find(full); prev != lines.end())
      fail(line, "duplicate key '" + key + "' in [" + section + "] (first set on line " +
                     std::to_string(prev->second) + ", again on line " + std::to_string(line) + ")");
    lines.emplace(full, line);
    if (value.empty()) fail(line, "missing value for '" + key + "'");
    it->second(cfg, value, line, key);
  }
  validate_config(cfg, lines, base_dir);
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string echo_config(const RunConfig& c) {
  std::ostringstream o;
  auto num = [](double v) { return format_double(v); };
  auto flag = [](bool b) { return b ? "true" : "false"; };
  o << "command = " << command_name(c.command) << "\n";
  o << "output = " << c.output_dir.string() << "\n";
  o << "dump_fields = " << flag(c.dump_fields) << "\n";
  o << "seed = " << c.seed << "\n";
  o << "\n[grid]\n";
  o << "d = " << c.grid.d << "\nn = " << c.grid.n << "\nn_t = " << c.grid.n_t
    << "\nT = " << num(c.grid.T) << "\n";
  o << "\n[problem]\n";
  o << "base = " << c.problem.base << "\n";
  o << "nu = " << num(c.problem.nu) << "\n";
  o << "a_V = " << num(c.problem.a_V) << "\na_W = " << num(c.problem.a_W)
    << "\na_p = " << num(c.problem.a_p) << "\n";
  o << "vbar_scale = " << num(c.problem.vbar_scale) << "\n";
  o << "perturbation = " << num(c.problem.perturbation) << "\n";
  if (!c.problem.modes.empty()) o << "modes = " << c.problem.modes << "\n";
  for (const auto& [name, path] : c.problem.files) o << name << "_file = " << path.string() << "\n";
  o << "\n[optimizer]\n";
  o << "max_iters = " << c.opts.max_iters << "\ngrad_tol = " << num(c.opts.grad_tol)
    << "\nmemory = " << c.opts.memory << "\nbacktrack = " << num(c.opts.backtrack)
    << "\nfeas_floor = " << num(c.opts.feas_floor_rel)
    << "\ninitial_step = " << num(c.opts.initial_step)
    << "\nmax_line_search = " << c.opts.max_line_search << "\narmijo = " << num(c.opts.armijo)
    << "\nboundary_fraction = " << num(c.opts.boundary_fraction)
    << "\nprecondition = " << flag(c.opts.precondition) << "\n";
  o << "\n[sweep]\n";
  o << "nu_list = ";
  for (std::size_t i = 0; i < c.sweep.nu_list.size(); ++i)
    o << (i ? ", " : "") << num(c.sweep.nu_list[i]);
  o << "\nalpha = " << num(c.sweep.alpha) << "\nkappa = " << num(c.sweep.kappa)
    << "\nreference_grad_tol = " << num(c.sweep.reference_grad_tol)
    << "\ncompat_tol = " << num(c.sweep.compat_tol) << "\nchi_normalization = "
    << (c.sweep.chi_normalization == ChiNormalization::literal ? "literal" : "divided") << "\n";
  o << "\n[verify]\n";
  o << "fd_directions = " << c.verify.fd_directions << "\nfd_step = " << num(c.verify.fd_step)
    << "\nfd_tol = " << num(c.verify.fd_tol) << "\nsup_samples = " << c.verify.sup_samples
    << "\nsup_tol = " << num(c.verify.sup_tol)
    << "\nconsistency = " << flag(c.verify.consistency) << "\n";
  return o.str();
}

// ---------------------------------------------------------------- problems

namespace {

ProblemData modes_problem(const RunConfig& c, const Grid& g) {
  struct Mode {
    double kx, ky, amp;
  };
  std::vector<Mode> modes;
  std::stringstream ss(c.problem.modes);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (trim(item).empty()) continue;
    std::istringstream is(item);
    Mode m{};
    std::string extra;
    if (!(is >> m.kx >> m.ky >> m.amp) || (is >> extra))
      throw ConfigError("modes: expected 'kx ky amplitude' triples, got '" + trim(item) + "'");
    if (m.kx != std::round(m.kx) || m.ky != std::round(m.ky))
      throw ConfigError("modes: wavenumbers must be integers");
    modes.push_back(m);
  }
  const double tp = 2.0 * std::numbers::pi;
  // V = perp grad psi, psi = sum amp sin(2 pi k.x)
  auto velocity = [&](int comp, const Point& x) {
    double v = 0.0;
    for (const Mode& m : modes) {
      const double w = tp * m.amp * std::cos(tp * (m.kx * x[0] + m.ky * x[1]));
      v += comp == 0 ? w * m.ky : -w * m.kx;
    }
    return v;
  };
  ProblemData p = ProblemData::zeros(g);
  p.a_V = c.problem.a_V;
  p.a_W = c.problem.a_W;
  p.a_p = c.problem.a_p;
  p.nu = c.problem.nu;
  p.Vbar = sample_field(g, FieldKind::vector, g.n_t,
                        [&](int comp, double, const Point& x) { return velocity(comp, x); });
  p.V0 = sample_field(g, FieldKind::vector, 1,
                      [&](int comp, double, const Point& x) { return velocity(comp, x); });
  p.Wbar = p.nu * sym_gradient(p.Vbar);
  return p;
}

Field load_matching(const fs::path& path, const Grid& g, FieldKind kind, int slices,
                    const std::string& name) {
  Field f = read_field(path);
  const Grid& h = f.grid();
  if (h.d != g.d || h.n != g.n || h.n_t != g.n_t || h.T != g.T)
    throw ConfigError(name + "_file: grid does not match the [grid] section");
  if (f.kind() != kind || f.n_slices() != slices)
    throw ConfigError(name + "_file: wrong field kind or slice count");
  return f;
}

}  // namespace

ProblemData build_problem(const RunConfig& c) {
  const Grid g = make_grid(c.grid.d, c.grid.n, c.grid.n_t, c.grid.T);
  ProblemData p;
  const ProblemSpec& s = c.problem;
  if (is_exact_name(s.base)) {
    p = exact_problem(exact_solution_by_name(s.base, s.nu), g, s.a_V, s.a_W, s.a_p);
    p.nu = s.nu;
  } else if (s.base == "modes") {
    p = modes_problem(c, g);
  } else {
    p = ProblemData::zeros(g);
    p.a_V = s.a_V;
    p.a_W = s.a_W;
    p.a_p = s.a_p;
    p.nu = s.nu;
    try {
      const auto& files = s.files;
      p.Vbar = load_matching(files.at("vbar"), g, FieldKind::vector, g.n_t, "vbar");
      p.V0 = load_matching(files.at("v0"), g, FieldKind::vector, 1, "v0");
      if (files.count("wbar")) p.Wbar = load_matching(files.at("wbar"), g, FieldKind::sym, g.n_t, "wbar");
      if (files.count("pbar")) p.pbar = load_matching(files.at("pbar"), g, FieldKind::scalar, g.n_t, "pbar");
      if (files.count("f")) p.F = load_matching(files.at("f"), g, FieldKind::vector, g.n_t, "f");
    } catch (const FieldFormatError& e) {
      throw ConfigError(e.what());
    }
  }
  if (s.vbar_scale != 1.0) p.Vbar *= s.vbar_scale;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

// ---------------------------------------------------------------- fields

namespace {

template <class T>
void put_le(unsigned char* dst, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = static_cast<unsigned char>(v >> (8 * i));
}

template <class T>
T get_le(const unsigned char* src) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(src[i]) << (8 * i));
  return v;
}

}  // namespace

void write_field(const Field& f, const fs::path& path) {
  const Grid& g = f.grid();
  std::string buf(kFieldHeaderBytes + f.values().size() * 8, '\0');
  auto* p = reinterpret_cast<unsigned char*>(buf.data());
  std::memcpy(p, kFieldMagic, 4);
  put_le<std::uint16_t>(p + 4, kFieldVersion);
  put_le<std::uint16_t>(p + 6, static_cast<std::uint16_t>(g.d));
  put_le<std::uint32_t>(p + 8, static_cast<std::uint32_t>(g.n));
  put_le<std::uint32_t>(p + 12, static_cast<std::uint32_t>(g.n_t));
  put_le<std::uint32_t>(p + 16, static_cast<std::uint32_t>(f.ncomp()));
  put_le<std::uint64_t>(p + 20, std::bit_cast<std::uint64_t>(g.T));
  // reserved word: slice count, 1 for initial data
  put_le<std::uint32_t>(p + 28, static_cast<std::uint32_t>(f.n_slices()));
  unsigned char* q = p + kFieldHeaderBytes;
  for (double v : f.values()) {
    put_le<std::uint64_t>(q, std::bit_cast<std::uint64_t>(v));
    q += 8;
  }
  write_text_atomic(path, buf);
}

Field read_field(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FieldFormatError("cannot open field file '" + path.string() + "'");
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = "field file '" + path.string() + "': ";
  if (buf.size() < kFieldHeaderBytes) throw FieldFormatError(where + "truncated header");
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  if (std::memcmp(p, kFieldMagic, 4) != 0) throw FieldFormatError(where + "bad magic");
  const auto version = get_le<std::uint16_t>(p + 4);
  if (version != kFieldVersion)
    throw FieldFormatError(where + "format version " + std::to_string(version) +
                           " is not supported (this reader handles version " +
                           std::to_string(kFieldVersion) + ")");
  const int d = get_le<std::uint16_t>(p + 6);
  const auto n = get_le<std::uint32_t>(p + 8);
  const auto n_t = get_le<std::uint32_t>(p + 12);
  const auto ncomp = get_le<std::uint32_t>(p + 16);
  const double T = std::bit_cast<double>(get_le<std::uint64_t>(p + 20));
  auto slices = get_le<std::uint32_t>(p + 28);
  if (slices == 0) slices = n_t;
  if (n > (1u << 12) || n_t > (1u << 20)) throw FieldFormatError(where + "implausible grid size");
  Grid g;
  try {
    g = make_grid(d, static_cast<int>(n), static_cast<int>(n_t), T);
  } catch (const GridError& e) {
    throw FieldFormatError(where + e.what());
  }
  FieldKind kind;
  if (ncomp == 1) kind = FieldKind::scalar;
  else if (static_cast<int>(ncomp) == d) kind = FieldKind::vector;
  else if (static_cast<int>(ncomp) == sym_size(d)) kind = FieldKind::sym;
  else throw FieldFormatError(where + "component count " + std::to_string(ncomp) + " does not match d");
  if (slices != 1 && slices != n_t) throw FieldFormatError(where + "slice count must be 1 or n_t");
  Field f(g, kind, static_cast<int>(slices));
  const std::size_t expect = kFieldHeaderBytes + f.values().size() * 8;
  if (buf.size() < expect)
    throw FieldFormatError(where + "truncated payload (" + std::to_string(buf.size()) +
                           " bytes, expected " + std::to_string(expect) + ")");
  if (buf.size() > expect) throw FieldFormatError(where + "trailing bytes after payload");
  const unsigned char* q = p + kFieldHeaderBytes;
  for (double& v : f.values()) {
    v = std::bit_cast<double>(get_le<std::uint64_t>(q));
    q += 8;
  }
  return f;
}

// ---------------------------------------------------------------- CSV

void write_text_atomic(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string cell_text(const CsvCell& c) {
  if (const double* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return csv_escape(std::get<std::string>(c));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

}  // namespace

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<CsvRow>& rows) {
  std::string text;
  for (std::size_t i = 0; i < header.size(); ++i) text += (i ? "," : "") + csv_escape(header[i]);
  text += '\n';
  for (const CsvRow& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("csv row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + cell_text(row[i]);
    text += '\n';
  }
  write_text_atomic(path, text);
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      t.header = split_csv_line(line);
      first = false;
    } else {
      t.rows.push_back(split_csv_line(line));
    }
  }
  return t;
}

double parse_csv_double(const std::string& cell) {
  double v = 0.0;
  auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    throw std::invalid_argument("not a number: '" + cell + "'");
  return v;
}

void write_summary(const std::vector<ConsistencyReport>& records, const fs::path& path) {
  std::vector<CsvRow> rows;
  for (const auto& r : records)
    rows.push_back({r.problem, r.variant, std::int64_t{r.n}, std::int64_t{r.n_t}, r.abs_J,
                    r.dual_norm, r.V_error, r.W_error, r.p_error, r.residuals.momentum,
                    r.residuals.continuity, r.residuals.constitutive, r.residuals.initial,
                    r.final_grad_norm, std::int64_t{r.iterations}, r.termination});
  write_csv(path,
            {"problem", "variant", "n", "n_t", "abs_J", "dual_norm", "V_error", "W_error",
             "p_error", "res_momentum", "res_continuity", "res_constitutive", "res_initial",
             "final_grad_norm", "iterations", "termination"},
            rows);
}

void write_summary(const std::vector<SweepRow>& records, const fs::path& path) {
  std::vector<CsvRow> rows;
  for (const auto& r : records)
    rows.push_back({r.nu, r.A_min, r.surrogate_distance, std::int64_t{r.iters}, r.status,
                    r.min_margin, r.grad_norm, r.lower_bound,
                    std::int64_t{r.lower_bound_ok ? 1 : 0}, std::int64_t{r.in_ball ? 1 : 0}});
  write_csv(path,
            {"nu", "A_min", "surrogate_distance", "iters", "status", "min_margin", "grad_norm",
             "lower_bound", "lower_bound_ok", "in_ball"},
            rows);
}

void write_summary(const std::vector<LimsupRow>& records, const fs::path& path) {
  std::vector<CsvRow> rows;
  for (const auto& r : records)
    rows.push_back({r.nu, r.A_recovery, r.A_target, r.gap, r.positive_gap, r.compat_residual});
  write_csv(path, {"nu", "A_recovery", "A_target", "gap", "positive_gap", "compat_residual"}, rows);
}

void write_summary(const std::vector<CheckRecord>& records, const fs::path& path) {
  std::vector<CsvRow> rows;
  for (const auto& r : records)
    rows.push_back({r.name, r.value, r.tolerance, std::int64_t{r.passed ? 1 : 0}});
  write_csv(path, {"check", "value", "tolerance", "passed"}, rows);
}

void write_iteration_log(const std::vector<IterationRecord>& log, const fs::path& path) {
  std::vector<CsvRow> rows;
  for (const auto& r : log)
    rows.push_back({std::int64_t{r.iteration}, r.objective, r.grad_norm, r.min_margin, r.step});
  write_csv(path, {"iteration", "objective", "grad_norm", "min_margin", "step"}, rows);
}

}  // namespace dualflow
