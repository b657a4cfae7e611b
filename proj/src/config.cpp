#include "prandtl/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "prandtl/field_io.hpp"

namespace prandtl {

ConfigError::ConfigError(const std::string& source, int line, int column, const std::string& message)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ":" +
                                        std::to_string(column) + ": " + message
                                  : source + ": " + message),
      line_(line),
      column_(column) {}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

/// Position of a trailing comment: '#' or ';' at the start or after blank.
std::size_t comment_start(std::string_view line) {
  for (std::size_t i = 0; i < line.size(); ++i) {
    if ((line[i] == '#' || line[i] == ';') && (i == 0 || is_space(line[i - 1]))) return i;
  }
  return std::string_view::npos;
}

struct Ctx {
  const std::string& source;
  const std::filesystem::path& base_dir;

  [[noreturn]] void fail(const IniValue& v, const std::string& msg) const {
    throw ConfigError(source, v.line, v.column, msg);
  }
};

double as_double(const Ctx& c, const IniValue& v) {
  double out = 0.0;
  const char* b = v.text.data();
  const char* e = b + v.text.size();
  const auto res = std::from_chars(b, e, out);
  if (res.ec != std::errc() || res.ptr != e || !std::isfinite(out)) {
    c.fail(v, "expected a finite number, got '" + v.text + "'");
  }
  return out;
}

std::uint64_t as_u64(const Ctx& c, const IniValue& v) {
  std::uint64_t out = 0;
  const char* b = v.text.data();
  const char* e = b + v.text.size();
  const auto res = std::from_chars(b, e, out);
  if (res.ec != std::errc() || res.ptr != e) {
    c.fail(v, "expected a nonnegative integer, got '" + v.text + "'");
  }
  return out;
}

std::size_t as_size(const Ctx& c, const IniValue& v) { return static_cast<std::size_t>(as_u64(c, v)); }

int as_int(const Ctx& c, const IniValue& v) {
  int out = 0;
  const char* b = v.text.data();
  const char* e = b + v.text.size();
  const auto res = std::from_chars(b, e, out);
  if (res.ec != std::errc() || res.ptr != e) c.fail(v, "expected an integer, got '" + v.text + "'");
  return out;
}

bool as_bool(const Ctx& c, const IniValue& v) {
  if (v.text == "true" || v.text == "yes" || v.text == "1") return true;
  if (v.text == "false" || v.text == "no" || v.text == "0") return false;
  c.fail(v, "expected true/false, got '" + v.text + "'");
}

std::vector<double> as_list(const Ctx& c, const IniValue& v) {
  std::vector<double> out;
  if (trim(v.text).empty()) return out;
  std::size_t start = 0;
  int col = v.column;
  while (true) {
    const std::size_t comma = v.text.find(',', start);
    const std::string_view piece =
        std::string_view(v.text).substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const std::size_t lead = std::min(piece.find_first_not_of(" \t"), piece.size());
    IniValue item{std::string(trim(piece)), v.line, col + static_cast<int>(start + lead), v.key_column};
    out.push_back(as_double(c, item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::filesystem::path as_path(const Ctx& c, const IniValue& v) {
  if (v.text.empty()) return {};
  std::filesystem::path p(v.text);
  if (p.is_relative()) p = c.base_dir / p;
  p = p.lexically_normal();
  if (!std::filesystem::exists(p)) c.fail(v, "referenced path does not exist: " + p.string());
  return p;
}

std::string fmt(double v) { return format_exact(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt_int(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }
std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt(v[i]);
  }
  return out;
}

const char* euler_name(EulerKind k) {
  switch (k) {
    case EulerKind::Zero: return "zero";
    case EulerKind::Constant: return "constant";
    case EulerKind::Cosine: return "cosine";
    case EulerKind::Sampled: return "sampled";
  }
  return "zero";
}

const char* initial_name(InitialKind k) {
  switch (k) {
    case InitialKind::Zero: return "zero";
    case InitialKind::Synth: return "synth";
    case InitialKind::Dump: return "dump";
  }
  return "zero";
}

struct KeyDef {
  const char* section;
  const char* key;
  std::function<void(Scenario&, const Ctx&, const IniValue&)> set;
  std::function<std::string(const Scenario&)> get;
};

const std::vector<KeyDef>& registry() {
  static const std::vector<KeyDef> keys = [] {
    std::vector<KeyDef> k;
#define PRANDTL_KEY(sec, name, setter, getter)                                      \
  k.push_back({sec, name,                                                           \
               [](Scenario& s, [[maybe_unused]] const Ctx& c, const IniValue& v) { \
                 setter;                                                            \
               },                                                                   \
               [](const Scenario& s) -> std::string { return getter; }})
    PRANDTL_KEY("scenario", "kind", {
      try {
        s.kind = parse_scenario_kind(v.text);
      } catch (const std::invalid_argument&) {
        c.fail(v, "unknown scenario kind '" + v.text + "'");
      }
    }, to_string(s.kind));
    PRANDTL_KEY("scenario", "seed", s.seed = as_u64(c, v), std::to_string(s.seed));
    PRANDTL_KEY("scenario", "out", s.out_dir = std::filesystem::path(v.text), s.out_dir.string());

    PRANDTL_KEY("grid", "nx", s.grid.nx = as_size(c, v), fmt(s.grid.nx));
    PRANDTL_KEY("grid", "ny", s.grid.ny = as_size(c, v), fmt(s.grid.ny));
    PRANDTL_KEY("grid", "ymax", s.grid.ymax = as_double(c, v), fmt(s.grid.ymax));
    PRANDTL_KEY("grid", "stretch", s.grid.stretch = as_double(c, v), fmt(s.grid.stretch));

    PRANDTL_KEY("solver", "dt", s.solver.dt = as_double(c, v), fmt(s.solver.dt));
    PRANDTL_KEY("solver", "eps", s.solver.eps = as_double(c, v), fmt(s.solver.eps));
    PRANDTL_KEY("solver", "t_end", s.solver.t_end = as_double(c, v), fmt(s.solver.t_end));
    PRANDTL_KEY("solver", "cfl_guard", s.solver.cfl_guard = as_double(c, v), fmt(s.solver.cfl_guard));
    PRANDTL_KEY("solver", "sample_every", s.output.sample_every = as_size(c, v),
                fmt(s.output.sample_every));
    PRANDTL_KEY("solver", "snapshot_times", s.output.snapshot_times = as_list(c, v),
                fmt_list(s.output.snapshot_times));

    PRANDTL_KEY("gevrey", "gamma", s.solver.gevrey.gamma = as_double(c, v), fmt(s.solver.gevrey.gamma));
    PRANDTL_KEY("gevrey", "tau0", s.solver.gevrey.tau0 = as_double(c, v), fmt(s.solver.gevrey.tau0));
    PRANDTL_KEY("gevrey", "beta", s.solver.gevrey.beta = as_double(c, v), fmt(s.solver.gevrey.beta));
    PRANDTL_KEY("gevrey", "r", s.solver.gevrey.r = as_double(c, v), fmt(s.solver.gevrey.r));
    PRANDTL_KEY("gevrey", "R", s.R = as_double(c, v), fmt(s.R));
    PRANDTL_KEY("gevrey", "jmax", s.solver.gevrey.jmax = as_int(c, v), fmt_int(s.solver.gevrey.jmax));

    PRANDTL_KEY("weights", "m", s.solver.weights.m = as_double(c, v), fmt(s.solver.weights.m));
    PRANDTL_KEY("weights", "alpha", s.solver.weights.alpha = as_double(c, v),
                fmt(s.solver.weights.alpha));
    PRANDTL_KEY("weights", "s", s.s = as_int(c, v), fmt_int(s.s));

    PRANDTL_KEY("euler", "kind", {
      if (v.text == "zero") s.euler.kind = EulerKind::Zero;
      else if (v.text == "constant") s.euler.kind = EulerKind::Constant;
      else if (v.text == "cosine") s.euler.kind = EulerKind::Cosine;
      else if (v.text == "sampled") s.euler.kind = EulerKind::Sampled;
      else c.fail(v, "unknown euler kind '" + v.text + "' (zero|constant|cosine|sampled)");
    }, euler_name(s.euler.kind));
    PRANDTL_KEY("euler", "value", s.euler.value = as_double(c, v), fmt(s.euler.value));
    PRANDTL_KEY("euler", "path", s.euler.path = as_path(c, v), s.euler.path.string());

    PRANDTL_KEY("initial", "kind", {
      if (v.text == "zero") s.initial.kind = InitialKind::Zero;
      else if (v.text == "synth") s.initial.kind = InitialKind::Synth;
      else if (v.text == "dump") s.initial.kind = InitialKind::Dump;
      else c.fail(v, "unknown initial kind '" + v.text + "' (zero|synth|dump)");
    }, initial_name(s.initial.kind));
    PRANDTL_KEY("initial", "delta", s.initial.delta = as_double(c, v), fmt(s.initial.delta));
    PRANDTL_KEY("initial", "amp", s.initial.amp = as_double(c, v), fmt(s.initial.amp));
    PRANDTL_KEY("initial", "profile", {
      if (v.text != "y_exp" && v.text != "y2_exp") {
        c.fail(v, "unknown profile '" + v.text + "' (y_exp|y2_exp)");
      }
      s.initial.profile = v.text;
    }, s.initial.profile);
    PRANDTL_KEY("initial", "path", s.initial.path = as_path(c, v), s.initial.path.string());

    PRANDTL_KEY("linstab", "shear", {
      if (v.text != "critical" && v.text != "monotone") {
        c.fail(v, "unknown shear '" + v.text + "' (critical|monotone)");
      }
      s.linstab.shear = v.text;
    }, s.linstab.shear);
    PRANDTL_KEY("linstab", "ny", s.linstab.ny = as_size(c, v), fmt(s.linstab.ny));
    PRANDTL_KEY("linstab", "ymax", s.linstab.ymax = as_double(c, v), fmt(s.linstab.ymax));
    PRANDTL_KEY("linstab", "stretch", s.linstab.stretch = as_double(c, v), fmt(s.linstab.stretch));
    PRANDTL_KEY("linstab", "kmin", s.linstab.kmin = as_double(c, v), fmt(s.linstab.kmin));
    PRANDTL_KEY("linstab", "kmax", s.linstab.kmax = as_double(c, v), fmt(s.linstab.kmax));
    PRANDTL_KEY("linstab", "count", s.linstab.count = as_size(c, v), fmt(s.linstab.count));
    PRANDTL_KEY("linstab", "refine", s.linstab.refine = as_bool(c, v), fmt(s.linstab.refine));
    PRANDTL_KEY("linstab", "cross_check", s.linstab.cross_check = as_bool(c, v),
                fmt(s.linstab.cross_check));
    PRANDTL_KEY("linstab", "refine_tolerance", s.linstab.refine_tolerance = as_double(c, v),
                fmt(s.linstab.refine_tolerance));
    PRANDTL_KEY("linstab", "min_modes", s.linstab.min_modes = as_size(c, v), fmt(s.linstab.min_modes));

    PRANDTL_KEY("fit", "seeds", s.fit.seeds = as_size(c, v), fmt(s.fit.seeds));
    PRANDTL_KEY("fit", "noise", s.fit.noise = as_double(c, v), fmt(s.fit.noise));
    PRANDTL_KEY("fit", "kmin", s.fit.kmin = as_size(c, v), fmt(s.fit.kmin));
    PRANDTL_KEY("fit", "kmax", s.fit.kmax = as_size(c, v), fmt(s.fit.kmax));

    PRANDTL_KEY("verify_weights", "alphas", s.verify_weights.alphas = as_list(c, v),
                fmt_list(s.verify_weights.alphas));
    PRANDTL_KEY("verify_weights", "jmax", s.verify_weights.jmax = as_int(c, v),
                fmt_int(s.verify_weights.jmax));
    PRANDTL_KEY("verify_weights", "fields", s.verify_weights.fields = as_size(c, v),
                fmt(s.verify_weights.fields));

    PRANDTL_KEY("estimates", "identity_jmax", s.estimates.identity_jmax = as_int(c, v),
                fmt_int(s.estimates.identity_jmax));
    PRANDTL_KEY("estimates", "residual_jmax", s.estimates.residual_jmax = as_int(c, v),
                fmt_int(s.estimates.residual_jmax));
    PRANDTL_KEY("estimates", "residual_snapshots", s.estimates.residual_snapshots = as_size(c, v),
                fmt(s.estimates.residual_snapshots));
    PRANDTL_KEY("estimates", "residual_bound", s.estimates.residual_bound = as_double(c, v),
                fmt(s.estimates.residual_bound));
    PRANDTL_KEY("estimates", "aux_jmax", s.estimates.aux_jmax = as_int(c, v),
                fmt_int(s.estimates.aux_jmax));
    PRANDTL_KEY("estimates", "bstar", s.estimates.bstar = as_double(c, v), fmt(s.estimates.bstar));
    PRANDTL_KEY("estimates", "duality_tol", s.estimates.duality_tol = as_double(c, v),
                fmt(s.estimates.duality_tol));
#undef PRANDTL_KEY
    return k;
  }();
  return keys;
}

/// Informational keys written by render_manifest and ignored on input.
const std::set<std::string>& manifest_keys() {
  static const std::set<std::string> keys{"manifest.git_describe", "manifest.wall_clock",
                                          "manifest.threads", "manifest.format"};
  return keys;
}

void validate(Scenario& s, const std::string& source) {
  auto bad = [&source](const std::string& msg) { throw ConfigError(source, 0, 0, msg); };
  const auto& g = s.grid;
  if (g.nx < 4 || (g.nx & (g.nx - 1)) != 0) bad("grid.nx must be a power of two >= 4");
  if (g.ny < 5) bad("grid.ny must be at least 5");
  if (!(g.ymax > 0.0)) bad("grid.ymax must be positive");
  if (!(g.stretch >= 0.0)) bad("grid.stretch must be nonnegative");
  if (!(s.solver.dt > 0.0)) bad("solver.dt must be positive");
  if (!(s.solver.eps >= 0.0)) bad("solver.eps must be nonnegative");
  if (!(s.solver.t_end >= 0.0)) bad("solver.t_end must be nonnegative");
  if (!(s.solver.cfl_guard > 0.0 && s.solver.cfl_guard <= 1.0)) bad("solver.cfl_guard must lie in (0, 1]");
  if (s.output.sample_every == 0) bad("solver.sample_every must be positive");
  for (double t : s.output.snapshot_times) {
    if (t < 0.0 || t > s.solver.t_end) bad("solver.snapshot_times must lie in [0, t_end]");
  }
  if (!(s.solver.gevrey.gamma > 0.0)) bad("gevrey.gamma must be positive");
  if (!(s.solver.gevrey.tau0 > 0.0)) bad("gevrey.tau0 must be positive");
  if (s.solver.gevrey.jmax < 0) bad("gevrey.jmax must be nonnegative");
  if (static_cast<std::size_t>(s.solver.gevrey.jmax) > g.nx / 4) {
    bad("gevrey.jmax must not exceed nx/4 (spectral derivative range)");
  }
  if (s.solver.weights.m < 0.0 || s.solver.weights.alpha < 0.0) {
    bad("weights.m and weights.alpha must be nonnegative");
  }
  if (s.s < 0 || s.s % 2 != 0 || s.s > 6) bad("weights.s must be one of 0, 2, 4, 6");
  if (s.euler.kind == EulerKind::Sampled && s.euler.path.empty()) {
    bad("euler.kind = sampled requires euler.path");
  }
  if (s.initial.kind == InitialKind::Dump && s.initial.path.empty()) {
    bad("initial.kind = dump requires initial.path");
  }
  if (s.initial.kind == InitialKind::Synth && !(s.initial.delta > 0.0)) {
    bad("initial.delta must be positive");
  }
  const auto& l = s.linstab;
  if (l.ny < 6) bad("linstab.ny must be at least 6");
  if (!(l.kmin >= 1.0) || !(l.kmax >= l.kmin)) bad("linstab needs 1 <= kmin <= kmax");
  if (l.count == 0) bad("linstab.count must be positive");
  if (s.fit.kmax != 0 && s.fit.kmax <= s.fit.kmin) bad("fit.kmax must exceed fit.kmin");
  if (s.verify_weights.jmax < 0 || s.verify_weights.alphas.empty()) {
    bad("verify_weights needs jmax >= 0 and at least one alpha");
  }
  if (s.estimates.identity_jmax < -1 || s.estimates.residual_jmax < -1 || s.estimates.aux_jmax < -1) {
    bad("estimates index ranges must be >= -1 (-1 skips the check)");
  }
  if (s.kind == ScenarioKind::VerifyEstimates && s.estimates.identity_jmax >= 0 &&
      static_cast<std::size_t>(s.estimates.identity_jmax) + 1 > s.grid.nx / 4) {
    bad("estimates.identity_jmax + 1 must not exceed nx/4");
  }
  if (!(s.estimates.bstar > 0.0)) bad("estimates.bstar must be positive");
}

}  // namespace

std::map<std::string, IniValue> parse_ini(std::string_view text, const std::string& source) {
  std::map<std::string, IniValue> out;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

    const std::size_t cstart = comment_start(raw);
    std::string_view line = raw.substr(0, cstart);
    const std::size_t lead = line.find_first_not_of(" \t\r");
    if (lead == std::string_view::npos) continue;
    const int col0 = static_cast<int>(lead) + 1;
    line = trim(line);

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source, line_no, col0, "unterminated section header");
      const std::string_view name = trim(line.substr(1, line.size() - 2));
      if (name.empty() || !std::all_of(name.begin(), name.end(), is_name_char)) {
        throw ConfigError(source, line_no, col0 + 1, "invalid section name");
      }
      section = std::string(name);
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source, line_no, col0, "expected 'key = value' or '[section]'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty() || !std::all_of(key.begin(), key.end(), is_name_char)) {
      throw ConfigError(source, line_no, col0, "invalid key name");
    }
    if (section.empty()) {
      throw ConfigError(source, line_no, col0, "key '" + std::string(key) + "' outside any section");
    }
    const std::string_view after = line.substr(eq + 1);
    const std::size_t vlead = after.find_first_not_of(" \t\r");
    const int vcol = col0 + static_cast<int>(eq) + 1 +
                     static_cast<int>(vlead == std::string_view::npos ? 0 : vlead);
    const std::string full = section + "." + std::string(key);
    if (out.count(full)) {
      throw ConfigError(source, line_no, col0, "duplicate key '" + full + "'");
    }
    out.emplace(full, IniValue{std::string(trim(after)), line_no, vcol, col0});
  }
  return out;
}

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Simulate: return "simulate";
    case ScenarioKind::Linstab: return "linstab";
    case ScenarioKind::GevreyFit: return "gevrey-fit";
    case ScenarioKind::VerifyWeights: return "verify-weights";
    case ScenarioKind::VerifyEstimates: return "verify-estimates";
    case ScenarioKind::SynthData: return "synth-data";
  }
  return "simulate";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
  for (auto k : {ScenarioKind::Simulate, ScenarioKind::Linstab, ScenarioKind::GevreyFit,
                 ScenarioKind::VerifyWeights, ScenarioKind::VerifyEstimates, ScenarioKind::SynthData}) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown scenario kind '" + std::string(name) + "'");
}

Scenario parse_config_text(std::string_view text, const std::string& source,
                           const std::filesystem::path& base_dir) {
  const auto table = parse_ini(text, source);
  const Ctx ctx{source, base_dir};
  Scenario s;
  std::set<std::string> known;
  for (const auto& def : registry()) {
    const std::string full = std::string(def.section) + "." + def.key;
    known.insert(full);
    const auto it = table.find(full);
    if (it != table.end()) def.set(s, ctx, it->second);
  }
  for (const auto& [key, value] : table) {
    if (!known.count(key) && !manifest_keys().count(key)) {
      throw ConfigError(source, value.line, value.key_column,
                        "unknown key '" + key + "'");
    }
  }
  if (!table.count("scenario.kind")) {
    throw ConfigError(source, 0, 0, "missing required key 'scenario.kind'");
  }
  validate(s, source);
  s.warnings = constraint_warnings(s);
  return s;
}

Scenario parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, 0, "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto base = std::filesystem::absolute(path).parent_path();
  return parse_config_text(buf.str(), path.string(), base);
}

std::vector<std::string> constraint_warnings(const Scenario& s) {
  std::vector<std::string> w;
  const double g = s.solver.gevrey.gamma;
  const double a = s.solver.weights.alpha;
  const double m = s.solver.weights.m;
  const double r = s.solver.gevrey.r;
  const double R = s.R;
  auto note = [&w](const std::string& msg) { w.push_back(msg); };
  if (a < 0.5) note("weights.alpha = " + fmt(a) + " violates alpha >= 1/2");
  if (a > g - 1.0) note("weights.alpha = " + fmt(a) + " violates alpha <= gamma - 1");
  if (a > 0.0 && m < (2.0 * g - 1.0) / a + 1.0) {
    note("weights.m = " + fmt(m) + " violates m >= (2 gamma - 1)/alpha + 1");
  }
  if (m < 8.0) note("weights.m = " + fmt(m) + " violates m >= 8");
  if (m < s.s + 2.0) note("weights.m = " + fmt(m) + " violates m >= s + 2");
  if (!(r > 2.0 * g)) note("gevrey.r = " + fmt(r) + " violates r > 2 gamma");
  if (R < r + 3.0 * g - 2.0) note("gevrey.R = " + fmt(R) + " violates R >= r + 3 gamma - 2");
  if (!(R > 2.0 * g + 1.0)) note("gevrey.R = " + fmt(R) + " violates R > 2 gamma + 1");
  if (s.initial.kind == InitialKind::Synth && g == 2.0 &&
      !(s.solver.gevrey.tau0 < 0.25 * s.initial.delta * s.initial.delta)) {
    note("gevrey.tau0 = " + fmt(s.solver.gevrey.tau0) +
         " is not below delta^2/4; the Gevrey norm of the initial data diverges as jmax grows");
  }
  return w;
}

std::string render_manifest(const Scenario& s, const std::string& git_describe,
                            const std::string& wall_clock, std::size_t threads) {
  std::ostringstream out;
  std::string section;
  for (const auto& def : registry()) {
    if (section != def.section) {
      if (!section.empty()) out << '\n';
      section = def.section;
      out << '[' << section << "]\n";
    }
    out << def.key << " = " << def.get(s) << '\n';
  }
  out << "\n[manifest]\n";
  out << "format = 1\n";
  out << "git_describe = " << git_describe << '\n';
  out << "wall_clock = " << wall_clock << '\n';
  out << "threads = " << threads << '\n';
  return out.str();
}

}  // namespace prandtl
