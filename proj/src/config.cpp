#include "pulsejet/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>

#include "pulsejet/errors.hpp"

namespace pulsejet {

namespace {

// Lab units as decimal exponents of SI. Conversion shifts the decimal point of
// the text rather than multiplying, so values round-trip exactly.
constexpr int kCm = -2;
constexpr int kCm2 = -4;
constexpr int kMl = -6;
constexpr int kSi = 0;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  std::size_t line;
};

/// section -> key -> entry; entries are erased as they are consumed.
using RawConfig = std::map<std::string, std::map<std::string, Entry>>;

const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"geometry",
       {"body_length_cm", "V_tot_mL", "A_expanded_cm2", "A_contracted_cm2", "s_max",
        "A_nozzle_cm2", "A_valve_cm2"}},
      {"hydro", {"rho", "cd", "cda_s", "cda_cm2", "cda_scale", "c_added", "c_suction"}},
      {"body", {"m_struct_kg"}},
      {"schedule",
       {"t_expulsion", "t_glide", "t_refill", "evr_pct", "valves", "profile", "evr_timing"}},
      {"energy", {"E_expulsion", "E_refill", "P_hold", "t_refill_ref", "m_ref_kg", "g"}},
      {"integrator", {"dt", "cycles", "course_m", "jobs"}},
      {"targets",
       {"peak_speeds", "transit", "refill", "peak_weight", "transit_weight", "refill_weight",
        "budget", "grid_points", "max_cycles"}},
      {"fall", {"F_net_N", "s", "duration_s"}},
      {"sweep", {"var", "grid"}},
      {"analysis", {"window", "distance_m"}},
  };
  return keys;
}

class Reader {
 public:
  explicit Reader(RawConfig raw) : raw_(std::move(raw)) {}

  std::optional<Entry> take(const std::string& section, const std::string& key) {
    auto s = raw_.find(section);
    if (s == raw_.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    Entry e = k->second;
    s->second.erase(k);
    return e;
  }

  void number(const std::string& section, const std::string& key, double& out, int unit = kSi) {
    if (auto e = take(section, key)) out = to_double(e->value, section, key, e->line, unit);
  }
  void optional_number(const std::string& section, const std::string& key,
                       std::optional<double>& out) {
    if (auto e = take(section, key)) {
      out = e->value.empty() ? std::nullopt
                             : std::optional<double>(to_double(e->value, section, key, e->line));
    }
  }
  void integer(const std::string& section, const std::string& key, int& out) {
    if (auto e = take(section, key)) {
      const std::string& v = e->value;
      int value = 0;
      const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
      if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError(fmt::format("line {}: [{}] {} = '{}' is not an integer", e->line, section, key, v));
      }
      out = value;
    }
  }
  void list(const std::string& section, const std::string& key, std::vector<double>& out,
            int unit = kSi) {
    if (auto e = take(section, key)) out = to_list(e->value, section, key, e->line, unit);
  }

  static double to_double(const std::string& v, const std::string& section, const std::string& key,
                          std::size_t line, int unit = kSi) {
    auto fail = [&] {
      return ConfigError(fmt::format("line {}: [{}] {} = '{}' is not a number", line, section, key, v));
    };
    std::string text = v;
    if (unit != kSi) {
      const auto e = v.find_first_of("eE");
      int exponent = 0;
      if (e != std::string::npos) {
        const auto [p, ec] = std::from_chars(v.data() + e + 1, v.data() + v.size(), exponent);
        if (ec != std::errc{} || p != v.data() + v.size()) throw fail();
      }
      text = fmt::format("{}e{}", v.substr(0, e), exponent + unit);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (v.empty() || ec != std::errc{} || ptr != text.data() + text.size()) throw fail();
    return value;
  }

  static std::vector<std::string> fields(const std::string& v, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= v.size()) {
      const auto pos = v.find(sep, start);
      const std::string f = trim(v.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
      if (!f.empty()) out.push_back(f);
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return out;
  }

  static std::vector<double> to_list(const std::string& v, const std::string& section,
                                     const std::string& key, std::size_t line, int unit = kSi) {
    std::vector<double> out;
    for (const auto& f : fields(v, ',')) out.push_back(to_double(f, section, key, line, unit));
    return out;
  }

  /// Comma-separated tuples of colon-separated numbers.
  std::optional<std::vector<std::vector<double>>> tuples(const std::string& section,
                                                         const std::string& key) {
    auto e = take(section, key);
    if (!e) return std::nullopt;
    std::vector<std::vector<double>> out;
    for (const auto& item : fields(e->value, ',')) {
      out.push_back({});
      for (const auto& f : fields(item, ':')) out.back().push_back(to_double(f, section, key, e->line));
    }
    return out;
  }

  void reject_leftovers() const {
    for (const auto& [section, keys] : raw_) {
      if (!keys.empty()) {
        const auto& [key, entry] = *keys.begin();
        throw ConfigError(fmt::format("line {}: unknown key '{}' in [{}]", entry.line, key, section));
      }
    }
  }

 private:
  RawConfig raw_;
};

bool parse_bool(const Entry& e, const std::string& key) {
  if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
  if (e.value == "false" || e.value == "no" || e.value == "0") return false;
  throw ConfigError(fmt::format("line {}: {} = '{}' is not a boolean", e.line, key, e.value));
}

}  // namespace

RigidBodyParams RunConfig::unscaled_params() const {
  RigidBodyParams p;
  p.m_struct = m_struct;
  p.geometry = geometry;
  p.geometry.validate();
  if (cda_s.empty()) {
    p.hydro = HydroParams::defaults(geometry, cd);
  } else {
    p.hydro.cda_table = PiecewiseLinear(cda_s, cda_values);
  }
  p.hydro.rho = rho;
  p.hydro.c_added = c_added;
  p.hydro.c_suction = c_suction;
  p.validate();
  return p;
}

RigidBodyParams RunConfig::params() const {
  RigidBodyParams p = unscaled_params();
  p.hydro = p.hydro.with_cda_scale(cda_scale);
  p.validate();
  return p;
}

Scenario RunConfig::scenario() const {
  Scenario s;
  s.schedule = schedule;
  s.params = params();
  s.energy = energy;
  s.n_cycles = cycles;
  s.dt = dt;
  s.profile = profile;
  s.evr_timing = evr_timing;
  s.course = course;
  return s;
}

CalibrationBase RunConfig::calibration_base() const {
  CalibrationBase base;
  base.params = unscaled_params();
  base.schedule = schedule;
  base.schedule.t_glide = 0.0;
  base.evr_timing = evr_timing;
  base.profile = profile;
  base.dt = dt;
  base.max_cycles = max_cycles;
  return base;
}

void RunConfig::set_valves(bool valves) {
  schedule.valves = valves;
  if (!t_refill_explicit) {
    schedule.t_refill = valves ? CycleSchedule::kRefillWithValves : CycleSchedule::kRefillValveFree;
  }
}

void RunConfig::apply_fit(const ParameterVector& x) {
  geometry.V_tot = x(0);
  geometry.A_nozzle = x(1);
  c_suction = x(2);
  cda_scale = x(3);
}

void RunConfig::validate() const {
  const RigidBodyParams p = params();
  schedule.validate(p.geometry.s_max);
  energy.validate();
  targets.validate();
  if (!(dt > 0.0)) throw ConfigError("integrator: dt must be > 0");
  if (cycles < 1) throw ConfigError("integrator: cycles must be >= 1");
  if (course && !(*course > 0.0)) throw ConfigError("integrator: course_m must be > 0");
  if (jobs < 1) throw ConfigError("integrator: jobs must be >= 1");
  if (!(cda_scale > 0.0)) throw ConfigError("hydro: cda_scale must be > 0");
  if (budget < 100) throw ConfigError("targets: budget must be >= 100");
  if (grid_points < 2) throw ConfigError("targets: grid_points must be >= 2");
  if (max_cycles < 1) throw ConfigError("targets: max_cycles must be >= 1");
  if (!(fall_force >= 0.0)) throw ConfigError("fall: F_net_N must be >= 0");
  if (!(fall_duration > 0.0)) throw ConfigError("fall: duration_s must be > 0");
  if (window < 1 || window % 2 == 0) throw ConfigError("analysis: window must be odd and >= 1");
  if (distance && !(*distance > 0.0)) throw ConfigError("analysis: distance_m must be > 0");
}

RunConfig parse_config(std::istream& is) {
  RawConfig raw;
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string text = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError(fmt::format("line {}: malformed section header", line_no));
      section = trim(text.substr(1, text.size() - 2));
      if (!known_keys().count(section)) {
        throw ConfigError(fmt::format("line {}: unknown section [{}]", line_no, section));
      }
      raw[section];
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected key = value", line_no));
    if (section.empty()) throw ConfigError(fmt::format("line {}: key outside any section", line_no));
    const std::string key = trim(text.substr(0, eq));
    const auto& allowed = known_keys().at(section);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(fmt::format("line {}: unknown key '{}' in [{}]", line_no, key, section));
    }
    raw[section][key] = Entry{trim(text.substr(eq + 1)), line_no};
  }

  RunConfig c;
  Reader r(std::move(raw));
  r.number("geometry", "body_length_cm", c.geometry.body_length, kCm);
  r.number("geometry", "V_tot_mL", c.geometry.V_tot, kMl);
  r.number("geometry", "A_expanded_cm2", c.geometry.A_expanded, kCm2);
  r.number("geometry", "A_contracted_cm2", c.geometry.A_contracted, kCm2);
  r.number("geometry", "s_max", c.geometry.s_max);
  r.number("geometry", "A_nozzle_cm2", c.geometry.A_nozzle, kCm2);
  r.number("geometry", "A_valve_cm2", c.geometry.A_valve, kCm2);

  r.number("hydro", "rho", c.rho);
  r.number("hydro", "cd", c.cd);
  r.list("hydro", "cda_s", c.cda_s);
  r.list("hydro", "cda_cm2", c.cda_values, kCm2);
  if (c.cda_s.size() != c.cda_values.size()) {
    throw ConfigError("[hydro] cda_s and cda_cm2 must list the same number of knots");
  }
  r.number("hydro", "cda_scale", c.cda_scale);
  r.number("hydro", "c_added", c.c_added);
  r.number("hydro", "c_suction", c.c_suction);

  r.number("body", "m_struct_kg", c.m_struct);

  r.number("schedule", "t_expulsion", c.schedule.t_expulsion);
  r.number("schedule", "t_glide", c.schedule.t_glide);
  if (auto e = r.take("schedule", "valves")) c.set_valves(parse_bool(*e, "valves"));
  if (auto e = r.take("schedule", "t_refill"); e && e->value != "auto") {
    c.schedule.t_refill = Reader::to_double(e->value, "schedule", "t_refill", e->line);
    c.t_refill_explicit = true;
  }
  double evr_pct = 100.0 * c.schedule.evr_target;
  r.number("schedule", "evr_pct", evr_pct);
  c.schedule.evr_target = evr_pct / 100.0;
  if (auto e = r.take("schedule", "profile")) {
    if (e->value == "constant") c.profile = ActuationProfile::ConstantRate;
    else if (e->value == "smoothstep") c.profile = ActuationProfile::Smoothstep;
    else throw ConfigError(fmt::format("line {}: profile must be constant or smoothstep", e->line));
  }
  if (auto e = r.take("schedule", "evr_timing")) {
    if (e->value == "constant_rate") c.evr_timing = EvrTiming::ConstantRate;
    else if (e->value == "constant_duration") c.evr_timing = EvrTiming::ConstantDuration;
    else throw ConfigError(fmt::format("line {}: evr_timing must be constant_rate or constant_duration", e->line));
  }

  r.number("energy", "E_expulsion", c.energy.E_expulsion);
  r.number("energy", "E_refill", c.energy.E_refill);
  r.number("energy", "P_hold", c.energy.P_hold);
  r.number("energy", "t_refill_ref", c.energy.t_refill_ref);
  r.optional_number("energy", "m_ref_kg", c.energy.m_ref);
  r.number("energy", "g", c.energy.g);

  r.number("integrator", "dt", c.dt);
  r.integer("integrator", "cycles", c.cycles);
  r.optional_number("integrator", "course_m", c.course);
  r.integer("integrator", "jobs", c.jobs);

  if (auto t = r.tuples("targets", "peak_speeds")) {
    c.targets.peak_speeds.clear();
    for (const auto& v : *t) {
      if (v.size() != 2) throw ConfigError("[targets] peak_speeds entries are evr_pct:speed");
      c.targets.peak_speeds.push_back({v[0], v[1]});
    }
  }
  if (auto t = r.tuples("targets", "transit")) {
    c.targets.transit.clear();
    for (const auto& v : *t) {
      if (v.size() != 3) throw ConfigError("[targets] transit entries are evr_pct:distance:time");
      c.targets.transit.push_back({v[0], v[1], v[2]});
    }
  }
  if (auto t = r.tuples("targets", "refill")) {
    c.targets.refill.clear();
    for (const auto& v : *t) {
      if (v.size() == 2) c.targets.refill.push_back({v[0], std::nullopt, v[1]});
      else if (v.size() == 3) c.targets.refill.push_back({v[0], v[1], v[2]});
      else throw ConfigError("[targets] refill entries are gpf_pct:end or gpf_pct:onset:end");
    }
  }
  r.number("targets", "peak_weight", c.targets.peak_weight);
  r.number("targets", "transit_weight", c.targets.transit_weight);
  r.number("targets", "refill_weight", c.targets.refill_weight);
  r.integer("targets", "budget", c.budget);
  r.integer("targets", "grid_points", c.grid_points);
  r.integer("targets", "max_cycles", c.max_cycles);

  r.number("fall", "F_net_N", c.fall_force);
  r.list("fall", "s", c.fall_s);
  r.number("fall", "duration_s", c.fall_duration);

  if (auto e = r.take("sweep", "var")) c.sweep_variable = parse_sweep_variable(e->value);
  r.list("sweep", "grid", c.sweep_grid);

  r.integer("analysis", "window", c.window);
  r.optional_number("analysis", "distance_m", c.distance);

  r.reject_leftovers();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config '{}'", path.string()));
  return parse_config(in);
}

namespace {

/// Shortest round-trip text of an SI value with the decimal point moved into lab units.
std::string lab(double si, int unit) {
  std::string text;
  const std::string shortest = fmt::format("{}", si);
  std::string mantissa = shortest;
  int exponent = 0;
  if (const auto e = shortest.find_first_of("eE"); e != std::string::npos) {
    mantissa = shortest.substr(0, e);
    exponent = std::stoi(shortest.substr(e + 1));
  }
  const bool negative = !mantissa.empty() && mantissa[0] == '-';
  if (negative) mantissa.erase(0, 1);
  std::string digits;
  int point = static_cast<int>(mantissa.size());
  for (std::size_t i = 0; i < mantissa.size(); ++i) {
    if (mantissa[i] == '.') point = static_cast<int>(i);
    else digits.push_back(mantissa[i]);
  }
  // value = 0.digits * 10^(point + exponent - unit)
  int pos = point + exponent - unit;
  const auto first = digits.find_first_not_of('0');
  if (first == std::string::npos) return "0";
  digits.erase(0, first);
  pos -= static_cast<int>(first);
  while (digits.size() > 1 && digits.back() == '0' && static_cast<int>(digits.size()) > pos) digits.pop_back();
  if (pos <= 0) text = "0." + std::string(-pos, '0') + digits;
  else if (pos >= static_cast<int>(digits.size())) text = digits + std::string(pos - digits.size(), '0');
  else text = digits.substr(0, pos) + "." + digits.substr(pos);
  return negative ? "-" + text : text;
}

std::string join(const std::vector<double>& v, int unit = kSi) {
  std::vector<std::string> items;
  for (double x : v) items.push_back(lab(x, unit));
  return fmt::format("{}", fmt::join(items, ", "));
}

}  // namespace

void write_config(std::ostream& os, const RunConfig& c) {
  const auto& g = c.geometry;
  fmt::print(os, "[geometry]\n");
  fmt::print(os, "body_length_cm = {}\n", lab(g.body_length, kCm));
  fmt::print(os, "V_tot_mL = {}\n", lab(g.V_tot, kMl));
  fmt::print(os, "A_expanded_cm2 = {}\n", lab(g.A_expanded, kCm2));
  fmt::print(os, "A_contracted_cm2 = {}\n", lab(g.A_contracted, kCm2));
  fmt::print(os, "s_max = {}\n", g.s_max);
  fmt::print(os, "A_nozzle_cm2 = {}\n", lab(g.A_nozzle, kCm2));
  fmt::print(os, "A_valve_cm2 = {}\n", lab(g.A_valve, kCm2));

  fmt::print(os, "\n[hydro]\nrho = {}\ncd = {}\n", c.rho, c.cd);
  if (!c.cda_s.empty()) {
    fmt::print(os, "cda_s = {}\ncda_cm2 = {}\n", join(c.cda_s), join(c.cda_values, kCm2));
  }
  fmt::print(os, "cda_scale = {}\nc_added = {}\nc_suction = {}\n", c.cda_scale, c.c_added, c.c_suction);

  fmt::print(os, "\n[body]\nm_struct_kg = {}\n", c.m_struct);

  const auto& s = c.schedule;
  fmt::print(os, "\n[schedule]\nt_expulsion = {}\nt_glide = {}\n", s.t_expulsion, s.t_glide);
  if (c.t_refill_explicit) fmt::print(os, "t_refill = {}\n", s.t_refill);
  else fmt::print(os, "t_refill = auto\n");
  fmt::print(os, "evr_pct = {}\nvalves = {}\n", 100.0 * s.evr_target, s.valves);
  fmt::print(os, "profile = {}\n", c.profile == ActuationProfile::Smoothstep ? "smoothstep" : "constant");
  fmt::print(os, "evr_timing = {}\n",
             c.evr_timing == EvrTiming::ConstantRate ? "constant_rate" : "constant_duration");

  const auto& e = c.energy;
  fmt::print(os, "\n[energy]\nE_expulsion = {}\nE_refill = {}\nP_hold = {}\nt_refill_ref = {}\n",
             e.E_expulsion, e.E_refill, e.P_hold, e.t_refill_ref);
  if (e.m_ref) fmt::print(os, "m_ref_kg = {}\n", *e.m_ref);
  fmt::print(os, "g = {}\n", e.g);

  fmt::print(os, "\n[integrator]\ndt = {}\ncycles = {}\n", c.dt, c.cycles);
  if (c.course) fmt::print(os, "course_m = {}\n", *c.course);
  fmt::print(os, "jobs = {}\n", c.jobs);

  const auto& t = c.targets;
  std::vector<std::string> peaks, transit, refill;
  for (const auto& p : t.peak_speeds) peaks.push_back(fmt::format("{}:{}", p.evr_pct, p.speed));
  for (const auto& p : t.transit) transit.push_back(fmt::format("{}:{}:{}", p.evr_pct, p.distance, p.time));
  for (const auto& p : t.refill) {
    refill.push_back(p.onset ? fmt::format("{}:{}:{}", p.gpf_pct, *p.onset, p.end)
                             : fmt::format("{}:{}", p.gpf_pct, p.end));
  }
  fmt::print(os, "\n[targets]\npeak_speeds = {}\ntransit = {}\nrefill = {}\n", fmt::join(peaks, ", "),
             fmt::join(transit, ", "), fmt::join(refill, ", "));
  fmt::print(os, "peak_weight = {}\ntransit_weight = {}\nrefill_weight = {}\n", t.peak_weight,
             t.transit_weight, t.refill_weight);
  fmt::print(os, "budget = {}\ngrid_points = {}\nmax_cycles = {}\n", c.budget, c.grid_points, c.max_cycles);

  fmt::print(os, "\n[fall]\nF_net_N = {}\ns = {}\nduration_s = {}\n", c.fall_force, join(c.fall_s),
             c.fall_duration);
  fmt::print(os, "\n[sweep]\nvar = {}\ngrid = {}\n", variable_name(c.sweep_variable), join(c.sweep_grid));
  fmt::print(os, "\n[analysis]\nwindow = {}\n", c.window);
  if (c.distance) fmt::print(os, "distance_m = {}\n", *c.distance);
}

}  // namespace pulsejet
