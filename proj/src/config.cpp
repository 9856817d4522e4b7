#include "cwave/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace cwave {

namespace pt = boost::property_tree;

namespace {

std::string num(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string short_num(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string list(const std::vector<double>& v)
{
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
  return s;
}

std::string trim(std::string s)
{
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

// Reads keys from one section, recording parse errors and unknown keys.
class Reader {
 public:
  Reader(const pt::ptree& root, std::string section, std::vector<std::string>& errors)
      : section_(std::move(section)), errors_(errors)
  {
    if (auto child = root.get_child_optional(section_)) node_ = &*child;
  }

  void number(const char* key, double& out) { with(key, [&](const std::string& v) { out = to_double(key, v); }); }

  void integer(const char* key, int& out)
  {
    with(key, [&](const std::string& v) {
      const double x = to_double(key, v);
      if (x != std::floor(x) || std::abs(x) > 1e9)
        fail(key, "expected an integer, got '" + v + "'");
      else
        out = static_cast<int>(x);
    });
  }

  void boolean(const char* key, bool& out)
  {
    with(key, [&](const std::string& v) {
      if (v == "true" || v == "1" || v == "yes") out = true;
      else if (v == "false" || v == "0" || v == "no") out = false;
      else fail(key, "expected true or false, got '" + v + "'");
    });
  }

  void text(const char* key, std::string& out) { with(key, [&](const std::string& v) { out = v; }); }

  void numbers(const char* key, std::vector<double>& out)
  {
    with(key, [&](const std::string& v) {
      out.clear();
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(key, item));
      }
    });
  }

  template <class F>
  void with(const char* key, F&& f)
  {
    seen_.insert(key);
    if (!node_) return;
    if (auto v = node_->get_optional<std::string>(pt::ptree::path_type(key, '\0'))) f(trim(*v));
  }

  void finish()
  {
    if (!node_) return;
    for (const auto& [key, value] : *node_)
      if (!seen_.count(key)) errors_.push_back(section_ + "." + key + ": unknown key");
  }

 private:
  double to_double(const char* key, const std::string& v)
  {
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      fail(key, "cannot parse '" + v + "' as a number");
      return 0.0;
    }
  }

  void fail(const char* key, const std::string& what) { errors_.push_back(section_ + "." + key + ": " + what); }

  std::string section_;
  std::vector<std::string>& errors_;
  const pt::ptree* node_ = nullptr;
  std::set<std::string> seen_;
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::invalid_argument([&] {
        std::string s = "invalid configuration:";
        for (const auto& e : errors) s += "\n  " + e;
        return s;
      }()),
      errors_(std::move(errors))
{
}

Config parse_config_text(const std::string& text)
{
  pt::ptree root;
  try {
    std::istringstream in(text);
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({"line " + std::to_string(e.line()) + ": " + e.message()});
  }
  std::vector<std::string> errors;
  for (const auto& [name, child] : root) {
    if (name != "grid" && name != "problem" && name != "diagnostics" && name != "decomposition")
      errors.push_back(child.empty() ? name + ": keys must live in a section"
                                     : "[" + name + "]: unknown section");
  }

  Config c;
  std::string mode = "radial";
  int d = 3;
  double h = 0.02, extent = 64.0, dt = 0.01;
  {
    Reader r(root, "grid", errors);
    r.text("mode", mode);
    r.integer("d", d);
    r.number("h", h);
    r.number("extent", extent);
    r.number("dt", dt);
    r.finish();
  }
  std::string scheme = to_string(c.problem.scheme);
  std::vector<double> offset(c.problem.data.offset.begin(), c.problem.data.offset.end());
  {
    Reader r(root, "problem", errors);
    r.number("p", c.problem.p);
    r.boolean("linear", c.problem.linear);
    r.text("scheme", scheme);
    r.text("family", c.problem.data.family);
    r.number("amplitude", c.problem.data.amplitude);
    r.number("width", c.problem.data.width);
    r.numbers("offset", offset);
    r.number("R_support", c.problem.R_support);
    r.finish();
  }
  auto& g = c.diagnostics;
  {
    Reader r(root, "diagnostics", errors);
    r.number("t_end", g.t_end);
    r.integer("observe_every", g.observe_every);
    r.numbers("cone_offsets", g.cone_offsets);
    r.number("shell_R1", g.shell_R1);
    r.number("shell_R2", g.shell_R2);
    r.number("window_R1", g.window_R1);
    r.number("window_R2", g.window_R2);
    r.numbers("profile_times", g.profile_times);
    r.numbers("residual_times", g.residual_times);
    r.number("residual_R", g.residual_R);
    r.number("kappa", g.kappa);
    r.integer("sphere_n_theta", g.sphere_n_theta);
    r.integer("sphere_n_phi", g.sphere_n_phi);
    r.integer("snapshot_every", g.snapshot_every);
    r.finish();
  }
  auto& o = c.decomposition.options;
  {
    Reader r(root, "decomposition", errors);
    r.boolean("enabled", c.decomposition.enabled);
    r.number("R1", o.R1);
    r.number("R2", o.R2);
    r.numbers("T_values", o.T_values);
    r.number("t_end", o.t_end);
    r.integer("observe_every", o.observe_every);
    r.number("layer", o.layer);
    r.finish();
  }

  try {
    c.problem.scheme = parse_scheme(scheme);
  } catch (const std::exception& e) {
    errors.push_back(std::string("problem.scheme: ") + e.what());
  }
  if (offset.size() == 3)
    c.problem.data.offset = {offset[0], offset[1], offset[2]};
  else
    errors.push_back("problem.offset: expected three components");
  c.problem.d = d;

  bool grid_ok = false;
  try {
    c.grid = make_grid(parse_grid_mode(mode), d, h, extent, dt);
    grid_ok = true;
  } catch (const CflError& e) {
    errors.push_back("grid.dt = " + short_num(dt) + " exceeds cfl_limit * h = " + short_num(e.limit()) +
                     " * " + short_num(h) + " = " + short_num(e.limit() * h));
  } catch (const std::exception& e) {
    errors.push_back(std::string("grid: ") + e.what());
  }
  if (grid_ok) {
    auto more = config_violations(c);
    errors.insert(errors.end(), more.begin(), more.end());
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

Config parse_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

double diagnostic_margin(const Config& c)
{
  const auto& g = c.diagnostics;
  double m = std::max(g.shell_R2, 0.0);
  for (double R : g.cone_offsets) m = std::max(m, R);
  if (!g.profile_times.empty()) m = std::max(m, g.window_R2);
  return m + 2.0 * c.grid.h;
}

std::vector<std::string> config_violations(const Config& c)
{
  std::vector<std::string> e;
  try {
    validate_problem(c.problem, c.grid);
  } catch (const std::exception& x) {
    e.push_back("problem: " + std::string(x.what()));
  }
  const auto& g = c.diagnostics;
  if (!(g.t_end > 0.0)) e.push_back("diagnostics.t_end must be positive");
  if (g.observe_every < 1) e.push_back("diagnostics.observe_every must be >= 1");
  if (g.snapshot_every < 0) e.push_back("diagnostics.snapshot_every must be >= 0");
  if (!(g.shell_R1 < g.shell_R2)) e.push_back("diagnostics.shell_R1 must be below shell_R2");
  if (!(g.window_R1 < g.window_R2)) e.push_back("diagnostics.window_R1 must be below window_R2");
  if (g.sphere_n_theta < 2 || g.sphere_n_phi < 3) e.push_back("diagnostics.sphere_n_theta/n_phi too small");
  const double budget = causality_budget(c.grid, c.problem, diagnostic_margin(c));
  if (g.t_end > budget)
    e.push_back("diagnostics.t_end = " + short_num(g.t_end) + " exceeds the causality budget " +
                short_num(budget) + " = (extent - R_support - margin)/2");
  auto check_times = [&](const std::vector<double>& ts, const char* key) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (!(ts[i] > 0.0 && ts[i] <= g.t_end))
        e.push_back(std::string("diagnostics.") + key + ": time " + short_num(ts[i]) + " outside (0, t_end]");
      if (i && !(ts[i] > ts[i - 1])) e.push_back(std::string("diagnostics.") + key + " must increase");
    }
  };
  check_times(g.profile_times, "profile_times");
  check_times(g.residual_times, "residual_times");
  if (!g.residual_times.empty()) {
    if (g.profile_times.size() < 3)
      e.push_back("diagnostics.residual_times needs at least three profile_times to extract G");
    const bool free_wave = c.grid.radial() && c.grid.d == 3;
    if (!free_wave && !(g.residual_R >= g.window_R1 && g.residual_R < g.window_R2))
      e.push_back("diagnostics.residual_R must lie in [window_R1, window_R2) for profile residuals");
  }

  if (c.decomposition.enabled) {
    const auto& o = c.decomposition.options;
    if (!(o.R1 < o.R2)) e.push_back("decomposition.R1 must be below R2");
    if (o.T_values.empty()) e.push_back("decomposition.T_values is empty");
    if (o.observe_every < 1) e.push_back("decomposition.observe_every must be >= 1");
    for (double T : o.T_values) {
      if (!(T >= std::max(1.0, o.R2)))
        e.push_back("decomposition.T_values: T = " + short_num(T) + " must be >= max(1, R2) = " +
                    short_num(std::max(1.0, o.R2)));
      if (!(T < o.t_end))
        e.push_back("decomposition.T_values: T = " + short_num(T) + " must be below t_end = " + short_num(o.t_end));
      const double k = T / c.grid.dt;
      if (std::abs(k - std::round(k)) > 1e-6)
        e.push_back("decomposition.T_values: T = " + short_num(T) + " is not a multiple of dt");
    }
    const double b = causality_budget(c.grid, c.problem, std::max(o.R2, 0.0) + 2.0 * c.grid.h);
    if (o.t_end > b)
      e.push_back("decomposition.t_end = " + short_num(o.t_end) + " exceeds the causality budget " + short_num(b));
    if (!c.problem.linear) {
      const double d = c.problem.d;
      if (!(c.problem.p > 1 + 6 / d && c.problem.p < 1 + 4 / (d - 2)))
        e.push_back("decomposition needs p in (1+6/d, p_e) for its Strichartz pair");
    }
  }
  return e;
}

std::string config_echo(const Config& c)
{
  std::ostringstream s;
  const auto& g = c.grid;
  s << "[grid]\nmode = " << to_string(g.mode) << "\nd = " << g.d << "\nh = " << num(g.h)
    << "\nextent = " << num(g.extent) << "\ndt = " << num(g.dt) << "\n\n";
  const auto& p = c.problem;
  s << "[problem]\np = " << num(p.p) << "\nlinear = " << (p.linear ? "true" : "false")
    << "\nscheme = " << to_string(p.scheme) << "\nfamily = " << p.data.family
    << "\namplitude = " << num(p.data.amplitude) << "\nwidth = " << num(p.data.width)
    << "\noffset = " << list({p.data.offset[0], p.data.offset[1], p.data.offset[2]})
    << "\nR_support = " << num(p.R_support) << "\n\n";
  const auto& d = c.diagnostics;
  s << "[diagnostics]\nt_end = " << num(d.t_end) << "\nobserve_every = " << d.observe_every
    << "\ncone_offsets = " << list(d.cone_offsets) << "\nshell_R1 = " << num(d.shell_R1)
    << "\nshell_R2 = " << num(d.shell_R2) << "\nwindow_R1 = " << num(d.window_R1)
    << "\nwindow_R2 = " << num(d.window_R2) << "\nprofile_times = " << list(d.profile_times)
    << "\nresidual_times = " << list(d.residual_times) << "\nresidual_R = " << num(d.residual_R)
    << "\nkappa = " << num(d.kappa) << "\nsphere_n_theta = " << d.sphere_n_theta
    << "\nsphere_n_phi = " << d.sphere_n_phi << "\nsnapshot_every = " << d.snapshot_every << "\n\n";
  const auto& o = c.decomposition.options;
  s << "[decomposition]\nenabled = " << (c.decomposition.enabled ? "true" : "false")
    << "\nR1 = " << num(o.R1) << "\nR2 = " << num(o.R2) << "\nT_values = " << list(o.T_values)
    << "\nt_end = " << num(o.t_end) << "\nobserve_every = " << o.observe_every
    << "\nlayer = " << num(o.layer) << "\n";
  return s.str();
}

SphereGrid config_sphere(const Config& c)
{
  if (c.grid.radial()) return SphereGrid::collapsed(c.grid.d);
  return SphereGrid::gauss_product(c.diagnostics.sphere_n_theta, c.diagnostics.sphere_n_phi);
}

}  // namespace cwave
