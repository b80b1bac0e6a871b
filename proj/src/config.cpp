#include "nsfp/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

namespace nsfp {

namespace {

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line;
};

[[noreturn]] void bad(const std::string& key, const Entry& e, const std::string& what)
{
  std::ostringstream os;
  os << "line " << e.line << ": " << key << ": " << what << " (got '" << e.value << "')";
  throw Error(os.str());
}

double to_double(const std::string& key, const Entry& e, const std::string& text)
{
  const std::string t = trim(text);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    bad(key, e, "expected a number");
  return v;
}

int to_int(const std::string& key, const Entry& e)
{
  const std::string t = trim(e.value);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    bad(key, e, "expected an integer");
  return v;
}

bool to_bool(const std::string& key, const Entry& e)
{
  if (e.value == "true")
    return true;
  if (e.value == "false")
    return false;
  bad(key, e, "expected true or false");
}

std::string to_string(const Entry& e)
{
  std::string v = e.value;
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
    v = v.substr(1, v.size() - 2);
  return v;
}

std::vector<std::string> to_list(const std::string& key, const Entry& e)
{
  const std::string& v = e.value;
  if (v.size() < 2 || v.front() != '[' || v.back() != ']')
    bad(key, e, "expected a bracketed list");
  std::vector<std::string> items;
  const std::string inner = trim(v.substr(1, v.size() - 2));
  if (inner.empty())
    return items;
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ','))
    items.push_back(trim(item));
  for (const auto& it : items)
    if (it.empty())
      bad(key, e, "empty list element");
  return items;
}

std::vector<double> to_doubles(const std::string& key, const Entry& e)
{
  std::vector<double> out;
  for (const auto& s : to_list(key, e))
    out.push_back(to_double(key, e, s));
  return out;
}

} // namespace

RunConfig parse_config_string(const std::string& text)
{
  std::map<std::string, Entry> entries;
  const std::set<std::string> sections{"model", "grid", "time", "continuation", "output"};
  std::string section;
  std::stringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (lineno == 1 && raw.rfind("\xEF\xBB\xBF", 0) == 0)
      raw = raw.substr(3);
    std::string line = raw;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"')
        quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty())
      continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.count(section))
        throw Error("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty())
      throw Error("line " + std::to_string(lineno) + ": key outside of a section");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (entries.count(key))
      throw Error("duplicate key '" + key + "' (lines " + std::to_string(entries[key].line) + " and " +
                  std::to_string(lineno) + ")");
    entries[key] = {value, lineno};
  }

  RunConfig cfg;
  Params& p = cfg.params;
  std::set<std::string> used;
  std::vector<double> rouse;
  bool have_rouse = false;

  using Setter = std::function<void(const std::string&, const Entry&)>;
  const std::map<std::string, Setter> setters{
      {"model.gamma", [&](auto& k, auto& e) { p.gamma = to_double(k, e, e.value); }},
      {"model.c_p", [&](auto& k, auto& e) { p.c_p = to_double(k, e, e.value); }},
      {"model.mu_s", [&](auto& k, auto& e) { p.mu_s = to_double(k, e, e.value); }},
      {"model.mu_b", [&](auto& k, auto& e) { p.mu_b = to_double(k, e, e.value); }},
      {"model.beta_comp", [&](auto& k, auto& e) { p.beta_comp = to_double(k, e, e.value); }},
      {"model.delta", [&](auto& k, auto& e) { p.delta = to_double(k, e, e.value); }},
      {"model.xi_bar", [&](auto& k, auto& e) { p.xi_bar = to_double(k, e, e.value); }},
      {"model.rho_bar", [&](auto& k, auto& e) { p.rho_bar = to_double(k, e, e.value); }},
      {"model.springs", [&](auto& k, auto& e) { p.K = to_int(k, e); }},
      {"model.b", [&](auto& k, auto& e) { p.b = to_doubles(k, e); }},
      {"model.rouse", [&](auto& k, auto& e) { rouse = to_doubles(k, e); have_rouse = true; }},
      {"model.dim", [&](auto& k, auto& e) { p.dim_x = p.dim_q = to_int(k, e); }},
      {"model.polymer", [&](auto& k, auto& e) { cfg.polymer = to_bool(k, e); }},
      {"model.init_recipe", [&](auto&, auto& e) { cfg.init_recipe = to_string(e); }},
      {"model.init_amplitude", [&](auto& k, auto& e) { cfg.init_amplitude = to_double(k, e, e.value); }},
      {"grid.nx", [&](auto& k, auto& e) { cfg.nx = to_int(k, e); }},
      {"grid.q_radial", [&](auto& k, auto& e) { cfg.q_radial = to_int(k, e); }},
      {"grid.q_angular", [&](auto& k, auto& e) { cfg.q_angular = to_int(k, e); }},
      {"time.final_time", [&](auto& k, auto& e) { cfg.final_time = to_double(k, e, e.value); }},
      {"time.dt_safety", [&](auto& k, auto& e) { cfg.dt_safety = to_double(k, e, e.value); }},
      {"time.samples", [&](auto& k, auto& e) { cfg.samples = to_int(k, e); }},
      {"continuation.epsilon_list", [&](auto& k, auto& e) { cfg.epsilon_list = to_doubles(k, e); }},
      {"continuation.tracked_modes", [&](auto& k, auto& e) { cfg.tracked_modes = to_int(k, e); }},
      {"continuation.reference", [&](auto& k, auto& e) { cfg.reference = to_bool(k, e); }},
      {"output.directory", [&](auto&, auto& e) { cfg.output_dir = to_string(e); }},
      {"output.field_stride", [&](auto& k, auto& e) { cfg.field_stride = to_int(k, e); }},
      {"output.fields", [&](auto& k, auto& e) { cfg.fields = to_list(k, e); }},
  };

  std::vector<std::string> unknown;
  for (const auto& [key, e] : entries)
    if (!setters.count(key))
      unknown.push_back(key);
  if (!unknown.empty()) {
    std::string msg = "unknown keys:";
    for (const auto& k : unknown)
      msg += " " + k;
    throw Error(msg);
  }
  std::vector<std::string> missing;
  for (const char* req : {"time.final_time", "continuation.epsilon_list"})
    if (!entries.count(req))
      missing.push_back(req);
  if (!missing.empty()) {
    std::string msg = "missing required keys:";
    for (const auto& k : missing)
      msg += " " + k;
    throw Error(msg);
  }
  for (const auto& [key, e] : entries)
    setters.at(key)(key, e);

  if (!entries.count("model.b"))
    p.b.assign(p.K, 4.0);
  if (have_rouse) {
    if (static_cast<int>(rouse.size()) != p.K * p.K)
      throw Error("model.rouse: expected " + std::to_string(p.K * p.K) + " entries (K x K, row-major)");
    p.A.resize(p.K, p.K);
    for (int i = 0; i < p.K; ++i)
      for (int j = 0; j < p.K; ++j)
        p.A(i, j) = rouse[i * p.K + j];
  } else if (p.K != 1) {
    // Rouse connectivity tridiag(-1, 2, -1).
    p.A = Eigen::MatrixXd::Zero(p.K, p.K);
    for (int i = 0; i < p.K; ++i) {
      p.A(i, i) = 2.0;
      if (i + 1 < p.K)
        p.A(i, i + 1) = p.A(i + 1, i) = -1.0;
    }
  }

  std::vector<std::string> errors;
  if (cfg.epsilon_list.empty())
    errors.push_back("epsilon_list is empty");
  for (std::size_t i = 0; i < cfg.epsilon_list.size(); ++i) {
    const double e = cfg.epsilon_list[i];
    if (!(e > 0 && e < 1))
      errors.push_back("epsilon_list entries must lie in (0,1)");
    if (i > 0 && !(e < cfg.epsilon_list[i - 1]))
      errors.push_back("epsilon_list must be strictly decreasing");
  }
  if (!cfg.epsilon_list.empty())
    p.epsilon = cfg.epsilon_list.front();
  if (cfg.nx < 8 || cfg.q_radial < 8 || cfg.q_angular < 8)
    errors.push_back("grid resolutions must be >= 8");
  if (!(cfg.final_time > 0))
    errors.push_back("final_time must be > 0");
  if (!(cfg.dt_safety > 0 && cfg.dt_safety <= 1))
    errors.push_back("dt_safety must lie in (0,1]");
  if (cfg.samples < 1)
    errors.push_back("samples must be >= 1");
  if (cfg.tracked_modes < 1)
    errors.push_back("tracked_modes must be >= 1");
  if (cfg.field_stride < 0)
    errors.push_back("field_stride must be >= 0");
  static const std::set<std::string> recipes{"balanced", "cosine", "equilibrium", "acoustic"};
  if (!recipes.count(cfg.init_recipe))
    errors.push_back("unknown init_recipe '" + cfg.init_recipe + "'");
  static const std::set<std::string> names{"rho", "ux", "uy", "rho_p", "tau_xx", "tau_xy", "tau_yy"};
  for (const auto& f : cfg.fields)
    if (!names.count(f))
      errors.push_back("unknown field '" + f + "'");
  for (const auto& v : validate(p).violations)
    errors.push_back(v);
  // Drop the duplicates produced by repeated list checks.
  errors.erase(std::unique(errors.begin(), errors.end()), errors.end());
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors)
      msg += "\n  " + e;
    throw Error(msg);
  }
  return cfg;
}

RunConfig parse_config(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str());
}

std::string RunConfig::echo() const
{
  std::ostringstream os;
  os << std::setprecision(17);
  auto list = [&](const auto& v) {
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i)
      os << (i ? ", " : "") << v[i];
    os << "]\n";
  };
  const Params& p = params;
  os << "[model]\n";
  os << "gamma = " << p.gamma << "\nc_p = " << p.c_p << "\nmu_s = " << p.mu_s << "\nmu_b = " << p.mu_b
     << "\nbeta_comp = " << p.beta_comp << "\ndelta = " << p.delta << "\nxi_bar = " << p.xi_bar
     << "\nrho_bar = " << p.rho_bar << "\nsprings = " << p.K << "\ndim = " << p.dim_x << "\nb = ";
  list(p.b);
  std::vector<double> rouse;
  for (int i = 0; i < p.A.rows(); ++i)
    for (int j = 0; j < p.A.cols(); ++j)
      rouse.push_back(p.A(i, j));
  os << "rouse = ";
  list(rouse);
  os << "polymer = " << (polymer ? "true" : "false") << "\ninit_recipe = " << init_recipe
     << "\ninit_amplitude = " << init_amplitude << "\n\n[grid]\nnx = " << nx << "\nq_radial = " << q_radial
     << "\nq_angular = " << q_angular << "\n\n[time]\nfinal_time = " << final_time << "\ndt_safety = " << dt_safety
     << "\nsamples = " << samples << "\n\n[continuation]\nepsilon_list = ";
  list(epsilon_list);
  os << "tracked_modes = " << tracked_modes << "\nreference = " << (reference ? "true" : "false")
     << "\n\n[output]\ndirectory = \"" << output_dir << "\"\nfield_stride = " << field_stride << "\nfields = ";
  list(fields);
  return os.str();
}

} // namespace nsfp
