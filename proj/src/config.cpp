#include "dynloc/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dynloc {

namespace {

struct SchemaEntry {
  const char* key;
  const char* default_value;
};

// Every recognized key with its default. Order defines the echo layout.
const SchemaEntry kSchema[] = {
    {"lattice.dimension", "1"},
    {"lattice.extent", "301"},

    {"disorder.kind", "iid-uniform"},
    {"disorder.half_width", "1.0"},
    {"disorder.correlation_radius", "0"},
    {"disorder.density_table", ""},
    {"disorder.sample_count", "1000000"},

    {"operator.matrix_cap", "4096"},
    {"operator.filter_enabled", "false"},
    {"operator.filter_lo", "-1.0"},
    {"operator.filter_hi", "1.0"},
    {"operator.filter_margin", "0.25"},

    {"dynamics.realizations", "8"},
    {"dynamics.initial_state", "delta"},
    {"dynamics.t_max", "50.0"},
    {"dynamics.t_step", "0.05"},
    {"dynamics.cesaro_per_decade", "32"},
    {"dynamics.cesaro_t_min", "1.0"},
    {"dynamics.leak_margin", "2.0"},
    {"dynamics.leak_threshold", "1e-8"},

    {"green.gre_instances", "20"},
    {"green.gre_box_radius", "8.0"},
    {"green.gre_energy", "0.5"},
    {"green.gre_eps", "0.5"},
    {"green.gre_instances_2d", "5"},
    {"green.gre_box_radius_2d", "3.0"},
    {"green.extent_2d", "21"},
    {"green.residuum_samples", "4"},
    {"green.residuum_eps", "0.1"},
    {"green.residuum_lo", "-1.0"},
    {"green.residuum_hi", "1.0"},
    {"green.eps_min", "1e-6"},
    {"green.eps_probes", "13"},

    {"msa.variant", "m2"},
    {"msa.scales", "8"},
    {"msa.alpha", "1.5"},
    {"msa.p", "1.5"},
    {"msa.m", "5.0"},
    {"msa.nu", "0.5"},
    {"msa.beta", "1.0"},
    {"msa.energy", "-2.9"},
    {"msa.center", "66"},
    {"msa.realizations", "500"},
    {"msa.eps_min", "1e-9"},
    {"msa.eps_probes", "13"},
    {"msa.m1_lo", "-5.51"},
    {"msa.m1_hi", "-5.49"},
    {"msa.m1_points", "9"},
    {"msa.m1_center2", "-66"},

    {"wegner.energy", "1.9"},
    {"wegner.eta", "0.1,0.03,0.01,0.003"},
    {"wegner.realizations", "2000"},
    {"wegner.box_radius", "16"},
    {"wegner.center1", "-48"},
    {"wegner.center2", "49"},
    {"wegner.min_gap", "1"},

    {"estimators.fit_windows", "1:10,10:50"},
    {"estimators.bootstrap_resamples", "200"},
    {"estimators.stability_threshold", "1.05"},
    {"estimators.dynloc_horizon", "1000"},
    {"estimators.abel_enabled", "false"},
    {"estimators.abel_eps", "0.2,0.1,0.05"},
    {"estimators.abel_realizations", "20"},

    {"certify.alpha", "1.5"},
    {"certify.m", "33.0"},
    {"certify.w", "8.0"},
    {"certify.S", "4"},
    {"certify.N", "14"},
    {"certify.dimension", "1"},
    {"certify.K0", "10.0"},
    {"certify.theta", "3.0"},
    {"certify.p", "5.5"},
    {"certify.C_W", "1.0"},
    {"certify.interval_length", "1.0"},
    {"certify.c_NSd", "1.0"},
    {"certify.c_dN", "1.0"},
    {"certify.c_tilde", "1.0"},
    {"certify.ell", "10.0"},
    {"certify.L0", "10.0"},
    {"certify.n", "9.0"},

    {"execution.workers", "1"},
    {"execution.master_seed", "1"},

    {"output.directory", "out"},
};

bool schema_has(const std::string& key) {
  for (const auto& e : kSchema)
    if (key == e.key) return true;
  return false;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig c;
  for (const auto& e : kSchema) c.values_[e.key] = e.default_value;
  return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str(), path.string());
}

RunConfig RunConfig::from_string(const std::string& text, const std::string& origin) {
  RunConfig c = defaults();
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": key outside any [section]");
    const std::string full = section + "." + key;
    if (!schema_has(full))
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": unknown key '" + full + "'");
    c.values_[full] = value;
  }
  return c;
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!schema_has(key)) throw std::runtime_error("unknown config key '" + key + "'");
  values_[key] = value;
}

const std::string& RunConfig::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::runtime_error("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& s = get_string(key);
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::runtime_error("config key '" + key + "' is not a number: " + s);
  return v;
}

int RunConfig::get_int(const std::string& key) const {
  const std::string& s = get_string(key);
  std::size_t pos = 0;
  const int v = std::stoi(s, &pos);
  if (pos != s.size()) throw std::runtime_error("config key '" + key + "' is not an integer: " + s);
  return v;
}

std::int64_t RunConfig::get_int64(const std::string& key) const {
  const std::string& s = get_string(key);
  std::size_t pos = 0;
  const std::int64_t v = std::stoll(s, &pos);
  if (pos != s.size()) throw std::runtime_error("config key '" + key + "' is not an integer: " + s);
  return v;
}

std::uint64_t RunConfig::get_uint64(const std::string& key) const {
  const std::string& s = get_string(key);
  std::size_t pos = 0;
  const std::uint64_t v = std::stoull(s, &pos);
  if (pos != s.size()) throw std::runtime_error("config key '" + key + "' is not an integer: " + s);
  return v;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& s = get_string(key);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::runtime_error("config key '" + key + "' is not a boolean: " + s);
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
  const std::string& s = get_string(key);
  std::vector<double> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

std::vector<std::pair<double, double>> RunConfig::get_pair_list(const std::string& key) const {
  const std::string& s = get_string(key);
  std::vector<std::pair<double, double>> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("config key '" + key + "' expects a:b pairs");
    out.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
  }
  return out;
}

std::string RunConfig::resolved_echo() const {
  std::string out = "# resolved configuration (all defaults materialized)\n";
  std::string section;
  for (const auto& e : kSchema) {
    const std::string full = e.key;
    const auto dot = full.find('.');
    const std::string sec = full.substr(0, dot);
    if (sec != section) {
      section = sec;
      out += "\n[" + section + "]\n";
    }
    out += full.substr(dot + 1) + " = " + values_.at(full) + "\n";
  }
  return out;
}

}  // namespace dynloc
