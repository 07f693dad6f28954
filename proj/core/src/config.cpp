#include "geobeam/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <json.hpp>
#include <sstream>

namespace geobeam {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double x = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " is not a number: '" + v + "'");
  }
}

long long to_integer(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (!std::isfinite(x) || x != std::floor(x)) throw ConfigError("config: " + key + " must be an integer, got '" + v + "'");
  return static_cast<long long>(x);
}

class Reader {
 public:
  explicit Reader(const std::map<std::string, std::string>& kv) : kv_(kv) {}

  void get(const std::string& key, double& out) const {
    seen_.insert(key);
    if (auto it = kv_.find(key); it != kv_.end()) out = to_double(key, it->second);
  }
  void get(const std::string& key, int& out) const {
    seen_.insert(key);
    if (auto it = kv_.find(key); it != kv_.end()) out = static_cast<int>(to_integer(key, it->second));
  }
  void get(const std::string& key, long long& out) const {
    seen_.insert(key);
    if (auto it = kv_.find(key); it != kv_.end()) out = to_integer(key, it->second);
  }
  void get(const std::string& key, std::uint64_t& out) const {
    seen_.insert(key);
    if (auto it = kv_.find(key); it != kv_.end()) {
      const long long v = to_integer(key, it->second);
      if (v < 0) throw ConfigError("config: " + key + " must be >= 0");
      out = static_cast<std::uint64_t>(v);
    }
  }
  void get(const std::string& key, std::string& out) const {
    seen_.insert(key);
    if (auto it = kv_.find(key); it != kv_.end()) out = trim(it->second);
  }
  void get(const std::string& key, std::vector<double>& out) const {
    seen_.insert(key);
    if (auto it = kv_.find(key); it != kv_.end()) {
      out.clear();
      for (const auto& s : split_list(it->second)) out.push_back(to_double(key, s));
    }
  }
  void get(const std::string& key, std::vector<int>& out) const {
    seen_.insert(key);
    if (auto it = kv_.find(key); it != kv_.end()) {
      out.clear();
      for (const auto& s : split_list(it->second)) out.push_back(static_cast<int>(to_integer(key, s)));
    }
  }
  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  // First key of the input that no get() asked for.
  std::string unknown() const {
    for (const auto& [k, v] : kv_)
      if (!seen_.count(k)) return k;
    return "";
  }

 private:
  const std::map<std::string, std::string>& kv_;
  mutable std::set<std::string> seen_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("config: need " + what);
}

void flatten(const nlohmann::json& j, const std::string& prefix, std::map<std::string, std::string>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    return;
  }
  if (j.is_array()) {
    std::string s;
    for (const auto& e : j) {
      if (!s.empty()) s += ",";
      s += e.is_string() ? e.get<std::string>() : e.dump();
    }
    out[prefix] = s;
    return;
  }
  out[prefix] = j.is_string() ? j.get<std::string>() : j.dump();
}

}  // namespace

std::map<std::string, std::string> parse_ini(const std::string& text) {
  // Inline comments: "key = value ; note"
  std::string clean, line;
  std::istringstream lines(text);
  while (std::getline(lines, line)) {
    for (std::size_t i = 1; i < line.size(); ++i)
      if ((line[i] == ';' || line[i] == '#') && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.resize(i);
        break;
      }
    clean += line + "\n";
  }
  boost::property_tree::ptree pt;
  std::istringstream in(clean);
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  std::map<std::string, std::string> kv;
  for (const auto& [section, body] : pt) {
    if (body.empty()) {
      kv[section] = body.data();
      continue;
    }
    for (const auto& [key, value] : body) kv[section + "." + key] = value.data();
  }
  return kv;
}

std::map<std::string, std::string> parse_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: JSON root must be an object");
  std::map<std::string, std::string> kv;
  flatten(j, "", kv);
  return kv;
}

ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv) {
  ExperimentConfig c;
  const Reader r(kv);
  if (!r.has("manifold.kind")) throw ConfigError("config: missing key manifold.kind");
  r.get("manifold.kind", c.manifold.kind);
  r.get("manifold.dim", c.manifold.dim);
  r.get("manifold.periods", c.manifold.periods);
  r.get("manifold.profile", c.manifold.profile);
  r.get("manifold.profile_period", c.manifold.profile_period);
  r.get("manifold.dim_a", c.manifold.dim_a);

  r.get("cover.tau", c.cover.tau);
  r.get("cover.R", c.cover.R);
  r.get("cover.R_exponent", c.cover.R_exponent);
  r.get("cover.delta1", c.cover.delta1);
  r.get("cover.delta2", c.cover.delta2);
  r.get("cover.json", c.cover.json);

  r.get("dynamics.a", c.dynamics.a);
  r.get("dynamics.t0", c.dynamics.t0);
  r.get("dynamics.T", c.dynamics.T);
  r.get("dynamics.b", c.dynamics.b);
  r.get("dynamics.points", c.dynamics.points);
  r.get("dynamics.p", c.dynamics.p);
  r.get("dynamics.eps0", c.dynamics.eps0);
  r.get("dynamics.badfrac", c.dynamics.badfrac);

  r.get("quantize.lambda", c.quantize.lambdas);
  r.get("quantize.grid_factor", c.quantize.grid_factor);
  r.get("quantize.quasimode", c.quantize.quasimode);
  r.get("quantize.samples", c.quantize.samples);
  r.get("quantize.shell", c.quantize.shell);

  r.get("micro.rho", c.micro.rho);
  r.get("micro.eps", c.micro.eps);
  r.get("micro.delta", c.micro.delta);
  r.get("micro.eps_q", c.micro.eps_q);
  r.get("micro.eps0", c.micro.eps0);
  r.get("micro.t_grid", c.micro.t_grid);
  r.get("micro.lambda", c.micro.lambdas);
  r.get("micro.t_fixed", c.micro.t_fixed);
  r.get("micro.R", c.micro.R);
  r.get("micro.points", c.micro.points);
  r.get("micro.samples", c.micro.samples);
  r.get("micro.lambda_orth", c.micro.lambda_orth);

  r.get("spectral.family", c.spectral.family);
  r.get("spectral.n", c.spectral.n);
  r.get("spectral.degrees", c.spectral.degrees);
  r.get("spectral.p", c.spectral.p_list);
  r.get("spectral.max_radius_squared", c.spectral.max_radius_squared);

  r.get("output.dir", c.output_dir);
  r.get("run.seed", c.seed);
  r.get("seed", c.seed);
  if (const auto k = r.unknown(); !k.empty()) throw ConfigError("config: unknown key " + k);
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const std::string head = trim(text);
  const bool json = (path.size() >= 5 && path.substr(path.size() - 5) == ".json") || (!head.empty() && head[0] == '{');
  ExperimentConfig c = config_from_map(json ? parse_json(text) : parse_ini(text));
  c.source = path;
  return c;
}

void validate(const ExperimentConfig& c) {
  const auto& m = c.manifold;
  require(m.kind == "sphere" || m.kind == "torus" || m.kind == "product" || m.kind == "revolution",
          "manifold.kind in {sphere, torus, product, revolution}, got '" + m.kind + "'");
  require(m.dim >= 1, "manifold.dim >= 1");
  for (double p : m.periods) require(p > 0, "manifold.periods > 0");
  if (m.kind == "torus" && !m.periods.empty())
    require(static_cast<int>(m.periods.size()) == m.dim, "one period per dimension (manifold.periods size == manifold.dim)");
  if (m.kind == "revolution") {
    require(m.profile_period > 0, "manifold.profile_period > 0");
    require(!m.profile.empty() && m.profile[0] > 0, "manifold.profile[0] > 0");
    double osc = 0;
    for (std::size_t i = 1; i < m.profile.size(); ++i) osc += std::abs(m.profile[i]);
    require(osc < m.profile[0], "profile f(s) > 0 (sum |a_k| + |b_k| < c0)");
  }
  if (m.kind == "product") require(m.dim_a >= 1, "manifold.dim_a >= 1");

  const auto& cv = c.cover;
  require(cv.tau > 0, "cover.tau > 0");
  require(cv.R > 0, "cover.R > 0");
  require(cv.R_exponent >= 0 && cv.R_exponent < 1, "0 <= cover.R_exponent < 1");
  require(cv.delta1 > 0, "0 < cover.delta1");
  require(cv.delta1 < cv.delta2, "cover.delta1 < cover.delta2");
  require(cv.delta2 < 0.5, "cover.delta2 < 1/2");

  const auto& d = c.dynamics;
  require(d.a > 0, "dynamics.a > 0");
  require(d.t0 > 0, "dynamics.t0 > 0");
  require(d.T >= d.t0, "dynamics.T >= dynamics.t0");
  require(d.T >= 1, "dynamics.T >= 1");
  require(d.b >= 0, "dynamics.b >= 0");
  require(d.points >= 1, "dynamics.points >= 1");
  require(d.p >= 2, "dynamics.p >= 2");
  require(d.eps0 > 0, "dynamics.eps0 > 0");
  require(d.badfrac >= 0 && d.badfrac <= 1, "0 <= dynamics.badfrac <= 1");

  const auto& q = c.quantize;
  require(!q.lambdas.empty(), "quantize.lambda non-empty");
  for (int l : q.lambdas) require(l >= 1, "quantize.lambda >= 1");
  require(q.grid_factor >= 4, "quantize.grid_factor >= 4 (N >= 4 lambda)");
  require(q.quasimode == "lattice_cluster" || q.quasimode == "single_mode" || q.quasimode == "random_shell",
          "quantize.quasimode in {lattice_cluster, single_mode, random_shell}");
  require(q.samples >= 1, "quantize.samples >= 1");
  require(q.shell > 0, "quantize.shell > 0");

  const auto& mi = c.micro;
  require(mi.rho >= 0 && mi.rho < 1, "0 <= micro.rho < 1");
  require(mi.eps > 0, "0 < micro.eps");
  require(mi.eps < mi.delta, "micro.eps < micro.delta");
  require(mi.eps_q > 0, "micro.eps_q > 0");
  require(mi.eps0 > 0, "micro.eps0 > 0");
  for (double t : mi.t_grid) require(std::abs(t) > 0 && std::abs(t) < mi.eps0, "0 < |t| < micro.eps0 for every micro.t_grid entry");
  require(std::abs(mi.t_fixed) > 0 && std::abs(mi.t_fixed) < mi.eps0, "0 < |micro.t_fixed| < micro.eps0");
  for (int l : mi.lambdas) require(l >= 1, "micro.lambda >= 1");
  require(mi.R > 0, "micro.R > 0");
  require(mi.points >= 1, "micro.points >= 1");
  require(mi.samples >= 1, "micro.samples >= 1");
  require(mi.lambda_orth >= 1, "micro.lambda_orth >= 1");

  const auto& s = c.spectral;
  require(s.family == "zonal" || s.family == "highest_weight" || s.family == "torus_mode" ||
              s.family == "torus_lattice_cluster",
          "spectral.family in {zonal, highest_weight, torus_mode, torus_lattice_cluster}");
  require(s.n >= 2, "spectral.n >= 2");
  require(!s.degrees.empty(), "spectral.degrees non-empty");
  for (int l : s.degrees) require(l >= 0, "spectral.degrees >= 0");
  for (double p : s.p_list) require(p >= 2, "spectral.p >= 2");
  require(s.max_radius_squared >= 1, "spectral.max_radius_squared >= 1");
  require(!c.output_dir.empty(), "output.dir non-empty");
}

ModelManifold make_manifold(const ManifoldBlock& m) {
  if (m.kind == "sphere") return ModelManifold::sphere(m.dim);
  if (m.kind == "torus") return ModelManifold::flat_torus(m.periods.empty() ? std::vector<double>(m.dim, 1.0) : m.periods);
  if (m.kind == "product")
    return ModelManifold::product(ModelManifold::sphere(m.dim_a),
                                  ModelManifold::flat_torus(m.periods.empty() ? std::vector<double>{2 * std::numbers::pi} : m.periods));
  Profile p;
  p.coeffs = m.profile;
  p.period = m.profile_period;
  return ModelManifold::surface_of_revolution(p);
}

}  // namespace geobeam
