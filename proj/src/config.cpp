#include "fspde/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fspde/catalog.hpp"

namespace fspde::config {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

bool is_power_of_two(long x) { return x > 0 && (x & (x - 1)) == 0; }

const std::set<std::string> kKinds{"simulate",   "temporal", "spatial",
                                   "mlcheck",    "noisecheck", "smoothing",
                                   "dumpoperator"};

}  // namespace

scheme::ProblemSpec RunConfig::problem() const {
  scheme::ProblemSpec p;
  p.fractional = {alpha, hurst, beta};
  p.T = T;
  p.c0 = c0;
  p.f = catalog::make_drift(f_name, f_scale);
  p.g = catalog::make_diffusion(g_name, g_scale);
  p.phi = catalog::make_profile(phi_name, phi_scale);
  p.x0 = catalog::make_profile(x0_name, x0_scale);
  p.lipschitz_L = effective_lipschitz();
  return p;
}

fem::CoefficientField RunConfig::coefficients() const {
  fem::CoefficientField c;
  c.c0 = c0;
  return c;  // unit diffusion, no advection; c0 shift from the config
}

noise::NoiseSpec RunConfig::noise_spec() const {
  noise::NoiseSpec s;
  s.n_modes = n_modes;
  s.decay = decay;
  s.hurst = hurst;
  return s;
}

double RunConfig::effective_lipschitz() const {
  if (lipschitz_L >= 0.0) return lipschitz_L;
  return std::max(catalog::make_drift(f_name, f_scale).lipschitz,
                  catalog::make_diffusion(g_name, g_scale).lipschitz);
}

std::vector<std::string> RunConfig::violations() const {
  std::vector<std::string> v = scheme::FractionalParams{alpha, hurst, beta}.violations();
  if (!(T > 0.0)) v.push_back("T must be positive");
  if (!(decay > 1.0)) v.push_back("decay must exceed 1 (trace-class covariance)");
  if (n < 2) v.push_back("n must be >= 2 interior nodes");
  if (steps < 1) v.push_back("M must be >= 1 steps");
  if (n_modes < 1) v.push_back("n_modes must be >= 1");
  if (n_mc < 1) v.push_back("n_mc must be >= 1");
  if (!(slope_tol > 0.0)) v.push_back("slope_tol must be positive");
  if (format != "csv" && format != "json" && format != "both")
    v.push_back("format must be csv, json or both");
  if (!kind.empty() && !kKinds.count(kind))
    v.push_back("kind must be one of simulate, temporal, spatial, mlcheck, "
                "noisecheck, smoothing, dumpoperator");
  try {
    (void)catalog::make_drift(f_name, f_scale);
  } catch (const ConfigError& e) {
    v.push_back(e.what());
  }
  try {
    (void)catalog::make_diffusion(g_name, g_scale);
  } catch (const ConfigError& e) {
    v.push_back(e.what());
  }
  for (const auto& [name, label] : {std::pair{phi_name, "phi"}, {x0_name, "x0"}}) {
    try {
      (void)catalog::make_profile(name, 1.0);
    } catch (const ConfigError&) {
      v.push_back(std::string("unknown ") + label + " profile '" + name + "'");
    }
  }
  if (kind == "temporal") {
    if (levels.size() < 3) v.push_back("temporal study needs >= 3 levels");
    for (int m : levels)
      if (!is_power_of_two(m)) v.push_back("temporal levels must be powers of two (steps)");
    if (!is_power_of_two(ref)) v.push_back("temporal ref must be a power of two (steps)");
    for (int m : levels)
      if (ref > 0 && (m >= ref || (is_power_of_two(m) && ref % m != 0)))
        v.push_back("every temporal level must be a strict dyadic coarsening of ref");
  }
  if (kind == "spatial") {
    if (levels.size() < 3) v.push_back("spatial study needs >= 3 levels");
    for (int m : levels)
      if (!is_power_of_two(m + 1)) v.push_back("spatial levels must be 2^k - 1 nodes");
    if (!is_power_of_two(ref + 1)) v.push_back("spatial ref must be 2^k - 1 nodes");
    for (int m : levels)
      if (m >= ref) v.push_back("spatial ref mesh must be strictly finer than every level");
    if (!is_power_of_two(steps)) v.push_back("spatial study needs a dyadic step count M");
  }
  return v;
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<std::string> problems;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream os;
      os << "line " << lineno << ": expected 'key = value'";
      throw ConfigError(os.str());
    }
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "kind") c.kind = val;
      else if (key == "alpha") c.alpha = std::stod(val);
      else if (key == "hurst") c.hurst = std::stod(val);
      else if (key == "beta") c.beta = std::stod(val);
      else if (key == "T") c.T = std::stod(val);
      else if (key == "c0") c.c0 = std::stod(val);
      else if (key == "f") c.f_name = val;
      else if (key == "f_scale") c.f_scale = std::stod(val);
      else if (key == "g") c.g_name = val;
      else if (key == "g_scale") c.g_scale = std::stod(val);
      else if (key == "phi") c.phi_name = val;
      else if (key == "phi_scale") c.phi_scale = std::stod(val);
      else if (key == "x0") c.x0_name = val;
      else if (key == "x0_scale") c.x0_scale = std::stod(val);
      else if (key == "lipschitz_L") c.lipschitz_L = std::stod(val);
      else if (key == "n") c.n = std::stoi(val);
      else if (key == "M") c.steps = std::stoi(val);
      else if (key == "n_modes") c.n_modes = std::stoi(val);
      else if (key == "decay") c.decay = std::stod(val);
      else if (key == "levels") {
        c.levels.clear();
        std::istringstream ls(val);
        std::string item;
        while (std::getline(ls, item, ',')) {
          item = trim(item);
          if (!item.empty()) c.levels.push_back(std::stoi(item));
        }
      } else if (key == "ref") c.ref = std::stoi(val);
      else if (key == "n_mc") c.n_mc = std::stoi(val);
      else if (key == "slope_tol") c.slope_tol = std::stod(val);
      else if (key == "seed") c.seed = std::stoull(val);
      else if (key == "out") c.out = val;
      else if (key == "format") c.format = val;
      else {
        std::ostringstream os;
        os << "line " << lineno << ": unknown key '" << key << "'";
        throw ConfigError(os.str());
      }
    } catch (const std::invalid_argument&) {
      std::ostringstream os;
      os << "line " << lineno << ": cannot parse value '" << val << "' for key '"
         << key << "'";
      throw ConfigError(os.str());
    } catch (const std::out_of_range&) {
      std::ostringstream os;
      os << "line " << lineno << ": value out of range for key '" << key << "'";
      throw ConfigError(os.str());
    }
  }
  auto v = c.violations();
  if (!v.empty()) {
    std::string all = "config invalid:";
    for (const auto& s : v) all += "\n  - " + s;
    throw ConfigError(all);
  }
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

std::vector<std::pair<std::string, std::string>> echo(const RunConfig& c) {
  auto d = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("kind", c.kind);
  kv.emplace_back("alpha", d(c.alpha));
  kv.emplace_back("hurst", d(c.hurst));
  kv.emplace_back("beta", d(c.beta));
  kv.emplace_back("T", d(c.T));
  kv.emplace_back("c0", d(c.c0));
  kv.emplace_back("f", c.f_name);
  kv.emplace_back("f_scale", d(c.f_scale));
  kv.emplace_back("g", c.g_name);
  kv.emplace_back("g_scale", d(c.g_scale));
  kv.emplace_back("phi", c.phi_name);
  kv.emplace_back("phi_scale", d(c.phi_scale));
  kv.emplace_back("x0", c.x0_name);
  kv.emplace_back("x0_scale", d(c.x0_scale));
  kv.emplace_back("lipschitz_L", d(c.effective_lipschitz()));
  kv.emplace_back("n", std::to_string(c.n));
  kv.emplace_back("M", std::to_string(c.steps));
  kv.emplace_back("n_modes", std::to_string(c.n_modes));
  kv.emplace_back("decay", d(c.decay));
  {
    std::string ls;
    for (size_t i = 0; i < c.levels.size(); ++i)
      ls += (i ? "," : "") + std::to_string(c.levels[i]);
    kv.emplace_back("levels", ls);
  }
  kv.emplace_back("ref", std::to_string(c.ref));
  kv.emplace_back("n_mc", std::to_string(c.n_mc));
  kv.emplace_back("slope_tol", d(c.slope_tol));
  kv.emplace_back("seed", std::to_string(c.seed));
  kv.emplace_back("out", c.out);
  kv.emplace_back("format", c.format);
  return kv;
}

}  // namespace fspde::config
