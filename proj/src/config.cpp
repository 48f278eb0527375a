#include "finsler/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "finsler/errors.hpp"
#include "finsler/norms.hpp"

namespace finsler {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T number(std::string_view token, const std::string& what) {
  T v{};
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw ConfigError("invalid " + what + " '" + std::string(token) + "'");
  return v;
}

double positive(std::string_view token, const std::string& what) {
  const double v = number<double>(token, what);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(what + " must be positive, got '" + std::string(token) + "'");
  return v;
}

bool boolean(std::string_view token) {
  if (token == "true" || token == "1" || token == "yes") return true;
  if (token == "false" || token == "0" || token == "no") return false;
  throw ConfigError("invalid boolean '" + std::string(token) + "'");
}

void assign(RunConfig& c, std::string_view key, std::string_view value) {
  if (key == "norm") {
    c.norm = value;
  } else if (key == "dim") {
    c.dim = number<int>(value, "dim");
    if (c.dim < 2) throw ConfigError("dim must be >= 2");
  } else if (key == "solver") {
    c.solver = parse_solver(std::string(value));
  } else if (key == "domain") {
    c.domain = value;
  } else if (key == "radius") {
    c.radius = positive(value, "radius");
  } else if (key == "p_list") {
    c.p_list = parse_p_list(value);
  } else if (key == "rtol") {
    c.rtol = positive(value, "rtol");
  } else if (key == "grad_tol") {
    c.grad_tol = positive(value, "grad_tol");
  } else if (key == "max_iters") {
    c.max_iters = number<int>(value, "max_iters");
    if (c.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  } else if (key == "mesh_h") {
    c.mesh_h = positive(value, "mesh_h");
  } else if (key == "continuation") {
    c.continuation = boolean(value);
  } else if (key == "quad_budget") {
    c.quad_budget = number<int>(value, "quad_budget");
    if (c.quad_budget < 1) throw ConfigError("quad_budget must be >= 1");
  } else if (key == "seed") {
    c.seed = number<std::uint64_t>(value, "seed");
  } else if (key == "out") {
    if (value.empty()) throw ConfigError("out must not be empty");
    c.out = value;
  } else if (key == "model") {
    c.model = parse_model(std::string(value));
  } else if (key == "threads") {
    c.threads = number<unsigned>(value, "threads");
  } else {
    throw ConfigError("unknown key '" + std::string(key) + "'");
  }
}

}  // namespace

std::vector<double> parse_p_list(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    const std::string_view tok = trim(text.substr(pos, end - pos));
    const double p = number<double>(tok, "p value");
    if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("p value '" + std::string(tok) + "' must be > 1");
    if (!out.empty() && !(p > out.back()))
      throw ConfigError("p value '" + std::string(tok) + "' breaks strictly increasing order");
    out.push_back(p);
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::map<std::string, int> seen;
  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string prefix = "line " + std::to_string(lineno) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(prefix + "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (seen.count(key)) throw ConfigError(prefix + "duplicate key '" + key + "'");
    try {
      assign(c, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(prefix + e.what());
    }
    seen[key] = lineno;
  }
  try {
    validate(c);
  } catch (const ConfigError& e) {
    // validate() messages start with the offending key.
    const std::string what = e.what();
    const auto it = seen.find(what.substr(0, what.find(' ')));
    throw ConfigError((it != seen.end() ? "line " + std::to_string(it->second) + ": " : std::string()) + what);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void validate(const RunConfig& c) {
  try {
    parse_norm(c.norm, c.dim);
  } catch (const std::exception& e) {
    throw ConfigError("norm '" + c.norm + "': " + e.what());
  }
  if (c.domain != "square" && c.domain != "disk" && c.domain.rfind("polygon:", 0) != 0)
    throw ConfigError("domain '" + c.domain + "' (expected square, disk or polygon:<file>)");
  if (!(c.mesh_h < 1.0)) throw ConfigError("mesh_h must lie in (0, 1)");
  if (c.p_list.empty()) throw ConfigError("p_list must not be empty");
}

SweepConfig to_sweep_config(const RunConfig& c) {
  SweepConfig s;
  s.solver = c.solver;
  s.norm = c.norm;
  s.dim = c.dim;
  s.domain = c.domain;
  s.radius = c.radius;
  s.p_list = c.p_list;
  s.rtol = c.rtol;
  s.mesh_h = c.mesh_h;
  s.planar.grad_tol = c.grad_tol;
  s.planar.max_iters = c.max_iters;
  s.planar.continuation = c.continuation;
  s.planar.seed = c.seed;
  return s;
}

}  // namespace finsler
