#include "rou/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rou {

using nlohmann::json;

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::ostringstream os;
  os << "scenario validation failed:";
  for (const auto& e : errors) os << "\n  - " << e;
  return os.str();
}

class Validator {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& msg) { errors.push_back(msg); }

  void check_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool ok = false;
      for (const char* k : allowed)
        if (it.key() == k) ok = true;
      if (!ok) fail(where + ": unknown key \"" + it.key() + "\"");
    }
  }

  // Returns nullopt (and records an error) when missing or mistyped.
  std::optional<double> number(const json& obj, const std::string& where,
                               const char* key, bool required,
                               std::optional<double> fallback = {}) {
    if (!obj.contains(key)) {
      if (required) fail(where + ": missing required field \"" + key + "\"");
      return fallback;
    }
    if (!obj[key].is_number()) {
      fail(where + ": field \"" + key + "\" must be a number");
      return fallback;
    }
    return obj[key].get<double>();
  }

  std::optional<std::string> text(const json& obj, const std::string& where,
                                  const char* key, bool required) {
    if (!obj.contains(key)) {
      if (required) fail(where + ": missing required field \"" + key + "\"");
      return {};
    }
    if (!obj[key].is_string()) {
      fail(where + ": field \"" + key + "\" must be a string");
      return {};
    }
    return obj[key].get<std::string>();
  }

  std::optional<std::vector<double>> number_list(const json& obj,
                                                 const std::string& where,
                                                 const char* key) {
    if (!obj.contains(key)) {
      fail(where + ": missing required field \"" + key + "\"");
      return {};
    }
    if (!obj[key].is_array()) {
      fail(where + ": field \"" + key + "\" must be an array of numbers");
      return {};
    }
    std::vector<double> out;
    for (const auto& v : obj[key]) {
      if (!v.is_number()) {
        fail(where + ": field \"" + key + "\" must contain numbers only");
        return {};
      }
      out.push_back(v.get<double>());
    }
    return out;
  }
};

BetaKernel parse_beta(const json& j, Validator& v) {
  if (!j.is_object()) {
    v.fail("kernel.beta: must be an object");
    return BetaKernel::zero();
  }
  auto type = v.text(j, "kernel.beta", "type", true);
  if (!type) return BetaKernel::zero();
  if (*type == "zero") {
    v.check_keys(j, "kernel.beta", {"type"});
    return BetaKernel::zero();
  }
  if (*type == "constant") {
    v.check_keys(j, "kernel.beta", {"type", "c"});
    auto c = v.number(j, "kernel.beta", "c", true);
    return BetaKernel::constant(c.value_or(0.0));
  }
  if (*type == "exponential") {
    v.check_keys(j, "kernel.beta", {"type", "a", "b"});
    auto a = v.number(j, "kernel.beta", "a", true);
    auto b = v.number(j, "kernel.beta", "b", true);
    return BetaKernel::exponential(a.value_or(0.0), b.value_or(0.0));
  }
  if (*type == "tabulated") {
    v.check_keys(j, "kernel.beta", {"type", "values"});
    auto vals = v.number_list(j, "kernel.beta", "values");
    if (!vals || vals->size() < 2) {
      if (vals) v.fail("kernel.beta: tabulated kernel needs at least 2 values");
      return BetaKernel::zero();  // placeholder; errors are already recorded
    }
    return BetaKernel::tabulated(std::move(*vals));
  }
  v.fail("kernel.beta: unknown type \"" + *type +
         "\" (expected zero|constant|exponential|tabulated)");
  return BetaKernel::zero();
}

struct ModelSpec {
  bool dirichlet = false;
  double L = 1.0;
  int K = 1;
  double delta = 0.0;
  std::string a1 = "none";
  std::string a2 = "none";
  // explicit list alternative
  std::vector<ModeEntry> explicit_modes;
};

ModelSpec parse_model(const json& j, Validator& v) {
  ModelSpec m;
  if (!j.is_object()) {
    v.fail("model: must be an object");
    return m;
  }
  auto type = v.text(j, "model", "type", true);
  if (!type) return m;
  if (*type == "dirichlet_1d") {
    m.dirichlet = true;
    v.check_keys(j, "model", {"type", "L", "K", "delta", "a1", "a2"});
    auto L = v.number(j, "model", "L", true);
    auto K = v.number(j, "model", "K", true);
    m.L = L.value_or(1.0);
    m.K = int(K.value_or(1.0));
    if (L && *L <= 0.0) v.fail("model: L must be > 0");
    if (K && (m.K < 1 || double(m.K) != *K)) {
      v.fail("model: K must be a positive integer");
      m.K = 1;
    }
    m.a1 = v.text(j, "model", "a1", false).value_or("none");
    m.a2 = v.text(j, "model", "a2", false).value_or("none");
    if (m.a1 != "fractional" && m.a1 != "laplacian" && m.a1 != "none")
      v.fail("model: a1 must be one of fractional|laplacian|none");
    if (m.a2 != "laplacian" && m.a2 != "none")
      v.fail("model: a2 must be one of laplacian|none");
    auto delta = v.number(j, "model", "delta", m.a1 == "fractional");
    m.delta = delta.value_or(0.0);
    if (delta && (m.delta < 0.0 || m.delta >= 1.0))
      v.fail("model: delta must lie in [0, 1)");
    if (j.contains("delta") && m.a1 != "fractional")
      v.fail("model: delta is only meaningful with a1 = \"fractional\"");
  } else if (*type == "modes") {
    v.check_keys(j, "model", {"type", "modes"});
    if (!j.contains("modes") || !j["modes"].is_array() || j["modes"].empty()) {
      v.fail("model: type \"modes\" needs a non-empty \"modes\" array");
      return m;
    }
    int idx = 1;
    for (const auto& e : j["modes"]) {
      std::string where = "model.modes[" + std::to_string(idx - 1) + "]";
      if (!e.is_object()) {
        v.fail(where + ": must be an object");
        continue;
      }
      v.check_keys(e, where, {"mu", "m1", "m2", "f"});
      ModeEntry me;
      me.mu = v.number(e, where, "mu", true).value_or(-1.0);
      me.m1 = v.number(e, where, "m1", false, 0.0).value_or(0.0);
      me.m2 = v.number(e, where, "m2", false, 0.0).value_or(0.0);
      me.f = v.number(e, where, "f", false, 0.0).value_or(0.0);
      me.eig_index = idx++;
      if (me.mu >= 0.0) v.fail(where + ": mu must be < 0");
      m.explicit_modes.push_back(me);
    }
  } else {
    v.fail("model: unknown type \"" + *type + "\" (expected dirichlet_1d|modes)");
  }
  return m;
}

void apply_forcing(const json& j, Validator& v, const ModelSpec& m,
                   const std::vector<DirichletMode>& eig,
                   std::vector<ModeEntry>& modes) {
  if (!j.is_object()) {
    v.fail("forcing: must be an object");
    return;
  }
  auto type = v.text(j, "forcing", "type", true);
  if (!type) return;
  if (*type == "first_mode") {
    v.check_keys(j, "forcing", {"type", "scale"});
    double s = v.number(j, "forcing", "scale", false, 1.0).value_or(1.0);
    if (!modes.empty()) modes[0].f = s;
    for (size_t k = 1; k < modes.size(); ++k) modes[k].f = 0.0;
    return;
  }
  if (!m.dirichlet) {
    v.fail("forcing: type \"" + *type +
           "\" needs a dirichlet_1d model; explicit mode lists carry their "
           "own f entries (use type \"first_mode\" to override)");
    return;
  }
  std::vector<double> samples;
  if (*type == "constant") {
    v.check_keys(j, "forcing", {"type", "value"});
    double val = v.number(j, "forcing", "value", false, 1.0).value_or(1.0);
    samples.assign(8193, val);
  } else if (*type == "table") {
    v.check_keys(j, "forcing", {"type", "values"});
    auto vals = v.number_list(j, "forcing", "values");
    if (!vals || vals->size() < 2) {
      v.fail("forcing: table needs at least 2 samples (uniform over [0, L])");
      return;
    }
    samples = *vals;
  } else {
    v.fail("forcing: unknown type \"" + *type +
           "\" (expected first_mode|constant|table)");
    return;
  }
  ForcingProjection proj = project_forcing(samples, eig);
  for (size_t k = 0; k < modes.size(); ++k) modes[k].f = proj.coeffs[k];
}

RunParams parse_run(const json& j, Validator& v) {
  RunParams run;
  if (!j.is_object()) {
    v.fail("run: must be an object");
    return run;
  }
  v.check_keys(j, "run",
               {"dt", "T", "paths", "seed", "burn_in", "stationary_init"});
  run.dt = v.number(j, "run", "dt", false, run.dt).value_or(run.dt);
  run.T = v.number(j, "run", "T", false, run.T).value_or(run.T);
  auto paths = v.number(j, "run", "paths", false, double(run.paths));
  run.paths = int(paths.value_or(double(run.paths)));
  auto seed = v.number(j, "run", "seed", false, 0.0);
  run.seed = std::uint64_t(seed.value_or(0.0));
  run.burn_in = v.number(j, "run", "burn_in", false, 0.0).value_or(0.0);
  if (j.contains("stationary_init")) {
    if (!j["stationary_init"].is_boolean())
      v.fail("run: field \"stationary_init\" must be a boolean");
    else
      run.stationary_init = j["stationary_init"].get<bool>();
  }
  if (run.dt <= 0.0) v.fail("run: dt must be > 0");
  if (run.T <= 0.0) v.fail("run: T must be > 0");
  if (run.paths < 1) v.fail("run: paths must be >= 1");
  if (run.burn_in < 0.0) v.fail("run: burn_in must be >= 0");
  return run;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

Scenario parse_scenario(const std::string& json_text, std::string name) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError({std::string("not valid JSON: ") + e.what()});
  }
  Validator v;
  if (!j.is_object()) {
    throw ScenarioError({"top level must be a JSON object"});
  }
  v.check_keys(j, "top level", {"name", "model", "kernel", "forcing", "run"});

  if (j.contains("name")) {
    auto n = v.text(j, "top level", "name", false);
    if (n) name = *n;
  }

  // Kernel.
  double r = 1.0, alpha = 0.0;
  BetaKernel beta = BetaKernel::zero();
  if (!j.contains("kernel")) {
    v.fail("top level: missing required field \"kernel\"");
  } else if (!j["kernel"].is_object()) {
    v.fail("kernel: must be an object");
  } else {
    const json& jk = j["kernel"];
    v.check_keys(jk, "kernel", {"r", "alpha", "beta"});
    auto rr = v.number(jk, "kernel", "r", true);
    r = rr.value_or(1.0);
    if (rr && *rr <= 0.0) {
      v.fail("kernel: r must be > 0");
      r = 1.0;
    }
    alpha = v.number(jk, "kernel", "alpha", false, 0.0).value_or(0.0);
    if (jk.contains("beta")) beta = parse_beta(jk["beta"], v);
  }

  // Model and forcing.
  ModelSpec m;
  if (!j.contains("model"))
    v.fail("top level: missing required field \"model\"");
  else
    m = parse_model(j["model"], v);

  Scenario sc{std::move(name), DelayKernel(r, alpha, std::move(beta)),
              ModeSystem{}, RunParams{}, {}};
  if (m.dirichlet) {
    sc.eigenfunctions = dirichlet_modes(m.L, m.K);
    sc.system.domain_length = m.L;
    for (const auto& e : sc.eigenfunctions) {
      ModeEntry me;
      me.mu = e.mu;
      me.eig_index = e.k;
      if (m.a1 == "laplacian")
        me.m1 = e.mu;
      else if (m.a1 == "fractional")
        me.m1 = fractional_multiplier(e.mu, m.delta);
      if (m.a2 == "laplacian") me.m2 = e.mu;
      sc.system.modes.push_back(me);
    }
  } else {
    sc.system.modes = m.explicit_modes;
  }

  if (j.contains("forcing"))
    apply_forcing(j["forcing"], v, m, sc.eigenfunctions, sc.system.modes);
  else if (m.dirichlet)
    v.fail("top level: missing required field \"forcing\"");

  if (j.contains("run")) sc.run = parse_run(j["run"], v);

  // Cross-field consistency: dt must divide r.
  if (sc.run.dt > 0.0 && r > 0.0) {
    long q = std::lround(r / sc.run.dt);
    if (q < 1 || std::abs(double(q) * sc.run.dt - r) > 1e-9 * r)
      v.fail("run: dt must divide the delay r exactly");
  }

  if (!v.errors.empty()) throw ScenarioError(std::move(v.errors));
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({"cannot open file: " + path});
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string name = path;
  size_t slash = name.find_last_of('/');
  if (slash != std::string::npos) name = name.substr(slash + 1);
  size_t dot = name.rfind(".json");
  if (dot != std::string::npos) name = name.substr(0, dot);
  return parse_scenario(buf.str(), std::move(name));
}

}  // namespace rou
