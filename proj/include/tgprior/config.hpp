#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "harness.hpp"

namespace tgprior {

using json = nlohmann::json;

namespace detail {

inline double num_at(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path + "." + key, "missing");
  if (!j.at(key).is_number()) throw ConfigError(path + "." + key, "must be a number");
  return j.at(key).get<double>();
}

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
    }
  }
}

inline std::vector<double> num_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "must be an array of numbers");
  std::vector<double> v;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(path, "must be an array of numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

}  // namespace detail

// Parameter names per family, in positional order.
inline const std::map<std::string, std::vector<std::string>>& spectrum_param_names() {
  static const std::map<std::string, std::vector<std::string>> m = {
      {"power", {"p"}},
      {"exponential", {"gamma", "p"}},
      {"logarithmic", {"p"}},
      {"alpha_regular", {"alpha"}},
      {"analytic", {"alpha", "xi", "p"}},
      {"explicit", {"values"}},
  };
  return m;
}

inline SpectrumModel spectrum_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "must be an object");
  detail::check_keys(j, {"family", "params", "scale"}, path);
  if (!j.contains("family") || !j.at("family").is_string()) throw ConfigError(path + ".family", "missing");
  const std::string fam = j.at("family").get<std::string>();
  const auto& names = spectrum_param_names();
  const auto it = names.find(fam);
  if (it == names.end()) throw ConfigError(path + ".family", "unknown family '" + fam + "'");
  const double scale = j.contains("scale") ? detail::num_at(j, "scale", path) : 1.0;
  const json params = j.contains("params") ? j.at("params") : json::object();
  const std::string pp = path + ".params";
  try {
    if (fam == "explicit") {
      const json& vals = params.is_array() ? params : (params.contains("values") ? params.at("values") : json());
      return SpectrumModel::explicit_values(detail::num_list(vals, pp + ".values"), scale);
    }
    std::vector<double> v;
    if (params.is_array()) {
      v = detail::num_list(params, pp);
      if (v.size() != it->second.size()) throw ConfigError(pp, "wrong number of parameters");
    } else {
      std::set<std::string> allowed(it->second.begin(), it->second.end());
      if (fam == "analytic") allowed.insert("xi_prior");
      detail::check_keys(params, allowed, pp);
      for (const auto& name : it->second) {
        if (fam == "analytic" && name == "xi" && params.contains("xi_prior")) {
          v.push_back(detail::num_at(params, "xi_prior", pp));
        } else {
          v.push_back(detail::num_at(params, name, pp));
        }
      }
    }
    if (fam == "power") return SpectrumModel::power(v[0], scale);
    if (fam == "exponential") return SpectrumModel::exponential(v[0], v[1], scale);
    if (fam == "logarithmic") return SpectrumModel::logarithmic(v[0], scale);
    if (fam == "alpha_regular") return SpectrumModel::alpha_regular(v[0], scale);
    return SpectrumModel::analytic(v[0], v[1], v[2], scale);
  } catch (const DomainError& e) {
    throw ConfigError(pp, e.what());
  }
}

inline json spectrum_to_json(const SpectrumModel& m) {
  json j;
  j["family"] = spectrum_family_name(m.family());
  if (m.family() == SpectrumFamily::explicit_) {
    std::vector<double> v;
    for (std::size_t i = 1; i <= m.explicit_length(); ++i) v.push_back(m.singular_value(i) / m.scale());
    j["params"] = {{"values", v}};
  } else {
    json p = json::object();
    const auto& names = spectrum_param_names().at(spectrum_family_name(m.family()));
    for (std::size_t i = 0; i < names.size(); ++i) p[names[i]] = m.params()[i];
    j["params"] = p;
  }
  j["scale"] = m.scale();
  return j;
}

// Scenario from JSON. A "scenario" key names a preset used as the base; the
// other keys override it.
inline Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  detail::check_keys(j, {"name", "scenario", "forward", "prior", "smoothness", "mode", "n_grid", "sim_grid",
                         "delta_grid", "N", "seed", "constants", "description"},
                     "");
  Scenario sc;
  if (j.contains("scenario")) {
    if (!j.at("scenario").is_string()) throw ConfigError("scenario", "must be a preset name");
    auto p = find_preset(j.at("scenario").get<std::string>());
    if (!p) throw ConfigError("scenario", "unknown preset '" + j.at("scenario").get<std::string>() + "'");
    sc = *p;
  } else {
    if (!j.contains("forward")) throw ConfigError("forward", "missing");
    if (!j.contains("prior")) throw ConfigError("prior", "missing");
    sc.name = "custom";
  }
  if (j.contains("name")) sc.name = j.at("name").get<std::string>();
  if (j.contains("description")) sc.description = j.at("description").get<std::string>();
  if (j.contains("forward")) sc.forward = spectrum_from_json(j.at("forward"), "forward");
  if (j.contains("prior")) sc.prior = spectrum_from_json(j.at("prior"), "prior");
  if (j.contains("smoothness")) {
    const json& s = j.at("smoothness");
    if (!s.is_object()) throw ConfigError("smoothness", "must be an object");
    detail::check_keys(s, {"beta", "mu", "R"}, "smoothness");
    if (!s.contains("beta") && !s.contains("mu")) throw ConfigError("smoothness", "needs beta or mu");
    SmoothnessSpec sm;
    if (s.contains("beta")) sm.beta = detail::num_at(s, "beta", "smoothness");
    if (s.contains("mu")) sm.mu = detail::num_at(s, "mu", "smoothness");
    if (s.contains("R")) sm.R = detail::num_at(s, "R", "smoothness");
    if (s.contains("mu") && !(sm.mu > 0.0)) throw ConfigError("smoothness.mu", "must be positive");
    sc.smoothness = sm;
  }
  if (j.contains("mode")) {
    const json& m = j.at("mode");
    std::string type;
    if (m.is_string()) {
      type = m.get<std::string>();
    } else if (m.is_object()) {
      detail::check_keys(m, {"type", "eps", "seed", "N", "a"}, "mode");
      if (!m.contains("type") || !m.at("type").is_string()) throw ConfigError("mode.type", "missing");
      type = m.at("type").get<std::string>();
    } else {
      throw ConfigError("mode", "must be a string or an object");
    }
    ModeSpec ms;
    if (type == "commuting_diagonal") {
      ms.type = ModeSpec::Type::commuting_diagonal;
    } else if (type == "noncommuting_dense") {
      ms.type = ModeSpec::Type::noncommuting_dense;
    } else {
      throw ConfigError("mode.type", "unknown mode '" + type + "'");
    }
    if (m.is_object()) {
      if (m.contains("eps")) ms.eps = detail::num_at(m, "eps", "mode");
      if (m.contains("seed")) ms.seed = m.at("seed").get<std::uint64_t>();
      if (m.contains("N")) ms.N = m.at("N").get<long long>();
      if (m.contains("a")) ms.a = detail::num_at(m, "a", "mode");
    }
    sc.mode = ms;
  }
  if (j.contains("n_grid")) sc.n_grid = detail::num_list(j.at("n_grid"), "n_grid");
  if (j.contains("sim_grid")) sc.sim_grid = detail::num_list(j.at("sim_grid"), "sim_grid");
  if (j.contains("delta_grid")) sc.delta_grid = detail::num_list(j.at("delta_grid"), "delta_grid");
  if (j.contains("N")) {
    if (!j.at("N").is_number_integer()) throw ConfigError("N", "must be an integer");
    sc.N = j.at("N").get<long long>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed", "must be a non-negative integer");
    sc.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("constants")) {
    const json& c = j.at("constants");
    if (!c.is_object()) throw ConfigError("constants", "must be an object");
    detail::check_keys(c, {"c_a", "c3", "c4", "c9", "M", "C_P", "C_B", "c7", "c8"}, "constants");
    BoundConstants& k = sc.constants;
    auto opt = [&](const char* key, double& dst) {
      if (c.contains(key)) dst = detail::num_at(c, key, "constants");
    };
    opt("c_a", k.c_a); opt("c3", k.c3); opt("c4", k.c4); opt("c9", k.c9); opt("M", k.M);
    opt("C_P", k.C_P); opt("C_B", k.C_B); opt("c7", k.c7); opt("c8", k.c8);
  }
  sc.validate();
  return sc;
}

inline Scenario scenario_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

inline json scenario_to_json(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  j["description"] = sc.description;
  j["forward"] = spectrum_to_json(sc.forward);
  j["prior"] = spectrum_to_json(sc.prior);
  j["smoothness"] = {{"beta", sc.smoothness.beta}, {"R", sc.smoothness.R}};
  if (sc.smoothness.mu > 0.0) j["smoothness"]["mu"] = sc.smoothness.mu;
  if (sc.mode.type == ModeSpec::Type::commuting_diagonal) {
    j["mode"] = "commuting_diagonal";
  } else {
    j["mode"] = {{"type", "noncommuting_dense"}, {"eps", sc.mode.eps}, {"seed", sc.mode.seed},
                 {"N", sc.mode.N}, {"a", sc.mode.a}};
  }
  j["n_grid"] = sc.n_grid;
  j["sim_grid"] = sc.sim_grid;
  j["delta_grid"] = sc.delta_grid;
  j["N"] = sc.N;
  j["seed"] = sc.seed;
  const auto& c = sc.constants;
  j["constants"] = {{"c_a", c.c_a}, {"c3", c.c3}, {"c4", c.c4}, {"c9", c.c9}, {"M", c.M},
                    {"C_P", c.C_P}, {"C_B", c.C_B}, {"c7", c.c7}, {"c8", c.c8}};
  return j;
}

// CSV with a header row; numbers at 12 significant digits.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  static std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
  }
  static std::string fmt(long long x) { return std::to_string(x); }
  static std::string fmt(bool x) { return x ? "true" : "false"; }
  static std::string fmt(const std::string& s) { return s; }
  static std::string fmt(const char* s) { return s; }

  template <class... T>
  void add(const T&... cells) {
    rows_.push_back({fmt(cells)...});
  }

  void write(std::ostream& out) const {
    line(out, header_);
    for (const auto& r : rows_) line(out, r);
  }
  std::string str() const {
    std::ostringstream o;
    write(o);
    return o.str();
  }
  std::size_t size() const { return rows_.size(); }

 private:
  static void line(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  }
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace tgprior
