#include "cvqss/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace cvqss {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key))
      throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

double num(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
  return obj[key].get<double>();
}

SystemParams parse_params(const json& obj) {
  require_keys(obj, "params",
               {"gamma", "epsilon0", "nu_el", "eta_D", "f_rec", "t_B", "delta", "N0"});
  SystemParams p;
  p.gamma = num(obj, "gamma", p.gamma);
  p.epsilon0 = num(obj, "epsilon0", p.epsilon0);
  p.nu_el = num(obj, "nu_el", p.nu_el);
  p.eta_d = num(obj, "eta_D", p.eta_d);
  p.f_rec = num(obj, "f_rec", p.f_rec);
  p.t_b = num(obj, "t_B", p.t_b);
  p.delta = num(obj, "delta", p.delta);
  p.n0 = num(obj, "N0", p.n0);
  p.validate();
  return p;
}

NetworkLayout parse_layout(const json& obj) {
  require_keys(obj, "layout", {"n", "L", "distances"});
  if (obj.contains("distances")) {
    if (obj.contains("n") &&
        obj["n"].get<std::size_t>() != obj["distances"].size())
      throw ConfigError("layout n does not match distances length");
    return NetworkLayout::with_distances(obj["distances"].get<std::vector<double>>());
  }
  if (!obj.contains("n")) throw ConfigError("layout needs n");
  return NetworkLayout::equal_spacing(obj["n"].get<int>(), num(obj, "L", 0.0));
}

OptimizeOptions parse_optimizer(const json& obj) {
  require_keys(obj, "optimizer", {"v_lo", "v_hi", "grid_points", "refine_iters"});
  OptimizeOptions o;
  o.v_lo = num(obj, "v_lo", o.v_lo);
  o.v_hi = num(obj, "v_hi", o.v_hi);
  if (obj.contains("grid_points")) o.grid_points = obj["grid_points"].get<int>();
  if (obj.contains("refine_iters")) o.refine_iters = obj["refine_iters"].get<int>();
  return o;
}

std::vector<double> parse_lengths(const json& node) {
  if (node.is_array()) return node.get<std::vector<double>>();
  if (node.is_object()) {
    require_keys(node, "sweep.lengths", {"from", "to", "step"});
    const double from = num(node, "from", 0.0);
    const double to = num(node, "to", 0.0);
    const double step = num(node, "step", 1.0);
    if (!(step > 0.0) || to < from) throw ConfigError("bad sweep length range");
    std::vector<double> out;
    for (int i = 0;; ++i) {
      const double l = from + step * i;
      if (l > to + 1e-9) break;
      out.push_back(l);
    }
    return out;
  }
  throw ConfigError("sweep lengths must be an array or a {from,to,step} range");
}

SweepSpec parse_sweep(const json& obj, const SystemParams& params,
                      const OptimizeOptions& optimizer) {
  require_keys(obj, "sweep", {"lengths", "players", "deltas"});
  SweepSpec spec;
  spec.params = params;
  spec.optimizer = optimizer;
  if (!obj.contains("lengths") || !obj.contains("players"))
    throw ConfigError("sweep needs lengths and players");
  spec.lengths = parse_lengths(obj["lengths"]);
  spec.players = obj["players"].get<std::vector<int>>();
  if (obj.contains("deltas")) spec.deltas = obj["deltas"].get<std::vector<double>>();
  spec.validate();
  return spec;
}

PostprocessOptions parse_postprocess(const json& obj) {
  require_keys(obj, "postprocess",
               {"t_fraction", "round_disclose_fraction", "min_samples", "abort_sigma",
                "tamper_sigma", "round_weights"});
  PostprocessOptions o;
  o.t_fraction = num(obj, "t_fraction", o.t_fraction);
  o.round_disclose_fraction = num(obj, "round_disclose_fraction", o.round_disclose_fraction);
  if (obj.contains("min_samples")) o.min_samples = obj["min_samples"].get<std::size_t>();
  o.abort_sigma = num(obj, "abort_sigma", o.abort_sigma);
  o.tamper_sigma = num(obj, "tamper_sigma", o.tamper_sigma);
  if (obj.contains("round_weights"))
    o.round_weights = obj["round_weights"].get<std::vector<double>>();
  if (!(o.t_fraction > 0.0 && o.t_fraction < 1.0))
    throw ConfigError("t_fraction must be in (0, 1)");
  if (!(o.round_disclose_fraction > 0.0 && o.round_disclose_fraction < 1.0))
    throw ConfigError("round_disclose_fraction must be in (0, 1)");
  return o;
}

}  // namespace

Config Config::from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("config is not valid JSON: ") + err.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");
  require_keys(root, "config root",
               {"params", "layout", "va", "optimizer", "sweep", "simulate", "postprocess"});

  Config cfg;
  if (root.contains("params")) cfg.params = parse_params(root["params"]);
  if (root.contains("layout")) cfg.layout = parse_layout(root["layout"]);
  if (root.contains("va")) {
    cfg.va = root["va"].get<double>();
    if (!(*cfg.va > 0.0)) throw ConfigError("va must be > 0");
  }
  if (root.contains("optimizer")) cfg.optimizer = parse_optimizer(root["optimizer"]);
  if (root.contains("simulate")) {
    require_keys(root["simulate"], "simulate", {"pulses"});
    if (root["simulate"].contains("pulses"))
      cfg.pulses = root["simulate"]["pulses"].get<std::size_t>();
  }
  if (root.contains("postprocess")) cfg.postprocess = parse_postprocess(root["postprocess"]);
  if (root.contains("sweep"))
    cfg.sweep = parse_sweep(root["sweep"], cfg.params, cfg.optimizer);
  return cfg;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

const NetworkLayout& Config::require_layout() const {
  if (!layout) throw ConfigError("this command needs a layout section in the config");
  return *layout;
}

}  // namespace cvqss
