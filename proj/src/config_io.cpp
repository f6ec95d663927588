// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#include "stargml/config_io.hpp"

#include <fstream>
#include <initializer_list>
#include <string_view>
#include <tuple>

#include "stargml/errors.hpp"

namespace stargml {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::string_view section,
                    std::initializer_list<std::string_view> known) {
  if (!obj.is_object()) {
    throw ConfigError("config section '" + std::string(section) +
                      "' must be an object");
  }
  for (const auto& item : obj.items()) {
    bool found = false;
    for (auto k : known) found = found || item.key() == k;
    if (!found) {
      throw ConfigError("unknown config key '" + std::string(section) + "." +
                        item.key() + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void read_count(const json& obj, const char* key, std::size_t& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw ConfigError(std::string("'") + key + "' must be a positive integer");
  }
  out = v.get<std::size_t>();
}

void read_point(const json& obj, const char* key, Point2& out) {
  if (!obj.contains(key)) return;
  const auto xy = obj.at(key).get<std::vector<double>>();
  if (xy.size() != 2) {
    throw ConfigError(std::string("'") + key + "' must be [x, y]");
  }
  out = {xy[0], xy[1]};
}

Side parse_side(const std::string& name) {
  if (name == "transmission") return Side::transmission;
  if (name == "reflection") return Side::reflection;
  throw ConfigError("unknown user side '" + name + "'");
}

LosModel parse_los(const std::string& name) {
  if (name == "ula_steering") return LosModel::ula_steering;
  if (name == "all_ones") return LosModel::all_ones;
  throw ConfigError("unknown los model '" + name + "'");
}

PnInput parse_pn_input(const std::string& name) {
  if (name == "split") return PnInput::split;
  if (name == "stacked") return PnInput::stacked;
  throw ConfigError("unknown pn_input '" + name + "'");
}

void parse_system(const json& s, SystemConfig& sys) {
  reject_unknown(s, "system", {"M", "N", "K", "p_max_w", "noise_power_w",
                               "weights", "user_sides"});
  const std::size_t old_k = sys.K;
  read_count(s, "M", sys.M);
  read_count(s, "N", sys.N);
  read_count(s, "K", sys.K);
  read(s, "p_max_w", sys.p_max);
  read(s, "noise_power_w", sys.noise_power);
  if (sys.K != old_k) {
    const auto fresh =
        SystemConfig::make(sys.M, sys.N, sys.K, sys.p_max, sys.noise_power);
    sys.weights = fresh.weights;
    sys.user_sides = fresh.user_sides;
  }
  read(s, "weights", sys.weights);
  if (s.contains("user_sides")) {
    sys.user_sides.clear();
    for (const auto& name : s.at("user_sides").get<std::vector<std::string>>()) {
      sys.user_sides.push_back(parse_side(name));
    }
  }
}

void parse_channel(const json& c, ChannelConfig& ch) {
  reject_unknown(c, "channel",
                 {"rician_k_g", "rician_k_h", "bs_position_m", "ris_position_m",
                  "transmission_center_m", "reflection_center_m",
                  "user_radius_m", "pathloss_a_db", "pathloss_b_db", "los",
                  "seed"});
  read(c, "rician_k_g", ch.rician_k_g);
  read(c, "rician_k_h", ch.rician_k_h);
  read_point(c, "bs_position_m", ch.bs_pos);
  read_point(c, "ris_position_m", ch.ris_pos);
  read_point(c, "transmission_center_m", ch.transmission_center);
  read_point(c, "reflection_center_m", ch.reflection_center);
  read(c, "user_radius_m", ch.user_area_radius);
  read(c, "pathloss_a_db", ch.pathloss_a);
  read(c, "pathloss_b_db", ch.pathloss_b);
  if (c.contains("los")) ch.los = parse_los(c.at("los").get<std::string>());
  read(c, "seed", ch.seed);
}

void parse_train(const json& t, TrainConfig& tr) {
  reject_unknown(t, "train",
                 {"n_epochs", "n_outer", "n_inner", "lr_w", "lr_a", "lr_theta",
                  "n1", "n2", "mode", "rho_min", "rho_max",
                  "regulator_lambda_rad", "pn_input", "seed"});
  read_count(t, "n_epochs", tr.n_epochs);
  read_count(t, "n_outer", tr.n_outer);
  read_count(t, "n_inner", tr.n_inner);
  read(t, "lr_w", tr.lr_w);
  read(t, "lr_a", tr.lr_a);
  read(t, "lr_theta", tr.lr_theta);
  read_count(t, "n1", tr.n1);
  read_count(t, "n2", tr.n2);
  if (t.contains("mode")) tr.mode = parse_phase_model(t.at("mode").get<std::string>());
  read(t, "rho_min", tr.penalty.rho_min);
  read(t, "rho_max", tr.penalty.rho_max);
  read(t, "regulator_lambda_rad", tr.regulator.lambda);
  if (t.contains("pn_input")) {
    tr.pn_input = parse_pn_input(t.at("pn_input").get<std::string>());
  }
  read(t, "seed", tr.seed);
}

json point_json(const Point2& p) { return json::array({p.x, p.y}); }

}  // namespace

void RunConfig::validate() const {
  system.validate();
  channel.validate();
  train.validate();
}

RunConfig desk_run_config() {
  RunConfig cfg;
  std::tie(cfg.system, cfg.channel) = desk_scenario();
  cfg.train.n_epochs = 300;
  return cfg;
}

RunConfig paper_run_config() {
  RunConfig cfg;
  std::tie(cfg.system, cfg.channel) = default_scenario();
  cfg.train.n_epochs = 500;
  return cfg;
}

PhaseModel parse_phase_model(const std::string& name) {
  if (name == "independent") return PhaseModel::independent;
  if (name == "coupled") return PhaseModel::coupled;
  throw ConfigError("unknown phase model '" + name + "'");
}

std::string to_string(PhaseModel mode) {
  return mode == PhaseModel::coupled ? "coupled" : "independent";
}

RunConfig parse_run_config(const json& doc, RunConfig base) {
  try {
    reject_unknown(doc, "<root>", {"system", "channel", "train"});
    if (doc.contains("system")) parse_system(doc.at("system"), base.system);
    if (doc.contains("channel")) parse_channel(doc.at("channel"), base.channel);
    if (doc.contains("train")) parse_train(doc.at("train"), base.train);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  base.validate();
  return base;
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_run_config(doc, std::move(base));
}

json to_json(const RunConfig& cfg) {
  json sides = json::array();
  for (Side s : cfg.system.user_sides) {
    sides.push_back(s == Side::transmission ? "transmission" : "reflection");
  }
  const auto& c = cfg.channel;
  const auto& t = cfg.train;
  return {
      {"system",
       {{"M", cfg.system.M},
        {"N", cfg.system.N},
        {"K", cfg.system.K},
        {"p_max_w", cfg.system.p_max},
        {"noise_power_w", cfg.system.noise_power},
        {"weights", cfg.system.weights},
        {"user_sides", sides}}},
      {"channel",
       {{"rician_k_g", c.rician_k_g},
        {"rician_k_h", c.rician_k_h},
        {"bs_position_m", point_json(c.bs_pos)},
        {"ris_position_m", point_json(c.ris_pos)},
        {"transmission_center_m", point_json(c.transmission_center)},
        {"reflection_center_m", point_json(c.reflection_center)},
        {"user_radius_m", c.user_area_radius},
        {"pathloss_a_db", c.pathloss_a},
        {"pathloss_b_db", c.pathloss_b},
        {"los", c.los == LosModel::all_ones ? "all_ones" : "ula_steering"},
        {"seed", c.seed}}},
      {"train",
       {{"n_epochs", t.n_epochs},
        {"n_outer", t.n_outer},
        {"n_inner", t.n_inner},
        {"lr_w", t.lr_w},
        {"lr_a", t.lr_a},
        {"lr_theta", t.lr_theta},
        {"n1", t.n1},
        {"n2", t.n2},
        {"mode", to_string(t.mode)},
        {"rho_min", t.penalty.rho_min},
        {"rho_max", t.penalty.rho_max},
        {"regulator_lambda_rad", t.regulator.lambda},
        {"pn_input", t.pn_input == PnInput::stacked ? "stacked" : "split"},
        {"seed", t.seed}}},
  };
}

json solution_to_json(const Solution& sol) {
  json W = json::array();
  for (Eigen::Index m = 0; m < sol.W_opt.rows(); ++m) {
    json row = json::array();
    for (Eigen::Index k = 0; k < sol.W_opt.cols(); ++k) {
      row.push_back({sol.W_opt(m, k).real(), sol.W_opt(m, k).imag()});
    }
    W.push_back(row);
  }
  auto vec = [](const RVector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  json out = {{"wsr_opt", sol.wsr_opt},
              {"epochs", sol.trace.size()},
              {"W_opt", W},
              {"beta_opt", vec(sol.beta_opt)},
              {"theta_opt", vec(sol.theta_opt)}};
  out["feasible_coupled"] = sol.feasible_coupled;
  out["wsr_unprojected"] = sol.wsr_unprojected;
  out["residual_unprojected"] = sol.residual_unprojected;
  return out;
}

}  // namespace stargml
