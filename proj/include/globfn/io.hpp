#pragma once

// JSON views of the reports. Doubles are written by nlohmann::json, which
// emits the shortest representation that round-trips exactly.

#include <fstream>
#include <string>

#include "json.hpp"

#include "globfn/experiments.hpp"
#include "globfn/landscape.hpp"
#include "globfn/stationarity.hpp"

namespace globfn {

using Json = nlohmann::ordered_json;

inline Json to_json(const GridReport& rep) {
  Json minima = Json::array();
  for (const auto& m : rep.grid_local_minima) {
    minima.push_back({{"point", m.point}, {"value", m.value}});
  }
  Json plateaus = Json::array();
  for (const auto& p : rep.plateaus) {
    plateaus.push_back({{"members", p.members},
                        {"value", p.value},
                        {"spread", p.spread},
                        {"global", p.global},
                        {"strict", p.strict}});
  }
  return Json{{"grid_local_minima", std::move(minima)},
              {"plateaus", std::move(plateaus)},
              {"global_value", rep.global_value},
              {"verdict", to_string(rep.verdict)},
              {"tolerance", rep.tolerance}};
}

inline Json to_json(const StationarityReport& rep) {
  Json intervals = Json::array();
  for (const auto& iv : rep.per_coordinate_interval) intervals.push_back({iv.lo, iv.hi});
  return Json{{"stationary", rep.stationary},
              {"per_coordinate_interval", std::move(intervals)},
              {"lemma1_zero_pattern_ok", rep.lemma1_zero_pattern_ok},
              {"lemma1_ratio_bound_ok", rep.lemma1_ratio_bound_ok},
              {"max_ratio_product", rep.max_ratio_product}};
}

inline Json to_json(const Staircase& s) {
  Json jumps = Json::array();
  for (const auto& j : s.jumps()) jumps.push_back({{"point", j.point}, {"weight", j.weight}});
  return Json{{"jumps", std::move(jumps)}, {"base", s.base()}};
}

inline Json to_json(const ExperimentResult& result) {
  Json rows = Json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"mode", to_string(r.mode)},
                    {"n", r.n},
                    {"num_noisy", r.num_noisy},
                    {"trials", r.trials},
                    {"successes", r.successes},
                    {"rate", r.rate},
                    {"mean_rel_err", r.mean_relative_error},
                    {"errors", r.errors}});
  }
  return Json{{"rows", std::move(rows)}};
}

inline Json to_json(const std::vector<ConvergenceRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) out.push_back({{"p", r.p}, {"sup_distance", r.sup_distance}});
  return out;
}

inline void write_json(const Json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << '\n';
}

inline bool has_extension(const std::string& path, const std::string& ext) {
  return path.size() >= ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0;
}

}  // namespace globfn
