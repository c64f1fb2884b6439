#include "sgld/harness/result.hpp"

#include <cmath>
#include <set>

#include "sgld/random.hpp"

namespace sgld::harness {

using nlohmann::json;

namespace {

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

bool MetricRow::operator==(const MetricRow& o) const {
  const bool overlay_same = overlay.has_value() == o.overlay.has_value() && (!overlay || same(*overlay, *o.overlay));
  return key == o.key && metric == o.metric && same(x, o.x) && same(value, o.value) && same(ci_lo, o.ci_lo) &&
         same(ci_hi, o.ci_hi) && overlay_same && seed == o.seed && source == o.source;
}

json number_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
  }
  if (j.is_null()) return std::nan("");
  return j.get<double>();
}

bool ExperimentResult::all_pass() const {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return true;
}

json ExperimentResult::provenance() const {
  std::set<std::string> sources;
  for (const auto& r : rows) sources.insert(r.source);
  json rows_trace = json::array();
  for (const auto& r : rows) {
    const auto sep = r.source.find("::");
    rows_trace.push_back({{"key", r.key},
                          {"metric", r.metric},
                          {"module", r.source.substr(0, sep)},
                          {"operation", sep == std::string::npos ? "" : r.source.substr(sep + 2)},
                          {"seed", r.seed}});
  }
  return {{"generator", std::string(kGeneratorId)},
          {"master_seed", master_seed},
          {"program", "sgldlab"},
          {"sources", sources},
          {"rows", rows_trace}};
}

json ExperimentResult::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["config"] = config;
  j["master_seed"] = master_seed;
  j["wall_clock_s"] = wall_clock_s;
  json rs = json::array();
  for (const auto& r : rows) {
    json e{{"key", r.key},
           {"metric", r.metric},
           {"x", number_to_json(r.x)},
           {"value", number_to_json(r.value)},
           {"ci_lo", number_to_json(r.ci_lo)},
           {"ci_hi", number_to_json(r.ci_hi)},
           {"seed", r.seed},
           {"source", r.source}};
    if (r.overlay) e["overlay"] = number_to_json(*r.overlay);
    rs.push_back(std::move(e));
  }
  j["rows"] = std::move(rs);
  json vs = json::array();
  for (const auto& v : verdicts)
    vs.push_back({{"name", v.name}, {"pass", v.pass}, {"margin", number_to_json(v.margin)}, {"detail", v.detail}});
  j["verdicts"] = std::move(vs);
  json es = json::array();
  for (const auto& e : errors) es.push_back({{"key", e.key}, {"message", e.message}});
  j["errors"] = std::move(es);
  j["extra"] = extra;
  j["provenance"] = provenance();
  return j;
}

ExperimentResult ExperimentResult::from_json(const json& j) {
  ExperimentResult r;
  r.experiment = j.at("experiment").get<std::string>();
  r.config = j.at("config");
  r.master_seed = j.at("master_seed").get<std::uint64_t>();
  r.wall_clock_s = j.at("wall_clock_s").get<double>();
  for (const auto& e : j.at("rows")) {
    MetricRow row;
    row.key = e.at("key").get<std::string>();
    row.metric = e.at("metric").get<std::string>();
    row.x = number_from_json(e.at("x"));
    row.value = number_from_json(e.at("value"));
    row.ci_lo = number_from_json(e.at("ci_lo"));
    row.ci_hi = number_from_json(e.at("ci_hi"));
    if (e.contains("overlay")) row.overlay = number_from_json(e.at("overlay"));
    row.seed = e.at("seed").get<std::uint64_t>();
    row.source = e.at("source").get<std::string>();
    r.rows.push_back(std::move(row));
  }
  for (const auto& e : j.at("verdicts"))
    r.verdicts.push_back({e.at("name").get<std::string>(), e.at("pass").get<bool>(),
                          number_from_json(e.at("margin")), e.at("detail").get<std::string>()});
  if (j.contains("errors"))
    for (const auto& e : j.at("errors"))
      r.errors.push_back({e.at("key").get<std::string>(), e.at("message").get<std::string>()});
  if (j.contains("extra")) r.extra = j.at("extra");
  return r;
}

bool ExperimentResult::operator==(const ExperimentResult& o) const {
  return experiment == o.experiment && config == o.config && rows == o.rows && verdicts == o.verdicts &&
         errors == o.errors && extra == o.extra && wall_clock_s == o.wall_clock_s && master_seed == o.master_seed;
}

}  // namespace sgld::harness
