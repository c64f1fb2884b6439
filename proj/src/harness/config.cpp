#include "sgld/harness/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>

#include "sgld/errors.hpp"

namespace sgld::harness {

using nlohmann::json;

namespace {

constexpr std::pair<ExperimentId, std::string_view> kIds[] = {
    {ExperimentId::GenGap, "gen-gap"},
    {ExperimentId::SaConvergence, "sa-convergence"},
    {ExperimentId::SaDiscretization, "sa-discretization"},
    {ExperimentId::LemmaSuite, "lemma-suite"},
    {ExperimentId::BoundsReport, "bounds-report"},
    {ExperimentId::RademacherStudy, "rademacher-study"},
    {ExperimentId::Run, "run"},
};

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception& e) {
      throw UsageError(std::string("config field '") + key + "': " + e.what());
    }
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  const std::set<std::string> k(known.begin(), known.end());
  for (const auto& [key, _] : j.items()) {
    if (!k.count(key)) throw UsageError(std::string("unknown ") + where + " field '" + key + "'");
  }
}

template <class T>
void require_sorted(const std::vector<T>& v, const char* name) {
  if (v.empty()) throw UsageError(std::string(name) + " must be non-empty");
  if (!std::is_sorted(v.begin(), v.end())) throw UsageError(std::string(name) + " must be sorted ascending");
}

}  // namespace

std::string_view to_string(ExperimentId id) {
  for (const auto& [k, name] : kIds)
    if (k == id) return name;
  return "unknown";
}

ExperimentId parse_experiment_id(std::string_view name) {
  for (const auto& [k, n] : kIds)
    if (n == name) return k;
  throw UsageError("unknown experiment '" + std::string(name) + "'");
}

LossModel ModelSpec::build() const {
  DataDistribution dist;
  switch (parse_data_kind(data)) {
    case DataKind::UniformBall: dist = DataDistribution::ball(data_scale); break;
    case DataKind::UniformCube: dist = DataDistribution::cube(data_scale); break;
    case DataKind::PointMass: dist = DataDistribution::point_mass(data_point.empty() ? std::vector<double>(d, 0.0) : data_point); break;
  }
  switch (parse_loss_family(family)) {
    case LossFamily::QuadraticData: return LossModel::quadratic_data(d, dist);
    case LossFamily::Ripple: return LossModel::ripple(d, mu, eps, dist);
    case LossFamily::SmoothedDoubleWell:
      if (d != 1) throw UsageError("smoothed-double-well is one-dimensional");
      return LossModel::smoothed_double_well(w_cut, dist);
  }
  throw UsageError("unknown model family");
}

Schedule ScheduleSpec::build() const {
  if (kind == "constant") return Schedule::constant(gamma);
  if (kind == "iterated-log") return offset > 0.0 ? Schedule::iterated_log(offset) : Schedule::iterated_log();
  throw UsageError("unknown schedule kind '" + kind + "' (expected iterated-log | constant)");
}

void ExperimentConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    throw UsageError("config schema_version " + std::to_string(schema_version) + " is not supported (expected " +
                     std::to_string(kSchemaVersion) + ")");
  }
  require_sorted(n_values, "n_values");
  require_sorted(s_values, "s_values");
  require_sorted(t_values, "t_values");
  require_sorted(h_values, "h_values");
  require_sorted(r_values, "r_values");
  if (replicas == 0 || draws == 0 || K == 0 || n == 0) throw UsageError("counts must be positive");
  if (!(step > 0.0)) throw UsageError("step must be positive");
  if (!x0.empty() && x0.size() != model.d) throw UsageError("x0 length must equal the model dimension");
}

json ExperimentConfig::to_json() const {
  json j;
  j["schema_version"] = schema_version;
  j["experiment"] = std::string(to_string(experiment));
  j["model"] = {{"family", model.family}, {"d", model.d},         {"mu", model.mu},
                {"eps", model.eps},       {"w_cut", model.w_cut}, {"data", model.data},
                {"data_scale", model.data_scale}, {"data_point", model.data_point}};
  j["schedule"] = {{"kind", schedule.kind}, {"gamma", schedule.gamma}, {"offset", schedule.offset}};
  j["n_values"] = n_values;
  j["s_values"] = s_values;
  j["t_values"] = t_values;
  j["h_values"] = h_values;
  j["r_values"] = r_values;
  j["n"] = n;
  j["replicas"] = replicas;
  j["draws"] = draws;
  j["K"] = K;
  j["optimizer"] = optimizer;
  j["beta"] = beta;
  j["t"] = t;
  j["step"] = step;
  j["p"] = p;
  j["delta"] = delta;
  j["x0"] = x0;
  j["process"] = process;
  j["negative_control"] = negative_control;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["policy"] = std::string(sgld::to_string(policy));
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  reject_unknown(j,
                 {"schema_version", "experiment", "model", "schedule", "n_values", "s_values", "t_values", "h_values",
                  "r_values", "n", "replicas", "draws", "K", "optimizer", "beta", "t", "step", "p", "delta", "x0",
                  "process", "negative_control", "seed", "output_dir", "policy"},
                 "config");
  ExperimentConfig c;
  if (!j.contains("schema_version")) throw UsageError("config is missing schema_version");
  read(j, "schema_version", c.schema_version);
  std::string id;
  read(j, "experiment", id);
  if (!id.empty()) c.experiment = parse_experiment_id(id);
  if (j.contains("model")) {
    const auto& m = j.at("model");
    reject_unknown(m, {"family", "d", "mu", "eps", "w_cut", "data", "data_scale", "data_point"}, "model");
    read(m, "family", c.model.family);
    read(m, "d", c.model.d);
    read(m, "mu", c.model.mu);
    read(m, "eps", c.model.eps);
    read(m, "w_cut", c.model.w_cut);
    read(m, "data", c.model.data);
    read(m, "data_scale", c.model.data_scale);
    read(m, "data_point", c.model.data_point);
  }
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    reject_unknown(s, {"kind", "gamma", "offset"}, "schedule");
    read(s, "kind", c.schedule.kind);
    read(s, "gamma", c.schedule.gamma);
    read(s, "offset", c.schedule.offset);
  }
  read(j, "n_values", c.n_values);
  read(j, "s_values", c.s_values);
  read(j, "t_values", c.t_values);
  read(j, "h_values", c.h_values);
  read(j, "r_values", c.r_values);
  read(j, "n", c.n);
  read(j, "replicas", c.replicas);
  read(j, "draws", c.draws);
  read(j, "K", c.K);
  read(j, "optimizer", c.optimizer);
  read(j, "beta", c.beta);
  read(j, "t", c.t);
  read(j, "step", c.step);
  read(j, "p", c.p);
  read(j, "delta", c.delta);
  read(j, "x0", c.x0);
  read(j, "process", c.process);
  read(j, "negative_control", c.negative_control);
  read(j, "seed", c.seed);
  read(j, "output_dir", c.output_dir);
  std::string policy;
  read(j, "policy", policy);
  if (policy == "serial") {
    c.policy = ExecutionPolicy::Serial;
  } else if (policy.empty() || policy == "parallel") {
    c.policy = ExecutionPolicy::Parallel;
  } else {
    throw UsageError("unknown policy '" + policy + "' (expected serial | parallel)");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("config file " + path.string() + ": " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg) {
  std::filesystem::path p(cfg.output_dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) return std::filesystem::path(root) / p;
  }
  return p;
}

std::uint64_t config_digest(const ExperimentConfig& cfg) {
  json j = cfg.to_json();
  j.erase("output_dir");
  j.erase("policy");
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace sgld::harness
