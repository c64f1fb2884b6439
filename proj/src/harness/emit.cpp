#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sgld/errors.hpp"
#include "sgld/harness/result.hpp"

namespace sgld::harness {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  return s;
}

}  // namespace

EmitFormat parse_emit_format(std::string_view name) {
  if (name == "csv") return EmitFormat::Csv;
  if (name == "json") return EmitFormat::Json;
  if (name == "plot-data") return EmitFormat::PlotData;
  throw UsageError("unknown format '" + std::string(name) + "' (expected csv | json | plot-data)");
}

std::string to_csv(const ExperimentResult& r) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& row : r.rows) {
    os << field(r.experiment) << ',' << field(row.key) << ',' << field(row.metric) << ',' << num(row.x) << ','
       << num(row.value) << ',' << num(row.ci_lo) << ',' << num(row.ci_hi) << ','
       << (row.overlay ? num(*row.overlay) : "") << ',' << row.seed << ',' << field(row.source) << '\n';
  }
  return os.str();
}

std::vector<fs::path> emit(const ExperimentResult& r, EmitFormat format, const fs::path& dir) {
  const std::string stem = sanitize(r.experiment.empty() ? "result" : r.experiment);
  std::vector<fs::path> written;
  switch (format) {
    case EmitFormat::Csv: {
      const auto p = dir / (stem + ".csv");
      write_file(p, to_csv(r));
      written.push_back(p);
      break;
    }
    case EmitFormat::Json: {
      const auto p = dir / (stem + ".json");
      write_file(p, r.to_json().dump(2) + "\n");
      written.push_back(p);
      break;
    }
    case EmitFormat::PlotData: {
      std::map<std::string, std::ostringstream> files;
      for (const auto& row : r.rows) {
        auto& os = files[row.metric];
        if (os.tellp() == 0) os << "x,y,ci_lo,ci_hi,overlay\n";
        os << num(row.x) << ',' << num(row.value) << ',' << num(row.ci_lo) << ',' << num(row.ci_hi) << ','
           << num(row.overlay.value_or(std::nan(""))) << '\n';
      }
      for (auto& [metric, os] : files) {
        const auto p = dir / "plot" / (stem + "__" + sanitize(metric) + ".csv");
        write_file(p, os.str());
        written.push_back(p);
      }
      break;
    }
  }
  return written;
}

ExperimentResult read_result(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    return ExperimentResult::from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

}  // namespace sgld::harness
