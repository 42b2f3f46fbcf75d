#include "roagp/snapshot.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "roagp/errors.hpp"

namespace roagp {

namespace {

using nlohmann::json;

json matrix_rows(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_entries(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Mat parse_matrix(const json& rows, const char* key) {
  if (!rows.is_array() || rows.empty()) {
    throw ConfigError(std::string("snapshot: key '") + key + "' must be a non-empty array of rows");
  }
  const std::size_t ncols = rows[0].is_array() ? rows[0].size() : 0;
  if (ncols == 0) throw ConfigError(std::string("snapshot: key '") + key + "' has an empty row");
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ncols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != ncols) {
      throw ConfigError(std::string("snapshot: ragged rows under key '") + key + "'");
    }
    for (std::size_t j = 0; j < ncols; ++j) {
      if (!rows[i][j].is_number()) {
        throw ConfigError(std::string("snapshot: non-numeric entry under key '") + key + "'");
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
    }
  }
  return m;
}

Vec parse_vector(const json& entries, const char* key) {
  if (!entries.is_array()) {
    throw ConfigError(std::string("snapshot: key '") + key + "' must be an array");
  }
  Vec v(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].is_number()) {
      throw ConfigError(std::string("snapshot: non-numeric entry under key '") + key + "'");
    }
    v[static_cast<Eigen::Index>(i)] = entries[i].get<double>();
  }
  return v;
}

}  // namespace

std::string snapshot_to_json(const WindowState& state, const ExcludedSet& excluded) {
  json j;
  j["step"] = state.step();
  j["h"] = state.width();
  j["kernel"] = {{"length_scale", state.kernel().length_scale},
                 {"signal_variance", state.kernel().signal_variance},
                 {"noise_variance", state.kernel().noise_variance}};
  j["points"] = matrix_rows(state.points());
  j["observations"] = vector_entries(state.observations());
  j["alpha"] = vector_entries(state.alpha());
  j["C"] = matrix_rows(state.coeff());
  j["K"] = matrix_rows(state.kernel_matrix());
  json ex = json::array();
  for (std::int64_t idx : excluded) ex.push_back(idx);
  j["excluded"] = std::move(ex);
  return j.dump(2) + "\n";
}

Snapshot snapshot_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("snapshot: invalid JSON: ") + e.what());
  }
  for (const char* key : {"step", "h", "kernel", "points", "observations", "alpha", "C", "K"}) {
    if (!j.contains(key)) throw ConfigError(std::string("snapshot: missing key '") + key + "'");
  }
  if (!j.at("step").is_number_integer() || !j.at("h").is_number_integer()) {
    throw ConfigError("snapshot: keys 'step' and 'h' must be integers");
  }
  const json& kj = j.at("kernel");
  if (!kj.is_object()) throw ConfigError("snapshot: key 'kernel' must be an object");
  KernelSpec kernel;
  for (const char* key : {"length_scale", "signal_variance", "noise_variance"}) {
    if (!kj.contains(key) || !kj.at(key).is_number()) {
      throw ConfigError(std::string("snapshot: kernel needs numeric key '") + key + "'");
    }
  }
  kernel.length_scale = kj.at("length_scale").get<double>();
  kernel.signal_variance = kj.at("signal_variance").get<double>();
  kernel.noise_variance = kj.at("noise_variance").get<double>();

  const std::int64_t step = j.at("step").get<std::int64_t>();
  const int h = j.at("h").get<int>();
  Mat points = parse_matrix(j.at("points"), "points");
  Vec observations = parse_vector(j.at("observations"), "observations");
  Vec alpha = parse_vector(j.at("alpha"), "alpha");
  Mat c = parse_matrix(j.at("C"), "C");
  Mat k = parse_matrix(j.at("K"), "K");

  ExcludedSet excluded;
  if (j.contains("excluded")) {
    const json& ex = j.at("excluded");
    if (!ex.is_array()) throw ConfigError("snapshot: key 'excluded' must be an array");
    for (const auto& e : ex) {
      if (!e.is_number_integer()) throw ConfigError("snapshot: 'excluded' entries must be integers");
      excluded.insert(e.get<std::int64_t>());
    }
  }

  return Snapshot{WindowState::restore(kernel, step, h, std::move(points),
                                       std::move(observations), std::move(alpha), std::move(c),
                                       std::move(k)),
                  std::move(excluded)};
}

void save_snapshot(const std::string& path, const WindowState& state,
                   const ExcludedSet& excluded) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("snapshot: cannot open '" + path + "' for writing");
  out << snapshot_to_json(state, excluded);
  if (!out) throw ConfigError("snapshot: write to '" + path + "' failed");
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("snapshot: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return snapshot_from_json(buf.str());
}

}  // namespace roagp
