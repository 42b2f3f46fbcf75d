#include "roagp/csv_io.hpp"

#include <cstdio>

#include "roagp/errors.hpp"
#include "roagp/version.hpp"

namespace roagp {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    hash ^= static_cast<std::uint64_t>(c);
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string csv_header_line(std::uint64_t config_hash, std::uint64_t seed) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "# roagp %s config_hash=%016llx seed=%llu\n", kVersion,
                static_cast<unsigned long long>(config_hash),
                static_cast<unsigned long long>(seed));
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const std::vector<double>& times,
                          const std::vector<Vec>& states) {
  if (times.size() != states.size()) {
    throw ConfigError("trajectory export: times/states length mismatch");
  }
  const Eigen::Index n = states.empty() ? 0 : states.front().size();
  out << 't';
  for (Eigen::Index j = 0; j < n; ++j) out << ",x_" << (j + 1);
  out << '\n';
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (states[i].size() != n) throw ConfigError("trajectory export: ragged state rows");
    out << format_double(times[i]);
    for (Eigen::Index j = 0; j < n; ++j) out << ',' << format_double(states[i][j]);
    out << '\n';
  }
}

void write_roa_csv(std::ostream& out, const RoaEstimate& estimate) {
  out << "step,x_axis,y_axis,mu,sigma,member\n";
  for (const RoaCell& cell : estimate.cells) {
    out << estimate.step << ',' << format_double(cell.x) << ',' << format_double(cell.y) << ','
        << format_double(cell.mu) << ',' << format_double(cell.sigma) << ','
        << (cell.member ? 1 : 0) << '\n';
  }
}

void write_log_csv(std::ostream& out, const AssessmentLog& log, int state_dim) {
  out << "step";
  for (int j = 0; j < state_dim; ++j) out << ",x_" << (j + 1);
  out << ",accepted,v_hat,wall_ms\n";
  for (const LogRecord& rec : log.records) {
    if (rec.x.size() != state_dim) throw ConfigError("log export: record dimension mismatch");
    out << rec.step;
    for (int j = 0; j < state_dim; ++j) out << ',' << format_double(rec.x[j]);
    out << ',' << (rec.accepted ? 1 : 0) << ',' << format_double(rec.v_hat) << ','
        << format_double(rec.wall_ms) << '\n';
  }
}

}  // namespace roagp
