#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "roagp/assessment.hpp"
#include "roagp/types.hpp"

namespace roagp {

// FNV-1a over the raw bytes; used to stamp outputs with the exact
// configuration they came from.
std::uint64_t fnv1a64(const std::string& bytes);

// First line of every CSV we emit:
//   # roagp <version> config_hash=<16 hex digits> seed=<n>
std::string csv_header_line(std::uint64_t config_hash, std::uint64_t seed);

// Fixed decimal formatting (%.15g) so identical runs emit identical bytes.
std::string format_double(double v);

// Columns t, x_1..x_n; one row per sample.
void write_trajectory_csv(std::ostream& out, const std::vector<double>& times,
                          const std::vector<Vec>& states);

// Columns step, x_axis, y_axis, mu, sigma, member (member as 0/1).
void write_roa_csv(std::ostream& out, const RoaEstimate& estimate);

// Columns step, x_1..x_n, accepted, v_hat, wall_ms.
void write_log_csv(std::ostream& out, const AssessmentLog& log, int state_dim);

}  // namespace roagp
