#pragma once

#include <string>

#include "roagp/assessment.hpp"
#include "roagp/window_gp.hpp"

namespace roagp {

// Window state plus the rejected-point set, as persisted between runs.
struct Snapshot {
  WindowState state;
  ExcludedSet excluded;
};

// JSON with keys step, h, kernel, points (row-major), observations, alpha,
// C, K, excluded. Doubles are emitted in shortest-round-trip form, so
// save -> load -> save is byte-identical and the restored state is bitwise
// equal to the original.
std::string snapshot_to_json(const WindowState& state, const ExcludedSet& excluded);
Snapshot snapshot_from_json(const std::string& text);

void save_snapshot(const std::string& path, const WindowState& state,
                   const ExcludedSet& excluded);
Snapshot load_snapshot(const std::string& path);

}  // namespace roagp
