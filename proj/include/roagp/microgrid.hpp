#pragma once

#include <optional>
#include <string>
#include <vector>

#include "roagp/dae_system.hpp"
#include "roagp/types.hpp"

namespace roagp {

// Branch susceptance scaling event: at `time` the listed branch (1-based
// index into the config's branch list) is multiplied by `scale`, and
// restored `clear_after` seconds later. Event times snap to the integration
// grid.
struct Disturbance {
  int branch = 0;
  double time = 0.0;
  double scale = 0.0;
  double clear_after = 0.0;
};

struct SimulationSettings {
  double t_n = 15.0;
  double dt = 1e-3;
  double xi = 1e-3;
};

struct BranchSpec {
  int from = 0;  // 1-based bus ids
  int to = 0;
  double susceptance = 0.0;
};

struct BusSetPoint {
  int bus = 0;
  double p = 0.0;
  double q = 0.0;
  double u = 1.0;
};

struct InverterGains {
  int bus = 0;
  double kp = 0.0;
  double kq = 0.0;
};

// Validated droop-microgrid description. Inverter buses carry the
// differential states (angle, frequency, voltage, secondary control);
// load buses are held on the constant-power constraint manifold.
struct MicrogridConfig {
  int buses = 0;
  std::vector<int> inverter_buses;  // 1-based, sorted
  std::vector<int> load_buses;      // 1-based, sorted
  std::vector<BranchSpec> branches;
  std::vector<BusSetPoint> set_points;  // one per bus, sorted by bus
  double omega_star = 0.0;
  std::vector<InverterGains> gains;  // one per inverter bus, sorted by bus
  Mat laplacian;                     // nI x nI, symmetric, connected
  double reference_anchor_gain = 1.0;
  std::optional<Disturbance> disturbance;
  SimulationSettings simulation;

  int n_inverters() const { return static_cast<int>(inverter_buses.size()); }
  int n_loads() const { return static_cast<int>(load_buses.size()); }

  // Throws ConfigError naming the offending key.
  void validate(bool require_connected = true) const;

  // Dense symmetric susceptance matrix (zero diagonal).
  Mat susceptance_matrix() const;

  // Copy with one branch's susceptance multiplied by `scale`.
  MicrogridConfig with_branch_scaled(int branch_index_1based, double scale) const;

  static MicrogridConfig from_json_text(const std::string& text);
  static MicrogridConfig from_file(const std::string& path);
};

// State layout of the differential vector x (nI = #inverters):
//   [theta_I | omega_I | U_I | zeta]  ->  n = 4 nI
// and of the algebraic vector y (nL = #loads):
//   [theta_L | U_L]                   ->  m = 2 nL
// Angles in rad, frequency absolute rad/s, voltages per unit.
DaeDynamics microgrid_dynamics(const MicrogridConfig& config);

// Locates the equilibrium from the set points (flat-angle, set-point-voltage
// start) and wraps everything into a DaeSystem. Throws ModelInfeasible on
// active-power imbalance (|sum P*| > 1e-8) or Newton failure.
DaeSystem microgrid_build(const MicrogridConfig& config);

// Active/reactive injections at all buses for given full-network angle and
// voltage profiles (used by tests and the power-flow residuals).
void microgrid_injections(const Mat& b, const Vec& theta, const Vec& u, Vec& p, Vec& q);

}  // namespace roagp
