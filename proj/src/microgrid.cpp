#include "roagp/microgrid.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

#include "roagp/errors.hpp"

namespace roagp {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw ConfigError("microgrid config: " + msg); }

double num(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) bad(std::string("missing or non-numeric '") + key + "'");
  return j[key].get<double>();
}

int integer(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer()) bad(std::string("missing or non-integer '") + key + "'");
  return j[key].get<int>();
}

}  // namespace

void MicrogridConfig::validate(bool require_connected) const {
  const int M = buses;
  if (M < 2) bad("'buses' must be >= 2");
  if (inverter_buses.empty()) bad("'inverter_buses' must be non-empty");
  std::set<int> seen;
  for (int b : inverter_buses) {
    if (b < 1 || b > M) bad("'inverter_buses' entry out of range");
    if (!seen.insert(b).second) bad("'inverter_buses' entry repeated");
  }
  for (int b : load_buses) {
    if (b < 1 || b > M) bad("'load_buses' entry out of range");
    if (!seen.insert(b).second) bad("bus listed in both 'inverter_buses' and 'load_buses'");
  }
  if (static_cast<int>(seen.size()) != M) bad("'inverter_buses' + 'load_buses' must partition 1..buses");

  if (branches.empty()) bad("'branches' must be non-empty");
  std::set<std::pair<int, int>> edges;
  for (const auto& br : branches) {
    if (br.from < 1 || br.from > M || br.to < 1 || br.to > M) bad("'branches' endpoint out of range");
    if (br.from == br.to) bad("'branches' self-loop");
    if (br.susceptance == 0.0) bad("'branches' susceptance must be nonzero");
    auto key = std::minmax(br.from, br.to);
    if (!edges.insert(key).second) bad("'branches' duplicate edge");
  }
  // Connectivity of the physical graph. Disturbed variants (branch outages)
  // are allowed to island a bus temporarily, so the check is optional.
  if (require_connected) {
    std::vector<int> root(M);
    std::iota(root.begin(), root.end(), 0);
    std::function<int(int)> find = [&](int v) { return root[v] == v ? v : root[v] = find(root[v]); };
    for (const auto& br : branches) root[find(br.from - 1)] = find(br.to - 1);
    for (int v = 1; v < M; ++v) {
      if (find(v) != find(0)) bad("'branches' graph is disconnected");
    }
  }

  if (static_cast<int>(set_points.size()) != M) bad("'set_points' must list every bus once");
  for (int i = 0; i < M; ++i) {
    if (set_points[i].bus != i + 1) bad("'set_points' must cover buses 1..M exactly once");
    if (!(set_points[i].u > 0.0)) bad("'set_points' voltage must be positive");
  }

  if (!(omega_star >= 0.0) || !std::isfinite(omega_star)) bad("'omega_star' must be finite and >= 0");

  const int nI = n_inverters();
  if (static_cast<int>(gains.size()) != nI) bad("'gains' must list every inverter bus once");
  for (int i = 0; i < nI; ++i) {
    if (gains[i].bus != inverter_buses[i]) bad("'gains' must cover the inverter buses exactly once");
    if (!(gains[i].kp > 0.0)) bad("'gains' KP must be > 0");
    if (!(gains[i].kq > 0.0)) bad("'gains' KQ must be > 0");
  }

  if (laplacian.rows() != nI || laplacian.cols() != nI) bad("'laplacian' must be nI x nI");
  for (int i = 0; i < nI; ++i) {
    if (std::abs(laplacian.row(i).sum()) > 1e-9) bad("'laplacian' row sums must vanish");
    for (int j = 0; j < nI; ++j) {
      if (std::abs(laplacian(i, j) - laplacian(j, i)) > 1e-12) bad("'laplacian' must be symmetric");
      if (i != j && laplacian(i, j) > 1e-12) bad("'laplacian' off-diagonals must be <= 0");
    }
  }
  if (nI > 1) {
    Eigen::SelfAdjointEigenSolver<Mat> es(laplacian);
    // second-smallest eigenvalue > 0 <=> communication graph connected
    if (!(es.eigenvalues()(1) > 1e-9)) bad("'laplacian' graph is disconnected");
  }

  if (!(reference_anchor_gain >= 0.0)) bad("'reference_anchor_gain' must be >= 0");

  if (disturbance) {
    if (disturbance->branch < 1 || disturbance->branch > static_cast<int>(branches.size()))
      bad("'disturbance.branch' out of range");
    if (!(disturbance->time >= 0.0)) bad("'disturbance.time' must be >= 0");
    if (!(disturbance->scale >= 0.0)) bad("'disturbance.scale' must be >= 0");
    if (!(disturbance->clear_after > 0.0)) bad("'disturbance.clear_after' must be > 0");
  }
  if (!(simulation.t_n > 0.0) || !(simulation.dt > 0.0) || !(simulation.xi > 0.0))
    bad("'simulation' entries must be positive");
}

Mat MicrogridConfig::susceptance_matrix() const {
  Mat b = Mat::Zero(buses, buses);
  for (const auto& br : branches) {
    b(br.from - 1, br.to - 1) += br.susceptance;
    b(br.to - 1, br.from - 1) += br.susceptance;
  }
  return b;
}

MicrogridConfig MicrogridConfig::with_branch_scaled(int branch_index_1based,
                                                    double scale) const {
  if (branch_index_1based < 1 ||
      branch_index_1based > static_cast<int>(branches.size())) {
    throw ConfigError("with_branch_scaled: branch index out of range");
  }
  MicrogridConfig out = *this;
  if (scale == 0.0) {
    // A full outage removes the branch; the connectivity check then decides
    // whether the remaining network is still usable.
    out.branches.erase(out.branches.begin() + (branch_index_1based - 1));
  } else {
    out.branches[branch_index_1based - 1].susceptance *= scale;
  }
  return out;
}

MicrogridConfig MicrogridConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("microgrid config: JSON parse error: ") + e.what());
  }
  if (j.contains("type") && j["type"] != "microgrid") bad("'type' must be 'microgrid'");

  MicrogridConfig c;
  c.buses = integer(j, "buses");
  if (!j.contains("inverter_buses") || !j["inverter_buses"].is_array()) bad("missing 'inverter_buses'");
  for (const auto& v : j["inverter_buses"]) c.inverter_buses.push_back(v.get<int>());
  if (!j.contains("load_buses") || !j["load_buses"].is_array()) bad("missing 'load_buses'");
  for (const auto& v : j["load_buses"]) c.load_buses.push_back(v.get<int>());
  std::sort(c.inverter_buses.begin(), c.inverter_buses.end());
  std::sort(c.load_buses.begin(), c.load_buses.end());

  if (!j.contains("branches") || !j["branches"].is_array()) bad("missing 'branches'");
  for (const auto& v : j["branches"]) {
    c.branches.push_back({integer(v, "from"), integer(v, "to"), num(v, "susceptance")});
  }
  if (!j.contains("set_points") || !j["set_points"].is_array()) bad("missing 'set_points'");
  std::vector<BusSetPoint> sp;
  for (const auto& v : j["set_points"]) {
    sp.push_back({integer(v, "bus"), num(v, "P"), num(v, "Q"), num(v, "U")});
  }
  std::sort(sp.begin(), sp.end(), [](const auto& a, const auto& b) { return a.bus < b.bus; });
  c.set_points = std::move(sp);

  c.omega_star = num(j, "omega_star");

  if (!j.contains("gains") || !j["gains"].is_array()) bad("missing 'gains'");
  std::vector<InverterGains> gg;
  for (const auto& v : j["gains"]) gg.push_back({integer(v, "bus"), num(v, "KP"), num(v, "KQ")});
  std::sort(gg.begin(), gg.end(), [](const auto& a, const auto& b) { return a.bus < b.bus; });
  c.gains = std::move(gg);

  const int nI = c.n_inverters();
  if (!j.contains("laplacian") || !j["laplacian"].is_array() ||
      static_cast<int>(j["laplacian"].size()) != nI * nI) {
    bad("'laplacian' must be a flat row-major array of nI*nI numbers");
  }
  c.laplacian.resize(nI, nI);
  for (int i = 0; i < nI; ++i) {
    for (int k = 0; k < nI; ++k) c.laplacian(i, k) = j["laplacian"][i * nI + k].get<double>();
  }

  if (j.contains("reference_anchor_gain")) c.reference_anchor_gain = num(j, "reference_anchor_gain");

  if (j.contains("disturbance") && !j["disturbance"].is_null()) {
    const auto& d = j["disturbance"];
    Disturbance dist;
    dist.branch = integer(d, "branch");
    dist.time = num(d, "time");
    dist.scale = num(d, "scale");
    dist.clear_after = num(d, "clear_after");
    c.disturbance = dist;
  }
  if (j.contains("simulation")) {
    const auto& s = j["simulation"];
    if (s.contains("t_n")) c.simulation.t_n = num(s, "t_n");
    if (s.contains("dt")) c.simulation.dt = num(s, "dt");
    if (s.contains("xi")) c.simulation.xi = num(s, "xi");
  }

  c.validate();
  return c;
}

MicrogridConfig MicrogridConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("microgrid config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

void microgrid_injections(const Mat& b, const Vec& theta, const Vec& u, Vec& p, Vec& q) {
  const Eigen::Index M = b.rows();
  p.setZero(M);
  q.setZero(M);
  for (Eigen::Index i = 0; i < M; ++i) {
    double pi = 0.0, qi = 0.0;
    for (Eigen::Index j = 0; j < M; ++j) {
      if (b(i, j) == 0.0) continue;
      const double w = b(i, j) * u(i) * u(j);
      const double d = theta(i) - theta(j);
      pi += w * std::sin(d);
      qi -= w * std::cos(d);
    }
    p(i) = pi;
    q(i) = qi;
  }
}

namespace {

// Everything the evaluators need, captured once.
struct GridData {
  Mat b;                       // susceptance matrix
  std::vector<int> inv;        // 0-based inverter bus ids
  std::vector<int> load;       // 0-based load bus ids
  Vec p_star, q_star, u_star;  // per bus
  Vec kp, kq;                  // per inverter
  Mat lap;
  double omega_star = 0.0;
  double anchor = 0.0;
  int M = 0, nI = 0, nL = 0;

  void profiles(const Vec& x, const Vec& y, Vec& theta, Vec& u) const {
    theta.resize(M);
    u.resize(M);
    for (int a = 0; a < nI; ++a) {
      theta(inv[a]) = x(a);
      u(inv[a]) = x(2 * nI + a);
    }
    for (int a = 0; a < nL; ++a) {
      theta(load[a]) = y(a);
      u(load[a]) = y(nL + a);
    }
  }
};

GridData make_grid_data(const MicrogridConfig& c) {
  GridData d;
  d.b = c.susceptance_matrix();
  d.M = c.buses;
  d.nI = c.n_inverters();
  d.nL = c.n_loads();
  for (int b : c.inverter_buses) d.inv.push_back(b - 1);
  for (int b : c.load_buses) d.load.push_back(b - 1);
  d.p_star.resize(d.M);
  d.q_star.resize(d.M);
  d.u_star.resize(d.M);
  for (int i = 0; i < d.M; ++i) {
    d.p_star(i) = c.set_points[i].p;
    d.q_star(i) = c.set_points[i].q;
    d.u_star(i) = c.set_points[i].u;
  }
  d.kp.resize(d.nI);
  d.kq.resize(d.nI);
  for (int a = 0; a < d.nI; ++a) {
    d.kp(a) = c.gains[a].kp;
    d.kq(a) = c.gains[a].kq;
  }
  d.lap = c.laplacian;
  d.omega_star = c.omega_star;
  d.anchor = c.reference_anchor_gain;
  return d;
}

// dP/dtheta, dP/dU, dQ/dtheta, dQ/dU over the full network (M x M each).
void injection_jacobian(const GridData& d, const Vec& theta, const Vec& u,
                        Mat& dp_dth, Mat& dp_du, Mat& dq_dth, Mat& dq_du) {
  const int M = d.M;
  dp_dth.setZero(M, M);
  dp_du.setZero(M, M);
  dq_dth.setZero(M, M);
  dq_du.setZero(M, M);
  for (int i = 0; i < M; ++i) {
    double acc_p_th = 0, acc_p_u = 0, acc_q_th = 0, acc_q_u = 0;
    for (int j = 0; j < M; ++j) {
      if (d.b(i, j) == 0.0) continue;
      const double dth = theta(i) - theta(j);
      const double s = std::sin(dth), c = std::cos(dth);
      const double w = d.b(i, j) * u(i) * u(j);
      dp_dth(i, j) = -w * c;
      acc_p_th += w * c;
      dp_du(i, j) = d.b(i, j) * u(i) * s;
      acc_p_u += d.b(i, j) * u(j) * s;
      dq_dth(i, j) = -w * s;
      acc_q_th += w * s;
      dq_du(i, j) = -d.b(i, j) * u(i) * c;
      acc_q_u += -d.b(i, j) * u(j) * c;
    }
    dp_dth(i, i) = acc_p_th;
    dp_du(i, i) = acc_p_u;
    dq_dth(i, i) = acc_q_th;
    dq_du(i, i) = acc_q_u;
  }
}

}  // namespace

DaeDynamics microgrid_dynamics(const MicrogridConfig& config) {
  config.validate(/*require_connected=*/false);
  const GridData d = make_grid_data(config);
  const int nI = d.nI, nL = d.nL;

  DaeDynamics dyn;
  dyn.n = 4 * nI;
  dyn.m = 2 * nL;

  dyn.f = [d, nI](const Vec& x, const Vec& y) {
    Vec theta, u, p, q;
    d.profiles(x, y, theta, u);
    microgrid_injections(d.b, theta, u, p, q);
    const auto omega = x.segment(nI, nI);
    const auto zeta = x.segment(3 * nI, nI);
    Vec f(4 * nI);
    for (int a = 0; a < nI; ++a) {
      const int i = d.inv[a];
      f(a) = omega(a) - d.omega_star - (a == 0 ? d.anchor * x(0) : 0.0);
      f(nI + a) = -(omega(a) - d.omega_star) - d.kp(a) * (p(i) - d.p_star(i)) + zeta(a);
      f(2 * nI + a) = -(u(i) - d.u_star(i)) - d.kq(a) * (q(i) - d.q_star(i));
    }
    f.segment(3 * nI, nI) =
        -d.lap * zeta - (omega.array() - d.omega_star).matrix().cwiseQuotient(d.kp);
    return f;
  };

  dyn.g = [d, nL](const Vec& x, const Vec& y) {
    Vec theta, u, p, q;
    d.profiles(x, y, theta, u);
    microgrid_injections(d.b, theta, u, p, q);
    Vec g(2 * nL);
    for (int a = 0; a < nL; ++a) {
      const int i = d.load[a];
      g(a) = p(i) - d.p_star(i);
      g(nL + a) = q(i) - d.q_star(i);
    }
    return g;
  };

  dyn.jacobian = [d, nI, nL](const Vec& x, const Vec& y) {
    Vec theta, u;
    d.profiles(x, y, theta, u);
    Mat dp_dth, dp_du, dq_dth, dq_du;
    injection_jacobian(d, theta, u, dp_dth, dp_du, dq_dth, dq_du);

    JacobianBlocks jb;
    jb.fx = Mat::Zero(4 * nI, 4 * nI);
    jb.fy = Mat::Zero(4 * nI, 2 * nL);
    jb.gx = Mat::Zero(2 * nL, 4 * nI);
    jb.gy = Mat::Zero(2 * nL, 2 * nL);

    for (int a = 0; a < nI; ++a) {
      const int i = d.inv[a];
      jb.fx(a, nI + a) = 1.0;
      if (a == 0) jb.fx(0, 0) -= d.anchor;

      jb.fx(nI + a, nI + a) = -1.0;
      jb.fx(nI + a, 3 * nI + a) = 1.0;
      jb.fx(2 * nI + a, 2 * nI + a) = -1.0;
      for (int b2 = 0; b2 < nI; ++b2) {
        const int jbus = d.inv[b2];
        jb.fx(nI + a, b2) -= d.kp(a) * dp_dth(i, jbus);
        jb.fx(nI + a, 2 * nI + b2) -= d.kp(a) * dp_du(i, jbus);
        jb.fx(2 * nI + a, b2) -= d.kq(a) * dq_dth(i, jbus);
        jb.fx(2 * nI + a, 2 * nI + b2) -= d.kq(a) * dq_du(i, jbus);
      }
      for (int b2 = 0; b2 < nL; ++b2) {
        const int jbus = d.load[b2];
        jb.fy(nI + a, b2) -= d.kp(a) * dp_dth(i, jbus);
        jb.fy(nI + a, nL + b2) -= d.kp(a) * dp_du(i, jbus);
        jb.fy(2 * nI + a, b2) -= d.kq(a) * dq_dth(i, jbus);
        jb.fy(2 * nI + a, nL + b2) -= d.kq(a) * dq_du(i, jbus);
      }
    }
    jb.fx.block(3 * nI, 3 * nI, nI, nI) = -d.lap;
    for (int a = 0; a < nI; ++a) jb.fx(3 * nI + a, nI + a) = -1.0 / d.kp(a);

    for (int a = 0; a < nL; ++a) {
      const int i = d.load[a];
      for (int b2 = 0; b2 < nI; ++b2) {
        const int jbus = d.inv[b2];
        jb.gx(a, b2) = dp_dth(i, jbus);
        jb.gx(a, 2 * nI + b2) = dp_du(i, jbus);
        jb.gx(nL + a, b2) = dq_dth(i, jbus);
        jb.gx(nL + a, 2 * nI + b2) = dq_du(i, jbus);
      }
      for (int b2 = 0; b2 < nL; ++b2) {
        const int jbus = d.load[b2];
        jb.gy(a, b2) = dp_dth(i, jbus);
        jb.gy(a, nL + b2) = dp_du(i, jbus);
        jb.gy(nL + a, b2) = dq_dth(i, jbus);
        jb.gy(nL + a, nL + b2) = dq_du(i, jbus);
      }
    }
    return jb;
  };
  return dyn;
}

DaeSystem microgrid_build(const MicrogridConfig& config) {
  config.validate();
  double p_sum = 0.0;
  for (const auto& sp : config.set_points) p_sum += sp.p;
  if (std::abs(p_sum) > 1e-8) {
    std::ostringstream os;
    os << "microgrid_build: set-point active power imbalance " << p_sum;
    throw ModelInfeasible(os.str());
  }
  if (!(config.reference_anchor_gain > 0.0)) {
    throw ModelInfeasible(
        "microgrid_build: reference_anchor_gain must be > 0 to pin the angle datum");
  }

  DaeDynamics dyn = microgrid_dynamics(config);
  const int nI = config.n_inverters(), nL = config.n_loads();

  // start from flat angles, set-point voltages, nominal frequency
  Vec x0 = Vec::Zero(4 * nI);
  Vec y0 = Vec::Zero(2 * nL);
  for (int a = 0; a < nI; ++a) {
    x0(nI + a) = config.omega_star;
    x0(2 * nI + a) = config.set_points[config.inverter_buses[a] - 1].u;
  }
  for (int a = 0; a < nL; ++a) {
    y0(nL + a) = config.set_points[config.load_buses[a] - 1].u;
  }
  Equilibrium eq = find_equilibrium(dyn, x0, y0);

  // sampling hint: angles +-0.5 rad, frequency +-2 Hz, voltage +-0.2 pu,
  // secondary control +-2 around the equilibrium
  Vec lo(4 * nI), hi(4 * nI);
  for (int a = 0; a < nI; ++a) {
    lo(a) = eq.x(a) - 0.5;
    hi(a) = eq.x(a) + 0.5;
    lo(nI + a) = eq.x(nI + a) - 4.0 * M_PI;
    hi(nI + a) = eq.x(nI + a) + 4.0 * M_PI;
    lo(2 * nI + a) = eq.x(2 * nI + a) - 0.2;
    hi(2 * nI + a) = eq.x(2 * nI + a) + 0.2;
    lo(3 * nI + a) = eq.x(3 * nI + a) - 2.0;
    hi(3 * nI + a) = eq.x(3 * nI + a) + 2.0;
  }
  return DaeSystem(std::move(dyn), std::move(eq), Box{std::move(lo), std::move(hi)});
}

}  // namespace roagp
