#include "riobs/power_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "riobs/observer.hpp"
#include "riobs/util.hpp"

namespace riobs {

std::pair<double, double> cos_range(double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("cos_range needs lo <= hi");
  const double two_pi = 2.0 * M_PI;
  if (hi - lo >= two_pi) return {-1.0, 1.0};
  double cmin = std::min(std::cos(lo), std::cos(hi));
  double cmax = std::max(std::cos(lo), std::cos(hi));
  if (std::ceil(lo / two_pi) <= std::floor(hi / two_pi)) cmax = 1.0;
  if (std::ceil((lo - M_PI) / two_pi) <= std::floor((hi - M_PI) / two_pi))
    cmin = -1.0;
  return {cmin, cmax};
}

BuiltPlant build_power_plant(const PowerSystemConfig& cfg) {
  const Eigen::Index B = cfg.buses();
  const Eigen::Index n = 2 * B;
  if (B < 1) throw ConfigError("power system needs at least one bus");
  if (cfg.damping.size() != B)
    throw ConfigError("damping vector size must match the bus count");
  if (cfg.tie.rows() != B || cfg.tie.cols() != B)
    throw ConfigError("tie matrix must be buses x buses");
  if ((cfg.tie.diagonal().array() != 0.0).any())
    throw ConfigError("tie matrix diagonal must be zero");
  if (((cfg.tie - cfg.tie.transpose()).cwiseAbs().array() > 1e-12).any())
    throw ConfigError("tie matrix must be symmetric");
  if ((cfg.tie.array() < 0.0).any())
    throw ConfigError("tie susceptances must be nonnegative");
  if ((cfg.inertia.array() <= 0.0).any())
    throw ConfigError("inertia entries must be positive");
  if ((cfg.damping.array() < 0.0).any())
    throw ConfigError("damping entries must be nonnegative");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (cfg.box.size() != n || cfg.x0.size() != n)
    throw ConfigError("state boxes must have dimension 2 * buses");

  BuiltPlant out;
  const VectorXd m = cfg.inertia;
  const VectorXd Dv = cfg.damping;
  const MatrixXd tie = cfg.tie;
  const double dt = cfg.dt;

  DifferentiableMap f;
  f.eval = [B, dt, m, Dv, tie](const VectorXd& x) -> VectorXd {
    VectorXd y(2 * B);
    for (Eigen::Index i = 0; i < B; ++i) {
      const double th = x(2 * i);
      const double fr = x(2 * i + 1);
      y(2 * i) = th + dt * fr;
      double torque = -Dv(i) * fr;
      for (Eigen::Index j = 0; j < B; ++j)
        if (j != i && tie(i, j) != 0.0)
          torque -= tie(i, j) * std::sin(th - x(2 * j));
      y(2 * i + 1) = fr + dt / m(i) * torque;
    }
    return y;
  };
  f.jac_lo = MatrixXd::Zero(n, n);
  f.jac_hi = MatrixXd::Zero(n, n);
  bool degenerate = false;
  for (Eigen::Index i = 0; i < B; ++i) {
    f.jac_lo(2 * i, 2 * i) = f.jac_hi(2 * i, 2 * i) = 1.0;
    f.jac_lo(2 * i, 2 * i + 1) = f.jac_hi(2 * i, 2 * i + 1) = dt;
    const double self = 1.0 - dt * Dv(i) / m(i);
    f.jac_lo(2 * i + 1, 2 * i + 1) = f.jac_hi(2 * i + 1, 2 * i + 1) = self;
    double own_lo = 0.0, own_hi = 0.0;
    for (Eigen::Index j = 0; j < B; ++j) {
      if (j == i || tie(i, j) == 0.0) continue;
      const double dlo = cfg.box.lo(2 * i) - cfg.box.hi(2 * j);
      const double dhi = cfg.box.hi(2 * i) - cfg.box.lo(2 * j);
      const auto [cl, ch] = cos_range(dlo, dhi);
      if (cl == -1.0 && ch == 1.0) degenerate = true;
      const double coeff = dt / m(i) * tie(i, j);
      f.jac_lo(2 * i + 1, 2 * j) = coeff * cl;
      f.jac_hi(2 * i + 1, 2 * j) = coeff * ch;
      own_lo -= coeff * ch;
      own_hi -= coeff * cl;
    }
    f.jac_lo(2 * i + 1, 2 * i) = own_lo;
    f.jac_hi(2 * i + 1, 2 * i) = own_hi;
  }
  f.domain = cfg.box;
  if (degenerate)
    out.warnings.push_back(
        "angle differences can wrap on the operating box; coupling slopes "
        "are bounded by the full cosine range");

  DifferentiableMap h;
  h.eval = [](const VectorXd& x) -> VectorXd { return x; };
  h.jac_lo = MatrixXd::Identity(n, n);
  h.jac_hi = MatrixXd::Identity(n, n);
  h.domain = cfg.box;

  PlantModel& plant = out.plant;
  plant.f = f;
  plant.h = h;
  plant.W = dt * MatrixXd::Identity(n, n);
  plant.V = MatrixXd::Identity(n, n);
  plant.G = cfg.G;
  plant.H = cfg.H;
  plant.noise_w = cfg.noise_w;
  plant.noise_v = cfg.noise_v;
  plant.x0 = cfg.x0;
  plant.box = cfg.box;
  return out;
}

namespace {

double eval_term(const AttackTerm& t, long k, Rng* rng) {
  double draw = 0.0;
  if (t.kind == AttackKind::Random && rng)
    draw = rng->uniform(-t.amplitude, t.amplitude);
  if (k < t.onset && t.kind != AttackKind::Zero)
    return 0.0;  // random draw above keeps the stream aligned
  // A positive length closes the window for everything except ramps, which
  // treat it as rise time and hold afterwards.
  if (t.kind != AttackKind::Zero && t.kind != AttackKind::Ramp &&
      t.length > 0 && k >= t.onset + t.length)
    return 0.0;
  switch (t.kind) {
    case AttackKind::Zero:
      return 0.0;
    case AttackKind::Step:
      return t.amplitude;
    case AttackKind::Ramp: {
      const double frac =
          t.length > 0 ? static_cast<double>(k - t.onset) / t.length : 1.0;
      return t.amplitude * std::clamp(frac, 0.0, 1.0);
    }
    case AttackKind::Sine:
      return t.amplitude *
             std::sin(2.0 * M_PI * (k - t.onset) / t.period + t.phase);
    case AttackKind::Random:
      return draw;
  }
  return 0.0;
}

}  // namespace

std::vector<VectorXd> attack_sequence(const AttackScenario& sc,
                                      Eigen::Index p, long steps,
                                      uint64_t seed) {
  if (static_cast<Eigen::Index>(sc.channels.size()) != p)
    throw std::invalid_argument(
        "attack scenario channel count must match the attack dimension");
  std::vector<Rng> streams;
  streams.reserve(sc.channels.size());
  for (size_t c = 0; c < sc.channels.size(); ++c)
    streams.emplace_back(seed, 100 + static_cast<uint64_t>(c));
  std::vector<VectorXd> d(static_cast<size_t>(steps) + 1, VectorXd::Zero(p));
  for (long k = 0; k <= steps; ++k)
    for (size_t c = 0; c < sc.channels.size(); ++c) {
      double val = 0.0;
      for (const AttackTerm& t : sc.channels[c])
        val += eval_term(t, k, &streams[c]);
      d[static_cast<size_t>(k)](static_cast<Eigen::Index>(c)) = val;
    }
  return d;
}

SimResult simulate_plant(const TransformedPlant& tp, const AttackScenario& sc,
                         long steps, uint64_t seed, const SimOptions& opt) {
  if (steps < 1) throw std::invalid_argument("steps must be at least 1");
  const PlantModel& plant = tp.plant;
  const Eigen::Index p = plant.p();
  Rng rw(seed, 0), rv(seed, 1), rx(seed, 2);

  auto sample_box = [](const IntervalVector& b, Rng& rng, bool vertex) {
    VectorXd s(b.size());
    for (Eigen::Index i = 0; i < b.size(); ++i)
      s(i) = vertex ? (rng.coin() ? b.hi(i) : b.lo(i))
                    : rng.uniform(b.lo(i), b.hi(i));
    return s;
  };

  SimResult sim;
  sim.d = attack_sequence(sc, p, steps, seed);
  VectorXd x = opt.x0_at_mid ? VectorXd(plant.x0.mid())
                             : sample_box(plant.x0, rx, false);
  const size_t total = static_cast<size_t>(steps) + 1;
  sim.x.reserve(total);
  sim.v.reserve(total);
  sim.y.reserve(total);
  sim.z1.reserve(total);
  sim.z2.reserve(total);
  sim.w.reserve(total - 1);
  for (long k = 0; k <= steps; ++k) {
    if (!plant.box.contains(x, 0.0))
      throw ScenarioError(
          "truth trajectory left the operating box at index " +
          std::to_string(k) + "; enlarge the box or weaken the scenario");
    sim.x.push_back(x);
    const VectorXd v = sample_box(plant.noise_v, rv, opt.vertex_noise);
    sim.v.push_back(v);
    const VectorXd y = plant.h.eval(x) + plant.V * v +
                       plant.H * sim.d[static_cast<size_t>(k)];
    sim.y.push_back(y);
    sim.z1.push_back(tp.ad.T1 * y);
    sim.z2.push_back(tp.ad.T2 * y);
    if (k < steps) {
      const VectorXd w = sample_box(plant.noise_w, rw, opt.vertex_noise);
      sim.w.push_back(w);
      x = plant.f.eval(x) + plant.W * w +
          plant.G * sim.d[static_cast<size_t>(k)];
    }
  }
  return sim;
}

RunMetrics evaluate_run(const FramerTrajectory& traj, const SimResult& sim,
                        double tol, double settle_tol, long settle_window) {
  RunMetrics m;
  m.diverged = traj.diverged;
  long ok_x = 0;
  const size_t Kx = std::min(traj.x.size(), sim.x.size());
  for (size_t k = 0; k < Kx; ++k)
    if (traj.x[k].contains(sim.x[k], tol)) ++ok_x;
  m.checked_x = static_cast<long>(Kx);
  m.containment_x = Kx ? static_cast<double>(ok_x) / Kx : 0.0;

  long ok_d = 0;
  const size_t Kd = std::min(traj.d.size(), sim.d.size());
  for (size_t j = 0; j < Kd; ++j)
    if (traj.d[j].contains(sim.d[j], tol)) ++ok_d;
  m.checked_d = static_cast<long>(Kd);
  m.containment_d = Kd ? static_cast<double>(ok_d) / Kd : 1.0;

  m.width_x_final = traj.ex_inf.empty() ? 0.0 : traj.ex_inf.back();
  m.width_d_final = traj.ed_inf.empty() ? 0.0 : traj.ed_inf.back();

  m.settled = false;
  const long K = static_cast<long>(traj.ex_inf.size());
  if (!traj.diverged && K >= settle_window && settle_window > 0) {
    double wmax = 0.0, wmin = std::numeric_limits<double>::infinity();
    for (long k = K - settle_window; k < K; ++k) {
      wmax = std::max(wmax, traj.ex_inf[static_cast<size_t>(k)]);
      wmin = std::min(wmin, traj.ex_inf[static_cast<size_t>(k)]);
    }
    m.settled = wmax <= 0.0 || (wmax - wmin) / wmax <= settle_tol;
  }
  return m;
}

}  // namespace riobs
