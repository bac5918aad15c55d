#include <algorithm>
#include <cmath>

#include "pnmpc/errors.hpp"
#include "pnmpc/ocp/integrator.hpp"
#include "pnmpc/plant/tire.hpp"
#include "pnmpc/traction/traction.hpp"

namespace pnmpc::traction {

using ocp::Vec;
using ocp::VecCRef;
using ocp::VecRef;

namespace {

enum P { kMu = 0, kRefFL, kRefFR, kFzFL, kFzFR, kDriver, kNp };

}  // namespace

void TractionNmpcConfig::validate() const {
  std::vector<std::string> p;
  if (N < 1) p.push_back("N must be >= 1");
  if (!(Ts > 0.0)) p.push_back("Ts must be > 0");
  if (!(W_slack_FL >= 0.0 && W_slack_FR >= 0.0 && W_tau >= 0.0)) p.push_back("weights must be >= 0");
  if (!(dt_delay >= 0.0)) p.push_back("dt_delay must be >= 0");
  if (!(T_m > 0.0)) p.push_back("T_m must be > 0");
  if (!(slip_margin > 0.0 && slip_margin <= 1.0)) p.push_back("slip_margin must be in (0, 1]");
  if (sqp_iters < 1) p.push_back("sqp_iters must be >= 1");
  if (!(internal_step > 0.0)) p.push_back("internal_step must be > 0");
  if (!p.empty()) throw ValidationError(p);
}

TractionNmpcConfig read_traction_config(KvReader& r, const TractionNmpcConfig& d) {
  TractionNmpcConfig c = d;
  const std::string mode = r.choice("mode", d.mode == preview::PreviewMode::preemptive ? "preemptive" : "reactive",
                                    {"preemptive", "reactive"});
  c.mode = mode == "preemptive" ? preview::PreviewMode::preemptive : preview::PreviewMode::reactive;
  c.N = r.integer("N", d.N, 1, 1000);
  c.Ts = r.number("Ts", d.Ts, 1e-6, 10.0);
  c.dt_delay = r.number("dt_delay", d.dt_delay, 0.0, 10.0);
  c.T_m = r.number("T_m", d.T_m, 1e-6, 10.0);
  c.slip_margin = r.number("slip_margin", d.slip_margin, 1e-6, 1.0);
  c.sqp_iters = r.integer("sqp_iters", d.sqp_iters, 1, 100);
  c.internal_step = r.number("internal_step", d.internal_step, 1e-6, 1.0);
  c.delay_prediction = r.flag("delay_prediction", d.delay_prediction);
  const auto w = r.numbers("weights", {d.W_slack_FL, d.W_slack_FR, d.W_tau});
  if (w.size() != 3) {
    r.problem(r.config().source() + ": 'weights' needs three values (slack FL, slack FR, tau)");
  } else if (w[0] < 0.0 || w[1] < 0.0 || w[2] < 0.0) {
    r.problem(r.config().source() + ": 'weights' must be >= 0");
  } else {
    c.W_slack_FL = w[0];
    c.W_slack_FR = w[1];
    c.W_tau = w[2];
  }
  return c;
}

TractionNmpcConfig load_traction_config(const std::filesystem::path& path) {
  const KvConfig cfg = KvConfig::load(path);
  KvReader r(cfg);
  TractionNmpcConfig c = read_traction_config(r);
  r.finish();
  c.validate();
  return c;
}

std::array<double, 5> prediction_dynamics(const TractionState& x, const TractionControl& u,
                                          double mu_n, const std::array<double, 2>& Fz,
                                          const TractionModel& m) {
  const auto& v = m.vehicle;
  const double wr_fl = std::max(x.omega_FL * v.R, plant::kSlipSpeedEps);
  const double wr_fr = std::max(x.omega_FR * v.R, plant::kSlipSpeedEps);
  const double fx_fl =
      plant::magic_formula(x.s_FL / wr_fl, mu_n, Fz[0], m.tires, plant::TireAxis::longitudinal);
  const double fx_fr =
      plant::magic_formula(x.s_FR / wr_fr, mu_n, Fz[1], m.tires, plant::TireAxis::longitudinal);
  const double ax = (fx_fl + fx_fr) / v.m;
  const double drive = 0.5 * x.tau_m * v.gear_ratio;
  const double wdot_fl = (drive - fx_fl * v.R) / v.Jw;
  const double wdot_fr = (drive - fx_fr * v.R) / v.Jw;
  return {(u.tau_m_mod - x.tau_m) / m.T_m, wdot_fl * v.R - ax, wdot_fr * v.R - ax, wdot_fl,
          wdot_fr};
}

TractionController::TractionController(TractionNmpcConfig cfg, plant::VehicleParams vehicle,
                                       plant::TireParams tires, ocp::SolverConfig solver)
    : cfg_(cfg), solver_(solver) {
  cfg_.validate();
  vehicle.validate();
  tires.validate();
  model_ = {vehicle, tires, cfg_.T_m};
  table_ = ReferenceSlipTable::build(tires, cfg_.slip_margin);
  solver_.config().max_sqp_iters = cfg_.sqp_iters;
}

void TractionController::reset() {
  have_warm_ = false;
  prev_cmd_ = 0.0;
  last_ = {};
  pending_.clear();
}

std::size_t TractionController::delay_steps() const {
  return static_cast<std::size_t>(std::lround(cfg_.dt_delay / cfg_.Ts));
}

TractionMeasurement TractionController::predict_delay(const TractionMeasurement& meas,
                                                      const preview::PathMap& mu_map,
                                                      double S) const {
  TractionMeasurement out = meas;
  const std::size_t D = delay_steps();
  if (D == 0 || pending_.size() != D) return out;

  const TractionModel model = model_;
  const ocp::Dynamics f = [&model](VecCRef x, VecCRef u, VecCRef p, VecRef xdot) {
    const TractionState xs{x[0], x[1], x[2], x[3], x[4]};
    const TractionControl us{u[0], u[1], u[2]};
    const auto d = prediction_dynamics(xs, us, p[kMu], {p[kFzFL], p[kFzFR]}, model);
    for (int i = 0; i < 5; ++i) xdot[i] = d[static_cast<std::size_t>(i)];
  };
  const int substeps = std::max(1, static_cast<int>(std::ceil(cfg_.Ts / cfg_.internal_step - 1e-9)));
  const double V = std::max(meas.V, 0.0);

  Vec x(5), next(5), u(3), p(static_cast<Eigen::Index>(kNp));
  x << meas.x.tau_m, meas.x.s_FL, meas.x.s_FR, meas.x.omega_FL, meas.x.omega_FR;
  p.setZero();
  p[kFzFL] = meas.Fz_FL;
  p[kFzFR] = meas.Fz_FR;
  ocp::Rk4Workspace ws;
  ws.resize(5);
  try {
    for (std::size_t j = 0; j < D; ++j) {
      const double ahead = cfg_.mode == preview::PreviewMode::preemptive
                               ? V * static_cast<double>(j) * cfg_.Ts
                               : 0.0;
      p[kMu] = sample_map(mu_map, S + ahead);
      u << pending_[j], 0.0, 0.0;
      ocp::discrete_step(f, x, u, p, cfg_.Ts, substeps, ws, next, static_cast<int>(j));
      x = next;
    }
  } catch (const IntegrationError&) {
    return out;
  }
  out.x = {x[0], x[1], x[2], x[3], x[4]};
  return out;
}

ocp::OcpProblem TractionController::build_problem(const TractionMeasurement& meas,
                                                  double tau_driver,
                                                  const preview::PathMap& mu_map,
                                                  double S) const {
  const int N = cfg_.N;
  const double V = std::max(meas.V, 0.0);
  const auto S_fut = preview::future_distances(S, V, N, cfg_.Ts);
  const double dx = cfg_.mode == preview::PreviewMode::preemptive
                        ? preview::delay_advance(V, cfg_.dt_delay)
                        : 0.0;
  const auto mu = preview::friction_preview(mu_map, S_fut, dx, cfg_.mode);

  ocp::OcpProblem pb;
  pb.N = N;
  pb.Ts = cfg_.Ts;
  pb.nx = 5;
  pb.nu = 3;
  pb.np = kNp;
  pb.nr = 3;
  pb.nc = 2;
  pb.substeps = std::max(1, static_cast<int>(std::ceil(cfg_.Ts / cfg_.internal_step - 1e-9)));
  pb.allocate();

  const TractionModel model = model_;
  pb.dynamics = [model](VecCRef x, VecCRef u, VecCRef p, VecRef xdot) {
    const TractionState xs{x[0], x[1], x[2], x[3], x[4]};
    const TractionControl us{u[0], u[1], u[2]};
    const auto d = prediction_dynamics(xs, us, p[kMu], {p[kFzFL], p[kFzFR]}, model);
    for (int i = 0; i < 5; ++i) xdot[i] = d[static_cast<std::size_t>(i)];
  };
  const double tau_max = model.vehicle.tau_m_max;
  pb.residual = [tau_max](VecCRef, VecCRef u, VecCRef p, VecRef r) {
    r[0] = (p[kDriver] - u[0]) / tau_max;
    r[1] = u[1];
    r[2] = u[2];
  };
  const double R = model.vehicle.R;
  // e + eps >= 0 with e = sigma_ref - sigma, i.e. sigma - sigma_ref - eps <= 0.
  pb.constraints = [R](VecCRef x, VecCRef u, VecCRef p, VecRef h) {
    h[0] = -slip_error(p[kRefFL], x[1], x[3], R) - u[1];
    h[1] = -slip_error(p[kRefFR], x[2], x[4], R) - u[2];
  };
  pb.weights = Vec(3);
  pb.weights << cfg_.W_tau, cfg_.W_slack_FL, cfg_.W_slack_FR;

  const double drv = std::max(tau_driver, 0.0);
  for (int n = 0; n < N; ++n) {
    const double m = mu[static_cast<std::size_t>(n)];
    pb.params(kMu, n) = m;
    pb.params(kRefFL, n) = reference_slip(m, meas.Fz_FL, table_);
    pb.params(kRefFR, n) = reference_slip(m, meas.Fz_FR, table_);
    pb.params(kFzFL, n) = meas.Fz_FL;
    pb.params(kFzFR, n) = meas.Fz_FR;
    pb.params(kDriver, n) = drv;
    pb.u_lo.col(n) << 0.0, 0.0, 0.0;
    pb.u_hi(0, n) = drv;
  }
  pb.x0 = Vec(5);
  pb.x0 << meas.x.tau_m, meas.x.s_FL, meas.x.s_FR, meas.x.omega_FL, meas.x.omega_FR;
  pb.u_scale = Vec(3);
  pb.u_scale << tau_max, 0.05, 0.05;
  return pb;
}

TractionStepInfo TractionController::step(const TractionMeasurement& meas, double tau_driver,
                                          const preview::PathMap& mu_map, double S) {
  TractionStepInfo info;
  const double drv = std::max(tau_driver, 0.0);
  const std::size_t D = delay_steps();
  if (pending_.size() != D) pending_.assign(D, meas.x.tau_m);
  const ocp::OcpProblem pb =
      build_problem(cfg_.delay_prediction ? predict_delay(meas, mu_map, S) : meas, drv, mu_map, S);
  info.mu_now = pb.params(kMu, 0);
  info.sigma_ref = pb.params(kRefFR, 0);

  ocp::Trajectory warm;
  if (have_warm_) {
    warm = ocp::shift_warm_start(last_.trajectory);
  } else {
    warm.controls = ocp::Mat::Zero(3, cfg_.N);
    warm.controls.row(0).setConstant(drv);
    warm.states = ocp::Mat::Zero(5, cfg_.N + 1);
  }

  bool ok = false;
  try {
    last_ = solver_.solve(pb, &warm);
    ok = last_.status != ocp::SolveStatus::failed &&
         std::isfinite(last_.trajectory.controls(0, 0));
  } catch (const std::exception& e) {
    last_ = {};
    last_.message = e.what();
  }

  info.status = last_.status;
  info.iterations = last_.iterations;
  info.kkt = last_.kkt_residual;
  info.message = last_.message;
  if (ok) {
    info.tau_m_mod = std::clamp(last_.trajectory.controls(0, 0), 0.0, drv);
    have_warm_ = true;
  } else {
    info.fallback = true;
    info.tau_m_mod = std::clamp(0.9 * prev_cmd_, 0.0, drv);
    have_warm_ = false;
  }
  prev_cmd_ = info.tau_m_mod;
  if (D > 0) {
    pending_.pop_front();
    pending_.push_back(info.tau_m_mod);
  }
  return info;
}

}  // namespace pnmpc::traction
