#include "pnmpc/harness/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <optional>
#include <cmath>
#include <random>

#include "pnmpc/errors.hpp"
#include "pnmpc/harness/log.hpp"
#include "pnmpc/plant/simulation.hpp"

namespace pnmpc::harness {

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::friction_step: return "friction_step";
    case ScenarioKind::delay_sweep: return "delay_sweep";
    case ScenarioKind::iso3888: return "iso3888";
    case ScenarioKind::u_turn: return "u_turn";
    case ScenarioKind::custom: return "custom";
  }
  return "custom";
}

double ScenarioSpec::control_period() const {
  return controller == ControllerKind::traction ? traction.Ts : braking.Ts;
}

long ScenarioSpec::control_every() const {
  return std::max(1L, std::lround(control_period() / dt));
}

namespace {

template <class E>
void absorb(std::vector<std::string>& problems, const std::string& prefix, const E& e) {
  if constexpr (std::is_same_v<E, ValidationError>) {
    for (const auto& p : e.problems()) problems.push_back(prefix + p);
  } else {
    problems.push_back(prefix + e.what());
  }
}

// Loads a referenced key-value file, applies prefixed overrides from the
// scenario and hands a reader to `read`.
template <class F>
void load_nested(const std::filesystem::path& file, const KvConfig& scenario,
                 const std::string& prefix, std::vector<std::string>& problems, KvReader& outer,
                 F&& read) {
  KvConfig nested;
  try {
    nested = KvConfig::load(file);
  } catch (const ValidationError& e) {
    absorb(problems, "", e);
    return;
  } catch (const std::exception& e) {
    absorb(problems, "", e);
    return;
  }
  for (const auto& [key, entry] : scenario.entries()) {
    if (key.rfind(prefix, 0) != 0) continue;
    outer.mark_used(key);
    nested.set(key.substr(prefix.size()), entry.value);
  }
  try {
    KvReader r(nested);
    read(r);
    r.finish();
  } catch (const ValidationError& e) {
    absorb(problems, "", e);
  } catch (const std::exception& e) {
    absorb(problems, file.string() + ": ", e);
  }
}

}  // namespace

ScenarioSpec read_scenario(const KvConfig& cfg) {
  KvReader r(cfg);
  ScenarioSpec s;
  s.source = cfg.source();
  std::vector<std::string> nested;

  const std::string kind = r.choice("scenario", "custom",
                                    {"friction_step", "delay_sweep", "iso3888", "u_turn", "custom"});
  if (kind == "friction_step") s.kind = ScenarioKind::friction_step;
  else if (kind == "delay_sweep") s.kind = ScenarioKind::delay_sweep;
  else if (kind == "iso3888") s.kind = ScenarioKind::iso3888;
  else if (kind == "u_turn") s.kind = ScenarioKind::u_turn;

  const std::string ck = r.choice("controller_kind", "traction", {"traction", "braking"});
  s.controller = ck == "traction" ? ControllerKind::traction : ControllerKind::braking;
  s.passive = r.flag("passive", false);

  const std::string vehicle = r.required_text("vehicle");
  if (!vehicle.empty()) {
    load_nested(cfg.resolve(vehicle), cfg, "vehicle.", nested, r, [&](KvReader& vr) {
      s.plant = plant::read_plant_params(vr);
    });
  }
  const std::string controller = r.required_text("controller");
  if (!controller.empty()) {
    load_nested(cfg.resolve(controller), cfg, "controller.", nested, r, [&](KvReader& cr) {
      if (s.controller == ControllerKind::traction) {
        s.traction = traction::read_traction_config(cr);
        s.traction.validate();
      } else {
        s.braking = braking::read_dt_config(cr);
        s.braking.validate();
      }
    });
  }

  const std::string interp = r.choice("friction_interpolation", "hold", {"hold", "linear"});
  const auto fi = interp == "hold" ? preview::Interpolation::hold : preview::Interpolation::linear;
  const double mu = r.number("mu", 1.0, 1e-3, 1.2);
  const std::string fmap = r.text("friction_map", "");
  if (fmap.empty()) {
    s.friction = preview::PathMap::constant(mu, fi);
  } else {
    try {
      s.friction = preview::PathMap::load(cfg.resolve(fmap), fi);
      s.friction.validate_friction();
    } catch (const ValidationError& e) {
      absorb(nested, "", e);
    } catch (const std::exception& e) {
      absorb(nested, cfg.source() + ": friction_map: ", e);
    }
  }

  const std::string path = r.choice("path", "straight", {"straight", "u_turn", "iso3888"});
  s.path = path == "straight" ? PathKind::straight
           : path == "u_turn" ? PathKind::u_turn
                              : PathKind::iso3888;
  s.path_length = r.number("path_length", s.path_length, 1.0, 1e6);
  s.uturn_straight = r.number("uturn_straight", s.uturn_straight, 1.0, 1e4);
  s.uturn_radius = r.number("uturn_radius", s.uturn_radius, 1.0, 1e4);
  s.iso_approach = r.number("iso_approach", s.iso_approach, 1.0, 1e4);
  s.iso_exit_run = r.number("iso_exit_run", s.iso_exit_run, 1.0, 1e4);

  DriverSpec& d = s.driver;
  const std::string driver = r.choice("driver", "full_throttle", {"full_throttle", "speed_pi"});
  d.kind = driver == "full_throttle" ? DriverKind::full_throttle : DriverKind::speed_pi;
  d.target_speed = r.number("target_speed", 0.0, 0.0, 200.0);
  d.speed_kp = r.number("speed_kp", d.speed_kp);
  d.speed_ki = r.number("speed_ki", d.speed_ki);
  d.torque_min = r.number("driver_torque_min", d.torque_min);
  d.torque_max = r.number("driver_torque_max", d.torque_max);
  d.coast_after_x = r.number("coast_after_x", d.coast_after_x);
  d.steer_kp_lateral = r.number("steer_kp_lateral", d.steer_kp_lateral);
  d.steer_ki_lateral = r.number("steer_ki_lateral", d.steer_ki_lateral);
  d.steer_kp_heading = r.number("steer_kp_heading", d.steer_kp_heading);
  d.lookahead = r.number("lookahead", d.lookahead);
  d.max_steer = r.number("max_steer", d.max_steer);

  s.duration = r.number("duration", s.duration, 1e-3, 3600.0);
  s.dt = r.number("dt", s.dt, 1e-5, 0.1);
  s.initial_speed = r.number("initial_speed", s.initial_speed, 0.0, 100.0);
  s.off_path_limit = r.number("off_path_limit", s.off_path_limit, 0.1, 1e4);
  s.speed_noise = r.number("speed_noise", 0.0, 0.0, 10.0);
  s.seed = static_cast<std::uint64_t>(r.integer("seed", 0, 0));
  s.output = r.text("output", to_string(s.kind) + ".csv");

  for (auto& p : nested) r.problem(std::move(p));
  r.finish();
  validate_scenario(s);
  return s;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  return read_scenario(KvConfig::load(path));
}

void validate_scenario(const ScenarioSpec& s) {
  std::vector<std::string> bad;
  const std::string src = s.source.string() + ": ";
  const double ratio = s.control_period() / s.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio || std::round(ratio) < 1.0)
    bad.push_back(src + "controller Ts " + std::to_string(s.control_period()) +
                  " is not an integer multiple of dt " + std::to_string(s.dt));
  try {
    s.driver.validate();
  } catch (const ValidationError& e) {
    for (const auto& p : e.problems()) bad.push_back(src + p);
  }
  if (s.kind == ScenarioKind::friction_step || s.kind == ScenarioKind::delay_sweep) {
    const auto& v = s.friction.values();
    int drops = 0, rises = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i] < v[i - 1]) ++drops;
      if (v[i] > v[i - 1]) ++rises;
    }
    if (drops != 1 || rises != 0)
      bad.push_back(src + "friction-step map must have exactly one high-to-low transition");
  }
  if (s.kind == ScenarioKind::iso3888 && s.path != PathKind::iso3888)
    bad.push_back(src + "iso3888 scenario needs path = iso3888");
  if (s.kind == ScenarioKind::u_turn && s.path != PathKind::u_turn)
    bad.push_back(src + "u_turn scenario needs path = u_turn");
  if (s.driver.kind == DriverKind::speed_pi && s.driver.target_speed <= 0.0)
    bad.push_back(src + "speed_pi driver needs target_speed > 0");
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

ReferencePath build_path(const ScenarioSpec& s) {
  switch (s.path) {
    case PathKind::straight: return ReferencePath::straight(s.path_length);
    case PathKind::u_turn: return ReferencePath::u_turn(s.uturn_straight, s.uturn_radius);
    case PathKind::iso3888:
      return ReferencePath::iso3888(IsoCourse(s.plant.vehicle.width), s.iso_approach,
                                    s.iso_exit_run);
  }
  return ReferencePath::straight(s.path_length);
}

bool footprint_hits_gate(double X, double Y, double psi, double length, double width,
                         const IsoCourse& course) {
  const double c = std::cos(psi), sn = std::sin(psi);
  const double hl = 0.5 * length, hw = 0.5 * width;
  const double corners[4][2] = {{hl, hw}, {hl, -hw}, {-hl, hw}, {-hl, -hw}};
  for (const auto& k : corners) {
    const double x = X + c * k[0] - sn * k[1];
    const double y = Y + sn * k[0] + c * k[1];
    for (const Gate& g : course.gates())
      if (x >= g.x0 && x <= g.x1 && (y < g.y_lo || y > g.y_hi)) return true;
  }
  return false;
}

namespace {

enum LogCol {
  cT, cX, cY, cPsi, cVx, cVy, cR, cW0, cW1, cW2, cW3, cWr0, cWr1, cWr2, cWr3, cTauAct, cStravel, cPathS, cLat, cV, cBeta,
  cAlphaR, cSig0, cSig1, cSig2, cSig3, cDelta, cTauDrv, cTauCtrl, cTauCmd, cTauDel, cB0, cB1,
  cB2, cB3, cMu, cK, cVmax, cEpsV, cEpsA, cSigRef, cIter, cKkt, cStatus, cFallback, cCone, cCount
};

}  // namespace

ScenarioResult run_scenario(const ScenarioSpec& spec) {
  const auto& vp = spec.plant.vehicle;
  const auto& tp = spec.plant.tires;
  ScenarioResult res;
  res.log = spec.output;

  const ReferencePath path = build_path(spec);
  const preview::PathMap curvature = path.curvature_map();
  const IsoCourse course(vp.width);
  const bool iso = spec.path == PathKind::iso3888;

  std::optional<traction::TractionController> tc;
  std::optional<braking::DtController> dc;
  if (spec.controller == ControllerKind::traction) tc.emplace(spec.traction, vp, tp);
  else dc.emplace(spec.braking, vp, tp);

  SpeedPi speed_pi(spec.driver.speed_kp, spec.driver.speed_ki, spec.driver.torque_min,
                   std::min(spec.driver.torque_max, vp.gear_ratio * vp.tau_m_max));
  PathTracker tracker(spec.driver, vp.wheelbase());
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  plant::PlantState x;
  const PathSample start = path.at(0.0);
  x.X = start.x;
  x.Y = start.y;
  x.psi = start.heading;
  x.vx = spec.initial_speed;
  x.omega.fill(spec.initial_speed / vp.R);
  plant::DelayLine line(spec.plant.actuator_delay, spec.dt, spec.plant.actuator_lag, 0.0);

  LogWriter log(spec.output);
  std::vector<double> row(cCount, 0.0);

  const long steps = std::lround(spec.duration / spec.dt);
  const long every = spec.control_every();
  const double Ts = spec.control_period();
  const double x_front = vp.a, x_rear = -vp.b;

  plant::ActuatorInput in;
  double tau_driver = 0.0, tau_ctrl = 0.0;
  double s_hint = 0.0;
  double stat_mu = 0.0, stat_vmax = 0.0, stat_epsV = 0.0, stat_epsA = 0.0, stat_sref = 0.0;
  double stat_iter = 0.0, stat_kkt = 0.0, stat_status = -1.0, stat_fallback = 0.0;
  double total_ms = 0.0;

  long k = 0;
  try {
    for (; k < steps; ++k) {
      const double t = k * spec.dt;
      const auto proj = path.project(x.X, x.Y, x.psi, s_hint);
      s_hint = proj.s;
      if (std::abs(proj.lateral) > spec.off_path_limit)
        throw SimulationFault("vehicle left the path (lateral deviation " +
                              std::to_string(proj.lateral) + " m)", k);
      if (proj.s >= path.length()) {
        res.completed = true;
        break;
      }
      plant::Quad mu_w;
      for (int i = 0; i < 4; ++i)
        mu_w[i] = spec.friction.sample(proj.s + (i < 2 ? x_front : x_rear));

      const plant::Acceleration acc = plant::body_acceleration(x, x.tau_m_actual, in, mu_w, vp, tp);

      if (k % every == 0) {
        double V_meas = x.vx;
        plant::Quad w_meas = x.omega;
        if (spec.speed_noise > 0.0) {
          V_meas += spec.speed_noise * noise(rng);
          for (double& w : w_meas) w += spec.speed_noise * noise(rng) / vp.R;
        }
        // Driver request in the controller's units: motor torque for
        // traction, wheel torque for braking.
        if (spec.driver.kind == DriverKind::full_throttle) {
          tau_driver = spec.controller == ControllerKind::traction
                           ? driver_full_throttle(vp)
                           : vp.gear_ratio * driver_full_throttle(vp);
        } else {
          const double wheel = x.X >= spec.driver.coast_after_x
                                   ? 0.0
                                   : driver_speed_pi(speed_pi, V_meas, spec.driver.target_speed, Ts);
          tau_driver = spec.controller == ControllerKind::traction
                           ? std::clamp(wheel / vp.gear_ratio, 0.0, vp.tau_m_max)
                           : wheel;
        }

        const auto t0 = std::chrono::steady_clock::now();
        if (spec.controller == ControllerKind::traction) {
          if (spec.passive) {
            tau_ctrl = tau_driver;
            stat_mu = spec.friction.sample(proj.s + x_front);
          } else {
            traction::TractionMeasurement m;
            m.V = V_meas;
            m.x.tau_m = x.tau_m_actual;
            m.x.omega_FL = w_meas[plant::FL];
            m.x.omega_FR = w_meas[plant::FR];
            m.x.s_FL = w_meas[plant::FL] * vp.R - V_meas;
            m.x.s_FR = w_meas[plant::FR] * vp.R - V_meas;
            const plant::Quad fz = plant::vertical_loads(acc.ax, acc.ay, vp);
            m.Fz_FL = fz[plant::FL];
            m.Fz_FR = fz[plant::FR];
            const auto info = tc->step(m, tau_driver, spec.friction, proj.s + x_front);
            tau_ctrl = info.tau_m_mod;
            stat_mu = info.mu_now;
            stat_sref = info.sigma_ref;
            stat_iter = info.iterations;
            stat_kkt = info.kkt;
            stat_status = static_cast<double>(info.status);
            stat_fallback = info.fallback;
            if (info.fallback) ++res.fallbacks;
          }
          in.tau_m_cmd = tau_ctrl;
          in.tau_brake.fill(0.0);
        } else {
          braking::TorqueAllocation alloc;
          if (spec.passive) {
            tau_ctrl = tau_driver;
            alloc = braking::allocate_torque(tau_driver, vp, spec.braking.motor_floor,
                                             spec.braking.brake_front_share);
            stat_mu = spec.friction.sample(proj.s);
            stat_vmax = preview::speed_limit(stat_mu, curvature.sample(proj.s), spec.braking.Fs,
                                             spec.braking.V_veh_max);
          } else {
            braking::DtState m;
            m.S = proj.s;
            m.V = std::hypot(V_meas, x.vy);
            m.beta = x.sideslip();
            m.yaw_rate = x.yaw_rate;
            m.omega = w_meas;
            const auto info = dc->step(m, tau_driver, curvature, spec.friction);
            tau_ctrl = info.tau_wh;
            alloc = info.allocation;
            stat_mu = info.mu0;
            stat_vmax = info.V_max_fut0;
            stat_epsV = info.eps_V0;
            stat_epsA = info.eps_alpha0;
            stat_iter = info.iterations;
            stat_kkt = info.kkt;
            stat_status = static_cast<double>(info.status);
            stat_fallback = info.fallback;
            if (info.fallback) ++res.fallbacks;
          }
          in.tau_m_cmd = alloc.motor;
          in.tau_brake = alloc.brake;
        }
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        if (!spec.passive) {
          ++res.controller_calls;
          total_ms += ms;
          res.max_step_ms = std::max(res.max_step_ms, ms);
        }
      }

      const double K_ahead = curvature.sample(proj.s + spec.driver.lookahead);
      in.delta = driver_path_tracking(tracker, proj, K_ahead, spec.dt);

      const auto forces = plant::chassis_forces(x.vx, x.vy, x.yaw_rate, x.omega, in.delta, mu_w,
                                                vp, tp, 2, acc.ax, acc.ay);
      const double V = x.speed();
      const double beta = x.sideslip();
      const bool hit = iso && footprint_hits_gate(x.X, x.Y, x.psi, vp.length, vp.width, course);
      res.cone_hit = res.cone_hit || hit;

      row[cT] = t;
      row[cX] = x.X;
      row[cY] = x.Y;
      row[cPsi] = x.psi;
      row[cVx] = x.vx;
      row[cVy] = x.vy;
      row[cR] = x.yaw_rate;
      for (int i = 0; i < 4; ++i) {
        row[cW0 + i] = x.omega[i];
        row[cWr0 + i] = x.omega[i] * vp.R;
        row[cSig0 + i] = forces.slip_ratio[i];
        row[cB0 + i] = in.tau_brake[i];
      }
      row[cTauAct] = x.tau_m_actual;
      row[cStravel] = x.s_travel;
      row[cPathS] = proj.s;
      row[cLat] = proj.lateral;
      row[cV] = V;
      row[cBeta] = beta;
      row[cAlphaR] = braking::rear_axle_slip_angle(V, beta, x.yaw_rate, vp.b);
      row[cDelta] = in.delta;
      row[cTauDrv] = tau_driver;
      row[cTauCtrl] = tau_ctrl;
      row[cTauCmd] = in.tau_m_cmd;
      double brakes = 0.0;
      for (double b : in.tau_brake) brakes += b;
      row[cTauDel] = vp.gear_ratio * x.tau_m_actual - brakes;
      row[cMu] = stat_mu;
      row[cK] = curvature.sample(proj.s);
      row[cVmax] = stat_vmax;
      row[cEpsV] = stat_epsV;
      row[cEpsA] = stat_epsA;
      row[cSigRef] = stat_sref;
      row[cIter] = stat_iter;
      row[cKkt] = stat_kkt;
      row[cStatus] = stat_status;
      row[cFallback] = stat_fallback;
      row[cCone] = hit ? 1.0 : 0.0;
      log.row(row);

      x = plant::plant_step(x, in, mu_w, spec.dt, vp, tp, line, k);
    }
    if (k >= steps) res.completed = spec.path == PathKind::straight;
  } catch (const SimulationFault& e) {
    res.faulted = true;
    res.fault = e.what();
    log.fault(e.step(), e.what());
  } catch (const IntegrationError& e) {
    res.faulted = true;
    res.fault = e.what();
    log.fault(k, e.what());
  }
  log.close();
  res.steps = k;
  if (res.controller_calls > 0) res.mean_step_ms = total_ms / res.controller_calls;
  return res;
}

}  // namespace pnmpc::harness
