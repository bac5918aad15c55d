#include "pnmpc/plant/params_io.hpp"

#include <iomanip>

#include "pnmpc/errors.hpp"

namespace pnmpc::plant {

PlantParams read_plant_params(KvReader& r, const PlantParams& defaults) {
  PlantParams out = defaults;
  VehicleParams& v = out.vehicle;
  constexpr double big = 1e9;
  v.m = r.number("mass", v.m, 1e-6, big);
  v.Iz = r.number("yaw_inertia", v.Iz, 1e-6, big);
  v.a = r.number("cg_to_front", v.a, 1e-6, 100.0);
  v.b = r.number("cg_to_rear", v.b, 1e-6, 100.0);
  v.tw_f = r.number("track_front", v.tw_f, 1e-6, 100.0);
  v.tw_r = r.number("track_rear", v.tw_r, 1e-6, 100.0);
  v.h = r.number("cg_height", v.h, 1e-6, 100.0);
  v.R = r.number("wheel_radius", v.R, 1e-6, 10.0);
  v.Jw = r.number("wheel_inertia", v.Jw, 1e-6, big);
  v.gear_ratio = r.number("gear_ratio", v.gear_ratio, 1e-6, 1000.0);
  v.tau_m_max = r.number("motor_torque_max", v.tau_m_max, 1e-6, big);
  v.drag_coeff = r.number("drag_coeff", v.drag_coeff, 0.0, big);
  v.roll_res = r.number("rolling_resistance", v.roll_res, 0.0, 1.0);
  const std::string axle = r.choice("driven_axle",
                                    v.driven_axle == DrivenAxle::front ? "front" : "rear",
                                    {"front", "rear"});
  v.driven_axle = axle == "front" ? DrivenAxle::front : DrivenAxle::rear;
  v.width = r.number("body_width", v.width, 1e-6, 100.0);
  v.length = r.number("body_length", v.length, 1e-6, 100.0);

  TireParams& t = out.tires;
  t.Bx = r.number("tire_Bx", t.Bx, 1e-9, 1e3);
  t.Cx = r.number("tire_Cx", t.Cx, 1.0 + 1e-12, 2.5);
  t.Dx = r.number("tire_Dx", t.Dx, 0.5 + 1e-12, 1.5);
  t.Ex = r.number("tire_Ex", t.Ex, -100.0, 1.0 - 1e-12);
  t.By = r.number("tire_By", t.By, 1e-9, 1e3);
  t.Cy = r.number("tire_Cy", t.Cy, 1.0 + 1e-12, 2.5);
  t.Dy = r.number("tire_Dy", t.Dy, 0.5 + 1e-12, 1.5);
  t.Ey = r.number("tire_Ey", t.Ey, -100.0, 1.0 - 1e-12);
  t.Fz0 = r.number("tire_Fz0", t.Fz0, 1e-6, big);

  out.actuator_delay = r.number("actuator_delay", out.actuator_delay, 0.0, 10.0);
  out.actuator_lag = r.number("actuator_lag", out.actuator_lag, 0.0, 10.0);
  return out;
}

PlantParams load_plant_params(const std::filesystem::path& path) {
  const KvConfig cfg = KvConfig::load(path);
  KvReader reader(cfg);
  PlantParams p = read_plant_params(reader);
  reader.finish();
  return p;
}

void write_plant_params(std::ostream& out, const PlantParams& params) {
  const VehicleParams& v = params.vehicle;
  const TireParams& t = params.tires;
  const auto flags = out.flags();
  out << std::setprecision(17);
  out << "mass = " << v.m << "\n"
      << "yaw_inertia = " << v.Iz << "\n"
      << "cg_to_front = " << v.a << "\n"
      << "cg_to_rear = " << v.b << "\n"
      << "track_front = " << v.tw_f << "\n"
      << "track_rear = " << v.tw_r << "\n"
      << "cg_height = " << v.h << "\n"
      << "wheel_radius = " << v.R << "\n"
      << "wheel_inertia = " << v.Jw << "\n"
      << "gear_ratio = " << v.gear_ratio << "\n"
      << "motor_torque_max = " << v.tau_m_max << "\n"
      << "drag_coeff = " << v.drag_coeff << "\n"
      << "rolling_resistance = " << v.roll_res << "\n"
      << "driven_axle = " << (v.driven_axle == DrivenAxle::front ? "front" : "rear") << "\n"
      << "body_width = " << v.width << "\n"
      << "body_length = " << v.length << "\n"
      << "tire_Bx = " << t.Bx << "\n"
      << "tire_Cx = " << t.Cx << "\n"
      << "tire_Dx = " << t.Dx << "\n"
      << "tire_Ex = " << t.Ex << "\n"
      << "tire_By = " << t.By << "\n"
      << "tire_Cy = " << t.Cy << "\n"
      << "tire_Dy = " << t.Dy << "\n"
      << "tire_Ey = " << t.Ey << "\n"
      << "tire_Fz0 = " << t.Fz0 << "\n"
      << "actuator_delay = " << params.actuator_delay << "\n"
      << "actuator_lag = " << params.actuator_lag << "\n";
  out.flags(flags);
}

}  // namespace pnmpc::plant
