#pragma once

// Physical model inputs: ideal-gas law, piecewise-linear engine geometry and
// the pulsed heat-release schedule.

namespace unstart::engine {

struct GasModel {
  double gamma = 1.4;

  explicit GasModel(double g = 1.4);
};

/// Inflow (free-stream) state. Density and pressure stay fixed at the
/// entrance; only the speed is perturbed.
struct FreeStream {
  double rho = 0.159;
  double u = 1300.0;
  double p = 47842.0;

  double sound_speed(const GasModel& gas) const;
  double mach(const GasModel& gas) const;
  double energy(const GasModel& gas) const { return energy_at(gas, u); }
  /// Total energy density of the inflow cell when it moves at speed `speed`.
  double energy_at(const GasModel& gas, double speed) const;
};

enum class Region { Isolator, Combustor, Expansion };

/// Cross-section A(x) over [-L_I, L_C + L_E]. Angles are given in degrees and
/// converted once at construction.
class EngineGeometry {
 public:
  EngineGeometry(double a0, double len_isolator, double len_combustor, double len_expansion,
                 double theta_isolator_deg, double theta_combustor_deg,
                 double theta_expansion_deg);

  double a0() const { return a0_; }
  double len_isolator() const { return len_i_; }
  double len_combustor() const { return len_c_; }
  double len_expansion() const { return len_e_; }
  double theta_isolator_deg() const { return deg_i_; }
  double theta_combustor_deg() const { return deg_c_; }
  double theta_expansion_deg() const { return deg_e_; }

  double x_min() const { return -len_i_; }
  double x_max() const { return len_c_ + len_e_; }
  double total_length() const { return len_i_ + len_c_ + len_e_; }

  /// Isolator is (-L_I, 0), the combustor [0, L_C], the expansion (L_C, L_C + L_E].
  Region region(double x) const;
  double area(double x) const;
  double area_slope(double x) const;

 private:
  void check_domain(double x) const;

  double a0_, len_i_, len_c_, len_e_;
  double deg_i_, deg_c_, deg_e_;
  double sin_i_, sin_c_, sin_e_;
};

/// Pulsed fueling: heat is released during [n*tau, n*tau + b). A burst equal
/// to the cycle length gives steady fueling.
class FuelSchedule {
 public:
  FuelSchedule(double phi, double cycle, double burst, double f_stoch = 0.029,
               double h_prop = 1.2e8, double rho0 = 0.159, double u0 = 1300.0);

  double phi() const { return phi_; }
  double cycle() const { return tau_; }
  double burst() const { return burst_; }
  double f_stoch() const { return f_stoch_; }
  double h_prop() const { return h_prop_; }
  double rho0() const { return rho0_; }
  double u0() const { return u0_; }

  bool fueling(double t) const;
  /// Volumetric heat release rate f(x, t) in W/m^3.
  double heat_source(const EngineGeometry& geom, double x, double t) const;
  /// Time-independent part of heat_source (zero outside the combustor).
  double spatial_profile(const EngineGeometry& geom, double x) const;

  FuelSchedule with_phi(double phi) const;

 private:
  double phi_, tau_, burst_, f_stoch_, h_prop_, rho0_, u0_;
};

/// 0 or 1 indicator of the fueling phase.
inline int fuel_indicator(const FuelSchedule& sched, double t) { return sched.fueling(t) ? 1 : 0; }

}  // namespace unstart::engine
