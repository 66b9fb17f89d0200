#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "nufocus/config.hpp"
#include "nufocus/propagator.hpp"

namespace nufocus {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Electron Bloch vector s (spin S = s/2) with x along the field, z along the
/// optical axis, plus the trion population made by the pulse.
struct BlochState {
  Vec3 s = Vec3::Zero();
  double trion_yield = 0.0;
};

/// Electron state straight after a pulse, before the trion returns. `s` is the
/// unnormalized electron block: its trace is 1 - trion_yield.
struct PulseOutcome {
  Vec3 s = Vec3::Zero();
  double trion_yield = 0.0;
};

/// Applies the centre-referenced pulse to an electron with Bloch vector s_in
/// and an empty trion.
PulseOutcome apply_pulse(const Propagator& u, const Vec3& s_in);

/// Dark period between pulses: instantaneous incoherent trion return, then
/// precession about x by omega_e*T_R with transverse decay exp(-T_R/T2).
struct InterpulseChannel {
  double angle = 0.0;  // rad
  double decay = 1.0;  // transverse factor

  static InterpulseChannel make(double omega_e, const DotParams& dot);

  Vec3 apply(const Vec3& s) const;

  struct Populations {
    double x_plus, x_minus;
  };
  /// Electron populations once the trion population has been split equally.
  static Populations after_dump(const PulseOutcome& out);
};

/// One period from just after a pulse to just after the next:
/// s' = M s + b. The trion yield of that next pulse is
/// trion_gradient . s_pre + trion_offset, with s_pre the pre-pulse vector.
struct PeriodMap {
  Mat3 M = Mat3::Identity();
  Vec3 b = Vec3::Zero();
  Vec3 trion_gradient = Vec3::Zero();
  double trion_offset = 0.0;
  InterpulseChannel channel;

  Vec3 apply(const Vec3& s) const { return M * s + b; }
  double trion_yield(const Vec3& s_after) const {
    return trion_gradient.dot(channel.apply(s_after)) + trion_offset;
  }
  double spectral_radius() const;
};

PeriodMap build_period_map(const Propagator& u, double omega_e, const DotParams& dot);

/// Fixed point of the period map, reported just after the pulse, with the
/// trion yield of the pulse that produced it.
/// A map that does not contract (T2 infinite) has no unique fixed point; with
/// no optical pumping (b = 0) the unpolarized s = 0 is returned, otherwise
/// NonContractive is thrown.
BlochState steady_state(const PeriodMap& map);
BlochState steady_state(const Propagator& u, double omega_e, const DotParams& dot);

/// Steady state at each frequency of a strictly increasing grid above
/// omega_min. Rows keep the grid order for any thread count.
std::vector<BlochState> spin_vs_frequency(const PulseParams& pulse, const DotParams& dot,
                                          std::span<const double> omegas, const Numerics& numerics,
                                          int threads = 1);

}  // namespace nufocus
