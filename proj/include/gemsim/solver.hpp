#pragma once

// Time-domain integrator for the rescaled one-dimensional Maxwell-Bloch system
//
//   dE/dz     = i sqrt(N) sigma
//   dsigma/dt = i [eta(t) (z - z0) + nu(t) cos(k_R z + phi)] sigma + i sqrt(N) E
//
// with E(0, t) fixed by the input pulses and sigma = 0 initially.

#include <vector>

#include "gemsim/core.hpp"

namespace gemsim {

struct SimulationRecord {
    std::vector<double> times;
    std::vector<double> input_intensity;   // |E(0, t)|^2
    std::vector<double> output_intensity;  // |E(L, t)|^2
    std::vector<double> stored_energy;     // int |sigma|^2 dz
    std::vector<FieldState> snapshots;

    std::size_t size() const { return times.size(); }
    bool empty() const { return times.empty(); }
    double sample_interval() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

/// Sum of the Gaussian input envelopes at time t.
Complex input_pulse_amplitude(const std::vector<InputPulse>& pulses, double t);

/// Field envelope at the cell centres and at the exit face implied by a coherence profile.
struct FieldProfile {
    ComplexVector centres;
    Complex exit;
};
FieldProfile propagate_field(const ComplexVector& coherence, Complex input, const SimulationParams& params);

/// Integrated |sigma|^2 over the sample.
double stored_energy(const ComplexVector& coherence, const SimulationParams& params);

/// Advances the state by dt with a Strang split: half-step exact detuning
/// rotation, full implicit-midpoint light-matter coupling, half-step rotation.
/// `input_amplitude` is the entrance field at the middle of the step.
FieldState step(const FieldState& state, const Controls& controls, Complex input_amplitude, double dt,
                const SimulationParams& params);

/// Integrates from the schedule start to its end. Throws Error(Validation) if
/// validate_schedule() reports findings and NumericalBlowUp on divergence.
SimulationRecord run(const SimulationParams& params, const ControlSchedule& schedule);

}  // namespace gemsim
