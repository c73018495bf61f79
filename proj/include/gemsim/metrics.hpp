#pragma once

// Observables computed from simulation records: retrieval efficiency, energy
// balance, pulse detection and matched-filter identification, and the
// efficiency-versus-grating-duration sweep.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gemsim/sequencer.hpp"
#include "gemsim/solver.hpp"

namespace gemsim {

struct EfficiencyReport {
    TimeWindow window;
    double output_energy = 0.0;
    double input_energy = 0.0;
    double efficiency = 0.0;
    std::optional<double> baseline_efficiency;

    /// efficiency / baseline_efficiency, when a baseline is known.
    std::optional<double> normalized() const;
};

/// Trapezoidal integral of samples whose times fall inside `window`.
double integrate(std::span<const double> times, std::span<const double> values, TimeWindow window);

/// Output energy inside the window over the total input energy. Throws
/// Error(Domain) for zero input energy or a window outside the record.
EfficiencyReport retrieval_efficiency(const SimulationRecord& record, TimeWindow window,
                                      std::optional<double> baseline = std::nullopt);

/// max_t |int_0^t (|E_in|^2 - |E_out|^2) - (W(t) - W(0))| / total input energy.
double energy_balance(const SimulationRecord& record);

/// Largest relative drift of the stored energy inside the window.
double stored_energy_drift(const SimulationRecord& record, TimeWindow window);

struct DetectedPulse {
    double peak_time = 0.0;
    double peak_intensity = 0.0;
    double energy = 0.0;
    std::vector<double> times;
    std::vector<double> intensity;
};

/// Peaks whose height and prominence both exceed threshold_fraction * max(intensity);
/// each slice runs to the valleys separating it from its neighbours.
/// Peak times are refined by a parabola through the three highest samples.
std::vector<DetectedPulse> detect_pulses(std::span<const double> times, std::span<const double> intensity,
                                         double threshold_fraction);
std::vector<DetectedPulse> detect_pulses(const SimulationRecord& record, double threshold_fraction);

/// Peak of the normalised cross-correlation of two uniformly sampled envelopes
/// over all integer lags.
double normalized_cross_correlation(std::span<const double> a, std::span<const double> b);

struct PulseMatch {
    int input = -1;        // best-matching input index
    double forward = 0.0;  // NCC with that input as recorded
    double reversed = 0.0; // NCC with that input time-reversed
};

/// Identifies each output pulse against the input pulses by amplitude-envelope
/// matched filtering, allowing either time orientation.
std::vector<PulseMatch> match_pulses(const std::vector<DetectedPulse>& inputs,
                                     const std::vector<DetectedPulse>& outputs);

struct SweepPoint {
    double tau = 0.0;
    double efficiency = 0.0;
    double normalized = 0.0;
};

using PlanFactory = std::function<ProtocolPlan(double tau)>;

/// One independent simulation per tau, each scored in the plan's own read-out
/// window and normalised by the tau = 0 run. Points run concurrently.
std::vector<SweepPoint> efficiency_sweep(const SimulationParams& params, const PlanFactory& plan_for,
                                         std::span<const double> taus);

struct BesselFit {
    double amplitude = 0.0;
    double r_squared = 0.0;
};

/// Least-squares fit of normalized(tau) = A J_0(nu tau)^2 with A the only free parameter.
BesselFit fit_j0_squared(std::span<const SweepPoint> points, double nu);

/// nu * tau of the first interior minimum, refined by a parabola through the
/// neighbouring samples.
double first_null(std::span<const SweepPoint> points, double nu);

}  // namespace gemsim
