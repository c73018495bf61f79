#pragma once

// Control-schedule builders for the diffraction read-out and pulse-sequencing
// protocols, together with the analytic timing laws they rely on.
//
// All builders track the spin-wave wavenumber with k(t) = int eta dt: a
// component absorbed at t_a sits at k = K(t) - K(t_a) and is emitted when that
// returns to zero while the gradient is on.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gemsim/core.hpp"

namespace gemsim {

enum class Regime { I, II };

const char* to_string(Regime regime);

struct TimeWindow {
    double start = 0.0;
    double end = 0.0;

    double centre() const { return 0.5 * (start + end); }
    bool contains(double t) const { return t >= start && t <= end; }
};

struct Emission {
    int order = 0;      // diffraction order; 0 for sequencer outputs
    double time = 0.0;
    int input = -1;     // index of the logical input pulse, or -1 for time-of-flight orders
};

struct ProtocolPlan {
    ControlSchedule schedule;
    std::vector<Emission> predicted_emissions;  // ascending in time
    Regime regime = Regime::II;
    /// Time between successive diffraction orders reaching k = 0.
    double emission_spacing = 0.0;
    /// Windows in which a depleted zeroth order crosses k = 0 without emitting.
    std::vector<TimeWindow> suppressed_crossings;
    std::vector<std::string> notes;

    /// Window of +/- half an emission spacing around the first order-0 emission.
    TimeWindow readout_window() const;
};

/// Regime I when populated_orders * k_R > eta (t0 - t_in), regime II otherwise
/// (equality counts as II).
Regime classify_regime(int populated_orders, double grating_wavenumber, double gradient, double t0, double t_in);

/// n' = ceil(nu tau), the number of orders a grating window populates.
int populated_orders(double nu, double tau);

/// T_n = T_0 + n k_R / eta for each requested order.
std::vector<Emission> predict_emission_times(double t_zero, double grating_wavenumber, double gradient,
                                             std::span<const int> orders);

/// Grating duration j_{0,1} / nu at which the zeroth order is fully depleted.
double depletion_duration(double nu);

/// Input pulses whose +/-2.5 width supports overlap form one logical pulse.
struct PulseGroup {
    std::vector<InputPulse> parts;
    double start = 0.0;
    double end = 0.0;
    double peak = 0.0;  // time of maximum |envelope|
};
std::vector<PulseGroup> group_pulses(const std::vector<InputPulse>& pulses);

struct TofOptions {
    double gradient = 1.0;
    double t0 = 15.0;           // gradient off, grating on
    double tau = 0.0;           // grating duration
    GratingSettings grating;
    double grating_phase = 0.0;
    /// Follow the grating with an equal window at phase + pi before read-out.
    bool refocus = false;
};

/// Store under +eta, diffract for tau with the gradient off, read out under -eta.
ProtocolPlan build_tof_plan(const SimulationParams& params, const InputPulse& pulse, const TofOptions& options);

struct SequencerOptions {
    double gradient = 1.0;
    GratingSettings grating;
    /// Gradient-on time between the end of the last input and the first grating window.
    double settle_time = 1.0;
    /// Overrides the depleting grating duration (default: depletion_duration(nu)).
    std::optional<double> grating_duration;
    /// Gradient-on time kept after the last predicted output.
    double tail_time = 3.0;
};

/// First-in-first-out recall: deplete the zeroth order, pass the k = 0 crossing
/// silently under -eta, refocus with a pi-shifted grating, release under +eta.
/// Throws Error(Validation) unless the inputs sit in regime I with room for the
/// crossing.
ProtocolPlan build_fifo_plan(const SimulationParams& params, const std::vector<InputPulse>& pulses,
                             const SequencerOptions& options);

/// Releases the last logical pulse with a plain echo, then runs the FIFO
/// sequence on the rest: inputs 1, 2, 3 come out as 3, 1, 2.
ProtocolPlan build_reorder_plan(const SimulationParams& params, const std::vector<InputPulse>& pulses,
                                const SequencerOptions& options);

}  // namespace gemsim
