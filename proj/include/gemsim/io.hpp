#pragma once

// Flat key-value experiment configs, experiment orchestration and CSV
// serialization of records, k-space maps and spectra.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gemsim/kspace.hpp"
#include "gemsim/metrics.hpp"
#include "gemsim/sequencer.hpp"
#include "gemsim/solver.hpp"

namespace gemsim {

enum class Protocol { PlainGem, TofDiffraction, Sweep, Fifo, Reorder, CustomSchedule };

const char* to_string(Protocol protocol);

struct ExperimentConfig {
    Protocol protocol = Protocol::PlainGem;
    SimulationParams params;  // atomic_density derived from optical_depth and gradient

    double optical_depth = 5.4;
    double gradient = 2.0 * kPi / 5.4;
    double emission_period = 15.0 / 7.0;  // k_R / eta
    double nu = 2.0;
    double tau = 1.0;
    double grating_phase = 0.0;
    bool refocus = false;
    double t0 = 15.0;
    std::vector<InputPulse> pulses{InputPulse{1.5, 0.5, {1.0, 0.0}}};

    double settle_time = 1.0;
    double tail_time = 3.0;
    std::optional<double> grating_duration;

    // Sweep range in units of nu * tau.
    double sweep_min = 0.0;
    double sweep_max = 5.0;
    int sweep_points = 51;

    double detection_threshold = 0.05;
    std::filesystem::path schedule_file;
    std::filesystem::path output_dir = "gemsim_out";

    double grating_wavenumber() const { return emission_period * gradient; }
    GratingSettings grating() const { return GratingSettings{nu, grating_wavenumber()}; }
    TofOptions tof_options(double tau_value) const;
    SequencerOptions sequencer_options() const;
};

/// Parses `key = value` lines with `#` comments. Relative schedule paths are
/// resolved against `base_dir`. Throws Error(Validation) naming the line for
/// malformed lines, unknown or repeated keys, bad values and missing required
/// keys.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});

/// Error(Io) if the file cannot be read, otherwise as parse_config.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Reads `t_start,t_end,gradient,grating_amplitude,grating_wavenumber,grating_phase`
/// rows (header optional).
ControlSchedule read_schedule_csv(const std::filesystem::path& path);

/// The protocol's plan. Sweep configs yield the time-of-flight plan at `tau`.
ProtocolPlan make_plan(const ExperimentConfig& config);

/// Validates params and the plan without simulating. The report is empty when
/// everything passes.
ValidationReport validate_config(const ExperimentConfig& config);

/// Sweep grid of tau values derived from the nu * tau range.
std::vector<double> sweep_taus(const ExperimentConfig& config);

struct ExperimentResult {
    ProtocolPlan plan;
    SimulationRecord record;
    std::vector<DetectedPulse> outputs;
    std::vector<PulseMatch> matches;
    std::optional<EfficiencyReport> efficiency;
    std::vector<SweepPoint> sweep;
    std::optional<BesselFit> fit;
    std::optional<double> null_position;
    double balance = 0.0;
};

/// Runs the configured protocol and, when `write` is set, writes
/// timeseries.csv, kmap.csv, report.txt and (for sweeps) sweep.csv into
/// config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config, bool write = true);

std::string format_double(double v);

void write_timeseries(const SimulationRecord& record, std::ostream& out);
void write_kmap(const SimulationRecord& record, const SimulationParams& params, std::ostream& out);
void write_sweep(const std::vector<SweepPoint>& points, std::ostream& out);
void write_report(const ExperimentConfig& config, const ExperimentResult& result, std::ostream& out);

/// CSV `k,re_psi,im_psi,abs2_psi`, k ascending. Error(Io) on write failure.
void export_spectrum(const PolaritonSpectrum& spectrum, const std::filesystem::path& path);

struct SpectrumRow {
    double k = 0.0;
    Complex psi;
    double abs2 = 0.0;
};
std::vector<SpectrumRow> read_spectrum_csv(const std::filesystem::path& path);

}  // namespace gemsim
