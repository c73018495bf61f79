#pragma once

// Shared domain types for the gradient-echo memory model.
//
// Every quantity is dimensionless: lengths are measured in units of
// l = c / g0 and times in units of 1 / g0, where g0 is the single-atom
// vacuum coupling. The field envelope and the coherence are c-numbers.

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gemsim {

template <typename Scalar>
using ComplexVectorT = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using RealVectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using ComplexVector = ComplexVectorT<double>;
using RealVector = RealVectorT<double>;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind { Domain, Validation, Numerical, Io };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised when the integrator produces NaN/Inf or leaves the weak-excitation regime.
class NumericalBlowUp : public Error {
public:
    NumericalBlowUp(double time, const std::string& what)
        : Error(ErrorKind::Numerical, what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

struct SimulationParams {
    /// N in the coupling sqrt(N) of the Maxwell-Bloch equations.
    double atomic_density = 1.0;
    double sample_length = 25.0;
    int grid_points = 512;
    double time_step = 0.01;
    /// Integration steps between recorded samples.
    int record_stride = 5;
    /// Recorded samples between field snapshots (0 disables periodic snapshots).
    int snapshot_stride = 20;
    /// Position where the gradient detuning vanishes; the sample centre when unset.
    std::optional<double> detuning_origin;

    double spatial_step() const { return sample_length / grid_points; }
    double coupling() const;
    double gradient_origin() const { return detuning_origin.value_or(0.5 * sample_length); }
    /// Cell-centred sample positions z_j = (j + 1/2) dz.
    RealVector z_grid() const;
    /// Absorption depth 2 pi N / |eta| of the broadened line.
    double optical_depth(double gradient) const;
    /// Inverse of optical_depth(): the density giving depth `depth` at slope `gradient`.
    static double density_for(double depth, double gradient);

    /// Throws Error(Validation) when a field is out of range.
    void check() const;
};

/// Control values in force over one schedule segment.
struct Controls {
    double gradient = 0.0;             // eta
    double grating_amplitude = 0.0;    // nu
    double grating_wavenumber = 0.0;   // k_R
    double grating_phase = 0.0;        // phi in cos(k_R z + phi)
};

struct Segment {
    double t_start = 0.0;
    double t_end = 0.0;
    Controls controls;
};

/// Gaussian input envelope amplitude * exp(-((t - center) / width)^2).
struct InputPulse {
    double center = 0.0;
    double width = 1.0;
    Complex amplitude{1.0, 0.0};
};

struct ControlSchedule {
    std::vector<Segment> segments;
    std::vector<InputPulse> input_pulses;

    double start_time() const;
    double end_time() const;
    /// Controls at t using half-open [t_start, t_end) segments; t == end_time()
    /// maps to the last segment.
    const Controls& at(double t) const;
    /// Interior segment boundaries, ascending.
    std::vector<double> switch_times() const;
};

struct FieldState {
    double time = 0.0;
    ComplexVector coherence;  // sigma_12 at cell centres
    ComplexVector field;      // envelope E at cell centres

    static FieldState zero(int grid_points, double time = 0.0);
};

struct PhysicalGratingSpec {
    double rabi_frequency = 0.0;   // Omega, rad/s
    double detuning = 0.0;         // Delta, rad/s
    double angle = 0.0;            // theta between the two beams, rad
    double wavelength = 0.0;       // lambda, m
    double vacuum_coupling = 0.0;  // g0, rad/s
    /// Caller asserts |Delta| is much larger than the excited-state decay rate.
    bool far_detuned = true;
};

struct GratingSettings {
    double amplitude = 0.0;   // nu
    double wavenumber = 0.0;  // k_R
};

inline constexpr double kSpeedOfLight = 299792458.0;

/// Fringe period d = 2 lambda / theta^2 of two beams crossing at a small angle.
double fringe_spacing(double wavelength, double angle);

/// Dimensionless light-shift grating produced by two detuned beams.
///
/// nu = Omega^2 / Delta / g0 and k = (pi theta^2 / lambda) * (c / g0).
///
/// Note on the length unit: with g0 = 3 kHz and k = 1.5e7 this conversion gives
/// a period 2 pi c / (g0 k) of about 42 mm (or about 6.7 mm if g0 is read as
/// 2 pi x 3 kHz), while the 16 mm quoted for that configuration matches
/// neither. Nothing else in the library depends on SI units.
GratingSettings grating_from_lasers(const PhysicalGratingSpec& spec);

enum class FindingKind { InvalidSegment, NonContiguous, Nyquist, PulseBandwidth, InvalidPulse, TimeStep };

struct Finding {
    FindingKind kind;
    std::string message;
};

struct ValidationReport {
    std::vector<Finding> findings;

    bool ok() const { return findings.empty(); }
    bool has(FindingKind kind) const;
    std::string summary() const;
};

/// Largest |k| any spin-wave component can reach under the schedule,
/// including a margin of three orders beyond the grating modulation depth.
double wavenumber_bound(const ControlSchedule& schedule);

/// Largest coherence phase advance in one time step under these controls,
/// dt * max(|eta| L, nu).
double phase_per_step(const Controls& controls, const SimulationParams& params);

ValidationReport validate_schedule(const ControlSchedule& schedule, const SimulationParams& params);

const char* to_string(FindingKind kind);

}  // namespace gemsim
