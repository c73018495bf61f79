#include "gemsim/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gemsim {

double SimulationParams::coupling() const { return std::sqrt(atomic_density); }

RealVector SimulationParams::z_grid() const
{
    const double dz = spatial_step();
    return RealVector::NullaryExpr(grid_points, [dz](Eigen::Index j) { return (j + 0.5) * dz; });
}

double SimulationParams::optical_depth(double gradient) const
{
    if (gradient == 0.0) throw Error(ErrorKind::Domain, "optical depth undefined for a zero gradient");
    return 2.0 * kPi * atomic_density / std::abs(gradient);
}

double SimulationParams::density_for(double depth, double gradient)
{
    if (depth < 0.0 || gradient == 0.0)
        throw Error(ErrorKind::Domain, "density_for needs depth >= 0 and a nonzero gradient");
    return depth * std::abs(gradient) / (2.0 * kPi);
}

void SimulationParams::check() const
{
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::Validation, msg); };
    if (!(atomic_density >= 0.0)) fail("atomic_density must be >= 0");
    if (!(sample_length > 0.0)) fail("sample_length must be > 0");
    if (grid_points < 16) fail("grid_points must be >= 16");
    if (!(time_step > 0.0)) fail("time_step must be > 0");
    if (record_stride < 1) fail("record_stride must be >= 1");
    if (snapshot_stride < 0) fail("snapshot_stride must be >= 0");
    if (detuning_origin && !std::isfinite(*detuning_origin)) fail("detuning_origin must be finite");
}

double ControlSchedule::start_time() const
{
    return segments.empty() ? 0.0 : segments.front().t_start;
}

double ControlSchedule::end_time() const
{
    return segments.empty() ? 0.0 : segments.back().t_end;
}

const Controls& ControlSchedule::at(double t) const
{
    if (segments.empty()) throw Error(ErrorKind::Validation, "schedule has no segments");
    auto it = std::upper_bound(segments.begin(), segments.end(), t,
                               [](double value, const Segment& s) { return value < s.t_end; });
    if (it == segments.end()) return segments.back().controls;
    return it->controls;
}

std::vector<double> ControlSchedule::switch_times() const
{
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) out.push_back(segments[i].t_end);
    return out;
}

FieldState FieldState::zero(int grid_points, double time)
{
    return FieldState{time, ComplexVector::Zero(grid_points), ComplexVector::Zero(grid_points)};
}

double fringe_spacing(double wavelength, double angle)
{
    if (!(angle > 0.0)) throw Error(ErrorKind::Domain, "grating angle must be > 0 (infinite fringe spacing)");
    if (!(wavelength > 0.0)) throw Error(ErrorKind::Domain, "wavelength must be > 0");
    return 2.0 * wavelength / (angle * angle);
}

GratingSettings grating_from_lasers(const PhysicalGratingSpec& spec)
{
    if (spec.detuning == 0.0) throw Error(ErrorKind::Domain, "grating detuning must be nonzero");
    if (!(spec.vacuum_coupling > 0.0)) throw Error(ErrorKind::Domain, "vacuum coupling g0 must be > 0");
    const double spacing = fringe_spacing(spec.wavelength, spec.angle);
    const double light_shift = spec.rabi_frequency * spec.rabi_frequency / spec.detuning;
    const double wavenumber = 2.0 * kPi / spacing;
    return GratingSettings{light_shift / spec.vacuum_coupling,
                           wavenumber * kSpeedOfLight / spec.vacuum_coupling};
}

bool ValidationReport::has(FindingKind kind) const
{
    return std::any_of(findings.begin(), findings.end(), [kind](const Finding& f) { return f.kind == kind; });
}

std::string ValidationReport::summary() const
{
    std::ostringstream os;
    for (const auto& f : findings) os << to_string(f.kind) << ": " << f.message << '\n';
    return os.str();
}

const char* to_string(FindingKind kind)
{
    switch (kind) {
    case FindingKind::InvalidSegment: return "invalid-segment";
    case FindingKind::NonContiguous: return "non-contiguous";
    case FindingKind::Nyquist: return "Nyquist";
    case FindingKind::PulseBandwidth: return "pulse-bandwidth";
    case FindingKind::InvalidPulse: return "invalid-pulse";
    case FindingKind::TimeStep: return "time-step";
    }
    return "unknown";
}

namespace {

// Piecewise-linear running integral of the gradient, K(t) = int eta dt'.
class GradientIntegral {
public:
    explicit GradientIntegral(const ControlSchedule& s) : schedule_(s)
    {
        double acc = 0.0;
        for (const auto& seg : s.segments) {
            knots_.push_back(acc);
            acc += seg.controls.gradient * (seg.t_end - seg.t_start);
        }
        knots_.push_back(acc);
    }

    double operator()(double t) const
    {
        const auto& segs = schedule_.segments;
        if (t <= segs.front().t_start) return 0.0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            if (t < segs[i].t_end) return knots_[i] + segs[i].controls.gradient * (t - segs[i].t_start);
        }
        return knots_.back();
    }

    double min_value() const { return *std::min_element(knots_.begin(), knots_.end()); }
    double max_value() const { return *std::max_element(knots_.begin(), knots_.end()); }

private:
    const ControlSchedule& schedule_;
    std::vector<double> knots_;
};

}  // namespace

double phase_per_step(const Controls& controls, const SimulationParams& params)
{
    return params.time_step *
           std::max(std::abs(controls.gradient) * params.sample_length, std::abs(controls.grating_amplitude));
}

double wavenumber_bound(const ControlSchedule& schedule)
{
    if (schedule.segments.empty()) return 0.0;
    const GradientIntegral K(schedule);

    // Range of K over the absorption windows of the pulses.
    double a_min = 0.0, a_max = 0.0;
    bool any = false;
    for (const auto& p : schedule.input_pulses) {
        const double lo = std::clamp(p.center - 3.0 * p.width, schedule.start_time(), schedule.end_time());
        const double hi = std::clamp(p.center + 3.0 * p.width, schedule.start_time(), schedule.end_time());
        std::vector<double> probes{lo, hi};
        for (double t : schedule.switch_times())
            if (t > lo && t < hi) probes.push_back(t);
        for (double t : probes) {
            const double v = K(t);
            a_min = any ? std::min(a_min, v) : v;
            a_max = any ? std::max(a_max, v) : v;
            any = true;
        }
    }
    double bound = any ? std::max(K.max_value() - a_min, a_max - K.min_value()) : 0.0;

    // Grating phases add up pointwise in z, so the modulation depth at any
    // instant is the modulus of the running phasor sum.
    Complex phasor{0.0, 0.0};
    double depth = 0.0, k_max = 0.0;
    for (const auto& seg : schedule.segments) {
        const auto& c = seg.controls;
        if (c.grating_amplitude == 0.0) continue;
        phasor += c.grating_amplitude * (seg.t_end - seg.t_start) * std::polar(1.0, c.grating_phase);
        depth = std::max(depth, std::abs(phasor));
        k_max = std::max(k_max, std::abs(c.grating_wavenumber));
    }
    if (k_max > 0.0) bound += (std::ceil(depth) + 3.0) * k_max;
    return bound;
}

ValidationReport validate_schedule(const ControlSchedule& schedule, const SimulationParams& params)
{
    ValidationReport report;
    auto add = [&](FindingKind kind, const std::string& msg) { report.findings.push_back({kind, msg}); };

    if (schedule.segments.empty()) {
        add(FindingKind::InvalidSegment, "schedule has no segments");
        return report;
    }
    for (std::size_t i = 0; i < schedule.segments.size(); ++i) {
        const auto& s = schedule.segments[i];
        std::ostringstream where;
        where << "segment " << i << " [" << s.t_start << ", " << s.t_end << ")";
        if (!(s.t_end > s.t_start)) add(FindingKind::InvalidSegment, where.str() + " has non-positive duration");
        if (s.controls.grating_amplitude < 0.0)
            add(FindingKind::InvalidSegment, where.str() + " has a negative grating amplitude");
        if (i + 1 < schedule.segments.size()) {
            const auto& next = schedule.segments[i + 1];
            if (next.t_start != s.t_end) {
                std::ostringstream os;
                os << where.str() << " ends at " << s.t_end << " but segment " << i + 1 << " starts at "
                   << next.t_start << (next.t_start > s.t_end ? " (gap)" : " (overlap)");
                add(FindingKind::NonContiguous, os.str());
            }
        }
    }

    const double dz = params.spatial_step();
    const double k_bound = wavenumber_bound(schedule);
    if (dz * k_bound >= kPi) {
        std::ostringstream os;
        os << "spin-wave wavenumbers reach " << k_bound << " but the grid resolves only |k| < " << kPi / dz
           << " (dz = " << dz << ")";
        add(FindingKind::Nyquist, os.str());
    }

    for (std::size_t i = 0; i < schedule.segments.size(); ++i) {
        const double phase = phase_per_step(schedule.segments[i].controls, params);
        if (phase >= 0.5) {
            std::ostringstream os;
            os << "segment " << i << " rotates the coherence by " << phase << " rad per step (dt = " << params.time_step
               << "); keep dt * max(|eta| L, nu) below 0.5";
            add(FindingKind::TimeStep, os.str());
        }
    }

    const double origin = params.gradient_origin();
    const double reach = std::min(origin, params.sample_length - origin);
    for (std::size_t i = 0; i < schedule.input_pulses.size(); ++i) {
        const auto& p = schedule.input_pulses[i];
        if (!(p.width > 0.0)) {
            add(FindingKind::InvalidPulse, "pulse " + std::to_string(i) + " has non-positive width");
            continue;
        }
        // Spectral intensity exp(-w^2 w^2 / 2) falls below 1e-4 beyond 4.3 / w.
        const double half_bandwidth = 4.0 / p.width;
        const double half_line = std::abs(schedule.at(p.center).gradient) * reach;
        if (half_bandwidth > half_line) {
            std::ostringstream os;
            os << "pulse " << i << " needs a half bandwidth of " << half_bandwidth
               << " but the gradient-broadened line only covers +/-" << half_line;
            add(FindingKind::PulseBandwidth, os.str());
        }
    }
    return report;
}

}  // namespace gemsim
