#include "gemsim/solver.hpp"

#include <cmath>
#include <sstream>

namespace gemsim {

Complex input_pulse_amplitude(const std::vector<InputPulse>& pulses, double t)
{
    Complex sum{0.0, 0.0};
    for (const auto& p : pulses) {
        const double u = (t - p.center) / p.width;
        sum += p.amplitude * std::exp(-u * u);
    }
    return sum;
}

FieldProfile propagate_field(const ComplexVector& coherence, Complex input, const SimulationParams& params)
{
    const Complex kick{0.0, params.coupling() * params.spatial_step()};
    FieldProfile out{ComplexVector(coherence.size()), input};
    Complex face = input;
    for (Eigen::Index j = 0; j < coherence.size(); ++j) {
        const Complex next = face + kick * coherence[j];
        out.centres[j] = 0.5 * (face + next);
        face = next;
    }
    out.exit = face;
    return out;
}

double stored_energy(const ComplexVector& coherence, const SimulationParams& params)
{
    return coherence.squaredNorm() * params.spatial_step();
}

namespace {

// Step kernel with cached rotation factors. The coupling stage solves the
// implicit midpoint rule exactly: the centre field is a lower-triangular
// function of the midpoint coherence, so one forward sweep suffices.
class Stepper {
public:
    explicit Stepper(const SimulationParams& params)
        : params_(params), z_(params.z_grid()), rotation_(params.grid_points)
    {
    }

    void configure(const Controls& c, double dt)
    {
        if (configured_ && dt == dt_ && c.gradient == controls_.gradient &&
            c.grating_amplitude == controls_.grating_amplitude &&
            c.grating_wavenumber == controls_.grating_wavenumber && c.grating_phase == controls_.grating_phase)
            return;
        const double z0 = params_.gradient_origin();
        for (Eigen::Index j = 0; j < z_.size(); ++j) {
            const double detuning = c.gradient * (z_[j] - z0) +
                                    c.grating_amplitude * std::cos(c.grating_wavenumber * z_[j] + c.grating_phase);
            rotation_[j] = std::polar(1.0, 0.5 * dt * detuning);
        }
        controls_ = c;
        dt_ = dt;
        configured_ = true;
    }

    /// Returns the exit field at the middle of the coupling stage.
    Complex advance(ComplexVector& sigma, Complex input_mid)
    {
        sigma.array() *= rotation_.array();
        const Complex exit = couple(sigma, input_mid);
        sigma.array() *= rotation_.array();
        return exit;
    }

private:
    Complex couple(ComplexVector& sigma, Complex input_mid) const
    {
        const double g = params_.coupling();
        const double dz = params_.spatial_step();
        const Complex half_kick{0.0, 0.5 * g * dt_};
        const Complex dz_kick{0.0, g * dz};
        const double denom = 1.0 + 0.25 * g * g * dt_ * dz;
        Complex face = input_mid;
        for (Eigen::Index j = 0; j < sigma.size(); ++j) {
            const Complex mid = (sigma[j] + half_kick * face) / denom;
            face += dz_kick * mid;
            sigma[j] = 2.0 * mid - sigma[j];
        }
        return face;
    }

    const SimulationParams& params_;
    RealVector z_;
    ComplexVector rotation_;
    Controls controls_;
    double dt_ = 0.0;
    bool configured_ = false;
};

void check_finite(const ComplexVector& sigma, double t)
{
    const double peak = sigma.cwiseAbs().maxCoeff();
    if (!std::isfinite(peak)) {
        std::ostringstream os;
        os << "non-finite coherence at t = " << t;
        throw NumericalBlowUp(t, os.str());
    }
    if (peak > 1.0) {
        std::ostringstream os;
        os << "|sigma| = " << peak << " exceeds 1 at t = " << t << " (weak-excitation regime violated)";
        throw NumericalBlowUp(t, os.str());
    }
}

}  // namespace

FieldState step(const FieldState& state, const Controls& controls, Complex input_amplitude, double dt,
                const SimulationParams& params)
{
    if (!(dt > 0.0)) throw Error(ErrorKind::Domain, "step: dt must be > 0");
    if (state.coherence.size() != params.grid_points)
        throw Error(ErrorKind::Domain, "step: coherence length does not match grid_points");
    SimulationParams local = params;
    local.time_step = dt;
    if (phase_per_step(controls, local) >= 0.5)
        throw Error(ErrorKind::Domain, "step: dt * max(|eta| L, nu) must stay below 0.5");
    Stepper stepper(params);
    stepper.configure(controls, dt);
    FieldState next{state.time + dt, state.coherence, {}};
    stepper.advance(next.coherence, input_amplitude);
    check_finite(next.coherence, next.time);
    next.field = propagate_field(next.coherence, input_amplitude, params).centres;
    return next;
}

SimulationRecord run(const SimulationParams& params, const ControlSchedule& schedule)
{
    params.check();
    const auto report = validate_schedule(schedule, params);
    if (!report.ok()) throw Error(ErrorKind::Validation, "invalid schedule:\n" + report.summary());

    const double dt = params.time_step;
    const double t0 = schedule.start_time();
    const double span = schedule.end_time() - t0;
    const long n_steps = std::lround(std::ceil(span / dt - 1e-9));
    const auto switches = schedule.switch_times();

    SimulationRecord rec;
    ComplexVector sigma = ComplexVector::Zero(params.grid_points);
    Stepper stepper(params);

    auto snapshot = [&](double t) {
        const Complex in = input_pulse_amplitude(schedule.input_pulses, t);
        rec.snapshots.push_back(FieldState{t, sigma, propagate_field(sigma, in, params).centres});
    };
    auto record = [&](double t) {
        const Complex in = input_pulse_amplitude(schedule.input_pulses, t);
        const Complex out = propagate_field(sigma, in, params).exit;
        rec.times.push_back(t);
        rec.input_intensity.push_back(std::norm(in));
        rec.output_intensity.push_back(std::norm(out));
        rec.stored_energy.push_back(stored_energy(sigma, params));
        const long idx = static_cast<long>(rec.times.size()) - 1;
        if (params.snapshot_stride > 0 && idx % params.snapshot_stride == 0) snapshot(t);
    };
    auto advance = [&](double from, double to) {
        const double h = to - from;
        if (h <= 0.0) return;
        stepper.configure(schedule.at(from), h);
        stepper.advance(sigma, input_pulse_amplitude(schedule.input_pulses, from + 0.5 * h));
    };

    record(t0);
    std::size_t next_switch = 0;
    for (long n = 0; n < n_steps; ++n) {
        const double a = t0 + n * dt;
        const double full = t0 + (n + 1) * dt;
        const double b = std::min(full, schedule.end_time());
        double cursor = a;
        bool snapshot_at_b = false;
        // Segment boundaries inside the step split it so controls switch exactly.
        while (next_switch < switches.size() && switches[next_switch] <= b) {
            const double s = switches[next_switch++];
            if (s <= cursor) continue;
            if (s < b) {
                advance(cursor, s);
                cursor = s;
                snapshot(s);
            } else {
                snapshot_at_b = true;
            }
        }
        advance(cursor, b);
        if ((n + 1) % params.record_stride == 0 && b == full) {
            check_finite(sigma, b);
            record(b);
        }
        if (snapshot_at_b) snapshot(b);
    }
    check_finite(sigma, schedule.end_time());
    return rec;
}

}  // namespace gemsim
