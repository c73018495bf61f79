#include "gemsim/sequencer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gemsim/bessel.hpp"
#include "gemsim/solver.hpp"

namespace gemsim {

const char* to_string(Regime regime) { return regime == Regime::I ? "I" : "II"; }

TimeWindow ProtocolPlan::readout_window() const
{
    for (const auto& e : predicted_emissions) {
        if (e.order == 0) {
            const double half = emission_spacing > 0.0 ? 0.5 * emission_spacing : 0.5 * (schedule.end_time() - e.time);
            return TimeWindow{e.time - half, std::min(e.time + half, schedule.end_time())};
        }
    }
    return TimeWindow{schedule.start_time(), schedule.end_time()};
}

Regime classify_regime(int populated_orders, double grating_wavenumber, double gradient, double t0, double t_in)
{
    const double stored_k = gradient * (t0 - t_in);
    return populated_orders * grating_wavenumber > stored_k ? Regime::I : Regime::II;
}

int populated_orders(double nu, double tau) { return static_cast<int>(std::ceil(std::abs(nu * tau))); }

std::vector<Emission> predict_emission_times(double t_zero, double grating_wavenumber, double gradient,
                                             std::span<const int> orders)
{
    if (!(gradient > 0.0)) throw Error(ErrorKind::Domain, "predict_emission_times: gradient must be > 0");
    std::vector<Emission> out;
    for (int n : orders) out.push_back(Emission{n, t_zero + n * grating_wavenumber / gradient, -1});
    std::stable_sort(out.begin(), out.end(), [](const Emission& a, const Emission& b) { return a.time < b.time; });
    return out;
}

double depletion_duration(double nu)
{
    if (!(nu > 0.0)) throw Error(ErrorKind::Domain, "depletion_duration: nu must be > 0");
    static const double root = bessel_j0_first_zero();
    return root / nu;
}

std::vector<PulseGroup> group_pulses(const std::vector<InputPulse>& pulses)
{
    std::vector<InputPulse> sorted = pulses;
    std::sort(sorted.begin(), sorted.end(), [](const InputPulse& a, const InputPulse& b) { return a.center < b.center; });
    std::vector<PulseGroup> groups;
    for (const auto& p : sorted) {
        const double lo = p.center - 2.5 * p.width;
        const double hi = p.center + 2.5 * p.width;
        if (groups.empty() || lo > groups.back().end) {
            groups.push_back(PulseGroup{{p}, lo, hi, p.center});
        } else {
            groups.back().parts.push_back(p);
            groups.back().start = std::min(groups.back().start, lo);
            groups.back().end = std::max(groups.back().end, hi);
        }
    }
    for (auto& g : groups) {
        constexpr int kSamples = 4000;
        double best = -1.0;
        for (int i = 0; i <= kSamples; ++i) {
            const double t = g.start + (g.end - g.start) * i / kSamples;
            const double a = std::abs(input_pulse_amplitude(g.parts, t));
            if (a > best) {
                best = a;
                g.peak = t;
            }
        }
    }
    return groups;
}

namespace {

double schedule_start(const std::vector<InputPulse>& pulses)
{
    double start = 0.0;
    for (const auto& p : pulses) start = std::min(start, p.center - 4.0 * p.width);
    return start;
}

void push(ControlSchedule& s, double t_start, double t_end, Controls c)
{
    if (t_end > t_start) s.segments.push_back(Segment{t_start, t_end, c});
}

Controls gradient_only(double eta) { return Controls{eta, 0.0, 0.0, 0.0}; }

Controls grating_only(const GratingSettings& g, double phase) { return Controls{0.0, g.amplitude, g.wavenumber, phase}; }

void check_sequencer_options(const SequencerOptions& o)
{
    if (!(o.gradient > 0.0)) throw Error(ErrorKind::Validation, "sequencer: gradient must be > 0");
    if (!(o.grating.amplitude > 0.0) || !(o.grating.wavenumber > 0.0))
        throw Error(ErrorKind::Validation, "sequencer: grating amplitude and wavenumber must be > 0");
    if (!(o.settle_time >= 0.0)) throw Error(ErrorKind::Validation, "sequencer: settle_time must be >= 0");
    if (o.grating_duration && !(*o.grating_duration > 0.0))
        throw Error(ErrorKind::Validation, "sequencer: grating_duration must be > 0");
}

// The FIFO core applied to groups whose wavenumbers at `t_grating` are
// k_i(t_a) = eta (t_ref - t_a) - k_offset. Appends segments from t_grating and
// returns the delay added to each absorption time.
struct FifoStage {
    double delay = 0.0;
    double t_end = 0.0;
    TimeWindow suppressed;
};

FifoStage append_fifo_stage(ControlSchedule& schedule, std::vector<std::string>& notes,
                            const std::vector<PulseGroup>& groups, const SequencerOptions& o, double t_ref,
                            double k_offset, double t_grating)
{
    const double eta = o.gradient;
    const double tau = o.grating_duration.value_or(depletion_duration(o.grating.amplitude));
    const double k_hi = eta * (t_ref - groups.front().start) - k_offset;
    const double k_lo = eta * (t_ref - groups.back().end) - k_offset;
    const double kR = o.grating.wavenumber;

    const int orders = populated_orders(o.grating.amplitude, tau);
    if (orders * kR <= k_hi) {
        std::ostringstream os;
        os << "sequencer needs regime I: " << orders << " populated orders x k_R = " << orders * kR
           << " does not exceed the stored wavenumber " << k_hi
           << "; negative orders would be re-emitted after the silent crossing";
        throw Error(ErrorKind::Validation, os.str());
    }
    if (!(k_lo > 0.0) || !(k_hi < k_lo + kR)) {
        std::ostringstream os;
        os << "sequencer: stored wavenumbers span [" << k_lo << ", " << k_hi << "], so no reversal passes every"
           << " zeroth order through k = 0 while keeping the first orders (offset k_R = " << kR << ") positive";
        throw Error(ErrorKind::Validation, os.str());
    }

    const double k_reverse = 0.5 * (k_hi + k_lo + kR);
    const double t_reverse = k_reverse / eta;
    const double t1 = t_grating + tau;
    const double t2 = t1 + t_reverse;
    const double t_on = t2 + tau;
    push(schedule, t_grating, t1, grating_only(o.grating, 0.0));
    push(schedule, t1, t2, gradient_only(-eta));
    push(schedule, t2, t_on, grating_only(o.grating, kPi));

    std::ostringstream os;
    os << "FIFO stage: depleting grating " << tau << " at t = " << t_grating << ", silent reversal through k = 0 by "
       << k_reverse << " (zeroth orders in [" << k_lo << ", " << k_hi << "], first orders stay above "
       << k_lo + kR - k_reverse << "), refocus at phase pi, release under +eta from t = " << t_on;
    notes.push_back(os.str());

    FifoStage stage;
    // Emission when eta (t - t_on) = k_reverse - (eta (t_ref - t_a) - k_offset).
    stage.delay = t_on + (k_reverse + k_offset) / eta - t_ref;
    stage.t_end = t_on;
    stage.suppressed = TimeWindow{t1 + k_lo / eta, t1 + k_hi / eta};
    return stage;
}

void ensure_valid(const ProtocolPlan& plan, const SimulationParams& params)
{
    const auto report = validate_schedule(plan.schedule, params);
    if (!report.ok()) throw Error(ErrorKind::Validation, "plan fails schedule validation:\n" + report.summary());
}

void sort_emissions(std::vector<Emission>& e)
{
    std::stable_sort(e.begin(), e.end(), [](const Emission& a, const Emission& b) { return a.time < b.time; });
}

}  // namespace

ProtocolPlan build_tof_plan(const SimulationParams& params, const InputPulse& pulse, const TofOptions& o)
{
    if (!(o.gradient > 0.0)) throw Error(ErrorKind::Validation, "tof plan: gradient must be > 0");
    if (!(o.tau >= 0.0)) throw Error(ErrorKind::Validation, "tof plan: tau must be >= 0");
    if (!(o.t0 > pulse.center)) throw Error(ErrorKind::Validation, "tof plan: t0 must follow the input pulse");
    const bool grating_on = o.tau > 0.0 && o.grating.amplitude > 0.0;
    if (grating_on && !(o.grating.wavenumber > 0.0))
        throw Error(ErrorKind::Validation, "tof plan: grating wavenumber must be > 0");

    ProtocolPlan plan;
    auto& s = plan.schedule;
    s.input_pulses = {pulse};
    const double eta = o.gradient;
    const double start = schedule_start(s.input_pulses);
    push(s, start, o.t0, gradient_only(eta));
    double t_read = o.t0;
    if (grating_on) {
        push(s, o.t0, o.t0 + o.tau, grating_only(o.grating, o.grating_phase));
        t_read += o.tau;
        if (o.refocus) {
            push(s, t_read, t_read + o.tau, grating_only(o.grating, o.grating_phase + kPi));
            t_read += o.tau;
        }
    }

    const int n_prime = grating_on ? populated_orders(o.grating.amplitude, o.tau) : 0;
    const int n_emit = o.refocus ? 0 : n_prime;
    const double kR = grating_on ? o.grating.wavenumber : 0.0;
    const double k0 = eta * (o.t0 - pulse.center);
    plan.regime = classify_regime(n_prime, kR, eta, o.t0, pulse.center);
    plan.emission_spacing = kR / eta;

    const double t_zero = t_read + k0 / eta;
    double t_end = 0.0;
    if (plan.emission_spacing == 0.0)
        t_end = t_zero + 4.0 * pulse.width + 2.0;
    else if (plan.regime == Regime::I || n_emit == 0)
        t_end = t_zero + 0.5 * plan.emission_spacing;
    else
        t_end = t_zero + (n_emit + 1.5) * plan.emission_spacing;
    push(s, t_read, t_end, gradient_only(-eta));

    std::vector<int> orders;
    for (int n = -n_emit; n <= n_emit; ++n)
        if (k0 + n * kR > 0.0 || n == 0) orders.push_back(n);
    for (const auto& e : predict_emission_times(t_zero, kR, eta, orders))
        if (e.time <= t_end) plan.predicted_emissions.push_back(e);

    std::ostringstream os;
    os << "time of flight: k0 = " << k0 << ", n' = " << n_prime << ", regime " << to_string(plan.regime)
       << ", order-0 emission at " << t_zero << ", spacing " << plan.emission_spacing;
    plan.notes.push_back(os.str());
    if (plan.regime == Regime::I && n_prime > 0)
        plan.notes.push_back("regime I: orders with k0 + n k_R < 0 stay trapped; read-out ends half a spacing after "
                             "the zeroth order");
    ensure_valid(plan, params);
    return plan;
}

ProtocolPlan build_fifo_plan(const SimulationParams& params, const std::vector<InputPulse>& pulses,
                             const SequencerOptions& o)
{
    check_sequencer_options(o);
    const auto groups = group_pulses(pulses);
    if (groups.empty()) throw Error(ErrorKind::Validation, "fifo plan: no input pulses");

    ProtocolPlan plan;
    plan.regime = Regime::I;
    plan.emission_spacing = o.grating.wavenumber / o.gradient;
    auto& s = plan.schedule;
    s.input_pulses = pulses;
    const double t_grating = groups.back().end + o.settle_time;
    push(s, schedule_start(pulses), t_grating, gradient_only(o.gradient));

    const auto stage = append_fifo_stage(s, plan.notes, groups, o, t_grating, 0.0, t_grating);
    plan.suppressed_crossings.push_back(stage.suppressed);
    for (std::size_t i = 0; i < groups.size(); ++i)
        plan.predicted_emissions.push_back(Emission{0, groups[i].peak + stage.delay, static_cast<int>(i)});
    sort_emissions(plan.predicted_emissions);

    const double t_end = groups.back().end + stage.delay + o.tail_time;
    push(s, stage.t_end, t_end, gradient_only(o.gradient));
    ensure_valid(plan, params);
    return plan;
}

ProtocolPlan build_reorder_plan(const SimulationParams& params, const std::vector<InputPulse>& pulses,
                                const SequencerOptions& o)
{
    check_sequencer_options(o);
    const auto groups = group_pulses(pulses);
    if (groups.size() < 2) throw Error(ErrorKind::Validation, "reorder plan: needs at least two input pulses");

    ProtocolPlan plan;
    plan.regime = Regime::I;
    plan.emission_spacing = o.grating.wavenumber / o.gradient;
    auto& s = plan.schedule;
    s.input_pulses = pulses;
    const double eta = o.gradient;
    const auto& last = groups.back();
    const std::vector<PulseGroup> rest(groups.begin(), groups.end() - 1);

    const double t_store = last.end + o.settle_time;
    push(s, schedule_start(pulses), t_store, gradient_only(eta));

    // Plain echo of the last pulse: reverse until it has crossed k = 0 but the
    // others have not.
    const double k_last = eta * (t_store - last.start);
    const double k_rest = eta * (t_store - rest.back().end);
    if (!(k_last < k_rest)) {
        std::ostringstream os;
        os << "reorder plan: the last pulse (k up to " << k_last << ") is not separated from the others (k from "
           << k_rest << ")";
        throw Error(ErrorKind::Validation, os.str());
    }
    const double k_echo = 0.5 * (k_last + k_rest);
    const double t_grating = t_store + k_echo / eta;
    push(s, t_store, t_grating, gradient_only(-eta));
    plan.predicted_emissions.push_back(
        Emission{0, 2.0 * t_store - last.peak, static_cast<int>(groups.size() - 1)});
    {
        std::ostringstream os;
        os << "plain echo: gradient reversed at " << t_store << " for " << k_echo / eta
           << ", releasing the last pulse time-reversed around " << 2.0 * t_store - last.peak;
        plan.notes.push_back(os.str());
    }

    const auto stage = append_fifo_stage(s, plan.notes, rest, o, t_store, k_echo, t_grating);
    plan.suppressed_crossings.push_back(stage.suppressed);
    for (std::size_t i = 0; i < rest.size(); ++i)
        plan.predicted_emissions.push_back(Emission{0, rest[i].peak + stage.delay, static_cast<int>(i)});
    sort_emissions(plan.predicted_emissions);

    const double t_end = rest.back().end + stage.delay + o.tail_time;
    push(s, stage.t_end, t_end, gradient_only(eta));
    ensure_valid(plan, params);
    return plan;
}

}  // namespace gemsim
