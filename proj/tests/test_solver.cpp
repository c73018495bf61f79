#include <doctest.h>

#include <cmath>
#include <random>

#include "gemsim/kspace.hpp"
#include "gemsim/metrics.hpp"
#include "gemsim/sequencer.hpp"
#include "gemsim/solver.hpp"

using namespace gemsim;

namespace {

const double kEta = 2.0 * kPi / 5.4;
const double kGrating = kEta * 15.0 / 7.0;

SimulationParams regime2_params(int grid = 512)
{
    SimulationParams p;
    p.sample_length = 10.0 * 2.0 * kPi / kGrating;
    p.grid_points = grid;
    p.snapshot_stride = 0;
    return p;
}

ProtocolPlan regime2_plan(const SimulationParams& p, double nu, double tau)
{
    TofOptions o;
    o.gradient = kEta;
    o.t0 = 15.0;
    o.tau = tau;
    o.grating = {nu, kGrating};
    return build_tof_plan(p, InputPulse{1.5, 0.5, {1.0, 0.0}}, o);
}

ComplexVector random_state(int n, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.1);
    ComplexVector v(n);
    for (auto& x : v) x = Complex{g(rng), g(rng)};
    return v;
}

}  // namespace

TEST_CASE("input envelope")
{
    const std::vector<InputPulse> none;
    CHECK(input_pulse_amplitude(none, 3.0) == Complex{0.0, 0.0});
    const std::vector<InputPulse> one{InputPulse{2.0, 0.5, {0.3, -0.4}}};
    CHECK(std::abs(input_pulse_amplitude(one, 2.0) - Complex{0.3, -0.4}) < 1e-15);
    CHECK(std::abs(input_pulse_amplitude(one, 2.5) - Complex{0.3, -0.4} * std::exp(-1.0)) < 1e-15);
    CHECK(std::abs(input_pulse_amplitude(one, 1.5) - Complex{0.3, -0.4} * std::exp(-1.0)) < 1e-15);
}

TEST_CASE("decoupled limit: pure gradient rotation and free propagation")
{
    SimulationParams p = regime2_params(64);
    p.atomic_density = 0.0;
    const auto z = p.z_grid();
    FieldState s{0.0, random_state(64, 1), ComplexVector::Zero(64)};
    const double dt = 0.01, eta = 0.8;
    const Complex input{0.7, 0.2};
    const auto next = step(s, Controls{eta, 0.0, 0.0, 0.0}, input, dt, p);
    for (int j = 0; j < 64; ++j) {
        const Complex expected = s.coherence[j] * std::polar(1.0, eta * (z[j] - p.gradient_origin()) * dt);
        CHECK(std::abs(next.coherence[j] - expected) < 1e-15);
        CHECK(std::abs(next.field[j] - input) < 1e-15);
    }
    CHECK(next.time == doctest::Approx(dt));
}

TEST_CASE("pure light shift multiplies by the grating phase")
{
    SimulationParams p = regime2_params(64);
    p.atomic_density = 0.0;
    const auto z = p.z_grid();
    FieldState s{0.0, random_state(64, 2), ComplexVector::Zero(64)};
    const double dt = 0.02, nu = 3.0, phase = kPi;
    const auto next = step(s, Controls{0.0, nu, kGrating, phase}, {}, dt, p);
    for (int j = 0; j < 64; ++j) {
        const Complex expected = s.coherence[j] * std::polar(1.0, nu * std::cos(kGrating * z[j] + phase) * dt);
        CHECK(std::abs(next.coherence[j] - expected) < 1e-15);
    }
}

TEST_CASE("uniform coherence builds a linear field")
{
    SimulationParams p = regime2_params(128);
    p.atomic_density = 2.5;
    const Complex s{0.01, -0.02};
    const auto f = propagate_field(ComplexVector::Constant(128, s), {}, p);
    const auto z = p.z_grid();
    const Complex slope = Complex{0.0, 1.0} * std::sqrt(2.5) * s;
    for (int j = 0; j < 128; ++j) CHECK(std::abs(f.centres[j] - slope * z[j]) < 1e-15);
    CHECK(std::abs(f.exit - slope * p.sample_length) < 1e-15);
}

TEST_CASE("step preconditions")
{
    SimulationParams p = regime2_params(64);
    FieldState s = FieldState::zero(64, 0.0);
    CHECK_THROWS_AS(step(s, Controls{}, {}, 0.0, p), Error);
    CHECK_THROWS_AS(step(FieldState::zero(32, 0.0), Controls{}, {}, 0.01, p), Error);
    CHECK_THROWS_AS(step(s, Controls{1.0, 0.0, 0.0, 0.0}, {}, 1.0, p), Error);
}

TEST_CASE("no input gives an identically zero record")
{
    SimulationParams p = regime2_params();
    auto plan = regime2_plan(p, 2.0, 1.0);
    plan.schedule.input_pulses.clear();
    const auto rec = run(p, plan.schedule);
    REQUIRE(rec.size() > 10);
    for (std::size_t i = 0; i < rec.size(); ++i) {
        CHECK(rec.input_intensity[i] == 0.0);
        CHECK(rec.output_intensity[i] == 0.0);
        CHECK(rec.stored_energy[i] == 0.0);
    }
}

TEST_CASE("record layout")
{
    SimulationParams p = regime2_params();
    p.snapshot_stride = 50;
    const auto plan = regime2_plan(p, 2.0, 1.0);
    const auto rec = run(p, plan.schedule);
    CHECK(rec.times.front() == doctest::Approx(plan.schedule.start_time()));
    CHECK(rec.input_intensity.size() == rec.size());
    CHECK(rec.output_intensity.size() == rec.size());
    CHECK(rec.stored_energy.size() == rec.size());
    const double h = p.time_step * p.record_stride;
    for (std::size_t i = 1; i < rec.size(); ++i) {
        CHECK(rec.times[i] - rec.times[i - 1] == doctest::Approx(h).epsilon(1e-9));
        CHECK(rec.stored_energy[i] >= 0.0);
    }
    // Snapshots at every switch time.
    for (double t : plan.schedule.switch_times()) {
        bool found = false;
        for (const auto& s : rec.snapshots) found = found || std::abs(s.time - t) < 1e-12;
        CHECK(found);
    }
}

TEST_CASE("gradient echo: one echo at the time-reversal point")
{
    SimulationParams p = regime2_params();
    const auto plan = regime2_plan(p, 0.0, 0.0);
    const auto rec = run(p, plan.schedule);
    const auto pulses = detect_pulses(rec.times, rec.output_intensity, 0.05);
    REQUIRE(pulses.size() == 1);
    CHECK(pulses[0].peak_time == doctest::Approx(2.0 * 15.0 - 1.5).epsilon(2e-3));
    CHECK(retrieval_efficiency(rec, plan.readout_window()).efficiency > 0.95);
    CHECK(energy_balance(rec) < 5e-3);
}

TEST_CASE("grating window depletes the zeroth order")
{
    SimulationParams p = regime2_params(1024);
    p.snapshot_stride = 0;
    const auto plan = regime2_plan(p, 2.0, 1.0);
    const auto rec = run(p, plan.schedule);
    const FieldState* before = nullptr;
    const FieldState* after = nullptr;
    for (const auto& s : rec.snapshots) {
        if (std::abs(s.time - 15.0) < 1e-9) before = &s;
        if (std::abs(s.time - 16.0) < 1e-9) after = &s;
    }
    REQUIRE(before);
    REQUIRE(after);
    const double centre = spectral_centroid(to_spectrum(*before, p));
    const auto pre = mode_populations(to_spectrum(*before, p), kGrating, centre, 3);
    const auto post = mode_populations(to_spectrum(*after, p), kGrating, centre, 3);
    CHECK(pre.weight(0) > 0.9);
    CHECK(post.weight(0) < 0.1);
    CHECK(post.weight(1) > 0.25);
    CHECK(post.weight(-1) > 0.25);
}

TEST_CASE("energy balance and drift on the regime-II run")
{
    SimulationParams p = regime2_params();
    const auto rec = run(p, regime2_plan(p, 2.0, 1.0).schedule);
    CHECK(energy_balance(rec) < 5e-3);
    CHECK(stored_energy_drift(rec, TimeWindow{15.0, 16.0}) < 1e-6);
    CHECK(stored_energy_drift(rec, TimeWindow{8.0, 15.0}) < 1e-6);
}

TEST_CASE("halving dt changes the echo energy by less than 0.5 percent")
{
    SimulationParams p = regime2_params();
    const auto plan = regime2_plan(p, 0.0, 0.0);
    const double coarse = retrieval_efficiency(run(p, plan.schedule), plan.readout_window()).efficiency;
    p.time_step *= 0.5;
    p.record_stride *= 2;
    const double fine = retrieval_efficiency(run(p, plan.schedule), plan.readout_window()).efficiency;
    CHECK(std::abs(fine / coarse - 1.0) < 5e-3);
}

TEST_CASE("coarser sampling raises the balance violation")
{
    SimulationParams p = regime2_params();
    const auto plan = regime2_plan(p, 2.0, 1.0);
    const double fine = energy_balance(run(p, plan.schedule));
    p.record_stride *= 10;
    const double coarse = energy_balance(run(p, plan.schedule));
    CHECK(coarse > fine);
}

TEST_CASE("strong input reports a blow-up with its time")
{
    SimulationParams p = regime2_params();
    auto plan = regime2_plan(p, 0.0, 0.0);
    plan.schedule.input_pulses[0].amplitude = 50.0;
    try {
        run(p, plan.schedule);
        FAIL("expected a blow-up");
    } catch (const NumericalBlowUp& e) {
        CHECK(e.kind() == ErrorKind::Numerical);
        CHECK(e.time() < 5.0);
    }
}

TEST_CASE("run refuses invalid schedules")
{
    SimulationParams p = regime2_params();
    auto plan = regime2_plan(p, 0.0, 0.0);
    plan.schedule.segments[1].t_start += 0.5;
    CHECK_THROWS_AS(run(p, plan.schedule), Error);
}

TEST_CASE("runs are deterministic")
{
    SimulationParams p = regime2_params(256);
    const auto plan = regime2_plan(p, 2.0, 1.0);
    const auto a = run(p, plan.schedule);
    const auto b = run(p, plan.schedule);
    CHECK(a.output_intensity == b.output_intensity);
    CHECK(a.stored_energy == b.stored_energy);
}
