#include <doctest.h>

#include <cmath>

#include "gemsim/core.hpp"

using namespace gemsim;

namespace {

ControlSchedule two_segments()
{
    ControlSchedule s;
    s.segments = {Segment{0.0, 5.0, Controls{1.0, 0.0, 0.0, 0.0}}, Segment{5.0, 9.0, Controls{-1.0, 0.0, 0.0, 0.0}}};
    s.input_pulses = {InputPulse{2.0, 0.5, {1.0, 0.0}}};
    return s;
}

PhysicalGratingSpec beams(double rabi)
{
    PhysicalGratingSpec spec;
    spec.vacuum_coupling = 3.0e3;
    spec.detuning = 1.0e6;
    spec.rabi_frequency = rabi;
    spec.wavelength = 780e-9;
    spec.angle = 17.45e-3;
    return spec;
}

}  // namespace

TEST_CASE("grating amplitude from light shift")
{
    auto spec = beams(std::sqrt(2.0 * 3.0e3 * 1.0e6));
    CHECK(grating_from_lasers(spec).amplitude == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(grating_from_lasers(beams(0.0)).amplitude == 0.0);
}

TEST_CASE("fringe spacing of two beams at 1 degree")
{
    CHECK(fringe_spacing(780e-9, 17.45e-3) == doctest::Approx(5.1231e-3).epsilon(1e-4));
    const auto g = grating_from_lasers(beams(1.0));
    const double period_si = 2.0 * kPi / g.wavenumber * kSpeedOfLight / 3.0e3;
    CHECK(period_si == doctest::Approx(fringe_spacing(780e-9, 17.45e-3)).epsilon(1e-12));
}

TEST_CASE("grating amplitude is quadratic in the Rabi frequency")
{
    for (double s : {0.5, 2.0, 3.7}) {
        const double base = grating_from_lasers(beams(1.3e5)).amplitude;
        const double scaled = grating_from_lasers(beams(s * 1.3e5)).amplitude;
        CHECK(scaled == doctest::Approx(s * s * base).epsilon(1e-14));
    }
}

TEST_CASE("grating conversion rejects degenerate beams")
{
    auto spec = beams(1.0);
    spec.detuning = 0.0;
    CHECK_THROWS_AS(grating_from_lasers(spec), Error);
    spec = beams(1.0);
    spec.angle = 0.0;
    try {
        grating_from_lasers(spec);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Domain);
    }
}

TEST_CASE("optical depth and density are inverse")
{
    SimulationParams p;
    p.atomic_density = SimulationParams::density_for(5.4, 2.0 * kPi / 5.4);
    CHECK(p.atomic_density == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.optical_depth(2.0 * kPi / 5.4) == doctest::Approx(5.4).epsilon(1e-15));
    CHECK(p.optical_depth(-1.0) == p.optical_depth(1.0));
    CHECK_THROWS_AS(p.optical_depth(0.0), Error);
}

TEST_CASE("params check")
{
    SimulationParams p;
    CHECK_NOTHROW(p.check());
    p.grid_points = 15;
    CHECK_THROWS_AS(p.check(), Error);
    p = SimulationParams{};
    p.sample_length = 0.0;
    CHECK_THROWS_AS(p.check(), Error);
    p = SimulationParams{};
    p.record_stride = 0;
    CHECK_THROWS_AS(p.check(), Error);
}

TEST_CASE("cell-centred grid and gradient origin")
{
    SimulationParams p;
    p.sample_length = 8.0;
    p.grid_points = 16;
    const auto z = p.z_grid();
    CHECK(z[0] == doctest::Approx(0.25));
    CHECK(z[15] == doctest::Approx(7.75));
    CHECK(p.gradient_origin() == 4.0);
    p.detuning_origin = 1.0;
    CHECK(p.gradient_origin() == 1.0);
}

TEST_CASE("schedule evaluation is right-open")
{
    const auto s = two_segments();
    CHECK(s.at(0.0).gradient == 1.0);
    CHECK(s.at(4.999).gradient == 1.0);
    CHECK(s.at(5.0).gradient == -1.0);
    CHECK(s.at(9.0).gradient == -1.0);
    CHECK(s.switch_times() == std::vector<double>{5.0});
}

TEST_CASE("contiguous schedule validates cleanly")
{
    SimulationParams p;
    CHECK(validate_schedule(two_segments(), p).ok());
}

TEST_CASE("gaps and overlaps are reported")
{
    SimulationParams p;
    auto s = two_segments();
    s.segments[1].t_start = 5.5;
    auto r = validate_schedule(s, p);
    CHECK(r.has(FindingKind::NonContiguous));
    CHECK(r.summary().find("gap") != std::string::npos);
    s.segments[1].t_start = 4.5;
    r = validate_schedule(s, p);
    CHECK(r.has(FindingKind::NonContiguous));
    CHECK(r.summary().find("overlap") != std::string::npos);
}

TEST_CASE("grating wavenumber beyond the grid resolution is a Nyquist finding")
{
    SimulationParams p;
    p.sample_length = 25.0;
    p.grid_points = 128;  // resolves |k| < 16
    auto s = two_segments();
    s.segments.insert(s.segments.begin() + 1, Segment{5.0, 5.1, Controls{0.0, 1.0, 9.0, 0.0}});
    s.segments[2].t_start = 5.1;
    CHECK(validate_schedule(s, p).has(FindingKind::Nyquist));
    s.segments[1].controls.grating_wavenumber = 1.0;
    CHECK_FALSE(validate_schedule(s, p).has(FindingKind::Nyquist));
}

TEST_CASE("long storage under a steep gradient is a Nyquist finding")
{
    SimulationParams p;
    p.sample_length = 25.0;
    p.grid_points = 64;
    auto s = two_segments();
    s.segments[0].t_end = s.segments[1].t_start = 20.0;
    s.segments[1].t_end = 40.0;
    CHECK(validate_schedule(s, p).has(FindingKind::Nyquist));
}

TEST_CASE("pulses wider in frequency than the broadened line are reported")
{
    SimulationParams p;
    auto s = two_segments();
    s.input_pulses[0].width = 0.05;
    CHECK(validate_schedule(s, p).has(FindingKind::PulseBandwidth));
    s.input_pulses[0].width = -1.0;
    CHECK(validate_schedule(s, p).has(FindingKind::InvalidPulse));
}

TEST_CASE("coarse time steps are reported")
{
    SimulationParams p;
    p.time_step = 0.05;  // |eta| L dt = 1.25
    CHECK(validate_schedule(two_segments(), p).has(FindingKind::TimeStep));
}

TEST_CASE("negative grating amplitude and empty duration are invalid segments")
{
    SimulationParams p;
    auto s = two_segments();
    s.segments[0].controls.grating_amplitude = -1.0;
    CHECK(validate_schedule(s, p).has(FindingKind::InvalidSegment));
    CHECK(validate_schedule(ControlSchedule{}, p).has(FindingKind::InvalidSegment));
}

TEST_CASE("wavenumber bound covers storage and grating depth")
{
    auto s = two_segments();
    // Absorption window [0.5, 3.5], gradient +1 until t = 5.
    CHECK(wavenumber_bound(s) == doctest::Approx(4.5));
    s.segments.insert(s.segments.begin() + 1, Segment{5.0, 6.0, Controls{0.0, 2.0, 3.0, 0.0}});
    s.segments[2].t_start = 6.0;
    CHECK(wavenumber_bound(s) == doctest::Approx(4.5 + (2.0 + 3.0) * 3.0));
}
