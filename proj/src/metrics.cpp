#include "gemsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <thread>

#include "gemsim/bessel.hpp"

namespace gemsim {

std::optional<double> EfficiencyReport::normalized() const
{
    if (!baseline_efficiency || *baseline_efficiency == 0.0) return std::nullopt;
    return efficiency / *baseline_efficiency;
}

double integrate(std::span<const double> times, std::span<const double> values, TimeWindow window)
{
    double sum = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (times[i - 1] < window.start || times[i] > window.end) continue;
        sum += 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
    }
    return sum;
}

EfficiencyReport retrieval_efficiency(const SimulationRecord& record, TimeWindow window,
                                      std::optional<double> baseline)
{
    if (record.size() < 2) throw Error(ErrorKind::Domain, "retrieval_efficiency: record too short");
    const double slack = record.sample_interval();
    if (window.start < record.times.front() - slack || window.end > record.times.back() + slack ||
        !(window.end > window.start)) {
        std::ostringstream os;
        os << "retrieval_efficiency: window [" << window.start << ", " << window.end << "] is outside the record ["
           << record.times.front() << ", " << record.times.back() << "]";
        throw Error(ErrorKind::Domain, os.str());
    }
    EfficiencyReport r;
    r.window = window;
    const TimeWindow all{record.times.front(), record.times.back()};
    r.input_energy = integrate(record.times, record.input_intensity, all);
    if (!(r.input_energy > 0.0)) throw Error(ErrorKind::Domain, "retrieval_efficiency: zero input energy");
    r.output_energy = integrate(record.times, record.output_intensity, window);
    r.efficiency = r.output_energy / r.input_energy;
    r.baseline_efficiency = baseline;
    return r;
}

double energy_balance(const SimulationRecord& record)
{
    if (record.size() < 2) return 0.0;
    const TimeWindow all{record.times.front(), record.times.back()};
    const double total_in = integrate(record.times, record.input_intensity, all);
    if (total_in == 0.0) return 0.0;
    double cumulative = 0.0, worst = 0.0;
    for (std::size_t i = 1; i < record.size(); ++i) {
        const double h = record.times[i] - record.times[i - 1];
        cumulative += 0.5 * h *
                      (record.input_intensity[i] + record.input_intensity[i - 1] - record.output_intensity[i] -
                       record.output_intensity[i - 1]);
        const double stored = record.stored_energy[i] - record.stored_energy.front();
        worst = std::max(worst, std::abs(cumulative - stored));
    }
    return worst / total_in;
}

double stored_energy_drift(const SimulationRecord& record, TimeWindow window)
{
    double reference = -1.0, worst = 0.0;
    for (std::size_t i = 0; i < record.size(); ++i) {
        if (!window.contains(record.times[i])) continue;
        if (reference < 0.0) {
            reference = record.stored_energy[i];
            continue;
        }
        worst = std::max(worst, std::abs(record.stored_energy[i] - reference));
    }
    return reference > 0.0 ? worst / reference : 0.0;
}

std::vector<DetectedPulse> detect_pulses(std::span<const double> times, std::span<const double> intensity,
                                         double threshold_fraction)
{
    if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0))
        throw Error(ErrorKind::Domain, "detect_pulses: threshold_fraction must lie in (0, 1)");
    std::vector<DetectedPulse> pulses;
    const std::size_t n = std::min(times.size(), intensity.size());
    if (n == 0) return pulses;
    const double top_value = *std::max_element(intensity.begin(), intensity.begin() + n);
    if (!(top_value > 0.0)) return pulses;
    const double threshold = threshold_fraction * top_value;

    // Peaks whose height and prominence both clear the threshold. Raising the
    // threshold only removes peaks, unlike counting above-threshold runs,
    // which can split at a dip.
    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < n; ++i) {
        if (intensity[i] <= threshold) continue;
        std::size_t j = i;
        while (j + 1 < n && intensity[j + 1] == intensity[i]) ++j;  // plateau
        const bool rises = i == 0 || intensity[i - 1] < intensity[i];
        const bool falls = j + 1 == n || intensity[j + 1] < intensity[j];
        if (rises && falls) {
            double left = intensity[i], right = intensity[i];
            std::size_t a = i;
            while (a > 0 && intensity[a - 1] <= intensity[i]) left = std::min(left, intensity[--a]);
            std::size_t b = j;
            while (b + 1 < n && intensity[b + 1] <= intensity[i]) right = std::min(right, intensity[++b]);
            // Each side runs to the next higher sample or the record edge.
            if (intensity[i] - std::max(left, right) > threshold) peaks.push_back((i + j) / 2);
        }
        i = j;
    }

    auto valley = [&](std::size_t from, std::size_t to) {
        std::size_t best = from;
        for (std::size_t k = from; k <= to; ++k)
            if (intensity[k] < intensity[best]) best = k;
        return best;
    };

    for (std::size_t p = 0; p < peaks.size(); ++p) {
        const std::size_t top = peaks[p];
        std::size_t lo = top, hi = top;
        if (p > 0) {
            lo = valley(peaks[p - 1], top);
        } else {
            while (lo > 0 && intensity[lo - 1] < intensity[lo]) --lo;
        }
        if (p + 1 < peaks.size()) {
            hi = valley(top, peaks[p + 1]);
        } else {
            while (hi + 1 < n && intensity[hi + 1] < intensity[hi]) ++hi;
        }

        DetectedPulse pulse;
        pulse.peak_time = times[top];
        pulse.peak_intensity = intensity[top];
        if (top > 0 && top + 1 < n) {
            const double ym = intensity[top - 1], y0 = intensity[top], yp = intensity[top + 1];
            const double curvature = ym - 2.0 * y0 + yp;
            if (curvature < 0.0) {
                const double shift = 0.5 * (ym - yp) / curvature;
                pulse.peak_time += shift * (times[top + 1] - times[top]);
            }
        }
        pulse.times.assign(times.begin() + lo, times.begin() + hi + 1);
        pulse.intensity.assign(intensity.begin() + lo, intensity.begin() + hi + 1);
        for (std::size_t k = 1; k < pulse.times.size(); ++k)
            pulse.energy += 0.5 * (pulse.times[k] - pulse.times[k - 1]) * (pulse.intensity[k] + pulse.intensity[k - 1]);
        pulses.push_back(std::move(pulse));
    }
    return pulses;
}

std::vector<DetectedPulse> detect_pulses(const SimulationRecord& record, double threshold_fraction)
{
    return detect_pulses(record.times, record.output_intensity, threshold_fraction);
}

double normalized_cross_correlation(std::span<const double> a, std::span<const double> b)
{
    double na = 0.0, nb = 0.0;
    for (double v : a) na += v * v;
    for (double v : b) nb += v * v;
    if (na == 0.0 || nb == 0.0) return 0.0;
    const long la = static_cast<long>(a.size()), lb = static_cast<long>(b.size());
    double best = 0.0;
    for (long lag = -(lb - 1); lag < la; ++lag) {
        double sum = 0.0;
        const long from = std::max(0L, lag), to = std::min(la, lag + lb);
        for (long i = from; i < to; ++i) sum += a[i] * b[i - lag];
        best = std::max(best, sum);
    }
    return best / std::sqrt(na * nb);
}

namespace {

std::vector<double> envelope(const std::vector<double>& intensity)
{
    std::vector<double> out(intensity.size());
    std::transform(intensity.begin(), intensity.end(), out.begin(), [](double v) { return std::sqrt(std::max(v, 0.0)); });
    return out;
}

}  // namespace

std::vector<PulseMatch> match_pulses(const std::vector<DetectedPulse>& inputs, const std::vector<DetectedPulse>& outputs)
{
    std::vector<PulseMatch> matches;
    for (const auto& out : outputs) {
        const auto a = envelope(out.intensity);
        PulseMatch best;
        double best_score = -1.0;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            auto b = envelope(inputs[i].intensity);
            const double fwd = normalized_cross_correlation(a, b);
            std::reverse(b.begin(), b.end());
            const double rev = normalized_cross_correlation(a, b);
            if (std::max(fwd, rev) > best_score) {
                best_score = std::max(fwd, rev);
                best = PulseMatch{static_cast<int>(i), fwd, rev};
            }
        }
        matches.push_back(best);
    }
    return matches;
}

std::vector<SweepPoint> efficiency_sweep(const SimulationParams& params, const PlanFactory& plan_for,
                                         std::span<const double> taus)
{
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (!(taus[i] >= 0.0)) throw Error(ErrorKind::Domain, "efficiency_sweep: tau values must be >= 0");
        if (i > 0 && !(taus[i] > taus[i - 1])) throw Error(ErrorKind::Domain, "efficiency_sweep: tau values must ascend");
    }
    auto score = [&](double tau) {
        const ProtocolPlan plan = plan_for(tau);
        const SimulationRecord rec = run(params, plan.schedule);
        return retrieval_efficiency(rec, plan.readout_window()).efficiency;
    };

    std::vector<double> all(taus.begin(), taus.end());
    const bool has_zero = !all.empty() && all.front() == 0.0;
    if (!has_zero) all.insert(all.begin(), 0.0);

    std::vector<double> eff(all.size());
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t base = 0; base < all.size(); base += workers) {
        std::vector<std::future<double>> jobs;
        const std::size_t stop = std::min(all.size(), base + workers);
        for (std::size_t i = base; i < stop; ++i) jobs.push_back(std::async(std::launch::async, score, all[i]));
        for (std::size_t i = base; i < stop; ++i) eff[i] = jobs[i - base].get();
    }

    const double baseline = eff.front();
    if (!(baseline > 0.0)) throw Error(ErrorKind::Numerical, "efficiency_sweep: zero baseline efficiency");
    std::vector<SweepPoint> points;
    for (std::size_t i = has_zero ? 0 : 1; i < all.size(); ++i)
        points.push_back(SweepPoint{all[i], eff[i], eff[i] / baseline});
    return points;
}

BesselFit fit_j0_squared(std::span<const SweepPoint> points, double nu)
{
    double sff = 0.0, syf = 0.0, mean = 0.0;
    for (const auto& p : points) {
        const double f = std::pow(bessel_jn(0, nu * p.tau), 2);
        sff += f * f;
        syf += p.normalized * f;
        mean += p.normalized;
    }
    BesselFit fit;
    if (points.empty() || sff == 0.0) return fit;
    mean /= static_cast<double>(points.size());
    fit.amplitude = syf / sff;
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& p : points) {
        const double f = std::pow(bessel_jn(0, nu * p.tau), 2);
        ss_res += std::pow(p.normalized - fit.amplitude * f, 2);
        ss_tot += std::pow(p.normalized - mean, 2);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    return fit;
}

double first_null(std::span<const SweepPoint> points, double nu)
{
    for (std::size_t i = 1; i + 1 < points.size(); ++i) {
        const double ym = points[i - 1].normalized, y0 = points[i].normalized, yp = points[i + 1].normalized;
        if (!(y0 <= ym && y0 <= yp)) continue;
        const double xm = nu * points[i - 1].tau, x0 = nu * points[i].tau, xp = nu * points[i + 1].tau;
        // Vertex of the parabola through the three samples.
        const double num = (x0 - xm) * (x0 - xm) * (y0 - yp) - (x0 - xp) * (x0 - xp) * (y0 - ym);
        const double den = (x0 - xm) * (y0 - yp) - (x0 - xp) * (y0 - ym);
        return den != 0.0 ? x0 - 0.5 * num / den : x0;
    }
    throw Error(ErrorKind::Numerical, "first_null: no interior minimum in the sweep");
}

}  // namespace gemsim
