#include "gemsim/kspace.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "gemsim/bessel.hpp"

namespace gemsim {

namespace {

Eigen::Index first_mode(Eigen::Index n) { return -(n / 2); }

void check_parseval(const ComplexVector& profile, const ComplexVector& spectrum, const SimulationParams& params,
                    const char* what)
{
    const double spatial = profile.squaredNorm() * params.spatial_step();
    const double spectral = spectrum.squaredNorm() / params.sample_length;
    if (std::abs(spatial - spectral) > 1e-10 * std::max(spatial, spectral)) {
        std::ostringstream os;
        os << "Parseval check failed for " << what << ": " << spatial << " vs " << spectral;
        throw Error(ErrorKind::Numerical, os.str());
    }
}

}  // namespace

double PolaritonSpectrum::energy() const { return psi.squaredNorm() / sample_length; }

double ModePopulations::weight(int order) const
{
    for (std::size_t i = 0; i < orders.size(); ++i)
        if (orders[i] == order) return weights[i];
    return 0.0;
}

RealVector wavenumbers(const SimulationParams& params)
{
    const Eigen::Index n = params.grid_points;
    const double dk = 2.0 * kPi / params.sample_length;
    const Eigen::Index m0 = first_mode(n);
    return RealVector::NullaryExpr(n, [=](Eigen::Index a) { return dk * static_cast<double>(m0 + a); });
}

ComplexVector spatial_transform(const ComplexVector& profile, const SimulationParams& params)
{
    const Eigen::Index n = profile.size();
    if (n != params.grid_points) throw Error(ErrorKind::Domain, "profile length does not match the grid");
    std::vector<Complex> in(profile.data(), profile.data() + n), out;
    Eigen::FFT<double> fft;
    fft.fwd(out, in);
    const double dz = params.spatial_step();
    const Eigen::Index m0 = first_mode(n);
    ComplexVector spectrum(n);
    for (Eigen::Index a = 0; a < n; ++a) {
        const Eigen::Index m = m0 + a;
        const Eigen::Index slot = ((m % n) + n) % n;
        spectrum[a] = dz * std::polar(1.0, -kPi * static_cast<double>(m) / n) * out[slot];
    }
    return spectrum;
}

ComplexVector inverse_spatial_transform(const ComplexVector& spectrum, const SimulationParams& params)
{
    const Eigen::Index n = spectrum.size();
    if (n != params.grid_points) throw Error(ErrorKind::Domain, "spectrum length does not match the grid");
    const double dz = params.spatial_step();
    const Eigen::Index m0 = first_mode(n);
    std::vector<Complex> in(n), out;
    for (Eigen::Index a = 0; a < n; ++a) {
        const Eigen::Index m = m0 + a;
        const Eigen::Index slot = ((m % n) + n) % n;
        in[slot] = spectrum[a] * std::polar(1.0, kPi * static_cast<double>(m) / n) / dz;
    }
    Eigen::FFT<double> fft;
    fft.inv(out, in);
    return Eigen::Map<const ComplexVector>(out.data(), n);
}

PolaritonSpectrum to_spectrum(const FieldState& state, const SimulationParams& params)
{
    if (state.coherence.size() != params.grid_points || state.field.size() != params.grid_points)
        throw Error(ErrorKind::Domain, "to_spectrum: state arrays do not match the uniform grid");
    PolaritonSpectrum s;
    s.time = state.time;
    s.sample_length = params.sample_length;
    s.k = wavenumbers(params);
    s.coherence = spatial_transform(state.coherence, params);
    s.field = spatial_transform(state.field, params);
    check_parseval(state.coherence, s.coherence, params, "coherence");
    check_parseval(state.field, s.field, params, "field");
    s.psi = s.k.cast<Complex>().cwiseProduct(s.field) + params.atomic_density * s.coherence;
    return s;
}

int kd_truncation(double depth) { return static_cast<int>(std::ceil(std::abs(depth))) + 20; }

PolaritonSpectrum kd_oracle(const PolaritonSpectrum& spectrum, double nu, double tau, double grating_wavenumber,
                            double phase, int n_trunc)
{
    const double depth = nu * tau;
    if (n_trunc < kd_truncation(depth))
        throw Error(ErrorKind::Domain, "kd_oracle: n_trunc must be at least ceil(nu tau) + 20");
    const double ratio = grating_wavenumber / spectrum.spacing();
    const double bins = std::round(ratio);
    if (std::abs(ratio - bins) > 1e-8 * std::max(1.0, std::abs(ratio))) {
        std::ostringstream os;
        os << "kd_oracle: k_R = " << grating_wavenumber << " is not a multiple of the grid spacing "
           << spectrum.spacing();
        throw Error(ErrorKind::Domain, os.str());
    }
    const Eigen::Index n = spectrum.psi.size();
    const long shift = static_cast<long>(bins);

    std::vector<Complex> coeff(2 * n_trunc + 1);
    for (int order = -n_trunc; order <= n_trunc; ++order) {
        // i^n e^{i n phi}
        const double angle = order * (0.5 * kPi + phase);
        coeff[order + n_trunc] = bessel_jn(order, depth) * std::polar(1.0, angle);
    }

    auto apply = [&](const ComplexVector& in) {
        ComplexVector out = ComplexVector::Zero(n);
        if (in.size() != n) return out;
        for (int order = -n_trunc; order <= n_trunc; ++order) {
            const Complex c = coeff[order + n_trunc];
            if (c == Complex{}) continue;
            // With samples at (j + 1/2) dz, a shift by a whole band 2 pi / dz flips the sign.
            const long offset = static_cast<long>(order) * shift;
            for (Eigen::Index a = 0; a < n; ++a) {
                const long b = static_cast<long>(a) - offset;
                const long wraps = b >= 0 ? b / n : -((-b + n - 1) / n);
                out[a] += (wraps % 2 ? -c : c) * in[b - wraps * n];
            }
        }
        return out;
    };

    PolaritonSpectrum out = spectrum;
    out.psi = apply(spectrum.psi);
    out.coherence = apply(spectrum.coherence);
    out.field = apply(spectrum.field);
    return out;
}

ModePopulations mode_populations(const PolaritonSpectrum& spectrum, double grating_wavenumber, double k_center,
                                 int n_max)
{
    if (!(grating_wavenumber > 0.0)) throw Error(ErrorKind::Domain, "mode_populations: k_R must be > 0");
    ModePopulations pop;
    for (int order = -n_max; order <= n_max; ++order) pop.orders.push_back(order);
    pop.weights.assign(pop.orders.size(), 0.0);
    const double total = spectrum.psi.squaredNorm();
    if (total == 0.0) {
        pop.residual = 1.0;
        return pop;
    }
    const double half = 0.5 * grating_wavenumber;
    for (Eigen::Index a = 0; a < spectrum.k.size(); ++a) {
        const double offset = spectrum.k[a] - k_center;
        const double order = std::floor((offset + half) / grating_wavenumber);
        if (std::abs(order) > n_max) continue;
        pop.weights[static_cast<std::size_t>(order + n_max)] += std::norm(spectrum.psi[a]) / total;
    }
    double sum = 0.0;
    for (double w : pop.weights) sum += w;
    pop.residual = 1.0 - sum;
    return pop;
}

double spectral_centroid(const PolaritonSpectrum& spectrum)
{
    const RealVector power = spectrum.psi.cwiseAbs2();
    const double total = power.sum();
    return total > 0.0 ? spectrum.k.dot(power) / total : 0.0;
}

}  // namespace gemsim
