#include "heomkit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "heomkit/quadrature.hpp"

namespace heomkit
{

std::vector<double> uniform_grid(double lo, double hi, std::size_t n)
{
    require(n >= 2 && hi > lo, "uniform grid needs n >= 2 and hi > lo");
    std::vector<double> g(n);
    for(std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * double(i) / double(n - 1);
    g.back() = hi;
    return g;
}

SpectrumResult cosine_spectrum(const std::vector<double>& times, const std::vector<double>& signal,
                               const std::vector<double>& omega, const SpectrumOptions& opts)
{
    if(times.size() != signal.size())
        fail(ErrorCode::dimension_mismatch, "time grid and signal lengths differ");
    require(times.size() >= 2, "spectrum needs at least two samples");
    require(opts.window_rate >= 0.0, "window rate must be >= 0");
    const std::size_t n = times.size();
    const double tf = times.back();
    const double dt = tf / double(n - 1);
    require(dt > 0.0, "time grid must be increasing");
    for(std::size_t i = 0; i < n; ++i)
        if(std::abs(times[i] - double(i) * dt) > 1e-9 * std::max(1.0, tf))
            fail(ErrorCode::invalid_argument, "cosine spectrum needs a uniform time grid starting at t = 0");

    std::vector<double> w(n);
    double peak = 0.0;
    for(std::size_t i = 0; i < n; ++i)
    {
        const double weight = (i == 0 || i + 1 == n) ? 0.5 * dt : dt;
        w[i] = weight * signal[i] * (opts.window_rate > 0.0 ? std::exp(-opts.window_rate * times[i]) : 1.0);
        peak = std::max(peak, std::abs(signal[i]));
    }

    SpectrumResult r;
    r.omega = omega;
    r.values.resize(omega.size());
    const double norm = std::sqrt(2.0 / pi);
    for(std::size_t k = 0; k < omega.size(); ++k)
    {
        double s = 0.0;
        for(std::size_t i = 0; i < n; ++i) s += w[i] * std::cos(omega[k] * times[i]);
        r.values[k] = norm * s;
    }
    r.tail_ratio = peak > 0.0 ? std::abs(signal.back()) / peak : 0.0;
    r.truncated_window = r.tail_ratio >= 0.05;
    return r;
}

SpectrumResult cosine_spectrum(const Trajectory& traj, const std::string& observable,
                               const std::vector<double>& omega, const SpectrumOptions& opts)
{
    return cosine_spectrum(traj.times, traj.values(observable), omega, opts);
}

const char* to_string(PeakStructure s)
{
    switch(s)
    {
        case PeakStructure::degenerate: return "degenerate";
        case PeakStructure::single: return "single-peak";
        case PeakStructure::double_peak: return "double-peak";
        case PeakStructure::multiple: return "multi-peak";
    }
    return "unknown";
}

namespace
{

double half_width(const std::vector<double>& x, const std::vector<double>& y, std::size_t i)
{
    const double half = 0.5 * y[i];
    double sum = 0.0;
    int sides = 0;
    for(std::size_t j = i; j-- > 0;)
        if(y[j] <= half)
        {
            const double xc = x[j] + (half - y[j]) * (x[j + 1] - x[j]) / (y[j + 1] - y[j]);
            sum += x[i] - xc;
            ++sides;
            break;
        }
    for(std::size_t j = i + 1; j < y.size(); ++j)
        if(y[j] <= half)
        {
            const double xc = x[j - 1] + (y[j - 1] - half) * (x[j] - x[j - 1]) / (y[j - 1] - y[j]);
            sum += xc - x[i];
            ++sides;
            break;
        }
    return sides ? sum / sides : -1.0;
}

}  // namespace

PeakClassification classify_peaks(const SpectrumResult& spec, double relative_threshold)
{
    require(relative_threshold > 0.0 && relative_threshold < 1.0, "peak threshold must lie in (0, 1)");
    const auto& y = spec.values;
    const auto& x = spec.omega;
    if(x.size() != y.size()) fail(ErrorCode::dimension_mismatch, "spectrum grid and values differ in length");
    PeakClassification c;
    c.relative_threshold = relative_threshold;
    if(y.size() < 3) return c;
    const double top = *std::max_element(y.begin(), y.end());
    if(!(top > 0.0)) return c;
    c.threshold = relative_threshold * top;

    for(std::size_t i = 1; i + 1 < y.size(); ++i)
    {
        if(!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
        double left = y[i], right = y[i];
        for(std::size_t j = i; j-- > 0;)
        {
            if(y[j] > y[i]) break;
            left = std::min(left, y[j]);
        }
        for(std::size_t j = i + 1; j < y.size(); ++j)
        {
            if(y[j] > y[i]) break;
            right = std::min(right, y[j]);
        }
        const double prominence = y[i] - std::max(left, right);
        if(prominence >= c.threshold) c.peaks.push_back({x[i], y[i], prominence, half_width(x, y, i)});
    }
    std::stable_sort(c.peaks.begin(), c.peaks.end(), [](const Peak& a, const Peak& b) {
        if(a.height != b.height) return a.height > b.height;
        return a.location < b.location;
    });
    for(const auto& p : c.peaks) c.dominant.push_back(p.location);
    switch(c.peaks.size())
    {
        case 0: c.structure = PeakStructure::degenerate; break;
        case 1: c.structure = PeakStructure::single; break;
        case 2: c.structure = PeakStructure::double_peak; break;
        default: c.structure = PeakStructure::multiple; break;
    }
    return c;
}

namespace
{

quad::Options tight()
{
    quad::Options o;
    o.abs_tol = 1e-13;
    o.rel_tol = 1e-11;
    o.max_intervals = 40000;
    return o;
}

// int_0^inf g(w) dw: finite pieces up to `far`, the rest mapped onto (0, 1] by w = far / u
template <typename G>
double half_line(G&& g, std::vector<double> breaks, double far, const char* what)
{
    breaks.push_back(far);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    const double body = quad::value_or_throw(quad::integrate<double>(g, breaks, tight()), what);
    auto mapped = [&](double u) { return g(far / u) * far / (u * u); };
    const double tail = quad::value_or_throw(quad::integrate<double>(mapped, 0.0, 1.0, tight()), what);
    return body + tail;
}

std::vector<double> scale_breaks(const SpectralDensity& j, double temperature)
{
    const double s = j.frequency_scale();
    std::vector<double> b = {0.0, s, 10.0 * s};
    if(temperature > 0.0 && temperature < 10.0 * s) b.push_back(temperature);
    if(j.is_lorentz())
    {
        const auto p = j.lorentz_params();
        if(p.center > 0.0) b.push_back(p.center);
    }
    return b;
}

}  // namespace

double zeta_map(const SpectralDensity& j, double temperature, double omega0, double zeta)
{
    require(temperature >= 0.0, "temperature must be >= 0");
    require(omega0 > 0.0, "omega0 must be positive");
    require(zeta > 0.0, "zeta must be positive");
    const double a = zeta * omega0;
    auto g = [&](double w) { return thermal_spectral_weight(j, temperature, w) / ((a + w) * (a + w)); };
    const double integral = half_line(g, scale_breaks(j, temperature), 100.0 * j.frequency_scale(), "zeta integral");
    return std::exp(-0.5 * integral);
}

ZetaResult solve_zeta(const SpectralDensity& j, double temperature, double omega0, const ZetaOptions& opts)
{
    require(opts.start > 0.0 && opts.start <= 1.0, "zeta start must lie in (0, 1]");
    require(opts.tolerance > 0.0 && opts.max_iterations > 0, "zeta tolerance and iteration cap must be positive");
    ZetaResult r;
    double z = opts.start;
    for(int it = 1; it <= opts.max_iterations; ++it)
    {
        const double next = zeta_map(j, temperature, omega0, z);
        const double step = std::abs(next - z);
        z = next;
        if(step < opts.tolerance)
        {
            r.zeta = z;
            r.iterations = it;
            r.residual = std::abs(zeta_map(j, temperature, omega0, z) - z);
            return r;
        }
    }
    std::ostringstream os;
    os << "zeta fixed point did not converge in " << opts.max_iterations << " iterations (last value " << z << ")";
    fail(ErrorCode::not_converged, os.str());
}

double broadening(const SpectralDensity& j, double temperature, double omega0, double zeta, double omega)
{
    require(omega > 0.0, "broadening is evaluated for omega > 0 only");
    const double a = zeta * omega0;
    const double r = a / (omega + a);
    return pi * r * r * thermal_spectral_weight(j, temperature, omega);
}

EffectivePoint effective_point(const SpectralDensity& j, double temperature, double omega0, double g0, double zeta,
                               double omega, const PrincipalValueOptions& opts)
{
    require(omega > 0.0, "effective spectral density is evaluated for omega > 0 only");
    require(zeta > 0.0 && zeta <= 1.0, "zeta must lie in (0, 1]");
    require(opts.tail_factor > 1.0, "tail factor must exceed 1");
    const double a = zeta * omega0;
    const double s = j.frequency_scale();
    const double far = opts.tail_factor * s;
    require(omega < far, "omega lies beyond the principal-value cutoff");

    auto g = [&](double w) { return a * a / ((w + a) * (w + a)) * thermal_spectral_weight(j, temperature, w); };
    auto kernel = [&](double w) { return g(w) / (omega - w); };
    auto excluded = [&](double h) {
        auto below = quad::integrate<double>(kernel, 0.0, omega - h, tight());
        std::vector<double> br = {omega + h, 2.0 * omega + h, far};
        for(double b : scale_breaks(j, temperature))
            if(b > omega + h && b < far) br.push_back(b);
        std::sort(br.begin(), br.end());
        br.erase(std::unique(br.begin(), br.end()), br.end());
        auto above = quad::integrate<double>(kernel, br, tight());
        return quad::value_or_throw(below, "principal value") + quad::value_or_throw(above, "principal value");
    };

    // the exclusion error is odd in h: c1 h + c3 h^3 + ...
    const double h = 0.02 * std::min(omega, a);
    const double i1 = excluded(h), i2 = excluded(0.5 * h), i4 = excluded(0.25 * h);
    const double r1 = 2.0 * i2 - i1;
    const double r1h = 2.0 * i4 - i2;
    const double r2 = (8.0 * r1h - r1) / 7.0;

    EffectivePoint p;
    p.shift = r2;
    p.shift_error = std::abs(r2 - r1h);
    if(p.shift_error > opts.tolerance * (1.0 + std::abs(r2)))
    {
        std::ostringstream os;
        os << "principal value at omega = " << omega << " did not settle (Richardson residual " << p.shift_error << ")";
        fail(ErrorCode::not_converged, os.str());
    }
    p.broadening = broadening(j, temperature, omega0, zeta, omega);
    const double detuning = omega - a - p.shift;
    p.jeff = g0 * g0 * p.broadening / (pi * (detuning * detuning + p.broadening * p.broadening));
    return p;
}

EffectiveBath effective_spectral_density(const SpectralDensity& j, double temperature, double omega0, double g0,
                                         double zeta, const std::vector<double>& omega, double dominant_frequency,
                                         const PrincipalValueOptions& opts)
{
    require(g0 >= 0.0, "g0 must be >= 0");
    EffectiveBath b;
    b.zeta = zeta;
    b.omega = omega;
    for(double w : omega)
    {
        const auto p = effective_point(j, temperature, omega0, g0, zeta, w, opts);
        b.shift.push_back(p.shift);
        b.broadening.push_back(p.broadening);
        b.jeff.push_back(p.jeff);
        b.shift_error.push_back(p.shift_error);
    }
    // dropped part of R beyond the cutoff W: |int_W^inf g / (w - w')| <= g(W) W / (2 (W - w_max))
    // for the 1/w^3 decay of g; g at W is evaluated directly
    const double far = opts.tail_factor * j.frequency_scale();
    const double a = zeta * omega0;
    const double w_max = omega.empty() ? 0.0 : *std::max_element(omega.begin(), omega.end());
    const double g_far = a * a / ((far + a) * (far + a)) * thermal_spectral_weight(j, temperature, far);
    b.tail_bound = g_far * far / (2.0 * (far - w_max));
    b.dominant_frequency = dominant_frequency > 0.0 ? dominant_frequency : omega0;
    b.gamma0 = effective_point(j, temperature, omega0, g0, zeta, b.dominant_frequency, opts).jeff;
    return b;
}

}  // namespace heomkit
