#include "heomkit/bath.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace heomkit
{

SpectralDensity SpectralDensity::lorentz(double lambda, double gamma, double center)
{
    require(lambda > 0 && gamma > 0 && center > 0, "Lorentz spectral density needs lambda, gamma, center > 0");
    return SpectralDensity(LorentzParams{lambda, gamma, center});
}

SpectralDensity SpectralDensity::ohmic_drude(double eta, double cutoff)
{
    require(eta > 0 && cutoff > 0, "Ohmic-Drude spectral density needs eta, cutoff > 0");
    return SpectralDensity(OhmicDrudeParams{eta, cutoff});
}

const LorentzParams& SpectralDensity::lorentz_params() const
{
    require(is_lorentz(), "spectral density is not of Lorentz form");
    return std::get<LorentzParams>(params_);
}

const OhmicDrudeParams& SpectralDensity::ohmic_params() const
{
    require(is_ohmic_drude(), "spectral density is not of Ohmic-Drude form");
    return std::get<OhmicDrudeParams>(params_);
}

double SpectralDensity::value(double omega) const
{
    if(auto* l = std::get_if<LorentzParams>(&params_))
    {
        const double d = omega - l->center;
        return l->lambda * l->gamma / (pi * (d * d + l->gamma * l->gamma));
    }
    const auto& o = std::get<OhmicDrudeParams>(params_);
    return 2.0 * o.eta * o.cutoff * omega / (pi * (omega * omega + o.cutoff * o.cutoff));
}

double SpectralDensity::frequency_scale() const
{
    if(auto* l = std::get_if<LorentzParams>(&params_)) return std::abs(l->center) + l->gamma;
    return std::get<OhmicDrudeParams>(params_).cutoff;
}

SpectralDensity SpectralDensity::with_coupling(double coupling) const
{
    if(auto* l = std::get_if<LorentzParams>(&params_)) return lorentz(coupling, l->gamma, l->center);
    return ohmic_drude(coupling, std::get<OhmicDrudeParams>(params_).cutoff);
}

double SpectralDensity::coupling() const
{
    if(auto* l = std::get_if<LorentzParams>(&params_)) return l->lambda;
    return std::get<OhmicDrudeParams>(params_).eta;
}

std::string SpectralDensity::describe() const
{
    std::ostringstream os;
    if(auto* l = std::get_if<LorentzParams>(&params_))
        os << "lorentz(lambda=" << l->lambda << ", gamma=" << l->gamma << ", center=" << l->center << ")";
    else
    {
        const auto& o = std::get<OhmicDrudeParams>(params_);
        os << "ohmic_drude(eta=" << o.eta << ", cutoff=" << o.cutoff << ")";
    }
    return os.str();
}

double evaluate_spectral_density(const SpectralDensity& j, double omega)
{
    require(omega >= 0.0, "spectral density is evaluated at omega >= 0 only");
    return j.value(omega);
}

double thermal_spectral_weight(const SpectralDensity& j, double temperature, double omega)
{
    require(temperature >= 0.0, "temperature must be >= 0");
    if(temperature == 0.0) return j.value(omega);
    if(j.is_ohmic_drude())
    {
        // J(w)/w * w coth(w/2T), finite at w = 0
        const auto& o = j.ohmic_params();
        const double j_over_w = 2.0 * o.eta * o.cutoff / (pi * (omega * omega + o.cutoff * o.cutoff));
        const double x = omega / (2.0 * temperature);
        const double w_coth = (x < 1e-4) ? 2.0 * temperature * (1.0 + x * x / 3.0) : omega / std::tanh(x);
        return j_over_w * w_coth;
    }
    return j.value(omega) * thermal_factor(omega, temperature);
}

namespace
{

// int_0^inf u cos(x u) / (u^2 + 1) du for x > 0.
double drude_cosine_integral(double x)
{
    if(x < 40.0) return -0.5 * (std::exp(-x) * std::expint(x) + std::exp(x) * std::expint(-x));
    // asymptotic series -(1!/x^2 + 3!/x^4 + 5!/x^6 + ...), cut at the smallest term
    double sum = 0.0;
    double term = 1.0 / (x * x);
    double prev = std::abs(term) * 2.0;
    for(int k = 1; k < 200; k += 2)
    {
        if(std::abs(term) >= prev) break;
        sum += term;
        prev = std::abs(term);
        if(std::abs(term) < 1e-18 * std::abs(sum)) break;
        term *= double(k + 1) * double(k + 2) / (x * x);
    }
    return -sum;
}

quad::Options to_quad(const CorrelationQuadrature& o, std::size_t initial)
{
    quad::Options q;
    q.abs_tol = o.abs_tol;
    q.rel_tol = o.rel_tol;
    q.max_intervals = o.max_intervals;
    q.initial_intervals = initial;
    return q;
}

}  // namespace

quad::Result<cplx> correlation_quadrature_detailed(const SpectralDensity& j, double temperature, double t,
                                                   const CorrelationQuadrature& opts)
{
    require(t >= 0.0, "correlation time must be >= 0");
    require(temperature >= 0.0, "temperature must be >= 0");

    if(j.is_lorentz())
    {
        require(temperature == 0.0, "the Lorentz bath is defined at zero temperature only");
        const auto& l = j.lorentz_params();
        if(t == 0.0)
        {
            // omega = center + gamma tan(theta) maps the real axis onto (-pi/2, pi/2); J dw = lambda/pi dtheta
            auto f = [&](double) { return cplx(l.lambda / pi, 0.0); };
            return quad::integrate<cplx>(f, -0.5 * pi, 0.5 * pi, to_quad(opts, 1));
        }
        // C(t) = lambda e^{-i center t} (2 gamma/pi) int_0^inf cos(u t) g(u) du, g = 1/(u^2 + gamma^2).
        // Whole half periods up to U = K pi/t; beyond U, two integrations by parts (sin(U t) = 0):
        //   cos(U t) (g3(U)/t^4 - g1(U)/t^2), g1 and g3 the first and third derivatives.
        const double g2 = l.gamma * l.gamma;
        const double u0 = std::max(50.0 * l.gamma, 300.0 * std::pow(t, -6.0 / 7.0));
        const double k = std::min(20000.0, std::ceil(u0 * t / pi));
        const double u = k * pi / t;
        auto f = [&](double x) { return cplx(std::cos(x * t) / (x * x + g2), 0.0); };
        const auto body = quad::integrate<cplx>(f, 0.0, u, to_quad(opts, std::size_t(k)));
        const double d = u * u + g2;
        const double g1 = -2.0 * u / (d * d);
        const double g3 = -24.0 * u * (u * u - g2) / (d * d * d * d);
        const double sign = std::fmod(k, 2.0) == 0.0 ? 1.0 : -1.0;
        const double tail = sign * (g3 / std::pow(t, 4.0) - g1 / (t * t));
        const double dropped = 720.0 / (std::pow(u, 7.0) * std::pow(t, 6.0));
        const double scale = 2.0 * l.gamma * l.lambda / pi;
        quad::Result<cplx> r;
        r.value = scale * (body.value.real() + tail) * std::exp(-I * (l.center * t));
        r.error = scale * (body.error + dropped);
        r.intervals = body.intervals;
        r.converged = body.converged;
        return r;
    }

    const auto& o = j.ohmic_params();
    require(t > 0.0, "the Ohmic-Drude correlation function diverges at t = 0");
    const double pref = 2.0 * o.eta * o.cutoff / pi;
    const double x = o.cutoff * t;
    // temperature-independent part: int_0^inf J(w) exp(-i w t) dw
    cplx zero_t{pref * drude_cosine_integral(x), -pref * 0.5 * pi * std::exp(-x)};
    if(temperature == 0.0)
    {
        quad::Result<cplx> r;
        r.value = zero_t;
        r.converged = true;
        return r;
    }

    // thermal remainder: J(w) (coth(w/2T) - 1) cos(wt) = J(w)/w * 2w/(exp(w/T) - 1) cos(wt)
    auto f = [&](double w) {
        const double j_over_w = pref / (w * w + o.cutoff * o.cutoff);
        const double y = w / temperature;
        const double bose = (y < 1e-8) ? temperature * (2.0 - y) : 2.0 * w / std::expm1(y);
        return j_over_w * bose * std::cos(w * t);
    };
    const double upper = std::max(50.0 * o.cutoff, 50.0 * temperature);
    std::vector<double> breaks{0.0};
    for(double b : {temperature, 5.0 * temperature, 20.0 * temperature})
        if(b < upper) breaks.push_back(b);
    breaks.push_back(upper);
    const std::size_t pieces = 1 + std::size_t(std::min(512.0, 20.0 * temperature * t / pi));
    auto qo = to_quad(opts, pieces);
    qo.abs_tol = opts.abs_tol;
    auto thermal = quad::integrate<double>(f, breaks, qo);
    quad::Result<cplx> r;
    r.value = zero_t + cplx(thermal.value, 0.0);
    r.error = thermal.error;
    r.intervals = thermal.intervals;
    r.converged = thermal.converged;
    return r;
}

cplx correlation_quadrature(const SpectralDensity& j, double temperature, double t,
                            const CorrelationQuadrature& opts)
{
    return quad::value_or_throw(correlation_quadrature_detailed(j, temperature, t, opts), "bath correlation");
}

cplx BathExpansion::correlation(double t) const
{
    cplx c{};
    for(const auto& term : terms) c += term.amplitude * std::exp(-term.rate * t);
    return c;
}

std::string BathExpansion::provenance() const
{
    if(kind == Kind::exact) return "exact";
    return "truncated-matsubara(" + std::to_string(matsubara_count) + ")";
}

double BathExpansion::max_rate() const
{
    double m = 0.0;
    for(const auto& term : terms) m = std::max({m, term.rate.real(), std::abs(term.rate.imag())});
    return m;
}

BathExpansion BathExpansion::scaled(double s) const
{
    BathExpansion e = *this;
    for(auto& term : e.terms) term.amplitude *= s;
    return e;
}

BathExpansion expand_lorentz_zero_T(const SpectralDensity& j, double temperature)
{
    require(j.is_lorentz(), "exact single-exponential expansion needs a Lorentz spectral density");
    require(temperature == 0.0, "exact Lorentz expansion holds at zero temperature only");
    const auto& l = j.lorentz_params();
    BathExpansion e;
    e.terms.push_back({cplx(l.lambda, 0.0), cplx(l.gamma, l.center)});
    e.temperature = 0.0;
    e.kind = BathExpansion::Kind::exact;
    return e;
}

BathExpansion expand_matsubara(const SpectralDensity& j, double temperature, int k_max)
{
    require(j.is_ohmic_drude(), "Matsubara expansion needs an Ohmic-Drude spectral density");
    require(temperature > 0.0, "Matsubara expansion needs T > 0");
    require(k_max >= 1, "Matsubara expansion needs k_max >= 1");
    const auto& o = j.ohmic_params();
    const double eta = o.eta, wc = o.cutoff;

    for(int k = 2; k <= std::max(k_max, 2); ++k)
    {
        const double nu = 2.0 * double(k - 1) * pi * temperature;
        // the Drude pole coincides with a Matsubara pole: cot(wc/2T) and alpha_k both diverge
        if(std::abs(nu - wc) <= 1e-9 * wc)
        {
            std::ostringstream os;
            os << "Matsubara frequency " << k << " (" << nu << ") coincides with the Drude cutoff " << wc;
            fail(ErrorCode::degenerate_parameter, os.str());
        }
    }

    BathExpansion e;
    e.temperature = temperature;
    e.kind = BathExpansion::Kind::truncated_matsubara;
    e.matsubara_count = k_max;
    e.terms.push_back({cplx(eta * wc / std::tan(wc / (2.0 * temperature)), -eta * wc), cplx(wc, 0.0)});
    for(int k = 2; k <= k_max; ++k)
    {
        const double nu = 2.0 * double(k - 1) * pi * temperature;
        const double a = 4.0 * eta * wc * temperature * nu / (nu * nu - wc * wc);
        e.terms.push_back({cplx(a, 0.0), cplx(nu, 0.0)});
    }
    return e;
}

double expansion_error(const BathExpansion& e, const SpectralDensity& j, double temperature,
                       std::span<const double> t_grid)
{
    require(!t_grid.empty(), "expansion_error needs a nonempty time grid");
    double worst = 0.0;
    for(double t : t_grid)
    {
        require(t >= 0.0, "expansion_error needs nonnegative times");
        worst = std::max(worst, std::abs(e.correlation(t) - correlation_quadrature(j, temperature, t)));
    }
    return worst;
}

MatsubaraSelection select_matsubara(const SpectralDensity& j, double temperature, double rel_tol, int k_cap)
{
    require(j.is_ohmic_drude(), "Matsubara selection needs an Ohmic-Drude spectral density");
    require(rel_tol > 0.0 && k_cap >= 1, "Matsubara selection needs rel_tol > 0 and k_cap >= 1");
    const double wc = j.ohmic_params().cutoff;
    std::vector<double> grid(64);
    for(int i = 0; i < 64; ++i) grid[i] = double(i + 1) * (10.0 / wc) / 64.0;

    std::vector<cplx> reference(grid.size());
    double scale = 0.0;
    for(std::size_t i = 0; i < grid.size(); ++i)
    {
        reference[i] = correlation_quadrature(j, temperature, grid[i]);
        scale = std::max(scale, std::abs(reference[i]));
    }

    MatsubaraSelection sel;
    sel.threshold = rel_tol * scale;
    for(int k = 1;; k = std::min(2 * k, k_cap))
    {
        sel.expansion = expand_matsubara(j, temperature, k);
        sel.error = 0.0;
        for(std::size_t i = 0; i < grid.size(); ++i)
            sel.error = std::max(sel.error, std::abs(sel.expansion.correlation(grid[i]) - reference[i]));
        sel.converged = sel.error < sel.threshold;
        if(sel.converged || k == k_cap) break;
    }
    return sel;
}

BathExpansion expansion_for(const SpectralDensity& j, double temperature, int k_max)
{
    if(j.is_lorentz()) return expand_lorentz_zero_T(j, temperature);
    require(temperature > 0.0, "the Ohmic-Drude bath needs T > 0 for the hierarchy (Matsubara series)");
    return expand_matsubara(j, temperature, k_max);
}

}  // namespace heomkit
