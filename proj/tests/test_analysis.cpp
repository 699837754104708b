#include <doctest.h>

#include <random>

#include "heomkit/analysis.hpp"

using namespace heomkit;

namespace
{

struct Signal
{
    std::vector<double> t, x;
};

// sum_i amp_i exp(-kappa t) cos(w_i t) on [0, tf]
Signal damped(std::vector<double> freqs, double kappa, double tf = 200.0, double dt = 0.01)
{
    Signal s;
    const std::size_t n = std::size_t(std::llround(tf / dt)) + 1;
    for(std::size_t i = 0; i < n; ++i)
    {
        const double t = double(i) * dt;
        double v = 0.0;
        for(double w : freqs) v += std::exp(-kappa * t) * std::cos(w * t);
        s.t.push_back(t);
        s.x.push_back(v);
    }
    return s;
}

// sqrt(2/pi) int_0^inf exp(-kappa t) cos(w1 t) cos(w t) dt
double damped_transform(double w, double w1, double kappa)
{
    const double a = kappa / (kappa * kappa + (w - w1) * (w - w1));
    const double b = kappa / (kappa * kappa + (w + w1) * (w + w1));
    return std::sqrt(2.0 / pi) * 0.5 * (a + b);
}

}  // namespace

TEST_CASE("damped cosine: closed-form transform, single peak, width kappa")
{
    const double kappa = 0.1;
    const auto s = damped({1.0}, kappa);
    const auto grid = uniform_grid(0.0, 2.0, 2001);
    const auto spec = cosine_spectrum(s.t, s.x, grid);
    for(std::size_t k = 0; k < grid.size(); k += 50)
        CHECK(std::abs(spec.values[k] - damped_transform(grid[k], 1.0, kappa)) < 1e-4);
    CHECK_FALSE(spec.truncated_window);
    const auto c = classify_peaks(spec);
    CHECK(c.structure == PeakStructure::single);
    REQUIRE(c.peaks.size() == 1);
    CHECK(std::abs(c.peaks[0].location - 1.0) <= 1e-3);
    CHECK(c.peaks[0].half_width == doctest::Approx(kappa).epsilon(0.05));
}

TEST_CASE("two equal damped cosines give a double peak")
{
    const auto s = damped({0.9, 1.1}, 0.02, 600.0, 0.02);
    const auto grid = uniform_grid(0.0, 2.0, 2001);
    const auto c = classify_peaks(cosine_spectrum(s.t, s.x, grid));
    CHECK(c.structure == PeakStructure::double_peak);
    REQUIRE(c.dominant.size() == 2);
    const double lo = std::min(c.dominant[0], c.dominant[1]);
    const double hi = std::max(c.dominant[0], c.dominant[1]);
    CHECK(std::abs(lo - 0.9) <= 1e-3);
    CHECK(std::abs(hi - 1.1) <= 1e-3);
    CHECK(std::string(to_string(c.structure)) == "double-peak");
}

TEST_CASE("spectrum linearity and zero signal")
{
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    const auto grid = uniform_grid(0.0, 3.0, 301);
    const auto a = damped({0.7}, 0.05, 100.0, 0.05);
    auto b = a;
    for(double& v : b.x) v = n(rng);
    const double ca = n(rng), cb = n(rng);
    std::vector<double> mix(a.x.size());
    for(std::size_t i = 0; i < mix.size(); ++i) mix[i] = ca * a.x[i] + cb * b.x[i];
    const auto sa = cosine_spectrum(a.t, a.x, grid), sb = cosine_spectrum(b.t, b.x, grid);
    const auto sm = cosine_spectrum(a.t, mix, grid);
    for(std::size_t k = 0; k < grid.size(); ++k)
        CHECK(std::abs(sm.values[k] - (ca * sa.values[k] + cb * sb.values[k])) < 1e-10);

    const auto z = cosine_spectrum(a.t, std::vector<double>(a.t.size(), 0.0), grid);
    for(double v : z.values) CHECK(v == 0.0);
    CHECK(classify_peaks(z).structure == PeakStructure::degenerate);
}

TEST_CASE("spectrum input validation and truncation flag")
{
    const auto grid = uniform_grid(0.0, 2.0, 11);
    CHECK_THROWS(cosine_spectrum({0.0, 1.0, 3.0}, {1.0, 1.0, 1.0}, grid));
    CHECK_THROWS(cosine_spectrum({0.0, 1.0}, {1.0}, grid));
    const auto s = damped({1.0}, 0.001, 50.0, 0.05);
    CHECK(cosine_spectrum(s.t, s.x, grid).truncated_window);
    CHECK_THROWS(classify_peaks(cosine_spectrum(s.t, s.x, grid), 0.0));
}

TEST_CASE("small bumps under the prominence threshold are ignored")
{
    SpectrumResult r;
    r.omega = uniform_grid(0.0, 2.0, 201);
    for(double w : r.omega)
        r.values.push_back(std::exp(-std::pow((w - 1.0) / 0.05, 2)) + 0.02 * std::exp(-std::pow((w - 1.5) / 0.02, 2)));
    CHECK(classify_peaks(r, 0.05).structure == PeakStructure::single);
    CHECK(classify_peaks(r, 0.01).structure == PeakStructure::double_peak);
}

TEST_CASE("zeta fixed point")
{
    const double T = 10.0;
    const auto tiny = solve_zeta(SpectralDensity::ohmic_drude(1e-12, 5.0), T, 1.0);
    CHECK(std::abs(tiny.zeta - 1.0) < 1e-10);
    double previous = 1.0;
    for(double eta : {0.001, 0.01, 0.05})
    {
        const auto j = SpectralDensity::ohmic_drude(eta, 5.0);
        const auto z = solve_zeta(j, T, 1.0);
        CHECK(z.zeta < previous);
        CHECK(z.residual < 1e-10);
        CHECK(std::abs(zeta_map(j, T, 1.0, z.zeta) - z.zeta) < 1e-10);
        ZetaOptions half;
        half.start = 0.5;
        CHECK(std::abs(solve_zeta(j, T, 1.0, half).zeta - z.zeta) < 1e-9);
        previous = z.zeta;
    }
    CHECK_THROWS(solve_zeta(SpectralDensity::ohmic_drude(0.01, 5.0), -1.0, 1.0));
}

TEST_CASE("effective spectral density")
{
    const auto j = SpectralDensity::ohmic_drude(0.05, 5.0);
    const double T = 10.0;
    const double zeta = solve_zeta(j, T, 1.0).zeta;
    const auto grid = uniform_grid(0.5, 1.5, 51);
    const auto zero = effective_spectral_density(j, T, 1.0, 0.0, zeta, grid);
    for(double v : zero.jeff) CHECK(v == 0.0);
    const auto eb = effective_spectral_density(j, T, 1.0, 0.1, zeta, grid);
    for(std::size_t i = 0; i < grid.size(); ++i)
    {
        CHECK(eb.broadening[i] >= 0.0);
        CHECK(eb.jeff[i] >= 0.0);
        CHECK(eb.shift_error[i] <= 1e-7 * (1.0 + std::abs(eb.shift[i])));
    }
    CHECK(eb.gamma0 == doctest::Approx(effective_point(j, T, 1.0, 0.1, zeta, 1.0).jeff));
    CHECK_THROWS(effective_spectral_density(j, T, 1.0, 0.1, zeta, {0.0, 1.0}));
    CHECK_THROWS(broadening(j, T, 1.0, zeta, -1.0));
}

TEST_CASE("principal value against a folded midpoint sum")
{
    // R(w) = (1/pi) P int theta(x) / (w - x) dx, folded around the pole:
    // int_0^w [theta(w - u) - theta(w + u)] / u du + int_2w^W theta(x) / (w - x) dx
    const auto j = SpectralDensity::ohmic_drude(0.01, 5.0);
    const double T = 10.0, zeta = solve_zeta(j, T, 1.0).zeta;
    const double w = 1.05, far = 100.0 * 5.0;
    const auto p = effective_point(j, T, 1.0, 0.1, zeta, w);
    auto th = [&](double x) { return broadening(j, T, 1.0, zeta, x); };
    double sum = 0.0;
    const int n1 = 200000;
    for(int i = 0; i < n1; ++i)
    {
        const double u = (i + 0.5) * w / n1;
        sum += (th(w - u) - th(w + u)) / u * (w / n1);
    }
    const int n2 = 400000;
    const double lo = std::log(2.0 * w), hi = std::log(far);
    for(int i = 0; i < n2; ++i)
    {
        const double x = std::exp(lo + (i + 0.5) * (hi - lo) / n2);
        sum += th(x) / (w - x) * x * (hi - lo) / n2;
    }
    CHECK(std::abs(sum / pi - p.shift) < 1e-6 * (1.0 + std::abs(p.shift)));
}
