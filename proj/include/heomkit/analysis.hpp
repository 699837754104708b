#ifndef HEOMKIT_ANALYSIS_HPP
#define HEOMKIT_ANALYSIS_HPP

#include <string>
#include <vector>

#include "heomkit/bath.hpp"
#include "heomkit/integrator.hpp"

namespace heomkit
{

struct Peak
{
    double location = 0.0;
    double height = 0.0;
    double prominence = 0.0;
    double half_width = -1.0;  // half width at half maximum; -1 when a side never drops below it
};

struct SpectrumResult
{
    std::vector<double> omega;
    std::vector<double> values;
    // |x(t_final)| >= 0.05 max |x|: the finite window visibly cuts the signal
    bool truncated_window = false;
    double tail_ratio = 0.0;
};

struct SpectrumOptions
{
    // optional exp(-rate t) apodization; off by default since it widens peaks
    double window_rate = 0.0;
};

// Evenly spaced grid of n points over [lo, hi].
std::vector<double> uniform_grid(double lo, double hi, std::size_t n);

// sqrt(2/pi) * int_0^tf cos(w t) x(t) dt, composite trapezoid on the samples.
// The time grid must start at zero and be uniform.
SpectrumResult cosine_spectrum(const std::vector<double>& times, const std::vector<double>& signal,
                               const std::vector<double>& omega, const SpectrumOptions& opts = {});
SpectrumResult cosine_spectrum(const Trajectory& traj, const std::string& observable,
                               const std::vector<double>& omega, const SpectrumOptions& opts = {});

enum class PeakStructure
{
    degenerate,  // nothing above the threshold
    single,
    double_peak,
    multiple
};

const char* to_string(PeakStructure s);

struct PeakClassification
{
    PeakStructure structure = PeakStructure::degenerate;
    std::vector<Peak> peaks;          // retained peaks, by decreasing height (ties: lower frequency first)
    std::vector<double> dominant;     // locations of the retained peaks, same order
    double threshold = 0.0;           // absolute prominence threshold used
    double relative_threshold = 0.0;
};

// Local maxima whose topographic prominence is at least
// relative_threshold * (global maximum of the spectrum).
PeakClassification classify_peaks(const SpectrumResult& spec, double relative_threshold = 0.05);

struct ZetaOptions
{
    double start = 1.0;
    double tolerance = 1e-10;
    int max_iterations = 500;
};

struct ZetaResult
{
    double zeta = 1.0;
    int iterations = 0;
    double residual = 0.0;  // |zeta - F(zeta)| at the returned value
};

// Fixed point of zeta = exp(-1/2 int_0^inf J(w) coth(w/2T) / (zeta w0 + w)^2 dw).
ZetaResult solve_zeta(const SpectralDensity& j, double temperature, double omega0, const ZetaOptions& opts = {});
// Right-hand side of the fixed-point map.
double zeta_map(const SpectralDensity& j, double temperature, double omega0, double zeta);

struct EffectiveBath
{
    double zeta = 1.0;
    std::vector<double> omega;
    std::vector<double> shift;       // R(w)
    std::vector<double> broadening;  // theta(w)
    std::vector<double> jeff;
    std::vector<double> shift_error; // Richardson residual of each R(w)
    double tail_bound = 0.0;         // bound on the dropped w' > cutoff part of R
    double dominant_frequency = 0.0;
    double gamma0 = 0.0;             // J_eff at the dominant frequency, unit constant
};

struct PrincipalValueOptions
{
    double tail_factor = 100.0;   // R integrand truncated at tail_factor * frequency scale
    double tolerance = 1e-7;      // accepted Richardson residual (absolute, relative to 1 + |R|)
};

struct EffectivePoint
{
    double shift = 0.0;
    double broadening = 0.0;
    double jeff = 0.0;
    double shift_error = 0.0;
};

double broadening(const SpectralDensity& j, double temperature, double omega0, double zeta, double omega);
// R(w) through symmetric exclusion at h, h/2, h/4 with Richardson extrapolation.
EffectivePoint effective_point(const SpectralDensity& j, double temperature, double omega0, double g0, double zeta,
                               double omega, const PrincipalValueOptions& opts = {});

// Grid evaluation; dominant_frequency <= 0 means omega0.
EffectiveBath effective_spectral_density(const SpectralDensity& j, double temperature, double omega0, double g0,
                                         double zeta, const std::vector<double>& omega,
                                         double dominant_frequency = 0.0, const PrincipalValueOptions& opts = {});

}  // namespace heomkit

#endif
