#ifndef HEOMKIT_BATH_HPP
#define HEOMKIT_BATH_HPP

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "heomkit/core.hpp"
#include "heomkit/quadrature.hpp"

namespace heomkit
{

struct LorentzParams
{
    double lambda;  // coupling strength
    double gamma;   // width
    double center;  // resonance frequency
};

struct OhmicDrudeParams
{
    double eta;     // coupling strength
    double cutoff;  // Drude cutoff frequency
};

// Bath spectral density J(omega). Immutable once constructed.
//
// The Lorentz form is a zero-temperature bath whose correlation function is
// the exact single exponential lambda * exp(-(gamma + i*center) t); its
// frequency integrals run over the whole real axis. The Ohmic-Drude form is
// integrated over omega >= 0 with the coth(omega/2T) thermal weight.
class SpectralDensity
{
  public:
    static SpectralDensity lorentz(double lambda, double gamma, double center);
    static SpectralDensity ohmic_drude(double eta, double cutoff);

    bool is_lorentz() const { return std::holds_alternative<LorentzParams>(params_); }
    bool is_ohmic_drude() const { return std::holds_alternative<OhmicDrudeParams>(params_); }
    const LorentzParams& lorentz_params() const;
    const OhmicDrudeParams& ohmic_params() const;

    // Closed form at any real omega (no sign check). The Ohmic-Drude form is
    // odd in omega, the Lorentz form is the plain Lorentzian.
    double value(double omega) const;

    // Characteristic frequency scale: cutoff for Ohmic-Drude, |center| + gamma for Lorentz.
    double frequency_scale() const;

    // Returns a copy with the coupling strength (lambda or eta) replaced.
    SpectralDensity with_coupling(double coupling) const;
    double coupling() const;

    std::string describe() const;

  private:
    explicit SpectralDensity(std::variant<LorentzParams, OhmicDrudeParams> p) : params_(p) {}
    std::variant<LorentzParams, OhmicDrudeParams> params_;
};

// J(omega) for omega >= 0.
double evaluate_spectral_density(const SpectralDensity& j, double omega);

// J(omega) coth(omega / 2T) for omega >= 0, with the finite omega -> 0 limit.
double thermal_spectral_weight(const SpectralDensity& j, double temperature, double omega);

struct CorrelationQuadrature
{
    double abs_tol = 1e-13;
    double rel_tol = 1e-10;
    std::size_t max_intervals = 40000;
};

// C(t) = int dw J(w) [coth(w/2T) cos(wt) - i sin(wt)] by adaptive quadrature,
// with the estimated error. Lorentz requires T = 0. For Ohmic-Drude the
// temperature-independent part is evaluated in closed form (exponential
// integrals) and the thermal remainder J(w)(coth - 1) by quadrature on
// [0, max(50 wc, 50 T)]; C(0) diverges logarithmically and t = 0 is rejected.
quad::Result<cplx> correlation_quadrature_detailed(const SpectralDensity& j, double temperature, double t,
                                                   const CorrelationQuadrature& opts = {});

// As above; throws not_converged (with the error estimate) on failure.
cplx correlation_quadrature(const SpectralDensity& j, double temperature, double t,
                            const CorrelationQuadrature& opts = {});

struct ExponentialTerm
{
    cplx amplitude;  // alpha_k
    cplx rate;       // beta_k, Re > 0
};

struct BathExpansion
{
    enum class Kind
    {
        exact,
        truncated_matsubara
    };

    std::vector<ExponentialTerm> terms;
    double temperature = 0.0;
    Kind kind = Kind::exact;
    int matsubara_count = 0;

    // sum_k alpha_k exp(-beta_k t)
    cplx correlation(double t) const;
    std::size_t size() const { return terms.size(); }
    std::string provenance() const;
    // max(max Re beta, max |Im beta|)
    double max_rate() const;
    // Returns a copy with every amplitude scaled by s.
    BathExpansion scaled(double s) const;
};

BathExpansion expand_lorentz_zero_T(const SpectralDensity& j, double temperature = 0.0);

// Ohmic-Drude Matsubara series truncated to k_max terms (the first is the
// Drude pole, the rest are Matsubara poles 2(k-1) pi T).
BathExpansion expand_matsubara(const SpectralDensity& j, double temperature, int k_max);

// max over t_grid of |expansion(t) - quadrature(t)|.
double expansion_error(const BathExpansion& e, const SpectralDensity& j, double temperature,
                       std::span<const double> t_grid);

struct MatsubaraSelection
{
    BathExpansion expansion;
    double error = 0.0;      // expansion_error on the selection grid
    double threshold = 0.0;  // the acceptance threshold it was compared to
    bool converged = false;
};

// Doubles k_max from 1 until expansion_error < rel_tol * max|C| on the grid
// t_j = j * (10 / wc) / 64, j = 1..64, or until k_cap is reached.
MatsubaraSelection select_matsubara(const SpectralDensity& j, double temperature, double rel_tol = 1e-5,
                                    int k_cap = 64);

// Expansion for HEOM use: exact single term for Lorentz at T = 0, Matsubara
// series with k_max terms for Ohmic-Drude at T > 0. Ohmic-Drude at T = 0 is rejected.
BathExpansion expansion_for(const SpectralDensity& j, double temperature, int k_max);

}  // namespace heomkit

#endif
