#ifndef HEOMKIT_MODELS_HPP
#define HEOMKIT_MODELS_HPP

#include <span>
#include <string>
#include <vector>

#include "heomkit/bath.hpp"
#include "heomkit/core.hpp"
#include "heomkit/integrator.hpp"

namespace heomkit
{

// Basis convention: |e> is the sigma_z = +1 state and comes first; tensor
// products are ordered (ee, eg, ge, gg) with qubit A as the left factor.
struct ModelSpec
{
    std::string name;
    Matrix hamiltonian;
    Matrix coupling;
    Matrix rho0;
    std::vector<std::string> factors;  // tensor-factor labels, left to right
    double system_frequency = 1.0;

    int dimension() const { return int(hamiltonian.rows()); }
    void validate() const;
};

namespace pauli
{
Matrix x();
Matrix y();
Matrix z();
Matrix identity();
}  // namespace pauli

Matrix kron(const Matrix& a, const Matrix& b);

// H = (w0/2) sigma_z, f = sigma_z, rho0 = |+><+|.
ModelSpec dephasing_model(double omega0);

// H = (w0/2)(sz x 1 + 1 x sz) + g0 sx x sx, f = 1 x sx, rho0 = |++><++|.
ModelSpec two_qubit_model(double omega0, double g0);

// Gamma(t) = 4 int dw J(w) (1 - cos wt)/w^2 coth(w/2T) by quadrature.
double decoherence_factor(const SpectralDensity& j, double temperature, double t);

// cos(w0 t) exp(-Gamma(t)) on the grid.
std::vector<double> dephasing_oracle(const SpectralDensity& j, double temperature, double omega0,
                                     std::span<const double> t_grid);

// Re tr(rho sigma_x) for a 2-level rho.
double sigma_x_expectation(const Matrix& rho);

// Re tr(rho (sigma_x x 1)) for a 4-level rho; imaginary residue must stay below 1e-8.
double qubit_a_sigma_x(const Matrix& rho);

// The coherence indicator of the model as a named observable ("sigma_x").
Observable coherence_observable(const ModelSpec& model);

// Swaps the two qubit factors of a 4x4 operator.
Matrix swap_qubits(const Matrix& op);

}  // namespace heomkit

#endif
