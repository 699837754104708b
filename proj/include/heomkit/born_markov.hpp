#ifndef HEOMKIT_BORN_MARKOV_HPP
#define HEOMKIT_BORN_MARKOV_HPP

#include <functional>

#include "heomkit/bath.hpp"
#include "heomkit/core.hpp"
#include "heomkit/integrator.hpp"

namespace heomkit
{

struct EigenDecomposition
{
    Eigen::VectorXd energies;  // ascending
    Matrix vectors;            // orthonormal columns |phi_r>
    Matrix jump;               // f_rr' = <phi_r| f |phi_r'>

    double gap(int r, int rp) const { return energies[r] - energies[rp]; }
};

EigenDecomposition decompose(const Matrix& hamiltonian, const Matrix& coupling);

struct UpsilonXi
{
    Matrix upsilon;
    Matrix xi;
};

// Markovian rate operators in the system eigenbasis, Lamb shifts dropped:
//   Upsilon = (pi/2) sum_rr' J(|e|) coth(|e|/2T) f_rr' |r><r'|
//   Xi      = (pi/2) sum_rr' sgn(e) J(|e|)     f_rr' |r><r'|,   e = e_r - e_r'
// J coth is continued evenly and J oddly to negative gaps; zero gaps take the
// w -> 0+ limit. The pi/2 is the weight of the single delta function that
// falls inside w >= 0.
//
// With lamb_shift the principal-value parts are kept as well (Ohmic-Drude only):
//   Upsilon_rr' += i e   P int J coth / (w^2 - e^2) dw
//   Xi_rr'      += i     P int J w    / (w^2 - e^2) dw
// Off by default.
UpsilonXi build_upsilon_xi(const EigenDecomposition& dec, const SpectralDensity& j, double temperature,
                           bool lamb_shift = false);

// P int_0^inf g(w) / (w^2 - e^2) dw for e > 0; g must make the integrand decay at least like 1/w^2.
double principal_value_even(const std::function<double(double)>& g, double e, double scale);

// -i[H, rho] - [f, [Upsilon, rho]] + [f, {Xi, rho}]
Matrix bm_rhs(const Matrix& rho, const Matrix& hamiltonian, const Matrix& coupling, const Matrix& upsilon,
              const Matrix& xi);

// bm_rhs as an integrator right-hand side over the flat d x d state.
Derivative born_markov_derivative(const Matrix& hamiltonian, const Matrix& coupling, const UpsilonXi& rates);

}  // namespace heomkit

#endif
