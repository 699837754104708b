#include "heomkit/born_markov.hpp"

#include <cmath>

#include "heomkit/quadrature.hpp"

namespace heomkit
{

EigenDecomposition decompose(const Matrix& hamiltonian, const Matrix& coupling)
{
    if(hamiltonian.rows() != hamiltonian.cols() || coupling.rows() != hamiltonian.rows() ||
       coupling.cols() != hamiltonian.cols())
        fail(ErrorCode::dimension_mismatch, "Hamiltonian and coupling must be square and of equal size");
    require(is_hermitian(hamiltonian), "Hamiltonian must be Hermitian");
    require(is_hermitian(coupling), "coupling must be Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(hamiltonian);
    if(es.info() != Eigen::Success) fail(ErrorCode::numerical_failure, "Hamiltonian diagonalization failed");
    EigenDecomposition dec;
    dec.energies = es.eigenvalues();
    dec.vectors = es.eigenvectors();
    dec.jump = dec.vectors.adjoint() * coupling * dec.vectors;
    return dec;
}

namespace
{

quad::Options pv_options()
{
    quad::Options o;
    o.abs_tol = 1e-13;
    o.rel_tol = 1e-11;
    o.max_intervals = 40000;
    return o;
}

// int_c^inf g via w = c / u
double half_line(const std::function<double(double)>& g, double c)
{
    auto mapped = [&](double u) { return u <= 0.0 ? 0.0 : g(c / u) * c / (u * u); };
    return quad::value_or_throw(quad::integrate<double>(mapped, 0.0, 1.0, pv_options()), "principal value tail");
}

}  // namespace

double principal_value_even(const std::function<double(double)>& g, double e, double scale)
{
    require(e > 0.0, "principal value needs a positive gap");
    const double ge = g(e) / (2.0 * e);
    // removable singularity at w = e; Gauss-Kronrod never samples the breakpoint itself
    auto core = [&](double w) { return (g(w) / (w + e) - ge) / (w - e); };
    const double near = quad::value_or_throw(quad::integrate<double>(core, std::vector<double>{0.0, e, 2.0 * e},
                                                                     pv_options()),
                                             "principal value core");
    const double mid_end = std::max(2.0 * e, 100.0 * scale);
    double mid = 0.0;
    if(mid_end > 2.0 * e)
    {
        std::vector<double> cuts{2.0 * e};
        if(scale > 2.0 * e && scale < mid_end) cuts.push_back(scale);
        cuts.push_back(mid_end);
        mid = quad::value_or_throw(
            quad::integrate<double>([&](double w) { return g(w) / (w * w - e * e); }, cuts, pv_options()),
            "principal value body");
    }
    const double tail = half_line([&](double w) { return g(w) / (w * w - e * e); }, mid_end);
    return near + mid + tail;
}

UpsilonXi build_upsilon_xi(const EigenDecomposition& dec, const SpectralDensity& j, double temperature,
                           bool lamb_shift)
{
    require(temperature >= 0.0, "temperature must be >= 0");
    if(lamb_shift && !j.is_ohmic_drude())
        fail(ErrorCode::invalid_argument, "Lamb shift needs an Ohmic spectral density (J(w)/w must stay finite at 0)");
    const double wc = j.frequency_scale();
    auto g_even = [&](double w) { return thermal_spectral_weight(j, temperature, w); };
    auto g_odd = [&](double w) { return j.value(w) * w; };
    const auto d = dec.energies.size();
    const double scale = std::max(1.0, dec.energies.cwiseAbs().maxCoeff());
    Matrix up = Matrix::Zero(d, d);
    Matrix xi = Matrix::Zero(d, d);
    for(Eigen::Index r = 0; r < d; ++r)
        for(Eigen::Index rp = 0; rp < d; ++rp)
        {
            const double e = dec.energies[r] - dec.energies[rp];
            const double a = std::abs(e) <= 1e-12 * scale ? 0.0 : std::abs(e);
            const double even = thermal_spectral_weight(j, temperature, a);
            const double odd = (e < 0 ? -1.0 : 1.0) * j.value(a);
            up(r, rp) = 0.5 * pi * even * dec.jump(r, rp);
            xi(r, rp) = 0.5 * pi * (a == 0.0 ? 0.0 : odd) * dec.jump(r, rp);
            if(!lamb_shift || dec.jump(r, rp) == cplx(0.0)) continue;
            if(a == 0.0)
            {
                auto j_over_w = [&](double w) { return w == 0.0 ? 0.0 : j.value(w) / w; };
                const double body = quad::value_or_throw(
                    quad::integrate<double>(j_over_w, std::vector<double>{0.0, wc, 100.0 * wc}, pv_options()),
                    "Lamb shift at zero gap");
                xi(r, rp) += I * (body + half_line(j_over_w, 100.0 * wc)) * dec.jump(r, rp);
            }
            else
            {
                up(r, rp) += I * e * principal_value_even(g_even, a, wc) * dec.jump(r, rp);
                xi(r, rp) += I * principal_value_even(g_odd, a, wc) * dec.jump(r, rp);
            }
        }
    return {dec.vectors * up * dec.vectors.adjoint(), dec.vectors * xi * dec.vectors.adjoint()};
}

Matrix bm_rhs(const Matrix& rho, const Matrix& hamiltonian, const Matrix& coupling, const Matrix& upsilon,
              const Matrix& xi)
{
    const auto d = rho.rows();
    if(rho.cols() != d || hamiltonian.rows() != d || coupling.rows() != d || upsilon.rows() != d || xi.rows() != d)
        fail(ErrorCode::dimension_mismatch, "Born-Markov operands must share one dimension");
    return -I * commutator(hamiltonian, rho) - commutator(coupling, commutator(upsilon, rho)) +
           commutator(coupling, anticommutator(xi, rho));
}

Derivative born_markov_derivative(const Matrix& hamiltonian, const Matrix& coupling, const UpsilonXi& rates)
{
    const auto d = hamiltonian.rows();
    return [h = hamiltonian, f = coupling, up = rates.upsilon, xi = rates.xi, d](std::span<const cplx> in,
                                                                                 std::span<cplx> out) {
        if(in.size() != std::size_t(d * d) || out.size() != in.size())
            fail(ErrorCode::dimension_mismatch, "Born-Markov state size mismatch");
        Eigen::Map<const Matrix> rho(in.data(), d, d);
        Eigen::Map<Matrix>(out.data(), d, d) = bm_rhs(rho, h, f, up, xi);
    };
}

}  // namespace heomkit
