#include "heomkit/models.hpp"

#include <algorithm>
#include <cmath>

namespace heomkit
{

namespace pauli
{
Matrix x()
{
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
Matrix y()
{
    Matrix m(2, 2);
    m << 0, -I, I, 0;
    return m;
}
Matrix z()
{
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}
Matrix identity() { return Matrix::Identity(2, 2); }
}  // namespace pauli

Matrix kron(const Matrix& a, const Matrix& b)
{
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for(Eigen::Index i = 0; i < a.rows(); ++i)
        for(Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

void ModelSpec::validate() const
{
    const auto d = hamiltonian.rows();
    if(hamiltonian.cols() != d || coupling.rows() != d || coupling.cols() != d || rho0.rows() != d ||
       rho0.cols() != d)
        fail(ErrorCode::dimension_mismatch, "model operators must share one square dimension");
    require(is_hermitian(hamiltonian), "model Hamiltonian must be Hermitian");
    require(is_hermitian(coupling), "model coupling must be Hermitian");
    require(is_hermitian(rho0), "initial density matrix must be Hermitian");
    require(std::abs(rho0.trace() - cplx(1.0, 0.0)) < 1e-12, "initial density matrix must have unit trace");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho0, Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() > -1e-12, "initial density matrix must be positive semidefinite");
}

ModelSpec dephasing_model(double omega0)
{
    require(omega0 > 0.0, "dephasing model needs omega0 > 0");
    ModelSpec m;
    m.name = "dephasing";
    m.hamiltonian = 0.5 * omega0 * pauli::z();
    m.coupling = pauli::z();
    m.rho0 = Matrix::Constant(2, 2, cplx(0.5, 0.0));
    m.factors = {"S"};
    m.system_frequency = omega0;
    return m;
}

ModelSpec two_qubit_model(double omega0, double g0)
{
    require(omega0 > 0.0, "two-qubit model needs omega0 > 0");
    require(g0 >= 0.0, "two-qubit model needs g0 >= 0");
    const Matrix one = pauli::identity();
    ModelSpec m;
    m.name = "two_qubit";
    m.hamiltonian = 0.5 * omega0 * (kron(pauli::z(), one) + kron(one, pauli::z())) + g0 * kron(pauli::x(), pauli::x());
    m.coupling = kron(one, pauli::x());
    const Matrix plus = Matrix::Constant(2, 2, cplx(0.5, 0.0));
    m.rho0 = kron(plus, plus);
    m.factors = {"A", "B"};
    m.system_frequency = omega0;
    return m;
}

namespace
{
// (1 - cos wt)/w^2 written as 2 sin^2(wt/2)/w^2, series for tiny w
double dephasing_kernel(double w, double t)
{
    if(std::abs(w) < 1e-4)
    {
        const double t2 = t * t;
        return 0.5 * t2 - w * w * t2 * t2 / 24.0;
    }
    const double s = std::sin(0.5 * w * t);
    return 2.0 * s * s / (w * w);
}
}  // namespace

double decoherence_factor(const SpectralDensity& j, double temperature, double t)
{
    require(t >= 0.0, "decoherence factor needs t >= 0");
    require(temperature >= 0.0, "temperature must be >= 0");
    if(t == 0.0) return 0.0;

    quad::Options opts;
    opts.abs_tol = 1e-12;
    opts.rel_tol = 1e-11;
    opts.max_intervals = 40000;

    if(j.is_lorentz())
    {
        require(temperature == 0.0, "the Lorentz bath is defined at zero temperature only");
        const auto& l = j.lorentz_params();
        auto f = [&](double theta) {
            const double w = l.center + l.gamma * std::tan(theta);
            return (l.lambda / pi) * dephasing_kernel(w, t);
        };
        opts.initial_intervals = 16 + std::size_t(std::min(2048.0, 4.0 * l.gamma * t));
        auto r = quad::integrate<double>(f, -0.5 * pi, 0.5 * pi, opts);
        return 4.0 * quad::value_or_throw(r, "decoherence factor");
    }

    const auto& o = j.ohmic_params();
    const double upper = std::max(50.0 * o.cutoff, 50.0 * temperature);
    auto f = [&](double w) { return thermal_spectral_weight(j, temperature, w) * dephasing_kernel(w, t); };
    std::vector<double> breaks{0.0};
    for(double b : {o.cutoff, 5.0 * o.cutoff, temperature, 5.0 * temperature})
        if(b > breaks.back() && b < upper) breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    breaks.push_back(upper);
    opts.initial_intervals = 1 + std::size_t(std::min(256.0, 2.0 * o.cutoff * t));
    auto r = quad::integrate<double>(f, breaks, opts);
    double gamma = quad::value_or_throw(r, "decoherence factor");
    // Drude tail beyond the cutoff: J coth ~ 2 eta wc / (pi w), <1 - cos> = 1
    gamma += (2.0 * o.eta * o.cutoff / pi) / (2.0 * upper * upper);
    return 4.0 * gamma;
}

std::vector<double> dephasing_oracle(const SpectralDensity& j, double temperature, double omega0,
                                     std::span<const double> t_grid)
{
    std::vector<double> out;
    out.reserve(t_grid.size());
    for(double t : t_grid)
    {
        require(t >= 0.0, "oracle times must be >= 0");
        out.push_back(std::cos(omega0 * t) * std::exp(-decoherence_factor(j, temperature, t)));
    }
    return out;
}

double sigma_x_expectation(const Matrix& rho)
{
    if(rho.rows() != 2 || rho.cols() != 2) fail(ErrorCode::dimension_mismatch, "sigma_x needs a 2x2 density matrix");
    return (rho * pauli::x()).trace().real();
}

double qubit_a_sigma_x(const Matrix& rho)
{
    if(rho.rows() != 4 || rho.cols() != 4) fail(ErrorCode::dimension_mismatch, "qubit A sigma_x needs a 4x4 matrix");
    static const Matrix op = kron(pauli::x(), pauli::identity());
    const cplx v = (rho * op).trace();
    if(std::abs(v.imag()) >= 1e-8)
        fail(ErrorCode::numerical_failure, "qubit A sigma_x expectation has a non-negligible imaginary part");
    return v.real();
}

Observable coherence_observable(const ModelSpec& model)
{
    if(model.dimension() == 2) return {"sigma_x", sigma_x_expectation};
    if(model.dimension() == 4) return {"sigma_x", qubit_a_sigma_x};
    fail(ErrorCode::dimension_mismatch, "no coherence observable for this model dimension");
}

Matrix swap_qubits(const Matrix& op)
{
    if(op.rows() != 4 || op.cols() != 4) fail(ErrorCode::dimension_mismatch, "qubit swap needs a 4x4 operator");
    Matrix p = Matrix::Zero(4, 4);
    // |ab> -> |ba| with index 2a + b
    for(int a = 0; a < 2; ++a)
        for(int b = 0; b < 2; ++b) p(2 * b + a, 2 * a + b) = 1.0;
    return p * op * p.adjoint();
}

}  // namespace heomkit
