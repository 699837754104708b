#include <doctest.h>

#include <algorithm>

#include "support.hpp"

using namespace heomkit;

namespace
{

std::vector<double> sorted_eigenvalues(const Matrix& h)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST_CASE("dephasing model")
{
    const auto m = dephasing_model(1.0);
    CHECK(sigma_x_expectation(m.rho0) == doctest::Approx(1.0));
    CHECK(commutator(m.coupling, m.hamiltonian).cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::abs(m.rho0.trace() - 1.0) < 1e-15);
    CHECK_THROWS(dephasing_model(0.0));
}

TEST_CASE("two-qubit spectrum")
{
    const auto m = two_qubit_model(1.0, 0.1);
    const auto ev = sorted_eigenvalues(m.hamiltonian);
    const double s = std::sqrt(1.01);
    CHECK(ev[0] == doctest::Approx(-s).epsilon(1e-14));
    CHECK(ev[1] == doctest::Approx(-0.1).epsilon(1e-14));
    CHECK(ev[2] == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(ev[3] == doctest::Approx(s).epsilon(1e-14));
    const auto free = sorted_eigenvalues(two_qubit_model(1.0, 0.0).hamiltonian);
    CHECK(free[0] == doctest::Approx(-1.0));
    CHECK(std::abs(free[1]) < 1e-15);
    CHECK(std::abs(free[2]) < 1e-15);
    CHECK(free[3] == doctest::Approx(1.0));
}

TEST_CASE("two-qubit initial state and observable")
{
    const auto m = two_qubit_model(1.0, 0.1);
    CHECK(std::abs(m.rho0.trace() - 1.0) < 1e-15);
    CHECK((m.rho0 * m.rho0 - m.rho0).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(qubit_a_sigma_x(m.rho0) == doctest::Approx(1.0));
    CHECK(std::abs(qubit_a_sigma_x(Matrix::Identity(4, 4) / 4.0)) < 1e-15);
    CHECK((m.coupling - kron(pauli::identity(), pauli::x())).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("qubit exchange symmetry of the Hamiltonian")
{
    const auto m = two_qubit_model(1.0, 0.3);
    CHECK((swap_qubits(m.hamiltonian) - m.hamiltonian).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((swap_qubits(m.coupling) - kron(pauli::x(), pauli::identity())).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("closed two-qubit evolution at g0 = 0 precesses")
{
    const auto m = two_qubit_model(1.0, 0.0);
    const Matrix h = m.hamiltonian;
    Derivative rhs = [h](std::span<const cplx> in, std::span<cplx> out) {
        Eigen::Map<const Matrix> r(in.data(), 4, 4);
        Eigen::Map<Matrix>(out.data(), 4, 4) = -I * (h * r - r * h);
    };
    std::vector<cplx> y(m.rho0.data(), m.rho0.data() + 16);
    const auto tr = integrate(rhs, y, 4, IntegratorConfig::fitted(10.0, 1e-3, 100), {coherence_observable(m)}, 1.0);
    double worst = 0.0;
    for(std::size_t i = 0; i < tr.times.size(); ++i)
        worst = std::max(worst, std::abs(tr.values("sigma_x")[i] - std::cos(tr.times[i])));
    CHECK(worst < 1e-8);
}

TEST_CASE("dephasing oracle")
{
    const auto j = SpectralDensity::lorentz(0.05, 0.5, 1.0);
    const std::vector<double> t = {0.0, 1.0, 5.0};
    const auto o = dephasing_oracle(j, 0.0, 1.0, t);
    CHECK(o[0] == 1.0);
    CHECK(decoherence_factor(j, 0.0, 0.0) == 0.0);
    CHECK(decoherence_factor(j, 0.0, 5.0) > decoherence_factor(j, 0.0, 1.0));
    const auto od = SpectralDensity::ohmic_drude(5e-4, 3.0);
    CHECK(decoherence_factor(od, 100.0, 2.0) > decoherence_factor(od, 20.0, 2.0));
}

TEST_CASE("HEOM keeps the dephasing populations fixed")
{
    const auto m = dephasing_model(1.0);
    const auto j = SpectralDensity::lorentz(0.1, 0.5, 1.0);
    const auto bath = expand_lorentz_zero_T(j);
    const auto ops = build_superoperators(m.hamiltonian, m.coupling, bath);
    auto indices = std::make_shared<const HierarchyIndexSet>(enumerate_indices(1, 4));
    const HeomRhs rhs(ops, indices, true);
    Observable pop{"rho_ee", [](const Matrix& r) { return r(0, 0).real(); }};
    const auto tr = integrate(rhs, initial_hierarchy_state(indices, m.rho0).data, 2,
                              IntegratorConfig::fitted(20.0, 0.01, 10), {pop}, rhs.stiffness_bound());
    for(double v : tr.values("rho_ee")) CHECK(std::abs(v - 0.5) < 1e-6);
}

TEST_CASE("HEOM matches the dephasing oracle at the Lorentz parameters")
{
    const auto m = dephasing_model(1.0);
    RunSettings s;
    s.t_final = 20.0;
    s.record_interval = 0.05;
    for(double lambda : {0.01, 0.1})
    {
        const auto j = SpectralDensity::lorentz(lambda, 0.5, 1.0);
        const auto tr = run_heom(m, j, 0.0, 6, 1, s);
        const auto o = dephasing_oracle(j, 0.0, 1.0, tr.times);
        double worst = 0.0;
        for(std::size_t i = 0; i < o.size(); ++i) worst = std::max(worst, std::abs(o[i] - tr.values("sigma_x")[i]));
        CHECK(worst < 1e-3);
        CHECK(tr.diagnostics.max_trace_drift < 1e-6);
        CHECK(tr.diagnostics.max_hermiticity_residue < 1e-8);
    }
}
