#ifndef HEOMKIT_TEST_SUPPORT_HPP
#define HEOMKIT_TEST_SUPPORT_HPP

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "heomkit/heom.hpp"
#include "heomkit/models.hpp"
#include "heomkit/solvers.hpp"

namespace support
{

using namespace heomkit;

using Index = std::vector<int>;

inline Matrix random_matrix(int d, std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    Matrix m(d, d);
    for(int c = 0; c < d; ++c)
        for(int r = 0; r < d; ++r) m(r, c) = cplx(n(rng), n(rng));
    return m;
}

inline Matrix random_hermitian(int d, std::mt19937_64& rng)
{
    Matrix m = random_matrix(d, rng);
    return 0.5 * (m + m.adjoint());
}

inline void all_indices(int slots, int depth, Index& cur, std::vector<Index>& out)
{
    if(int(cur.size()) == slots)
    {
        out.push_back(cur);
        return;
    }
    int used = 0;
    for(int v : cur) used += v;
    for(int v = 0; v + used <= depth; ++v)
    {
        cur.push_back(v);
        all_indices(slots, depth, cur, out);
        cur.pop_back();
    }
}

// Hierarchy written term by term from the equation of motion, with its own
// enumeration and neighbour lookup. Slots are (alpha_1, alpha_1*, alpha_2, ...)
// paired with (beta_1, beta_1*, ...).
inline std::map<Index, Matrix> oracle_rhs(const std::map<Index, Matrix>& rho, const Matrix& h, const Matrix& f,
                                   const std::vector<cplx>& alpha, const std::vector<cplx>& beta, int depth)
{
    std::map<Index, Matrix> out;
    const int slots = int(alpha.size());
    for(const auto& [l, r] : rho)
    {
        Matrix d = -I * (h * r - r * h);
        cplx damp = 0.0;
        for(int q = 0; q < slots; ++q) damp += double(l[q]) * beta[q];
        d -= damp * r;
        int weight = 0;
        for(int v : l) weight += v;
        for(int q = 0; q < slots; ++q)
        {
            if(weight < depth)
            {
                Index up = l;
                ++up[q];
                const Matrix& ru = rho.at(up);
                d += -I * (f * ru - ru * f);
            }
            if(l[q] > 0)
            {
                Index dn = l;
                --dn[q];
                const Matrix& rd = rho.at(dn);
                // 1-based p = q + 1: (i/2) alpha_p [(-1)^p {f, .} - [f, .]]
                const double sign = (q % 2 == 0) ? -1.0 : 1.0;
                Matrix psi = 0.5 * I * alpha[q] * (sign * (f * rd + rd * f) - (f * rd - rd * f));
                d += double(l[q]) * psi;
            }
        }
        out[l] = d;
    }
    return out;
}

struct Instance
{
    Matrix h, f;
    BathExpansion bath;
};

inline Instance random_instance(int d, int terms, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Instance in{random_hermitian(d, rng), random_hermitian(d, rng), {}};
    for(int k = 0; k < terms; ++k)
        in.bath.terms.push_back({cplx(u(rng), u(rng)), cplx(0.5 + std::abs(u(rng)), u(rng))});
    return in;
}

// Largest relative deviation between HeomRhs and the oracle on a random hierarchy state.
inline double compare_with_oracle(const Instance& in, int depth, std::mt19937_64& rng, bool hermitian_pairs)
{
    const int d = int(in.h.rows());
    const auto ops = build_superoperators(in.h, in.f, in.bath);
    auto indices = std::make_shared<const HierarchyIndexSet>(enumerate_indices(int(in.bath.size()), depth));
    HeomRhs rhs(ops, indices, hermitian_pairs);

    std::vector<Index> all;
    Index cur;
    all_indices(ops.slots(), depth, cur, all);
    if(all.size() != indices->size()) return INFINITY;

    std::map<Index, Matrix> rho;
    for(const auto& l : all)
    {
        if(rho.count(l)) continue;
        Matrix m = random_matrix(d, rng);
        Index bar = l;
        for(std::size_t q = 0; q + 1 < bar.size(); q += 2) std::swap(bar[q], bar[q + 1]);
        if(hermitian_pairs)
        {
            if(bar == l) m = (0.5 * (m + m.adjoint())).eval();
            rho[bar] = m.adjoint();
        }
        rho[l] = m;
    }
    HierarchyState state{indices, d, std::vector<cplx>(indices->size() * std::size_t(d * d)), 0.0};
    for(const auto& [l, m] : rho) state.set_matrix(indices->offset_of(l), m);

    std::vector<cplx> out(state.data.size());
    rhs(state.data, out);
    const auto expected = oracle_rhs(rho, in.h, in.f, ops.alpha, ops.beta, depth);
    double worst = 0.0;
    for(const auto& [l, m] : expected)
    {
        const std::size_t o = indices->offset_of(l);
        Eigen::Map<const Matrix> got(out.data() + o * std::size_t(d * d), d, d);
        worst = std::max(worst, (got - m).cwiseAbs().maxCoeff() / std::max(1.0, m.cwiseAbs().maxCoeff()));
    }
    return worst;
}


// sigma_x(t_final) of the Lorentz dephasing hierarchy (depth 3) at steps dt, dt/2, dt/4;
// returns |x(dt) - x(dt/2)| / |x(dt/2) - x(dt/4)|, about 16 for a fourth-order method.
inline double richardson_ratio(double dt = 0.08, double t_final = 10.0)
{
    const auto model = dephasing_model(1.0);
    const auto bath = expand_lorentz_zero_T(SpectralDensity::lorentz(0.1, 0.5, 1.0));
    const auto ops = build_superoperators(model.hamiltonian, model.coupling, bath);
    auto indices = std::make_shared<const HierarchyIndexSet>(enumerate_indices(1, 3));
    const HeomRhs rhs(ops, indices, true);
    std::vector<double> x;
    for(double h : {dt, dt / 2, dt / 4})
    {
        const auto st = initial_hierarchy_state(indices, model.rho0);
        const auto cfg = IntegratorConfig::fitted(t_final, h);
        const auto tr = integrate(rhs, st.data, 2, cfg, {coherence_observable(model)}, rhs.stiffness_bound());
        x.push_back(tr.values("sigma_x").back());
    }
    return std::abs(x[0] - x[1]) / std::abs(x[1] - x[2]);
}

// sup |<sigma_x>(t) - cos(w0 t)| for H = w0 sigma_z / 2 without a bath, dt = 1e-3.
inline double closed_system_error(double omega0 = 1.0, double t_final = 20.0)
{
    const auto model = dephasing_model(omega0);
    const Matrix h = model.hamiltonian;
    Derivative rhs = [h](std::span<const cplx> in, std::span<cplx> out) {
        Eigen::Map<const Matrix> r(in.data(), 2, 2);
        Eigen::Map<Matrix>(out.data(), 2, 2) = -I * (h * r - r * h);
    };
    const auto cfg = IntegratorConfig::fitted(t_final, 1e-3, 50);
    std::vector<cplx> y(model.rho0.data(), model.rho0.data() + 4);
    const auto tr = integrate(rhs, y, 2, cfg, {coherence_observable(model)}, omega0);
    double worst = 0.0;
    for(std::size_t i = 0; i < tr.times.size(); ++i)
        worst = std::max(worst, std::abs(tr.values("sigma_x")[i] - std::cos(omega0 * tr.times[i])));
    return worst;
}

}  // namespace support

#endif
