#include "heomkit/solvers.hpp"

#include <cmath>

namespace heomkit
{

IntegratorConfig plan_steps(const RunSettings& s, double system_frequency, double bath_frequency,
                            double stiffness_bound)
{
    require(s.t_final > 0.0 && s.record_interval > 0.0, "run needs t_final > 0 and record_interval > 0");
    const double records = std::round(s.t_final / s.record_interval);
    require(records >= 1.0 && std::abs(records * s.record_interval - s.t_final) <= 1e-9 * s.t_final,
            "t_final must be a multiple of record_interval");
    double dt = s.dt_max;
    if(dt <= 0.0) dt = IntegratorConfig::defaults(s.t_final, system_frequency, bath_frequency, stiffness_bound).dt;
    else if(stiffness_bound > 0.0) dt = std::min(dt, IntegratorConfig::max_step_stiffness / stiffness_bound);
    const int stride = int(std::ceil(s.record_interval / dt - 1e-9));
    IntegratorConfig cfg;
    cfg.dt = s.record_interval / double(stride);
    cfg.t_final = records * s.record_interval;
    cfg.record_stride = stride;
    return cfg;
}

Trajectory run_heom(const ModelSpec& model, const BathExpansion& bath, double bath_frequency, int depth,
                    const RunSettings& s)
{
    model.validate();
    auto ops = build_superoperators(model.hamiltonian, model.coupling, bath);
    auto indices = std::make_shared<const HierarchyIndexSet>(int(ops.slots()), depth);
    HeomRhs rhs(ops, indices, true);
    auto state = initial_hierarchy_state(indices, model.rho0);
    const auto cfg = plan_steps(s, model.system_frequency, bath_frequency, rhs.stiffness_bound());

    auto traj = integrate([&rhs](std::span<const cplx> in, std::span<cplx> out) { rhs(in, out); },
                          std::move(state.data), model.dimension(), cfg, {coherence_observable(model)},
                          rhs.stiffness_bound());
    traj.metadata["solver"] = "heom";
    traj.metadata["model"] = model.name;
    traj.metadata["depth"] = depth;
    traj.metadata["bath_terms"] = bath.size();
    traj.metadata["bath_provenance"] = bath.provenance();
    traj.metadata["hierarchy_size"] = indices->size();
    traj.metadata["stiffness_bound"] = rhs.stiffness_bound();
    return traj;
}

Trajectory run_heom(const ModelSpec& model, const SpectralDensity& j, double temperature, int depth, int terms,
                    const RunSettings& s)
{
    auto traj = run_heom(model, expansion_for(j, temperature, terms), j.frequency_scale(), depth, s);
    traj.metadata["bath"] = j.describe();
    traj.metadata["temperature"] = temperature;
    return traj;
}

Trajectory run_born_markov(const ModelSpec& model, const SpectralDensity& j, double temperature, const RunSettings& s,
                           bool lamb_shift)
{
    model.validate();
    const auto rates = build_upsilon_xi(decompose(model.hamiltonian, model.coupling), j, temperature, lamb_shift);
    auto rhs = born_markov_derivative(model.hamiltonian, model.coupling, rates);
    Eigen::SelfAdjointEigenSolver<Matrix> es(model.hamiltonian, Eigen::EigenvaluesOnly);
    const double stiffness = es.eigenvalues().cwiseAbs().maxCoeff();
    const auto cfg = plan_steps(s, model.system_frequency, j.frequency_scale(), stiffness);
    std::vector<cplx> y(model.rho0.data(), model.rho0.data() + model.rho0.size());
    auto traj = integrate(rhs, std::move(y), model.dimension(), cfg, {coherence_observable(model)}, stiffness);
    traj.metadata["solver"] = "born_markov";
    traj.metadata["model"] = model.name;
    traj.metadata["bath"] = j.describe();
    traj.metadata["temperature"] = temperature;
    traj.metadata["lamb_shift"] = lamb_shift;
    return traj;
}

ConvergeResult converge_heom(const ModelSpec& model, const SpectralDensity& j, double temperature,
                             const RunSettings& s, ConvergeOptions opts)
{
    if(j.is_lorentz()) opts.terms_max = opts.terms_start = 1;
    return converge([&](int depth, int terms) { return run_heom(model, j, temperature, depth, terms, s); }, opts);
}

}  // namespace heomkit
