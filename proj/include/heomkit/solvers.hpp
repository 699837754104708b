#ifndef HEOMKIT_SOLVERS_HPP
#define HEOMKIT_SOLVERS_HPP

#include "heomkit/bath.hpp"
#include "heomkit/born_markov.hpp"
#include "heomkit/heom.hpp"
#include "heomkit/integrator.hpp"
#include "heomkit/models.hpp"

namespace heomkit
{

struct RunSettings
{
    double t_final = 100.0;
    double record_interval = 0.05;  // samples land on t = j * record_interval for every dt
    double dt_max = 0.0;            // 0: integrator default for the model and bath
};

// RK4 step and stride such that dt divides record_interval and respects the defaults.
IntegratorConfig plan_steps(const RunSettings& s, double system_frequency, double bath_frequency,
                            double stiffness_bound);

// HEOM trajectory of the coherence observable ("sigma_x") at truncation depth
// `depth` with `terms` bath exponentials.
Trajectory run_heom(const ModelSpec& model, const SpectralDensity& j, double temperature, int depth, int terms,
                    const RunSettings& s);

// Same, with a prepared expansion.
Trajectory run_heom(const ModelSpec& model, const BathExpansion& bath, double bath_frequency, int depth,
                    const RunSettings& s);

Trajectory run_born_markov(const ModelSpec& model, const SpectralDensity& j, double temperature, const RunSettings& s,
                           bool lamb_shift = false);

ConvergeResult converge_heom(const ModelSpec& model, const SpectralDensity& j, double temperature,
                             const RunSettings& s, ConvergeOptions opts);

}  // namespace heomkit

#endif
