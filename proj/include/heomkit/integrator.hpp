#ifndef HEOMKIT_INTEGRATOR_HPP
#define HEOMKIT_INTEGRATOR_HPP

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "heomkit/core.hpp"

namespace heomkit
{

// Autonomous linear ODE right-hand side: out = F(in).
using Derivative = std::function<void(std::span<const cplx>, std::span<cplx>)>;

struct IntegratorConfig
{
    enum class Method
    {
        rk4
    };

    double dt = 0.0;
    double t_final = 0.0;
    Method method = Method::rk4;
    int record_stride = 1;

    static constexpr double max_step_stiffness = 0.1;

    // Largest step <= dt_max dividing t_final exactly.
    static IntegratorConfig fitted(double t_final, double dt_max, int record_stride = 1);

    // Default step 2 pi / (200 max(w0, wc)), reduced to satisfy dt * stiffness <= 0.1.
    static IntegratorConfig defaults(double t_final, double system_frequency, double bath_frequency,
                                     double stiffness_bound, int record_stride = 1);

    std::size_t steps() const;
    void validate(double stiffness_bound) const;
};

struct Observable
{
    std::string name;
    std::function<double(const Matrix&)> evaluate;
};

struct Series
{
    std::string name;
    std::vector<double> values;
};

struct Diagnostics
{
    double max_trace_drift = 0.0;          // max |tr rho - 1|
    double max_hermiticity_residue = 0.0;  // max |rho - rho^dagger|
    double min_eigenvalue = std::numeric_limits<double>::infinity();
};

struct Trajectory
{
    std::vector<double> times;
    std::vector<Series> series;
    Diagnostics diagnostics;
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

    const std::vector<double>& values(const std::string& name) const;
    bool has(const std::string& name) const;
    void add(std::string name, std::vector<double> values);
};

// Fixed-step RK4 from t = 0 to cfg.t_final. Observables and diagnostics act on
// the first dimension x dimension block of the state (the physical matrix) at
// every record_stride-th step, t = 0 included. Non-finite state aborts with
// numerical_failure naming the time.
Trajectory integrate(const Derivative& rhs, std::vector<cplx> initial, int dimension, const IntegratorConfig& cfg,
                     const std::vector<Observable>& observables, double stiffness_bound);

// sup |a - b| over a shared grid.
double sup_distance(const Trajectory& a, const Trajectory& b, const std::string& observable);

struct ConvergeOptions
{
    int depth_start = 4;
    int depth_step = 2;
    int depth_max = 16;
    int terms_start = 1;
    int terms_max = 1;  // terms refinement is off when equal to terms_start
    double tol = 1e-4;
    std::string observable = "sigma_x";
};

struct ConvergeResult
{
    Trajectory trajectory;
    int depth = 0;
    int terms = 0;
    bool converged = false;
    double depth_distance = std::numeric_limits<double>::infinity();
    double terms_distance = std::numeric_limits<double>::infinity();
    nlohmann::ordered_json history = nlohmann::ordered_json::array();
};

using Runner = std::function<Trajectory(int depth, int terms)>;

// Refines depth (by depth_step) and term count (doubling) until the chosen
// trajectory is within tol of both refinements. On budget exhaustion returns
// the finest trajectory computed, flagged non-converged.
ConvergeResult converge(const Runner& run, const ConvergeOptions& opts);

}  // namespace heomkit

#endif
