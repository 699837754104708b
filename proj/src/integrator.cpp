#include "heomkit/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace heomkit
{

IntegratorConfig IntegratorConfig::fitted(double t_final, double dt_max, int record_stride)
{
    require(t_final > 0.0 && dt_max > 0.0, "integrator needs t_final > 0 and dt > 0");
    IntegratorConfig cfg;
    const double n = std::ceil(t_final / dt_max - 1e-9);
    cfg.dt = t_final / n;
    cfg.t_final = t_final;
    cfg.record_stride = record_stride;
    return cfg;
}

IntegratorConfig IntegratorConfig::defaults(double t_final, double system_frequency, double bath_frequency,
                                            double stiffness_bound, int record_stride)
{
    double dt = 2.0 * pi / (200.0 * std::max(system_frequency, bath_frequency));
    if(stiffness_bound > 0.0) dt = std::min(dt, max_step_stiffness / stiffness_bound);
    return fitted(t_final, dt, record_stride);
}

std::size_t IntegratorConfig::steps() const { return std::size_t(std::llround(t_final / dt)); }

void IntegratorConfig::validate(double stiffness_bound) const
{
    require(dt > 0.0, "integrator dt must be > 0");
    require(t_final > 0.0, "integrator t_final must be > 0");
    require(record_stride >= 1, "record_stride must be >= 1");
    const double n = t_final / dt;
    require(std::abs(n - std::round(n)) <= 1e-6 * std::max(1.0, n), "t_final must be an integer multiple of dt");
    if(dt * stiffness_bound > max_step_stiffness * (1.0 + 1e-9))
    {
        std::ostringstream os;
        os << "dt = " << dt << " violates dt * stiffness <= " << max_step_stiffness << " (stiffness " << stiffness_bound
           << ")";
        fail(ErrorCode::invalid_argument, os.str());
    }
}

const std::vector<double>& Trajectory::values(const std::string& name) const
{
    for(const auto& s : series)
        if(s.name == name) return s.values;
    fail(ErrorCode::invalid_argument, "trajectory has no series named '" + name + "'");
}

bool Trajectory::has(const std::string& name) const
{
    return std::any_of(series.begin(), series.end(), [&](const Series& s) { return s.name == name; });
}

void Trajectory::add(std::string name, std::vector<double> values)
{
    if(values.size() != times.size())
        fail(ErrorCode::dimension_mismatch, "series '" + name + "' does not match the time grid");
    series.push_back({std::move(name), std::move(values)});
}

namespace
{

void record(const std::vector<cplx>& state, int dim, double t, const std::vector<Observable>& observables,
            Trajectory& traj, const std::size_t step)
{
    for(const auto& z : state)
        if(!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        {
            std::ostringstream os;
            os << "integration aborted: non-finite state at t = " << t << " (step " << step << ")";
            fail(ErrorCode::numerical_failure, os.str());
        }
    Eigen::Map<const Matrix> rho(state.data(), dim, dim);
    traj.times.push_back(t);
    for(std::size_t i = 0; i < observables.size(); ++i) traj.series[i].values.push_back(observables[i].evaluate(rho));

    auto& d = traj.diagnostics;
    d.max_trace_drift = std::max(d.max_trace_drift, std::abs(rho.trace() - cplx(1.0, 0.0)));
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    d.max_hermiticity_residue = std::max(d.max_hermiticity_residue, herm);
    Matrix sym = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = std::min(d.min_eigenvalue, es.eigenvalues().minCoeff());
}

}  // namespace

Trajectory integrate(const Derivative& rhs, std::vector<cplx> initial, int dimension, const IntegratorConfig& cfg,
                     const std::vector<Observable>& observables, double stiffness_bound)
{
    cfg.validate(stiffness_bound);
    const std::size_t block = std::size_t(dimension) * std::size_t(dimension);
    require(dimension >= 1 && initial.size() >= block && initial.size() % block == 0,
            "state does not start with a dimension x dimension physical block");

    const std::size_t n = initial.size();
    const std::size_t steps = cfg.steps();
    std::vector<cplx> y = std::move(initial);
    std::vector<cplx> k1(n), k2(n), k3(n), k4(n), tmp(n);

    Trajectory traj;
    for(const auto& o : observables) traj.series.push_back({o.name, {}});
    traj.times.reserve(steps / cfg.record_stride + 1);
    record(y, dimension, 0.0, observables, traj, 0);

    const double h = cfg.dt;
    for(std::size_t s = 1; s <= steps; ++s)
    {
        rhs(y, k1);
        for(std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + (0.5 * h) * k1[i];
        rhs(tmp, k2);
        for(std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + (0.5 * h) * k2[i];
        rhs(tmp, k3);
        for(std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
        rhs(tmp, k4);
        for(std::size_t i = 0; i < n; ++i) y[i] += (h / 6.0) * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        if(s % std::size_t(cfg.record_stride) == 0) record(y, dimension, double(s) * h, observables, traj, s);
    }

    traj.metadata["integrator"] = {{"method", "rk4"},
                                   {"dt", cfg.dt},
                                   {"t_final", cfg.t_final},
                                   {"steps", steps},
                                   {"record_stride", cfg.record_stride}};
    return traj;
}

double sup_distance(const Trajectory& a, const Trajectory& b, const std::string& observable)
{
    if(a.times.size() != b.times.size()) fail(ErrorCode::dimension_mismatch, "trajectories have different grids");
    for(std::size_t i = 0; i < a.times.size(); ++i)
        if(std::abs(a.times[i] - b.times[i]) > 1e-9 * std::max(1.0, std::abs(a.times[i])))
            fail(ErrorCode::dimension_mismatch, "trajectories have different grids");
    const auto& va = a.values(observable);
    const auto& vb = b.values(observable);
    double d = 0.0;
    for(std::size_t i = 0; i < va.size(); ++i) d = std::max(d, std::abs(va[i] - vb[i]));
    return d;
}

ConvergeResult converge(const Runner& run, const ConvergeOptions& opts)
{
    require(opts.tol > 0.0, "convergence tolerance must be > 0");
    require(opts.depth_start >= 0 && opts.depth_step >= 1 && opts.depth_max >= opts.depth_start,
            "invalid depth controls");
    require(opts.terms_start >= 1 && opts.terms_max >= opts.terms_start, "invalid term-count controls");

    std::map<std::pair<int, int>, Trajectory> cache;
    ConvergeResult result;
    auto get = [&](int n, int k) -> const Trajectory& {
        auto key = std::make_pair(n, k);
        auto it = cache.find(key);
        if(it == cache.end()) it = cache.emplace(key, run(n, k)).first;
        return it->second;
    };
    const bool refine_terms = opts.terms_max > opts.terms_start;
    const double inf = std::numeric_limits<double>::infinity();

    int n = opts.depth_start;
    int k = opts.terms_start;
    while(true)
    {
        const Trajectory& base = get(n, k);
        double dn = inf;
        if(n + opts.depth_step <= opts.depth_max) dn = sup_distance(base, get(n + opts.depth_step, k), opts.observable);
        double dk = refine_terms ? inf : 0.0;
        if(dn < opts.tol && refine_terms && 2 * k <= opts.terms_max)
            dk = sup_distance(base, get(n, 2 * k), opts.observable);

        result.history.push_back({{"depth", n},
                                  {"terms", k},
                                  {"depth_distance", std::isfinite(dn) ? nlohmann::ordered_json(dn) : nullptr},
                                  {"terms_distance",
                                   refine_terms && std::isfinite(dk) ? nlohmann::ordered_json(dk) : nullptr}});
        result.depth_distance = dn;
        result.terms_distance = dk;

        if(dn < opts.tol && dk < opts.tol)
        {
            result.converged = true;
            result.depth = n;
            result.terms = k;
            result.trajectory = base;
            break;
        }
        if(dn >= opts.tol && n + 2 * opts.depth_step <= opts.depth_max)
        {
            n += opts.depth_step;
            continue;
        }
        if(dn < opts.tol && dk >= opts.tol && 4 * k <= opts.terms_max)
        {
            k *= 2;
            continue;
        }
        // budget exhausted: best effort is the finest run on hand
        int bn = n, bk = k;
        for(const auto& [key, traj] : cache)
            if(key.first >= bn && key.second >= bk)
            {
                bn = key.first;
                bk = key.second;
            }
        result.converged = false;
        result.depth = bn;
        result.terms = bk;
        result.trajectory = cache.at({bn, bk});
        break;
    }
    result.trajectory.metadata["convergence"] = {{"depth", result.depth},
                                                 {"matsubara_terms", result.terms},
                                                 {"tolerance", opts.tol},
                                                 {"terms_refined", refine_terms},
                                                 {"converged", result.converged},
                                                 {"history", result.history}};
    return result;
}

}  // namespace heomkit
