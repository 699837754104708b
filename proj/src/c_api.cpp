#include "heomkit/heomkit.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "heomkit/analysis.hpp"
#include "heomkit/scenario.hpp"
#include "heomkit/solvers.hpp"

using namespace heomkit;

struct hk_bath
{
    SpectralDensity j;
};

struct hk_model
{
    ModelSpec spec;
};

struct hk_trajectory
{
    Trajectory traj;
};

struct hk_scenario
{
    ScenarioConfig cfg;
    nlohmann::ordered_json summary;
};

namespace
{

thread_local std::string last_error;

hk_status set_error(hk_status s, const std::string& msg)
{
    last_error = msg;
    return s;
}

template <typename F>
hk_status guarded(F&& f)
{
    try
    {
        f();
        return HK_OK;
    }
    catch(const Error& e)
    {
        return set_error(static_cast<hk_status>(static_cast<int>(e.code())), e.what());
    }
    catch(const std::exception& e)
    {
        return set_error(HK_ERR_INTERNAL, e.what());
    }
    catch(...)
    {
        return set_error(HK_ERR_INTERNAL, "unknown failure");
    }
}

void need(const void* p, const char* what)
{
    if(!p) fail(ErrorCode::invalid_argument, std::string(what) + " must not be null");
}

void copy_text(const std::string& s, char* buffer, size_t capacity, size_t* required)
{
    if(required) *required = s.size() + 1;
    if(buffer && capacity > 0)
    {
        const size_t n = std::min(capacity - 1, s.size());
        std::memcpy(buffer, s.data(), n);
        buffer[n] = '\0';
    }
}

Matrix read_matrix(int dim, const double* p)
{
    Matrix m(dim, dim);
    for(int c = 0; c < dim; ++c)
        for(int r = 0; r < dim; ++r)
        {
            const size_t k = 2 * (size_t(c) * size_t(dim) + size_t(r));
            m(r, c) = cplx(p[k], p[k + 1]);
        }
    return m;
}

RunSettings settings(double t_final, double record_interval, double dt_max)
{
    RunSettings s;
    s.t_final = t_final;
    s.record_interval = record_interval;
    s.dt_max = dt_max > 0.0 ? dt_max : 0.0;
    return s;
}

}  // namespace

extern "C" {

const char* hk_version(void) { return version_string; }

const char* hk_last_error(void) { return last_error.c_str(); }

const char* hk_status_name(hk_status status)
{
    switch(status)
    {
        case HK_OK: return "ok";
        case HK_ERR_INVALID_ARGUMENT: return "invalid argument";
        case HK_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
        case HK_ERR_DEGENERATE_PARAMETER: return "degenerate parameter";
        case HK_ERR_NOT_CONVERGED: return "not converged";
        case HK_ERR_NUMERICAL_FAILURE: return "numerical failure";
        case HK_ERR_BUDGET_EXCEEDED: return "budget exceeded";
        case HK_ERR_IO: return "i/o failure";
        case HK_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

hk_status hk_bath_lorentz(double lambda, double gamma, double center, hk_bath** out)
{
    return guarded([&] {
        need(out, "out");
        *out = new hk_bath{SpectralDensity::lorentz(lambda, gamma, center)};
    });
}

hk_status hk_bath_ohmic_drude(double eta, double cutoff, hk_bath** out)
{
    return guarded([&] {
        need(out, "out");
        *out = new hk_bath{SpectralDensity::ohmic_drude(eta, cutoff)};
    });
}

void hk_bath_free(hk_bath* bath) { delete bath; }

hk_status hk_bath_spectral_density(const hk_bath* bath, double omega, double* value)
{
    return guarded([&] {
        need(bath, "bath");
        need(value, "value");
        *value = evaluate_spectral_density(bath->j, omega);
    });
}

hk_status hk_bath_correlation(const hk_bath* bath, double temperature, double t, double* re, double* im)
{
    return guarded([&] {
        need(bath, "bath");
        const cplx c = correlation_quadrature(bath->j, temperature, t);
        if(re) *re = c.real();
        if(im) *im = c.imag();
    });
}

hk_status hk_bath_expansion(const hk_bath* bath, double temperature, int terms, double* alpha_re, double* alpha_im,
                            double* beta_re, double* beta_im, size_t capacity, size_t* count)
{
    return guarded([&] {
        need(bath, "bath");
        const auto e = expansion_for(bath->j, temperature, terms);
        if(count) *count = e.size();
        for(size_t i = 0; i < e.size() && i < capacity; ++i)
        {
            if(alpha_re) alpha_re[i] = e.terms[i].amplitude.real();
            if(alpha_im) alpha_im[i] = e.terms[i].amplitude.imag();
            if(beta_re) beta_re[i] = e.terms[i].rate.real();
            if(beta_im) beta_im[i] = e.terms[i].rate.imag();
        }
    });
}

hk_status hk_model_dephasing(double omega0, hk_model** out)
{
    return guarded([&] {
        need(out, "out");
        *out = new hk_model{dephasing_model(omega0)};
    });
}

hk_status hk_model_two_qubit(double omega0, double g0, hk_model** out)
{
    return guarded([&] {
        need(out, "out");
        *out = new hk_model{two_qubit_model(omega0, g0)};
    });
}

hk_status hk_model_custom(int dim, const double* hamiltonian, const double* coupling, const double* rho0,
                          double system_frequency, hk_model** out)
{
    return guarded([&] {
        need(out, "out");
        need(hamiltonian, "hamiltonian");
        need(coupling, "coupling");
        need(rho0, "rho0");
        if(dim != 2 && dim != 4) fail(ErrorCode::dimension_mismatch, "custom models must have dimension 2 or 4");
        require(system_frequency > 0.0, "system frequency must be positive");
        ModelSpec m;
        m.name = "custom";
        m.hamiltonian = read_matrix(dim, hamiltonian);
        m.coupling = read_matrix(dim, coupling);
        m.rho0 = read_matrix(dim, rho0);
        m.system_frequency = system_frequency;
        m.validate();
        *out = new hk_model{std::move(m)};
    });
}

void hk_model_free(hk_model* model) { delete model; }

int hk_model_dimension(const hk_model* model) { return model ? model->spec.dimension() : 0; }

hk_status hk_solve_heom(const hk_model* model, const hk_bath* bath, double temperature, int depth, int terms,
                        double t_final, double record_interval, double dt_max, hk_trajectory** out)
{
    return guarded([&] {
        need(model, "model");
        need(bath, "bath");
        need(out, "out");
        require(depth >= 0, "depth must be >= 0");
        require(terms >= 1, "terms must be >= 1");
        auto t = run_heom(model->spec, bath->j, temperature, depth, terms, settings(t_final, record_interval, dt_max));
        *out = new hk_trajectory{std::move(t)};
    });
}

hk_status hk_solve_heom_converged(const hk_model* model, const hk_bath* bath, double temperature, double tol,
                                  int max_depth, int max_terms, double t_final, double record_interval,
                                  hk_trajectory** out, int* converged)
{
    return guarded([&] {
        need(model, "model");
        need(bath, "bath");
        need(out, "out");
        ConvergeOptions o;
        o.tol = tol;
        o.depth_max = max_depth;
        o.depth_start = std::min(o.depth_start, max_depth);
        o.terms_max = max_terms;
        auto r = converge_heom(model->spec, bath->j, temperature, settings(t_final, record_interval, 0.0), o);
        if(converged) *converged = r.converged ? 1 : 0;
        *out = new hk_trajectory{std::move(r.trajectory)};
    });
}

hk_status hk_solve_born_markov(const hk_model* model, const hk_bath* bath, double temperature, double t_final,
                               double record_interval, double dt_max, hk_trajectory** out)
{
    return guarded([&] {
        need(model, "model");
        need(bath, "bath");
        need(out, "out");
        auto t = run_born_markov(model->spec, bath->j, temperature, settings(t_final, record_interval, dt_max));
        *out = new hk_trajectory{std::move(t)};
    });
}

void hk_trajectory_free(hk_trajectory* traj) { delete traj; }

size_t hk_trajectory_length(const hk_trajectory* traj) { return traj ? traj->traj.times.size() : 0; }

hk_status hk_trajectory_times(const hk_trajectory* traj, double* out, size_t capacity)
{
    return guarded([&] {
        need(traj, "trajectory");
        need(out, "out");
        const auto& t = traj->traj.times;
        if(capacity < t.size()) fail(ErrorCode::dimension_mismatch, "output buffer is shorter than the trajectory");
        std::copy(t.begin(), t.end(), out);
    });
}

hk_status hk_trajectory_values(const hk_trajectory* traj, const char* observable, double* out, size_t capacity)
{
    return guarded([&] {
        need(traj, "trajectory");
        need(observable, "observable");
        need(out, "out");
        const auto& v = traj->traj.values(observable);
        if(capacity < v.size()) fail(ErrorCode::dimension_mismatch, "output buffer is shorter than the trajectory");
        std::copy(v.begin(), v.end(), out);
    });
}

hk_status hk_trajectory_diagnostics(const hk_trajectory* traj, double* max_trace_drift,
                                    double* max_hermiticity_residue, double* min_eigenvalue)
{
    return guarded([&] {
        need(traj, "trajectory");
        const auto& d = traj->traj.diagnostics;
        if(max_trace_drift) *max_trace_drift = d.max_trace_drift;
        if(max_hermiticity_residue) *max_hermiticity_residue = d.max_hermiticity_residue;
        if(min_eigenvalue) *min_eigenvalue = d.min_eigenvalue;
    });
}

hk_status hk_trajectory_metadata(const hk_trajectory* traj, char* buffer, size_t capacity, size_t* required)
{
    return guarded([&] {
        need(traj, "trajectory");
        copy_text(traj->traj.metadata.dump(), buffer, capacity, required);
    });
}

hk_status hk_cosine_spectrum(const double* times, const double* signal, size_t n, const double* omega, size_t m,
                             double* out)
{
    return guarded([&] {
        need(times, "times");
        need(signal, "signal");
        need(omega, "omega");
        need(out, "out");
        auto r = cosine_spectrum(std::vector<double>(times, times + n), std::vector<double>(signal, signal + n),
                                 std::vector<double>(omega, omega + m));
        std::copy(r.values.begin(), r.values.end(), out);
    });
}

hk_status hk_classify_peaks(const double* omega, const double* values, size_t m, double threshold,
                            double* locations, size_t capacity, size_t* count)
{
    return guarded([&] {
        need(omega, "omega");
        need(values, "values");
        SpectrumResult s;
        s.omega.assign(omega, omega + m);
        s.values.assign(values, values + m);
        const auto c = classify_peaks(s, threshold);
        if(count) *count = c.dominant.size();
        for(size_t i = 0; locations && i < c.dominant.size() && i < capacity; ++i) locations[i] = c.dominant[i];
    });
}

hk_status hk_solve_zeta(const hk_bath* bath, double temperature, double omega0, double* zeta)
{
    return guarded([&] {
        need(bath, "bath");
        need(zeta, "zeta");
        *zeta = solve_zeta(bath->j, temperature, omega0).zeta;
    });
}

hk_status hk_effective_spectral_density(const hk_bath* bath, double temperature, double omega0, double g0,
                                        double zeta, const double* omega, size_t m, double* jeff)
{
    return guarded([&] {
        need(bath, "bath");
        need(omega, "omega");
        need(jeff, "jeff");
        for(size_t i = 0; i < m; ++i) jeff[i] = effective_point(bath->j, temperature, omega0, g0, zeta, omega[i]).jeff;
    });
}

hk_status hk_scenario_from_preset(const char* name, hk_scenario** out)
{
    return guarded([&] {
        need(name, "name");
        need(out, "out");
        *out = new hk_scenario{preset(name), {}};
    });
}

hk_status hk_scenario_from_json(const char* json_text, hk_scenario** out)
{
    return guarded([&] {
        need(json_text, "json_text");
        need(out, "out");
        nlohmann::ordered_json doc;
        try
        {
            doc = nlohmann::ordered_json::parse(json_text);
        }
        catch(const nlohmann::ordered_json::parse_error& e)
        {
            fail(ErrorCode::invalid_argument, "config: malformed JSON (" + std::string(e.what()) + ")");
        }
        *out = new hk_scenario{parse_config(doc), {}};
    });
}

hk_status hk_scenario_from_file(const char* path, hk_scenario** out)
{
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new hk_scenario{load_config(path), {}};
    });
}

void hk_scenario_free(hk_scenario* scenario) { delete scenario; }

hk_status hk_scenario_set_kind(hk_scenario* scenario, const char* tag)
{
    return guarded([&] {
        need(scenario, "scenario");
        need(tag, "tag");
        scenario->cfg.kind = parse_scenario_kind(tag);
    });
}

hk_status hk_scenario_set_output(hk_scenario* scenario, const char* directory)
{
    return guarded([&] {
        need(scenario, "scenario");
        need(directory, "directory");
        if(!*directory) fail(ErrorCode::invalid_argument, "output.directory: must not be empty");
        scenario->cfg.out_dir = directory;
    });
}

hk_status hk_scenario_set_max_depth(hk_scenario* scenario, int max_depth)
{
    return guarded([&] {
        need(scenario, "scenario");
        if(max_depth < 0) fail(ErrorCode::invalid_argument, "convergence.max_depth: must be >= 0");
        scenario->cfg.max_depth = max_depth;
        scenario->cfg.depth_start = std::min(scenario->cfg.depth_start, max_depth);
    });
}

hk_status hk_scenario_set_max_matsubara(hk_scenario* scenario, int max_matsubara)
{
    return guarded([&] {
        need(scenario, "scenario");
        if(max_matsubara < 1) fail(ErrorCode::invalid_argument, "convergence.max_matsubara: must be >= 1");
        scenario->cfg.max_matsubara = max_matsubara;
    });
}

hk_status hk_scenario_set_tolerance(hk_scenario* scenario, double tol)
{
    return guarded([&] {
        need(scenario, "scenario");
        if(!(tol > 0.0)) fail(ErrorCode::invalid_argument, "convergence.tol: must be a positive number");
        scenario->cfg.tol = tol;
    });
}

hk_status hk_scenario_set_threads(hk_scenario* scenario, int threads)
{
    return guarded([&] {
        need(scenario, "scenario");
        if(threads < 1) fail(ErrorCode::invalid_argument, "threads: must be >= 1");
        scenario->cfg.threads = threads;
    });
}

hk_status hk_scenario_set_plot_script(hk_scenario* scenario, int enabled)
{
    return guarded([&] {
        need(scenario, "scenario");
        scenario->cfg.plot_script = enabled != 0;
    });
}

hk_status hk_scenario_config_json(const hk_scenario* scenario, char* buffer, size_t capacity, size_t* required)
{
    return guarded([&] {
        need(scenario, "scenario");
        copy_text(to_json(scenario->cfg).dump(2), buffer, capacity, required);
    });
}

hk_status hk_scenario_run(hk_scenario* scenario, int* converged)
{
    return guarded([&] {
        need(scenario, "scenario");
        auto r = run_scenario(scenario->cfg);
        scenario->summary = std::move(r.summary);
        if(converged) *converged = r.converged ? 1 : 0;
    });
}

hk_status hk_scenario_summary_json(const hk_scenario* scenario, char* buffer, size_t capacity, size_t* required)
{
    return guarded([&] {
        need(scenario, "scenario");
        copy_text(scenario->summary.dump(2), buffer, capacity, required);
    });
}

const char* hk_preset_names(void)
{
    static const std::string names = [] {
        std::string s;
        for(const auto& n : preset_names()) s += (s.empty() ? "" : ",") + n;
        return s;
    }();
    return names.c_str();
}

hk_status hk_compare_files(const char* a, const char* b, double tolerance, double* sup, double* rms, int* pass)
{
    return guarded([&] {
        need(a, "a");
        need(b, "b");
        const auto r = compare_runs(a, b, tolerance);
        if(sup) *sup = r.sup;
        if(rms) *rms = r.rms;
        if(pass) *pass = r.pass ? 1 : 0;
    });
}

}  // extern "C"
