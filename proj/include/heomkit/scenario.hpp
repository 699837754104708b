#ifndef HEOMKIT_SCENARIO_HPP
#define HEOMKIT_SCENARIO_HPP

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "heomkit/analysis.hpp"
#include "heomkit/solvers.hpp"

namespace heomkit
{

inline constexpr const char* version_string = "1.0.0";

enum class ScenarioKind
{
    dephasing_validate,
    two_qubit,
    spectrum,
    jeff,
    eta_sweep
};

const char* to_string(ScenarioKind k);
ScenarioKind parse_scenario_kind(const std::string& tag);

struct ScenarioConfig
{
    ScenarioKind kind = ScenarioKind::two_qubit;
    std::string preset;

    double omega0 = 1.0;
    double g0 = 0.1;

    bool lorentz = false;            // bath type: Lorentz (lambda list) or Ohmic-Drude (eta list)
    std::vector<double> couplings;   // lambda or eta values
    double cutoff = 5.0;             // Ohmic-Drude omega_c
    double gamma = 0.5;              // Lorentz width
    double center = 0.0;             // Lorentz resonance; 0 means omega0

    std::vector<double> temperatures;  // as given; inverse when temperatures_inverse
    bool temperatures_inverse = false;

    RunSettings run;
    double tol = 1e-4;
    int depth_start = 4;
    int depth_step = 2;
    int max_depth = 16;
    int max_matsubara = 2;
    double matsubara_rel_tol = 1e-5;

    bool born_markov = true;  // two-qubit: Born-Markov column
    bool oracle = true;       // dephasing: quadrature oracle column
    bool lamb_shift = false;  // two-qubit: extra Born-Markov column with Lamb shifts kept

    double spectrum_omega_min = 0.0;
    double spectrum_omega_max = 2.0;
    int spectrum_points = 2001;
    double peak_threshold = 0.05;
    double max_window = 6400.0;  // spectrum window doubles up to this while the signal has not decayed
    double window_rate = 0.0;
    bool spectrum_jeff = false;  // spectrum scenario also writes J_eff tables

    double jeff_omega_min = 0.5;
    double jeff_omega_max = 1.5;
    int jeff_points = 1001;

    std::string out_dir = ".";
    bool plot_script = false;
    int threads = 1;

    // Physical temperature of entry i.
    double temperature(std::size_t i) const;
    SpectralDensity spectral_density(double coupling) const;

    // Throws invalid_argument naming the offending field.
    void validate() const;
};

// Parses the JSON document; unknown keys and wrong types are reported with their field path.
ScenarioConfig parse_config(const nlohmann::ordered_json& doc);
ScenarioConfig load_config(const std::string& path);
// Effective configuration: everything that influences the numbers (thread count and
// output directory excluded, so outputs do not depend on where or how wide they ran).
nlohmann::ordered_json to_json(const ScenarioConfig& cfg);

std::vector<std::string> preset_names();
ScenarioConfig preset(const std::string& name);

struct ScenarioResult
{
    std::vector<std::string> files;
    nlohmann::ordered_json summary;
    bool converged = true;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg);

// Runs fn(0..n-1) on up to `threads` workers; the first failure (lowest index) is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

struct CompareReport
{
    double sup = 0.0;
    double rms = 0.0;
    std::size_t points = 0;
    double tolerance = 0.0;
    bool pass = false;
    std::string column_a, column_b;
};

// "path" or "path:column"; the default column is the second one. The first
// columns (time or frequency grid) must agree.
CompareReport compare_runs(const std::string& spec_a, const std::string& spec_b, double tolerance);

struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
    const std::vector<double>& column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<const std::vector<double>*>& columns);

// Late-window envelope max |x| over t in [lo, hi].
double envelope(const std::vector<double>& t, const std::vector<double>& x, double lo, double hi);
// Collapse and revival: the per-period envelope falls by more than `margin` and later rises again by more than it.
bool collapse_and_revival(const std::vector<double>& t, const std::vector<double>& x, double period,
                          double margin = 0.1);

}  // namespace heomkit

#endif
