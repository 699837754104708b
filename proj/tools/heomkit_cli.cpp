// Command-line scenario runner on top of the C API.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "heomkit/heomkit.h"

namespace
{

enum Exit
{
    exit_ok = 0,
    exit_failure = 1,
    exit_invalid = 2,
    exit_not_converged = 3,
    exit_compare_failed = 4
};

struct Options
{
    std::string config;
    std::string preset;
    std::string out;
    int max_n = -1;
    int max_matsubara = -1;
    double tol = -1.0;
    int threads = -1;
    bool plot = false;
};

int report(hk_status s)
{
    std::cerr << "error (" << hk_status_name(s) << "): " << hk_last_error() << "\n";
    return s == HK_ERR_INVALID_ARGUMENT ? exit_invalid : exit_failure;
}

std::string text(hk_status (*get)(const hk_scenario*, char*, size_t, size_t*), const hk_scenario* s)
{
    size_t need = 0;
    if(get(s, nullptr, 0, &need) != HK_OK) return {};
    std::string buf(need, '\0');
    get(s, buf.data(), buf.size(), &need);
    buf.resize(need - 1);
    return buf;
}

std::string fmt(const nlohmann::ordered_json& v)
{
    if(v.is_number_float())
    {
        char b[32];
        std::snprintf(b, sizeof b, "%.6g", v.get<double>());
        return b;
    }
    return v.dump();
}

void print_summary(const nlohmann::ordered_json& sum)
{
    static const char* keys[] = {"depth",          "matsubara_terms", "converged",         "sup_vs_oracle",
                                 "late_envelope",  "collapse_and_revival", "sup_vs_born_markov", "sup_vs_born_markov_lamb", "t_final",
                                 "truncated_window"};
    for(const auto& run : sum["runs"])
    {
        const auto& s = run["summary"];
        std::cout << run["name"].get<std::string>() << ":";
        for(const char* k : keys)
            if(s.contains(k)) std::cout << " " << k << "=" << fmt(s[k]);
        if(s.contains("classification"))
        {
            const auto& c = s["classification"];
            std::cout << " structure=" << c["structure"].get<std::string>() << " peaks=" << c["dominant_frequencies"].dump();
        }
        if(s.contains("zeta")) std::cout << " zeta=" << fmt(s["zeta"]) << " gamma0=" << fmt(s["gamma0"]);
        if(s.contains("jeff")) std::cout << " zeta=" << fmt(s["jeff"]["zeta"]) << " gamma0=" << fmt(s["jeff"]["gamma0"]);
        std::cout << "\n";
    }
    if(sum.contains("sweep"))
        for(const auto& t : sum["sweep"])
        {
            std::cout << "sweep T=" << fmt(t["temperature"]) << ": " << t["structures"].dump();
            if(t.contains("flip_between")) std::cout << " flip between " << t["flip_between"].dump();
            else std::cout << " no single double-to-single flip";
            std::cout << "\n";
        }
}

int run_scenario(const std::string& tag, const Options& o)
{
    if(o.config.empty() == o.preset.empty())
    {
        std::cerr << "error: give exactly one of --config or --preset\n";
        return exit_invalid;
    }
    hk_scenario* s = nullptr;
    hk_status st = o.config.empty() ? hk_scenario_from_preset(o.preset.c_str(), &s)
                                    : hk_scenario_from_file(o.config.c_str(), &s);
    if(st != HK_OK) return report(st);

    auto apply = [&]() -> hk_status {
        hk_status r = hk_scenario_set_kind(s, tag.c_str());
        if(r == HK_OK && !o.out.empty()) r = hk_scenario_set_output(s, o.out.c_str());
        if(r == HK_OK && o.max_n >= 0) r = hk_scenario_set_max_depth(s, o.max_n);
        if(r == HK_OK && o.max_matsubara >= 0) r = hk_scenario_set_max_matsubara(s, o.max_matsubara);
        if(r == HK_OK && o.tol >= 0.0) r = hk_scenario_set_tolerance(s, o.tol);
        if(r == HK_OK && o.threads >= 0) r = hk_scenario_set_threads(s, o.threads);
        if(r == HK_OK && o.plot) r = hk_scenario_set_plot_script(s, 1);
        return r;
    };
    if((st = apply()) != HK_OK)
    {
        hk_scenario_free(s);
        return report(st);
    }
    int converged = 0;
    st = hk_scenario_run(s, &converged);
    if(st != HK_OK)
    {
        hk_scenario_free(s);
        return report(st);
    }
    const auto summary = nlohmann::ordered_json::parse(text(hk_scenario_summary_json, s));
    hk_scenario_free(s);
    print_summary(summary);
    if(!converged)
    {
        std::cerr << "warning: at least one run reached its refinement budget; best-effort data written\n";
        return exit_not_converged;
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"HEOM open-system dynamics: scenario runner"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(hk_version()));

    Options o;
    std::string presets = hk_preset_names();
    const char* tags[] = {"dephasing-validate", "two-qubit", "spectrum", "jeff", "eta-sweep"};
    const char* help[] = {"single-qubit pure dephasing against the quadrature oracle",
                          "two-qubit coherence dynamics, optionally with Born-Markov",
                          "cosine spectra and peak structure of the coherence",
                          "effective spectral density and renormalization factor",
                          "spectrum classification across a coupling sweep"};
    std::vector<CLI::App*> subs;
    for(int i = 0; i < 5; ++i)
    {
        auto* sub = app.add_subcommand(tags[i], help[i]);
        sub->add_option("--config", o.config, "JSON scenario configuration");
        sub->add_option("--preset", o.preset, "bundled parameter set (" + presets + ")");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--max-n", o.max_n, "maximum hierarchy depth")->check(CLI::NonNegativeNumber);
        sub->add_option("--max-matsubara", o.max_matsubara, "maximum Matsubara term count")
            ->check(CLI::PositiveNumber);
        sub->add_option("--tol", o.tol, "sup-norm convergence tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--threads", o.threads, "concurrent runs")->check(CLI::PositiveNumber);
        sub->add_flag("--plot-script", o.plot, "also write a gnuplot script");
        subs.push_back(sub);
    }

    std::string a, b;
    double ctol = 1e-3;
    auto* cmp = app.add_subcommand("compare", "sup-norm and RMS difference of two tables (path[:column])");
    cmp->add_option("a", a, "first table")->required();
    cmp->add_option("b", b, "second table")->required();
    cmp->add_option("--tol", ctol, "pass threshold on the sup-norm")->check(CLI::NonNegativeNumber);

    auto* list = app.add_subcommand("presets", "list bundled presets");

    try
    {
        app.parse(argc, argv);
    }
    catch(const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_invalid;
    }

    for(int i = 0; i < 5; ++i)
        if(subs[i]->parsed()) return run_scenario(tags[i], o);

    if(cmp->parsed())
    {
        double sup = 0.0, rms = 0.0;
        int pass = 0;
        const hk_status st = hk_compare_files(a.c_str(), b.c_str(), ctol, &sup, &rms, &pass);
        if(st != HK_OK)
        {
            std::cerr << "error (" << hk_status_name(st) << "): " << hk_last_error() << "\n";
            return exit_invalid;
        }
        std::printf("sup=%.6e rms=%.6e tol=%.6e %s\n", sup, rms, ctol, pass ? "PASS" : "FAIL");
        return pass ? exit_ok : exit_compare_failed;
    }
    if(list->parsed())
    {
        std::cout << presets << "\n";
        return exit_ok;
    }
    return exit_invalid;
}
