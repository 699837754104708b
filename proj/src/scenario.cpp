#include "heomkit/scenario.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace heomkit
{

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const char* to_string(ScenarioKind k)
{
    switch(k)
    {
        case ScenarioKind::dephasing_validate: return "dephasing-validate";
        case ScenarioKind::two_qubit: return "two-qubit";
        case ScenarioKind::spectrum: return "spectrum";
        case ScenarioKind::jeff: return "jeff";
        case ScenarioKind::eta_sweep: return "eta-sweep";
    }
    return "unknown";
}

ScenarioKind parse_scenario_kind(const std::string& tag)
{
    for(auto k : {ScenarioKind::dephasing_validate, ScenarioKind::two_qubit, ScenarioKind::spectrum,
                  ScenarioKind::jeff, ScenarioKind::eta_sweep})
        if(tag == to_string(k)) return k;
    fail(ErrorCode::invalid_argument,
         "scenario: unknown tag '" + tag + "' (expected dephasing-validate, two-qubit, spectrum, jeff or eta-sweep)");
}

double ScenarioConfig::temperature(std::size_t i) const
{
    const double v = temperatures.at(i);
    return temperatures_inverse ? 1.0 / v : v;
}

SpectralDensity ScenarioConfig::spectral_density(double coupling) const
{
    if(lorentz) return SpectralDensity::lorentz(coupling, gamma, center > 0.0 ? center : omega0);
    return SpectralDensity::ohmic_drude(coupling, cutoff);
}

namespace
{

[[noreturn]] void field_error(const std::string& field, const std::string& msg)
{
    fail(ErrorCode::invalid_argument, field + ": " + msg);
}

void positive(double v, const std::string& field)
{
    if(!(v > 0.0) || !std::isfinite(v)) field_error(field, "must be a positive number");
}

}  // namespace

void ScenarioConfig::validate() const
{
    positive(omega0, "model.omega0");
    const bool two_level = kind == ScenarioKind::dephasing_validate;
    if(!two_level) positive(g0, "model.g0");
    const std::string cname = lorentz ? "bath.lambda" : "bath.eta";
    if(couplings.empty()) field_error(cname, "must be a nonempty list");
    for(double c : couplings) positive(c, cname);
    if(lorentz)
    {
        positive(gamma, "bath.gamma");
        if(center < 0.0 || !std::isfinite(center)) field_error("bath.center", "must be >= 0 (0 selects omega0)");
    }
    else positive(cutoff, "bath.cutoff");

    const std::string tname = temperatures_inverse ? "inverse_temperatures" : "temperatures";
    if(temperatures.empty()) field_error(tname, "must be a nonempty list");
    for(double t : temperatures)
    {
        if(temperatures_inverse) positive(t, tname);
        else if(!(t >= 0.0) || !std::isfinite(t)) field_error(tname, "entries must be >= 0");
        const double phys = temperatures_inverse ? 1.0 / t : t;
        if(lorentz && phys != 0.0) field_error(tname, "the Lorentz bath is only supported at T = 0");
        if(!lorentz && phys == 0.0) field_error(tname, "the Ohmic-Drude bath needs T > 0 (Matsubara expansion)");
    }
    if(kind == ScenarioKind::jeff && lorentz) field_error("bath.type", "jeff needs an Ohmic-Drude bath");
    if(lamb_shift && lorentz) field_error("compare.lamb_shift", "needs an Ohmic-Drude bath");

    positive(run.t_final, "integrator.t_final");
    positive(run.record_interval, "integrator.record_interval");
    if(run.dt_max < 0.0) field_error("integrator.dt_max", "must be >= 0 (0 selects the default step)");
    const double records = std::round(run.t_final / run.record_interval);
    if(records < 1.0 || std::abs(records * run.record_interval - run.t_final) > 1e-9 * run.t_final)
        field_error("integrator.t_final", "must be a multiple of integrator.record_interval");

    positive(tol, "convergence.tol");
    if(depth_start < 0) field_error("convergence.depth_start", "must be >= 0");
    if(depth_step < 1) field_error("convergence.depth_step", "must be >= 1");
    if(max_depth < depth_start) field_error("convergence.max_depth", "must be >= convergence.depth_start");
    if(max_matsubara < 1) field_error("convergence.max_matsubara", "must be >= 1");
    positive(matsubara_rel_tol, "convergence.matsubara_rel_tol");

    if(!(spectrum_omega_min >= 0.0)) field_error("spectrum.omega_min", "must be >= 0");
    if(!(spectrum_omega_max > spectrum_omega_min)) field_error("spectrum.omega_max", "must exceed spectrum.omega_min");
    if(spectrum_points < 3) field_error("spectrum.points", "must be >= 3");
    if(!(peak_threshold > 0.0 && peak_threshold < 1.0)) field_error("spectrum.peak_threshold", "must lie in (0, 1)");
    if(!(max_window >= run.t_final)) field_error("spectrum.max_window", "must be >= integrator.t_final");
    if(!(window_rate >= 0.0)) field_error("spectrum.window_rate", "must be >= 0");
    positive(jeff_omega_min, "jeff.omega_min");
    if(!(jeff_omega_max > jeff_omega_min)) field_error("jeff.omega_max", "must exceed jeff.omega_min");
    if(jeff_points < 2) field_error("jeff.points", "must be >= 2");
    if(out_dir.empty()) field_error("output.directory", "must not be empty");
    if(threads < 1) field_error("threads", "must be >= 1");
}

namespace
{

// Walks one JSON object, remembers the keys it consumed and rejects the rest.
class Reader
{
  public:
    Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path))
    {
        if(!obj_.is_object()) field_error(path_.empty() ? "config" : path_, "must be an object");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return obj_.contains(key); }

    const json* get(const std::string& key)
    {
        used_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out)
    {
        if(auto v = get(key))
        {
            if(!v->is_number()) field_error(field(key), "must be a number");
            out = v->get<double>();
        }
    }
    void integer(const std::string& key, int& out)
    {
        if(auto v = get(key))
        {
            if(!v->is_number_integer()) field_error(field(key), "must be an integer");
            out = v->get<int>();
        }
    }
    void boolean(const std::string& key, bool& out)
    {
        if(auto v = get(key))
        {
            if(!v->is_boolean()) field_error(field(key), "must be true or false");
            out = v->get<bool>();
        }
    }
    void string(const std::string& key, std::string& out)
    {
        if(auto v = get(key))
        {
            if(!v->is_string()) field_error(field(key), "must be a string");
            out = v->get<std::string>();
        }
    }
    bool list(const std::string& key, std::vector<double>& out)
    {
        auto v = get(key);
        if(!v) return false;
        if(v->is_number())
        {
            out = {v->get<double>()};
            return true;
        }
        if(!v->is_array()) field_error(field(key), "must be a number or a list of numbers");
        out.clear();
        for(const auto& e : *v)
        {
            if(!e.is_number()) field_error(field(key), "must contain numbers only");
            out.push_back(e.get<double>());
        }
        return true;
    }
    Reader child(const std::string& key)
    {
        static const json empty = json::object();
        auto v = get(key);
        return Reader(v ? *v : empty, field(key));
    }
    void finish() const
    {
        for(auto it = obj_.begin(); it != obj_.end(); ++it)
            if(!used_.count(it.key())) field_error(field(it.key()), "unknown field");
    }

  private:
    const json& obj_;
    std::string path_;
    std::set<std::string> used_;
};

}  // namespace

ScenarioConfig parse_config(const json& doc)
{
    ScenarioConfig c;
    Reader r(doc, "");
    std::string base;
    r.string("preset", base);
    if(!base.empty()) c = preset(base);
    std::string tag;
    r.string("scenario", tag);
    if(!tag.empty()) c.kind = parse_scenario_kind(tag);
    else if(base.empty()) field_error("scenario", "is required unless a preset is given");

    {
        auto m = r.child("model");
        m.number("omega0", c.omega0);
        m.number("g0", c.g0);
        m.finish();
    }
    {
        auto b = r.child("bath");
        std::string type;
        b.string("type", type);
        if(!type.empty())
        {
            if(type == "lorentz") c.lorentz = true;
            else if(type == "ohmic-drude") c.lorentz = false;
            else field_error("bath.type", "must be 'lorentz' or 'ohmic-drude'");
        }
        std::vector<double> values;
        if(b.has("lambda") && b.has("eta")) field_error("bath", "give either lambda or eta, not both");
        if(b.list(c.lorentz ? "lambda" : "eta", values)) c.couplings = values;
        if(b.has(c.lorentz ? "eta" : "lambda"))
            field_error(b.field(c.lorentz ? "eta" : "lambda"), "does not match bath.type");
        b.number("cutoff", c.cutoff);
        b.number("gamma", c.gamma);
        b.number("center", c.center);
        b.finish();
    }
    if(r.has("temperatures") && r.has("inverse_temperatures"))
        field_error("temperatures", "give either temperatures or inverse_temperatures, not both");
    std::vector<double> temps;
    if(r.list("temperatures", temps))
    {
        c.temperatures = temps;
        c.temperatures_inverse = false;
    }
    if(r.list("inverse_temperatures", temps))
    {
        c.temperatures = temps;
        c.temperatures_inverse = true;
    }
    {
        auto g = r.child("integrator");
        g.number("t_final", c.run.t_final);
        g.number("record_interval", c.run.record_interval);
        g.number("dt_max", c.run.dt_max);
        g.finish();
    }
    {
        auto v = r.child("convergence");
        v.number("tol", c.tol);
        v.integer("depth_start", c.depth_start);
        v.integer("depth_step", c.depth_step);
        v.integer("max_depth", c.max_depth);
        v.integer("max_matsubara", c.max_matsubara);
        v.number("matsubara_rel_tol", c.matsubara_rel_tol);
        v.finish();
    }
    {
        auto v = r.child("compare");
        v.boolean("born_markov", c.born_markov);
        v.boolean("oracle", c.oracle);
        v.boolean("lamb_shift", c.lamb_shift);
        v.finish();
    }
    {
        auto s = r.child("spectrum");
        s.number("omega_min", c.spectrum_omega_min);
        s.number("omega_max", c.spectrum_omega_max);
        s.integer("points", c.spectrum_points);
        s.number("peak_threshold", c.peak_threshold);
        s.number("max_window", c.max_window);
        s.number("window_rate", c.window_rate);
        s.boolean("jeff", c.spectrum_jeff);
        s.finish();
    }
    {
        auto s = r.child("jeff");
        s.number("omega_min", c.jeff_omega_min);
        s.number("omega_max", c.jeff_omega_max);
        s.integer("points", c.jeff_points);
        s.finish();
    }
    {
        auto o = r.child("output");
        o.string("directory", c.out_dir);
        o.boolean("plot_script", c.plot_script);
        o.finish();
    }
    r.integer("threads", c.threads);
    r.finish();
    c.validate();
    return c;
}

ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if(!in) fail(ErrorCode::io_failure, "cannot open config file '" + path + "'");
    json doc;
    try
    {
        doc = json::parse(in);
    }
    catch(const json::parse_error& e)
    {
        fail(ErrorCode::invalid_argument, "config: malformed JSON (" + std::string(e.what()) + ")");
    }
    return parse_config(doc);
}

json to_json(const ScenarioConfig& c)
{
    json j;
    j["scenario"] = to_string(c.kind);
    if(!c.preset.empty()) j["preset"] = c.preset;
    j["model"] = {{"omega0", c.omega0}, {"g0", c.g0}};
    if(c.lorentz) j["bath"] = {{"type", "lorentz"}, {"lambda", c.couplings}, {"gamma", c.gamma}, {"center", c.center}};
    else j["bath"] = {{"type", "ohmic-drude"}, {"eta", c.couplings}, {"cutoff", c.cutoff}};
    j[c.temperatures_inverse ? "inverse_temperatures" : "temperatures"] = c.temperatures;
    j["integrator"] = {{"t_final", c.run.t_final}, {"record_interval", c.run.record_interval}, {"dt_max", c.run.dt_max}};
    j["convergence"] = {{"tol", c.tol},
                        {"depth_start", c.depth_start},
                        {"depth_step", c.depth_step},
                        {"max_depth", c.max_depth},
                        {"max_matsubara", c.max_matsubara},
                        {"matsubara_rel_tol", c.matsubara_rel_tol}};
    j["compare"] = {{"born_markov", c.born_markov}, {"oracle", c.oracle}, {"lamb_shift", c.lamb_shift}};
    j["spectrum"] = {{"omega_min", c.spectrum_omega_min}, {"omega_max", c.spectrum_omega_max},
                     {"points", c.spectrum_points},       {"peak_threshold", c.peak_threshold},
                     {"max_window", c.max_window},         {"window_rate", c.window_rate},
                     {"jeff", c.spectrum_jeff}};
    j["jeff"] = {{"omega_min", c.jeff_omega_min}, {"omega_max", c.jeff_omega_max}, {"points", c.jeff_points}};
    j["output"] = {{"plot_script", c.plot_script}};
    return j;
}

std::vector<std::string> preset_names()
{
    return {"fig1a", "fig1b", "fig2a", "fig2b", "fig2c", "fig2d", "fig2e", "fig2f", "fig3", "fig4"};
}

ScenarioConfig preset(const std::string& name)
{
    ScenarioConfig c;
    c.preset = name;
    if(name == "fig1a")
    {
        c.kind = ScenarioKind::dephasing_validate;
        c.lorentz = true;
        c.couplings = {0.01, 0.05, 0.1};
        c.gamma = 0.5;
        c.temperatures = {0.0};
        c.run.t_final = 20.0;
        return c;
    }
    if(name == "fig1b")
    {
        c.kind = ScenarioKind::dephasing_validate;
        c.couplings = {5e-4};
        c.cutoff = 3.0;
        c.temperatures = {0.01, 0.03, 0.05};
        c.temperatures_inverse = true;
        c.run.t_final = 20.0;
        return c;
    }
    if(name.size() == 5 && name.rfind("fig2", 0) == 0 && name[4] >= 'a' && name[4] <= 'f')
    {
        // panels a, c, e: strong coupling; b, d, f: weak; rows T^-1 = 0.05, 0.10, 0.20
        const int panel = name[4] - 'a';
        c.kind = ScenarioKind::two_qubit;
        c.couplings = {panel % 2 == 0 ? 0.05 : 0.001};
        c.temperatures = {std::array<double, 3>{0.05, 0.10, 0.20}[panel / 2]};
        c.temperatures_inverse = true;
        c.run.t_final = 100.0;
        return c;
    }
    if(name == "fig3")
    {
        c.kind = ScenarioKind::spectrum;
        c.couplings = {0.05, 0.001};
        c.temperatures = {0.05, 0.10, 0.20};
        c.temperatures_inverse = true;
        c.run.t_final = 400.0;
        c.spectrum_jeff = true;
        return c;
    }
    if(name == "fig4")
    {
        c.kind = ScenarioKind::eta_sweep;
        c.couplings = {0.001, 0.002, 0.003, 0.004, 0.005, 0.006, 0.007, 0.008, 0.009, 0.010};
        c.temperatures = {0.03};
        c.temperatures_inverse = true;
        c.run.t_final = 400.0;
        return c;
    }
    fail(ErrorCode::invalid_argument, "preset: unknown name '" + name + "'");
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn)
{
    std::vector<std::exception_ptr> errors(n);
    const std::size_t workers = std::min<std::size_t>(std::max(1, threads), n);
    if(workers <= 1)
    {
        for(std::size_t i = 0; i < n; ++i)
        {
            try
            {
                fn(i);
            }
            catch(...)
            {
                errors[i] = std::current_exception();
            }
        }
    }
    else
    {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for(std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for(std::size_t i = next++; i < n; i = next++)
                {
                    try
                    {
                        fn(i);
                    }
                    catch(...)
                    {
                        errors[i] = std::current_exception();
                    }
                }
            });
        for(auto& t : pool) t.join();
    }
    for(auto& e : errors)
        if(e) std::rethrow_exception(e);
}

const std::vector<double>& CsvTable::column(const std::string& name) const
{
    for(std::size_t i = 0; i < header.size(); ++i)
        if(header[i] == name) return columns[i];
    fail(ErrorCode::invalid_argument, "no column named '" + name + "'");
}

CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path);
    if(!in) fail(ErrorCode::io_failure, "cannot open '" + path + "'");
    CsvTable t;
    std::string line;
    if(!std::getline(in, line)) fail(ErrorCode::invalid_argument, "'" + path + "' is empty");
    {
        std::stringstream ss(line);
        std::string cell;
        while(std::getline(ss, cell, ',')) t.header.push_back(cell);
    }
    t.columns.resize(t.header.size());
    std::size_t row = 1;
    while(std::getline(in, line))
    {
        ++row;
        if(line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while(std::getline(ss, cell, ','))
        {
            if(col >= t.columns.size())
                fail(ErrorCode::invalid_argument, path + ": row " + std::to_string(row) + " has too many cells");
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if(end == cell.c_str())
                fail(ErrorCode::invalid_argument, path + ": row " + std::to_string(row) + " has a non-numeric cell");
            t.columns[col++].push_back(v);
        }
        if(col != t.columns.size())
            fail(ErrorCode::invalid_argument, path + ": row " + std::to_string(row) + " has too few cells");
    }
    return t;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<const std::vector<double>*>& columns)
{
    if(header.size() != columns.size()) fail(ErrorCode::dimension_mismatch, "csv header and columns differ");
    const std::size_t rows = columns.empty() ? 0 : columns[0]->size();
    for(auto* c : columns)
        if(c->size() != rows) fail(ErrorCode::dimension_mismatch, "csv columns differ in length");
    std::string text;
    for(std::size_t i = 0; i < header.size(); ++i) text += (i ? "," : "") + header[i];
    text += '\n';
    char buf[40];
    for(std::size_t r = 0; r < rows; ++r)
    {
        for(std::size_t i = 0; i < columns.size(); ++i)
        {
            std::snprintf(buf, sizeof buf, "%.16e", (*columns[i])[r]);
            if(i) text += ',';
            text += buf;
        }
        text += '\n';
    }
    std::ofstream out(path, std::ios::binary);
    if(!out) fail(ErrorCode::io_failure, "cannot write '" + path + "'");
    out << text;
    if(!out) fail(ErrorCode::io_failure, "write to '" + path + "' failed");
}

double envelope(const std::vector<double>& t, const std::vector<double>& x, double lo, double hi)
{
    double m = 0.0;
    for(std::size_t i = 0; i < t.size() && i < x.size(); ++i)
        if(t[i] >= lo - 1e-12 && t[i] <= hi + 1e-12) m = std::max(m, std::abs(x[i]));
    return m;
}

bool collapse_and_revival(const std::vector<double>& t, const std::vector<double>& x, double period, double margin)
{
    require(period > 0.0, "envelope period must be positive");
    if(t.empty()) return false;
    std::vector<double> env;
    for(double lo = t.front(); lo + period <= t.back() + 1e-12; lo += period) env.push_back(envelope(t, x, lo, lo + period));
    double top = -1.0, dip = std::numeric_limits<double>::infinity();
    for(double e : env)
    {
        if(e > dip + margin) return true;
        if(e < top - margin) dip = std::min(dip, e);
        top = std::max(top, e);
    }
    return false;
}

namespace
{

std::string label(const std::string& prefix, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%g", prefix.c_str(), v);
    return buf;
}

void write_json(const std::string& path, const json& j)
{
    std::ofstream out(path, std::ios::binary);
    if(!out) fail(ErrorCode::io_failure, "cannot write '" + path + "'");
    out << j.dump(2) << '\n';
    if(!out) fail(ErrorCode::io_failure, "write to '" + path + "' failed");
}

struct Item
{
    std::size_t coupling, temperature;
};

struct ItemOutput
{
    json summary;
    std::vector<std::string> files;
    bool converged = true;
};

ConvergeOptions converge_options(const ScenarioConfig& c)
{
    ConvergeOptions o;
    o.depth_start = c.depth_start;
    o.depth_step = c.depth_step;
    o.depth_max = c.max_depth;
    o.terms_start = 1;
    o.terms_max = c.max_matsubara;
    o.tol = c.tol;
    return o;
}

json classification_json(const PeakClassification& pc)
{
    json peaks = json::array();
    for(const auto& p : pc.peaks)
        peaks.push_back({{"location", p.location}, {"height", p.height}, {"prominence", p.prominence},
                         {"half_width", p.half_width}});
    return {{"structure", to_string(pc.structure)},
            {"relative_threshold", pc.relative_threshold},
            {"dominant_frequencies", pc.dominant},
            {"peaks", peaks}};
}

class ScenarioRunner
{
  public:
    explicit ScenarioRunner(const ScenarioConfig& c) : c_(c), config_json_(to_json(c)) {}

    ItemOutput run(const Item& it) const
    {
        switch(c_.kind)
        {
            case ScenarioKind::dephasing_validate: return dephasing(it);
            case ScenarioKind::two_qubit: return two_qubit(it);
            case ScenarioKind::spectrum:
            case ScenarioKind::eta_sweep: return spectrum(it);
            case ScenarioKind::jeff: return jeff(it);
        }
        fail(ErrorCode::invalid_argument, "unsupported scenario");
    }

    std::string base(const Item& it) const
    {
        return std::string(to_string(c_.kind)) + "_" +
               label(c_.lorentz ? "lambda" : "eta", c_.couplings[it.coupling]) + "_" +
               label(c_.temperatures_inverse ? "Tinv" : "T", c_.temperatures[it.temperature]);
    }

    json item_json(const Item& it) const
    {
        return {{c_.lorentz ? "lambda" : "eta", c_.couplings[it.coupling]},
                {"temperature", c_.temperature(it.temperature)},
                {c_.temperatures_inverse ? "inverse_temperature" : "temperature_given", c_.temperatures[it.temperature]}};
    }

  private:
    std::string path(const std::string& name) const { return (fs::path(c_.out_dir) / name).string(); }

    // metadata sidecar shared by every scenario
    void finish(const Item& it, ItemOutput& out, const json& solver) const
    {
        json meta;
        meta["version"] = version_string;
        meta["config"] = config_json_;
        meta["item"] = item_json(it);
        json names = json::array();
        for(const auto& f : out.files) names.push_back(fs::path(f).filename().string());
        meta["files"] = names;
        meta["solver"] = solver;
        meta["summary"] = out.summary;
        const std::string p = path(base(it) + ".json");
        write_json(p, meta);
        out.files.push_back(p);
    }

    ItemOutput dephasing(const Item& it) const
    {
        const auto j = c_.spectral_density(c_.couplings[it.coupling]);
        const double temp = c_.temperature(it.temperature);
        const auto model = dephasing_model(c_.omega0);
        auto opts = converge_options(c_);
        ConvergeResult res;
        json selection = nullptr;
        bool selected = true;
        if(j.is_lorentz()) res = converge_heom(model, j, temp, c_.run, opts);
        else
        {
            const auto sel = select_matsubara(j, temp, c_.matsubara_rel_tol, c_.max_matsubara);
            selected = sel.converged;
            selection = {{"terms", sel.expansion.size()},
                         {"error", sel.error},
                         {"threshold", sel.threshold},
                         {"converged", sel.converged}};
            opts.terms_start = opts.terms_max = int(sel.expansion.size());
            res = converge(
                [&](int depth, int) { return run_heom(model, sel.expansion, j.frequency_scale(), depth, c_.run); },
                opts);
        }
        ItemOutput out;
        out.converged = res.converged && selected;
        const auto& tr = res.trajectory;
        const auto& x = tr.values("sigma_x");
        std::vector<std::string> header = {"t", "sigma_x"};
        std::vector<const std::vector<double>*> cols = {&tr.times, &x};
        std::vector<double> oracle;
        out.summary = {{"depth", res.depth}, {"matsubara_terms", res.terms}, {"converged", out.converged}};
        if(!selection.is_null()) out.summary["matsubara_selection"] = selection;
        if(c_.oracle)
        {
            oracle = dephasing_oracle(j, temp, c_.omega0, tr.times);
            header.push_back("oracle");
            cols.push_back(&oracle);
            double sup = 0.0;
            for(std::size_t i = 0; i < x.size(); ++i) sup = std::max(sup, std::abs(x[i] - oracle[i]));
            out.summary["sup_vs_oracle"] = sup;
        }
        out.summary["diagnostics"] = {{"max_trace_drift", tr.diagnostics.max_trace_drift},
                                      {"max_hermiticity_residue", tr.diagnostics.max_hermiticity_residue}};
        const std::string p = path(base(it) + ".csv");
        write_csv(p, header, cols);
        out.files.push_back(p);
        finish(it, out, tr.metadata);
        return out;
    }

    ItemOutput two_qubit(const Item& it) const
    {
        const auto j = c_.spectral_density(c_.couplings[it.coupling]);
        const double temp = c_.temperature(it.temperature);
        const auto model = two_qubit_model(c_.omega0, c_.g0);
        auto res = converge_heom(model, j, temp, c_.run, converge_options(c_));
        ItemOutput out;
        out.converged = res.converged;
        const auto& tr = res.trajectory;
        const auto& x = tr.values("sigma_x");
        std::vector<std::string> header = {"t", "sigma_x"};
        std::vector<const std::vector<double>*> cols = {&tr.times, &x};
        const double tf = tr.times.back();
        out.summary = {{"depth", res.depth},
                       {"matsubara_terms", res.terms},
                       {"converged", res.converged},
                       {"depth_distance", std::isfinite(res.depth_distance) ? json(res.depth_distance) : json(nullptr)},
                       {"terms_distance", std::isfinite(res.terms_distance) ? json(res.terms_distance) : json(nullptr)},
                       {"late_window", {0.6 * tf, tf}},
                       {"late_envelope", envelope(tr.times, x, 0.6 * tf, tf)},
                       {"collapse_and_revival", collapse_and_revival(tr.times, x, 2.0 * pi / c_.omega0)}};
        Trajectory bm;
        if(c_.born_markov)
        {
            bm = run_born_markov(model, j, temp, c_.run);
            header.push_back("bm");
            cols.push_back(&bm.values("sigma_x"));
            out.summary["sup_vs_born_markov"] = sup_distance(tr, bm, "sigma_x");
        }
        Trajectory bm_lamb;
        if(c_.lamb_shift)
        {
            bm_lamb = run_born_markov(model, j, temp, c_.run, true);
            header.push_back("bm_lamb");
            cols.push_back(&bm_lamb.values("sigma_x"));
            out.summary["sup_vs_born_markov_lamb"] = sup_distance(tr, bm_lamb, "sigma_x");
        }
        out.summary["diagnostics"] = {{"max_trace_drift", tr.diagnostics.max_trace_drift},
                                      {"max_hermiticity_residue", tr.diagnostics.max_hermiticity_residue},
                                      {"min_eigenvalue", tr.diagnostics.min_eigenvalue}};
        const std::string p = path(base(it) + ".csv");
        write_csv(p, header, cols);
        out.files.push_back(p);
        finish(it, out, tr.metadata);
        return out;
    }

    ItemOutput spectrum(const Item& it) const
    {
        const auto j = c_.spectral_density(c_.couplings[it.coupling]);
        const double temp = c_.temperature(it.temperature);
        const auto model = two_qubit_model(c_.omega0, c_.g0);
        const auto grid = uniform_grid(c_.spectrum_omega_min, c_.spectrum_omega_max, std::size_t(c_.spectrum_points));
        SpectrumOptions so;
        so.window_rate = c_.window_rate;

        auto settings = c_.run;
        ConvergeResult res;
        SpectrumResult spec;
        json windows = json::array();
        while(true)
        {
            res = converge_heom(model, j, temp, settings, converge_options(c_));
            spec = cosine_spectrum(res.trajectory, "sigma_x", grid, so);
            // the decay test looks at the last tenth of the window, not a single sample that may sit on a beat node
            const auto& t = res.trajectory.times;
            const auto& x = res.trajectory.values("sigma_x");
            const double top = envelope(t, x, 0.0, t.back());
            spec.tail_ratio = top > 0.0 ? envelope(t, x, 0.9 * t.back(), t.back()) / top : 0.0;
            spec.truncated_window = spec.tail_ratio >= 0.05;
            windows.push_back({{"t_final", settings.t_final}, {"tail_ratio", spec.tail_ratio}});
            if(!spec.truncated_window || 2.0 * settings.t_final > c_.max_window) break;
            settings.t_final *= 2.0;
        }
        const auto pc = classify_peaks(spec, c_.peak_threshold);

        ItemOutput out;
        out.converged = res.converged;
        const auto& tr = res.trajectory;
        out.summary = {{"depth", res.depth},
                       {"matsubara_terms", res.terms},
                       {"converged", res.converged},
                       {"t_final", settings.t_final},
                       {"windows", windows},
                       {"tail_ratio", spec.tail_ratio},
                       {"truncated_window", spec.truncated_window},
                       {"classification", classification_json(pc)}};
        const std::string pt = path(base(it) + "_trajectory.csv");
        write_csv(pt, {"t", "sigma_x"}, {&tr.times, &tr.values("sigma_x")});
        out.files.push_back(pt);
        const std::string ps = path(base(it) + "_spectrum.csv");
        write_csv(ps, {"omega", "amplitude"}, {&spec.omega, &spec.values});
        out.files.push_back(ps);
        if(c_.spectrum_jeff)
        {
            auto extra = jeff_tables(it, j, temp, pc.dominant.empty() ? 0.0 : pc.dominant.front());
            out.summary["jeff"] = extra.summary;
            out.files.insert(out.files.end(), extra.files.begin(), extra.files.end());
        }
        finish(it, out, tr.metadata);
        return out;
    }

    ItemOutput jeff_tables(const Item& it, const SpectralDensity& j, double temp, double dominant) const
    {
        const auto z1 = solve_zeta(j, temp, c_.omega0);
        ZetaOptions half;
        half.start = 0.5;
        const auto z2 = solve_zeta(j, temp, c_.omega0, half);
        const auto grid = uniform_grid(c_.jeff_omega_min, c_.jeff_omega_max, std::size_t(c_.jeff_points));
        const auto eb = effective_spectral_density(j, temp, c_.omega0, c_.g0, z1.zeta, grid, dominant);
        auto point = [&](double w) { return effective_point(j, temp, c_.omega0, c_.g0, z1.zeta, w).jeff; };
        ItemOutput out;
        double max_err = 0.0;
        for(double e : eb.shift_error) max_err = std::max(max_err, e);
        out.summary = {{"zeta", z1.zeta},
                       {"zeta_iterations", z1.iterations},
                       {"zeta_residual", z1.residual},
                       {"zeta_from_half", z2.zeta},
                       {"dominant_frequency", eb.dominant_frequency},
                       {"gamma0", eb.gamma0},
                       {"jeff_at_omega0", point(c_.omega0)},
                       {"jeff_at_omega0_minus_g0", point(c_.omega0 - c_.g0)},
                       {"jeff_at_omega0_plus_g0", point(c_.omega0 + c_.g0)},
                       {"max_shift_error", max_err},
                       {"shift_tail_bound", eb.tail_bound}};
        const std::string p = path(base(it) + "_jeff.csv");
        write_csv(p, {"omega", "jeff", "shift", "broadening"}, {&eb.omega, &eb.jeff, &eb.shift, &eb.broadening});
        out.files.push_back(p);
        return out;
    }

    ItemOutput jeff(const Item& it) const
    {
        const auto j = c_.spectral_density(c_.couplings[it.coupling]);
        auto out = jeff_tables(it, j, c_.temperature(it.temperature), 0.0);
        finish(it, out, json::object());
        return out;
    }

    const ScenarioConfig& c_;
    json config_json_;
};

// Where consecutive coupling values change their peak structure, per temperature.
json sweep_summary(const ScenarioConfig& c, const std::vector<ItemOutput>& outputs)
{
    json per_t = json::array();
    for(std::size_t ti = 0; ti < c.temperatures.size(); ++ti)
    {
        json tags = json::array();
        std::vector<std::string> seq;
        for(std::size_t ci = 0; ci < c.couplings.size(); ++ci)
        {
            const auto& s = outputs[ti * c.couplings.size() + ci].summary;
            seq.push_back(s["classification"]["structure"].get<std::string>());
            tags.push_back(seq.back());
        }
        json changes = json::array();
        for(std::size_t ci = 0; ci + 1 < seq.size(); ++ci)
            if(seq[ci] != seq[ci + 1])
                changes.push_back({{"from", seq[ci]},
                                   {"to", seq[ci + 1]},
                                   {"between", {c.couplings[ci], c.couplings[ci + 1]}}});
        const bool single_flip = changes.size() == 1 && changes[0]["from"] == "double-peak" &&
                                 changes[0]["to"] == "single-peak";
        json entry = {{"temperature", c.temperature(ti)}, {"structures", tags}, {"changes", changes},
                      {"single_double_to_single_flip", single_flip}};
        if(single_flip) entry["flip_between"] = changes[0]["between"];
        per_t.push_back(entry);
    }
    return per_t;
}

void write_plot_script(const ScenarioConfig& c, const std::vector<std::string>& files, const std::string& path)
{
    std::ostringstream os;
    os << "# gnuplot script; run with: gnuplot -p " << fs::path(path).filename().string() << "\n";
    os << "set datafile separator ','\nset key autotitle columnhead\n";
    for(const auto& f : files)
    {
        if(fs::path(f).extension() != ".csv") continue;
        const auto t = read_csv(f);
        os << "plot";
        for(std::size_t k = 1; k < t.header.size(); ++k)
            os << (k > 1 ? "," : "") << " '" << fs::path(f).filename().string() << "' using 1:" << (k + 1)
               << " with lines";
        os << "\npause -1\n";
    }
    std::ofstream out(path, std::ios::binary);
    if(!out) fail(ErrorCode::io_failure, "cannot write '" + path + "'");
    out << os.str();
    (void)c;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg)
{
    cfg.validate();
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if(ec) fail(ErrorCode::io_failure, "cannot create output directory '" + cfg.out_dir + "': " + ec.message());

    std::vector<Item> items;
    for(std::size_t t = 0; t < cfg.temperatures.size(); ++t)
        for(std::size_t k = 0; k < cfg.couplings.size(); ++k) items.push_back({k, t});

    ScenarioRunner runner(cfg);
    std::vector<ItemOutput> outputs(items.size());
    parallel_for(items.size(), cfg.threads, [&](std::size_t i) { outputs[i] = runner.run(items[i]); });

    ScenarioResult result;
    json runs = json::array();
    for(std::size_t i = 0; i < items.size(); ++i)
    {
        json r = runner.item_json(items[i]);
        r["name"] = runner.base(items[i]);
        r["summary"] = outputs[i].summary;
        runs.push_back(r);
        result.converged = result.converged && outputs[i].converged;
        result.files.insert(result.files.end(), outputs[i].files.begin(), outputs[i].files.end());
    }
    result.summary["version"] = version_string;
    result.summary["config"] = to_json(cfg);
    result.summary["converged"] = result.converged;
    result.summary["runs"] = runs;
    if(cfg.kind == ScenarioKind::eta_sweep) result.summary["sweep"] = sweep_summary(cfg, outputs);

    const std::string stem = std::string(to_string(cfg.kind)) + (cfg.preset.empty() ? "" : "_" + cfg.preset);
    if(cfg.plot_script)
    {
        const std::string p = (fs::path(cfg.out_dir) / (stem + "_plot.gp")).string();
        write_plot_script(cfg, result.files, p);
        result.files.push_back(p);
    }
    const std::string sp = (fs::path(cfg.out_dir) / (stem + "_summary.json")).string();
    write_json(sp, result.summary);
    result.files.push_back(sp);
    return result;
}

namespace
{

std::pair<std::string, std::string> split_spec(const std::string& spec)
{
    if(fs::exists(spec)) return {spec, ""};
    const auto pos = spec.rfind(':');
    if(pos == std::string::npos || pos == 0) return {spec, ""};
    return {spec.substr(0, pos), spec.substr(pos + 1)};
}

}  // namespace

CompareReport compare_runs(const std::string& spec_a, const std::string& spec_b, double tolerance)
{
    require(tolerance >= 0.0, "compare tolerance must be >= 0");
    const auto [pa, ca] = split_spec(spec_a);
    const auto [pb, cb] = split_spec(spec_b);
    const auto ta = read_csv(pa);
    const auto tb = read_csv(pb);
    if(ta.header.size() < 2 || tb.header.size() < 2)
        fail(ErrorCode::invalid_argument, "compared files need a grid column and at least one data column");
    CompareReport r;
    r.column_a = ca.empty() ? ta.header[1] : ca;
    r.column_b = cb.empty() ? tb.header[1] : cb;
    const auto& ga = ta.columns[0];
    const auto& gb = tb.columns[0];
    if(ga.size() != gb.size())
        fail(ErrorCode::dimension_mismatch, "grids differ in length (" + std::to_string(ga.size()) + " vs " +
                                                std::to_string(gb.size()) + ")");
    for(std::size_t i = 0; i < ga.size(); ++i)
        if(std::abs(ga[i] - gb[i]) > 1e-9 * std::max(1.0, std::abs(ga[i])))
            fail(ErrorCode::dimension_mismatch, "grids differ at row " + std::to_string(i + 2));
    const auto& a = ta.column(r.column_a);
    const auto& b = tb.column(r.column_b);
    double ss = 0.0;
    for(std::size_t i = 0; i < a.size(); ++i)
    {
        const double d = std::abs(a[i] - b[i]);
        r.sup = std::max(r.sup, d);
        ss += d * d;
    }
    r.points = a.size();
    r.rms = a.empty() ? 0.0 : std::sqrt(ss / double(a.size()));
    r.tolerance = tolerance;
    r.pass = r.sup <= tolerance;
    return r;
}

}  // namespace heomkit
