#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "heomkit/scenario.hpp"

using namespace heomkit;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace
{

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("heomkit_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string field_error_of(const json& doc)
{
    try
    {
        parse_config(doc).validate();
    }
    catch(const Error& e)
    {
        CHECK(e.code() == ErrorCode::invalid_argument);
        return e.what();
    }
    return {};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// a fast dephasing configuration: fig1a shortened
ScenarioConfig quick(const fs::path& dir)
{
    auto c = preset("fig1a");
    c.run.t_final = 4.0;
    c.max_depth = 6;
    c.out_dir = dir.string();
    return c;
}

}  // namespace

TEST_CASE("presets")
{
    const auto names = preset_names();
    for(const char* want : {"fig1a", "fig1b", "fig2a", "fig2b", "fig2c", "fig2d", "fig2e", "fig2f", "fig3", "fig4"})
        CHECK(std::find(names.begin(), names.end(), want) != names.end());
    for(const auto& n : names) CHECK_NOTHROW(preset(n).validate());
    CHECK_THROWS(preset("fig9"));

    const auto f1a = preset("fig1a");
    CHECK(f1a.lorentz);
    CHECK(f1a.couplings == std::vector<double>{0.01, 0.05, 0.1});
    const auto f4 = preset("fig4");
    CHECK(f4.couplings.size() == 10);
    CHECK(f4.couplings.front() == doctest::Approx(0.001));
    CHECK(f4.couplings.back() == doctest::Approx(0.010));
    CHECK(f4.temperature(0) == doctest::Approx(1.0 / 0.03));
    const auto f2a = preset("fig2a");
    CHECK(f2a.couplings == std::vector<double>{0.05});
    CHECK(f2a.cutoff == 5.0);
    CHECK(f2a.g0 == 0.1);
}

TEST_CASE("config validation names the field")
{
    CHECK(field_error_of({{"preset", "fig2a"}, {"inverse_temperatures", json::array()}})
              .find("inverse_temperatures") != std::string::npos);
    CHECK(field_error_of({{"preset", "fig2a"}, {"bath", {{"etta", 0.1}}}}).find("bath.etta") != std::string::npos);
    CHECK(field_error_of({{"preset", "fig2a"}, {"bogus", 1}}).find("bogus") != std::string::npos);
    CHECK(field_error_of({{"preset", "fig2a"}, {"model", {{"g0", "x"}}}}).find("model.g0") != std::string::npos);
    CHECK(field_error_of({{"preset", "fig2a"}, {"model", {{"omega0", -1.0}}}}).find("model.omega0") !=
          std::string::npos);
    CHECK(field_error_of({{"scenario", "two-qubit"}, {"bath", {{"type", "lorentz"}, {"lambda", 0.1}}},
                          {"temperatures", {1.0}}})
              .find("temperatures") != std::string::npos);
    CHECK(field_error_of({{"bath", {{"eta", 0.1}}}}).find("scenario") != std::string::npos);
    CHECK(field_error_of({{"preset", "fig2a"}, {"integrator", {{"t_final", 10.0}, {"record_interval", 0.3}}}})
              .find("integrator.t_final") != std::string::npos);
    CHECK(field_error_of({{"preset", "fig2a"}, {"convergence", {{"tol", 0.0}}}}).find("convergence.tol") !=
          std::string::npos);
    CHECK(field_error_of({{"preset", "fig2a"}}).empty());
}

TEST_CASE("effective configuration round-trips")
{
    for(const auto& n : preset_names())
    {
        const auto c = preset(n);
        const auto j1 = to_json(c);
        const auto j2 = to_json(parse_config(j1));
        CHECK(j1.dump() == j2.dump());
    }
    auto c = preset("fig3");
    c.threads = 4;
    c.out_dir = "/somewhere";
    CHECK(to_json(c).dump() == to_json(preset("fig3")).dump());
}

TEST_CASE("parallel_for runs every index and rethrows the lowest failure")
{
    std::vector<int> hit(50, 0);
    parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] = 1; });
    for(int h : hit) CHECK(h == 1);
    try
    {
        parallel_for(10, 3, [](std::size_t i) {
            if(i == 3 || i == 7) throw Error(ErrorCode::numerical_failure, "item " + std::to_string(i));
        });
        FAIL("expected a failure");
    }
    catch(const Error& e)
    {
        CHECK(std::string(e.what()) == "item 3");
    }
}

TEST_CASE("CSV round trip is lossless")
{
    const auto dir = scratch("csv");
    std::vector<double> a = {0.0, 0.1, 1.0 / 3.0}, b = {1e-300, -2.5, 3.141592653589793};
    write_csv((dir / "x.csv").string(), {"t", "v"}, {&a, &b});
    const auto t = read_csv((dir / "x.csv").string());
    CHECK(t.header == std::vector<std::string>{"t", "v"});
    CHECK(t.column("t") == a);
    CHECK(t.column("v") == b);
    CHECK_THROWS(t.column("w"));
    CHECK_THROWS(read_csv((dir / "missing.csv").string()));
}

TEST_CASE("compare_runs")
{
    const auto dir = scratch("cmp");
    std::vector<double> t = {0.0, 1.0, 2.0}, x = {1.0, 0.5, 0.25}, y = {1.0, 0.6, 0.25};
    std::vector<double> t2 = {0.0, 1.0, 3.0};
    const auto pa = (dir / "a.csv").string(), pb = (dir / "b.csv").string(), pc = (dir / "c.csv").string();
    write_csv(pa, {"t", "sigma_x", "other"}, {&t, &x, &y});
    write_csv(pb, {"t", "sigma_x"}, {&t, &y});
    write_csv(pc, {"t", "sigma_x"}, {&t2, &x});

    const auto self = compare_runs(pa, pa, 0.0);
    CHECK(self.sup == 0.0);
    CHECK(self.rms == 0.0);
    CHECK(self.pass);
    const auto ab = compare_runs(pa, pb, 0.05);
    CHECK(ab.sup == doctest::Approx(0.1));
    CHECK_FALSE(ab.pass);
    CHECK(compare_runs(pa + ":other", pb, 0.0).sup == 0.0);
    try
    {
        compare_runs(pa, pc, 1.0);
        FAIL("expected a grid mismatch");
    }
    catch(const Error& e)
    {
        CHECK(e.code() == ErrorCode::dimension_mismatch);
    }
    CHECK_THROWS(compare_runs(pa + ":nope", pb, 1.0));
}

TEST_CASE("envelope and collapse-and-revival")
{
    std::vector<double> t, steady, beat;
    for(int i = 0; i <= 10000; ++i)
    {
        const double s = i * 0.01;
        t.push_back(s);
        steady.push_back(std::exp(-0.01 * s) * std::cos(s));
        beat.push_back(std::cos(0.05 * s) * std::cos(s));
    }
    CHECK(envelope(t, steady, 60.0, 100.0) == doctest::Approx(std::exp(-0.2 * 3.141592653589793)).epsilon(1e-3));
    CHECK_FALSE(collapse_and_revival(t, steady, 2 * pi));
    CHECK(collapse_and_revival(t, beat, 2 * pi));
}

TEST_CASE("scenario run writes tables, metadata and a summary")
{
    const auto dir = scratch("run");
    const auto res = run_scenario(quick(dir));
    CHECK(res.converged);
    const auto& runs = res.summary["runs"];
    REQUIRE(runs.size() == 3);
    for(const auto& r : runs)
    {
        const std::string name = r["name"].get<std::string>();
        const auto table = read_csv((dir / (name + ".csv")).string());
        CHECK(table.header == std::vector<std::string>{"t", "sigma_x", "oracle"});
        CHECK(r["summary"]["sup_vs_oracle"].get<double>() < 1e-3);
        const auto meta = json::parse(slurp(dir / (name + ".json")));
        CHECK(meta["version"] == version_string);
        CHECK(meta["config"].dump() == to_json(quick(dir)).dump());
        CHECK(meta.contains("solver"));
    }
    CHECK(fs::exists(dir / "dephasing-validate_fig1a_summary.json"));
}

TEST_CASE("scenario outputs do not depend on thread count or directory")
{
    const auto d1 = scratch("det1"), d2 = scratch("det2");
    auto c1 = quick(d1), c2 = quick(d2);
    c2.threads = 3;
    c1.plot_script = c2.plot_script = true;
    run_scenario(c1);
    run_scenario(c2);
    std::size_t n = 0;
    for(const auto& e : fs::directory_iterator(d1))
    {
        const auto other = d2 / e.path().filename();
        REQUIRE(fs::exists(other));
        CHECK(slurp(e.path()) == slurp(other));
        ++n;
    }
    CHECK(n == std::size_t(std::distance(fs::directory_iterator(d2), fs::directory_iterator{})));
    CHECK(n >= 7);
}
