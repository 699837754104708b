#include <doctest.h>

#include "support.hpp"

using namespace heomkit;

TEST_CASE("closed two-level precession")
{
    CHECK(support::closed_system_error() < 1e-8);
    CHECK(support::closed_system_error(2.5, 10.0) < 1e-8);
}

TEST_CASE("fourth-order Richardson ratio")
{
    const double r = support::richardson_ratio();
    CHECK(r >= 12.0);
    CHECK(r <= 20.0);
}

TEST_CASE("step configuration")
{
    const auto cfg = IntegratorConfig::fitted(10.0, 0.03);
    CHECK(cfg.steps() == 334);
    CHECK(cfg.dt * cfg.steps() == doctest::Approx(10.0).epsilon(1e-14));
    CHECK_THROWS(cfg.validate(100.0));
    CHECK_NOTHROW(cfg.validate(1.0));
    const auto d = IntegratorConfig::defaults(100.0, 1.0, 5.0, 2.0);
    CHECK(d.dt <= 2.0 * pi / 1000.0 + 1e-15);
    CHECK(d.dt * 2.0 <= IntegratorConfig::max_step_stiffness + 1e-12);
}

TEST_CASE("record stride and t = 0 sample")
{
    const auto model = dephasing_model(1.0);
    Derivative zero = [](std::span<const cplx>, std::span<cplx> out) { std::fill(out.begin(), out.end(), cplx{}); };
    const auto cfg = IntegratorConfig::fitted(1.0, 0.01, 10);
    std::vector<cplx> y(model.rho0.data(), model.rho0.data() + 4);
    const auto tr = integrate(zero, y, 2, cfg, {coherence_observable(model)}, 0.0);
    REQUIRE(tr.times.size() == 11);
    CHECK(tr.times.front() == 0.0);
    CHECK(tr.times.back() == doctest::Approx(1.0));
    for(double v : tr.values("sigma_x")) CHECK(v == doctest::Approx(1.0));
    CHECK(tr.diagnostics.max_trace_drift < 1e-15);
}

TEST_CASE("non-finite state is reported")
{
    const auto model = dephasing_model(1.0);
    Derivative blow = [](std::span<const cplx> in, std::span<cplx> out) {
        for(std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * 1e300;
    };
    std::vector<cplx> y(model.rho0.data(), model.rho0.data() + 4);
    try
    {
        integrate(blow, y, 2, IntegratorConfig::fitted(1.0, 0.1), {coherence_observable(model)}, 0.0);
        FAIL("expected numerical_failure");
    }
    catch(const Error& e)
    {
        CHECK(e.code() == ErrorCode::numerical_failure);
    }
}

TEST_CASE("converge rejects tol <= 0")
{
    ConvergeOptions o;
    o.tol = 0.0;
    Runner r = [](int, int) { return Trajectory{}; };
    CHECK_THROWS(converge(r, o));
}

TEST_CASE("zero coupling converges at depth 0")
{
    const auto model = two_qubit_model(1.0, 0.1);
    BathExpansion empty;
    empty.terms.push_back({cplx(0.0, 0.0), cplx(1.0, 0.0)});
    RunSettings s;
    s.t_final = 5.0;
    s.record_interval = 0.05;
    ConvergeOptions o;
    o.depth_start = 0;
    o.depth_step = 1;
    o.depth_max = 3;
    const auto res = converge([&](int depth, int) { return run_heom(model, empty, 1.0, depth, s); }, o);
    CHECK(res.converged);
    CHECK(res.depth == 0);
    CHECK(res.depth_distance == 0.0);
}

TEST_CASE("budget exhaustion returns the finest result flagged")
{
    int calls = 0;
    Runner r = [&](int depth, int) {
        ++calls;
        Trajectory t;
        t.times = {0.0, 1.0};
        t.add("sigma_x", {1.0, double(depth)});
        return t;
    };
    ConvergeOptions o;
    o.depth_start = 2;
    o.depth_max = 6;
    const auto res = converge(r, o);
    CHECK_FALSE(res.converged);
    CHECK(res.depth == 6);
    CHECK(res.depth_distance == doctest::Approx(2.0));
}

TEST_CASE("sup_distance needs matching grids")
{
    Trajectory a, b;
    a.times = {0.0, 1.0};
    a.add("sigma_x", {0.0, 1.0});
    b.times = {0.0, 2.0};
    b.add("sigma_x", {0.0, 1.0});
    CHECK_THROWS(sup_distance(a, b, "sigma_x"));
    CHECK(sup_distance(a, a, "sigma_x") == 0.0);
}
