#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "heomkit/heomkit.h"

TEST_CASE("status names and version")
{
    CHECK(std::string(hk_version()) == "1.0.0");
    CHECK(std::string(hk_status_name(HK_OK)) == "ok");
    CHECK(std::string(hk_status_name(HK_ERR_INVALID_ARGUMENT)) == "invalid argument");
    CHECK(std::string(hk_preset_names()).find("fig2a") != std::string::npos);
}

TEST_CASE("bath handles")
{
    hk_bath* b = nullptr;
    CHECK(hk_bath_ohmic_drude(-1.0, 5.0, &b) == HK_ERR_INVALID_ARGUMENT);
    CHECK(b == nullptr);
    CHECK(std::string(hk_last_error()).size() > 0);
    CHECK(hk_bath_ohmic_drude(0.05, 5.0, nullptr) == HK_ERR_INVALID_ARGUMENT);

    REQUIRE(hk_bath_ohmic_drude(0.05, 5.0, &b) == HK_OK);
    double j = 0.0;
    REQUIRE(hk_bath_spectral_density(b, 1.0, &j) == HK_OK);
    CHECK(j == doctest::Approx((1.0 / M_PI) * 0.5 / 26.0));
    CHECK(hk_bath_spectral_density(b, -1.0, &j) == HK_ERR_INVALID_ARGUMENT);

    size_t count = 0;
    CHECK(hk_bath_expansion(b, 10.0, 3, nullptr, nullptr, nullptr, nullptr, 0, &count) == HK_OK);
    CHECK(count == 3);
    std::vector<double> ar(3), ai(3), br(3), bi(3);
    REQUIRE(hk_bath_expansion(b, 10.0, 3, ar.data(), ai.data(), br.data(), bi.data(), 3, &count) == HK_OK);
    CHECK(ai[0] == doctest::Approx(-0.25));
    CHECK(br[2] == doctest::Approx(4.0 * M_PI * 10.0));

    double re = 0.0, im = 0.0;
    REQUIRE(hk_bath_correlation(b, 10.0, 1.0, &re, &im) == HK_OK);
    CHECK(std::isfinite(re));
    hk_bath_free(b);
    hk_bath_free(nullptr);
}

TEST_CASE("solver round trip")
{
    hk_bath* b = nullptr;
    hk_model* m = nullptr;
    REQUIRE(hk_bath_lorentz(0.05, 0.5, 1.0, &b) == HK_OK);
    REQUIRE(hk_model_dephasing(1.0, &m) == HK_OK);
    CHECK(hk_model_dimension(m) == 2);
    hk_trajectory* t = nullptr;
    REQUIRE(hk_solve_heom(m, b, 0.0, 6, 1, 5.0, 0.05, 0.0, &t) == HK_OK);
    const size_t n = hk_trajectory_length(t);
    CHECK(n == 101);
    std::vector<double> times(n), x(n);
    REQUIRE(hk_trajectory_times(t, times.data(), n) == HK_OK);
    REQUIRE(hk_trajectory_values(t, "sigma_x", x.data(), n) == HK_OK);
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(hk_trajectory_values(t, "nope", x.data(), n) != HK_OK);
    CHECK(hk_trajectory_times(t, times.data(), n - 1) == HK_ERR_DIMENSION_MISMATCH);
    double drift = 0, herm = 0, mineig = 0;
    REQUIRE(hk_trajectory_diagnostics(t, &drift, &herm, &mineig) == HK_OK);
    CHECK(drift < 1e-6);
    size_t need = 0;
    REQUIRE(hk_trajectory_metadata(t, nullptr, 0, &need) == HK_OK);
    std::string meta(need, '\0');
    REQUIRE(hk_trajectory_metadata(t, meta.data(), meta.size(), &need) == HK_OK);
    CHECK(meta.find("heom") != std::string::npos);

    std::vector<double> omega = {0.5, 1.0, 1.5}, spec(3);
    REQUIRE(hk_cosine_spectrum(times.data(), x.data(), n, omega.data(), 3, spec.data()) == HK_OK);
    CHECK(spec[1] > spec[0]);
    hk_trajectory_free(t);

    CHECK(hk_solve_heom(m, b, 1.0, 6, 1, 5.0, 0.05, 0.0, &t) == HK_ERR_INVALID_ARGUMENT);
    hk_model_free(m);
    hk_bath_free(b);
}

TEST_CASE("custom model validation")
{
    std::vector<double> h(8, 0.0), f(8, 0.0), r(8, 0.0);
    h[0] = 0.5;
    h[6] = -0.5;
    f[0] = 1.0;
    f[6] = -1.0;
    r[0] = r[2] = r[4] = r[6] = 0.5;
    hk_model* m = nullptr;
    REQUIRE(hk_model_custom(2, h.data(), f.data(), r.data(), 1.0, &m) == HK_OK);
    hk_model_free(m);
    CHECK(hk_model_custom(3, h.data(), f.data(), r.data(), 1.0, &m) != HK_OK);
    h[2] = 1.0;  // non-Hermitian
    CHECK(hk_model_custom(2, h.data(), f.data(), r.data(), 1.0, &m) != HK_OK);
}

TEST_CASE("analysis entry points")
{
    hk_bath* b = nullptr;
    REQUIRE(hk_bath_ohmic_drude(0.05, 5.0, &b) == HK_OK);
    double zeta = 0.0;
    REQUIRE(hk_solve_zeta(b, 10.0, 1.0, &zeta) == HK_OK);
    CHECK(zeta > 0.0);
    CHECK(zeta < 1.0);
    std::vector<double> w = {0.9, 1.0, 1.1}, jeff(3);
    REQUIRE(hk_effective_spectral_density(b, 10.0, 1.0, 0.1, zeta, w.data(), 3, jeff.data()) == HK_OK);
    CHECK(jeff[1] > 0.0);
    hk_bath_free(b);

    std::vector<double> om, v;
    for(int i = 0; i <= 200; ++i)
    {
        om.push_back(i * 0.01);
        v.push_back(std::exp(-std::pow((om.back() - 0.9) / 0.03, 2)) + std::exp(-std::pow((om.back() - 1.1) / 0.03, 2)));
    }
    double loc[4];
    size_t count = 0;
    REQUIRE(hk_classify_peaks(om.data(), v.data(), om.size(), 0.05, loc, 4, &count) == HK_OK);
    CHECK(count == 2);
}

TEST_CASE("scenario handles")
{
    hk_scenario* s = nullptr;
    CHECK(hk_scenario_from_preset("nope", &s) != HK_OK);
    CHECK(hk_scenario_from_json("{\"preset\":\"fig2a\",\"bogus\":1}", &s) == HK_ERR_INVALID_ARGUMENT);
    CHECK(std::string(hk_last_error()).find("bogus") != std::string::npos);
    CHECK(hk_scenario_from_json("{not json", &s) == HK_ERR_INVALID_ARGUMENT);
    REQUIRE(hk_scenario_from_preset("fig3", &s) == HK_OK);
    CHECK(hk_scenario_set_kind(s, "jeff") == HK_OK);
    CHECK(hk_scenario_set_kind(s, "unknown") == HK_ERR_INVALID_ARGUMENT);
    CHECK(hk_scenario_set_threads(s, 0) == HK_ERR_INVALID_ARGUMENT);
    size_t need = 0;
    REQUIRE(hk_scenario_config_json(s, nullptr, 0, &need) == HK_OK);
    std::string cfg(need, '\0');
    REQUIRE(hk_scenario_config_json(s, cfg.data(), cfg.size(), &need) == HK_OK);
    CHECK(cfg.find("\"jeff\"") != std::string::npos);
    hk_scenario_free(s);
}
