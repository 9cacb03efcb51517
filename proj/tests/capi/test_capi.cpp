#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "opo/opo.h"

extern "C" int opo_c_header_smoke(void);

using doctest::Approx;

namespace {

opo_params params(double g2, double mu, double gr) {
    opo_params p;
    REQUIRE(opo_params_from_g2(g2, mu, gr, &p) == OPO_OK);
    return p;
}

opo_grid small_grid() {
    opo_grid g;
    opo_grid_default(&g);
    g.tau_max = 100.0;
    g.tau_discard = 50.0;
    return g;
}

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("header compiles as C") { CHECK(opo_c_header_smoke() == 0); }

TEST_CASE("status names and version") {
    CHECK(std::string(opo_status_name(OPO_OK)) == "ok");
    CHECK(std::string(opo_status_name(OPO_ERR_DOMAIN)) == "domain");
    CHECK(std::strlen(opo_version()) > 0);
}

TEST_CASE("parameter errors carry messages") {
    opo_params p;
    CHECK(opo_params_from_g2(0.0, 0.5, 1.0, &p) == OPO_ERR_PARAMETER);
    CHECK(std::string(opo_last_error()).find("g^2") != std::string::npos);
    CHECK(opo_params_from_g2(1e-3, 0.5, 1.0, nullptr) == OPO_ERR_USAGE);
    p = params(1e-3, 1.0, 1.0);
    double v;
    CHECK(opo_analytic_v0(&p, &v) == OPO_ERR_DOMAIN);
}

TEST_CASE("physical round trip and thresholds") {
    const opo_params p = params(1e-3, 0.9, 0.5);
    opo_physical ph;
    REQUIRE(opo_params_to_physical(&p, 2.0, &ph) == OPO_OK);
    opo_params q;
    REQUIRE(opo_params_from_physical(&ph, &q) == OPO_OK);
    CHECK(q.g == Approx(p.g));
    CHECK(q.mu == Approx(0.9));
    CHECK(q.gamma_r == Approx(0.5));
    double nc, ic, ec;
    REQUIRE(opo_thresholds(&p, &nc, &ic, &ec) == OPO_OK);
    CHECK(nc == Approx(1000.0));
    CHECK(ic == Approx(250.0));
    opo_classical_state st[2];
    size_t n = 0;
    const opo_params above = params(1e-3, 2.0, 0.5);
    REQUIRE(opo_classical_steady_state(&above, st, 2, &n) == OPO_OK);
    CHECK(n == 2);
    CHECK(st[0].re_alpha1 == Approx(-st[1].re_alpha1));
    REQUIRE(opo_classical_steady_state(&above, st, 1, &n) == OPO_OK);
    CHECK(n == 2);
}

TEST_CASE("warnings buffer") {
    const opo_params p = params(0.05, 0.999, 0.5);
    char buf[512];
    size_t n = 0;
    REQUIRE(opo_params_warnings(&p, buf, sizeof buf, &n) == OPO_OK);
    CHECK(n == 2);
    CHECK(std::strchr(buf, '\n') != nullptr);
}

TEST_CASE("analytic entry points") {
    const opo_params p = params(1e-3, 0.9, 0.5);
    opo_analytic_moments m;
    REQUIRE(opo_analytic_moments_eval(&p, OPO_POSITIVE_P, &m) == OPO_OK);
    CHECK(std::abs(m.y1_op_offset - 0.0272) <= 1e-4);
    CHECK(m.has_wigner_terms == 0);
    double V, dV, S, V0;
    REQUIRE(opo_analytic_spectrum(&p, OPO_POSITIVE_P, 0.0, &V) == OPO_OK);
    REQUIRE(opo_analytic_spectrum_correction(&p, OPO_POSITIVE_P, 0.0, &dV) == OPO_OK);
    REQUIRE(opo_linear_spectrum(0.9, 0.0, OPO_QUAD_Y, &S, &V0) == OPO_OK);
    CHECK(V == Approx(V0 + dV).epsilon(1e-14));
    REQUIRE(opo_analytic_v0(&p, &V0) == OPO_OK);
    CHECK(V == Approx(V0).epsilon(1e-13));
    double sc, un;
    const opo_params t = params(1e-4, 0.5, 2.0);
    REQUIRE(opo_analytic_triple(&t, OPO_POSITIVE_P, &sc, &un) == OPO_OK);
    CHECK(un == Approx(8.3333e-4).epsilon(1e-4));
    double re, im;
    CHECK(opo_analytic_triple_spectrum(0.5, 2.0, 1.0, 1.0, 1.0, &re, &im) == OPO_ERR_DOMAIN);
    opo_optimum o;
    REQUIRE(opo_optimal_drive(0.01, std::sqrt(1e-3), OPO_OPT_DIRECT_SCAN, OPO_QUINTIC_CORRECTED, &o) == OPO_OK);
    CHECK(o.regime == OPO_REGIME_DIRECT_SCAN);
    CHECK(opo_optimal_drive(0.01, std::sqrt(1e-3), 7, OPO_QUINTIC_CORRECTED, &o) != OPO_OK);
}

TEST_CASE("run lifecycle") {
    const opo_params p = params(1e-3, 0.9, 0.5);
    const opo_grid g = small_grid();
    size_t bins = 0;
    REQUIRE(opo_grid_bins(&g, &bins) == OPO_OK);
    CHECK(bins == 500);
    opo_ensemble e;
    opo_ensemble_default(&e);
    e.n_traj = 20;
    e.paired = 1;
    opo_run* run = nullptr;
    REQUIRE(opo_run_create(&p, &g, &e, &run) == OPO_OK);
    opo_moment_set m;
    CHECK(opo_run_moments(run, &m) == OPO_ERR_USAGE);  // not executed
    REQUIRE(opo_run_request_moments(run) == OPO_OK);
    REQUIRE(opo_run_request_spectrum(run, 1, 1.5707963267948966, 0.0) == OPO_OK);
    REQUIRE(opo_run_request_delta(run, 1, 1.5707963267948966, 2.0) == OPO_OK);
    const auto path = std::filesystem::temp_directory_path() / "opo_capi_dump.csv";
    REQUIRE(opo_run_request_dump(run, 4, path.string().c_str()) == OPO_OK);
    size_t calls = 0;
    REQUIRE(opo_run_set_progress(run, [](size_t, size_t, void* u) { ++*static_cast<size_t*>(u); }, &calls) ==
            OPO_OK);
    REQUIRE(opo_run_execute(run) == OPO_OK);
    CHECK(calls > 0);
    CHECK(opo_run_execute(run) == OPO_ERR_USAGE);
    opo_report r;
    REQUIRE(opo_run_report(run, &r) == OPO_OK);
    CHECK(r.n_traj == 20);
    CHECK(r.reliable == 1);
    REQUIRE(opo_run_moments(run, &m) == OPO_OK);
    CHECK(m.has_triple_112 == 1);
    CHECK(m.n_used == 20);
    opo_spectrum* s = nullptr;
    REQUIRE(opo_run_spectrum(run, OPO_DELTA, &s) == OPO_OK);
    opo_spectrum_info info;
    REQUIRE(opo_spectrum_info_get(s, &info) == OPO_OK);
    CHECK(info.window == Approx(50.0));
    const size_t n = opo_spectrum_size(s);
    CHECK(n % 2 == 1);
    opo_spectrum_row row;
    REQUIRE(opo_spectrum_row_get(s, n / 2, &row) == OPO_OK);
    CHECK(row.omega_dft == 0.0);
    CHECK(opo_spectrum_row_get(s, n, &row) == OPO_ERR_PARAMETER);
    opo_spectrum_destroy(s);
    std::ifstream is(path);
    std::string header;
    std::getline(is, header);
    CHECK(header.rfind("tau,", 0) == 0);
    std::filesystem::remove(path);
    opo_run_destroy(run);
}

TEST_CASE("run argument checks") {
    const opo_grid g = small_grid();
    opo_ensemble e;
    opo_ensemble_default(&e);
    opo_run* run = nullptr;
    const opo_params above = params(1e-3, 1.0, 0.5);
    CHECK(opo_run_create(&above, &g, &e, &run) == OPO_ERR_PARAMETER);
    CHECK(run == nullptr);
    const opo_params p = params(1e-3, 0.5, 0.5);
    e.paired = 0;
    e.n_traj = 5;
    REQUIRE(opo_run_create(&p, &g, &e, &run) == OPO_OK);
    CHECK(opo_run_request_delta(run, 1, 0.0, 0.0) == OPO_ERR_ESTIMATOR);
    CHECK(opo_run_request_moments(run) == OPO_ERR_ESTIMATOR);  // fewer than 10 trajectories
    opo_run_destroy(run);
    opo_run_destroy(nullptr);
}

}
