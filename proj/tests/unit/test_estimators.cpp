#include "doctest.h"

#include <cmath>
#include <numbers>

#include "opo/errors.hpp"
#include "opo/estimators.hpp"
#include "opo/integrator.hpp"
#include "oracles.hpp"

using namespace opo;
using doctest::Approx;

namespace {

constexpr std::size_t kBins = 96;
constexpr double kDt = 0.1;

SimGrid grid_for(std::size_t bins) {
    SimGrid g;
    g.dtau = kDt;
    g.tau_discard = 0.0;
    g.tau_max = kDt * static_cast<double>(bins);
    return g;
}

// Deterministic pseudo-random bin content, distinct per trajectory.
cplx pattern(std::uint64_t traj, std::size_t n, int field) {
    const double t = static_cast<double>(n);
    const double a = std::sin(0.37 * t * (1 + traj % 5) + 0.11 * traj + field);
    const double b = std::cos(1.3 * t + 0.7 * traj * traj + 2.0 * field) * 0.5;
    return {a + 0.2 * traj, b};
}

TrajectoryRecord synthetic(Representation rep, std::uint64_t traj, std::size_t bins = kBins) {
    TrajectoryRecord r;
    r.index = traj;
    r.rep = rep;
    r.params = ScaledParams::from_g2(1e-3, 0.5, 0.4);
    r.dtau = kDt;
    r.bins.resize(bins);
    for (std::size_t n = 0; n < bins; ++n) {
        BinSample& b = r.bins[n];
        b.x1 = pattern(traj, n, 0);
        b.y1 = pattern(traj, n, 1);
        b.x2 = pattern(traj, n, 2);
        b.y2 = pattern(traj, n, 3);
        b.x1_end = b.x1;
        b.y1_end = b.y1;
        b.y2_end = b.y2;
        b.x1_sq = b.x1 * b.x1;
        b.y1_sq = b.y1 * b.y1;
        b.triple = b.x1 * b.y1 * b.y2;
        b.noise = {pattern(traj, n, 4) * 0.1, pattern(traj, n, 5) * 0.1};
    }
    return r;
}

std::vector<TrajectoryRecord> ensemble(Representation rep, std::size_t n) {
    std::vector<TrajectoryRecord> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(synthetic(rep, i));
    return out;
}

// Reference spectrum for mode 1 at angle theta, written from the definitions.
std::vector<double> reference(const std::vector<TrajectoryRecord>& recs, Representation rep, double theta,
                              long K) {
    const double T = kDt * kBins;
    const double c = std::cos(theta), s = std::sin(theta);
    const bool pp = rep == Representation::PositiveP;
    std::vector<std::vector<cplx>> Y;
    for (const auto& r : recs) {
        std::vector<cplx> q(kBins);
        for (std::size_t n = 0; n < kBins; ++n) {
            const auto& b = r.bins[n];
            q[n] = c * b.x1 + s * b.y1;
            if (!pp)
                q[n] = std::sqrt(2.0) * q[n] - std::sqrt(2.0) * (c * b.noise[0].real() + s * b.noise[0].imag()) / kDt;
        }
        std::vector<cplx> row;
        for (long k = -K; k <= K; ++k) row.push_back(oracle::direct_dft(q, k, kDt));
        Y.push_back(row);
    }
    const double n = static_cast<double>(recs.size());
    std::vector<double> V;
    for (long k = -K; k <= K; ++k) {
        const std::size_t i = static_cast<std::size_t>(k + K), j = static_cast<std::size_t>(K - k);
        cplx sum = 0, my = 0, mz = 0;
        for (const auto& y : Y) {
            const cplx z = pp ? y[j] : std::conj(y[i]);
            sum += y[i] * z;
            my += y[i];
            mz += z;
        }
        const cplx cov = k == 0 ? (sum - my * mz / n) / (n - 1) : sum / n;
        V.push_back((pp ? 1.0 : 0.0) + (pp ? 2.0 : 1.0) * cov.real() / T);
    }
    return V;
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("spectrum matches the direct transform") {
    for (auto rep : {Representation::PositiveP, Representation::TruncatedWigner})
        for (double theta : {std::numbers::pi / 2, 0.0, 0.8}) {
            const auto recs = ensemble(rep, 23);
            const double wmax = 2.0 * std::numbers::pi / (kDt * kBins) * 7.5;
            const auto est = estimate_output_spectrum(recs, rep, {1, theta}, wmax);
            REQUIRE(est.size() == 15);
            const auto ref = reference(recs, rep, theta, 7);
            for (std::size_t i = 0; i < est.size(); ++i) CHECK(est.V[i] == Approx(ref[i]).epsilon(1e-10));
            CHECK(est.omega_dft[est.zero_index()] == 0.0);
            CHECK(est.warped);
            const double w = est.omega_dft.back();
            CHECK(est.omega.back() == Approx(2.0 / kDt * std::tan(w * kDt / 2)));
            CHECK(est.window == Approx(kDt * kBins));
        }
}

TEST_CASE("pump mode spectrum folds in the pump output coupling") {
    auto recs = ensemble(Representation::PositiveP, 20);
    auto shifted = recs;
    for (auto& r : shifted)
        for (auto& b : r.bins) b.y1 = b.y2;
    const auto a = estimate_output_spectrum(recs, Representation::PositiveP, QuadratureSelector::y(2));
    const auto b = estimate_output_spectrum(shifted, Representation::PositiveP, QuadratureSelector::y(1));
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a.V[i] - 1.0 == Approx(0.4 * (b.V[i] - 1.0)).epsilon(1e-10));
}

TEST_CASE("batch standard errors") {
    // Ten identical batches give zero spread.
    std::vector<TrajectoryRecord> recs;
    for (std::size_t i = 0; i < 20; ++i) {
        recs.push_back(synthetic(Representation::PositiveP, i % 2));
        recs.back().index = i;
    }
    const auto est = estimate_output_spectrum(recs, Representation::PositiveP);
    for (std::size_t i = 0; i < est.size(); ++i)
        if (i != est.zero_index()) CHECK(est.std_error[i] == Approx(0.0).epsilon(1e-12));
    const auto m = estimate_moments(recs, Representation::PositiveP);
    CHECK(m.y1_sq.std_error == Approx(0.0).epsilon(1e-12));
}

TEST_CASE("moments are time and ensemble averages") {
    const auto recs = ensemble(Representation::PositiveP, 10);
    cplx sum = 0, triple = 0;
    for (const auto& r : recs)
        for (const auto& b : r.bins) {
            sum += b.y1_sq;
            triple += b.triple;
        }
    const double n = 10.0 * kBins;
    const auto m = estimate_moments(recs, Representation::PositiveP);
    CHECK(m.y1_sq.value == Approx(sum.real() / n).epsilon(1e-12));
    CHECK(m.y1_sq.imag == Approx(sum.imag() / n).epsilon(1e-12));
    CHECK(m.y1_op_sq.value == Approx(1.0 + sum.real() / n).epsilon(1e-12));
    CHECK(m.y1_op_offset.value == Approx(0.5 + sum.real() / n).epsilon(1e-12));
    CHECK(m.triple.value == Approx(triple.real() / n).epsilon(1e-12));
    CHECK(std::string(m.ordering()) == "normal");
    CHECK_FALSE(m.triple_112.has_value());
    const auto w = estimate_moments(ensemble(Representation::TruncatedWigner, 10), Representation::TruncatedWigner);
    CHECK(w.y1_op_sq.value == w.y1_sq.value);
    CHECK(std::string(w.ordering()) == "symmetric");
}

TEST_CASE("paired triple projection") {
    const auto nl = ensemble(Representation::PositiveP, 10);
    auto lin = nl;
    for (auto& r : lin)
        for (auto& b : r.bins) b.y2_end *= 0.5;
    cplx acc = 0;
    for (std::size_t t = 0; t < nl.size(); ++t)
        for (std::size_t n = 0; n < kBins; ++n) {
            const auto& l = lin[t].bins[n];
            acc += l.x1_end * l.y1_end * (nl[t].bins[n].y2_end - l.y2_end);
        }
    const auto m = estimate_moments(nl, Representation::PositiveP, lin);
    REQUIRE(m.triple_112.has_value());
    CHECK(m.triple_112->value == Approx(acc.real() / (10.0 * kBins)).epsilon(1e-12));
}

TEST_CASE("identical paired records give an exactly vanishing correction") {
    for (auto rep : {Representation::PositiveP, Representation::TruncatedWigner}) {
        const auto recs = ensemble(rep, 20);
        auto lin = recs;
        for (auto& r : lin) r.mode = LinearizationMode::Linearized;
        const auto d = estimate_delta_spectrum(recs, lin, rep);
        for (std::size_t i = 0; i < d.delta.size(); ++i) {
            CHECK(d.delta.V[i] == 0.0);
            CHECK(d.delta.std_error[i] == 0.0);
        }
        const auto direct = estimate_output_spectrum(recs, rep);
        for (std::size_t i = 0; i < d.linear.size(); ++i) {
            CHECK(d.linear.V[i] == Approx(direct.V[i]).epsilon(1e-12));
            CHECK(d.nonlinear.V[i] == Approx(direct.V[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("delta spectrum equals the difference of the two spectra") {
    for (auto rep : {Representation::PositiveP, Representation::TruncatedWigner}) {
        const auto nl = ensemble(rep, 20);
        auto lin = nl;
        for (auto& r : lin) {
            r.mode = LinearizationMode::Linearized;
            for (auto& b : r.bins) b.y1 *= 0.9;
        }
        const auto d = estimate_delta_spectrum(nl, lin, rep);
        const auto a = estimate_output_spectrum(nl, rep), b = estimate_output_spectrum(lin, rep);
        REQUIRE(a.size() == d.delta.size());
        for (std::size_t i = 0; i < d.delta.size(); ++i)
            CHECK(d.delta.V[i] == Approx(a.V[i] - b.V[i]).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("estimator error paths") {
    const auto few = ensemble(Representation::PositiveP, 9);
    CHECK_THROWS_AS(estimate_output_spectrum(few, Representation::PositiveP), EstimatorError);
    CHECK_THROWS_AS(estimate_moments(few, Representation::PositiveP), EstimatorError);
    std::vector<TrajectoryRecord> short_recs;
    for (std::size_t i = 0; i < 10; ++i) short_recs.push_back(synthetic(Representation::PositiveP, i, 40));
    CHECK_THROWS_AS(estimate_output_spectrum(short_recs, Representation::PositiveP), EstimatorError);
    auto w = ensemble(Representation::TruncatedWigner, 10);
    w[3].noise_recorded = false;
    CHECK_THROWS_AS(estimate_output_spectrum(w, Representation::TruncatedWigner), EstimatorError);
    DeltaSpectrumAccumulator acc(Representation::PositiveP, grid_for(kBins), 10);
    CHECK_THROWS_AS(acc.add(synthetic(Representation::PositiveP, 0), nullptr), EstimatorError);
    CHECK_THROWS_AS(estimate_output_spectrum(ensemble(Representation::PositiveP, 10), Representation::TruncatedWigner),
                    UsageError);
    CHECK_THROWS_AS((QuadratureSelector{3, 0.0}.validate()), ParameterError);
}

TEST_CASE("default frequency range") {
    const SimGrid g = grid_for(kBins);
    CHECK(default_omega_max(g) == Approx(std::numbers::pi / kDt / 4));
}


TEST_CASE("simulated spectra are symmetric in frequency") {
    const auto s = ScaledParams::from_g2(1e-3, 0.9, 0.5);
    SimGrid g;
    g.tau_max = 200.0;
    g.tau_discard = 100.0;
    for (auto rep : {Representation::PositiveP, Representation::TruncatedWigner}) {
        EnsembleSpec e;
        e.n_traj = 40;
        e.rep = rep;
        const auto r = run_ensemble(e, g, s);
        const auto est = estimate_output_spectrum(r.records, rep);
        const std::size_t z = est.zero_index();
        for (std::size_t k = 1; k <= z && z + k < est.size(); ++k) {
            CHECK(est.omega[z + k] == Approx(-est.omega[z - k]));
            CHECK(std::abs(est.V[z + k] - est.V[z - k]) <= 3 * std::max(est.std_error[z + k], est.std_error[z - k]));
        }
    }
}

TEST_CASE("integrated simulated spectrum matches the simulated moment") {
    const double mu = 0.9;
    const auto s = ScaledParams::from_g2(1e-3, mu, 0.5);
    SimGrid g;
    g.tau_max = 400.0;
    g.tau_discard = 200.0;
    EnsembleSpec e;
    e.n_traj = 200;
    const auto r = run_ensemble(e, g, s);
    const auto m = estimate_moments(r.records, e.rep);
    const auto est = estimate_output_spectrum(r.records, e.rep);
    // trapezoid over the resolved band of S = (V - 1) / 2, plus the linear
    // tail beyond the band edge
    double band = 0.0;
    for (std::size_t i = 1; i < est.size(); ++i)
        band += 0.25 * (est.V[i] + est.V[i - 1] - 2.0) * (est.omega[i] - est.omega[i - 1]);
    band /= 2 * std::numbers::pi;
    const double edge = est.omega.back();
    const double tail = -(mu / (1 + mu)) * (1 - 2 / std::numbers::pi * std::atan(edge / (1 + mu)));
    CHECK(std::abs(band + tail - m.y1_sq.value) < 0.05 * std::abs(m.y1_sq.value));
}

}
