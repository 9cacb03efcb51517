#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "opo/analytic.hpp"
#include "opo/errors.hpp"
#include "oracles.hpp"

using namespace opo;
using namespace opo::analytic;
using doctest::Approx;

namespace {
constexpr auto PP = Representation::PositiveP;
constexpr auto TW = Representation::TruncatedWigner;
}  // namespace

TEST_SUITE("analytic") {

TEST_CASE("linear spectra") {
    for (double mu : {0.0, 0.2, 0.7, 0.99})
        for (double w : {0.0, 0.3, 2.0, 40.0}) {
            const double vy = linear_spectrum(mu, w, Quadrature::Y).V;
            const double vx = linear_spectrum(mu, w, Quadrature::X).V;
            CHECK(vy == Approx(oracle::linear_vy(mu, w)).epsilon(1e-14));
            CHECK(vx == Approx(oracle::linear_vx(mu, w)).epsilon(1e-14));
            CHECK(vx * vy == Approx(1.0).epsilon(1e-12));
        }
    CHECK_THROWS_AS(linear_spectrum(1.0, 0.0, Quadrature::Y), DomainError);
    CHECK_THROWS_AS(linear_spectrum(-0.1, 0.0, Quadrature::Y), DomainError);
}

TEST_CASE("moment assembly agrees with the closed forms") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> umu(0.0, 0.99), ugr(-3, 3), ug(-4, -1);
    for (int i = 0; i < 1000; ++i) {
        const double mu = umu(rng), gr = std::pow(10.0, ugr(rng)), g = std::pow(10.0, 0.5 * ug(rng));
        for (auto rep : {PP, TW}) {
            const auto m = nonlinear_moments(mu, gr, g, rep);
            CHECK(m.y1_op_sq == Approx(y1_op_sq_closed(mu, gr, g, rep)).epsilon(1e-12));
        }
    }
}

TEST_CASE("reference moment value") {
    const auto m = nonlinear_moments(0.9, 0.5, std::sqrt(1e-3), PP);
    CHECK(std::abs(m.y1_op_offset() - 0.0272) <= 1e-4);
    CHECK(m.x1x1 == Approx(9.0));
    CHECK(m.y1y1 == Approx(-0.9 / 1.9));
}

TEST_CASE("v0 is the zero-frequency spectrum") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> umu(0.0, 0.999), ugr(-3, 3), ug(-5, -1);
    for (int i = 0; i < 1000; ++i) {
        const double mu = umu(rng), gr = std::pow(10.0, ugr(rng)), g = std::pow(10.0, 0.5 * ug(rng));
        const double a = v0(mu, gr, g), b = nonlinear_spectrum(mu, gr, g, 0.0, PP);
        CHECK(std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(b)) + 1e-12 * std::abs(b));
    }
}

TEST_CASE("external correction is twice the internal one for positive-P") {
    for (double mu : {0.1, 0.5, 0.9})
        for (double w : {0.0, 0.5, 3.0}) {
            const double g = 0.03, gr = 0.7;
            const double si = internal_spectrum(mu, gr, g, w, PP) - internal_spectrum(mu, gr, 0.0, w, PP);
            CHECK(spectrum_correction(mu, gr, g, w, PP) == Approx(2.0 * si).epsilon(1e-12));
        }
}

TEST_CASE("corrections at zero drive") {
    for (double gr : {0.1, 1.0, 10.0}) {
        CHECK(spectrum_correction(0.0, gr, 0.03, 0.0, PP) == 0.0);
        CHECK(spectrum_correction(0.0, gr, 0.03, 0.0, TW) == Approx(4 * 9e-4 * gr / (1 + gr)).epsilon(1e-12));
    }
}

TEST_CASE("triple correlation is the integral of the triple spectrum") {
    for (auto [mu, gr] : {std::pair{0.5, 2.0}, std::pair{0.3, 0.5}, std::pair{0.8, 5.0}}) {
        const double I = oracle::integrate_plane(
            [&](double w1, double w2) { return triple_spectrum(mu, gr, w1, w2, -w1 - w2).real(); }, 1200);
        CHECK(I / std::pow(2 * std::numbers::pi, 1.5) == Approx(triple_correlation(mu, gr, PP)).epsilon(2e-4));
    }
    CHECK_THROWS_AS(triple_spectrum(0.5, 1.0, 1.0, 1.0, 1.0), DomainError);
}

TEST_CASE("triple signs and scaling") {
    CHECK(triple_correlation(0.5, 2.0, PP) == Approx(1.0 / 6.0));
    CHECK(triple_correlation(0.5, 2.0, TW) < 0.0);
    CHECK(triple_unscaled(0.5, 2.0, 0.01, PP) == Approx(0.01 / 2.0 / 6.0));
    const auto w = nonlinear_moments(0.5, 2.0, 0.01, TW);
    REQUIRE(w.triple_sum.has_value());
    CHECK(*w.triple_sum > 0.0);
}

TEST_CASE("quintic roots against bisection") {
    const double g = std::sqrt(1e-3);
    for (double gr : {0.5, 1.0, 4.0}) {
        const double c = gr * (gr + 2);
        auto f = [&](double d) {
            return d * d * d * (c - 2 * d) * (c - 2 * d) - g * g * c * (4 * d - c);
        };
        const double root = oracle::bisect(f, -0.6, -1e-9);
        const auto r = optimal_drive(gr, g, OptimizeMethod::QuinticNumeric, QuinticForm::Corrected);
        CHECK(r.delta == Approx(root).epsilon(1e-9));
        CHECK(r.mu_opt == Approx(1 + root).epsilon(1e-9));
        // residual relative to the size of the constant term g^2 c^2
        CHECK(std::abs(quintic_residual(r.delta, gr, g, QuinticForm::Corrected)) < 1e-9 * g * g * c * c);
        CHECK(r.V_opt == Approx(v0(r.mu_opt, gr, g)).epsilon(1e-12));
    }
    const auto printed = optimal_drive(0.5, g, OptimizeMethod::QuinticNumeric, QuinticForm::AsPrinted);
    CHECK(printed.delta >= -0.135);
    CHECK(printed.delta <= -0.128);
}

TEST_CASE("direct scan minimizes v0") {
    const double g = std::sqrt(1e-3);
    for (double gr : {0.01, 0.5, 1.0}) {
        const auto r = optimal_drive(gr, g, OptimizeMethod::DirectScan);
        for (double d : {-1e-3, 1e-3})
            if (r.mu_opt + d < 1.0) CHECK(v0(r.mu_opt + d, gr, g) >= r.V_opt);
        CHECK(r.regime == Regime::DirectScan);
    }
}

TEST_CASE("asymptotic branches") {
    const double g = std::sqrt(1e-3);
    const auto large = optimal_drive(1.0, g, OptimizeMethod::Asymptotic);
    CHECK(large.regime == Regime::LargeGammaAsymptotic);
    CHECK(large.mu_opt == Approx(1 - std::pow(g, 2.0 / 3)).epsilon(1e-12));
    CHECK(large.V_opt == Approx(0.75 * std::pow(g, 4.0 / 3)).epsilon(1e-12));
    const auto small = optimal_drive(0.01, g, OptimizeMethod::Asymptotic);
    CHECK(small.regime == Regime::SmallGammaAsymptotic);
    CHECK(small.mu_opt == Approx(0.9331).epsilon(1e-4));
    CHECK(small.V_opt == Approx(2.236e-3).epsilon(1e-3));
    CHECK(std::string(to_string(Regime::SmallGammaAsymptotic)) == "SmallGammaAsymptotic");
}

TEST_CASE("domain checks") {
    CHECK_THROWS_AS(v0(1.0, 1.0, 0.03), DomainError);
    CHECK_THROWS_AS(nonlinear_moments(1.2, 1.0, 0.03, PP), DomainError);
    CHECK_THROWS(optimal_drive(-1.0, 0.03, OptimizeMethod::DirectScan));
}


TEST_CASE("representations agree as gamma_r goes to zero") {
    const double g = std::sqrt(1e-3);
    const double p = spectrum_correction(0.5, 1e-4, g, 0.0, PP);
    const double w = spectrum_correction(0.5, 1e-4, g, 0.0, TW);
    CHECK(std::abs(w - p) / std::abs(p) < 0.01);
}

TEST_CASE("integrated internal spectrum reproduces the normally ordered moment") {
    // Band |omega| <= 50 plus the linear tail beyond it; the band alone
    // misses 2 mu / (pi 50) of the linear part, about 1e-2.
    const double mu = 0.9, gr = 0.5, g = std::sqrt(1e-3), L = 50.0;
    const int n = 200000;
    double band = 0.0;
    for (int i = 0; i < n; ++i) band += internal_spectrum(mu, gr, g, -L + (i + 0.5) * 2 * L / n, PP);
    band *= 2 * L / n / (2 * std::numbers::pi);
    const double tail = -(2 * mu / (1 + mu)) * (1 - 2 / std::numbers::pi * std::atan(L / (1 + mu))) / 2;
    const auto m = nonlinear_moments(mu, gr, g, PP);
    const double normal = m.y1_op_sq - 1.0;
    CHECK(std::abs(band + tail - normal) < 1e-3);
    // the O(g^2) part alone: its tail falls off as 1/L
    auto correction_band = [&](double len) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double w = -len + (i + 0.5) * 2 * len / n;
            acc += internal_spectrum(mu, gr, g, w, PP) - internal_spectrum(mu, gr, 0.0, w, PP);
        }
        return acc * 2 * len / n / (2 * std::numbers::pi);
    };
    const double e50 = std::abs(correction_band(L) - m.nonlinear_part);
    const double e500 = std::abs(correction_band(10 * L) - m.nonlinear_part);
    CHECK(e50 < 0.05 * m.nonlinear_part);
    CHECK(e500 < 0.2 * e50);
}

TEST_CASE("direct scan and quintic optima converge near threshold") {
    // The quintic is the leading near-threshold condition; its optimum differs
    // from the full minimum at the next order, which scales as g^(4/3).
    for (double gr : {0.1, 1.0, 10.0})
        for (double g2 : {1e-4, 1e-5, 1e-6}) {
            const double g = std::sqrt(g2);
            const auto a = optimal_drive(gr, g, OptimizeMethod::DirectScan);
            const auto b = optimal_drive(gr, g, OptimizeMethod::QuinticNumeric);
            CHECK(std::abs(a.mu_opt - b.mu_opt) < 1e-6 + std::pow(g, 4.0 / 3.0));
        }
}

}
