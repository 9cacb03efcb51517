#include "doctest.h"

#include <cmath>

#include "opo/errors.hpp"
#include "opo/model.hpp"

using namespace opo;
using doctest::Approx;

TEST_SUITE("model") {

TEST_CASE("scaled parameters from g^2") {
    const auto s = ScaledParams::from_g2(1e-3, 0.9, 0.5);
    CHECK(s.g == Approx(std::sqrt(1e-3)).epsilon(1e-15));
    CHECK(s.chi() == Approx(std::sqrt(1e-3) * 1.0).epsilon(1e-14));  // g sqrt(2 * 0.5)
    CHECK(s.n_c() == Approx(1000.0).epsilon(1e-14));
    CHECK(s.i_c() == Approx(250.0).epsilon(1e-14));
    // chi times the clamped pump amplitude is the drive ratio
    CHECK(s.chi() * s.pump_amplitude() == Approx(0.9).epsilon(1e-14));
    CHECK(s.drive() / s.e_c() == Approx(0.9).epsilon(1e-14));
}

TEST_CASE("physical round trip") {
    PhysicalParams p;
    p.gamma1 = 2.0;
    p.gamma2 = 0.7;
    p.chi = 0.03;
    p.drive = 25.0;
    const auto s = scale_params(p);
    CHECK(s.g == Approx(0.03 / std::sqrt(2 * 2.0 * 0.7)));
    CHECK(s.mu == Approx(0.03 * 25.0 / (2.0 * 0.7)));
    CHECK(s.gamma_r == Approx(0.35));
    const auto q = unscale_params(s, 2.0);
    CHECK(q.gamma2 == Approx(0.7));
    CHECK(q.chi == Approx(0.03));
    CHECK(q.drive == Approx(25.0));
    CHECK(p.critical_drive() == Approx(2.0 * 0.7 / 0.03));
}

TEST_CASE("validation") {
    CHECK_THROWS_AS(ScaledParams::from_g2(0.0, 0.5, 1.0), ParameterError);
    CHECK_THROWS_AS(ScaledParams::from_g2(-1e-3, 0.5, 1.0), ParameterError);
    CHECK_THROWS_AS(ScaledParams::from_g2(1e-3, -0.1, 1.0), ParameterError);
    CHECK_THROWS_AS(ScaledParams::from_g2(1e-3, 0.5, 0.0), ParameterError);
    CHECK_THROWS_AS(ScaledParams::from_g2(1e-3, NAN, 1.0), ParameterError);
    PhysicalParams p;
    p.chi = 0.1;
    p.nbar1 = 0.1;
    CHECK_THROWS_AS(p.validate(), ParameterError);
}

TEST_CASE("warnings") {
    CHECK(ScaledParams::from_g2(1e-3, 0.9, 0.5).warnings().empty());
    CHECK(ScaledParams::from_g2(0.02, 0.5, 0.5).warnings().size() == 1);
    CHECK(ScaledParams::from_g2(1e-3, 0.995, 0.5).warnings().size() == 1);
    CHECK(ScaledParams::from_g2(1e-3, 1.2, 0.5).warnings().size() == 1);
}

// Drift of the classical equations written out independently.
static void classical_drift(const ScaledParams& s, std::complex<double> a1, std::complex<double> a2,
                            std::complex<double>& d1, std::complex<double>& d2) {
    const double chi = s.g * std::sqrt(2.0 * s.gamma_r);
    const double E = s.mu * std::sqrt(s.gamma_r / 2.0) / s.g;
    d1 = -a1 + chi * std::conj(a1) * a2;
    d2 = -s.gamma_r * a2 + E - 0.5 * chi * a1 * a1;
}

TEST_CASE("classical steady states are fixed points") {
    for (double mu : {0.0, 0.3, 0.99, 1.0, 1.5, 4.0}) {
        const auto s = ScaledParams::from_g2(1e-3, mu, 0.7);
        const auto states = classical_steady_state(s);
        CHECK(states.size() == (mu < 1.0 ? 1u : 2u));
        for (const auto& c : states) {
            std::complex<double> d1, d2;
            classical_drift(s, c.alpha1, c.alpha2, d1, d2);
            CHECK(std::abs(d1) < 1e-10 * (1 + std::abs(c.alpha1)));
            CHECK(std::abs(d2) < 1e-10 * (1 + std::abs(c.alpha2)));
            CHECK(c.above_threshold() == (mu >= 1.0));
        }
    }
    const auto above = classical_steady_state(ScaledParams::from_g2(1e-3, 2.0, 0.7));
    CHECK(above[0].alpha1 == -above[1].alpha1);
    CHECK(std::string(to_string(above[0].branch)) == "above+");
}


TEST_CASE("signal amplitude is continuous at threshold") {
    const double gr = 0.5;
    for (double mu : {0.5, 0.99, 0.99999}) CHECK(std::abs(classical_steady_state(ScaledParams::from_g2(1e-3, mu, gr))[0].alpha1) == 0.0);
    double prev = 1e300;
    for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
        const double a = std::abs(classical_steady_state(ScaledParams::from_g2(1e-3, 1.0 + eps, gr))[0].alpha1);
        CHECK(a < prev);
        prev = a;
    }
    CHECK(prev < 1e-2);
}

}
