#include "doctest.h"

#include <cmath>

#include "opo/dynamics.hpp"
#include "opo/errors.hpp"

using namespace opo;
using doctest::Approx;

namespace {

const ScaledParams kP = ScaledParams::from_g2(1e-3, 0.8, 0.5);

double chi_of(const ScaledParams& s) { return s.g * std::sqrt(2.0 * s.gamma_r); }
double drive_of(const ScaledParams& s) { return s.mu * std::sqrt(s.gamma_r / 2.0) / s.g; }

bool close(cplx a, cplx b, double tol = 1e-13) { return std::abs(a - b) <= tol * (1.0 + std::abs(b)); }

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("positive-P drift matches the written-out equations") {
    const cplx a1(0.3, -0.2), a1p(0.25, 0.1), a2(20.0, 0.5), a2p(19.0, -0.4);
    const auto d = drift(Representation::PositiveP, LinearizationMode::FullNonlinear,
                         PhaseState::positive_p(a1, a1p, a2, a2p), kP);
    const double chi = chi_of(kP), E = drive_of(kP);
    CHECK(close(d.a[0], -a1 + chi * a1p * a2));
    CHECK(close(d.a[1], -a1p + chi * a1 * a2p));
    CHECK(close(d.a[2], -kP.gamma_r * a2 + E - 0.5 * chi * a1 * a1));
    CHECK(close(d.a[3], -kP.gamma_r * a2p + E - 0.5 * chi * a1p * a1p));
}

TEST_CASE("linearized drift clamps the pump in the signal equations") {
    const cplx a1(0.3, -0.2), a1p(0.25, 0.1), a2(3.0, 0.5), a2p(1.0, -0.4);
    const auto d = drift(Representation::PositiveP, LinearizationMode::Linearized,
                         PhaseState::positive_p(a1, a1p, a2, a2p), kP);
    CHECK(close(d.a[0], -a1 + kP.mu * a1p));
    CHECK(close(d.a[1], -a1p + kP.mu * a1));
    CHECK(close(d.a[2], drive_of(kP) - kP.gamma_r * a2));
}

TEST_CASE("wigner drift and additive noise") {
    const cplx a1(0.3, -0.2), a2(20.0, 0.5);
    const auto x = PhaseState::wigner(a1, a2);
    const auto d = drift(Representation::TruncatedWigner, LinearizationMode::FullNonlinear, x, kP);
    const double chi = chi_of(kP);
    CHECK(close(d.a[0], -a1 + chi * std::conj(a1) * a2));
    CHECK(close(d.a[1], -kP.gamma_r * a2 + drive_of(kP) - 0.5 * chi * a1 * a1));
    NoiseIncrement w;
    w.dw = {cplx(0.1, 0.2), cplx(-0.3, 0.05)};
    const auto b = noise_increment(Representation::TruncatedWigner, LinearizationMode::FullNonlinear, x, kP, w);
    CHECK(close(b.a[0], w.dw[0]));
    CHECK(close(b.a[1], std::sqrt(kP.gamma_r) * w.dw[1]));
    CHECK(x.alpha1_plus() == std::conj(a1));
    CHECK(x.y1() == cplx(2.0 * a1.imag(), 0.0));
}

TEST_CASE("positive-P noise is sqrt(chi alpha2) dw and pump rows are noiseless") {
    const auto x = PhaseState::positive_p(0.1, 0.2, cplx(20.0, 1.0), cplx(19.0, -2.0));
    NoiseIncrement w;
    w.dw = {cplx(0.3, 0.0), cplx(-0.2, 0.0)};
    const OpoSystem sys(Representation::PositiveP, LinearizationMode::FullNonlinear, kP);
    const auto b = sys.noise(x, w);
    const double chi = chi_of(kP);
    CHECK(close(b.a[0] * b.a[0], chi * x.a[2] * 0.09));
    CHECK(close(b.a[1] * b.a[1], chi * x.a[3] * 0.04));
    CHECK(b.a[2] == cplx(0.0));
    CHECK(b.a[3] == cplx(0.0));
    const OpoSystem lin(Representation::PositiveP, LinearizationMode::Linearized, kP);
    CHECK(close(lin.noise(x, w).a[0], std::sqrt(kP.mu) * 0.3));
}

TEST_CASE("stratonovich correction vanishes") {
    for (auto rep : {Representation::PositiveP, Representation::TruncatedWigner})
        for (auto mode : {LinearizationMode::FullNonlinear, LinearizationMode::Linearized}) {
            const OpoSystem sys(rep, mode, kP);
            const auto x = rep == Representation::PositiveP
                               ? PhaseState::positive_p(0.3, 0.1, cplx(5.0, 1.0), cplx(4.0, -1.0))
                               : PhaseState::wigner(cplx(0.3, 0.1), cplx(5.0, 1.0));
            const auto c = sys.stratonovich_correction(x);
            for (auto v : c.a) CHECK(v == cplx(0.0));
        }
}

TEST_CASE("classical state embeds as a fixed point") {
    const OpoSystem sys(Representation::PositiveP, LinearizationMode::FullNonlinear, kP);
    const auto x = sys.embed(classical_steady_state(kP)[0]);
    for (auto v : sys.drift(x).a) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("shape mismatch is a usage error") {
    const OpoSystem sys(Representation::PositiveP, LinearizationMode::FullNonlinear, kP);
    CHECK_THROWS_AS(sys.drift(PhaseState::wigner(0.0, 0.0)), UsageError);
}

}
