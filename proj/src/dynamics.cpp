#include "opo/dynamics.hpp"

#include <cmath>

#include "opo/errors.hpp"

namespace opo {

const char* to_string(Representation r) {
    return r == Representation::PositiveP ? "positive-p" : "wigner";
}

const char* to_string(LinearizationMode m) {
    return m == LinearizationMode::FullNonlinear ? "nonlinear" : "linearized";
}

bool PhaseState::finite() const {
    for (std::size_t i = 0; i < size(); ++i)
        if (!std::isfinite(a[i].real()) || !std::isfinite(a[i].imag())) return false;
    return true;
}

OpoSystem::OpoSystem(Representation rep, LinearizationMode mode, const ScaledParams& s)
    : rep_(rep), mode_(mode), params_(s) {
    s.validate();
    chi_ = s.chi();
    drive_ = s.drive();
    gamma_r_ = s.gamma_r;
    pump_clamp_ = drive_ / gamma_r_;
    sqrt_gamma_r_ = std::sqrt(gamma_r_);
    linear_noise_amp_ = std::sqrt(chi_ * pump_clamp_);
}

void OpoSystem::check_shape(const PhaseState& x) const {
    if (x.rep != rep_) throw UsageError("phase state representation does not match the system");
}

void OpoSystem::drift_into(const std::array<cplx, 4>& x, std::array<cplx, 4>& out) const {
    const bool linear = mode_ == LinearizationMode::Linearized;
    if (rep_ == Representation::PositiveP) {
        const cplx a1 = x[0], a1p = x[1], a2 = x[2], a2p = x[3];
        const cplx p = linear ? cplx(pump_clamp_) : a2;
        const cplx pp = linear ? cplx(pump_clamp_) : a2p;
        out[0] = -a1 + chi_ * a1p * p;
        out[1] = -a1p + chi_ * a1 * pp;
        if (linear) {
            out[2] = drive_ - gamma_r_ * a2;
            out[3] = drive_ - gamma_r_ * a2p;
        } else {
            out[2] = -gamma_r_ * a2 + drive_ - 0.5 * chi_ * a1 * a1;
            out[3] = -gamma_r_ * a2p + drive_ - 0.5 * chi_ * a1p * a1p;
        }
    } else {
        const cplx a1 = x[0], a2 = x[1];
        const cplx p = linear ? cplx(pump_clamp_) : a2;
        out[0] = -a1 + chi_ * std::conj(a1) * p;
        out[1] = linear ? drive_ - gamma_r_ * a2 : -gamma_r_ * a2 + drive_ - 0.5 * chi_ * a1 * a1;
        out[2] = 0.0;
        out[3] = 0.0;
    }
}

void OpoSystem::noise_into(const std::array<cplx, 4>& x, const NoiseIncrement& w,
                           std::array<cplx, 4>& out) const {
    if (rep_ == Representation::PositiveP) {
        if (mode_ == LinearizationMode::Linearized) {
            out[0] = linear_noise_amp_ * w.dw[0];
            out[1] = linear_noise_amp_ * w.dw[1];
        } else {
            // principal branch; the sign ambiguity is irrelevant for symmetric dw
            out[0] = std::sqrt(chi_ * x[2]) * w.dw[0];
            out[1] = std::sqrt(chi_ * x[3]) * w.dw[1];
        }
        out[2] = 0.0;
        out[3] = 0.0;
    } else {
        out[0] = w.dw[0];
        out[1] = sqrt_gamma_r_ * w.dw[1];
        out[2] = 0.0;
        out[3] = 0.0;
    }
}

PhaseState OpoSystem::drift(const PhaseState& x) const {
    check_shape(x);
    PhaseState out = PhaseState::zero(rep_);
    drift_into(x.a, out.a);
    return out;
}

PhaseState OpoSystem::noise(const PhaseState& x, const NoiseIncrement& w) const {
    check_shape(x);
    PhaseState out = PhaseState::zero(rep_);
    noise_into(x.a, w, out.a);
    return out;
}

PhaseState OpoSystem::stratonovich_correction(const PhaseState& x) const {
    check_shape(x);
    // B[k][j]: amplitude k driven by noise channel j; dB[k][j][l] = d B_kj / d x_l.
    std::array<std::array<cplx, 2>, 4> b{};
    std::array<std::array<std::array<cplx, 4>, 2>, 4> db{};
    if (rep_ == Representation::PositiveP) {
        if (mode_ == LinearizationMode::Linearized) {
            b[0][0] = linear_noise_amp_;
            b[1][1] = linear_noise_amp_;
        } else {
            const cplx s2 = std::sqrt(chi_ * x.a[2]);
            const cplx s2p = std::sqrt(chi_ * x.a[3]);
            b[0][0] = s2;
            b[1][1] = s2p;
            if (s2 != 0.0) db[0][0][2] = 0.5 * chi_ / s2;
            if (s2p != 0.0) db[1][1][3] = 0.5 * chi_ / s2p;
        }
    } else {
        b[0][0] = 1.0;
        b[1][1] = sqrt_gamma_r_;
    }
    PhaseState out = PhaseState::zero(rep_);
    const std::size_t n = x.size();
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t l = 0; l < n; ++l) acc += b[l][j] * db[k][j][l];
        out.a[k] = 0.5 * acc;
    }
    return out;
}

PhaseState OpoSystem::embed(const ClassicalState& c) const {
    if (rep_ == Representation::PositiveP)
        return PhaseState::positive_p(c.alpha1, std::conj(c.alpha1), c.alpha2, std::conj(c.alpha2));
    return PhaseState::wigner(c.alpha1, c.alpha2);
}

PhaseState drift(Representation rep, LinearizationMode mode, const PhaseState& x,
                 const ScaledParams& s) {
    return OpoSystem(rep, mode, s).drift(x);
}

PhaseState noise_increment(Representation rep, LinearizationMode mode, const PhaseState& x,
                           const ScaledParams& s, const NoiseIncrement& w) {
    return OpoSystem(rep, mode, s).noise(x, w);
}

}  // namespace opo
