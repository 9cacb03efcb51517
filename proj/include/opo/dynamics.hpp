#pragma once

#include <array>
#include <cstddef>

#include "opo/model.hpp"

namespace opo {

enum class Representation { PositiveP, TruncatedWigner };
enum class LinearizationMode { FullNonlinear, Linearized };

const char* to_string(Representation r);
const char* to_string(LinearizationMode m);

/// A point in c-number phase space. Positive-P carries the independent
/// amplitudes (alpha1, alpha1+, alpha2, alpha2+); the truncated Wigner state
/// carries (alpha1, alpha2) in the first two slots and takes conjugates for the
/// "plus" amplitudes. The same type holds drift and noise increments.
struct PhaseState {
    Representation rep = Representation::PositiveP;
    std::array<cplx, 4> a{};

    static PhaseState positive_p(cplx a1, cplx a1p, cplx a2, cplx a2p) {
        return {Representation::PositiveP, {a1, a1p, a2, a2p}};
    }
    static PhaseState wigner(cplx a1, cplx a2) {
        return {Representation::TruncatedWigner, {a1, a2, 0.0, 0.0}};
    }
    static PhaseState zero(Representation r) { return {r, {}}; }

    std::size_t size() const { return rep == Representation::PositiveP ? 4 : 2; }

    cplx alpha1() const { return a[0]; }
    cplx alpha1_plus() const { return rep == Representation::PositiveP ? a[1] : std::conj(a[0]); }
    cplx alpha2() const { return rep == Representation::PositiveP ? a[2] : a[1]; }
    cplx alpha2_plus() const { return rep == Representation::PositiveP ? a[3] : std::conj(a[1]); }

    // Quadratures x = alpha + alpha+, y = (alpha - alpha+) / i.
    cplx x1() const { return alpha1() + alpha1_plus(); }
    cplx y1() const { return cplx(0.0, -1.0) * (alpha1() - alpha1_plus()); }
    cplx x2() const { return alpha2() + alpha2_plus(); }
    cplx y2() const { return cplx(0.0, -1.0) * (alpha2() - alpha2_plus()); }

    bool finite() const;
};

/// Gaussian increments for one step. Positive-P uses two real increments
/// (imaginary parts zero) with variance dtau; the Wigner equations use two
/// complex increments with <dw dw*> = dtau and <dw dw> = 0.
struct NoiseIncrement {
    std::array<cplx, 2> dw{};
};

/// Drift and diffusion of the OPO equations in gamma1 = 1 units with the
/// constants precomputed. This is the form the integrator uses per step.
class OpoSystem {
public:
    OpoSystem(Representation rep, LinearizationMode mode, const ScaledParams& s);

    Representation representation() const { return rep_; }
    LinearizationMode mode() const { return mode_; }
    const ScaledParams& params() const { return params_; }

    /// Deterministic rate of change. Throws UsageError on a shape mismatch.
    PhaseState drift(const PhaseState& x) const;
    /// Stochastic increment B(x) w for one step.
    PhaseState noise(const PhaseState& x, const NoiseIncrement& w) const;

    /// Drift correction (1/2) sum_{j,l} B_lj d_l B_kj converting the Ito form
    /// to Stratonovich form, with holomorphic derivatives.
    PhaseState stratonovich_correction(const PhaseState& x) const;

    /// Classical state embedded in this representation (alpha+ = conj(alpha)).
    PhaseState embed(const ClassicalState& c) const;

    // Unchecked kernels for the stepping loop.
    void drift_into(const std::array<cplx, 4>& x, std::array<cplx, 4>& out) const;
    void noise_into(const std::array<cplx, 4>& x, const NoiseIncrement& w,
                    std::array<cplx, 4>& out) const;

private:
    void check_shape(const PhaseState& x) const;

    Representation rep_;
    LinearizationMode mode_;
    ScaledParams params_;
    double chi_;
    double drive_;
    double gamma_r_;
    double pump_clamp_;
    double sqrt_gamma_r_;
    double linear_noise_amp_;
};

PhaseState drift(Representation rep, LinearizationMode mode, const PhaseState& x,
                 const ScaledParams& s);

PhaseState noise_increment(Representation rep, LinearizationMode mode, const PhaseState& x,
                           const ScaledParams& s, const NoiseIncrement& w);

}  // namespace opo
