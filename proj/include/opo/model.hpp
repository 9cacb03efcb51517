#pragma once

#include <complex>
#include <string>
#include <vector>

namespace opo {

using cplx = std::complex<double>;

/// Rates and drive of the degenerate OPO in physical units. Thermal occupations
/// are carried only so the zero-temperature restriction is explicit.
struct PhysicalParams {
    double gamma1 = 1.0;  ///< signal amplitude decay rate
    double gamma2 = 1.0;  ///< pump amplitude decay rate
    double chi = 0.0;     ///< nonlinear coupling
    double drive = 0.0;   ///< external pump amplitude E
    double nbar1 = 0.0;
    double nbar2 = 0.0;

    /// Throws ParameterError when an invariant is violated.
    void validate() const;

    double critical_drive() const { return gamma1 * gamma2 / chi; }
    /// Intra-cavity pump photon number at threshold, gamma1^2 / chi^2.
    double threshold_photons() const { return gamma1 * gamma1 / (chi * chi); }
    /// Input photon flux at threshold, E_c^2 / (2 gamma2).
    double threshold_flux() const;
};

/// The dimensionless triple (g, mu, gamma_r). Time is measured in units of
/// 1/gamma1 everywhere in the library, so this is the only parameter set the
/// dynamics, estimators and closed forms consume.
struct ScaledParams {
    double g = 0.0;        ///< chi / sqrt(2 gamma1 gamma2)
    double mu = 0.0;       ///< E / E_c
    double gamma_r = 1.0;  ///< gamma2 / gamma1

    static ScaledParams from_g2(double g2, double mu, double gamma_r);

    void validate() const;

    double g2() const { return g * g; }
    /// Threshold pump photon number 1 / (2 g^2 gamma_r).
    double n_c() const { return 1.0 / (2.0 * g * g * gamma_r); }
    /// Threshold input flux in units of gamma1, N_c gamma_r / 2.
    double i_c() const { return 1.0 / (4.0 * g * g); }
    /// Coupling in gamma1 units, g sqrt(2 gamma_r).
    double chi() const;
    /// Critical drive in gamma1 units, gamma_r / chi.
    double e_c() const { return gamma_r / chi(); }
    /// Drive in gamma1 units, mu sqrt(gamma_r / 2) / g.
    double drive() const;
    /// Classical below-threshold pump amplitude E / gamma_r.
    double pump_amplitude() const { return drive() / gamma_r; }

    /// Non-fatal diagnostics: large g, near-threshold perturbative breakdown.
    std::vector<std::string> warnings() const;
};

ScaledParams scale_params(const PhysicalParams& p);

/// Inverse of scale_params at a fixed signal decay rate.
PhysicalParams unscale_params(const ScaledParams& s, double gamma1 = 1.0);

enum class Branch { Below, AbovePlus, AboveMinus };

struct ClassicalState {
    cplx alpha1;
    cplx alpha2;
    Branch branch = Branch::Below;

    bool above_threshold() const { return branch != Branch::Below; }
};

/// Noise-free steady states in gamma1 units: a single state below threshold,
/// both signal branches (+/-) at and above threshold.
std::vector<ClassicalState> classical_steady_state(const ScaledParams& s);

/// Pump quadrature 2 Re(alpha2) expressed in the power-series scaling, where
/// the below-threshold classical value is 2 mu.
double scaled_pump_quadrature(const ClassicalState& c, const ScaledParams& s);

const char* to_string(Branch b);

}  // namespace opo
