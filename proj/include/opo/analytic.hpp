#pragma once

#include <complex>
#include <optional>
#include <string>

#include "opo/dynamics.hpp"

namespace opo::analytic {

// Closed-form below-threshold results in gamma1 = 1 units. Every function
// taking mu throws DomainError for mu >= 1 or mu < 0.

enum class Quadrature { X, Y };

struct LinearSpectrum {
    double S;  ///< internal normally ordered spectrum
    double V;  ///< external variance, 1 + 2 S
};

LinearSpectrum linear_spectrum(double mu, double omega, Quadrature q);

/// Scaled perturbative moments. y2y2 and triple_sum exist only for Wigner.
/// y1_op_sq is the operator moment <y1^2>; nonlinear_part its O(g^2) piece.
struct AnalyticMomentSet {
    Representation rep = Representation::PositiveP;
    double x2_2 = 0.0;        ///< <x2^(2)>
    double y1y1 = 0.0;        ///< <y1^(1) y1^(1)>
    double x1x1 = 0.0;        ///< <x1^(1) x1^(1)>
    double y1y3 = 0.0;        ///< <y1^(1) y1^(3)>
    double triple_112 = 0.0;  ///< <x1^(1) y1^(1) y2^(2)>
    std::optional<double> y2y2;        ///< <y1^(2) y1^(2)>
    std::optional<double> triple_sum;  ///< (1,1,2) + (2,1,1) orders
    double y1_op_sq = 0.0;
    double nonlinear_part = 0.0;

    double y1_op_offset() const { return y1_op_sq - 0.5; }
};

AnalyticMomentSet nonlinear_moments(double mu, double gamma_r, double g, Representation rep);

/// <y1^2> in the printed one-line form (independent of the component sums).
double y1_op_sq_closed(double mu, double gamma_r, double g, Representation rep);

/// Internal squeezing spectrum S(omega) of y1 to O(g^2).
double internal_spectrum(double mu, double gamma_r, double g, double omega, Representation rep);

/// External squeezing spectrum V(omega) of y1 to O(g^2).
double nonlinear_spectrum(double mu, double gamma_r, double g, double omega, Representation rep);

/// The O(g^2) part of nonlinear_spectrum.
double spectrum_correction(double mu, double gamma_r, double g, double omega, Representation rep);

/// Scaled triple moment <x1^(1) y1^(1) y2^(2)>.
double triple_correlation(double mu, double gamma_r, Representation rep);

/// Leading-order <x1 y1 y2> of the unscaled amplitudes: the scaled moment
/// times g / sqrt(2 gamma_r) (the pump quadrature carries that factor).
double triple_unscaled(double mu, double gamma_r, double g, Representation rep);

/// Delta-stripped +P triple spectral correlation; requires w1 + w2 + w3 = 0.
std::complex<double> triple_spectrum(double mu, double gamma_r, double w1, double w2, double w3);

/// External +P variance at zero frequency.
double v0(double mu, double gamma_r, double g);

enum class OptimizeMethod { QuinticNumeric, Asymptotic, DirectScan };
enum class Regime { QuinticNumeric, LargeGammaAsymptotic, SmallGammaAsymptotic, DirectScan };

/// Near-threshold stationarity condition for delta = mu - 1, c = gamma_r (gamma_r + 2).
/// Corrected: delta^3 (c - 2 delta)^2 = g^2 c (4 delta - c), which is what
/// minimizing v0 to leading order gives. AsPrinted keeps (2 delta + c)^2.
enum class QuinticForm { Corrected, AsPrinted };

double quintic_residual(double delta, double gamma_r, double g, QuinticForm form);

struct OptimumResult {
    double mu_opt = 0.0;
    double delta = 0.0;  ///< mu_opt - 1
    double V_opt = 0.0;
    Regime regime = Regime::DirectScan;
    OptimizeMethod method = OptimizeMethod::DirectScan;
    int iterations = 0;
};

OptimumResult optimal_drive(double gamma_r, double g, OptimizeMethod method,
                            QuinticForm form = QuinticForm::Corrected);

const char* to_string(OptimizeMethod m);
const char* to_string(Regime r);
const char* to_string(QuinticForm f);

}  // namespace opo::analytic
