#include "opo/analytic.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "opo/errors.hpp"

namespace opo::analytic {

namespace {

void check_mu(double mu) {
    if (!(mu >= 0.0)) throw DomainError("mu must be non-negative");
    if (!(mu < 1.0)) throw DomainError("below-threshold formulas require mu < 1");
}

void check_gamma(double gamma_r) {
    if (!(gamma_r > 0.0) || !std::isfinite(gamma_r)) throw ParameterError("gamma_r must be positive");
}

void check_g(double g) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw ParameterError("g must be non-negative");
}

double sq(double v) { return v * v; }

}  // namespace

LinearSpectrum linear_spectrum(double mu, double omega, Quadrature q) {
    check_mu(mu);
    const double S = q == Quadrature::Y ? -2.0 * mu / (sq(omega) + sq(1.0 + mu))
                                        : 2.0 * mu / (sq(omega) + sq(1.0 - mu));
    return {S, 1.0 + 2.0 * S};
}

AnalyticMomentSet nonlinear_moments(double mu, double gamma_r, double g, Representation rep) {
    check_mu(mu);
    check_gamma(gamma_r);
    check_g(g);
    const double gr = gamma_r;
    const double m2 = 1.0 - mu * mu;
    AnalyticMomentSet m;
    m.rep = rep;
    m.x2_2 = -mu / m2;
    if (rep == Representation::PositiveP) {
        m.y1y1 = -mu / (1.0 + mu);
        m.x1x1 = mu / (1.0 - mu);
        m.y1y3 = mu / (4.0 * (1.0 + mu) * m2) *
                 (mu * gr / (gr + 2.0) +
                  (gr * (1.0 - mu + mu * mu) + 2.0 * (1.0 + mu)) /
                      ((1.0 + mu) * (gr + 2.0 * (1.0 + mu))));
        m.triple_112 = gr / (gr + 2.0) * (mu * mu / m2);
        m.nonlinear_part = 2.0 * g * g * m.y1y3;
        m.y1_op_sq = 1.0 + m.y1y1 + m.nonlinear_part;
    } else {
        m.y1y1 = 1.0 / (1.0 + mu);
        m.x1x1 = 1.0 / (1.0 - mu);
        m.y2y2 = 0.5 * (gr / (gr + 2.0)) / m2 +
                 gr / (2.0 * sq(1.0 + mu) * (gr + 2.0 * (1.0 + mu)));
        m.y1y3 = mu / (4.0 * (1.0 + mu) * m2) *
                 (-gr / (gr + 2.0) +
                  (gr * (2.0 - mu) + 2.0 * (1.0 + mu)) / ((1.0 + mu) * (gr + 2.0 * (1.0 + mu))));
        m.triple_112 = -(gr / (gr + 2.0)) / m2;
        m.triple_sum = 2.0 * gr / (gr + 2.0) / m2;
        m.nonlinear_part = g * g * (*m.y2y2 + 2.0 * m.y1y3);
        m.y1_op_sq = m.y1y1 + m.nonlinear_part;
    }
    return m;
}

double y1_op_sq_closed(double mu, double gamma_r, double g, Representation rep) {
    check_mu(mu);
    check_gamma(gamma_r);
    const double gr = gamma_r, g2 = g * g;
    const double inner = gr + 2.0 * (1.0 + mu);
    if (rep == Representation::PositiveP)
        return 1.0 / (1.0 + mu) +
               g2 * mu / (2.0 * sq(1.0 + mu) * (1.0 - mu)) *
                   (mu * gr / (gr + 2.0) +
                    (gr * (1.0 - mu + mu * mu) + 2.0 * (1.0 + mu)) / ((1.0 + mu) * inner));
    return 1.0 / (1.0 + mu) +
           g2 / (2.0 * (1.0 + mu) * (1.0 - mu * mu)) *
               (gr / (gr + 2.0) +
                (gr * (1.0 + 2.0 * mu - 2.0 * mu * mu) + 2.0 * mu * (1.0 + mu)) / ((1.0 + mu) * inner));
}

double internal_spectrum(double mu, double gamma_r, double g, double omega, Representation rep) {
    check_mu(mu);
    check_gamma(gamma_r);
    const double gr = gamma_r, w2 = omega * omega, g2 = g * g;
    const double D = w2 + sq(1.0 + mu);
    const double a = 1.0 - mu + gr, b = 1.0 + mu + gr;
    if (rep == Representation::PositiveP) {
        const double br = (w2 + 1.0 - mu * mu) / (2.0 * mu * gr * (1.0 - mu * mu)) +
                          ((a * (1.0 + mu)) - w2) / ((1.0 - mu) * (w2 + a * a)) -
                          ((b * (1.0 + mu)) - w2) / ((1.0 + mu) * (w2 + b * b));
        // mu^2 * br stays finite as mu -> 0
        const double lin = -2.0 * mu / D;
        if (mu == 0.0) return lin;
        return lin + 2.0 * g2 * mu * mu * gr / (D * D) * br;
    }
    const double br = 2.0 * mu * (1.0 + mu) / (gr * (1.0 - mu * mu)) +
                      (a * w2 + (sq(1.0 + mu) + 2.0 * mu * (1.0 + mu)) * b) / ((1.0 + mu) * (w2 + b * b)) +
                      (b * w2 + (1.0 - mu * mu) * a) / ((1.0 - mu) * (w2 + a * a));
    return 2.0 / D + g2 * gr / (D * D) * br;
}

double spectrum_correction(double mu, double gamma_r, double g, double omega, Representation rep) {
    check_mu(mu);
    check_gamma(gamma_r);
    const double gr = gamma_r, w2 = omega * omega, g2 = g * g;
    const double D = w2 + sq(1.0 + mu);
    const double a = 1.0 - mu + gr, b = 1.0 + mu + gr;
    if (rep == Representation::PositiveP) {
        if (mu == 0.0) return 0.0;
        const double br = (w2 + 1.0 - mu * mu) / (2.0 * mu * gr * (1.0 - mu * mu)) +
                          ((a * (1.0 + mu)) - w2) / ((1.0 - mu) * (w2 + a * a)) -
                          ((b * (1.0 + mu)) - w2) / ((1.0 + mu) * (w2 + b * b));
        return 4.0 * g2 * mu * mu * gr / (D * D) * br;
    }
    const double br =
        mu * (1.0 + w2 - mu * mu) / (gr * (1.0 - mu * mu)) +
        (((1.0 - mu) * a - 2.0 * mu * mu) * w2 + a * (1.0 + mu + mu * mu + mu * mu * mu)) /
            ((1.0 - mu) * (w2 + a * a)) +
        (((1.0 + mu) * b + 2.0 * mu * mu) * w2 + b * (1.0 + 3.0 * mu + mu * mu - mu * mu * mu)) /
            ((1.0 + mu) * (w2 + b * b));
    return 2.0 * g2 * gr / (D * D) * br;
}

double nonlinear_spectrum(double mu, double gamma_r, double g, double omega, Representation rep) {
    return linear_spectrum(mu, omega, Quadrature::Y).V +
           spectrum_correction(mu, gamma_r, g, omega, rep);
}

double triple_correlation(double mu, double gamma_r, Representation rep) {
    return nonlinear_moments(mu, gamma_r, 0.0, rep).triple_112;
}

double triple_unscaled(double mu, double gamma_r, double g, Representation rep) {
    check_g(g);
    return g / std::sqrt(2.0 * gamma_r) * triple_correlation(mu, gamma_r, rep);
}

std::complex<double> triple_spectrum(double mu, double gamma_r, double w1, double w2, double w3) {
    check_mu(mu);
    check_gamma(gamma_r);
    if (std::abs(w1 + w2 + w3) > 1e-9 * (1.0 + std::abs(w1) + std::abs(w2) + std::abs(w3)))
        throw DomainError("triple spectrum requires w1 + w2 + w3 = 0");
    const std::complex<double> den = std::complex<double>(gamma_r, w3) *
                                     (w1 * w1 + sq(1.0 - mu)) * (w2 * w2 + sq(1.0 + mu));
    return 4.0 * mu * mu * gamma_r / std::sqrt(2.0 * std::numbers::pi) / den;
}

double v0(double mu, double gamma_r, double g) {
    check_mu(mu);
    check_gamma(gamma_r);
    check_g(g);
    const double gr = gamma_r;
    return 1.0 - 4.0 * mu / sq(1.0 + mu) +
           2.0 * mu * g * g / std::pow(1.0 + mu, 4) *
               (1.0 + 4.0 * gr * mu * mu * (gr + 2.0) / ((1.0 - mu) * (sq(1.0 + gr) - mu * mu)));
}

double quintic_residual(double delta, double gamma_r, double g, QuinticForm form) {
    const double c = gamma_r * (gamma_r + 2.0);
    const double lead = form == QuinticForm::Corrected ? c - 2.0 * delta : 2.0 * delta + c;
    return delta * delta * delta * lead * lead - g * g * c * (4.0 * delta - c);
}

namespace {

OptimumResult quintic(double gamma_r, double g, QuinticForm form) {
    constexpr double eps = 1e-9;
    auto f = [&](double d) { return quintic_residual(d, gamma_r, g, form); };
    // Walk down from -eps on a geometric grid to the first sign change.
    double hi = -eps;
    double f_hi = f(hi);
    double lo = hi;
    bool found = false;
    int steps = 0;
    while (lo > -1.0 + eps) {
        lo = std::max(-1.0 + eps, lo * 1.05 - 1e-6);
        ++steps;
        const double f_lo = f(lo);
        if ((f_lo > 0.0) != (f_hi > 0.0)) {
            found = true;
            break;
        }
        hi = lo;
        f_hi = f_lo;
    }
    if (!found) {
        std::ostringstream os;
        os << "no sign change of the optimum condition on (-1, 0) for gamma_r=" << gamma_r
           << ", g=" << g << " (f(-eps)=" << f(-eps) << ", f(-1+eps)=" << f(-1.0 + eps) << ")";
        throw SolverError(os.str());
    }
    int it = 0;
    while (hi - lo > 1e-12 && it < 200) {
        const double mid = 0.5 * (lo + hi);
        if ((f(mid) > 0.0) == (f_hi > 0.0))
            hi = mid;
        else
            lo = mid;
        ++it;
    }
    OptimumResult r;
    r.delta = 0.5 * (lo + hi);
    r.mu_opt = 1.0 + r.delta;
    r.V_opt = v0(r.mu_opt, gamma_r, g);
    r.regime = Regime::QuinticNumeric;
    r.method = OptimizeMethod::QuinticNumeric;
    r.iterations = steps + it;
    return r;
}

OptimumResult asymptotic(double gamma_r, double g) {
    const double g23 = std::cbrt(g * g);
    OptimumResult r;
    r.method = OptimizeMethod::Asymptotic;
    if (gamma_r >= g23) {
        r.regime = Regime::LargeGammaAsymptotic;
        r.delta = -g23;
        r.V_opt = 0.75 * g23 * g23;
    } else {
        r.regime = Regime::SmallGammaAsymptotic;
        r.delta = -std::sqrt(g) * std::pow(2.0 * gamma_r, 0.25);
        r.V_opt = g * std::sqrt(gamma_r / 2.0);
    }
    if (!(r.delta > -1.0)) throw SolverError("asymptotic optimum lies outside (0, 1)");
    r.mu_opt = 1.0 + r.delta;
    return r;
}

OptimumResult direct_scan(double gamma_r, double g) {
    if (!(g > 0.0)) throw ParameterError("direct scan needs g > 0 for a finite optimum");
    auto f = [&](double mu) { return v0(mu, gamma_r, g); };
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = 1.0 - 1e-15;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    int it = 0;
    while (b - a > 1e-10 && it < 500) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
        ++it;
    }
    OptimumResult r;
    r.mu_opt = 0.5 * (a + b);
    r.delta = r.mu_opt - 1.0;
    r.V_opt = f(r.mu_opt);
    r.regime = Regime::DirectScan;
    r.method = OptimizeMethod::DirectScan;
    r.iterations = it;
    return r;
}

}  // namespace

OptimumResult optimal_drive(double gamma_r, double g, OptimizeMethod method, QuinticForm form) {
    check_gamma(gamma_r);
    if (!(g > 0.0) || !std::isfinite(g)) throw ParameterError("g must be positive");
    switch (method) {
        case OptimizeMethod::QuinticNumeric: return quintic(gamma_r, g, form);
        case OptimizeMethod::Asymptotic: return asymptotic(gamma_r, g);
        case OptimizeMethod::DirectScan: return direct_scan(gamma_r, g);
    }
    throw UsageError("unknown optimize method");
}

const char* to_string(OptimizeMethod m) {
    switch (m) {
        case OptimizeMethod::QuinticNumeric: return "QuinticNumeric";
        case OptimizeMethod::Asymptotic: return "Asymptotic";
        case OptimizeMethod::DirectScan: return "DirectScan";
    }
    return "?";
}

const char* to_string(Regime r) {
    switch (r) {
        case Regime::QuinticNumeric: return "QuinticNumeric";
        case Regime::LargeGammaAsymptotic: return "LargeGammaAsymptotic";
        case Regime::SmallGammaAsymptotic: return "SmallGammaAsymptotic";
        case Regime::DirectScan: return "DirectScan";
    }
    return "?";
}

const char* to_string(QuinticForm f) {
    return f == QuinticForm::Corrected ? "corrected" : "as_printed";
}

}  // namespace opo::analytic
