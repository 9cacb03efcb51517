#include "opo/model.hpp"

#include <cmath>
#include <sstream>

#include "opo/errors.hpp"

namespace opo {

namespace {

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void PhysicalParams::validate() const {
    if (!finite_positive(gamma1)) throw ParameterError("gamma1 must be positive");
    if (!finite_positive(gamma2)) throw ParameterError("gamma2 must be positive");
    if (!finite_positive(chi)) throw ParameterError("chi must be positive");
    if (!std::isfinite(drive) || drive < 0.0) throw ParameterError("drive must be non-negative");
    if (nbar1 != 0.0 || nbar2 != 0.0)
        throw ParameterError("thermal occupations are restricted to zero");
}

double PhysicalParams::threshold_flux() const {
    const double ec = critical_drive();
    return ec * ec / (2.0 * gamma2);
}

ScaledParams ScaledParams::from_g2(double g2, double mu, double gamma_r) {
    if (!finite_positive(g2)) throw ParameterError("g^2 must be positive");
    ScaledParams s{std::sqrt(g2), mu, gamma_r};
    s.validate();
    return s;
}

void ScaledParams::validate() const {
    if (!finite_positive(g)) throw ParameterError("g must be positive");
    if (!finite_positive(gamma_r)) throw ParameterError("gamma_r must be positive");
    if (!std::isfinite(mu) || mu < 0.0) throw ParameterError("mu must be non-negative");
}

double ScaledParams::chi() const { return g * std::sqrt(2.0 * gamma_r); }

double ScaledParams::drive() const { return mu * std::sqrt(gamma_r / 2.0) / g; }

std::vector<std::string> ScaledParams::warnings() const {
    std::vector<std::string> out;
    if (g > 0.1) {
        std::ostringstream os;
        os << "g = " << g << " > 0.1: the small-noise expansion and the positive-P "
           << "boundary-term assumption are not well satisfied";
        out.push_back(os.str());
    }
    if (mu < 1.0 && mu >= 1.0 - 10.0 * g * g) {
        std::ostringstream os;
        os << "mu = " << mu << " is within 10 g^2 of threshold; O(g^2) results are unreliable";
        out.push_back(os.str());
    }
    if (mu >= 1.0) out.emplace_back("mu >= 1: above threshold, closed-form spectra are not defined");
    return out;
}

ScaledParams scale_params(const PhysicalParams& p) {
    p.validate();
    ScaledParams s;
    s.g = p.chi / std::sqrt(2.0 * p.gamma1 * p.gamma2);
    s.mu = p.chi * p.drive / (p.gamma1 * p.gamma2);
    s.gamma_r = p.gamma2 / p.gamma1;
    return s;
}

PhysicalParams unscale_params(const ScaledParams& s, double gamma1) {
    s.validate();
    if (!finite_positive(gamma1)) throw ParameterError("gamma1 must be positive");
    PhysicalParams p;
    p.gamma1 = gamma1;
    p.gamma2 = s.gamma_r * gamma1;
    p.chi = s.g * std::sqrt(2.0 * p.gamma1 * p.gamma2);
    p.drive = s.mu * p.gamma1 * p.gamma2 / p.chi;
    return p;
}

std::vector<ClassicalState> classical_steady_state(const ScaledParams& s) {
    s.validate();
    const double chi = s.chi();
    if (s.mu < 1.0) return {ClassicalState{0.0, s.pump_amplitude(), Branch::Below}};
    // Above threshold the pump clamps at gamma1 / chi and the excess drive goes
    // into the signal, alpha1^2 = 2 (E - E_c) / chi.
    const double a1 = std::sqrt(2.0 * (s.drive() - s.e_c()) / chi);
    const double a2 = 1.0 / chi;
    return {ClassicalState{a1, a2, Branch::AbovePlus}, ClassicalState{-a1, a2, Branch::AboveMinus}};
}

double scaled_pump_quadrature(const ClassicalState& c, const ScaledParams& s) {
    return 2.0 * c.alpha2.real() * s.chi();
}

const char* to_string(Branch b) {
    switch (b) {
        case Branch::Below: return "below";
        case Branch::AbovePlus: return "above+";
        case Branch::AboveMinus: return "above-";
    }
    return "?";
}

}  // namespace opo
