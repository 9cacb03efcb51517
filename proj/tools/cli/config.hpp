#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "opo/opo.h"

namespace cli {

using nlohmann::json;

/// Invalid configuration; `field` is the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& msg)
        : std::runtime_error("config error at \"" + field + "\": " + msg), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Flat run configuration. Physics is given either as (g2, mu, gamma_r) or
/// as physical rates (gamma1, gamma2, chi, drive); never both.
struct RunConfig {
    // physics
    bool physical = false;
    double g2 = 1e-3;
    double mu = 0.9;
    double gamma_r = 0.5;
    double gamma1 = 0.0, gamma2 = 0.0, chi = 0.0, drive = 0.0;
    // simulation
    std::string representation = "positive_p";
    std::string linearization = "nonlinear";
    double dtau = 0.1;
    double tau_max = 1000.0;
    double tau_discard = -1.0;  // negative: tau_max / 2
    std::size_t sample_stride = 1;
    std::size_t noise_substeps = 1;
    int fixed_point_iterations = 4;
    std::size_t n_traj = 10000;
    std::uint64_t seed = 1;
    bool paired = false;
    unsigned workers = 1;
    // estimators
    int quadrature_mode = 1;
    double theta = 1.5707963267948966;
    double omega_max = 0.0;  // <= 0: quarter of the bin Nyquist frequency
    bool overlay_analytic = false;
    std::int64_t dump_trajectory = -1;
    // analytic tabulation
    std::vector<double> mu_list;
    double omega_step = 0.05;
    std::string quintic_form = "corrected";
    // outputs
    std::string out_dir = "out";
    std::vector<std::string> formats{"csv", "json", "svg"};
    bool log_scale = false;

    /// Fills and validates from a flat JSON object; unknown keys are errors.
    static RunConfig from_json(const json& j);
    json to_json() const;

    opo_params params() const;
    opo_grid grid() const;
    opo_ensemble ensemble() const;
    int rep_code() const { return representation == "wigner" ? OPO_WIGNER : OPO_POSITIVE_P; }
    bool wants(const std::string& fmt) const;
};

/// Documented keys, for `--set` validation and the README.
const std::vector<std::string>& config_keys();

/// Parses "key=value"; the value is read as JSON when possible, else as a string.
void apply_override(json& j, const std::string& assignment);

json load_json_file(const std::string& path);

}  // namespace cli
