#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace cli {

namespace {

template <class T>
T get(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(key, std::string("wrong type (") + it->type_name() + ")");
    }
}

void require(bool ok, const char* field, const std::string& msg) {
    if (!ok) throw ConfigError(field, msg);
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "g2", "mu", "gamma_r", "gamma1", "gamma2", "chi", "drive",
        "representation", "linearization", "dtau", "tau_max", "tau_discard", "sample_stride",
        "noise_substeps", "fixed_point_iterations", "n_traj", "seed", "paired", "workers",
        "quadrature_mode", "theta", "omega_max", "overlay_analytic", "dump_trajectory",
        "mu_list", "omega_step", "quintic_form", "out_dir", "formats", "log_scale"};
    return keys;
}

RunConfig RunConfig::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("<root>", "configuration must be a JSON object");
    const auto& keys = config_keys();
    const std::set<std::string> known(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw ConfigError(it.key(), "unknown key");

    RunConfig c;
    const bool has_g2 = j.contains("g2");
    const bool has_phys = j.contains("gamma1") || j.contains("gamma2") || j.contains("chi") ||
                          j.contains("drive");
    if (has_g2 && has_phys)
        throw ConfigError("g2", "give either g2 or physical rates (gamma1, gamma2, chi, drive), not both");
    c.physical = has_phys;
    if (c.physical) {
        for (const char* k : {"gamma1", "gamma2", "chi", "drive"})
            require(j.contains(k), k, "physical parameter set is incomplete");
        if (j.contains("mu") || j.contains("gamma_r"))
            throw ConfigError(j.contains("mu") ? "mu" : "gamma_r",
                              "mu and gamma_r follow from the physical rates");
        c.gamma1 = get(j, "gamma1", 0.0);
        c.gamma2 = get(j, "gamma2", 0.0);
        c.chi = get(j, "chi", 0.0);
        c.drive = get(j, "drive", 0.0);
        const opo_physical ph{c.gamma1, c.gamma2, c.chi, c.drive};
        opo_params p;
        if (opo_params_from_physical(&ph, &p) != OPO_OK) throw ConfigError("gamma1", opo_last_error());
        c.g2 = p.g * p.g;
        c.mu = p.mu;
        c.gamma_r = p.gamma_r;
    } else {
        c.g2 = get(j, "g2", c.g2);
        c.mu = get(j, "mu", c.mu);
        c.gamma_r = get(j, "gamma_r", c.gamma_r);
        require(std::isfinite(c.g2) && c.g2 >= 0.0, "g2", "must be non-negative");
        require(std::isfinite(c.gamma_r) && c.gamma_r > 0.0, "gamma_r", "must be positive");
        require(std::isfinite(c.mu) && c.mu >= 0.0, "mu", "must be non-negative");
    }
    c.representation = get(j, "representation", c.representation);
    require(c.representation == "positive_p" || c.representation == "wigner", "representation",
            "must be \"positive_p\" or \"wigner\"");
    c.linearization = get(j, "linearization", c.linearization);
    require(c.linearization == "nonlinear" || c.linearization == "linearized", "linearization",
            "must be \"nonlinear\" or \"linearized\"");
    c.dtau = get(j, "dtau", c.dtau);
    require(c.dtau > 0.0, "dtau", "must be positive");
    c.tau_max = get(j, "tau_max", c.tau_max);
    require(c.tau_max > 0.0, "tau_max", "must be positive");
    c.tau_discard = get(j, "tau_discard", -1.0);
    if (c.tau_discard < 0.0) c.tau_discard = c.tau_max / 2.0;
    require(c.tau_discard < c.tau_max, "tau_discard", "must be smaller than tau_max");
    c.sample_stride = get<std::size_t>(j, "sample_stride", c.sample_stride);
    require(c.sample_stride >= 1, "sample_stride", "must be at least 1");
    c.noise_substeps = get<std::size_t>(j, "noise_substeps", c.noise_substeps);
    require(c.noise_substeps >= 1, "noise_substeps", "must be at least 1");
    c.fixed_point_iterations = get(j, "fixed_point_iterations", c.fixed_point_iterations);
    require(c.fixed_point_iterations >= 1, "fixed_point_iterations", "must be at least 1");
    c.n_traj = get<std::size_t>(j, "n_traj", c.n_traj);
    require(c.n_traj >= 10, "n_traj", "must be at least 10 (ten error batches)");
    c.seed = get<std::uint64_t>(j, "seed", c.seed);
    c.paired = get(j, "paired", c.paired);
    c.workers = get(j, "workers", c.workers);
    require(c.workers >= 1, "workers", "must be at least 1");
    c.quadrature_mode = get(j, "quadrature_mode", c.quadrature_mode);
    require(c.quadrature_mode == 1 || c.quadrature_mode == 2, "quadrature_mode", "must be 1 or 2");
    c.theta = get(j, "theta", c.theta);
    require(c.theta >= 0.0 && c.theta < 2.0 * M_PI, "theta", "must lie in [0, 2 pi)");
    c.omega_max = get(j, "omega_max", c.omega_max);
    c.overlay_analytic = get(j, "overlay_analytic", c.overlay_analytic);
    c.dump_trajectory = get<std::int64_t>(j, "dump_trajectory", c.dump_trajectory);
    require(c.dump_trajectory < static_cast<std::int64_t>(c.n_traj), "dump_trajectory",
            "must index a trajectory of the ensemble");
    c.mu_list = get(j, "mu_list", c.mu_list);
    for (double m : c.mu_list) require(m >= 0.0 && m < 1.0, "mu_list", "entries must lie in [0, 1)");
    c.omega_step = get(j, "omega_step", c.omega_step);
    require(c.omega_step > 0.0, "omega_step", "must be positive");
    c.quintic_form = get(j, "quintic_form", c.quintic_form);
    require(c.quintic_form == "corrected" || c.quintic_form == "as_printed", "quintic_form",
            "must be \"corrected\" or \"as_printed\"");
    c.out_dir = get(j, "out_dir", c.out_dir);
    require(!c.out_dir.empty(), "out_dir", "must not be empty");
    c.formats = get(j, "formats", c.formats);
    for (const auto& f : c.formats)
        require(f == "csv" || f == "json" || f == "svg", "formats", "allowed: csv, json, svg");
    c.log_scale = get(j, "log_scale", c.log_scale);

    opo_params p = c.params();
    if (opo_params_validate(&p) != OPO_OK) throw ConfigError(c.physical ? "chi" : "g2", opo_last_error());
    return c;
}

json RunConfig::to_json() const {
    json j;
    if (physical) {
        j["gamma1"] = gamma1;
        j["gamma2"] = gamma2;
        j["chi"] = chi;
        j["drive"] = drive;
    } else {
        j["g2"] = g2;
        j["mu"] = mu;
        j["gamma_r"] = gamma_r;
    }
    j["representation"] = representation;
    j["linearization"] = linearization;
    j["dtau"] = dtau;
    j["tau_max"] = tau_max;
    j["tau_discard"] = tau_discard;
    j["sample_stride"] = sample_stride;
    j["noise_substeps"] = noise_substeps;
    j["fixed_point_iterations"] = fixed_point_iterations;
    j["n_traj"] = n_traj;
    j["seed"] = seed;
    j["paired"] = paired;
    j["workers"] = workers;
    j["quadrature_mode"] = quadrature_mode;
    j["theta"] = theta;
    j["omega_max"] = omega_max;
    j["overlay_analytic"] = overlay_analytic;
    j["dump_trajectory"] = dump_trajectory;
    j["mu_list"] = mu_list;
    j["omega_step"] = omega_step;
    j["quintic_form"] = quintic_form;
    j["out_dir"] = out_dir;
    j["formats"] = formats;
    j["log_scale"] = log_scale;
    return j;
}

opo_params RunConfig::params() const { return {std::sqrt(g2), mu, gamma_r}; }

opo_grid RunConfig::grid() const {
    return {dtau, tau_max, tau_discard, sample_stride, noise_substeps, fixed_point_iterations};
}

opo_ensemble RunConfig::ensemble() const {
    return {n_traj, seed, rep_code(), linearization == "linearized" ? OPO_LINEARIZED : OPO_NONLINEAR,
            paired ? 1 : 0, workers};
}

bool RunConfig::wants(const std::string& fmt) const {
    for (const auto& f : formats)
        if (f == fmt) return true;
    return false;
}

void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError(assignment, "override must look like key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError(key, "unknown key");
    json v = json::parse(value, nullptr, false);
    j[key] = v.is_discarded() ? json(value) : v;
}

json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("--config", "cannot open " + path);
    json j = json::parse(is, nullptr, false);
    if (j.is_discarded()) throw ConfigError("--config", "not valid JSON: " + path);
    return j;
}

}  // namespace cli
