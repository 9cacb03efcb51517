#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "output.hpp"

namespace cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitUnreliable = 3;

/// A failing C API call, carrying its status.
class ApiError : public std::runtime_error {
public:
    ApiError(opo_status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
    opo_status status;
};

/// Numerical-reliability failure (too many divergent trajectories, ...).
class ReliabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Context {
    std::string command;
    std::string reproduce_id;
    RunConfig cfg;
    bool quiet = false;
};

int run_command(const Context& ctx);

/// Canonical configuration (flat JSON) of a reproduce id; throws ConfigError
/// for unknown ids. paper_scale selects the large-ensemble preset.
json reproduce_config(const std::string& id, bool paper_scale);
const std::vector<std::string>& reproduce_ids();

/// Ensemble preset of --paper-scale for the plain simulation commands.
json paper_scale_preset();

}  // namespace cli
