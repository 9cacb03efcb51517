#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

using namespace cli;

int main(int argc, char** argv) {
    CLI::App app{"Degenerate OPO squeezing: stochastic simulation and closed-form analytics"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> out_dir;
    bool paper_scale = false, overlay = false, quiet = false;
    std::vector<std::string> sets;
    std::string id;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "flat JSON configuration file");
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--workers", workers, "worker threads");
        sub->add_flag("--paper-scale", paper_scale, "large-ensemble preset (1e5 trajectories, tau_max 2000)");
        sub->add_flag("--overlay-analytic", overlay, "add analytic curves to the CSV output");
        sub->add_option("--out-dir", out_dir, "output directory");
        sub->add_option("--set", sets, "override a configuration key, key=value (repeatable)");
        sub->add_flag("--quiet", quiet, "no progress output");
    };
    const std::vector<std::pair<std::string, std::string>> subs{
        {"moments", "simulate and estimate intra-cavity moments"},
        {"spectrum", "simulate and estimate the external squeezing spectrum"},
        {"delta", "paired run: nonlinear correction to the spectrum"},
        {"triple", "simulate the triple correlation <x1 y1 y2>"},
        {"analytic", "tabulate closed-form spectra and moments"},
        {"optimize", "optimal drive by all three methods"},
        {"reproduce", "reproduce a figure or number (use id 'list')"}};
    for (const auto& [name, help] : subs) {
        auto* sub = app.add_subcommand(name, help);
        common(sub);
        if (name == "reproduce") sub->add_option("id", id, "figure or claim id")->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    Context ctx;
    ctx.command = app.get_subcommands().front()->get_name();
    ctx.quiet = quiet;
    try {
        if (ctx.command == "reproduce" && id == "list") {
            for (const auto& r : reproduce_ids()) std::cout << r << '\n';
            return kExitOk;
        }
        json j = json::object();
        if (ctx.command == "reproduce") {
            ctx.reproduce_id = id;
            j = reproduce_config(id, paper_scale);
        } else if (paper_scale) {
            j = paper_scale_preset();
        }
        if (!config_path.empty()) j.update(load_json_file(config_path));
        for (const auto& s : sets) apply_override(j, s);
        if (seed) j["seed"] = *seed;
        if (workers) j["workers"] = *workers;
        if (out_dir) j["out_dir"] = *out_dir;
        if (overlay) j["overlay_analytic"] = true;
        if (ctx.command == "delta") j["paired"] = true;
        ctx.cfg = RunConfig::from_json(j);
        return run_command(ctx);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ReliabilityError& e) {
        std::cerr << "numerical reliability failure: " << e.what() << '\n';
        return kExitUnreliable;
    } catch (const ApiError& e) {
        std::cerr << "error (" << opo_status_name(e.status) << "): " << e.what() << '\n';
        switch (e.status) {
            case OPO_ERR_PARAMETER:
            case OPO_ERR_DOMAIN: return kExitConfig;
            case OPO_ERR_SOLVER:
            case OPO_ERR_ESTIMATOR: return kExitUnreliable;
            default: return kExitFailure;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
