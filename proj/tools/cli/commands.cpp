#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

namespace cli {

namespace {

constexpr double kHalfPi = 1.5707963267948966;

void check(opo_status s) {
    if (s != OPO_OK) throw ApiError(s, opo_last_error());
}

// ------------------------------------------------------------ analytic calls

double an_spectrum(const opo_params& p, int rep, double w) {
    double v;
    check(opo_analytic_spectrum(&p, rep, w, &v));
    return v;
}

double an_correction(const opo_params& p, int rep, double w) {
    double v;
    check(opo_analytic_spectrum_correction(&p, rep, w, &v));
    return v;
}

double an_linear(double mu, double w, int quad) {
    double S, V;
    check(opo_linear_spectrum(mu, w, quad, &S, &V));
    return V;
}

opo_analytic_moments an_moments(const opo_params& p, int rep) {
    opo_analytic_moments m;
    check(opo_analytic_moments_eval(&p, rep, &m));
    return m;
}

double an_v0(const opo_params& p) {
    double v;
    check(opo_analytic_v0(&p, &v));
    return v;
}

opo_params with_mu(opo_params p, double mu, double gamma_r) {
    p.mu = mu;
    p.gamma_r = gamma_r;
    return p;
}

const char* rep_name(int rep) { return rep == OPO_WIGNER ? "wigner" : "positive_p"; }

std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) out.push_back(lo + step * static_cast<double>(i));
    return out;
}

json estimate_json(const opo_estimate& e) {
    return {{"value", e.value}, {"stderr", e.std_error}, {"imag", e.imag}};
}

// ------------------------------------------------------------ simulation

struct SpectrumRows {
    opo_spectrum_info info{};
    std::vector<opo_spectrum_row> rows;

    const opo_spectrum_row& zero() const { return rows[rows.size() / 2]; }
};

struct SimResult {
    opo_report report{};
    std::optional<opo_moment_set> moments;
    std::optional<SpectrumRows> spectrum, delta, linear, nonlinear;
};

struct SimRequest {
    bool moments = false;
    bool spectrum = false;
    bool delta = false;
};

using RunPtr = std::unique_ptr<opo_run, decltype(&opo_run_destroy)>;

SpectrumRows fetch(const opo_run* run, int which) {
    opo_spectrum* raw = nullptr;
    check(opo_run_spectrum(run, which, &raw));
    std::unique_ptr<opo_spectrum, decltype(&opo_spectrum_destroy)> s(raw, opo_spectrum_destroy);
    SpectrumRows out;
    check(opo_spectrum_info_get(s.get(), &out.info));
    out.rows.resize(opo_spectrum_size(s.get()));
    for (std::size_t i = 0; i < out.rows.size(); ++i) check(opo_spectrum_row_get(s.get(), i, &out.rows[i]));
    return out;
}

void progress_cb(size_t done, size_t total, void*) {
    static size_t last_decile = 0;
    const size_t decile = done * 10 / total;
    if (done == total || decile != last_decile) {
        std::fprintf(stderr, "\r  trajectories %zu/%zu", done, total);
        if (done == total) std::fprintf(stderr, "\n");
        last_decile = done == total ? 0 : decile;
    }
}

// ------------------------------------------------------------ session

class Session {
public:
    explicit Session(const Context& ctx)
        : ctx_(ctx), out_(ctx.cfg.out_dir), t0_(std::chrono::steady_clock::now()) {
        opo_params p = ctx.cfg.params();
        char buf[1024];
        size_t n = 0;
        if (opo_params_warnings(&p, buf, sizeof buf, &n) == OPO_OK && n > 0) {
            std::istringstream is(buf);
            for (std::string line; std::getline(is, line);) {
                warnings_.push_back(line);
                if (!ctx.quiet) std::cerr << "warning: " << line << '\n';
            }
        }
    }

    const RunConfig& cfg() const { return ctx_.cfg; }
    ArtifactWriter& out() { return out_; }

    SimResult simulate(const RunConfig& c, SimRequest req, const std::string& label) {
        opo_params p = c.params();
        opo_grid g = c.grid();
        opo_ensemble e = c.ensemble();
        if (req.delta) e.paired = 1;
        opo_run* raw = nullptr;
        check(opo_run_create(&p, &g, &e, &raw));
        RunPtr run(raw, opo_run_destroy);
        if (req.moments) check(opo_run_request_moments(run.get()));
        if (req.spectrum)
            check(opo_run_request_spectrum(run.get(), c.quadrature_mode, c.theta, c.omega_max));
        if (req.delta) check(opo_run_request_delta(run.get(), c.quadrature_mode, c.theta, c.omega_max));
        std::string dump;
        if (c.dump_trajectory >= 0) {
            dump = "trajectory_" + label + "_" + std::to_string(c.dump_trajectory) + ".csv";
            check(opo_run_request_dump(run.get(), static_cast<std::uint64_t>(c.dump_trajectory),
                                       (out_.dir() / dump).string().c_str()));
        }
        if (!ctx_.quiet) {
            std::fprintf(stderr, "[%s] %s: %zu %s trajectories, %s, mu=%g gamma_r=%g g2=%g\n",
                         ctx_.command.c_str(), label.c_str(), c.n_traj, e.paired ? "paired" : "single",
                         rep_name(c.rep_code()), c.mu, c.gamma_r, c.g2);
            check(opo_run_set_progress(run.get(), progress_cb, nullptr));
        }
        check(opo_run_execute(run.get()));
        SimResult r;
        check(opo_run_report(run.get(), &r.report));
        if (req.moments) {
            opo_moment_set m;
            check(opo_run_moments(run.get(), &m));
            r.moments = m;
        }
        if (req.spectrum) r.spectrum = fetch(run.get(), OPO_SPECTRUM);
        if (req.delta) {
            r.delta = fetch(run.get(), OPO_DELTA);
            r.linear = fetch(run.get(), OPO_DELTA_LINEAR);
            r.nonlinear = fetch(run.get(), OPO_DELTA_NONLINEAR);
        }
        if (!dump.empty()) {
            std::ifstream is(out_.dir() / dump, std::ios::binary);
            std::stringstream ss;
            ss << is.rdbuf();
            out_.write(dump, ss.str());
        }
        runs_.push_back({{"label", label},
                         {"mu", c.mu},
                         {"gamma_r", c.gamma_r},
                         {"g2", c.g2},
                         {"representation", rep_name(c.rep_code())},
                         {"paired", e.paired != 0},
                         {"n_traj", r.report.n_traj},
                         {"n_divergent", r.report.n_divergent},
                         {"reliable", r.report.reliable != 0},
                         {"wall_time_s", r.report.wall_seconds}});
        n_divergent_ += r.report.n_divergent;
        if (!r.report.reliable) {
            std::ostringstream os;
            os << label << ": " << r.report.n_divergent << " of " << r.report.n_traj
               << " trajectories diverged (limit 0.1%)";
            unreliable_.push_back(os.str());
        }
        return r;
    }

    /// Records a comparison against a published or derived number and prints it.
    void compare(const std::string& claim, double computed, double stderr_, double target, double lo,
                 double hi, const std::string& note = "") {
        const bool pass = computed >= lo && computed <= hi;
        json j{{"claim", claim}, {"computed", computed}, {"target", target}, {"accept_low", lo},
               {"accept_high", hi}, {"pass", pass}};
        if (std::isfinite(stderr_)) j["stderr"] = stderr_;
        if (!note.empty()) j["note"] = note;
        comparisons_.push_back(j);
        std::printf("%s  %-44s computed=%.6g%s target=%.6g accept=[%.6g, %.6g]\n", pass ? "PASS" : "FAIL",
                    claim.c_str(), computed,
                    std::isfinite(stderr_) ? (" +- " + fmt(stderr_)).c_str() : "", target, lo, hi);
    }

    void check_flag(const std::string& claim, bool pass, const std::string& detail) {
        comparisons_.push_back({{"claim", claim}, {"pass", pass}, {"detail", detail}});
        std::printf("%s  %-44s %s\n", pass ? "PASS" : "FAIL", claim.c_str(), detail.c_str());
    }

    void finish() {
        json config = ctx_.cfg.to_json();
        out_.write_json("config.json", config);
        if (!comparisons_.empty()) out_.write_json("comparison.json", comparisons_);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        json manifest{{"schema", "opo-manifest/1"},
                      {"artifact_version", opo_version()},
                      {"command", ctx_.command},
                      {"config", config},
                      {"seed", ctx_.cfg.seed},
                      {"workers", ctx_.cfg.workers},
                      {"divergent_trajectories", n_divergent_},
                      {"runs", runs_},
                      {"warnings", warnings_},
                      {"wall_time_s", wall},
                      {"artifacts", out_.artifacts()}};
        if (!ctx_.reproduce_id.empty()) manifest["reproduce_id"] = ctx_.reproduce_id;
        if (!unreliable_.empty()) manifest["reliability_failures"] = unreliable_;
        std::ofstream os(out_.dir() / "manifest.json");
        os << manifest.dump(2) << '\n';
        if (!os) throw std::runtime_error("cannot write manifest");
        if (!ctx_.quiet) std::cerr << "wrote " << (out_.dir() / "manifest.json").string() << '\n';
        if (!unreliable_.empty()) {
            std::string msg;
            for (const auto& u : unreliable_) msg += (msg.empty() ? "" : "; ") + u;
            throw ReliabilityError(msg);
        }
    }

private:
    static std::string fmt(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", v);
        return buf;
    }

    const Context& ctx_;
    ArtifactWriter out_;
    std::chrono::steady_clock::time_point t0_;
    json runs_ = json::array();
    json comparisons_ = json::array();
    std::vector<std::string> warnings_;
    std::vector<std::string> unreliable_;
    std::size_t n_divergent_ = 0;
};

// ------------------------------------------------------------ spectrum output

using Curve = std::function<double(double)>;

Table spectrum_table(const SpectrumRows& s, const std::vector<std::pair<std::string, Curve>>& overlays) {
    Table t;
    t.columns = {"omega", "V", "stderr", "imag_residual"};
    for (const auto& [name, f] : overlays) t.columns.push_back(name);
    for (const auto& r : s.rows) {
        std::vector<double> row{r.omega, r.V, r.std_error, r.imag_residual};
        for (const auto& [name, f] : overlays) row.push_back(f(r.omega));
        t.rows.push_back(std::move(row));
    }
    return t;
}

Series sim_series(const std::string& name, const SpectrumRows& s, bool positive_only = true) {
    Series out{name, {}, {}, false, {}};
    for (const auto& r : s.rows) {
        if (positive_only && r.omega < 0.0) continue;
        out.x.push_back(r.omega);
        out.y.push_back(r.V);
        out.err.push_back(r.std_error);
    }
    return out;
}

Series curve_series(const std::string& name, const std::vector<double>& xs, const Curve& f,
                    bool dashed = true) {
    Series out{name, xs, {}, dashed, {}};
    for (double x : xs) out.y.push_back(f(x));
    return out;
}

std::vector<double> positive_omegas(const SpectrumRows& s) {
    std::vector<double> out;
    for (const auto& r : s.rows)
        if (r.omega >= 0.0) out.push_back(r.omega);
    return out;
}

bool is_angle(double theta, double target) { return std::abs(theta - target) < 1e-12; }

/// Analytic counterpart of the configured spectrum, when one exists.
std::optional<Curve> spectrum_overlay(const RunConfig& c) {
    if (c.quadrature_mode != 1 || c.mu >= 1.0) return std::nullopt;
    const opo_params p = c.params();
    const bool y = is_angle(c.theta, kHalfPi), x = is_angle(c.theta, 0.0);
    if (c.linearization == "linearized") {
        if (y) return Curve([mu = c.mu](double w) { return an_linear(mu, w, OPO_QUAD_Y); });
        if (x) return Curve([mu = c.mu](double w) { return an_linear(mu, w, OPO_QUAD_X); });
        return std::nullopt;
    }
    if (y) return Curve([p, rep = c.rep_code()](double w) { return an_spectrum(p, rep, w); });
    return std::nullopt;
}

void emit_spectrum(Session& s, const std::string& stem, const SpectrumRows& rows,
                   const std::vector<std::pair<std::string, Curve>>& overlays, const std::string& title,
                   const std::string& ylabel, const json& meta) {
    const RunConfig& c = s.cfg();
    if (c.wants("csv")) s.out().write(stem + ".csv", render_csv(spectrum_table(rows, overlays)));
    if (c.wants("json")) {
        json j = meta;
        j["schema"] = "opo-spectrum/1";
        j["window"] = rows.info.window;
        j["bin_duration"] = rows.info.bin_duration;
        j["omega_effective"] = rows.info.warped != 0;
        j["n_traj"] = rows.info.n_traj;
        j["n_used"] = rows.info.n_used;
        j["representation"] = rep_name(rows.info.representation);
        j["seed"] = c.seed;
        s.out().write_json(stem + ".json", j);
    }
    if (c.wants("svg")) {
        Plot plot{title, "Omega (units of gamma1)", ylabel, c.log_scale, {}};
        plot.series.push_back(sim_series("simulation", rows));
        const auto xs = positive_omegas(rows);
        for (const auto& [name, f] : overlays) plot.series.push_back(curve_series(name, xs, f));
        s.out().write(stem + ".svg", render_svg(plot));
    }
}

// ------------------------------------------------------------ commands

json moments_json(const RunConfig& c, const opo_moment_set& m) {
    json j{{"schema", "opo-moments/1"},
           {"representation", rep_name(m.representation)},
           {"ordering", m.representation == OPO_POSITIVE_P ? "normal" : "symmetric"},
           {"seed", c.seed},
           {"n_traj", m.n_traj},
           {"n_used", m.n_used},
           {"moments",
            {{"x1_sq", estimate_json(m.x1_sq)},
             {"y1_sq", estimate_json(m.y1_sq)},
             {"x2", estimate_json(m.x2)},
             {"y2", estimate_json(m.y2)},
             {"x1_y1_y2", estimate_json(m.triple)}}},
           {"y1_op_sq", estimate_json(m.y1_op_sq)},
           {"y1_op_sq_minus_half", estimate_json(m.y1_op_offset)}};
    if (m.has_triple_112) j["moments"]["x1_y1_y2_order_112"] = estimate_json(m.triple_112);
    if (c.mu < 1.0) {
        const opo_params p = c.params();
        const auto a = an_moments(p, m.representation);
        j["analytic"] = {{"y1_op_sq", a.y1_op_sq},
                         {"y1_op_sq_minus_half", a.y1_op_offset},
                         {"nonlinear_part", a.nonlinear_part},
                         {"x2_unscaled", (2.0 * c.mu / p.g + p.g * a.x2_2) / std::sqrt(2.0 * c.gamma_r)}};
    }
    return j;
}

void write_moments(Session& s, const RunConfig& c, const opo_moment_set& m, const std::string& stem) {
    const json j = moments_json(c, m);
    if (c.wants("json")) s.out().write_json(stem + ".json", j);
    if (c.wants("csv")) {
        std::ostringstream os;
        os.precision(17);
        os << "quantity,value,stderr,imag\n";
        for (auto it = j["moments"].begin(); it != j["moments"].end(); ++it)
            os << it.key() << ',' << (*it)["value"].get<double>() << ',' << (*it)["stderr"].get<double>()
               << ',' << (*it)["imag"].get<double>() << '\n';
        for (const char* k : {"y1_op_sq", "y1_op_sq_minus_half"})
            os << k << ',' << j[k]["value"].get<double>() << ',' << j[k]["stderr"].get<double>() << ','
               << j[k]["imag"].get<double>() << '\n';
        s.out().write(stem + ".csv", os.str());
    }
}

int cmd_moments(Session& s) {
    const RunConfig& c = s.cfg();
    const SimResult r = s.simulate(c, {.moments = true}, "moments");
    write_moments(s, c, *r.moments, "moments");
    const auto& m = *r.moments;
    std::printf("<y1^2> - 1/2 = %.6g +- %.2g (%s ordering, %zu trajectories used)\n", m.y1_op_offset.value,
                m.y1_op_offset.std_error, m.representation == OPO_POSITIVE_P ? "normal" : "symmetric",
                m.n_used);
    if (c.mu < 1.0)
        std::printf("analytic          = %.6g\n", an_moments(c.params(), c.rep_code()).y1_op_offset);
    s.finish();
    return kExitOk;
}

int cmd_spectrum(Session& s) {
    const RunConfig& c = s.cfg();
    const SimResult r = s.simulate(c, {.spectrum = true}, "spectrum");
    std::vector<std::pair<std::string, Curve>> overlays;
    if (c.overlay_analytic)
        if (auto f = spectrum_overlay(c)) overlays.emplace_back("V_analytic", *f);
    emit_spectrum(s, "spectrum", *r.spectrum, overlays, "External spectrum", "V(Omega)",
                  {{"quadrature_mode", c.quadrature_mode}, {"theta", c.theta}});
    std::printf("V(0) = %.6g +- %.2g\n", r.spectrum->zero().V, r.spectrum->zero().std_error);
    s.finish();
    return kExitOk;
}

void emit_delta(Session& s, const RunConfig& c, const SimResult& r, const std::string& prefix) {
    const opo_params p = c.params();
    std::vector<std::pair<std::string, Curve>> od, ol, on;
    const bool y = c.quadrature_mode == 1 && is_angle(c.theta, kHalfPi) && c.mu < 1.0;
    if (c.overlay_analytic && y) {
        od.emplace_back("V_analytic", [p, rep = c.rep_code()](double w) { return an_correction(p, rep, w); });
        ol.emplace_back("V_analytic", [mu = c.mu](double w) { return an_linear(mu, w, OPO_QUAD_Y); });
        on.emplace_back("V_analytic", [p, rep = c.rep_code()](double w) { return an_spectrum(p, rep, w); });
    }
    const json meta{{"quadrature_mode", c.quadrature_mode}, {"theta", c.theta}};
    emit_spectrum(s, prefix + "delta", *r.delta, od, "Nonlinear correction", "Delta V(Omega)", meta);
    emit_spectrum(s, prefix + "linear", *r.linear, ol, "Linearized spectrum", "V(Omega)", meta);
    emit_spectrum(s, prefix + "nonlinear", *r.nonlinear, on, "Nonlinear spectrum", "V(Omega)", meta);
}

int cmd_delta(Session& s) {
    const RunConfig& c = s.cfg();
    const SimResult r = s.simulate(c, {.delta = true}, "delta");
    emit_delta(s, c, r, "");
    std::printf("Delta V(0) = %.6g +- %.2g\n", r.delta->zero().V, r.delta->zero().std_error);
    if (c.mu < 1.0)
        std::printf("analytic   = %.6g\n", an_correction(c.params(), c.rep_code(), 0.0));
    s.finish();
    return kExitOk;
}

int cmd_triple(Session& s) {
    const RunConfig& c = s.cfg();
    const SimResult r = s.simulate(c, {.moments = true}, "triple");
    const auto& m = *r.moments;
    json j{{"schema", "opo-triple/1"},
           {"representation", rep_name(m.representation)},
           {"ordering", m.representation == OPO_POSITIVE_P ? "normal" : "symmetric"},
           {"seed", c.seed},
           {"n_used", m.n_used},
           {"x1_y1_y2", estimate_json(m.triple)}};
    if (m.has_triple_112) j["x1_y1_y2_order_112"] = estimate_json(m.triple_112);
    if (c.mu < 1.0) {
        const opo_params p = c.params();
        double scaled, unscaled;
        check(opo_analytic_triple(&p, c.rep_code(), &scaled, &unscaled));
        j["analytic"] = {{"order_112_scaled", scaled}, {"order_112_unscaled", unscaled},
                         {"unscaled_factor", p.g / std::sqrt(2.0 * c.gamma_r)}};
        if (c.rep_code() == OPO_WIGNER) {
            const auto a = an_moments(p, OPO_WIGNER);
            j["analytic"]["orders_112_plus_211_scaled"] = a.triple_sum;
            j["analytic"]["orders_112_plus_211_unscaled"] = a.triple_sum * p.g / std::sqrt(2.0 * c.gamma_r);
        }
        std::printf("analytic (1,1,2) order = %.6g\n", unscaled);
    }
    s.out().write_json("triple.json", j);
    std::printf("<x1 y1 y2> = %.6g +- %.2g\n", m.triple.value, m.triple.std_error);
    if (m.has_triple_112)
        std::printf("(1,1,2) part from pairing = %.6g +- %.2g\n", m.triple_112.value, m.triple_112.std_error);
    s.finish();
    return kExitOk;
}

int cmd_analytic(Session& s) {
    const RunConfig& c = s.cfg();
    std::vector<double> mus = c.mu_list;
    if (mus.empty()) mus.push_back(c.mu);
    const double wmax = c.omega_max > 0.0 ? c.omega_max : 5.0;
    const auto ws = grid(0.0, wmax, c.omega_step);
    const int rep = c.rep_code();
    const opo_params base = c.params();
    Plot plot{"Analytic external spectrum (" + std::string(rep_name(rep)) + ")", "Omega (units of gamma1)",
              "V(Omega)", c.log_scale, {}};
    json moments = json::array();
    for (double mu : mus) {
        const opo_params p = with_mu(base, mu, c.gamma_r);
        Table t{{"omega", "V", "stderr", "imag_residual"}, {}};
        for (double w : ws) t.rows.push_back({w, an_spectrum(p, rep, w), 0.0, 0.0});
        char name[64];
        std::snprintf(name, sizeof name, "analytic_mu%.4g.csv", mu);
        if (c.wants("csv")) s.out().write(name, render_csv(t));
        char label[32];
        std::snprintf(label, sizeof label, "mu=%.4g", mu);
        plot.series.push_back(curve_series(label, ws, [&](double w) { return an_spectrum(p, rep, w); }, false));
        const auto m = an_moments(p, rep);
        json mj{{"mu", mu},
                {"y1_op_sq", m.y1_op_sq},
                {"y1_op_sq_minus_half", m.y1_op_offset},
                {"nonlinear_part", m.nonlinear_part},
                {"x2_2", m.x2_2},
                {"y1y1", m.y1y1},
                {"x1x1", m.x1x1},
                {"y1y3", m.y1y3},
                {"x1y1y2_112", m.triple_112},
                {"V0", an_spectrum(p, rep, 0.0)}};
        if (m.has_wigner_terms) {
            mj["y2y2"] = m.y2y2;
            mj["x1y1y2_112_plus_211"] = m.triple_sum;
        }
        moments.push_back(mj);
        std::printf("mu=%-6g V(0)=%.6g  <y1^2>-1/2=%.6g\n", mu, an_spectrum(p, rep, 0.0), m.y1_op_offset);
    }
    if (c.wants("json"))
        s.out().write_json("analytic.json", {{"schema", "opo-analytic/1"},
                                             {"representation", rep_name(rep)},
                                             {"g2", c.g2},
                                             {"gamma_r", c.gamma_r},
                                             {"moments", moments}});
    if (c.wants("svg")) s.out().write("analytic.svg", render_svg(plot));
    s.finish();
    return kExitOk;
}

json optimum_json(const opo_optimum& o) {
    static const char* regimes[] = {"QuinticNumeric", "LargeGammaAsymptotic", "SmallGammaAsymptotic",
                                    "DirectScan"};
    static const char* methods[] = {"QuinticNumeric", "Asymptotic", "DirectScan"};
    return {{"method", methods[o.method]}, {"mu_opt", o.mu_opt},       {"delta", o.delta},
            {"V_opt", o.V_opt},            {"regime", regimes[o.regime]}, {"iterations", o.iterations}};
}

json optimize_all(const RunConfig& c, std::map<int, opo_optimum>* found = nullptr) {
    const double g = std::sqrt(c.g2);
    const int form = c.quintic_form == "corrected" ? OPO_QUINTIC_CORRECTED : OPO_QUINTIC_AS_PRINTED;
    json results = json::array();
    for (int method : {OPO_OPT_QUINTIC, OPO_OPT_ASYMPTOTIC, OPO_OPT_DIRECT_SCAN}) {
        opo_optimum o;
        const opo_status st = opo_optimal_drive(c.gamma_r, g, method, form, &o);
        if (st == OPO_OK) {
            results.push_back(optimum_json(o));
            if (found) (*found)[method] = o;
        } else if (st == OPO_ERR_SOLVER) {
            static const char* methods[] = {"QuinticNumeric", "Asymptotic", "DirectScan"};
            results.push_back({{"method", methods[method]}, {"error", opo_last_error()}});
        } else {
            check(st);
        }
    }
    return results;
}

int cmd_optimize(Session& s) {
    const RunConfig& c = s.cfg();
    std::map<int, opo_optimum> found;
    const json results = optimize_all(c, &found);
    s.out().write_json("optimum.json", {{"schema", "opo-optimum/1"},
                                        {"gamma_r", c.gamma_r},
                                        {"g2", c.g2},
                                        {"quintic_form", c.quintic_form},
                                        {"results", results}});
    for (const auto& r : results) {
        if (r.contains("error"))
            std::printf("%-15s error: %s\n", r["method"].get<std::string>().c_str(),
                        r["error"].get<std::string>().c_str());
        else
            std::printf("%-15s mu_opt=%.6f V_opt=%.6g (%s)\n", r["method"].get<std::string>().c_str(),
                        r["mu_opt"].get<double>(), r["V_opt"].get<double>(),
                        r["regime"].get<std::string>().c_str());
    }
    s.finish();
    return found.size() == 3 ? kExitOk : kExitUnreliable;
}

// ------------------------------------------------------------ reproduce

struct Family {
    std::string title, xlabel, ylabel;
    std::vector<double> xs;
    std::vector<std::pair<std::string, Curve>> curves;
    std::vector<bool> dashed;
    bool log_y = false;
};

void emit_family(Session& s, const std::string& stem, const Family& f) {
    Table t;
    t.columns.push_back(f.xlabel.substr(0, f.xlabel.find(' ')));
    for (const auto& [name, fn] : f.curves) t.columns.push_back(name);
    for (double x : f.xs) {
        std::vector<double> row{x};
        for (const auto& [name, fn] : f.curves) row.push_back(fn(x));
        t.rows.push_back(std::move(row));
    }
    s.out().write(stem + ".csv", render_csv(t));
    Plot plot{f.title, f.xlabel, f.ylabel, f.log_y, {}};
    for (std::size_t i = 0; i < f.curves.size(); ++i)
        plot.series.push_back(curve_series(f.curves[i].first, f.xs, f.curves[i].second,
                                           i < f.dashed.size() && f.dashed[i]));
    s.out().write(stem + ".svg", render_svg(plot));
}

std::string tag(const char* prefix, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%g", prefix, v);
    return buf;
}

void rep_moment_0272_analytic(Session& s) {
    const RunConfig& c = s.cfg();
    const auto a = an_moments(c.params(), OPO_POSITIVE_P);
    s.compare("analytic <y1^2> - 1/2", a.y1_op_offset, NAN, 0.0272, 0.0271, 0.0273);
}

int rep_moment_0272(Session& s) {
    const RunConfig& c = s.cfg();
    rep_moment_0272_analytic(s);
    RunConfig sim = c;
    sim.representation = "positive_p";
    const SimResult r = s.simulate(sim, {.moments = true}, "moments");
    write_moments(s, sim, *r.moments, "moments");
    const auto& m = r.moments->y1_op_offset;
    s.compare("simulated <y1^2> - 1/2 within 3 stderr", m.value, m.std_error, 0.0271,
              0.0271 - 3.0 * m.std_error, 0.0271 + 3.0 * m.std_error);
    s.check_flag("simulated stderr <= 5e-4", m.std_error <= 5e-4, "stderr=" + std::to_string(m.std_error));
    s.finish();
    return kExitOk;
}

int rep_delta(Session& s, bool figure) {
    const RunConfig& c = s.cfg();
    RunConfig sim = c;
    sim.overlay_analytic = true;
    const SimResult r = s.simulate(sim, {.delta = true}, "delta");
    if (figure) {
        const opo_params p = c.params();
        const auto xs = positive_omegas(*r.delta);
        Plot plot{"Nonlinear spectral correction", "Omega (units of gamma1)", "Delta V(Omega)", false, {}};
        plot.series.push_back(sim_series("+P simulation", *r.delta));
        plot.series.push_back(curve_series("+P analytic", xs, [&](double w) { return an_correction(p, OPO_POSITIVE_P, w); }));
        plot.series.push_back(curve_series("Wigner analytic", xs, [&](double w) { return an_correction(p, OPO_WIGNER, w); }));
        s.out().write("figure.svg", render_svg(plot));
        s.out().write("figure.csv",
                      render_csv(spectrum_table(*r.delta, {{"V_analytic_positive_p",
                                                           [p](double w) { return an_correction(p, OPO_POSITIVE_P, w); }},
                                                          {"V_analytic_wigner",
                                                           [p](double w) { return an_correction(p, OPO_WIGNER, w); }}})));
    }
    emit_delta(s, sim, r, "");
    const auto& z = r.delta->zero();
    s.compare("Delta V(0) in [3.4e-3, 4.1e-3]", z.V, z.std_error, 3.75e-3, 3.4e-3, 4.1e-3,
              "analytic O(g^2) value " + std::to_string(an_correction(c.params(), OPO_POSITIVE_P, 0.0)));
    s.finish();
    return kExitOk;
}

int rep_optsim01(Session& s) {
    const RunConfig& c = s.cfg();
    const SimResult r = s.simulate(c, {.delta = true}, "optsim01");
    const opo_params p = c.params();
    emit_delta(s, c, r, "");
    // Linear part is exact for the discrete scheme at the effective frequency;
    // the nonlinear remainder comes from the paired difference.
    SpectrumRows combined = *r.delta;
    for (auto& row : combined.rows) row.V += an_linear(c.mu, row.omega, OPO_QUAD_Y);
    const auto xs = positive_omegas(combined);
    Plot plot{"Optimum squeezing, gamma_r=0.01, mu=0.93", "Omega (units of gamma1)", "V(Omega)", true, {}};
    plot.series.push_back(sim_series("+P simulation", combined));
    plot.series.push_back(curve_series("+P analytic", xs, [&](double w) { return an_spectrum(p, OPO_POSITIVE_P, w); }));
    plot.series.push_back(curve_series("Wigner analytic", xs, [&](double w) { return an_spectrum(p, OPO_WIGNER, w); }));
    s.out().write("figure.svg", render_svg(plot));
    s.out().write("figure.csv", render_csv(spectrum_table(combined, {{"V_analytic_positive_p", [p](double w) {
                                                                          return an_spectrum(p, OPO_POSITIVE_P, w);
                                                                      }}})));
    // Bands of width 0.5 over [0, 5]: mean of the bins, stderr from the bin errors.
    int within = 0, bands = 0;
    for (double lo = 0.0; lo < 5.0 - 1e-9; lo += 0.5) {
        double v = 0, a = 0, e2 = 0;
        int n = 0;
        for (const auto& row : combined.rows)
            if (row.omega >= lo && row.omega < lo + 0.5) {
                v += row.V;
                a += an_spectrum(p, OPO_POSITIVE_P, row.omega);
                e2 += row.std_error * row.std_error;
                ++n;
            }
        if (n == 0) continue;
        ++bands;
        within += std::abs(v - a) / n <= 3.0 * std::sqrt(e2) / n;
    }
    s.check_flag("simulated V matches analytic in 0.5-wide bands, |Omega|<=5", within == bands,
                 std::to_string(within) + "/" + std::to_string(bands) + " bands within 3 stderr");
    s.finish();
    return kExitOk;
}

int rep_analytic_figure(Session& s, const std::string& id) {
    const RunConfig& c = s.cfg();
    const opo_params base = c.params();
    const double wmax = c.omega_max > 0.0 ? c.omega_max : 5.0;
    Family f;
    if (id == "fig-Sqmom") {
        f = {"Squeezing moment, g^2=0.001, gamma_r=0.5", "mu", "<y1^2>", grid(0.0, 0.995, 0.005), {}, {}, false};
        f.curves.emplace_back("positive_p", [&](double mu) { return an_moments(with_mu(base, mu, 0.5), OPO_POSITIVE_P).y1_op_sq; });
        f.curves.emplace_back("linear", [](double mu) { return 1.0 / (1.0 + mu); });
        f.dashed = {false, true};
        emit_family(s, "figure", f);
        rep_moment_0272_analytic(s);
    } else if (id == "fig-NLSqmom") {
        f = {"Nonlinear moment correction, g^2=0.001", "mu", "Delta <y1^2>", grid(0.0, 0.99, 0.005), {}, {}, false};
        for (double gr : {0.1, 1.0, 10.0}) {
            f.curves.emplace_back(tag("positive_p_gr", gr), [&, gr](double mu) {
                return an_moments(with_mu(base, mu, gr), OPO_POSITIVE_P).nonlinear_part;
            });
            f.curves.emplace_back(tag("wigner_gr", gr), [&, gr](double mu) {
                return an_moments(with_mu(base, mu, gr), OPO_WIGNER).nonlinear_part;
            });
            f.dashed.push_back(false);
            f.dashed.push_back(true);
        }
        emit_family(s, "figure", f);
    } else if (id == "fig-TOTALSPEC" || id == "fig-NLSPEC") {
        const bool total = id == "fig-TOTALSPEC";
        f = {total ? "Total spectrum, g^2=0.001, gamma_r=0.5" : "Nonlinear spectrum, g^2=0.001, gamma_r=0.5",
             "omega (units of gamma1)", total ? "V(Omega)" : "Delta V(Omega)", grid(0.0, wmax, c.omega_step),
             {}, {}, false};
        const std::vector<double> mus = total ? std::vector<double>{0.1, 0.3, 0.5, 0.7, 0.9}
                                              : std::vector<double>{0.1, 0.3, 0.5, 0.7, 0.9, 0.95};
        for (double mu : mus)
            f.curves.emplace_back(tag("mu", mu), [&, mu, total](double w) {
                const opo_params p = with_mu(base, mu, 0.5);
                return total ? an_spectrum(p, OPO_POSITIVE_P, w) : an_correction(p, OPO_POSITIVE_P, w);
            });
        emit_family(s, "figure", f);
        if (total) {
            bool decreasing = true;
            double prev = 2.0;
            for (double mu : mus) {
                const double v = an_spectrum(with_mu(base, mu, 0.5), OPO_POSITIVE_P, 0.0);
                decreasing = decreasing && v < prev;
                prev = v;
            }
            s.check_flag("V(0) decreases with mu", decreasing, "mu = 0.1 ... 0.9");
        }
    } else if (id == "fig-NL2PWSPEC") {
        f = {"Zero-frequency nonlinear correction, g^2=0.001", "mu", "Delta V(0)", grid(0.0, 0.99, 0.005), {}, {}, false};
        for (double gr : {0.01, 0.1, 1.0, 10.0, 100.0}) {
            f.curves.emplace_back(tag("positive_p_gr", gr), [&, gr](double mu) {
                return an_correction(with_mu(base, mu, gr), OPO_POSITIVE_P, 0.0);
            });
            f.curves.emplace_back(tag("wigner_gr", gr), [&, gr](double mu) {
                return an_correction(with_mu(base, mu, gr), OPO_WIGNER, 0.0);
            });
            f.dashed.push_back(false);
            f.dashed.push_back(true);
        }
        emit_family(s, "figure", f);
    } else if (id == "fig-OPT2DPSPEC") {
        f = {"Zero-frequency spectrum vs drive, g^2=0.001", "mu", "V(0)", grid(0.5, 0.995, 0.0025), {}, {}, true};
        json optima = json::array();
        double prev = 0.0;
        bool ordered = true;
        for (double gr : {10.0, 1.0, 0.1, 0.01, 0.001}) {
            f.curves.emplace_back(tag("gr", gr), [&, gr](double mu) { return an_v0(with_mu(base, mu, gr)); });
            opo_optimum o;
            check(opo_optimal_drive(gr, base.g, OPO_OPT_DIRECT_SCAN, OPO_QUINTIC_CORRECTED, &o));
            optima.push_back({{"gamma_r", gr}, {"optimum", optimum_json(o)}});
            if (prev > 0.0) ordered = ordered && o.V_opt < prev;
            prev = o.V_opt;
        }
        emit_family(s, "figure", f);
        s.out().write_json("optima.json", optima);
        s.check_flag("optimum improves as gamma_r decreases", ordered, "gamma_r = 10 ... 0.001");
    } else if (id == "fig-TOT2dp01spec") {
        f = {"Spectrum near the optimum, g^2=0.001, gamma_r=0.01", "omega (units of gamma1)", "V(Omega)",
             grid(0.0, std::min(wmax, 1.0), 0.005), {}, {}, true};
        for (double mu : {0.9, 0.93, 0.96})
            f.curves.emplace_back(tag("mu", mu), [&, mu](double w) {
                return an_spectrum(with_mu(base, mu, 0.01), OPO_POSITIVE_P, w);
            });
        emit_family(s, "figure", f);
        auto curvature = [&](double mu) {
            const opo_params p = with_mu(base, mu, 0.01);
            const double h = 1e-3;
            return an_spectrum(p, OPO_POSITIVE_P, h) - an_spectrum(p, OPO_POSITIVE_P, 0.0);
        };
        s.check_flag("local minimum at Omega=0 for mu=0.90", curvature(0.90) > 0.0, "");
        s.check_flag("local maximum at Omega=0 for mu=0.96", curvature(0.96) < 0.0, "");
    }
    s.finish();
    return kExitOk;
}

}  // namespace

const std::vector<std::string>& reproduce_ids() {
    static const std::vector<std::string> ids{
        "fig-Sqmom",        "fig-NLSqmom",  "fig-TOTALSPEC", "fig-NLSPEC",  "fig-NL2PWSPEC",
        "fig-OPT2DPSPEC",   "fig-TOT2dp01spec", "fig-OTSIM9", "fig-OPTSIM01", "moment-0272",
        "deltav0-375",      "v0-0071",      "optimum-093"};
    return ids;
}

json paper_scale_preset() { return {{"n_traj", 100000}, {"tau_max", 2000.0}}; }

json reproduce_config(const std::string& id, bool paper_scale) {
    json j{{"g2", 1e-3}, {"gamma_r", 0.5}, {"mu", 0.9}, {"out_dir", "reproduce/" + id}};
    if (id == "moment-0272" || id == "deltav0-375" || id == "fig-OTSIM9") {
        j["n_traj"] = paper_scale ? 100000 : 10000;
        j["tau_max"] = 1000.0;
        j["dtau"] = 0.1;
        if (id != "moment-0272") j["paired"] = true;
    } else if (id == "fig-OPTSIM01") {
        j["gamma_r"] = 0.01;
        j["mu"] = 0.93;
        j["paired"] = true;
        j["n_traj"] = 10000;
        j["tau_max"] = paper_scale ? 2000.0 : 1000.0;
        j["dtau"] = paper_scale ? 0.05 : 0.1;
    } else if (id == "v0-0071") {
        j["gamma_r"] = 1.0;
    } else if (id == "optimum-093" || id == "fig-TOT2dp01spec") {
        j["gamma_r"] = 0.01;
        j["mu"] = 0.93;
    } else if (std::find(reproduce_ids().begin(), reproduce_ids().end(), id) == reproduce_ids().end()) {
        throw ConfigError("id", "unknown reproduce id '" + id + "' (try 'reproduce list')");
    }
    return j;
}

int run_command(const Context& ctx) {
    Session s(ctx);
    const std::string& cmd = ctx.command;
    if (cmd == "moments") return cmd_moments(s);
    if (cmd == "spectrum") return cmd_spectrum(s);
    if (cmd == "delta") return cmd_delta(s);
    if (cmd == "triple") return cmd_triple(s);
    if (cmd == "analytic") return cmd_analytic(s);
    if (cmd == "optimize") return cmd_optimize(s);
    const std::string& id = ctx.reproduce_id;
    if (id == "moment-0272") return rep_moment_0272(s);
    if (id == "deltav0-375") return rep_delta(s, false);
    if (id == "fig-OTSIM9") return rep_delta(s, true);
    if (id == "fig-OPTSIM01") return rep_optsim01(s);
    if (id == "v0-0071") {
        const double v = an_v0(ctx.cfg.params());
        s.compare("analytic V(0) at gamma_r=1, mu=0.9", v, NAN, 0.0071, 0.0069, 0.0073);
        s.finish();
        return kExitOk;
    }
    if (id == "optimum-093") {
        std::map<int, opo_optimum> found;
        const json results = optimize_all(ctx.cfg, &found);
        s.out().write_json("optimum.json", {{"schema", "opo-optimum/1"},
                                            {"gamma_r", ctx.cfg.gamma_r},
                                            {"g2", ctx.cfg.g2},
                                            {"results", results}});
        const auto& d = found.at(OPO_OPT_DIRECT_SCAN);
        s.compare("DirectScan mu_opt", d.mu_opt, NAN, 0.93, 0.92, 0.94);
        s.compare("DirectScan V_opt", d.V_opt, NAN, 2.2e-3, 2.0e-3, 2.4e-3);
        s.finish();
        return kExitOk;
    }
    return rep_analytic_figure(s, id);
}

}  // namespace cli
