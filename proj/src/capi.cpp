#include "opo/opo.h"

#include <chrono>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "opo/analytic.hpp"
#include "opo/errors.hpp"
#include "opo/estimators.hpp"
#include "opo/integrator.hpp"

using namespace opo;

struct opo_run {
    ScaledParams params;
    SimGrid grid;
    EnsembleSpec spec;
    std::unique_ptr<MomentAccumulator> moments;
    std::unique_ptr<SpectrumAccumulator> spectrum;
    std::unique_ptr<DeltaSpectrumAccumulator> delta;
    opo_progress_fn progress = nullptr;
    void* progress_user = nullptr;
    std::vector<std::pair<std::uint64_t, std::string>> dumps;
    bool executed = false;
    EnsembleReport report;
    double wall = 0.0;
    std::optional<MomentSet> moment_result;
    std::optional<SpectrumEstimate> spectrum_result;
    std::optional<DeltaSpectrumResult> delta_result;
};

struct opo_spectrum {
    SpectrumEstimate est;
};

namespace {

thread_local std::string g_last_error;

opo_status fail(opo_status s, const std::string& msg) {
    g_last_error = msg;
    return s;
}

template <class F>
opo_status guard(F&& f) {
    try {
        f();
        return OPO_OK;
    } catch (const DomainError& e) {
        return fail(OPO_ERR_DOMAIN, e.what());
    } catch (const ParameterError& e) {
        return fail(OPO_ERR_PARAMETER, e.what());
    } catch (const UsageError& e) {
        return fail(OPO_ERR_USAGE, e.what());
    } catch (const SolverError& e) {
        return fail(OPO_ERR_SOLVER, e.what());
    } catch (const EstimatorError& e) {
        return fail(OPO_ERR_ESTIMATOR, e.what());
    } catch (const IoError& e) {
        return fail(OPO_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return fail(OPO_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(OPO_ERR_INTERNAL, "unknown error");
    }
}

void need(const void* p, const char* what) {
    if (!p) throw UsageError(std::string("null pointer: ") + what);
}

Representation rep_of(int r) {
    if (r == OPO_POSITIVE_P) return Representation::PositiveP;
    if (r == OPO_WIGNER) return Representation::TruncatedWigner;
    throw ParameterError("unknown representation code");
}

int rep_code(Representation r) { return r == Representation::PositiveP ? OPO_POSITIVE_P : OPO_WIGNER; }

ScaledParams params_of(const opo_params* p) {
    need(p, "params");
    ScaledParams s{p->g, p->mu, p->gamma_r};
    s.validate();
    return s;
}

SimGrid grid_of(const opo_grid* g) {
    need(g, "grid");
    SimGrid out;
    out.dtau = g->dtau;
    out.tau_max = g->tau_max;
    out.tau_discard = g->tau_discard;
    out.sample_stride = g->sample_stride;
    out.noise_substeps = g->noise_substeps;
    out.fixed_point_iterations = g->fixed_point_iterations;
    out.validate();
    return out;
}

opo_estimate est(const Estimate& e) { return {e.value, e.std_error, e.imag}; }

QuadratureSelector selector(int mode, double theta) {
    QuadratureSelector s{mode, theta};
    s.validate();
    return s;
}

std::optional<double> band(double omega_max) {
    if (omega_max > 0.0) return omega_max;
    return std::nullopt;
}

void check_fresh(const opo_run* run) {
    need(run, "run");
    if (run->executed) throw UsageError("run already executed");
}

}  // namespace

extern "C" {

const char* opo_version(void) { return "1.0.0"; }

const char* opo_last_error(void) { return g_last_error.c_str(); }

const char* opo_status_name(opo_status s) {
    switch (s) {
        case OPO_OK: return "ok";
        case OPO_ERR_PARAMETER: return "parameter";
        case OPO_ERR_DOMAIN: return "domain";
        case OPO_ERR_USAGE: return "usage";
        case OPO_ERR_SOLVER: return "solver";
        case OPO_ERR_ESTIMATOR: return "estimator";
        case OPO_ERR_IO: return "io";
        case OPO_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

opo_status opo_params_validate(const opo_params* p) {
    return guard([&] { params_of(p); });
}

opo_status opo_params_from_g2(double g2, double mu, double gamma_r, opo_params* out) {
    return guard([&] {
        need(out, "out");
        const ScaledParams s = ScaledParams::from_g2(g2, mu, gamma_r);
        *out = {s.g, s.mu, s.gamma_r};
    });
}

opo_status opo_params_from_physical(const opo_physical* phys, opo_params* out) {
    return guard([&] {
        need(phys, "physical");
        need(out, "out");
        PhysicalParams pp;
        pp.gamma1 = phys->gamma1;
        pp.gamma2 = phys->gamma2;
        pp.chi = phys->chi;
        pp.drive = phys->drive;
        const ScaledParams s = scale_params(pp);
        *out = {s.g, s.mu, s.gamma_r};
    });
}

opo_status opo_params_to_physical(const opo_params* p, double gamma1, opo_physical* out) {
    return guard([&] {
        need(out, "out");
        const PhysicalParams pp = unscale_params(params_of(p), gamma1);
        *out = {pp.gamma1, pp.gamma2, pp.chi, pp.drive};
    });
}

opo_status opo_params_warnings(const opo_params* p, char* buf, size_t cap, size_t* count) {
    return guard([&] {
        const auto w = params_of(p).warnings();
        std::string joined;
        for (std::size_t i = 0; i < w.size(); ++i) joined += (i ? "\n" : "") + w[i];
        if (count) *count = w.size();
        if (buf && cap) {
            const std::size_t n = std::min(cap - 1, joined.size());
            std::memcpy(buf, joined.data(), n);
            buf[n] = '\0';
        }
    });
}

opo_status opo_thresholds(const opo_params* p, double* n_c, double* i_c, double* e_c) {
    return guard([&] {
        const ScaledParams s = params_of(p);
        if (n_c) *n_c = s.n_c();
        if (i_c) *i_c = s.i_c();
        if (e_c) *e_c = s.e_c();
    });
}

opo_status opo_classical_steady_state(const opo_params* p, opo_classical_state* out, size_t cap,
                                      size_t* n) {
    return guard([&] {
        const auto states = classical_steady_state(params_of(p));
        if (n) *n = states.size();
        for (std::size_t i = 0; i < states.size() && i < cap; ++i) {
            need(out, "out");
            const auto& c = states[i];
            out[i] = {c.alpha1.real(), c.alpha1.imag(), c.alpha2.real(), c.alpha2.imag(),
                      c.branch == Branch::Below       ? OPO_BRANCH_BELOW
                      : c.branch == Branch::AbovePlus ? OPO_BRANCH_ABOVE_PLUS
                                                      : OPO_BRANCH_ABOVE_MINUS};
        }
    });
}

opo_status opo_linear_spectrum(double mu, double omega, int quadrature, double* S, double* V) {
    return guard([&] {
        if (quadrature != OPO_QUAD_X && quadrature != OPO_QUAD_Y)
            throw ParameterError("unknown quadrature code");
        const auto r = analytic::linear_spectrum(
            mu, omega, quadrature == OPO_QUAD_X ? analytic::Quadrature::X : analytic::Quadrature::Y);
        if (S) *S = r.S;
        if (V) *V = r.V;
    });
}

opo_status opo_analytic_moments_eval(const opo_params* p, int representation,
                                     opo_analytic_moments* out) {
    return guard([&] {
        need(out, "out");
        const ScaledParams s = params_of(p);
        const auto m = analytic::nonlinear_moments(s.mu, s.gamma_r, s.g, rep_of(representation));
        *out = {};
        out->representation = representation;
        out->x2_2 = m.x2_2;
        out->y1y1 = m.y1y1;
        out->x1x1 = m.x1x1;
        out->y1y3 = m.y1y3;
        out->triple_112 = m.triple_112;
        out->has_wigner_terms = m.y2y2.has_value();
        out->y2y2 = m.y2y2.value_or(0.0);
        out->triple_sum = m.triple_sum.value_or(0.0);
        out->y1_op_sq = m.y1_op_sq;
        out->y1_op_offset = m.y1_op_offset();
        out->nonlinear_part = m.nonlinear_part;
    });
}

opo_status opo_analytic_spectrum(const opo_params* p, int representation, double omega, double* V) {
    return guard([&] {
        need(V, "V");
        const ScaledParams s = params_of(p);
        *V = analytic::nonlinear_spectrum(s.mu, s.gamma_r, s.g, omega, rep_of(representation));
    });
}

opo_status opo_analytic_spectrum_correction(const opo_params* p, int representation, double omega,
                                            double* dV) {
    return guard([&] {
        need(dV, "dV");
        const ScaledParams s = params_of(p);
        *dV = analytic::spectrum_correction(s.mu, s.gamma_r, s.g, omega, rep_of(representation));
    });
}

opo_status opo_analytic_internal_spectrum(const opo_params* p, int representation, double omega,
                                          double* S) {
    return guard([&] {
        need(S, "S");
        const ScaledParams s = params_of(p);
        *S = analytic::internal_spectrum(s.mu, s.gamma_r, s.g, omega, rep_of(representation));
    });
}

opo_status opo_analytic_triple(const opo_params* p, int representation, double* scaled,
                               double* unscaled) {
    return guard([&] {
        const ScaledParams s = params_of(p);
        const Representation r = rep_of(representation);
        if (scaled) *scaled = analytic::triple_correlation(s.mu, s.gamma_r, r);
        if (unscaled) *unscaled = analytic::triple_unscaled(s.mu, s.gamma_r, s.g, r);
    });
}

opo_status opo_analytic_triple_spectrum(double mu, double gamma_r, double w1, double w2, double w3,
                                        double* re, double* im) {
    return guard([&] {
        const auto v = analytic::triple_spectrum(mu, gamma_r, w1, w2, w3);
        if (re) *re = v.real();
        if (im) *im = v.imag();
    });
}

opo_status opo_analytic_v0(const opo_params* p, double* V) {
    return guard([&] {
        need(V, "V");
        const ScaledParams s = params_of(p);
        *V = analytic::v0(s.mu, s.gamma_r, s.g);
    });
}

opo_status opo_optimal_drive(double gamma_r, double g, int method, int quintic_form,
                             opo_optimum* out) {
    return guard([&] {
        need(out, "out");
        analytic::OptimizeMethod m;
        switch (method) {
            case OPO_OPT_QUINTIC: m = analytic::OptimizeMethod::QuinticNumeric; break;
            case OPO_OPT_ASYMPTOTIC: m = analytic::OptimizeMethod::Asymptotic; break;
            case OPO_OPT_DIRECT_SCAN: m = analytic::OptimizeMethod::DirectScan; break;
            default: throw ParameterError("unknown optimize method code");
        }
        if (quintic_form != OPO_QUINTIC_CORRECTED && quintic_form != OPO_QUINTIC_AS_PRINTED)
            throw ParameterError("unknown quintic form code");
        const auto r = analytic::optimal_drive(gamma_r, g, m,
                                               quintic_form == OPO_QUINTIC_CORRECTED
                                                   ? analytic::QuinticForm::Corrected
                                                   : analytic::QuinticForm::AsPrinted);
        int regime = OPO_REGIME_DIRECT_SCAN;
        switch (r.regime) {
            case analytic::Regime::QuinticNumeric: regime = OPO_REGIME_QUINTIC; break;
            case analytic::Regime::LargeGammaAsymptotic: regime = OPO_REGIME_LARGE_GAMMA; break;
            case analytic::Regime::SmallGammaAsymptotic: regime = OPO_REGIME_SMALL_GAMMA; break;
            case analytic::Regime::DirectScan: regime = OPO_REGIME_DIRECT_SCAN; break;
        }
        *out = {r.mu_opt, r.delta, r.V_opt, regime, method, r.iterations};
    });
}

void opo_grid_default(opo_grid* out) {
    if (!out) return;
    const SimGrid g;
    *out = {g.dtau, g.tau_max, g.tau_discard, g.sample_stride, g.noise_substeps,
            g.fixed_point_iterations};
}

void opo_ensemble_default(opo_ensemble* out) {
    if (!out) return;
    *out = {10000, 1, OPO_POSITIVE_P, OPO_NONLINEAR, 0, 1};
}

opo_status opo_grid_bins(const opo_grid* grid, size_t* bins) {
    return guard([&] {
        need(bins, "bins");
        *bins = grid_of(grid).bin_count();
    });
}

opo_status opo_run_create(const opo_params* p, const opo_grid* grid, const opo_ensemble* ens,
                          opo_run** out) {
    return guard([&] {
        need(out, "out");
        need(ens, "ensemble");
        auto run = std::make_unique<opo_run>();
        run->params = params_of(p);
        run->grid = grid_of(grid);
        run->spec.n_traj = ens->n_traj;
        run->spec.seed = ens->seed;
        run->spec.rep = rep_of(ens->representation);
        if (ens->linearization != OPO_NONLINEAR && ens->linearization != OPO_LINEARIZED)
            throw ParameterError("unknown linearization code");
        run->spec.mode = ens->linearization == OPO_LINEARIZED ? LinearizationMode::Linearized
                                                               : LinearizationMode::FullNonlinear;
        run->spec.paired = ens->paired != 0;
        run->spec.workers = ens->workers;
        run->spec.validate();
        if (run->params.mu >= 1.0) throw ParameterError("simulation requires mu < 1");
        *out = run.release();
    });
}

void opo_run_destroy(opo_run* run) { delete run; }

opo_status opo_run_request_moments(opo_run* run) {
    return guard([&] {
        check_fresh(run);
        run->moments = std::make_unique<MomentAccumulator>(run->spec.rep, run->spec.n_traj);
    });
}

opo_status opo_run_request_spectrum(opo_run* run, int mode, double theta, double omega_max) {
    return guard([&] {
        check_fresh(run);
        run->spectrum = std::make_unique<SpectrumAccumulator>(
            run->spec.rep, run->grid, run->spec.n_traj, selector(mode, theta), band(omega_max));
    });
}

opo_status opo_run_request_delta(opo_run* run, int mode, double theta, double omega_max) {
    return guard([&] {
        check_fresh(run);
        if (!run->spec.paired) throw EstimatorError("delta spectrum requires a paired ensemble");
        run->delta = std::make_unique<DeltaSpectrumAccumulator>(
            run->spec.rep, run->grid, run->spec.n_traj, selector(mode, theta), band(omega_max));
    });
}

opo_status opo_run_set_progress(opo_run* run, opo_progress_fn fn, void* user) {
    return guard([&] {
        need(run, "run");
        run->progress = fn;
        run->progress_user = user;
    });
}

opo_status opo_run_request_dump(opo_run* run, uint64_t index, const char* path) {
    return guard([&] {
        check_fresh(run);
        need(path, "path");
        if (index >= run->spec.n_traj) throw ParameterError("dump index outside the ensemble");
        run->dumps.emplace_back(index, path);
    });
}

opo_status opo_run_execute(opo_run* run) {
    opo_status st = guard([&] {
        check_fresh(run);
        std::vector<TrajectorySink*> sinks;
        if (run->moments) sinks.push_back(run->moments.get());
        if (run->spectrum) sinks.push_back(run->spectrum.get());
        if (run->delta) sinks.push_back(run->delta.get());
        ProgressFn progress;
        if (run->progress)
            progress = [run](std::size_t done, std::size_t total) {
                run->progress(done, total, run->progress_user);
            };
        const auto t0 = std::chrono::steady_clock::now();
        run->report = run_ensemble(run->spec, run->grid, run->params, sinks, progress);
        run->wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        run->executed = true;
        if (run->moments) run->moment_result = run->moments->result();
        if (run->spectrum) run->spectrum_result = run->spectrum->result();
        if (run->delta) run->delta_result = run->delta->result();
    });
    if (st != OPO_OK) return st;
    return guard([&] {
        for (const auto& [index, path] : run->dumps) {
            const TrajectoryRecord rec = run_trajectory(run->spec, run->grid, run->params, index);
            std::ofstream os(path);
            if (!os) throw IoError("cannot open " + path);
            write_trajectory_csv(rec, os);
            if (!os) throw IoError("write failed: " + path);
        }
    });
}

opo_status opo_run_report(const opo_run* run, opo_report* out) {
    return guard([&] {
        need(run, "run");
        need(out, "out");
        if (!run->executed) throw UsageError("run not executed");
        *out = {run->report.n_traj, run->report.n_divergent, run->report.reliable() ? 1 : 0, run->wall};
    });
}

opo_status opo_run_moments(const opo_run* run, opo_moment_set* out) {
    return guard([&] {
        need(run, "run");
        need(out, "out");
        if (!run->moment_result) throw UsageError("moments were not requested or run not executed");
        const MomentSet& m = *run->moment_result;
        *out = {};
        out->representation = rep_code(m.rep);
        out->n_traj = m.n_traj;
        out->n_used = m.n_used;
        out->x1_sq = est(m.x1_sq);
        out->y1_sq = est(m.y1_sq);
        out->x2 = est(m.x2);
        out->y2 = est(m.y2);
        out->triple = est(m.triple);
        out->has_triple_112 = m.triple_112.has_value();
        if (m.triple_112) out->triple_112 = est(*m.triple_112);
        out->y1_op_sq = est(m.y1_op_sq);
        out->y1_op_offset = est(m.y1_op_offset);
    });
}

opo_status opo_run_spectrum(const opo_run* run, int which, opo_spectrum** out) {
    return guard([&] {
        need(run, "run");
        need(out, "out");
        const SpectrumEstimate* e = nullptr;
        switch (which) {
            case OPO_SPECTRUM:
                if (run->spectrum_result) e = &*run->spectrum_result;
                break;
            case OPO_DELTA:
                if (run->delta_result) e = &run->delta_result->delta;
                break;
            case OPO_DELTA_LINEAR:
                if (run->delta_result) e = &run->delta_result->linear;
                break;
            case OPO_DELTA_NONLINEAR:
                if (run->delta_result) e = &run->delta_result->nonlinear;
                break;
            default: throw ParameterError("unknown spectrum selector");
        }
        if (!e) throw UsageError("spectrum was not requested or run not executed");
        *out = new opo_spectrum{*e};
    });
}

void opo_spectrum_destroy(opo_spectrum* s) { delete s; }

size_t opo_spectrum_size(const opo_spectrum* s) { return s ? s->est.size() : 0; }

opo_status opo_spectrum_info_get(const opo_spectrum* s, opo_spectrum_info* out) {
    return guard([&] {
        need(s, "spectrum");
        need(out, "out");
        const auto& e = s->est;
        *out = {rep_code(e.rep), e.window, e.bin_duration, e.warped ? 1 : 0, e.n_traj, e.n_used};
    });
}

opo_status opo_spectrum_row_get(const opo_spectrum* s, size_t i, opo_spectrum_row* out) {
    return guard([&] {
        need(s, "spectrum");
        need(out, "out");
        const auto& e = s->est;
        if (i >= e.size()) throw ParameterError("spectrum row out of range");
        *out = {e.omega[i], e.omega_dft[i], e.V[i], e.std_error[i], e.imag_residual[i]};
    });
}

}  // extern "C"
