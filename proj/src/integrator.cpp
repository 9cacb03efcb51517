#include "opo/integrator.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "opo/errors.hpp"
#include "opo/rng.hpp"

namespace opo {

namespace {

std::size_t whole_steps(double span, double dtau, const char* what) {
    const double n = span / dtau;
    const double r = std::round(n);
    if (std::abs(n - r) > 1e-9 * std::max(1.0, r))
        throw ParameterError(std::string(what) + " is not a whole number of steps");
    return static_cast<std::size_t>(r);
}

using State = std::array<cplx, 4>;

struct StepScratch {
    State f, b, xbar;
};

inline void midpoint_step(const OpoSystem& sys, std::size_t n, double dtau, int iterations,
                          const NoiseIncrement& w, const State& x, State& xbar, StepScratch& s) {
    xbar = x;
    for (int it = 0; it < iterations; ++it) {
        sys.drift_into(xbar, s.f);
        sys.noise_into(xbar, w, s.b);
        for (std::size_t k = 0; k < n; ++k) xbar[k] = x[k] + 0.5 * (dtau * s.f[k] + s.b[k]);
    }
}

inline bool all_finite(const State& x, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k)
        if (!std::isfinite(x[k].real()) || !std::isfinite(x[k].imag())) return false;
    return true;
}

}  // namespace

SimGrid SimGrid::halved(double dtau, double tau_max, std::size_t stride) {
    SimGrid g;
    g.dtau = dtau;
    g.tau_max = tau_max;
    g.tau_discard = tau_max / 2.0;
    g.sample_stride = stride;
    return g;
}

void SimGrid::validate() const {
    if (!(dtau > 0.0) || !std::isfinite(dtau)) throw ParameterError("dtau must be positive");
    if (!(tau_max > 0.0)) throw ParameterError("tau_max must be positive");
    if (!(tau_discard >= 0.0) || !(tau_discard < tau_max))
        throw ParameterError("tau_discard must lie in [0, tau_max)");
    if (sample_stride == 0) throw ParameterError("sample_stride must be at least 1");
    if (noise_substeps == 0) throw ParameterError("noise_substeps must be at least 1");
    if (fixed_point_iterations < 1) throw ParameterError("fixed_point_iterations must be >= 1");
    const std::size_t total = whole_steps(tau_max, dtau, "tau_max");
    const std::size_t discard = whole_steps(tau_discard, dtau, "tau_discard");
    if ((total - discard) % sample_stride != 0)
        throw ParameterError("recorded window is not a whole number of bins");
    if ((total - discard) / sample_stride < kMinBins)
        throw ParameterError("recorded window has fewer than 64 bins");
}

std::size_t SimGrid::total_steps() const { return whole_steps(tau_max, dtau, "tau_max"); }

std::size_t SimGrid::discard_steps() const {
    return whole_steps(tau_discard, dtau, "tau_discard");
}

std::size_t SimGrid::bin_count() const {
    return (total_steps() - discard_steps()) / sample_stride;
}

void EnsembleSpec::validate() const {
    if (n_traj < 2) throw ParameterError("n_traj must be at least 2");
    if (workers == 0) throw ParameterError("workers must be at least 1");
}

PhaseState semi_implicit_step(const PhaseState& x, double dtau, const OpoSystem& sys,
                              const NoiseIncrement& w, int iterations) {
    if (!(dtau > 0.0)) throw ParameterError("dtau must be positive");
    if (x.rep != sys.representation()) throw UsageError("phase state representation mismatch");
    StepScratch scratch;
    State xbar;
    midpoint_step(sys, x.size(), dtau, iterations, w, x.a, xbar, scratch);
    PhaseState out = PhaseState::zero(x.rep);
    for (std::size_t k = 0; k < x.size(); ++k) out.a[k] = 2.0 * xbar[k] - x.a[k];
    return out;
}

PhaseState semi_implicit_step(const PhaseState& x, double dtau, Representation rep,
                              LinearizationMode mode, const ScaledParams& s,
                              const NoiseIncrement& w, int iterations) {
    return semi_implicit_step(x, dtau, OpoSystem(rep, mode, s), w, iterations);
}

NoiseIncrement step_noise(Representation rep, std::uint64_t seed, std::uint64_t index,
                          std::uint64_t step, double dtau, std::size_t substeps) {
    const GaussianStream stream(seed, index);
    const double h = dtau / static_cast<double>(substeps);
    NoiseIncrement w;
    for (std::size_t j = 0; j < substeps; ++j) {
        const std::uint64_t fine = step * substeps + j;
        if (rep == Representation::PositiveP) {
            const auto n = stream.normal_pair(StreamKind::StepNoise, fine, 0);
            const double sd = std::sqrt(h);
            w.dw[0] += sd * n[0];
            w.dw[1] += sd * n[1];
        } else {
            const auto n0 = stream.normal_pair(StreamKind::StepNoise, fine, 0);
            const auto n1 = stream.normal_pair(StreamKind::StepNoise, fine, 1);
            const double sd = std::sqrt(0.5 * h);
            w.dw[0] += sd * cplx(n0[0], n0[1]);
            w.dw[1] += sd * cplx(n1[0], n1[1]);
        }
    }
    return w;
}

PhaseState initial_state(Representation rep, const ScaledParams& s, std::uint64_t seed,
                         std::uint64_t index) {
    s.validate();
    if (s.mu >= 1.0) throw ParameterError("trajectory simulation requires mu < 1");
    const GaussianStream stream(seed, index);
    const auto n0 = stream.normal_pair(StreamKind::Initial, 0, 0);
    const double pump = s.pump_amplitude();
    if (rep == Representation::PositiveP) {
        const double x1 = std::sqrt(s.mu / (1.0 - s.mu)) * n0[0];
        return PhaseState::positive_p(0.5 * x1, 0.5 * x1, pump, pump);
    }
    const auto n1 = stream.normal_pair(StreamKind::Initial, 0, 1);
    const double x1 = std::sqrt(1.0 / (1.0 - s.mu)) * n0[0];
    const double y1 = std::sqrt(1.0 / (1.0 + s.mu)) * n0[1];
    // vacuum width: <|d alpha2|^2> = 1/2
    const cplx dpump = 0.5 * cplx(n1[0], n1[1]);
    return PhaseState::wigner(0.5 * cplx(x1, y1), pump + dpump);
}

TrajectoryRecord run_trajectory(const EnsembleSpec& spec, const SimGrid& grid,
                                const ScaledParams& s, std::uint64_t index,
                                LinearizationMode mode) {
    grid.validate();
    const OpoSystem sys(spec.rep, mode, s);
    const std::size_t n = spec.rep == Representation::PositiveP ? 4 : 2;
    const std::size_t total = grid.total_steps();
    const std::size_t discard = grid.discard_steps();
    const std::size_t stride = grid.sample_stride;
    const double dtau = grid.dtau;
    const int iters = grid.fixed_point_iterations;

    TrajectoryRecord rec;
    rec.index = index;
    rec.rep = spec.rep;
    rec.mode = mode;
    rec.params = s;
    rec.dtau = dtau;
    rec.sample_stride = stride;
    rec.tau_start = static_cast<double>(discard) * dtau;
    rec.bins.assign(grid.bin_count(), BinSample{});
    rec.initial = initial_state(spec.rep, s, spec.seed, index);

    PhaseState probe = PhaseState::zero(spec.rep);
    State x = rec.initial.a;
    State xbar{};
    StepScratch scratch;
    const double inv_stride = 1.0 / static_cast<double>(stride);
    for (std::size_t step = 0; step < total; ++step) {
        const NoiseIncrement w =
            step_noise(spec.rep, spec.seed, index, step, dtau, grid.noise_substeps);
        midpoint_step(sys, n, dtau, iters, w, x, xbar, scratch);
        for (std::size_t k = 0; k < n; ++k) x[k] = 2.0 * xbar[k] - x[k];
        if (!all_finite(x, n)) {
            rec.divergent = true;
            break;
        }
        if (step < discard) continue;
        BinSample& bin = rec.bins[(step - discard) / stride];
        probe.a = xbar;
        bin.x1 += inv_stride * probe.x1();
        bin.y1 += inv_stride * probe.y1();
        bin.x2 += inv_stride * probe.x2();
        bin.y2 += inv_stride * probe.y2();
        probe.a = x;
        const cplx x1 = probe.x1(), y1 = probe.y1(), y2 = probe.y2();
        bin.x1_end += inv_stride * x1;
        bin.y1_end += inv_stride * y1;
        bin.y2_end += inv_stride * y2;
        bin.x1_sq += inv_stride * x1 * x1;
        bin.y1_sq += inv_stride * y1 * y1;
        bin.triple += inv_stride * x1 * y1 * y2;
        bin.noise[0] += w.dw[0];
        bin.noise[1] += w.dw[1];
    }
    rec.final_state = PhaseState{spec.rep, x};
    return rec;
}

EnsembleResult run_ensemble(const EnsembleSpec& spec, const SimGrid& grid, const ScaledParams& s) {
    spec.validate();
    grid.validate();
    EnsembleResult out;
    out.records.resize(spec.n_traj);
    if (spec.paired) out.linear_records.resize(spec.n_traj);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < spec.n_traj; i = next++) {
            out.records[i] = run_trajectory(spec, grid, s, i, spec.primary_mode());
            if (spec.paired)
                out.linear_records[i] =
                    run_trajectory(spec, grid, s, i, LinearizationMode::Linearized);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < spec.workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    out.report.n_traj = spec.n_traj;
    for (std::size_t i = 0; i < spec.n_traj; ++i)
        if (out.records[i].divergent || (spec.paired && out.linear_records[i].divergent))
            ++out.report.n_divergent;
    return out;
}

EnsembleReport run_ensemble(const EnsembleSpec& spec, const SimGrid& grid, const ScaledParams& s,
                            std::span<TrajectorySink* const> sinks, const ProgressFn& progress) {
    spec.validate();
    grid.validate();
    constexpr std::size_t kChunk = 8;
    const std::size_t n_chunks = (spec.n_traj + kChunk - 1) / kChunk;

    struct ChunkResult {
        std::vector<std::unique_ptr<TrajectorySink>> sinks;
        std::size_t divergent = 0;
    };
    std::mutex mu;
    std::map<std::size_t, ChunkResult> pending;
    std::size_t next_merge = 0;
    std::size_t done = 0;
    EnsembleReport report;
    report.n_traj = spec.n_traj;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;

    auto work = [&] {
        try {
            for (std::size_t c = next++; c < n_chunks; c = next++) {
                ChunkResult res;
                for (auto* sink : sinks) res.sinks.push_back(sink->fresh());
                const std::size_t lo = c * kChunk;
                const std::size_t hi = std::min(spec.n_traj, lo + kChunk);
                for (std::size_t i = lo; i < hi; ++i) {
                    const TrajectoryRecord rec = run_trajectory(spec, grid, s, i);
                    TrajectoryRecord lin;
                    if (spec.paired)
                        lin = run_trajectory(spec, grid, s, i, LinearizationMode::Linearized);
                    if (rec.divergent || (spec.paired && lin.divergent)) {
                        ++res.divergent;
                        continue;
                    }
                    for (auto& sink : res.sinks) sink->add(rec, spec.paired ? &lin : nullptr);
                }
                std::lock_guard lock(mu);
                done += hi - lo;
                pending.emplace(c, std::move(res));
                for (auto it = pending.find(next_merge); it != pending.end();
                     it = pending.find(next_merge)) {
                    for (std::size_t k = 0; k < sinks.size(); ++k)
                        sinks[k]->merge(*it->second.sinks[k]);
                    report.n_divergent += it->second.divergent;
                    pending.erase(it);
                    ++next_merge;
                }
                if (progress) progress(done, spec.n_traj);
            }
        } catch (...) {
            std::lock_guard lock(mu);
            if (!failure) failure = std::current_exception();
            next = n_chunks;
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < spec.workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return report;
}

void write_trajectory_csv(const TrajectoryRecord& rec, std::ostream& os) {
    os << "tau,x1_re,x1_im,y1_re,y1_im,x2_re,x2_im,y2_re,y2_im,"
          "noise1_re,noise1_im,noise2_re,noise2_im\n";
    const auto old = os.precision(17);
    const double dt = rec.bin_duration();
    for (std::size_t b = 0; b < rec.bins.size(); ++b) {
        const BinSample& s = rec.bins[b];
        os << rec.tau_start + (static_cast<double>(b) + 0.5) * dt;
        for (const cplx& v : {s.x1, s.y1, s.x2, s.y2, s.noise[0], s.noise[1]})
            os << ',' << v.real() << ',' << v.imag();
        os << '\n';
    }
    os.precision(old);
}

}  // namespace opo
