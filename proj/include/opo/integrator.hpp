#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "opo/dynamics.hpp"

namespace opo {

/// Time grid of one trajectory. Everything after tau_discard is recorded in
/// bins of sample_stride steps; those bins are the Fourier-analysis unit.
struct SimGrid {
    double dtau = 0.1;
    double tau_max = 1000.0;
    double tau_discard = 500.0;
    std::size_t sample_stride = 1;
    /// Brownian increments are drawn on a grid dtau / noise_substeps and summed,
    /// so runs at dtau and dtau / 2 can share one noise path.
    std::size_t noise_substeps = 1;
    int fixed_point_iterations = 4;

    /// Grid with the equilibration cut at tau_max / 2.
    static SimGrid halved(double dtau, double tau_max, std::size_t stride = 1);

    void validate() const;
    std::size_t total_steps() const;
    std::size_t discard_steps() const;
    std::size_t bin_count() const;
    double bin_duration() const { return dtau * static_cast<double>(sample_stride); }
    double window() const { return bin_duration() * static_cast<double>(bin_count()); }

    static constexpr std::size_t kMinBins = 64;
};

/// One output bin. x1..y2 are averages of the step midpoints (the spectral
/// samples); the *_end fields and products average instantaneous values at
/// step ends (the moment samples). noise is the summed raw increment per
/// channel (channel 0 drives the signal, 1 the pump in Wigner).
struct BinSample {
    cplx x1, y1, x2, y2;
    cplx x1_end, y1_end, y2_end;
    cplx x1_sq, y1_sq, triple;
    std::array<cplx, 2> noise{};
};

struct TrajectoryRecord {
    std::uint64_t index = 0;
    Representation rep = Representation::PositiveP;
    LinearizationMode mode = LinearizationMode::FullNonlinear;
    ScaledParams params;
    double dtau = 0.0;
    std::size_t sample_stride = 1;
    double tau_start = 0.0;  ///< start of the first recorded bin
    std::vector<BinSample> bins;
    PhaseState initial;
    PhaseState final_state;
    bool divergent = false;
    bool noise_recorded = true;

    double bin_duration() const { return dtau * static_cast<double>(sample_stride); }
    double window() const { return bin_duration() * static_cast<double>(bins.size()); }
};

struct EnsembleSpec {
    std::size_t n_traj = 2;
    std::uint64_t seed = 1;
    Representation rep = Representation::PositiveP;
    LinearizationMode mode = LinearizationMode::FullNonlinear;
    /// Run each trajectory twice on one noise path: full nonlinear (primary)
    /// and linearized (partner). `mode` is ignored when set.
    bool paired = false;
    unsigned workers = 1;

    void validate() const;
    LinearizationMode primary_mode() const {
        return paired ? LinearizationMode::FullNonlinear : mode;
    }
};

struct EnsembleReport {
    std::size_t n_traj = 0;
    std::size_t n_divergent = 0;

    double divergent_fraction() const {
        return n_traj ? static_cast<double>(n_divergent) / static_cast<double>(n_traj) : 0.0;
    }
    /// More than 0.1% divergent trajectories marks the ensemble unreliable.
    bool reliable() const { return n_divergent * 1000 <= n_traj; }
};

struct EnsembleResult {
    std::vector<TrajectoryRecord> records;
    std::vector<TrajectoryRecord> linear_records;  ///< only when paired
    EnsembleReport report;
};

/// Streaming reduction target. The runner hands each non-divergent trajectory
/// (and its linearized partner for paired runs) to a fresh per-chunk copy,
/// then merges chunks in index order, so results do not depend on the worker
/// count.
class TrajectorySink {
public:
    virtual ~TrajectorySink() = default;
    virtual std::unique_ptr<TrajectorySink> fresh() const = 0;
    virtual void add(const TrajectoryRecord& primary, const TrajectoryRecord* linear_partner) = 0;
    virtual void merge(const TrajectorySink& other) = 0;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Midpoint fixed point xbar = x + (dtau f(xbar) + B(xbar) w) / 2 iterated
/// `iterations` times from xbar = x; returns 2 xbar - x.
PhaseState semi_implicit_step(const PhaseState& x, double dtau, const OpoSystem& sys,
                              const NoiseIncrement& w, int iterations = 4);

PhaseState semi_implicit_step(const PhaseState& x, double dtau, Representation rep,
                              LinearizationMode mode, const ScaledParams& s,
                              const NoiseIncrement& w, int iterations = 4);

/// Noise increment for step `step` of trajectory `index`; depends only on
/// (seed, index, step) and the grid's substep count.
NoiseIncrement step_noise(Representation rep, std::uint64_t seed, std::uint64_t index,
                          std::uint64_t step, double dtau, std::size_t substeps);

/// Equilibrium-like starting point for trajectory `index`.
PhaseState initial_state(Representation rep, const ScaledParams& s, std::uint64_t seed,
                         std::uint64_t index);

TrajectoryRecord run_trajectory(const EnsembleSpec& spec, const SimGrid& grid,
                                const ScaledParams& s, std::uint64_t index,
                                LinearizationMode mode);

inline TrajectoryRecord run_trajectory(const EnsembleSpec& spec, const SimGrid& grid,
                                       const ScaledParams& s, std::uint64_t index) {
    return run_trajectory(spec, grid, s, index, spec.primary_mode());
}

/// Collects every record. Meant for small ensembles; use the sink overload
/// for production sizes.
EnsembleResult run_ensemble(const EnsembleSpec& spec, const SimGrid& grid, const ScaledParams& s);

EnsembleReport run_ensemble(const EnsembleSpec& spec, const SimGrid& grid, const ScaledParams& s,
                            std::span<TrajectorySink* const> sinks,
                            const ProgressFn& progress = {});

/// CSV dump, one row per bin:
/// tau,x1_re,x1_im,y1_re,y1_im,x2_re,x2_im,y2_re,y2_im,
/// noise1_re,noise1_im,noise2_re,noise2_im
void write_trajectory_csv(const TrajectoryRecord& rec, std::ostream& os);

}  // namespace opo
