#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "opo/integrator.hpp"

namespace opo {

inline constexpr std::size_t kBatchCount = 10;

/// Ensemble mean with a standard error from kBatchCount contiguous batches of
/// trajectory indices. `imag` carries the imaginary part of the mean.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    double imag = 0.0;
};

/// Time-and-ensemble averaged c-number moments. For +P these are normally
/// ordered, for Wigner symmetrically ordered; y1_op_sq is the operator moment
/// <y1^2> assembled accordingly.
struct MomentSet {
    Representation rep = Representation::PositiveP;
    std::size_t n_traj = 0;
    std::size_t n_used = 0;
    Estimate x1_sq, y1_sq, x2, y2, triple;
    /// <x1 y1 (y2 - y2_lin)> from linearized partners; the lowest-order
    /// (1,1,2) part of the triple. Only for paired input.
    std::optional<Estimate> triple_112;
    Estimate y1_op_sq;
    Estimate y1_op_offset;  ///< <y1^2> - 1/2

    const char* ordering() const { return rep == Representation::PositiveP ? "normal" : "symmetric"; }
};

/// Homodyne quadrature X_j^theta = cos(theta) x_j + sin(theta) y_j.
struct QuadratureSelector {
    int mode = 1;
    double theta = 1.5707963267948966;

    static QuadratureSelector y(int j = 1) { return {j, 1.5707963267948966}; }
    static QuadratureSelector x(int j = 1) { return {j, 0.0}; }
    void validate() const;
};

/// External spectral variance on a two-sided frequency grid. omega holds the
/// effective continuous frequency of each bin: at stride 1 the trapezoidal
/// scheme maps the DFT frequency w to (2/dtau) tan(w dtau / 2) exactly for
/// linear dynamics; for larger strides omega equals the DFT frequency.
struct SpectrumEstimate {
    Representation rep = Representation::PositiveP;
    QuadratureSelector selector;
    std::vector<double> omega;
    std::vector<double> omega_dft;
    std::vector<double> V;
    std::vector<double> std_error;
    std::vector<double> imag_residual;
    double window = 0.0;
    double bin_duration = 0.0;
    bool warped = false;
    std::size_t n_traj = 0;
    std::size_t n_used = 0;

    std::size_t size() const { return omega.size(); }
    /// Index of the bin at zero frequency.
    std::size_t zero_index() const { return omega.size() / 2; }
};

struct DeltaSpectrumResult {
    SpectrumEstimate delta;      ///< V_nonlinear - V_linear
    SpectrumEstimate linear;     ///< from the linearized partners
    SpectrumEstimate nonlinear;  ///< from the full trajectories
};

/// Default reported band, a quarter of the bin Nyquist frequency.
double default_omega_max(const SimGrid& grid);

class MomentAccumulator final : public TrajectorySink {
public:
    MomentAccumulator(Representation rep, std::size_t n_traj);

    std::unique_ptr<TrajectorySink> fresh() const override;
    void add(const TrajectoryRecord& primary, const TrajectoryRecord* partner) override;
    void merge(const TrajectorySink& other) override;

    MomentSet result() const;

private:
    static constexpr std::size_t kFields = 6;
    Representation rep_;
    std::size_t n_traj_;
    std::vector<cplx> sums_;  // [batch][field], per-trajectory time averages
    std::vector<std::size_t> counts_;
    std::size_t paired_ = 0;
};

class SpectrumAccumulator final : public TrajectorySink {
public:
    SpectrumAccumulator(Representation rep, const SimGrid& grid, std::size_t n_traj,
                        QuadratureSelector sel = QuadratureSelector::y(),
                        std::optional<double> omega_max = std::nullopt);

    std::unique_ptr<TrajectorySink> fresh() const override;
    void add(const TrajectoryRecord& primary, const TrajectoryRecord* partner) override;
    void merge(const TrajectorySink& other) override;

    SpectrumEstimate result() const;

    struct Layout;

private:
    std::shared_ptr<const Layout> layout_;
    std::vector<cplx> prod_;   // [batch][bin] sum of Y Z
    std::vector<cplx> mean_;   // [batch][2] sums of Y0, Z0
    std::vector<std::size_t> counts_;
};

class DeltaSpectrumAccumulator final : public TrajectorySink {
public:
    DeltaSpectrumAccumulator(Representation rep, const SimGrid& grid, std::size_t n_traj,
                             QuadratureSelector sel = QuadratureSelector::y(),
                             std::optional<double> omega_max = std::nullopt);

    std::unique_ptr<TrajectorySink> fresh() const override;
    /// Throws EstimatorError when partner is null.
    void add(const TrajectoryRecord& primary, const TrajectoryRecord* partner) override;
    void merge(const TrajectorySink& other) override;

    DeltaSpectrumResult result() const;

private:
    std::shared_ptr<const SpectrumAccumulator::Layout> layout_;
    std::vector<cplx> delta_;  // [batch][bin]
    std::vector<cplx> lin_;    // [batch][bin]
    std::vector<cplx> mean_;   // [batch][4] sums of d0, Zd0, Yl0, Zl0
    std::vector<std::size_t> counts_;
};

MomentSet estimate_moments(std::span<const TrajectoryRecord> records, Representation rep,
                           std::span<const TrajectoryRecord> partners = {});

SpectrumEstimate estimate_output_spectrum(std::span<const TrajectoryRecord> records,
                                          Representation rep,
                                          QuadratureSelector sel = QuadratureSelector::y(),
                                          std::optional<double> omega_max = std::nullopt);

DeltaSpectrumResult estimate_delta_spectrum(std::span<const TrajectoryRecord> nonlinear,
                                            std::span<const TrajectoryRecord> linear,
                                            Representation rep,
                                            QuadratureSelector sel = QuadratureSelector::y(),
                                            std::optional<double> omega_max = std::nullopt);

Estimate estimate_triple(std::span<const TrajectoryRecord> records, Representation rep);

}  // namespace opo
