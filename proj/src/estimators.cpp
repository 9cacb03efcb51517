#include "opo/estimators.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "opo/errors.hpp"

namespace opo {

namespace {

std::size_t batch_of(std::uint64_t index, std::size_t n_traj) {
    return std::min<std::size_t>(kBatchCount - 1, index * kBatchCount / n_traj);
}

void require_batches(std::size_t n_traj) {
    if (n_traj < kBatchCount)
        throw EstimatorError("fewer than 10 trajectories: cannot form 10 batches for error bars");
}

/// Pooled value and batch-spread standard error for a real statistic.
double batch_stderr(const std::vector<double>& batch_values) {
    std::size_t n = 0;
    double mean = 0.0;
    for (double v : batch_values) {
        if (std::isnan(v)) continue;
        mean += v;
        ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : batch_values)
        if (!std::isnan(v)) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

// Backward (e^{+i w t}) complex DFT of fixed length. Plans are shared and
// created under a lock; execution on caller buffers is thread safe.
class Dft {
public:
    explicit Dft(std::size_t n) : n_(n) {
        static std::mutex mu;
        static std::map<std::size_t, fftw_plan> cache;
        std::lock_guard lock(mu);
        auto it = cache.find(n);
        if (it == cache.end()) {
            std::vector<cplx> a(n), b(n);
            fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n),
                                           reinterpret_cast<fftw_complex*>(a.data()),
                                           reinterpret_cast<fftw_complex*>(b.data()),
                                           FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
            if (!p) throw EstimatorError("FFT plan creation failed");
            it = cache.emplace(n, p).first;
        }
        plan_ = it->second;
    }

    void run(std::vector<cplx>& in, std::vector<cplx>& out) const {
        out.resize(n_);
        fftw_execute_dft(plan_, reinterpret_cast<fftw_complex*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
    }

private:
    std::size_t n_;
    fftw_plan plan_;
};

}  // namespace

void QuadratureSelector::validate() const {
    if (mode != 1 && mode != 2) throw ParameterError("quadrature mode must be 1 or 2");
    if (!(theta >= 0.0 && theta < 2.0 * std::numbers::pi))
        throw ParameterError("quadrature angle must lie in [0, 2 pi)");
}

double default_omega_max(const SimGrid& grid) {
    return std::numbers::pi / grid.bin_duration() / 4.0;
}

// ---------------------------------------------------------------- moments

MomentAccumulator::MomentAccumulator(Representation rep, std::size_t n_traj)
    : rep_(rep), n_traj_(n_traj), sums_(kBatchCount * kFields), counts_(kBatchCount) {
    require_batches(n_traj);
}

std::unique_ptr<TrajectorySink> MomentAccumulator::fresh() const {
    return std::make_unique<MomentAccumulator>(rep_, n_traj_);
}

void MomentAccumulator::add(const TrajectoryRecord& rec, const TrajectoryRecord* partner) {
    if (rec.rep != rep_) throw UsageError("record representation does not match estimator");
    if (rec.bins.empty()) throw EstimatorError("trajectory has no recorded bins");
    if (partner && partner->bins.size() != rec.bins.size())
        throw EstimatorError("partner trajectory has a different bin count");
    std::array<cplx, kFields> avg{};
    for (std::size_t b = 0; b < rec.bins.size(); ++b) {
        const BinSample& s = rec.bins[b];
        avg[0] += s.x1_sq;
        avg[1] += s.y1_sq;
        avg[2] += s.x2;
        avg[3] += s.y2;
        avg[4] += s.triple;
        if (partner) {
            const BinSample& l = partner->bins[b];
            avg[5] += l.x1_end * l.y1_end * (s.y2_end - l.y2_end);
        }
    }
    const double inv = 1.0 / static_cast<double>(rec.bins.size());
    const std::size_t b = batch_of(rec.index, n_traj_);
    for (std::size_t f = 0; f < kFields; ++f) sums_[b * kFields + f] += avg[f] * inv;
    ++counts_[b];
    if (partner) ++paired_;
}

void MomentAccumulator::merge(const TrajectorySink& other) {
    const auto& o = dynamic_cast<const MomentAccumulator&>(other);
    if (o.rep_ != rep_ || o.n_traj_ != n_traj_) throw UsageError("incompatible moment accumulators");
    for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i] += o.sums_[i];
    for (std::size_t i = 0; i < kBatchCount; ++i) counts_[i] += o.counts_[i];
    paired_ += o.paired_;
}

MomentSet MomentAccumulator::result() const {
    std::size_t used = 0, filled = 0;
    for (auto c : counts_) {
        used += c;
        filled += c > 0;
    }
    if (filled < kBatchCount) throw EstimatorError("fewer than 10 non-empty batches");
    auto field = [&](std::size_t f, double scale, double offset) {
        cplx total{};
        std::vector<double> means(kBatchCount);
        for (std::size_t b = 0; b < kBatchCount; ++b) {
            total += sums_[b * kFields + f];
            means[b] = sums_[b * kFields + f].real() / static_cast<double>(counts_[b]);
        }
        total /= static_cast<double>(used);
        return Estimate{offset + scale * total.real(), scale * batch_stderr(means),
                        scale * total.imag()};
    };
    MomentSet m;
    m.rep = rep_;
    m.n_traj = n_traj_;
    m.n_used = used;
    m.x1_sq = field(0, 1.0, 0.0);
    m.y1_sq = field(1, 1.0, 0.0);
    m.x2 = field(2, 1.0, 0.0);
    m.y2 = field(3, 1.0, 0.0);
    m.triple = field(4, 1.0, 0.0);
    if (paired_ == used && used > 0) m.triple_112 = field(5, 1.0, 0.0);
    const double shift = rep_ == Representation::PositiveP ? 1.0 : 0.0;
    m.y1_op_sq = field(1, 1.0, shift);
    m.y1_op_offset = field(1, 1.0, shift - 0.5);
    return m;
}

// ---------------------------------------------------------------- spectra

struct SpectrumAccumulator::Layout {
    Representation rep;
    QuadratureSelector sel;
    std::size_t n_traj;
    std::size_t n_bins;
    double delta;   // bin duration
    double window;
    double dtau;
    bool warped;
    std::vector<std::size_t> fft_index;   // kept bins, ascending frequency
    std::vector<std::size_t> mirror;      // position of -omega in fft_index
    std::vector<double> omega_dft;
    std::vector<double> omega;
    std::size_t zero_pos;
    Dft dft;

    Layout(Representation r, const SimGrid& grid, std::size_t n, QuadratureSelector s,
           std::optional<double> omega_max)
        : rep(r), sel(s), n_traj(n), n_bins(grid.bin_count()), delta(grid.bin_duration()),
          window(grid.window()), dtau(grid.dtau), warped(grid.sample_stride == 1),
          dft(grid.bin_count()) {
        if (grid.bin_count() < SimGrid::kMinBins)
            throw EstimatorError("analysis window shorter than 64 bins");
        grid.validate();
        sel.validate();
        require_batches(n);
        const double wmax = omega_max.value_or(default_omega_max(grid));
        if (!(wmax >= 0.0)) throw ParameterError("omega_max must be non-negative");
        const double dw = 2.0 * std::numbers::pi / window;
        const auto kmax = std::min<std::size_t>(static_cast<std::size_t>(std::floor(wmax / dw + 1e-9)),
                                                (n_bins - 1) / 2);
        const auto K = static_cast<long>(kmax);
        for (long k = -K; k <= K; ++k) {
            fft_index.push_back(k >= 0 ? static_cast<std::size_t>(k)
                                       : n_bins - static_cast<std::size_t>(-k));
            const double w = dw * static_cast<double>(k);
            omega_dft.push_back(w);
            omega.push_back(warped ? 2.0 / dtau * std::tan(0.5 * w * dtau) : w);
        }
        for (std::size_t i = 0; i < fft_index.size(); ++i) mirror.push_back(fft_index.size() - 1 - i);
        zero_pos = static_cast<std::size_t>(K);
    }

    std::size_t bins() const { return fft_index.size(); }

    /// Output-field coefficient: V = vacuum + scale Re<Y Z> / T.
    double vacuum() const { return rep == Representation::PositiveP ? 1.0 : 0.0; }
    double scale() const { return rep == Representation::PositiveP ? 2.0 : 1.0; }

    /// Transform of the selected quadrature (Wigner: of the output field).
    void transform(const TrajectoryRecord& rec, std::vector<cplx>& in, std::vector<cplx>& out) const {
        if (rec.rep != rep) throw UsageError("record representation does not match estimator");
        if (rec.bins.size() != n_bins) throw EstimatorError("record bin count does not match grid");
        if (rec.bins.size() < SimGrid::kMinBins)
            throw EstimatorError("analysis window shorter than 64 bins");
        if (rep == Representation::TruncatedWigner && !rec.noise_recorded)
            throw EstimatorError("Wigner record lacks noise sums");
        const double c = std::cos(sel.theta), s = std::sin(sel.theta);
        const std::size_t ch = sel.mode == 1 ? 0 : 1;
        // output coupling sqrt(2 gamma_j): folded into Y for both representations
        const double gamma_out = sel.mode == 1 ? 1.0 : rec.params.gamma_r;
        const double amp = rep == Representation::PositiveP ? std::sqrt(gamma_out)
                                                            : std::sqrt(2.0 * gamma_out);
        in.resize(n_bins);
        for (std::size_t n = 0; n < n_bins; ++n) {
            const BinSample& b = rec.bins[n];
            cplx q = sel.mode == 1 ? c * b.x1 + s * b.y1 : c * b.x2 + s * b.y2;
            q *= amp;
            if (rep == Representation::TruncatedWigner) {
                const cplx w = b.noise[ch];
                q -= std::sqrt(2.0) * (c * w.real() + s * w.imag()) / delta;
            }
            in[n] = q;
        }
        dft.run(in, out);
        for (auto& v : out) v *= delta;
    }

    /// Partner value Z_k: Y(-omega) for +P, conj(Y(omega)) for Wigner.
    cplx partner(const std::vector<cplx>& y, std::size_t pos) const {
        return rep == Representation::PositiveP ? y[fft_index[mirror[pos]]]
                                                : std::conj(y[fft_index[pos]]);
    }

    SpectrumEstimate shell(std::size_t used) const {
        SpectrumEstimate e;
        e.rep = rep;
        e.selector = sel;
        e.omega = omega;
        e.omega_dft = omega_dft;
        e.window = window;
        e.bin_duration = delta;
        e.warped = warped;
        e.n_traj = n_traj;
        e.n_used = used;
        e.V.resize(bins());
        e.std_error.resize(bins());
        e.imag_residual.resize(bins());
        return e;
    }
};

namespace {

std::shared_ptr<SpectrumAccumulator::Layout> make_layout(Representation rep, const SimGrid& grid,
                                                         std::size_t n, QuadratureSelector sel,
                                                         std::optional<double> omega_max) {
    return std::make_shared<SpectrumAccumulator::Layout>(rep, grid, n, sel, omega_max);
}

// Covariance estimate for bin `pos` given product sums and (for the zero bin)
// first-moment sums; the zero bin subtracts the ensemble mean.
cplx covariance(cplx prod, cplx mean_y, cplx mean_z, std::size_t n, bool zero_bin) {
    const double dn = static_cast<double>(n);
    if (!zero_bin) return prod / dn;
    if (n < 2) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
    return (prod - mean_y * mean_z / dn) / (dn - 1.0);
}

}  // namespace

SpectrumAccumulator::SpectrumAccumulator(Representation rep, const SimGrid& grid,
                                         std::size_t n_traj, QuadratureSelector sel,
                                         std::optional<double> omega_max)
    : layout_(make_layout(rep, grid, n_traj, sel, omega_max)) {
    prod_.assign(kBatchCount * layout_->bins(), cplx{});
    mean_.assign(kBatchCount * 2, cplx{});
    counts_.assign(kBatchCount, 0);
}

std::unique_ptr<TrajectorySink> SpectrumAccumulator::fresh() const {
    auto out = std::unique_ptr<SpectrumAccumulator>(new SpectrumAccumulator(*this));
    std::fill(out->prod_.begin(), out->prod_.end(), cplx{});
    std::fill(out->mean_.begin(), out->mean_.end(), cplx{});
    std::fill(out->counts_.begin(), out->counts_.end(), 0);
    return out;
}

void SpectrumAccumulator::add(const TrajectoryRecord& rec, const TrajectoryRecord*) {
    const Layout& L = *layout_;
    thread_local std::vector<cplx> in, y;
    L.transform(rec, in, y);
    const std::size_t b = batch_of(rec.index, L.n_traj);
    cplx* prod = prod_.data() + b * L.bins();
    for (std::size_t i = 0; i < L.bins(); ++i) prod[i] += y[L.fft_index[i]] * L.partner(y, i);
    mean_[2 * b] += y[0];
    mean_[2 * b + 1] += L.partner(y, L.zero_pos);
    ++counts_[b];
}

void SpectrumAccumulator::merge(const TrajectorySink& other) {
    const auto& o = dynamic_cast<const SpectrumAccumulator&>(other);
    if (o.prod_.size() != prod_.size()) throw UsageError("incompatible spectrum accumulators");
    for (std::size_t i = 0; i < prod_.size(); ++i) prod_[i] += o.prod_[i];
    for (std::size_t i = 0; i < mean_.size(); ++i) mean_[i] += o.mean_[i];
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += o.counts_[i];
}


namespace {

// Batch covariances to V, stderr and residual.
void reduce(const SpectrumAccumulator::Layout& L, const std::vector<cplx>& prod,
            const std::vector<cplx>& mean, std::size_t stride, std::size_t my, std::size_t mz,
            const std::vector<std::size_t>& counts, double vacuum, SpectrumEstimate& e) {
    const double k = L.scale() / L.window;
    std::size_t used = 0;
    for (auto c : counts) used += c;
    std::vector<double> batch(kBatchCount);
    for (std::size_t i = 0; i < L.bins(); ++i) {
        const bool zero = i == L.zero_pos;
        cplx total{}, my_t{}, mz_t{};
        for (std::size_t b = 0; b < kBatchCount; ++b) {
            const cplx p = prod[b * L.bins() + i];
            total += p;
            my_t += mean[b * stride + my];
            mz_t += mean[b * stride + mz];
            batch[b] = k * covariance(p, mean[b * stride + my], mean[b * stride + mz], counts[b], zero)
                               .real();
        }
        const cplx cov = covariance(total, my_t, mz_t, used, zero);
        e.V[i] = vacuum + k * cov.real();
        e.imag_residual[i] = k * cov.imag();
        e.std_error[i] = batch_stderr(batch);
    }
}

}  // namespace

SpectrumEstimate SpectrumAccumulator::result() const {
    const Layout& L = *layout_;
    std::size_t used = 0, filled = 0;
    for (auto c : counts_) {
        used += c;
        filled += c > 1;
    }
    if (filled < kBatchCount) throw EstimatorError("fewer than 10 batches with two or more trajectories");
    SpectrumEstimate e = L.shell(used);
    reduce(L, prod_, mean_, 2, 0, 1, counts_, L.vacuum(), e);
    return e;
}


// ---------------------------------------------------------------- delta

DeltaSpectrumAccumulator::DeltaSpectrumAccumulator(Representation rep, const SimGrid& grid,
                                                   std::size_t n_traj, QuadratureSelector sel,
                                                   std::optional<double> omega_max)
    : layout_(make_layout(rep, grid, n_traj, sel, omega_max)) {
    delta_.assign(kBatchCount * layout_->bins(), cplx{});
    lin_.assign(kBatchCount * layout_->bins(), cplx{});
    mean_.assign(kBatchCount * 4, cplx{});
    counts_.assign(kBatchCount, 0);
}

std::unique_ptr<TrajectorySink> DeltaSpectrumAccumulator::fresh() const {
    auto out = std::unique_ptr<DeltaSpectrumAccumulator>(new DeltaSpectrumAccumulator(*this));
    std::fill(out->delta_.begin(), out->delta_.end(), cplx{});
    std::fill(out->lin_.begin(), out->lin_.end(), cplx{});
    std::fill(out->mean_.begin(), out->mean_.end(), cplx{});
    std::fill(out->counts_.begin(), out->counts_.end(), 0);
    return out;
}

void DeltaSpectrumAccumulator::add(const TrajectoryRecord& rec, const TrajectoryRecord* partner) {
    if (!partner) throw EstimatorError("delta spectrum needs paired linearized trajectories");
    if (partner->index != rec.index) throw EstimatorError("paired trajectories have different indices");
    const SpectrumAccumulator::Layout& L = *layout_;
    thread_local std::vector<cplx> in, y, yl;
    L.transform(rec, in, y);
    L.transform(*partner, in, yl);
    // d = Y - Y_lin; the noise part of the Wigner output field cancels here
    for (std::size_t n = 0; n < y.size(); ++n) y[n] -= yl[n];
    const std::size_t b = batch_of(rec.index, L.n_traj);
    cplx* dp = delta_.data() + b * L.bins();
    cplx* lp = lin_.data() + b * L.bins();
    for (std::size_t i = 0; i < L.bins(); ++i) {
        const cplx d = y[L.fft_index[i]], zd = L.partner(y, i);
        const cplx l = yl[L.fft_index[i]], zl = L.partner(yl, i);
        dp[i] += d * zl + l * zd + d * zd;
        lp[i] += l * zl;
    }
    mean_[4 * b] += y[0];
    mean_[4 * b + 1] += L.partner(y, L.zero_pos);
    mean_[4 * b + 2] += yl[0];
    mean_[4 * b + 3] += L.partner(yl, L.zero_pos);
    ++counts_[b];
}

void DeltaSpectrumAccumulator::merge(const TrajectorySink& other) {
    const auto& o = dynamic_cast<const DeltaSpectrumAccumulator&>(other);
    if (o.delta_.size() != delta_.size()) throw UsageError("incompatible delta accumulators");
    for (std::size_t i = 0; i < delta_.size(); ++i) delta_[i] += o.delta_[i];
    for (std::size_t i = 0; i < lin_.size(); ++i) lin_[i] += o.lin_[i];
    for (std::size_t i = 0; i < mean_.size(); ++i) mean_[i] += o.mean_[i];
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += o.counts_[i];
}

DeltaSpectrumResult DeltaSpectrumAccumulator::result() const {
    const SpectrumAccumulator::Layout& L = *layout_;
    std::size_t used = 0, filled = 0;
    for (auto c : counts_) {
        used += c;
        filled += c > 1;
    }
    if (filled < kBatchCount) throw EstimatorError("fewer than 10 batches with two or more trajectories");
    DeltaSpectrumResult r{L.shell(used), L.shell(used), L.shell(used)};
    reduce(L, lin_, mean_, 4, 2, 3, counts_, L.vacuum(), r.linear);

    // Zero bin of the difference: cov(Y,Y) - cov(Yl,Yl) with mean sums
    // (d, Zd, Yl, Zl) expands to the three cross covariances.
    const double k = L.scale() / L.window;
    std::vector<double> batch(kBatchCount), batch_nl(kBatchCount);
    for (std::size_t i = 0; i < L.bins(); ++i) {
        const bool zero = i == L.zero_pos;
        auto cov = [&](cplx dsum, cplx lsum, const cplx* m, std::size_t n, cplx& dcov, cplx& lcov) {
            const double dn = static_cast<double>(n);
            if (!zero) {
                dcov = dsum / dn;
                lcov = lsum / dn;
                return;
            }
            const cplx md = m[0], mzd = m[1], ml = m[2], mzl = m[3];
            const cplx mean_part = (md * mzl + ml * mzd + md * mzd) / dn;
            dcov = (dsum - mean_part) / (dn - 1.0);
            lcov = (lsum - ml * mzl / dn) / (dn - 1.0);
        };
        cplx dt{}, lt{};
        std::array<cplx, 4> mt{};
        for (std::size_t b = 0; b < kBatchCount; ++b) {
            const cplx ds = delta_[b * L.bins() + i], ls = lin_[b * L.bins() + i];
            dt += ds;
            lt += ls;
            for (std::size_t j = 0; j < 4; ++j) mt[j] += mean_[4 * b + j];
            cplx dc, lc;
            cov(ds, ls, &mean_[4 * b], counts_[b], dc, lc);
            batch[b] = k * dc.real();
            batch_nl[b] = L.vacuum() + k * (dc + lc).real();
        }
        cplx dc, lc;
        cov(dt, lt, mt.data(), used, dc, lc);
        r.delta.V[i] = k * dc.real();
        r.delta.imag_residual[i] = k * dc.imag();
        r.delta.std_error[i] = batch_stderr(batch);
        r.nonlinear.V[i] = L.vacuum() + k * (dc + lc).real();
        r.nonlinear.imag_residual[i] = k * (dc + lc).imag();
        r.nonlinear.std_error[i] = batch_stderr(batch_nl);
    }
    return r;
}

// ---------------------------------------------------------------- wrappers

namespace {

SimGrid grid_of(const TrajectoryRecord& rec) {
    SimGrid g;
    g.dtau = rec.dtau;
    g.sample_stride = rec.sample_stride;
    g.tau_discard = 0.0;
    g.tau_max = rec.window();
    return g;
}

void check_records(std::span<const TrajectoryRecord> records) {
    if (records.empty()) throw EstimatorError("empty ensemble");
    require_batches(records.size());
}

}  // namespace

MomentSet estimate_moments(std::span<const TrajectoryRecord> records, Representation rep,
                           std::span<const TrajectoryRecord> partners) {
    check_records(records);
    if (!partners.empty() && partners.size() != records.size())
        throw EstimatorError("partner ensemble has a different size");
    MomentAccumulator acc(rep, records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].divergent || (!partners.empty() && partners[i].divergent)) continue;
        acc.add(records[i], partners.empty() ? nullptr : &partners[i]);
    }
    return acc.result();
}

SpectrumEstimate estimate_output_spectrum(std::span<const TrajectoryRecord> records,
                                          Representation rep, QuadratureSelector sel,
                                          std::optional<double> omega_max) {
    check_records(records);
    SpectrumAccumulator acc(rep, grid_of(records.front()), records.size(), sel, omega_max);
    for (const auto& r : records)
        if (!r.divergent) acc.add(r, nullptr);
    return acc.result();
}

DeltaSpectrumResult estimate_delta_spectrum(std::span<const TrajectoryRecord> nonlinear,
                                            std::span<const TrajectoryRecord> linear,
                                            Representation rep, QuadratureSelector sel,
                                            std::optional<double> omega_max) {
    check_records(nonlinear);
    if (linear.size() != nonlinear.size()) throw EstimatorError("unpaired input: ensemble sizes differ");
    DeltaSpectrumAccumulator acc(rep, grid_of(nonlinear.front()), nonlinear.size(), sel, omega_max);
    for (std::size_t i = 0; i < nonlinear.size(); ++i) {
        if (nonlinear[i].divergent || linear[i].divergent) continue;
        if (linear[i].mode != LinearizationMode::Linearized)
            throw EstimatorError("unpaired input: partner is not linearized");
        acc.add(nonlinear[i], &linear[i]);
    }
    return acc.result();
}

Estimate estimate_triple(std::span<const TrajectoryRecord> records, Representation rep) {
    return estimate_moments(records, rep).triple;
}

}  // namespace opo
