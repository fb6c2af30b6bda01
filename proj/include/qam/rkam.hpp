#pragma once

/**
 * Bipolar recurrent kernel associative memory (RKAM).
 *
 * Each neuron i owns a box-constrained quadratic program
 *
 *   minimize  1/2 sum_{xi,eta} b_xi b_eta u_i^xi u_i^eta k(u^xi, u^eta) - sum_xi b_xi
 *   subject to 0 <= b_xi <= rho
 *
 * with kernel k(x, y) = f(<x, y>/n). Recall is
 * x_i <- sgn(sum_xi b_i^xi u_i^xi k(u^xi, x)), keeping x_i when the sum is 0.
 */

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "qam/excitation.hpp"
#include "qam/memories.hpp"
#include "qam/real_matrix.hpp"

namespace qam {

using BipolarVector = std::vector<double>;

struct Kernel {
    Excitation f;
    /// f(<x, y>/n) for bipolar x, y of equal length.
    double operator()(std::span<const double> x, std::span<const double> y) const;
};

Kernel kernel_from_excitation(const Excitation& f);

struct QpSolution {
    std::vector<double> beta;
    /// Infinity norm of the projected gradient at beta.
    double residual = 0.0;
    std::size_t sweeps = 0;
};

struct QpOptions {
    double tolerance = 1e-8;
    /// 0 selects 10 p^2.
    std::size_t max_sweeps = 0;
};

/**
 * Projected cyclic coordinate descent for one neuron. `kernel_gram` is
 * k(u^xi, u^eta) and `labels` is row i of U. Each coordinate moves to its
 * exact one-dimensional minimizer clipped to [0, rho].
 * Throws NonConvergence when the sweep budget runs out.
 */
QpSolution solve_box_qp(const RealMatrix& kernel_gram, std::span<const double> labels, double rho,
                        const QpOptions& options = {});

/// Multipliers of neuron i for bipolar memories.
std::vector<double> solve_neuron_qp(const MemorySet& memories, const Excitation& f, double rho, std::size_t i);

class RkamModel {
public:
    /// Validates that memories are bipolar, beta is n x p and inside [0, rho].
    RkamModel(MemorySet memories, RealMatrix beta, double rho, Excitation f);

    const MemorySet& memories() const noexcept { return memories_; }
    const RealMatrix& labels() const noexcept { return u_; }
    const RealMatrix& beta() const noexcept { return beta_; }
    double rho() const noexcept { return rho_; }
    const Excitation& excitation() const noexcept { return f_; }
    std::size_t n() const noexcept { return u_.rows(); }
    std::size_t p() const noexcept { return u_.cols(); }

    /// Largest projected-gradient magnitude over all neurons' QPs.
    double kkt_residual() const;

    BipolarVector step(std::span<const double> x) const;

private:
    MemorySet memories_;
    RealMatrix u_;
    RealMatrix beta_;
    double rho_;
    Excitation f_;
};

/// Solves the n neuron QPs, up to `workers` at a time (0 = hardware threads).
RkamModel build_rkam(const MemorySet& memories, const Excitation& f, double rho, unsigned workers = 1);

BipolarVector rkam_step(const RkamModel& model, std::span<const double> x);

/// Synchronous recall on bipolar states carried as real quaternions.
RecallOutcome recall(const RkamModel& model, std::span<const Quaternion> x0, const RecallConfig& cfg = {});

BipolarVector to_bipolar(std::span<const Quaternion> x);
QVector from_bipolar(std::span<const double> x);

struct DecoderAgreement {
    bool interior = false;
    /// max |beta_i^xi - u_i^xi v_i^xi|
    double max_deviation = 0.0;
    /// (neuron, memory) pairs whose multiplier sits on a bound.
    std::vector<std::pair<std::size_t, std::size_t>> clipped;
};

/// Compares RKAM multipliers with the bipolar QRPNN decoder built on the same memories.
DecoderAgreement compare_with_decoder(const RkamModel& model, const QrpnnModel& rpnn);

struct Histogram {
    std::vector<double> edges;  // bins + 1 ascending edges
    std::vector<std::size_t> counts;
    /// 1/f(1), the value multipliers approach in saturated mode.
    double reference = 0.0;

    std::size_t total() const;
    std::size_t mode_bin() const;
    /// Bin holding value v (the top edge belongs to the last bin); counts.size() when outside.
    std::size_t bin_of(double v) const;
};

/// Equal-width histogram of all n p multipliers over [lo, hi].
Histogram multiplier_histogram(const RkamModel& model, std::size_t bins, double lo, double hi);
/// Range [0, max beta].
Histogram multiplier_histogram(const RkamModel& model, std::size_t bins);

/// Freedman-Diaconis bin count for [lo, hi]: width 2 IQR / N^(1/3).
std::size_t freedman_diaconis_bins(std::span<const double> values, double lo, double hi);

/// Histograms of several models over one shared grid [0, max of all multipliers].
struct PooledHistogram {
    std::vector<Histogram> per_model;
};

/// bins = 0 picks the Freedman-Diaconis count of the pooled multipliers.
PooledHistogram pooled_multiplier_histogram(std::span<const RkamModel> models, std::size_t bins = 0);

}  // namespace qam
