#pragma once

/**
 * Quaternion-valued associative memories on unit quaternions.
 *
 *  - QhnnModel: Hopfield network with correlation or projection weights.
 *  - QrcnnModel: recurrent correlation network, x <- sigma(U f(Re(U* x)/n)).
 *  - QrpnnModel: recurrent projection network, x <- sigma(V f(Re(U* x)/n))
 *    with C = f(Re(U* U)/n) and V = U C^{-1}.
 *
 * All models are immutable after construction. Every neuron update uses
 * the same rule: x_i <- a_i/|a_i| when 0 < |a_i| < inf, otherwise x_i is kept.
 */

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qam/excitation.hpp"
#include "qam/quaternion.hpp"
#include "qam/real_matrix.hpp"

namespace qam {

/// Fundamental memories u^1..u^p stored as the columns of an n x p matrix.
class MemorySet {
public:
    MemorySet() = default;
    /// Throws InvalidArgument for an empty matrix or entries off the unit sphere.
    explicit MemorySet(QMatrix u);
    static MemorySet from_vectors(const std::vector<QVector>& memories);

    std::size_t n() const noexcept { return u_.rows(); }
    std::size_t p() const noexcept { return u_.cols(); }
    const QMatrix& matrix() const noexcept { return u_; }
    QVector memory(std::size_t xi) const { return u_.column(xi); }

    /// True when every entry is +1 or -1 with zero vector part.
    bool is_bipolar() const;

private:
    QMatrix u_;
};

enum class UpdateMode : unsigned char { synchronous, asynchronous_cyclic };
enum class LearningRule : unsigned char { correlation, projection };

struct RecallConfig {
    std::size_t t_max = 1000;
    double tau = 1e-4;
    /// Unset means the model's default: asynchronous for QHNN, synchronous otherwise.
    std::optional<UpdateMode> update_mode;
    /// Asynchronous sweeps visit neurons in a fresh seeded permutation when set,
    /// and in index order otherwise.
    std::optional<std::uint64_t> sweep_permutation_seed;
};

struct RecallOutcome {
    QVector y;
    std::size_t iterations = 0;
    bool converged = false;
    /// ||x(t+1) - x(t)||_2 per iteration.
    std::vector<double> trajectory_norms;
};

/// Neuron visit order for one asynchronous sweep; empty means 0..n-1.
using SweepOrder = std::span<const std::size_t>;

class QhnnModel {
public:
    static constexpr UpdateMode kDefaultMode = UpdateMode::asynchronous_cyclic;

    /// Checks w_ij = conj(w_ji) within 1e-10 and that w_ii is a non-negative real.
    QhnnModel(LearningRule rule, MemorySet memories, QMatrix weights);

    LearningRule rule() const noexcept { return rule_; }
    const MemorySet& memories() const noexcept { return memories_; }
    const QMatrix& weights() const noexcept { return w_; }
    std::size_t n() const noexcept { return w_.rows(); }

    QVector step(std::span<const Quaternion> x, UpdateMode mode, SweepOrder order = {}) const;

private:
    LearningRule rule_;
    MemorySet memories_;
    QMatrix w_;
};

QhnnModel build_correlation_qhnn(const MemorySet& memories);
/// Throws SingularGramMatrix when (1/n) U* U cannot be inverted.
QhnnModel build_projection_qhnn(const MemorySet& memories);

QVector qhnn_step(const QhnnModel& model, std::span<const Quaternion> x, UpdateMode mode);

class QrcnnModel {
public:
    static constexpr UpdateMode kDefaultMode = UpdateMode::synchronous;

    QrcnnModel(MemorySet memories, Excitation f) : memories_(std::move(memories)), f_(f) {}

    const MemorySet& memories() const noexcept { return memories_; }
    const Excitation& excitation() const noexcept { return f_; }
    std::size_t n() const noexcept { return memories_.n(); }

    QVector step(std::span<const Quaternion> x, UpdateMode mode = kDefaultMode, SweepOrder order = {}) const;

private:
    MemorySet memories_;
    Excitation f_;
};

class QrpnnModel {
public:
    static constexpr UpdateMode kDefaultMode = UpdateMode::synchronous;

    /// Rebuilds C from the memories; V is taken as given (e.g. read from disk).
    QrpnnModel(MemorySet memories, QMatrix v, Excitation f);

    const MemorySet& memories() const noexcept { return memories_; }
    const QMatrix& v() const noexcept { return v_; }
    const RealMatrix& c() const noexcept { return c_; }
    const Excitation& excitation() const noexcept { return f_; }
    std::size_t n() const noexcept { return memories_.n(); }

    /// max|C| * max|C^{-1}|, a cheap conditioning estimate.
    double condition_estimate() const;

    QVector step(std::span<const Quaternion> x, UpdateMode mode = kDefaultMode, SweepOrder order = {}) const;

private:
    MemorySet memories_;
    QMatrix v_;
    RealMatrix c_;
    Excitation f_;
};

/// C = f(Re(U* U)/n), entrywise.
RealMatrix excitation_gram(const MemorySet& memories, const Excitation& f);

/// Throws SingularCMatrix when C is singular or its inverse is inaccurate
/// (||C C^{-1} - I||_max > 1e-8).
QrpnnModel build_qrpnn(const MemorySet& memories, const Excitation& f);

QVector qrcnn_step(const QrcnnModel& model, std::span<const Quaternion> x);
QVector qrpnn_step(const QrpnnModel& model, std::span<const Quaternion> x);

/// Throws InvalidArgument when some entry of x is off the unit sphere by more than tol.
void require_unit_vector(std::span<const Quaternion> x, double tol = 1e-10);

/**
 * Iterates `step(x, order)` until ||x(t+1) - x(t)||_2 < tau or t_max
 * iterations have run. `order` is the sweep order for asynchronous modes
 * (empty for index order).
 */
template <class Step>
RecallOutcome iterate_until_stable(Step&& step, QVector x, const RecallConfig& cfg, std::size_t n);

RecallOutcome recall(const QhnnModel& model, std::span<const Quaternion> x0, const RecallConfig& cfg = {});
RecallOutcome recall(const QrcnnModel& model, std::span<const Quaternion> x0, const RecallConfig& cfg = {});
RecallOutcome recall(const QrpnnModel& model, std::span<const Quaternion> x0, const RecallConfig& cfg = {});

/// ||x_P - x_C||_2 after one synchronous step of QRPNN and QRCNN built with f.
double saturation_gap(const MemorySet& memories, const Excitation& f, std::span<const Quaternion> x);

}  // namespace qam

#include "qam/detail/recall_loop.hpp"
