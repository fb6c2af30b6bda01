#include "qam/memories.hpp"

#include <algorithm>
#include <cmath>

#include "qam/error.hpp"

namespace qam {

namespace {

// The shared neuron update: sigma(a) when 0 < |a| < inf, else keep prev.
inline Quaternion activate(const Quaternion& a, const Quaternion& prev) {
    const double norm = a.norm();
    if (norm > 0.0 && std::isfinite(norm)) {
        return {a.q0 / norm, a.q1 / norm, a.q2 / norm, a.q3 / norm};
    }
    return prev;
}

void require_length(std::span<const Quaternion> x, std::size_t n) {
    if (x.size() != n) throw DimensionMismatch("state length does not match the model");
}

// W = (1/n) Z U*, evaluated on the upper triangle and mirrored so the result
// is exactly Hermitian.
QMatrix hermitian_outer(const QMatrix& z, const QMatrix& u) {
    const std::size_t n = u.rows();
    const std::size_t p = u.cols();
    const double scale = 1.0 / static_cast<double>(n);
    QMatrix w(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto zi = z.row(i);
        for (std::size_t j = i; j < n; ++j) {
            const auto uj = u.row(j);
            Quaternion s;
            for (std::size_t xi = 0; xi < p; ++xi) s += zi[xi] * uj[xi].conj();
            s *= scale;
            w(i, j) = s;
            if (j != i) w(j, i) = s.conj();
        }
    }
    return w;
}

// Two-layer dynamics shared by QRCNN (decoder = U) and QRPNN (decoder = V).
QVector two_layer_step(const QMatrix& u, const QMatrix& decoder, const Excitation& f,
                       std::span<const Quaternion> x, UpdateMode mode, SweepOrder order) {
    const std::size_t n = u.rows();
    const std::size_t p = u.cols();
    require_length(x, n);
    const double inv_n = 1.0 / static_cast<double>(n);

    // s_xi = Re<x, u^xi>
    std::vector<double> s(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ui = u.row(i);
        for (std::size_t xi = 0; xi < p; ++xi) s[xi] += real_of_conj_product(ui[xi], x[i]);
    }

    std::vector<double> w(p);
    auto weigh = [&] {
        for (std::size_t xi = 0; xi < p; ++xi) w[xi] = f(s[xi] * inv_n);
    };
    auto activation = [&](std::size_t i) {
        const auto di = decoder.row(i);
        Quaternion a;
        for (std::size_t xi = 0; xi < p; ++xi) a += w[xi] * di[xi];
        if (!a.is_finite()) {
            throw OverflowInExcitation(f.lambda, *std::max_element(s.begin(), s.end()) * inv_n);
        }
        return a;
    };

    QVector next(x.begin(), x.end());
    if (mode == UpdateMode::synchronous) {
        weigh();
        for (std::size_t i = 0; i < n; ++i) next[i] = activate(activation(i), x[i]);
        return next;
    }

    auto visit = [&](std::size_t i) {
        weigh();
        const Quaternion updated = activate(activation(i), next[i]);
        const Quaternion delta = updated - next[i];
        next[i] = updated;
        const auto ui = u.row(i);
        for (std::size_t xi = 0; xi < p; ++xi) s[xi] += real_of_conj_product(ui[xi], delta);
    };
    if (order.empty()) {
        for (std::size_t i = 0; i < n; ++i) visit(i);
    } else {
        for (std::size_t i : order) visit(i);
    }
    return next;
}

}  // namespace

MemorySet::MemorySet(QMatrix u) : u_(std::move(u)) {
    if (u_.rows() == 0 || u_.cols() == 0) throw InvalidArgument("memory set must be non-empty");
    for (const auto& q : u_.data()) {
        if (!q.is_finite() || std::abs(q.norm() - 1.0) > UnitQuaternion::kTolerance) {
            throw InvalidArgument("memory entries must be unit quaternions");
        }
    }
}

MemorySet MemorySet::from_vectors(const std::vector<QVector>& memories) {
    return MemorySet(QMatrix::from_columns(memories));
}

bool MemorySet::is_bipolar() const {
    return std::all_of(u_.data().begin(), u_.data().end(), [](const Quaternion& q) {
        return (q.q0 == 1.0 || q.q0 == -1.0) && q.q1 == 0.0 && q.q2 == 0.0 && q.q3 == 0.0;
    });
}

void require_unit_vector(std::span<const Quaternion> x, double tol) {
    for (const auto& q : x) {
        if (!q.is_finite() || std::abs(q.norm() - 1.0) > tol) {
            throw InvalidArgument("state entries must be unit quaternions");
        }
    }
}

// ---------------------------------------------------------------- QHNN

QhnnModel::QhnnModel(LearningRule rule, MemorySet memories, QMatrix weights)
    : rule_(rule), memories_(std::move(memories)), w_(std::move(weights)) {
    const std::size_t n = w_.rows();
    if (w_.cols() != n || n != memories_.n()) throw DimensionMismatch("weight matrix shape");
    for (std::size_t i = 0; i < n; ++i) {
        const Quaternion& d = w_(i, i);
        if (d.q0 < -1e-12 || d.vector_part().norm() > 1e-10) {
            throw InvalidArgument("self-connection weights must be non-negative reals");
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            if ((w_(i, j) - w_(j, i).conj()).norm() > 1e-10) {
                throw InvalidArgument("weight matrix is not Hermitian");
            }
        }
    }
}

QVector QhnnModel::step(std::span<const Quaternion> x, UpdateMode mode, SweepOrder order) const {
    const std::size_t n = w_.rows();
    require_length(x, n);
    QVector next(x.begin(), x.end());
    auto potential = [&](std::size_t i, std::span<const Quaternion> state) {
        const auto wi = w_.row(i);
        Quaternion a;
        for (std::size_t j = 0; j < n; ++j) a += wi[j] * state[j];
        return a;
    };
    if (mode == UpdateMode::synchronous) {
        for (std::size_t i = 0; i < n; ++i) next[i] = activate(potential(i, x), x[i]);
        return next;
    }
    if (order.empty()) {
        for (std::size_t i = 0; i < n; ++i) next[i] = activate(potential(i, next), next[i]);
    } else {
        for (std::size_t i : order) next[i] = activate(potential(i, next), next[i]);
    }
    return next;
}

QhnnModel build_correlation_qhnn(const MemorySet& memories) {
    const QMatrix& u = memories.matrix();
    return QhnnModel(LearningRule::correlation, memories, hermitian_outer(u, u));
}

QhnnModel build_projection_qhnn(const MemorySet& memories) {
    const QMatrix& u = memories.matrix();
    const std::size_t n = u.rows();
    const std::size_t p = u.cols();

    // c_{eta xi} = (1/n) sum_j conj(u_j^eta) u_j^xi
    QMatrix gram(p, p);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto uj = u.row(j);
        for (std::size_t eta = 0; eta < p; ++eta) {
            const Quaternion ce = uj[eta].conj();
            for (std::size_t xi = 0; xi < p; ++xi) gram(eta, xi) += ce * uj[xi];
        }
    }
    for (auto& q : gram.data()) q *= inv_n;

    QMatrix gram_inv;
    try {
        gram_inv = qmat_inverse(gram);
    } catch (const SingularMatrix&) {
        throw SingularGramMatrix("projection rule: quaternion Gram matrix is singular");
    }
    return QhnnModel(LearningRule::projection, memories, hermitian_outer(qmat_mul(u, gram_inv), u));
}

QVector qhnn_step(const QhnnModel& model, std::span<const Quaternion> x, UpdateMode mode) {
    return model.step(x, mode);
}

// ---------------------------------------------------------------- QRCNN / QRPNN

QVector QrcnnModel::step(std::span<const Quaternion> x, UpdateMode mode, SweepOrder order) const {
    return two_layer_step(memories_.matrix(), memories_.matrix(), f_, x, mode, order);
}

RealMatrix excitation_gram(const MemorySet& memories, const Excitation& f) {
    const QMatrix& u = memories.matrix();
    const std::size_t n = u.rows();
    const std::size_t p = u.cols();
    RealMatrix g(p, p);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ui = u.row(i);
        for (std::size_t eta = 0; eta < p; ++eta) {
            for (std::size_t xi = eta; xi < p; ++xi) g(eta, xi) += real_of_conj_product(ui[eta], ui[xi]);
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t eta = 0; eta < p; ++eta) {
        for (std::size_t xi = eta; xi < p; ++xi) {
            const double c = f(g(eta, xi) * inv_n);
            g(eta, xi) = c;
            g(xi, eta) = c;
        }
    }
    return g;
}

QrpnnModel::QrpnnModel(MemorySet memories, QMatrix v, Excitation f)
    : memories_(std::move(memories)), v_(std::move(v)), f_(f) {
    if (v_.rows() != memories_.n() || v_.cols() != memories_.p()) throw DimensionMismatch("V shape");
    c_ = excitation_gram(memories_, f_);
}

double QrpnnModel::condition_estimate() const {
    try {
        return c_.max_abs() * lu_inverse(c_).max_abs();
    } catch (const SingularMatrix&) {
        return INFINITY;
    }
}

QVector QrpnnModel::step(std::span<const Quaternion> x, UpdateMode mode, SweepOrder order) const {
    return two_layer_step(memories_.matrix(), v_, f_, x, mode, order);
}

QrpnnModel build_qrpnn(const MemorySet& memories, const Excitation& f) {
    const RealMatrix c = excitation_gram(memories, f);
    const std::size_t p = c.rows();
    RealMatrix c_inv;
    try {
        c_inv = lu_inverse(c, 1e-12);
    } catch (const SingularMatrix&) {
        throw SingularCMatrix("QRPNN: matrix C is singular");
    }
    const RealMatrix check = c * c_inv;
    for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t col = 0; col < p; ++col) {
            const double err = std::abs(check(r, col) - (r == col ? 1.0 : 0.0));
            if (!(err <= 1e-8)) throw SingularCMatrix("QRPNN: inverse of C is inaccurate");
        }
    }

    // v_i^xi = sum_eta u_i^eta c^{-1}_{eta xi}
    const QMatrix& u = memories.matrix();
    QMatrix v(u.rows(), p);
    for (std::size_t i = 0; i < u.rows(); ++i) {
        const auto ui = u.row(i);
        auto vi = v.row(i);
        for (std::size_t eta = 0; eta < p; ++eta) {
            const auto c_row = c_inv.row(eta);
            for (std::size_t xi = 0; xi < p; ++xi) vi[xi] += ui[eta] * c_row[xi];
        }
    }
    return QrpnnModel(memories, std::move(v), f);
}

QVector qrcnn_step(const QrcnnModel& model, std::span<const Quaternion> x) {
    return model.step(x, UpdateMode::synchronous);
}

QVector qrpnn_step(const QrpnnModel& model, std::span<const Quaternion> x) {
    return model.step(x, UpdateMode::synchronous);
}

// ---------------------------------------------------------------- recall

namespace {

template <class Model>
RecallOutcome recall_model(const Model& model, std::span<const Quaternion> x0, const RecallConfig& cfg) {
    require_length(x0, model.n());
    require_unit_vector(x0);
    const UpdateMode mode = cfg.update_mode.value_or(Model::kDefaultMode);
    return iterate_until_stable(
        [&](const QVector& x, SweepOrder order) { return model.step(x, mode, order); },
        QVector(x0.begin(), x0.end()), cfg, model.n());
}

}  // namespace

RecallOutcome recall(const QhnnModel& model, std::span<const Quaternion> x0, const RecallConfig& cfg) {
    return recall_model(model, x0, cfg);
}

RecallOutcome recall(const QrcnnModel& model, std::span<const Quaternion> x0, const RecallConfig& cfg) {
    return recall_model(model, x0, cfg);
}

RecallOutcome recall(const QrpnnModel& model, std::span<const Quaternion> x0, const RecallConfig& cfg) {
    return recall_model(model, x0, cfg);
}

double saturation_gap(const MemorySet& memories, const Excitation& f, std::span<const Quaternion> x) {
    const QrcnnModel correlation(memories, f);
    const QrpnnModel projection = build_qrpnn(memories, f);
    return distance(qrpnn_step(projection, x), qrcnn_step(correlation, x));
}

}  // namespace qam
