#include "qam/quaternion.hpp"

#include <algorithm>
#include <numbers>

#include "qam/error.hpp"

namespace qam {

UnitQuaternion::UnitQuaternion(const Quaternion& q) : q_(q) {
    if (!q.is_finite() || std::abs(q.norm() - 1.0) > kTolerance) {
        throw InvalidArgument("quaternion is not of unit norm");
    }
}

UnitQuaternion UnitQuaternion::renormalized(const Quaternion& q) { return q_sigma(q); }

UnitQuaternion q_sigma(const Quaternion& q) {
    const double n = q.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw ZeroOrNonFiniteArgument("sigma: argument norm is zero or not finite");
    }
    return UnitQuaternion(Quaternion{q.q0 / n, q.q1 / n, q.q2 / n, q.q3 / n}, UnitQuaternion::Trusted{});
}

Quaternion unit_quaternion_from_angles(double phi, double psi, double theta) {
    const Quaternion a{std::cos(phi), std::sin(phi), 0.0, 0.0};
    const Quaternion b{std::cos(psi), 0.0, 0.0, std::sin(psi)};
    const Quaternion c{std::cos(theta), 0.0, std::sin(theta), 0.0};
    return a * b * c;
}

UnitQuaternion rand_unit_quaternion(RandomStream& rng) {
    constexpr double pi = std::numbers::pi;
    const double phi = rng.uniform(-pi, pi);
    const double psi = rng.uniform(-pi / 4.0, pi / 4.0);
    const double theta = rng.uniform(-pi / 2.0, pi / 2.0);
    // The product of three unit factors drifts from the sphere only by roundoff.
    return q_sigma(unit_quaternion_from_angles(phi, psi, theta));
}

Quaternion q_inner(std::span<const Quaternion> x, std::span<const Quaternion> y) {
    if (x.size() != y.size()) {
        throw DimensionMismatch("inner product of vectors with different lengths");
    }
    Quaternion s;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += y[i].conj() * x[i];
    }
    return s;
}

double real_inner(std::span<const Quaternion> x, std::span<const Quaternion> y) {
    if (x.size() != y.size()) {
        throw DimensionMismatch("inner product of vectors with different lengths");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += real_of_conj_product(y[i], x[i]);
    }
    return s;
}

double norm2(std::span<const Quaternion> x) {
    double s = 0.0;
    for (const auto& q : x) s += q.norm2();
    return std::sqrt(s);
}

double distance(std::span<const Quaternion> x, std::span<const Quaternion> y) {
    if (x.size() != y.size()) {
        throw DimensionMismatch("distance between vectors with different lengths");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]).norm2();
    return std::sqrt(s);
}

QMatrix QMatrix::identity(std::size_t n) {
    QMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Quaternion{1.0};
    return m;
}

QMatrix QMatrix::from_columns(const std::vector<QVector>& columns) {
    if (columns.empty()) return {};
    const std::size_t n = columns.front().size();
    QMatrix m(n, columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c].size() != n) throw DimensionMismatch("columns of different lengths");
        for (std::size_t r = 0; r < n; ++r) m(r, c) = columns[c][r];
    }
    return m;
}

QVector QMatrix::column(std::size_t c) const {
    QVector v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
    return v;
}

QMatrix qmat_mul(const QMatrix& a, const QMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("qmat_mul: inner dimensions differ");
    QMatrix out(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto out_row = out.row(r);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Quaternion& ark = a(r, k);
            const auto b_row = b.row(k);
            for (std::size_t c = 0; c < b.cols(); ++c) out_row[c] += ark * b_row[c];
        }
    }
    return out;
}

QVector qmat_vec(const QMatrix& a, std::span<const Quaternion> x) {
    if (a.cols() != x.size()) throw DimensionMismatch("qmat_vec: dimensions differ");
    QVector out(a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const auto row = a.row(r);
        Quaternion s;
        for (std::size_t c = 0; c < row.size(); ++c) s += row[c] * x[c];
        out[r] = s;
    }
    return out;
}

QMatrix qmat_conj_transpose(const QMatrix& a) {
    QMatrix out(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c).conj();
    return out;
}

double max_entry_distance(const QMatrix& a, const QMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("matrix shapes differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, (a.data()[i] - b.data()[i]).norm());
    return m;
}

QMatrix qmat_solve(const QMatrix& a, const QMatrix& b) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw DimensionMismatch("qmat_solve: matrix is not square");
    if (b.rows() != n) throw DimensionMismatch("qmat_solve: right-hand side has wrong row count");

    double max_norm = 0.0;
    for (const auto& q : a.data()) max_norm = std::max(max_norm, q.norm());
    const double threshold = 1e-12 * max_norm;

    QMatrix lhs = a;
    QMatrix rhs = b;
    const std::size_t m = rhs.cols();

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        double best = lhs(k, k).norm();
        for (std::size_t r = k + 1; r < n; ++r) {
            const double v = lhs(r, k).norm();
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (!(best >= threshold) || best == 0.0) {
            throw SingularMatrix("qmat_solve: pivot norm below threshold");
        }
        if (pivot != k) {
            std::swap_ranges(lhs.row(k).begin(), lhs.row(k).end(), lhs.row(pivot).begin());
            std::swap_ranges(rhs.row(k).begin(), rhs.row(k).end(), rhs.row(pivot).begin());
        }

        // row_k <- inv(a_kk) * row_k
        const Quaternion inv = lhs(k, k).inverse();
        for (std::size_t c = k; c < n; ++c) lhs(k, c) = inv * lhs(k, c);
        for (std::size_t c = 0; c < m; ++c) rhs(k, c) = inv * rhs(k, c);
        lhs(k, k) = Quaternion{1.0};

        // row_r <- row_r - a_rk * row_k for every other row
        for (std::size_t r = 0; r < n; ++r) {
            if (r == k) continue;
            const Quaternion factor = lhs(r, k);
            if (factor == Quaternion{}) continue;
            for (std::size_t c = k; c < n; ++c) lhs(r, c) -= factor * lhs(k, c);
            for (std::size_t c = 0; c < m; ++c) rhs(r, c) -= factor * rhs(k, c);
            lhs(r, k) = Quaternion{};
        }
    }
    return rhs;
}

}  // namespace qam
