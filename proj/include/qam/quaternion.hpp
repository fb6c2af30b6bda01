#pragma once

/**
 * Quaternion scalars, vectors and matrices.
 *
 * q = q0 + q1 i + q2 j + q3 k with i^2 = j^2 = k^2 = ijk = -1.
 * Multiplication is not commutative; every product in this library is
 * written in the order it appears in the defining formula.
 */

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "qam/random.hpp"

namespace qam {

struct Quaternion {
    double q0 = 0.0;
    double q1 = 0.0;
    double q2 = 0.0;
    double q3 = 0.0;

    constexpr Quaternion() = default;
    constexpr Quaternion(double a, double b = 0.0, double c = 0.0, double d = 0.0)
        : q0(a), q1(b), q2(c), q3(d) {}

    static constexpr Quaternion i() { return {0.0, 1.0, 0.0, 0.0}; }
    static constexpr Quaternion j() { return {0.0, 0.0, 1.0, 0.0}; }
    static constexpr Quaternion k() { return {0.0, 0.0, 0.0, 1.0}; }

    constexpr double real() const { return q0; }
    constexpr Quaternion vector_part() const { return {0.0, q1, q2, q3}; }
    constexpr Quaternion conj() const { return {q0, -q1, -q2, -q3}; }
    constexpr double norm2() const { return q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3; }
    double norm() const { return std::sqrt(norm2()); }
    bool is_finite() const {
        return std::isfinite(q0) && std::isfinite(q1) && std::isfinite(q2) && std::isfinite(q3);
    }

    /// Multiplicative inverse conj(q)/|q|^2; undefined for q = 0.
    constexpr Quaternion inverse() const {
        const double s = 1.0 / norm2();
        return {q0 * s, -q1 * s, -q2 * s, -q3 * s};
    }

    constexpr Quaternion& operator+=(const Quaternion& o) {
        q0 += o.q0;
        q1 += o.q1;
        q2 += o.q2;
        q3 += o.q3;
        return *this;
    }
    constexpr Quaternion& operator-=(const Quaternion& o) {
        q0 -= o.q0;
        q1 -= o.q1;
        q2 -= o.q2;
        q3 -= o.q3;
        return *this;
    }
    constexpr Quaternion& operator*=(double s) {
        q0 *= s;
        q1 *= s;
        q2 *= s;
        q3 *= s;
        return *this;
    }

    constexpr bool operator==(const Quaternion&) const = default;
};

constexpr Quaternion operator+(Quaternion a, const Quaternion& b) { return a += b; }
constexpr Quaternion operator-(Quaternion a, const Quaternion& b) { return a -= b; }
constexpr Quaternion operator-(const Quaternion& a) { return {-a.q0, -a.q1, -a.q2, -a.q3}; }
constexpr Quaternion operator*(Quaternion a, double s) { return a *= s; }
constexpr Quaternion operator*(double s, Quaternion a) { return a *= s; }

/// Hamilton product p*q = p0 q0 - p.q + p0 q + q0 p + p x q.
constexpr Quaternion operator*(const Quaternion& p, const Quaternion& q) {
    return {p.q0 * q.q0 - p.q1 * q.q1 - p.q2 * q.q2 - p.q3 * q.q3,
            p.q0 * q.q1 + p.q1 * q.q0 + p.q2 * q.q3 - p.q3 * q.q2,
            p.q0 * q.q2 + p.q2 * q.q0 + p.q3 * q.q1 - p.q1 * q.q3,
            p.q0 * q.q3 + p.q3 * q.q0 + p.q1 * q.q2 - p.q2 * q.q1};
}

inline Quaternion q_mul(const Quaternion& p, const Quaternion& q) { return p * q; }

/// Re(conj(a) * b), i.e. the 4-vector dot product.
constexpr double real_of_conj_product(const Quaternion& a, const Quaternion& b) {
    return a.q0 * b.q0 + a.q1 * b.q1 + a.q2 * b.q2 + a.q3 * b.q3;
}

class UnitQuaternion;
UnitQuaternion q_sigma(const Quaternion& q);

/// Quaternion of norm 1 (within 1e-12 of the unit sphere).
class UnitQuaternion {
public:
    static constexpr double kTolerance = 1e-12;

    UnitQuaternion() = default;

    /// Throws InvalidArgument when |norm(q) - 1| > kTolerance.
    explicit UnitQuaternion(const Quaternion& q);

    /// Rescales q onto the unit sphere; throws ZeroOrNonFiniteArgument for q = 0.
    static UnitQuaternion renormalized(const Quaternion& q);

    const Quaternion& value() const noexcept { return q_; }
    operator const Quaternion&() const noexcept { return q_; }

private:
    friend UnitQuaternion q_sigma(const Quaternion& q);
    struct Trusted {};
    UnitQuaternion(const Quaternion& q, Trusted) : q_(q) {}

    Quaternion q_{1.0, 0.0, 0.0, 0.0};
};

/// q/|q|. Throws ZeroOrNonFiniteArgument when |q| is 0 or not finite.
UnitQuaternion q_sigma(const Quaternion& q);

/// (cos phi + i sin phi)(cos psi + k sin psi)(cos theta + j sin theta)
Quaternion unit_quaternion_from_angles(double phi, double psi, double theta);

/// Angle-uniform sampler: phi ~ U[-pi,pi), psi ~ U[-pi/4,pi/4], theta ~ U[-pi/2,pi/2).
UnitQuaternion rand_unit_quaternion(RandomStream& rng);

using QVector = std::vector<Quaternion>;

/// sum_i conj(y_i) x_i. Throws DimensionMismatch for unequal lengths.
Quaternion q_inner(std::span<const Quaternion> x, std::span<const Quaternion> y);

/// Re<x, y> without forming the vector part.
double real_inner(std::span<const Quaternion> x, std::span<const Quaternion> y);

/// Euclidean norm over the 4n real components.
double norm2(std::span<const Quaternion> x);
double distance(std::span<const Quaternion> x, std::span<const Quaternion> y);

/// Row-major quaternion matrix.
class QMatrix {
public:
    QMatrix() = default;
    QMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    static QMatrix identity(std::size_t n);
    /// Matrix whose columns are the given vectors (all the same length).
    static QMatrix from_columns(const std::vector<QVector>& columns);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    Quaternion& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Quaternion& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<Quaternion> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const Quaternion> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    QVector column(std::size_t c) const;

    std::span<const Quaternion> data() const noexcept { return data_; }
    std::span<Quaternion> data() noexcept { return data_; }

    bool operator==(const QMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Quaternion> data_;
};

QMatrix qmat_mul(const QMatrix& a, const QMatrix& b);
QVector qmat_vec(const QMatrix& a, std::span<const Quaternion> x);
QMatrix qmat_conj_transpose(const QMatrix& a);

/// Largest entry norm of a - b.
double max_entry_distance(const QMatrix& a, const QMatrix& b);

/**
 * Solves A X = B by Gauss-Jordan elimination over the quaternions with
 * partial pivoting on entry norms. Row operations are left multiplications.
 * Throws SingularMatrix when the best pivot norm falls below
 * 1e-12 * (largest entry norm of A).
 */
QMatrix qmat_solve(const QMatrix& a, const QMatrix& b);

inline QMatrix qmat_inverse(const QMatrix& a) { return qmat_solve(a, QMatrix::identity(a.rows())); }

}  // namespace qam
