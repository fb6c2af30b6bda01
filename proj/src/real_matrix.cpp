#include "qam/real_matrix.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "qam/error.hpp"

namespace qam {

RealMatrix RealMatrix::identity(std::size_t n) {
    RealMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double RealMatrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

RealMatrix operator*(const RealMatrix& a, const RealMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("real matrix product: inner dimensions differ");
    RealMatrix out(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto out_row = out.row(r);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double ark = a(r, k);
            const auto b_row = b.row(k);
            for (std::size_t c = 0; c < b.cols(); ++c) out_row[c] += ark * b_row[c];
        }
    }
    return out;
}

RealMatrix lu_inverse(const RealMatrix& a, double rel_threshold) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw DimensionMismatch("lu_inverse: matrix is not square");
    const double max_abs = a.max_abs();
    if (!std::isfinite(max_abs)) throw SingularMatrix("lu_inverse: non-finite entries");
    if (n == 0) return {};

    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto rows = static_cast<Eigen::Index>(n);
    const Eigen::Map<const RowMajor> view(a.data().data(), rows, rows);
    const Eigen::PartialPivLU<RowMajor> lu(view);
    const double threshold = rel_threshold * max_abs;
    for (Eigen::Index k = 0; k < rows; ++k) {
        const double pivot = std::abs(lu.matrixLU()(k, k));
        if (pivot == 0.0 || pivot < threshold) throw SingularMatrix("lu_inverse: pivot below threshold");
    }

    RealMatrix inv(n, n);
    Eigen::Map<RowMajor>(inv.data().data(), rows, rows) = lu.inverse();
    return inv;
}

}  // namespace qam
