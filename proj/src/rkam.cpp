#include "qam/rkam.hpp"

#include <algorithm>
#include <cmath>

#include "qam/error.hpp"
#include "qam/parallel.hpp"

namespace qam {

namespace {

RealMatrix bipolar_labels(const MemorySet& memories) {
    if (!memories.is_bipolar()) throw KindMismatch("RKAM requires bipolar memories");
    const QMatrix& u = memories.matrix();
    RealMatrix labels(u.rows(), u.cols());
    for (std::size_t i = 0; i < u.rows(); ++i)
        for (std::size_t xi = 0; xi < u.cols(); ++xi) labels(i, xi) = u(i, xi).q0;
    return labels;
}

// k(u^xi, u^eta) for every pair of memories.
RealMatrix kernel_gram(const RealMatrix& labels, const Excitation& f) {
    const std::size_t n = labels.rows();
    const std::size_t p = labels.cols();
    RealMatrix dots(p, p);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = labels.row(i);
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = a; b < p; ++b) dots(a, b) += row[a] * row[b];
    }
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a; b < p; ++b) {
            const double k = f(dots(a, b) / static_cast<double>(n));
            dots(a, b) = k;
            dots(b, a) = k;
        }
    }
    return dots;
}

double projected_gradient(double beta, double grad, double rho) {
    if (beta <= 0.0) return std::min(grad, 0.0);
    if (beta >= rho) return std::max(grad, 0.0);
    return grad;
}

// gradient of the neuron objective: H beta - 1 with H = D K D, D = diag(labels)
void full_gradient(const RealMatrix& k, std::span<const double> y, std::span<const double> beta,
                   std::span<double> grad) {
    const std::size_t p = beta.size();
    for (std::size_t a = 0; a < p; ++a) {
        double s = 0.0;
        const auto ka = k.row(a);
        for (std::size_t b = 0; b < p; ++b) s += ka[b] * y[b] * beta[b];
        grad[a] = y[a] * s - 1.0;
    }
}

}  // namespace

double Kernel::operator()(std::span<const double> x, std::span<const double> y) const {
    if (x.size() != y.size() || x.empty()) throw DimensionMismatch("kernel arguments differ in length");
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
    return f(dot / static_cast<double>(x.size()));
}

Kernel kernel_from_excitation(const Excitation& f) { return Kernel{f}; }

QpSolution solve_box_qp(const RealMatrix& k, std::span<const double> y, double rho, const QpOptions& options) {
    const std::size_t p = y.size();
    if (p == 0) throw InvalidArgument("QP needs at least one memory");
    if (k.rows() != p || k.cols() != p) throw DimensionMismatch("kernel matrix shape");
    if (!(rho > 0.0)) throw InvalidArgument("box bound rho must be positive");
    const std::size_t max_sweeps = options.max_sweeps ? options.max_sweeps : 10 * p * p;

    QpSolution sol;
    sol.beta.assign(p, 0.0);
    std::vector<double> grad(p, -1.0);

    auto residual = [&] {
        full_gradient(k, y, sol.beta, grad);
        double r = 0.0;
        for (std::size_t a = 0; a < p; ++a) r = std::max(r, std::abs(projected_gradient(sol.beta[a], grad[a], rho)));
        return r;
    };

    sol.residual = residual();
    while (sol.residual > options.tolerance) {
        if (sol.sweeps == max_sweeps) {
            throw NonConvergence("RKAM quadratic program did not converge", sol.residual);
        }
        for (std::size_t a = 0; a < p; ++a) {
            const double h_aa = k(a, a);  // y_a^2 = 1
            if (!(h_aa > 0.0)) throw NonConvergence("RKAM kernel diagonal is not positive", h_aa);
            const double target = std::clamp(sol.beta[a] - grad[a] / h_aa, 0.0, rho);
            const double d = target - sol.beta[a];
            if (d == 0.0) continue;
            sol.beta[a] = target;
            const auto ka = k.row(a);
            for (std::size_t b = 0; b < p; ++b) grad[b] += d * y[b] * ka[b] * y[a];
        }
        ++sol.sweeps;
        sol.residual = residual();
    }
    return sol;
}

std::vector<double> solve_neuron_qp(const MemorySet& memories, const Excitation& f, double rho, std::size_t i) {
    const RealMatrix labels = bipolar_labels(memories);
    if (i >= labels.rows()) throw IndexOutOfRange("neuron index out of range");
    return solve_box_qp(kernel_gram(labels, f), labels.row(i), rho).beta;
}

RkamModel::RkamModel(MemorySet memories, RealMatrix beta, double rho, Excitation f)
    : memories_(std::move(memories)), u_(bipolar_labels(memories_)), beta_(std::move(beta)), rho_(rho), f_(f) {
    if (!(rho_ > 0.0)) throw InvalidArgument("box bound rho must be positive");
    if (beta_.rows() != u_.rows() || beta_.cols() != u_.cols()) throw DimensionMismatch("multiplier matrix shape");
    for (double b : beta_.data()) {
        if (!(b >= 0.0 && b <= rho_)) throw InvalidArgument("multiplier outside [0, rho]");
    }
}

double RkamModel::kkt_residual() const {
    const RealMatrix k = kernel_gram(u_, f_);
    std::vector<double> grad(p());
    double r = 0.0;
    for (std::size_t i = 0; i < n(); ++i) {
        full_gradient(k, u_.row(i), beta_.row(i), grad);
        for (std::size_t xi = 0; xi < p(); ++xi)
            r = std::max(r, std::abs(projected_gradient(beta_(i, xi), grad[xi], rho_)));
    }
    return r;
}

BipolarVector RkamModel::step(std::span<const double> x) const {
    const std::size_t n = u_.rows();
    const std::size_t p = u_.cols();
    if (x.size() != n) throw DimensionMismatch("state length does not match the model");

    std::vector<double> kappa(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ui = u_.row(i);
        for (std::size_t xi = 0; xi < p; ++xi) kappa[xi] += ui[xi] * x[i];
    }
    for (auto& k : kappa) k = f_(k / static_cast<double>(n));

    BipolarVector next(x.begin(), x.end());
    for (std::size_t i = 0; i < n; ++i) {
        const auto ui = u_.row(i);
        const auto bi = beta_.row(i);
        double a = 0.0;
        for (std::size_t xi = 0; xi < p; ++xi) a += bi[xi] * ui[xi] * kappa[xi];
        if (a > 0.0) next[i] = 1.0;
        else if (a < 0.0) next[i] = -1.0;
    }
    return next;
}

RkamModel build_rkam(const MemorySet& memories, const Excitation& f, double rho, unsigned workers) {
    const RealMatrix labels = bipolar_labels(memories);
    const RealMatrix k = kernel_gram(labels, f);
    RealMatrix beta(labels.rows(), labels.cols());
    parallel_for(labels.rows(), workers, [&](std::size_t i) {
        const QpSolution sol = solve_box_qp(k, labels.row(i), rho);
        std::copy(sol.beta.begin(), sol.beta.end(), beta.row(i).begin());
    });
    return RkamModel(memories, std::move(beta), rho, f);
}

BipolarVector rkam_step(const RkamModel& model, std::span<const double> x) { return model.step(x); }

BipolarVector to_bipolar(std::span<const Quaternion> x) {
    BipolarVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Quaternion& q = x[i];
        if (!((q.q0 == 1.0 || q.q0 == -1.0) && q.q1 == 0.0 && q.q2 == 0.0 && q.q3 == 0.0)) {
            throw KindMismatch("state is not bipolar");
        }
        out[i] = q.q0;
    }
    return out;
}

QVector from_bipolar(std::span<const double> x) {
    QVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = Quaternion{x[i]};
    return out;
}

RecallOutcome recall(const RkamModel& model, std::span<const Quaternion> x0, const RecallConfig& cfg) {
    if (x0.size() != model.n()) throw DimensionMismatch("state length does not match the model");
    to_bipolar(x0);
    return iterate_until_stable(
        [&](const QVector& x, SweepOrder) { return from_bipolar(model.step(to_bipolar(x))); },
        QVector(x0.begin(), x0.end()), cfg, model.n());
}

DecoderAgreement compare_with_decoder(const RkamModel& model, const QrpnnModel& rpnn) {
    if (rpnn.memories().matrix() != model.memories().matrix()) {
        throw KindMismatch("RKAM and RPNN were built on different memories");
    }
    DecoderAgreement report;
    report.interior = true;
    const RealMatrix& u = model.labels();
    const RealMatrix& beta = model.beta();
    for (std::size_t i = 0; i < model.n(); ++i) {
        for (std::size_t xi = 0; xi < model.p(); ++xi) {
            const double b = beta(i, xi);
            if (!(b > 0.0 && b < model.rho())) {
                report.interior = false;
                report.clipped.emplace_back(i, xi);
            }
            report.max_deviation = std::max(report.max_deviation, std::abs(b - u(i, xi) * rpnn.v()(i, xi).q0));
        }
    }
    return report;
}

std::size_t Histogram::total() const {
    std::size_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

std::size_t Histogram::mode_bin() const {
    return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::size_t Histogram::bin_of(double v) const {
    const std::size_t bins = counts.size();
    if (bins == 0 || v < edges.front() || v > edges.back()) return bins;
    if (v == edges.back()) return bins - 1;
    const double width = (edges.back() - edges.front()) / static_cast<double>(bins);
    auto b = static_cast<std::size_t>((v - edges.front()) / width);
    return std::min(b, bins - 1);
}

Histogram multiplier_histogram(const RkamModel& model, std::size_t bins, double lo, double hi) {
    if (bins == 0) throw InvalidArgument("histogram needs at least one bin");
    if (!(hi > lo)) hi = lo + 1.0;
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) {
        h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
    }
    h.counts.assign(bins, 0);
    h.reference = 1.0 / model.excitation()(1.0);
    for (double v : model.beta().data()) {
        const std::size_t b = h.bin_of(v);
        if (b < bins) ++h.counts[b];
    }
    return h;
}

Histogram multiplier_histogram(const RkamModel& model, std::size_t bins) {
    const auto data = model.beta().data();
    const double hi = *std::max_element(data.begin(), data.end());
    return multiplier_histogram(model, bins, 0.0, hi);
}

std::size_t freedman_diaconis_bins(std::span<const double> values, double lo, double hi) {
    if (values.size() < 2 || !(hi > lo)) return 1;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double iqr = sorted[(3 * n) / 4] - sorted[n / 4];
    if (!(iqr > 0.0)) return 1;
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(n));
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((hi - lo) / width)));
}

PooledHistogram pooled_multiplier_histogram(std::span<const RkamModel> models, std::size_t bins) {
    if (models.empty()) throw InvalidArgument("pooled histogram needs at least one model");
    std::vector<double> all;
    for (const auto& m : models) {
        const auto d = m.beta().data();
        all.insert(all.end(), d.begin(), d.end());
    }
    const double hi = *std::max_element(all.begin(), all.end());
    if (bins == 0) bins = freedman_diaconis_bins(all, 0.0, hi);
    PooledHistogram out;
    for (const auto& m : models) out.per_model.push_back(multiplier_histogram(m, bins, 0.0, hi));
    return out;
}

}  // namespace qam
