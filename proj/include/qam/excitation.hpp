#pragma once

#include <cmath>
#include <limits>
#include <string>

namespace qam {

enum class ExcitationKind : unsigned char {
    identity = 0,
    high_order = 1,   // (1 + x)^q
    potential = 2,    // 1 / (1 - x + eps_p)^L
    exponential = 3,  // exp(alpha x)
};

/// Default epsilon of the potential function: sqrt of machine epsilon.
inline const double kPotentialEpsilon = std::sqrt(std::numeric_limits<double>::epsilon());

/**
 * Continuous non-decreasing real function applied to normalized real
 * correlations in [-1, 1]. The three parametric kinds have the form
 * [A(x)]^lambda with A strictly increasing and non-negative.
 */
struct Excitation {
    ExcitationKind kind = ExcitationKind::identity;
    double lambda = 1.0;
    double eps_p = kPotentialEpsilon;

    static Excitation identity() { return {ExcitationKind::identity, 1.0, kPotentialEpsilon}; }
    static Excitation high_order(double q) { return {ExcitationKind::high_order, q, kPotentialEpsilon}; }
    static Excitation potential(double l, double eps = kPotentialEpsilon) {
        return {ExcitationKind::potential, l, eps};
    }
    static Excitation exponential(double alpha) { return {ExcitationKind::exponential, alpha, kPotentialEpsilon}; }

    /// Same family with a different lambda.
    Excitation with_lambda(double l) const { return {kind, l, eps_p}; }

    bool in_family() const { return kind != ExcitationKind::identity; }

    /// Base A(x) of the family member; identity has none and returns x.
    double base(double x) const;

    /// f(x). Throws OverflowInExcitation when the result is not finite.
    double operator()(double x) const;

    bool operator==(const Excitation&) const = default;
};

/// Short names used in CSV and on the command line: identity, high, potential, exp.
std::string to_string(ExcitationKind kind);
ExcitationKind parse_excitation_kind(const std::string& name);

}  // namespace qam
