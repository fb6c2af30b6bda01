#include "qam/excitation.hpp"

#include <algorithm>

#include "qam/error.hpp"

namespace qam {

double Excitation::base(double x) const {
    switch (kind) {
        case ExcitationKind::identity: return x;
        case ExcitationKind::high_order: return 1.0 + std::max(x, -1.0);
        case ExcitationKind::potential: return 1.0 / (1.0 - x + eps_p);
        case ExcitationKind::exponential: return std::exp(x);
    }
    return x;
}

double Excitation::operator()(double x) const {
    double y = x;
    switch (kind) {
        case ExcitationKind::identity: return x;
        // roundoff can push a correlation of -1 slightly below the domain
        case ExcitationKind::high_order: y = std::pow(1.0 + std::max(x, -1.0), lambda); break;
        case ExcitationKind::potential: y = std::pow(1.0 - x + eps_p, -lambda); break;
        case ExcitationKind::exponential: y = std::exp(lambda * x); break;
    }
    if (!std::isfinite(y)) throw OverflowInExcitation(lambda, x);
    return y;
}

std::string to_string(ExcitationKind kind) {
    switch (kind) {
        case ExcitationKind::identity: return "identity";
        case ExcitationKind::high_order: return "high";
        case ExcitationKind::potential: return "potential";
        case ExcitationKind::exponential: return "exp";
    }
    return "identity";
}

ExcitationKind parse_excitation_kind(const std::string& name) {
    if (name == "identity") return ExcitationKind::identity;
    if (name == "high" || name == "high_order" || name == "high-order") return ExcitationKind::high_order;
    if (name == "potential") return ExcitationKind::potential;
    if (name == "exp" || name == "exponential") return ExcitationKind::exponential;
    throw InvalidArgument("unknown excitation '" + name + "'");
}

}  // namespace qam
