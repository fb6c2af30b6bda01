#pragma once

#include <algorithm>
#include <numeric>
#include <optional>

#include "qam/error.hpp"
#include "qam/random.hpp"

namespace qam {

template <class Step>
RecallOutcome iterate_until_stable(Step&& step, QVector x, const RecallConfig& cfg, std::size_t n) {
    if (!(cfg.tau > 0.0)) throw InvalidArgument("recall tolerance must be positive");

    std::vector<std::size_t> order;
    std::optional<RandomStream> shuffler;
    if (cfg.sweep_permutation_seed) {
        order.resize(n);
        shuffler.emplace(RandomStream::derive(*cfg.sweep_permutation_seed, {0x5eedULL}));
    }

    RecallOutcome out;
    while (out.iterations < cfg.t_max) {
        if (shuffler) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::shuffle(order.begin(), order.end(), shuffler->engine());
        }
        QVector y = step(x, SweepOrder(order));
        const double delta = distance(y, x);
        ++out.iterations;
        out.trajectory_norms.push_back(delta);
        x = std::move(y);
        if (delta < cfg.tau) {
            out.converged = true;
            break;
        }
    }
    out.y = std::move(x);
    return out;
}

}  // namespace qam
