#include <doctest.h>

#include <cfloat>
#include <cmath>

#include "qam/error.hpp"
#include "qam/excitation.hpp"

using namespace qam;
using doctest::Approx;

TEST_CASE("excitation values at worked points") {
    CHECK(Excitation::identity()(0.3) == 0.3);
    CHECK(Excitation::high_order(5)(1.0) == 32.0);
    CHECK(Excitation::high_order(5)(0.0) == 1.0);
    CHECK(Excitation::high_order(5)(-1.0) == 0.0);
    CHECK(Excitation::exponential(4)(0.5) == Approx(std::exp(2.0)));
    CHECK(Excitation::exponential(4)(-1.0) == Approx(std::exp(-4.0)));
    const double eps = std::sqrt(DBL_EPSILON);
    CHECK(Excitation::potential(3)(0.0) == Approx(std::pow(1.0 + eps, -3.0)));
    CHECK(Excitation::potential(3)(1.0) == Approx(std::pow(eps, -3.0)));
    CHECK(Excitation::potential(3)(-1.0) == Approx(1.0 / std::pow(2.0 + eps, 3.0)));
}

TEST_CASE("potential epsilon is the square root of machine epsilon") {
    CHECK(kPotentialEpsilon == std::sqrt(DBL_EPSILON));
    CHECK(Excitation::potential(3).eps_p == std::sqrt(DBL_EPSILON));
}

TEST_CASE("high-order base clamps slightly below the domain") {
    CHECK(Excitation::high_order(3)(-1.0 - 1e-15) == 0.0);
    CHECK(Excitation::high_order(3).base(-1.5) == 0.0);
}

TEST_CASE("every excitation is non-decreasing on [-1, 1]") {
    const Excitation family[] = {Excitation::identity(),     Excitation::high_order(5),  Excitation::high_order(70),
                                 Excitation::potential(3),   Excitation::potential(5),   Excitation::exponential(4),
                                 Excitation::exponential(40)};
    for (const auto& f : family) {
        double prev = f(-1.0);
        for (int k = 1; k <= 1000; ++k) {
            const double x = -1.0 + 2.0 * k / 1000.0;
            const double y = f(x);
            CHECK(y >= prev);
            prev = y;
        }
    }
}

TEST_CASE("parametric families are base to the power lambda") {
    for (double x : {-0.9, -0.2, 0.0, 0.4, 0.99}) {
        for (const Excitation& f : {Excitation::high_order(7), Excitation::potential(2), Excitation::exponential(3)}) {
            CHECK(f(x) == Approx(std::pow(f.base(x), f.lambda)).epsilon(1e-12));
        }
    }
}

TEST_CASE("overflow raises with the offending parameters") {
    const Excitation f = Excitation::exponential(1000);
    try {
        (void)f(1.0);
        FAIL("expected overflow");
    } catch (const OverflowInExcitation& e) {
        CHECK(e.lambda() == 1000.0);
        CHECK(e.argument() == 1.0);
    }
    CHECK_NOTHROW((void)f(0.5));
    CHECK_THROWS_AS((void)Excitation::potential(100)(1.0), OverflowInExcitation);
}

TEST_CASE("excitation names round-trip") {
    for (auto k : {ExcitationKind::identity, ExcitationKind::high_order, ExcitationKind::potential,
                   ExcitationKind::exponential}) {
        CHECK(parse_excitation_kind(to_string(k)) == k);
    }
    CHECK_THROWS_AS(parse_excitation_kind("sigmoid"), InvalidArgument);
}
