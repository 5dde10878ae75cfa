#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "osc/grid.hpp"

using namespace osc;

TEST_CASE("one_hot encodes labels") {
    SUBCASE("single pixel, label 0") {
        const auto p = one_hot(LabelMask(1, 1, 2, {0}));
        CHECK(p(0, 0) == 1.0);
        CHECK(p(0, 1) == 0.0);
        CHECK(p.normalized());
    }
    SUBCASE("two pixels") {
        const auto p = one_hot(LabelMask(2, 1, 2, {0, 1}));
        CHECK(p(0, 0) == 1.0);
        CHECK(p(0, 1) == 0.0);
        CHECK(p(1, 0) == 0.0);
        CHECK(p(1, 1) == 1.0);
    }
}

TEST_CASE("one_hot then argmax recovers the labels") {
    std::mt19937_64 rng(7);
    for (std::size_t k = 2; k <= 5; ++k) {
        std::uniform_int_distribution<int> label(0, static_cast<int>(k) - 1);
        std::vector<std::uint16_t> labels(13 * 9);
        for (auto& l : labels) l = static_cast<std::uint16_t>(label(rng));
        const LabelMask mask(13, 9, k, labels);
        const auto probs = one_hot(mask);
        CHECK(probs.check_normalized());
        for (std::size_t i = 0; i < probs.pixels(); ++i) {
            double sum = 0.0;
            for (std::size_t c = 0; c < k; ++c) sum += probs(i, c);
            CHECK(sum == 1.0);
        }
        CHECK(argmax(probs) == mask);
    }
}

TEST_CASE("threshold uses >= and is monotone in t") {
    CHECK(threshold(ScalarField(4, 3, 0.7), 0.5).count() == 12);
    CHECK(threshold(ScalarField(4, 3, 0.3), 0.5).count() == 0);
    CHECK(threshold(ScalarField(1, 1, 0.5), 0.5)[0]);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(200);
    for (auto& x : v) x = u(rng);
    const ScalarField field(20, 10, v);
    for (double t = 0.0; t < 1.0; t += 0.05) {
        const auto low = threshold(field, t);
        const auto high = threshold(field, t + 0.05);
        for (std::size_t i = 0; i < field.size(); ++i) {
            if (high[i]) CHECK(low[i]);
        }
    }
}

TEST_CASE("finite_check reports the first offending coordinate") {
    ScalarField field(5, 4, 0.0);
    CHECK_NOTHROW(finite_check(field));

    field(3, 2) = std::numeric_limits<double>::quiet_NaN();
    try {
        finite_check(field);
        FAIL("expected NonFiniteValue");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonFiniteValue);
        REQUIRE(e.where.has_value());
        CHECK(e.where->x == 3);
        CHECK(e.where->y == 2);
    }

    ScalarField inf(2, 2, 0.0);
    inf(1, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(finite_check(inf), Error);
}

TEST_CASE("containers enforce their shape contracts") {
    CHECK_THROWS_AS(ScalarField(0, 3), Error);
    CHECK_THROWS_AS(ScalarField(2, 2, std::vector<double>{1, 2, 3}), Error);
    CHECK_THROWS_AS(ScalarField(1, 1, std::vector<double>{std::nan("")}), Error);
    CHECK_THROWS_AS(LabelMask(2, 1, 2, {0, 2}), Error);
    CHECK_THROWS_AS(LabelMask(2, 1, 1, {0, 0}), Error);
    CHECK_THROWS_AS(ProbMap(2, 2, 1), Error);

    ProbMap p(2, 1, 2, 0.5);
    CHECK(p.check_normalized());
    p(0, 0) = 0.6;
    CHECK_FALSE(p.check_normalized());
}
