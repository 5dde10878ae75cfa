#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "osc/metrics.hpp"

using namespace osc;

TEST_CASE("confusion metrics on reference cases") {
    const auto m = oracle::random_blobs(20, 20, 3);
    REQUIRE(m.count() > 0);
    const auto same = confusion_metrics(m, m);
    CHECK(same.dsc == 1.0);
    CHECK(same.jac == 1.0);
    CHECK(same.pre == 1.0);
    CHECK(same.rec == 1.0);
    CHECK_FALSE(same.flags.any());

    const auto disjoint = confusion_metrics(m, complement(m));
    CHECK(disjoint.dsc == 0.0);
    CHECK(disjoint.jac == 0.0);
    CHECK(disjoint.pre == 0.0);
    CHECK(disjoint.rec == 0.0);

    BinaryMask truth(10, 2);
    BinaryMask pred(10, 2);
    for (std::size_t x = 0; x < 10; ++x) {
        truth.set(x, 0, true);
        pred.set(x, 0, true);
        pred.set(x, 1, true);
    }
    const auto counts = confusion_counts(pred, truth);
    CHECK(counts.tp == 10);
    CHECK(counts.fp == 10);
    CHECK(counts.fn == 0);
    const auto r = confusion_metrics(pred, truth);
    CHECK(r.dsc == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(r.jac == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.pre == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.rec == 1.0);
}

TEST_CASE("empty-denominator conventions set flags") {
    const BinaryMask empty(6, 6);
    const auto both = confusion_metrics(empty, empty);
    CHECK(both.dsc == 1.0);
    CHECK(both.jac == 1.0);
    CHECK(both.flags.dsc_empty);
    CHECK(both.flags.pre_empty);
    CHECK(both.flags.rec_empty);

    BinaryMask some(6, 6);
    some.set(2, 2, true);
    const auto missed = confusion_metrics(empty, some);
    CHECK(missed.pre == 0.0);
    CHECK(missed.rec == 0.0);
    CHECK(missed.flags.pre_empty);
    CHECK_FALSE(missed.flags.dsc_empty);

    const auto undefined = evaluate(empty, some);
    CHECK(std::isnan(undefined.hau95));
    CHECK(undefined.flags.hau95_undefined);
    CHECK_THROWS_AS(hausdorff95(empty, some), Error);
}

TEST_CASE("dice and jaccard are linked") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto a = oracle::random_blobs(24, 24, seed);
        const auto b = oracle::random_blobs(24, 24, seed + 500);
        const auto r = confusion_metrics(a, b);
        CHECK(std::abs(r.dsc - 2.0 * r.jac / (1.0 + r.jac)) <= 1e-9);
    }
}

TEST_CASE("boundary pixels") {
    BinaryMask block(5, 5);
    for (std::size_t y = 1; y < 4; ++y)
        for (std::size_t x = 1; x < 4; ++x) block.set(x, y, true);
    const auto b = boundary(block);
    CHECK(b.count() == 8);
    CHECK_FALSE(b(2, 2));
    CHECK(boundary(BinaryMask(3, 3, true)).count() == 8);
}

TEST_CASE("hausdorff95 reference values") {
    const auto m = oracle::random_blobs(16, 16, 1);
    REQUIRE(m.count() > 0);
    CHECK(hausdorff95(m, m) == 0.0);

    BinaryMask a(10, 10);
    BinaryMask b(10, 10);
    a.set(1, 2, true);
    b.set(4, 6, true);
    CHECK(hausdorff95(a, b) == 5.0);
}

TEST_CASE("hausdorff95 matches the boundary-pair oracle") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto a = seed % 2 ? oracle::random_blobs(32, 32, seed) : oracle::random_mask(32, 32, 0.1, seed);
        const auto b = oracle::random_blobs(32, 32, seed + 1000);
        if (a.count() == 0 || b.count() == 0) continue;
        const double fast = hausdorff95(a, b);
        CHECK(fast == oracle::hausdorff95(a, b));
        CHECK(fast == hausdorff95(b, a));

        // The percentile never exceeds the maximum pooled distance.
        double hd = 0.0;
        const auto ea = boundary(a);
        const auto eb = boundary(b);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!ea[i] && !eb[i]) continue;
            const double px = double(i % 32);
            const double py = double(i / 32);
            for (const auto* other : {&eb, &ea}) {
                if ((other == &eb && !ea[i]) || (other == &ea && !eb[i])) continue;
                double best = 1e300;
                for (std::size_t j = 0; j < a.size(); ++j)
                    if ((*other)[j]) best = std::min(best, std::hypot(px - double(j % 32), py - double(j / 32)));
                hd = std::max(hd, best);
            }
        }
        CHECK(fast <= hd);
    }
}

TEST_CASE("per-class evaluation and macro average") {
    LabelMask truth(4, 1, 3, std::vector<std::uint16_t>{0, 1, 2, 2});
    LabelMask pred(4, 1, 3, std::vector<std::uint16_t>{0, 1, 1, 2});
    const auto reports = evaluate_classes(pred, truth);
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].dsc == doctest::Approx(2.0 / 3.0));
    CHECK(reports[1].dsc == doctest::Approx(2.0 / 3.0));
    const auto avg = macro_average(reports);
    CHECK(avg.dsc == doctest::Approx(2.0 / 3.0));
    CHECK(avg.rec == doctest::Approx(0.75));
}

TEST_CASE("metrics CSV round trip") {
    MetricsRow row{"img-7", "1", evaluate(oracle::random_blobs(20, 20, 4), oracle::random_blobs(20, 20, 5))};
    const auto back = parse_metrics_row(to_csv_row(row));
    CHECK(back.image_id == row.image_id);
    CHECK(back.class_label == row.class_label);
    CHECK(back.report.dsc == row.report.dsc);
    CHECK(back.report.jac == row.report.jac);
    CHECK(back.report.pre == row.report.pre);
    CHECK(back.report.rec == row.report.rec);
    CHECK(back.report.hau95 == row.report.hau95);
    CHECK(back.report.flags == row.report.flags);

    MetricsRow flagged{"e", "2", evaluate(BinaryMask(4, 4), BinaryMask(4, 4))};
    const auto fb = parse_metrics_row(to_csv_row(flagged));
    CHECK(std::isnan(fb.report.hau95));
    CHECK(fb.report.flags == flagged.report.flags);

    CHECK_THROWS_AS(parse_metrics_row("a,b,1"), Error);
    CHECK_THROWS_AS(parse_metrics_row("a,1,x,1,1,1,1,"), Error);
}
