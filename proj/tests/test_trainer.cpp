#include <doctest.h>

#include <cmath>

#include "osc/serialization.hpp"
#include "osc/trainer.hpp"

using namespace osc;

namespace {

LossConfig soft_config() {
    LossConfig cfg;
    cfg.phi_mode = PhiMode::Soft;
    return cfg;
}

LabelMask small_disc() {
    SynthSpec spec;
    spec.width = 32;
    spec.height = 32;
    spec.fg_fraction = 0.06;
    return synth_generate(spec).truth;
}

}  // namespace

TEST_CASE("grad_check on random maps") {
    const auto truth = disc_target(16, 16, 2);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto r = grad_check(random_prob_map(16, 16, 2, seed), truth, soft_config(), 1e-5);
        INFO("seed " << seed << " worst pixel " << r.worst_pixel);
        CHECK(r.max_rel_error < kGradCheckTolerance);
        CHECK(r.entries_checked >= kGradCheckMinEntries);
    }
    // Multi-class and detached mode.
    const auto r3 = grad_check(random_prob_map(16, 16, 3, 5), disc_target(16, 16, 3), soft_config(), 1e-5);
    CHECK(r3.max_rel_error < kGradCheckTolerance);
    const auto rd = grad_check(random_prob_map(16, 16, 2, 5), truth, LossConfig{}, 1e-5);
    CHECK(rd.max_rel_error < kGradCheckTolerance);
}

TEST_CASE("grad_check on a uniform map") {
    // With K = 4 no perturbation reaches the 0.5 binarization threshold.
    ProbMap uniform(16, 16, 4, 0.25);
    uniform.set_normalized(true);
    const auto r = grad_check(uniform, disc_target(16, 16, 4), soft_config(), 1e-5);
    CHECK(r.max_rel_error < 1e-6);
    CHECK(r.entries_skipped == 0);
}

TEST_CASE("grad_check rejects a bad step") {
    const auto truth = disc_target(8, 8, 2);
    const auto probs = random_prob_map(8, 8, 2, 1);
    CHECK_THROWS_AS(grad_check(probs, truth, soft_config(), 0.0), Error);
    CHECK_THROWS_AS(grad_check(probs, truth, soft_config(), 1e-1), Error);
}

TEST_CASE("softmax normalizes") {
    const Shape shape{3, 2};
    const std::vector<std::vector<double>> logits{{0, 1, 2, 3, 4, 5}, {5, 4, 3, 2, 1, 0}, {1000, -1000, 0, 0, 0, 0}};
    const auto p = softmax(logits, shape);
    CHECK(p.normalized());
    CHECK(p.check_normalized(1e-12));
    CHECK(p(0, 2) == doctest::Approx(1.0));
    CHECK(p(3, 0) == doctest::Approx(std::exp(3.0) / (std::exp(3.0) + std::exp(2.0) + 1.0)));
}

TEST_CASE("zero learning rate is a no-op") {
    const auto truth = small_disc();
    FitConfig cfg;
    cfg.steps = 1;
    cfg.learning_rate = 0.0;
    const auto trace = fit_logits(nullptr, truth, cfg);
    REQUIRE(trace.entries.size() == 1);
    CHECK(trace.entries[0].step == 1);
    CHECK(trace.entries[0].loss_total == trace.initial_loss);
    // Zero logits stay uniform.
    for (double p : trace.final_probs.data()) CHECK(p == 0.5);

    cfg.init = InitKind::Gaussian;
    cfg.seed = 3;
    const auto noisy = fit_logits(nullptr, truth, cfg);
    CHECK(noisy.entries[0].loss_total == noisy.initial_loss);
}

TEST_CASE("fits are deterministic") {
    const auto truth = small_disc();
    FitConfig cfg;
    cfg.steps = 20;
    cfg.init = InitKind::Gaussian;
    cfg.seed = 11;
    CHECK(trace_to_csv(fit_logits(nullptr, truth, cfg)) == trace_to_csv(fit_logits(nullptr, truth, cfg)));
}

TEST_CASE("small-step descent is monotone for every loss") {
    const auto truth = small_disc();
    for (auto kind : {LossKind::Bce, LossKind::Dice, LossKind::Focal, LossKind::Osc}) {
        FitConfig cfg;
        cfg.loss_kind = kind;
        cfg.steps = 60;
        cfg.learning_rate = 1e-2;
        const auto trace = fit_logits(nullptr, truth, cfg);
        INFO(to_string(kind));
        // The OsC loss before the first update sits on the degenerate
        // all-foreground binarization, where L2 and L3 are switched off.
        if (kind != LossKind::Osc) CHECK(trace.entries[0].loss_total <= trace.initial_loss);
        for (std::size_t i = 1; i < trace.entries.size(); ++i)
            CHECK(trace.entries[i].loss_total <= trace.entries[i - 1].loss_total);
    }
}

TEST_CASE("default fit reaches the target") {
    const auto truth = small_disc();
    FitConfig cfg;
    cfg.steps = 200;
    cfg.record_every = 50;
    const auto trace = fit_logits(nullptr, truth, cfg);
    CHECK(trace.entries.back().step == 200);
    CHECK(trace.entries.back().dsc >= 0.99);
    CHECK(trace.entries.back().l3.has_value());
}

TEST_CASE("trace CSV round trip") {
    const auto truth = small_disc();
    FitConfig cfg;
    cfg.steps = 7;
    cfg.record_every = 3;
    const auto trace = fit_logits(nullptr, truth, cfg);
    const auto csv = trace_to_csv(trace);
    CHECK(csv.rfind(kTraceCsvHeader, 0) == 0);
    const auto parsed = parse_trace_csv(csv);
    REQUIRE(parsed.size() == trace.entries.size());
    CHECK(parsed.back().step == 7);
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        CHECK(parsed[i].step == trace.entries[i].step);
        CHECK(parsed[i].loss_total == trace.entries[i].loss_total);
        CHECK(parsed[i].l2 == trace.entries[i].l2);
        CHECK(parsed[i].dsc == trace.entries[i].dsc);
    }
}

TEST_CASE("FitConfig validation and JSON") {
    FitConfig cfg;
    cfg.learning_rate = -1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    FitConfig custom;
    custom.steps = 42;
    custom.loss_kind = LossKind::Dice;
    custom.init = InitKind::Gaussian;
    custom.loss_config.beta = 0.9;
    CHECK(fit_config_from_json(to_json(custom)) == custom);
    CHECK_THROWS_AS(fit_config_from_json(parse_json(R"({"momentum": 0.9})")), Error);
}

TEST_CASE("experiments") {
    ExperimentSpec spec;
    spec.dataset.width = 32;
    spec.dataset.height = 32;
    spec.dataset.fg_fraction = 0.06;
    spec.dataset.noise = 0.1;
    spec.fit.steps = 30;
    spec.fit.record_every = 10;

    SUBCASE("no seeds gives a header only") {
        const auto report = run_experiment(spec, 1);
        CHECK(report.rows.empty());
        CHECK(report.to_csv() == std::string(kExperimentCsvHeader) + "\n");
    }

    SUBCASE("reruns are byte-identical regardless of workers") {
        spec.seeds = {1, 2, 3};
        const auto a = run_experiment(spec, 1);
        const auto b = run_experiment(spec, 3);
        CHECK(a.rows.size() == 12);
        CHECK(a.to_csv() == b.to_csv());
        const auto parsed = parse_experiment_csv(a.to_csv());
        REQUIRE(parsed.size() == 12);
        CHECK(parsed[4].loss == LossKind::Dice);
        CHECK(parsed[4].seed == 2);
        CHECK(parsed[4].metrics.dsc == a.rows[4].metrics.dsc);
        const auto summary = a.summarize();
        REQUIRE(summary.size() == 4);
        CHECK(summary[3].runs == 3);
        CHECK(a.summary_text().find("osc_mean_dsc_exceeds_bce: ") != std::string::npos);
    }

    SUBCASE("spec JSON round trip") {
        spec.seeds = {4, 9};
        spec.losses = {LossKind::Osc, LossKind::Bce};
        const auto back = experiment_spec_from_json(to_json(spec));
        CHECK(back.seeds == spec.seeds);
        CHECK(back.losses == spec.losses);
        CHECK(back.dataset == spec.dataset);
        CHECK(back.fit == spec.fit);
        const auto counted = experiment_spec_from_json(parse_json(R"({"num_seeds": 3, "first_seed": 5})"));
        CHECK(counted.seeds == std::vector<std::uint64_t>{5, 6, 7});
    }
}
