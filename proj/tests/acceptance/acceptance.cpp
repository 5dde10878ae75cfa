// Acceptance gates: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "osc/cli.hpp"
#include "osc/geometry.hpp"
#include "osc/losses.hpp"
#include "osc/metrics.hpp"
#include "osc/serialization.hpp"
#include "osc/trainer.hpp"

using namespace osc;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void gate(const std::string& name, double time_limit_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool pass = o.pass;
    std::ostringstream line;
    line << name << " | " << o.detail << " | " << elapsed << " s";
    if (time_limit_s > 0.0) {
        line << " (limit " << time_limit_s << " s)";
        if (elapsed >= time_limit_s) pass = false;
    }
    if (!pass) ++failures;
    std::cout << (pass ? "PASS " : "FAIL ") << line.str() << std::endl;
}

Polyline2D circle(std::size_t n, double r) {
    Polyline2D poly;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 2.0 * std::numbers::pi * double(i) / double(n);
        poly.points.push_back({r * std::cos(t), r * std::sin(t)});
    }
    return poly;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

int main() {
    std::cout.precision(6);

    gate("gradient correctness: grad-check 16x16 soft mode, 10 seeds, max rel err < 1e-4", 5.0, [] {
        double worst = 0.0;
        bool all_zero_exit = true;
        for (int seed = 1; seed <= 10; ++seed) {
            const std::string seed_text = std::to_string(seed);
            const char* argv[] = {"osc", "grad-check", "--size", "16", "--seed", seed_text.c_str(), "--step", "1e-5"};
            std::ostringstream out;
            std::ostringstream err;
            const int code = run_cli(8, argv, out, err);
            all_zero_exit = all_zero_exit && code == 0;
            worst = std::max(worst, parse_json(out.str()).at("max_rel_error").get<double>());
        }
        std::ostringstream d;
        d << "worst max_rel_error " << worst << ", all exits 0: " << (all_zero_exit ? "yes" : "no");
        return Outcome{worst < 1e-4 && all_zero_exit, d.str()};
    });

    gate("SDF oracle equivalence: 100 random 32x32 masks within 1e-6", 10.0, [] {
        double worst = 0.0;
        int used = 0;
        for (std::uint64_t seed = 0; used < 100; ++seed) {
            const double density = 0.02 + 0.5 * double(seed % 10) / 10.0;
            const auto mask = oracle::random_mask(32, 32, density, seed);
            if (mask.count() == 0 || mask.count() == mask.size()) continue;
            ++used;
            const auto fast = signed_distance(mask);
            const auto slow = oracle::signed_distance(mask);
            for (std::size_t i = 0; i < mask.size(); ++i) worst = std::max(worst, std::abs(fast.phi[i] - slow[i]));
        }
        std::ostringstream d;
        d << "masks 100, max abs diff " << worst;
        return Outcome{worst <= 1e-6, d.str()};
    });

    gate("Heaviside analytics within 1e-12", 0.0, [] {
        double worst = 0.0;
        for (double eps : {0.1, 1.0, 3.0}) worst = std::max(worst, std::abs(heaviside(0.0, eps) - 0.5));
        worst = std::max(worst, std::abs(heaviside(1.0, 1.0) - 0.75));
        worst = std::max(worst, std::abs(heaviside(-1.0, 1.0) - 0.25));
        for (double x = -50.0; x <= 50.0; x += 0.173)
            for (double eps : {0.1, 1.0, 3.0})
                worst = std::max(worst, std::abs(heaviside(x, eps) + heaviside(-x, eps) - 1.0));
        std::ostringstream d;
        d << "max deviation " << worst;
        return Outcome{worst <= 1e-12, d.str()};
    });

    gate("offset-curve geometry: r=10 360-gon, B=3 radius 7 / regular, B=12 irregular, perimeter ratio", 0.0, [] {
        const auto poly = circle(360, 10.0);
        const auto in3 = offset_polyline(poly, 3.0, OffsetDirection::Inward);
        double radius_err = 0.0;
        for (const auto& p : in3.curve.points) radius_err = std::max(radius_err, std::abs(std::hypot(p.x, p.y) - 7.0));
        const auto in12 = offset_polyline(poly, 12.0, OffsetDirection::Inward);
        const double ratio = in3.curve.perimeter() / poly.perimeter();
        const double ratio_err = std::abs(ratio - 0.7) / 0.7;
        std::ostringstream d;
        d << "radius err " << radius_err << ", B=3 regular " << in3.regular << ", B=12 regular " << in12.regular
          << ", perimeter ratio " << ratio << " (rel err " << ratio_err << ")";
        return Outcome{radius_err < 1e-3 && in3.regular && !in12.regular && ratio_err <= 0.005, d.str()};
    });

    gate("loss reductions: focal(0,1)==bce 1e-12, dice 0 on perfect, OsC recomposition 1e-9", 0.0, [] {
        double focal_gap = 0.0;
        double dice_perfect = 0.0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            ScalarField p(24, 24);
            for (auto& v : p.values()) v = u(rng);
            const auto t = oracle::random_mask(24, 24, 0.2, seed + 1);
            focal_gap = std::max(focal_gap, std::abs(focal_loss(p, t, 0.0, 1.0, 1e-7) - bce(p, t, 1e-7)));
            const auto m = oracle::random_blobs(24, 24, seed);
            if (m.count() == 0) continue;
            ScalarField binary(24, 24);
            for (std::size_t i = 0; i < m.size(); ++i) binary[i] = m[i] ? 1.0 : 0.0;
            dice_perfect = std::max(dice_perfect, dice_loss(binary, m, 0.0));
        }
        double recomposition = 0.0;
        const auto truth = disc_target(32, 32, 2);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            for (auto mode : {PhiMode::Detached, PhiMode::Soft}) {
                LossConfig cfg;
                cfg.phi_mode = mode;
                const auto b = osc_loss(random_prob_map(32, 32, 2, seed), truth, cfg);
                recomposition = std::max(recomposition, std::abs(b.total - (0.5 * b.l1 + 0.3 * b.l2 + 0.2 * b.l3)));
            }
        }
        std::ostringstream d;
        d << "focal-bce gap " << focal_gap << ", perfect dice " << dice_perfect << ", recomposition gap "
          << recomposition;
        return Outcome{focal_gap <= 1e-12 && dice_perfect == 0.0 && recomposition <= 1e-9, d.str()};
    });

    gate("Hausdorff95 oracle equivalence: 50 random 32x32 pairs exact", 0.0, [] {
        int pairs = 0;
        int mismatches = 0;
        for (std::uint64_t seed = 0; pairs < 50; ++seed) {
            const auto a = oracle::random_blobs(32, 32, seed);
            const auto b = seed % 3 == 0 ? oracle::random_mask(32, 32, 0.05, seed + 7) : oracle::random_blobs(32, 32, seed + 977);
            if (a.count() == 0 || b.count() == 0) continue;
            ++pairs;
            if (hausdorff95(a, b) != oracle::hausdorff95(a, b)) ++mismatches;
        }
        return Outcome{mismatches == 0, "pairs 50, mismatches " + std::to_string(mismatches)};
    });

    gate("end-to-end fit: 64x64 disc at 2.4%, OsC defaults, <= 500 steps, Dice >= 0.99, first 50 steps non-increasing",
         30.0, [] {
             SynthSpec spec;
             const auto sample = synth_generate(spec);
             FitConfig cfg;
             const auto trace = fit_logits(nullptr, sample.truth, cfg);
             const double final_dsc = trace.entries.back().dsc;
             std::size_t increases = 0;
             for (std::size_t i = 1; i < trace.entries.size() && trace.entries[i].step <= 50; ++i)
                 if (trace.entries[i].loss_total > trace.entries[i - 1].loss_total) ++increases;
             std::ostringstream d;
             d << "fg fraction " << sample.achieved_fraction << ", steps " << trace.entries.back().step
               << ", final dice " << final_dsc << ", increases over steps 1-50: " << increases
               << ", loss before first update " << trace.initial_loss << " (all-foreground binarization, band and"
               << " length terms inactive), after step 1 " << trace.entries.front().loss_total;
             return Outcome{cfg.steps <= 500 && final_dsc >= 0.99 && increases == 0, d.str()};
         });

    gate("comparative experiment: 4 losses x 20 seeds, 10% boundary noise, 80 rows, deterministic", 0.0, [] {
        const auto spec = experiment_spec_from_json(parse_json(read_file(OSC_SOURCE_DIR "/experiments/boundary_noise.json")));
        const auto first = run_experiment(spec, 0);
        const auto second = run_experiment(spec, 1);
        const bool identical = first.to_csv() == second.to_csv();
        std::cout << first.summary_text();
        std::ostringstream d;
        d << "rows " << first.rows.size() << ", byte-identical rerun " << (identical ? "yes" : "no");
        return Outcome{first.rows.size() == 80 && identical, d.str()};
    });

    std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
    return failures == 0 ? 0 : 1;
}
