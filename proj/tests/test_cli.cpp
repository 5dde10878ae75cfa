#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "osc/cli.hpp"
#include "osc/image_io.hpp"
#include "osc/metrics.hpp"
#include "osc/serialization.hpp"
#include "osc/trainer.hpp"

using namespace osc;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "osc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("osc-cli-" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

LabelMask square_mask() {
    LabelMask m(16, 16, 2);
    for (std::size_t y = 4; y < 11; ++y)
        for (std::size_t x = 5; x < 12; ++x) m.set(y * 16 + x, 1);
    return m;
}

}  // namespace

TEST_CASE("loss on a perfect prediction") {
    TempDir dir;
    save_mask(square_mask(), dir / "truth.pgm");
    const auto r = run({"loss", dir / "truth.pgm", dir / "truth.pgm", "--kind", "dice"});
    REQUIRE(r.code == 0);
    const auto doc = parse_json(r.out);
    CHECK(doc.at("value").get<double>() == doctest::Approx(0.0));

    const auto o = run({"loss", dir / "truth.pgm", dir / "truth.pgm", "--kind", "osc", "--config", R"({"beta": 0.5})"});
    REQUIRE(o.code == 0);
    const auto breakdown = loss_breakdown_from_json(parse_json(o.out));
    CHECK(breakdown.l1 <= 2e-7);
    CHECK(breakdown.total == doctest::Approx(0.5 * breakdown.l1 + 0.5 * breakdown.l2 + 0.2 * breakdown.l3));

    CHECK(run({"loss", dir / "truth.pgm", dir / "truth.pgm", "--kind", "hinge"}).code == 1);
}

TEST_CASE("grad-check subcommand") {
    const auto r = run({"grad-check", "--size", "16", "--seed", "1"});
    CHECK(r.code == 0);
    const auto doc = parse_json(r.out);
    CHECK(doc.at("max_rel_error").get<double>() < 1e-4);
    CHECK(doc.at("pass").get<bool>());
    CHECK(run({"grad-check", "--step", "1"}).code == 1);
}

TEST_CASE("usage errors exit 1") {
    const auto r = run({"frobnicate"});
    CHECK(r.code == 1);
    CHECK_FALSE(r.err.empty());
    CHECK(run({}).code == 1);
    CHECK(run({"sdf"}).code == 1);
    CHECK(run({"metrics", "/nonexistent/a.pgm", "/nonexistent/b.pgm"}).code == 1);
}

TEST_CASE("sdf and band outputs load back") {
    TempDir dir;
    save_mask(square_mask(), dir / "m.png");
    const auto s = run({"sdf", dir / "m.png", "-o", dir / "phi.pgm"});
    REQUIRE(s.code == 0);
    const auto phi = load_sdf16(dir / "phi.pgm");
    CHECK(phi(8, 8) > 0.0);
    CHECK(phi(0, 0) < 0.0);

    const auto b = run({"band", dir / "m.png", "-B", "1", "-o", dir / "band.pgm"});
    REQUIRE(b.code == 0);
    const auto band = load_mask(dir / "band.pgm");
    CHECK(band.num_classes() == 3);
    CHECK(band(5, 4) == 2);
    CHECK(band(4, 4) == 1);
    CHECK(band(8, 8) == 0);
}

TEST_CASE("metrics output parses as CSV rows") {
    TempDir dir;
    save_mask(square_mask(), dir / "t.pgm");
    const auto r = run({"metrics", dir / "t.pgm", dir / "t.pgm", "--id", "case1"});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string header;
    std::getline(lines, header);
    CHECK(header == kMetricsCsvHeader);
    std::string line;
    std::getline(lines, line);
    const auto row = parse_metrics_row(line);
    CHECK(row.image_id == "case1");
    CHECK(row.report.dsc == 1.0);
    CHECK(row.report.hau95 == 0.0);
}

TEST_CASE("offset output parses as an offset result") {
    TempDir dir;
    {
        std::ofstream f(dir / "square.csv");
        f << "x,y\n0,0\n10,0\n10,10\n0,10\n";
    }
    const auto r = run({"offset", "--curve", dir / "square.csv", "-B", "1"});
    REQUIRE(r.code == 0);
    const auto res = offset_result_from_json(parse_json(r.out));
    CHECK(res.curve.points.size() == 4);
    CHECK(res.translation == 1.0);
    CHECK(run({"offset", "--curve", dir / "square.csv", "-B", "1", "--direction", "sideways"}).code == 1);
}

TEST_CASE("synth, fit and experiment") {
    TempDir dir;
    const auto s = run({"synth", "--spec", R"({"width": 32, "height": 32, "fg_fraction": 0.06, "noise": 0.1})", "-o",
                        dir / "data"});
    REQUIRE(s.code == 0);
    CHECK(load_mask(dir / "data/truth.pgm").num_classes() == 2);
    CHECK(load_image(dir / "data/image.pgm").width() == 32);
    CHECK(fs::exists(dir / "data/noisy.pgm"));

    const std::string fit_spec =
        R"({"dataset": {"width": 32, "height": 32, "fg_fraction": 0.06}, "fit": {"steps": 5}, "use_image": false})";
    const auto f = run({"fit", "--spec", fit_spec, "-o", dir / "trace.csv", "--probs", dir / "p.pgm"});
    REQUIRE(f.code == 0);
    std::ifstream trace_file(dir / "trace.csv");
    std::stringstream trace;
    trace << trace_file.rdbuf();
    CHECK(parse_trace_csv(trace.str()).size() == 5);
    CHECK(fs::exists(dir / "p.pgm"));

    const std::string exp_spec =
        R"({"losses": ["bce", "osc"], "num_seeds": 2, "first_seed": 1,
            "dataset": {"width": 32, "height": 32, "fg_fraction": 0.06, "noise": 0.1}, "fit": {"steps": 5}})";
    const auto e = run({"experiment", "--spec", exp_spec, "-o", dir / "report.csv", "--workers", "2"});
    REQUIRE(e.code == 0);
    CHECK(e.out.find("osc_mean_dsc_exceeds_bce") != std::string::npos);
    std::ifstream report_file(dir / "report.csv");
    std::stringstream report;
    report << report_file.rdbuf();
    CHECK(parse_experiment_csv(report.str()).size() == 4);

    CHECK(run({"fit", "--spec", R"({"fit": {"steps": 5}, "extra": 1})", "-o", dir / "x.csv"}).code == 1);
}
