#include "osc/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "osc/format.hpp"
#include "osc/image_io.hpp"
#include "osc/metrics.hpp"
#include "osc/serialization.hpp"

namespace osc {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& text, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw Error(ErrorKind::IoFailure, "write to '" + path.string() + "' failed");
}

/// Accepts either a path to a JSON file or an inline JSON object.
json load_json_argument(const std::string& arg) {
    const auto first = arg.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && arg[first] == '{') return parse_json(arg);
    return parse_json(read_text(arg));
}

/// Foreground = every nonzero class unless a class is selected.
BinaryMask foreground(const LabelMask& mask, int selected) {
    if (selected >= 0) return mask.class_mask(static_cast<std::size_t>(selected));
    BinaryMask out(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.size(); ++i) out.set(i, mask[i] != 0);
    return out;
}

Polyline2D read_curve_csv(const std::string& path) {
    std::istringstream in(read_text(path));
    Polyline2D poly;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        const auto cells = split_csv(line);
        if (cells.size() != 2) {
            throw Error(ErrorKind::InvalidArgument, path + ":" + std::to_string(line_no) + ": expected x,y");
        }
        if (line_no == 1 && cells[0] == "x") continue;
        poly.points.push_back({parse_real(cells[0]), parse_real(cells[1])});
    }
    poly.closed = true;
    return poly;
}

struct Options {
    std::string mask;
    std::string pred;
    std::string truth;
    std::string output;
    std::string kind = "osc";
    std::string config;
    std::string spec;
    std::string curve;
    std::string direction = "inward";
    std::string image_id;
    std::string probs_out;
    double band_width = 5.0;
    double offset_width = 1.0;
    double h = 1e-5;
    std::size_t size = 16;
    std::size_t classes = 2;
    std::size_t workers = 0;
    std::uint64_t seed = 1;
    int selected_class = -1;
};

int cmd_sdf(const Options& o, std::ostream& out) {
    const auto mask = foreground(load_mask(o.mask), o.selected_class);
    const auto sdf = signed_distance(mask);
    save_sdf16(sdf.phi, o.output);
    double lo = sdf.phi[0];
    double hi = sdf.phi[0];
    for (double v : sdf.phi.values()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    out << json{{"width", mask.width()}, {"height", mask.height()}, {"min_phi", lo}, {"max_phi", hi},
                {"output", o.output}}.dump()
        << "\n";
    return kExitOk;
}

int cmd_band(const Options& o, std::ostream& out) {
    const auto mask = foreground(load_mask(o.mask), o.selected_class);
    const auto band = band_mask(signed_distance(mask), o.band_width);
    // 0 = outside the band, 1 = outer side, 2 = inner side.
    LabelMask labels(mask.width(), mask.height(), 3);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        labels.set(i, band.inner[i] ? 2 : (band.outer[i] ? 1 : 0));
    }
    save_mask(labels, o.output);
    out << json{{"half_width", band.half_width},
                {"band_pixels", band.combined.count()},
                {"inner_pixels", band.inner.count()},
                {"outer_pixels", band.outer.count()},
                {"empty", band.empty},
                {"output", o.output}}
                   .dump()
        << "\n";
    return kExitOk;
}

int cmd_loss(const Options& o, std::ostream& out) {
    const LossConfig cfg = o.config.empty() ? LossConfig{} : loss_config_from_json(load_json_argument(o.config));
    const auto kind = loss_kind_from_string(o.kind);
    const auto pred = load_image(o.pred);
    const auto truth = load_mask(o.truth);
    require_same_shape(pred.shape(), truth.shape(), "loss");
    if (truth.num_classes() != 2) {
        throw Error(ErrorKind::InvalidArgument, "loss takes a binary truth mask; got " +
                                                    std::to_string(truth.num_classes()) + " gray levels");
    }
    const auto probs = ProbMap::from_foreground(pred);
    if (kind == LossKind::Osc) {
        out << to_json(osc_loss(probs, truth, cfg), cfg).dump() << "\n";
        return kExitOk;
    }
    const auto fg = truth.class_mask(1);
    double value = 0.0;
    switch (kind) {
        case LossKind::Bce: value = bce(pred, fg, cfg.clamp); break;
        case LossKind::Dice: value = dice_loss(pred, fg, kDiceSmooth); break;
        case LossKind::Focal: value = focal_loss(pred, fg, cfg.focal_gamma, cfg.focal_alpha, cfg.clamp); break;
        case LossKind::Osc: break;
    }
    out << json{{"kind", o.kind}, {"value", value}, {"total", value}}.dump() << "\n";
    return kExitOk;
}

int cmd_grad_check(const Options& o, std::ostream& out, std::ostream& err) {
    LossConfig cfg = o.config.empty() ? LossConfig{} : loss_config_from_json(load_json_argument(o.config));
    cfg.phi_mode = PhiMode::Soft;
    const auto probs = random_prob_map(o.size, o.size, o.classes, o.seed);
    const auto truth = disc_target(o.size, o.size, o.classes);
    const auto result = grad_check(probs, truth, cfg, o.h);
    const bool pass = result.max_rel_error < kGradCheckTolerance;
    out << json{{"size", o.size},
                {"seed", o.seed},
                {"classes", o.classes},
                {"h", o.h},
                {"max_rel_error", result.max_rel_error},
                {"entries_checked", result.entries_checked},
                {"entries_skipped", result.entries_skipped},
                {"tolerance", kGradCheckTolerance},
                {"pass", pass}}
                   .dump()
        << "\n";
    if (!pass) {
        err << "osc: gradient check failed: max relative error " << format_real(result.max_rel_error) << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

int cmd_fit(const Options& o, std::ostream& out) {
    const auto doc = load_json_argument(o.spec);
    if (!doc.is_object()) throw Error(ErrorKind::InvalidArgument, "fit spec must be a JSON object");
    for (const auto& item : doc.items()) {
        if (item.key() != "dataset" && item.key() != "fit" && item.key() != "use_image") {
            throw Error(ErrorKind::InvalidArgument, "fit spec: unknown key '" + item.key() + "'");
        }
    }
    const SynthSpec dataset = doc.contains("dataset") ? synth_spec_from_json(doc.at("dataset")) : SynthSpec{};
    const FitConfig fit = doc.contains("fit") ? fit_config_from_json(doc.at("fit")) : FitConfig{};
    const bool use_image = doc.value("use_image", false);

    const auto sample = synth_generate(dataset);
    const auto trace = fit_logits(use_image ? &sample.image : nullptr, sample.noisy, fit);
    write_text(trace_to_csv(trace), o.output);
    if (!o.probs_out.empty()) save_field(trace.final_probs.channel(1), o.probs_out);

    const auto final_metrics = macro_average(evaluate_classes(argmax(trace.final_probs), sample.truth));
    out << json{{"loss_kind", std::string(to_string(fit.loss_kind))},
                {"steps", fit.steps},
                {"initial_loss", trace.initial_loss},
                {"final_loss", trace.entries.back().loss_total},
                {"final_dsc", final_metrics.dsc},
                {"trace", o.output}}
                   .dump()
        << "\n";
    return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
    const auto spec = synth_spec_from_json(load_json_argument(o.spec));
    const auto sample = synth_generate(spec);
    const fs::path dir(o.output);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::IoFailure, "cannot create '" + dir.string() + "': " + ec.message());
    save_field(sample.image, dir / "image.pgm");
    save_mask(sample.truth, dir / "truth.pgm");
    save_mask(sample.noisy, dir / "noisy.pgm");
    out << json{{"kind", std::string(to_string(spec.kind))},
                {"achieved_fraction", sample.achieved_fraction},
                {"shape_parameter", sample.shape_parameter},
                {"directory", dir.string()}}
                   .dump()
        << "\n";
    return kExitOk;
}

int cmd_metrics(const Options& o, std::ostream& out) {
    const auto pred = load_mask(o.pred);
    const auto truth = load_mask(o.truth);
    const auto reports = evaluate_classes(pred, truth);
    const std::string id = o.image_id.empty() ? fs::path(o.pred).stem().string() : o.image_id;
    out << kMetricsCsvHeader << "\n";
    for (std::size_t c = 0; c < reports.size(); ++c) {
        out << to_csv_row({id, std::to_string(c + 1), reports[c]}) << "\n";
    }
    if (reports.size() > 1) {
        out << to_csv_row({id, "mean", macro_average(reports)}) << "\n";
    }
    return kExitOk;
}

int cmd_offset(const Options& o, std::ostream& out) {
    if (o.direction != "inward" && o.direction != "outward") {
        throw Error(ErrorKind::InvalidArgument, "direction must be inward or outward");
    }
    const auto poly = read_curve_csv(o.curve);
    const auto dir = o.direction == "inward" ? OffsetDirection::Inward : OffsetDirection::Outward;
    const auto result = offset_polyline(poly, o.offset_width, dir);
    auto doc = to_json(result);
    const auto kappa = curvature(poly);
    double max_kappa = 0.0;
    for (double k : kappa) max_kappa = std::max(max_kappa, std::abs(k));
    doc["max_abs_curvature"] = max_kappa;
    doc["input_perimeter"] = poly.perimeter();
    out << doc.dump() << "\n";
    return kExitOk;
}

int cmd_experiment(const Options& o, std::ostream& out) {
    const auto spec = experiment_spec_from_json(load_json_argument(o.spec));
    const auto report = run_experiment(spec, o.workers);
    write_text(report.to_csv(), o.output);
    out << report.summary_text();
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Offset-curve segmentation loss toolkit", "osc"};
    app.require_subcommand(1);
    Options o;

    auto* sdf = app.add_subcommand("sdf", "Signed distance field of a mask (16-bit PGM output)");
    sdf->add_option("mask", o.mask, "Mask image (PGM/PNG)")->required();
    sdf->add_option("-o,--output", o.output, "Output .pgm")->required();
    sdf->add_option("--class", o.selected_class, "Foreground class (default: every nonzero class)");

    auto* band = app.add_subcommand("band", "Offset band of a mask (0 outside, 1 outer, 2 inner)");
    band->add_option("mask", o.mask, "Mask image (PGM/PNG)")->required();
    band->add_option("-B,--half-width", o.band_width, "Band half width in pixels")->required();
    band->add_option("-o,--output", o.output, "Output mask image")->required();
    band->add_option("--class", o.selected_class, "Foreground class (default: every nonzero class)");

    auto* loss = app.add_subcommand("loss", "Evaluate a loss between a probability image and a mask");
    loss->add_option("pred", o.pred, "Foreground probability image (v / 255)")->required();
    loss->add_option("truth", o.truth, "Binary truth mask")->required();
    loss->add_option("--kind", o.kind, "bce | dice | focal | osc")->capture_default_str();
    loss->add_option("--config", o.config, "Loss config JSON file or inline object");

    auto* gc = app.add_subcommand("grad-check", "Finite-difference check of the OsC gradient (soft mode)");
    gc->add_option("--size", o.size, "Grid side length")->capture_default_str();
    gc->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    gc->add_option("--classes", o.classes, "Number of classes")->capture_default_str();
    gc->add_option("--step", o.h, "Finite-difference step h")->capture_default_str();
    gc->add_option("--config", o.config, "Loss config JSON file or inline object");

    auto* fit = app.add_subcommand("fit", "Fit free logits to a synthetic target");
    fit->add_option("--spec", o.spec, "JSON with 'dataset', 'fit', 'use_image'")->required();
    fit->add_option("-o,--output", o.output, "Trace CSV")->required();
    fit->add_option("--probs", o.probs_out, "Also write the final foreground probability image");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic image / truth / noisy-label triple");
    synth->add_option("--spec", o.spec, "Synth spec JSON file or inline object")->required();
    synth->add_option("-o,--output", o.output, "Output directory")->required();

    auto* metrics = app.add_subcommand("metrics", "Dice, Jaccard, precision, recall, Hausdorff95 as CSV");
    metrics->add_option("pred", o.pred, "Predicted mask")->required();
    metrics->add_option("truth", o.truth, "Truth mask")->required();
    metrics->add_option("--id", o.image_id, "Image id column (default: prediction file stem)");

    auto* offset = app.add_subcommand("offset", "Offset a closed polyline and check the curvature bound");
    offset->add_option("--curve", o.curve, "CSV of x,y vertices")->required();
    offset->add_option("-B,--translation", o.offset_width, "Offset distance")->required();
    offset->add_option("--direction", o.direction, "inward | outward")->capture_default_str();

    auto* exp = app.add_subcommand("experiment", "Compare losses over seeds under boundary label noise");
    exp->add_option("--spec", o.spec, "Experiment spec JSON file or inline object")->required();
    exp->add_option("-o,--output", o.output, "Report CSV")->required();
    exp->add_option("--workers", o.workers, "Worker threads (0 = all cores)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "osc: " << e.what() << "\n" << app.help();
        return kExitInput;
    }

    try {
        if (*sdf) return cmd_sdf(o, out);
        if (*band) return cmd_band(o, out);
        if (*loss) return cmd_loss(o, out);
        if (*gc) return cmd_grad_check(o, out, err);
        if (*fit) return cmd_fit(o, out);
        if (*synth) return cmd_synth(o, out);
        if (*metrics) return cmd_metrics(o, out);
        if (*offset) return cmd_offset(o, out);
        if (*exp) return cmd_experiment(o, out);
    } catch (const Error& e) {
        err << "osc: " << e.what() << "\n";
        return is_numerical(e.kind()) ? kExitNumerical : kExitInput;
    } catch (const std::exception& e) {
        err << "osc: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}

}  // namespace osc
