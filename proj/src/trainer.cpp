#include "osc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "osc/format.hpp"

namespace osc {

GradCheckResult grad_check(const ProbMap& probs, const LabelMask& truth, const LossConfig& cfg, double h) {
    if (!(h >= 1e-7 && h <= 1e-3)) {
        throw Error(ErrorKind::InvalidArgument, "finite-difference step must lie in [1e-7, 1e-3]");
    }
    const auto analytic = detail::osc_evaluate(probs, truth, cfg, true).gradient;

    const std::size_t n = probs.pixels();
    const std::size_t k = probs.num_classes();
    const std::size_t total = n * k;
    const std::size_t wanted = std::min(total, kGradCheckMaxEntries);
    const std::size_t stride = std::max<std::size_t>(1, total / wanted);

    GradCheckResult result;
    ProbMap perturbed = probs;
    for (std::size_t entry = 0; entry < total && result.entries_checked < wanted; entry += stride) {
        const std::size_t c = entry % k;
        const std::size_t pixel = entry / k;
        const double p = probs(pixel, c);
        const bool crosses_threshold = c > 0 && std::abs(p - 0.5) <= 2.0 * h;
        const bool crosses_clamp = std::abs(p - cfg.clamp) <= 2.0 * h || std::abs(p - (1.0 - cfg.clamp)) <= 2.0 * h;
        if (crosses_threshold || crosses_clamp) {
            ++result.entries_skipped;
            continue;
        }
        perturbed(pixel, c) = p + h;
        const double up = detail::osc_evaluate(perturbed, truth, cfg, false).total;
        perturbed(pixel, c) = p - h;
        const double down = detail::osc_evaluate(perturbed, truth, cfg, false).total;
        perturbed(pixel, c) = p;

        const double numeric = (up - down) / (2.0 * h);
        const double exact = analytic[c][pixel];
        const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
        const double rel = std::abs(exact - numeric) / denom;
        ++result.entries_checked;
        if (result.entries_checked == 1 || rel > result.max_rel_error) {
            result.max_rel_error = rel;
            result.worst_pixel = pixel;
            result.worst_class = c;
            result.worst_analytic = exact;
            result.worst_numeric = numeric;
        }
    }
    return result;
}

ProbMap random_prob_map(std::size_t width, std::size_t height, std::size_t num_classes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> logits(num_classes, std::vector<double>(width * height));
    for (auto& plane : logits) {
        for (auto& z : plane) z = normal(rng);
    }
    return softmax(logits, Shape{width, height});
}

LabelMask disc_target(std::size_t width, std::size_t height, std::size_t num_classes) {
    LabelMask mask(width, height, num_classes);
    const double cx = (static_cast<double>(width) - 1.0) / 2.0;
    const double cy = (static_cast<double>(height) - 1.0) / 2.0;
    const double base = static_cast<double>(std::min(width, height)) / 4.0;
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            const double r = std::hypot(static_cast<double>(x) - cx, static_cast<double>(y) - cy);
            std::size_t label = 0;
            for (std::size_t c = 1; c < num_classes; ++c) {
                const double radius = base * static_cast<double>(num_classes - c) / static_cast<double>(num_classes - 1);
                if (r <= radius) label = c;
            }
            mask.set(mask.shape().index(x, y), label);
        }
    }
    return mask;
}

std::string_view to_string(InitKind kind) noexcept {
    return kind == InitKind::Zero ? "logits-zero" : "logits-gaussian";
}

InitKind init_kind_from_string(std::string_view name) {
    if (name == "logits-zero") return InitKind::Zero;
    if (name == "logits-gaussian") return InitKind::Gaussian;
    throw Error(ErrorKind::InvalidArgument, "unknown init '" + std::string(name) + "'");
}

void FitConfig::validate() const {
    if (steps < 1) throw Error(ErrorKind::InvalidArgument, "steps must be at least 1");
    if (record_every < 1) throw Error(ErrorKind::InvalidArgument, "record_every must be at least 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw Error(ErrorKind::InvalidArgument, "learning_rate must be a finite non-negative number");
    }
    if (!(init_sigma >= 0.0) || !std::isfinite(init_sigma)) {
        throw Error(ErrorKind::InvalidArgument, "init_sigma must be non-negative");
    }
    if (!std::isfinite(image_gain)) throw Error(ErrorKind::InvalidArgument, "image_gain must be finite");
    loss_config.validate();
}

ProbMap softmax(const std::vector<std::vector<double>>& logits, const Shape& shape) {
    const std::size_t k = logits.size();
    ProbMap probs(shape.width, shape.height, k);
    const std::size_t n = shape.size();
    for (std::size_t i = 0; i < n; ++i) {
        double top = logits[0][i];
        for (std::size_t c = 1; c < k; ++c) top = std::max(top, logits[c][i]);
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            const double e = std::exp(logits[c][i] - top);
            probs(i, c) = e;
            sum += e;
        }
        for (std::size_t c = 0; c < k; ++c) probs(i, c) /= sum;
    }
    probs.set_normalized(true);
    return probs;
}

namespace {

double macro_dice(const ProbMap& probs, const LabelMask& truth) {
    const auto pred = argmax(probs);
    double sum = 0.0;
    for (std::size_t c = 1; c < truth.num_classes(); ++c) {
        sum += confusion_metrics(pred.class_mask(c), truth.class_mask(c)).dsc;
    }
    return sum / static_cast<double>(truth.num_classes() - 1);
}

[[noreturn]] void diverged(std::size_t step, const std::string& what) {
    Error err(ErrorKind::DivergenceDetected, what + " at step " + std::to_string(step));
    err.step = step;
    throw err;
}

LossEvaluation evaluate_at(const FitConfig& cfg, const ProbMap& probs, const LabelMask& truth, std::size_t step) {
    try {
        auto eval = evaluate_loss(cfg.loss_kind, probs, truth, cfg.loss_config);
        if (!std::isfinite(eval.total)) diverged(step, "non-finite loss");
        return eval;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::NonFiniteValue) diverged(step, e.what());
        throw;
    }
}

}  // namespace

FitTrace fit_logits(const ScalarField* image, const LabelMask& truth, const FitConfig& cfg) {
    cfg.validate();
    const Shape shape = truth.shape();
    const std::size_t n = shape.size();
    const std::size_t k = truth.num_classes();
    for (std::size_t c = 1; c < k; ++c) {
        if (truth.class_mask(c).count() == 0) {
            throw Error(ErrorKind::InvalidArgument, "target has no pixel of class " + std::to_string(c));
        }
    }
    if (image != nullptr) require_same_shape(image->shape(), shape, "fit_logits image");

    std::vector<std::vector<double>> logits(k, std::vector<double>(n, 0.0));
    if (cfg.init == InitKind::Gaussian) {
        std::mt19937_64 rng(cfg.seed);
        std::normal_distribution<double> normal(0.0, cfg.init_sigma);
        for (auto& plane : logits) {
            for (auto& z : plane) z = normal(rng);
        }
    }
    if (image != nullptr) {
        for (std::size_t c = 1; c < k; ++c) {
            for (std::size_t i = 0; i < n; ++i) logits[c][i] += cfg.image_gain * ((*image)[i] - 0.5);
        }
    }

    FitTrace trace;
    ProbMap probs = softmax(logits, shape);
    LossEvaluation eval = evaluate_at(cfg, probs, truth, 0);
    trace.initial_loss = eval.total;

    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        // Chain rule through the softmax: dL/dz_c = P_c (g_c - sum_j P_j g_j).
        for (std::size_t i = 0; i < n; ++i) {
            double mean = 0.0;
            for (std::size_t c = 0; c < k; ++c) mean += probs(i, c) * eval.gradient[c][i];
            for (std::size_t c = 0; c < k; ++c) {
                logits[c][i] -= cfg.learning_rate * probs(i, c) * (eval.gradient[c][i] - mean);
                if (!std::isfinite(logits[c][i])) diverged(step, "non-finite logit");
            }
        }
        probs = softmax(logits, shape);
        eval = evaluate_at(cfg, probs, truth, step);

        if (step % cfg.record_every == 0 || step == cfg.steps) {
            TraceEntry entry;
            entry.step = step;
            entry.loss_total = eval.total;
            if (eval.breakdown) {
                entry.l1 = eval.breakdown->l1;
                entry.l2 = eval.breakdown->l2;
                entry.l3 = eval.breakdown->l3;
            }
            entry.dsc = macro_dice(probs, truth);
            trace.entries.push_back(entry);
        }
    }
    trace.final_probs = std::move(probs);
    return trace;
}

std::string trace_to_csv(const FitTrace& trace) {
    std::string out = std::string(kTraceCsvHeader) + "\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
    for (const auto& e : trace.entries) {
        out += std::to_string(e.step) + "," + format_real(e.loss_total) + "," + opt(e.l1) + "," + opt(e.l2) + "," +
               opt(e.l3) + "," + format_real(e.dsc) + "\n";
    }
    return out;
}

std::vector<TraceEntry> parse_trace_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || split_csv(line) != split_csv(kTraceCsvHeader)) {
        throw Error(ErrorKind::InvalidArgument, "trace CSV header mismatch");
    }
    std::vector<TraceEntry> entries;
    auto opt = [](const std::string& cell) -> std::optional<double> {
        if (cell.empty()) return std::nullopt;
        return parse_real(cell);
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 6) throw Error(ErrorKind::InvalidArgument, "trace row needs 6 fields");
        TraceEntry e;
        e.step = static_cast<std::size_t>(parse_real(cells[0]));
        e.loss_total = parse_real(cells[1]);
        e.l1 = opt(cells[2]);
        e.l2 = opt(cells[3]);
        e.l3 = opt(cells[4]);
        e.dsc = parse_real(cells[5]);
        entries.push_back(e);
    }
    return entries;
}

}  // namespace osc
