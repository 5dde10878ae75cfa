#include "osc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace osc {

namespace {

double clip(double p, double clamp) { return std::clamp(p, clamp, 1.0 - clamp); }

// Derivative of clip(): zero where the clamp is active.
bool inside_clamp(double p, double clamp) { return p >= clamp && p <= 1.0 - clamp; }

void require_binary_pair(std::span<const double> probs, const BinaryMask& truth) {
    if (probs.size() != truth.size()) {
        throw Error(ErrorKind::ShapeMismatch, "prediction has " + std::to_string(probs.size()) +
                                                  " pixels, target has " + std::to_string(truth.size()));
    }
}

void require_clamp(double clamp) {
    if (!(clamp > 0.0 && clamp < 0.5)) {
        throw Error(ErrorKind::InvalidArgument, "clamp must lie in (0, 0.5)");
    }
}

}  // namespace

std::string_view to_string(PhiMode mode) noexcept { return mode == PhiMode::Detached ? "detached" : "soft"; }

PhiMode phi_mode_from_string(std::string_view name) {
    if (name == "detached") return PhiMode::Detached;
    if (name == "soft") return PhiMode::Soft;
    throw Error(ErrorKind::InvalidArgument, "unknown phi_mode '" + std::string(name) + "'");
}

void LossConfig::validate() const {
    auto fail = [](const char* what) { throw Error(ErrorKind::InvalidArgument, what); };
    for (double v : {alpha, beta, eta, lambda1, lambda2, band_half_width, eps, tv_delta, focal_gamma, focal_alpha,
                     clamp}) {
        if (!std::isfinite(v)) fail("loss config values must be finite");
    }
    if (alpha < 0.0 || beta < 0.0 || eta < 0.0) fail("alpha, beta, eta must be non-negative");
    if (alpha + beta + eta <= 0.0) fail("alpha + beta + eta must be positive");
    if (lambda1 < 0.0 || lambda2 < 0.0) fail("lambda1, lambda2 must be non-negative");
    if (band_half_width <= 0.0) fail("band_half_width must be positive");
    if (eps <= 0.0) fail("eps must be positive");
    if (tv_delta <= 0.0) fail("tv_delta must be positive");
    if (focal_gamma < 0.0) fail("focal_gamma must be non-negative");
    if (!(clamp > 0.0 && clamp < 0.5)) fail("clamp must lie in (0, 0.5)");
}

double bce(std::span<const double> probs, const BinaryMask& truth, double clamp) {
    require_binary_pair(probs, truth);
    require_clamp(clamp);
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = clip(probs[i], clamp);
        sum += truth[i] ? std::log(p) : std::log(1.0 - p);
    }
    return -sum / static_cast<double>(probs.size());
}

double bce(const ScalarField& probs, const BinaryMask& truth, double clamp) {
    require_same_shape(probs.shape(), truth.shape(), "bce");
    return bce(probs.values(), truth, clamp);
}

std::vector<double> bce_grad(std::span<const double> probs, const BinaryMask& truth, double clamp) {
    require_binary_pair(probs, truth);
    const double inv_n = 1.0 / static_cast<double>(probs.size());
    std::vector<double> grad(probs.size(), 0.0);
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = probs[i];
        if (!inside_clamp(p, clamp)) continue;
        grad[i] = truth[i] ? -inv_n / p : inv_n / (1.0 - p);
    }
    return grad;
}

double dice_loss(std::span<const double> probs, const BinaryMask& truth, double smooth) {
    require_binary_pair(probs, truth);
    if (smooth < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "dice smooth must be non-negative");
    }
    double overlap = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double t = truth[i] ? 1.0 : 0.0;
        overlap += t * probs[i];
        total += t + probs[i];
    }
    const double denom = total + smooth;
    if (denom == 0.0) {
        // Both empty and no smoothing: perfect agreement.
        return 0.0;
    }
    return 1.0 - (2.0 * overlap + smooth) / denom;
}

double dice_loss(const ScalarField& probs, const BinaryMask& truth, double smooth) {
    require_same_shape(probs.shape(), truth.shape(), "dice_loss");
    return dice_loss(probs.values(), truth, smooth);
}

std::vector<double> dice_grad(std::span<const double> probs, const BinaryMask& truth, double smooth) {
    require_binary_pair(probs, truth);
    double overlap = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double t = truth[i] ? 1.0 : 0.0;
        overlap += t * probs[i];
        total += t + probs[i];
    }
    std::vector<double> grad(probs.size(), 0.0);
    const double denom = total + smooth;
    if (denom == 0.0) return grad;
    const double num = 2.0 * overlap + smooth;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double t = truth[i] ? 1.0 : 0.0;
        grad[i] = -(2.0 * t * denom - num) / (denom * denom);
    }
    return grad;
}

double focal_loss(std::span<const double> probs, const BinaryMask& truth, double gamma, double alpha, double clamp) {
    require_binary_pair(probs, truth);
    require_clamp(clamp);
    if (gamma < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "focal gamma must be non-negative");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = clip(probs[i], clamp);
        sum += truth[i] ? std::pow(1.0 - p, gamma) * std::log(p) : std::pow(p, gamma) * std::log(1.0 - p);
    }
    return -alpha * sum / static_cast<double>(probs.size());
}

double focal_loss(const ScalarField& probs, const BinaryMask& truth, double gamma, double alpha, double clamp) {
    require_same_shape(probs.shape(), truth.shape(), "focal_loss");
    return focal_loss(probs.values(), truth, gamma, alpha, clamp);
}

std::vector<double> focal_grad(std::span<const double> probs, const BinaryMask& truth, double gamma, double alpha,
                               double clamp) {
    require_binary_pair(probs, truth);
    const double scale = -alpha / static_cast<double>(probs.size());
    std::vector<double> grad(probs.size(), 0.0);
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = probs[i];
        if (!inside_clamp(p, clamp)) continue;
        double d = 0.0;
        if (truth[i]) {
            const double q = 1.0 - p;
            const double lower = gamma == 0.0 ? 0.0 : gamma * std::pow(q, gamma - 1.0) * std::log(p);
            d = -lower + std::pow(q, gamma) / p;
        } else {
            const double lower = gamma == 0.0 ? 0.0 : gamma * std::pow(p, gamma - 1.0) * std::log(1.0 - p);
            d = lower - std::pow(p, gamma) / (1.0 - p);
        }
        grad[i] = scale * d;
    }
    return grad;
}

namespace {

double cross_entropy(const ProbMap& probs, const ProbMap& truth, double clamp) {
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.pixels(); ++i) {
        for (std::size_t c = 0; c < probs.num_classes(); ++c) {
            const double t = truth(i, c);
            if (t != 0.0) {
                sum += t * std::log(clip(probs(i, c), clamp));
            }
        }
    }
    return -sum / static_cast<double>(probs.pixels());
}

}  // namespace

double ce_multiclass(const ProbMap& probs, const ProbMap& truth, double clamp) {
    require_same_shape(probs.shape(), truth.shape(), "ce_multiclass");
    require_clamp(clamp);
    if (probs.num_classes() != truth.num_classes()) {
        throw Error(ErrorKind::ShapeMismatch, "class counts differ");
    }
    if (!probs.check_normalized()) {
        throw Error(ErrorKind::NotNormalized, "prediction probabilities do not sum to one per pixel");
    }
    for (std::size_t i = 0; i < truth.pixels(); ++i) {
        std::size_t ones = 0;
        for (std::size_t c = 0; c < truth.num_classes(); ++c) {
            const double t = truth(i, c);
            if (t == 1.0) {
                ++ones;
            } else if (t != 0.0) {
                ones = 2;
            }
        }
        if (ones != 1) {
            throw Error(ErrorKind::NotNormalized, "target is not one-hot at pixel " + std::to_string(i));
        }
    }
    return cross_entropy(probs, truth, clamp);
}

BandDescriptors band_descriptors(std::span<const double> target, std::span<const double> phi, const BandMask& band,
                                 double eps) {
    if (target.size() != phi.size() || phi.size() != band.combined.size()) {
        throw Error(ErrorKind::ShapeMismatch, "band descriptors: target, phi and band differ in size");
    }
    double weighted_in = 0.0;
    double weight_in = 0.0;
    double weighted_out = 0.0;
    double weight_out = 0.0;
    double global = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        global += target[i];
        if (!band.combined[i]) continue;
        const double h = heaviside(phi[i], eps);
        weighted_in += target[i] * h;
        weight_in += h;
        weighted_out += target[i] * (1.0 - h);
        weight_out += 1.0 - h;
    }
    global /= static_cast<double>(target.size());

    BandDescriptors d;
    d.minus_fallback = band.inner.count() == 0 || weight_in <= 0.0;
    d.plus_fallback = band.outer.count() == 0 || weight_out <= 0.0;
    d.b_minus = d.minus_fallback ? global : weighted_in / weight_in;
    d.b_plus = d.plus_fallback ? global : weighted_out / weight_out;
    return d;
}

BandDescriptors band_descriptors(const ScalarField& target, const SignedDistanceField& sdf, const BandMask& band,
                                 double eps) {
    require_same_shape(target.shape(), sdf.phi.shape(), "band_descriptors");
    return band_descriptors(target.values(), sdf.phi.values(), band, eps);
}

namespace {

// Band term with separate fields for the residual weights (`weight_phi`) and
// the descriptors (`frozen_phi`). When `weight_slope` is non-null, H is
// differentiated through weight_phi with d(weight_phi)/dP = *weight_slope.
BandTerm band_term(std::span<const double> probs, std::span<const double> target, std::span<const double> weight_phi,
                   std::span<const double> frozen_phi, const BandMask& band, const LossConfig& cfg,
                   std::span<double> grad, double grad_scale, const double* weight_slope) {
    BandTerm term;
    term.band_pixels = band.combined.count();
    term.descriptors = band_descriptors(target, frozen_phi, band, cfg.eps);
    if (term.band_pixels == 0) {
        term.empty_band = true;
        return term;
    }
    const double bm = term.descriptors.b_minus;
    const double bp = term.descriptors.b_plus;
    const double inv_band = 1.0 / static_cast<double>(term.band_pixels);
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!band.combined[i]) continue;
        const double h = heaviside(weight_phi[i], cfg.eps);
        const double rin = probs[i] - bm;
        const double rout = probs[i] - bp;
        sum += cfg.lambda1 * rin * rin * h + cfg.lambda2 * rout * rout * (1.0 - h);
        if (!grad.empty()) {
            double d = 2.0 * cfg.lambda1 * rin * h + 2.0 * cfg.lambda2 * rout * (1.0 - h);
            if (weight_slope != nullptr) {
                const double dh = dirac(weight_phi[i], cfg.eps) * (*weight_slope);
                d += (cfg.lambda1 * rin * rin - cfg.lambda2 * rout * rout) * dh;
            }
            grad[i] += grad_scale * d * inv_band;
        }
    }
    term.value = sum * inv_band;
    return term;
}

std::vector<double> as_indicator(const BinaryMask& mask) {
    std::vector<double> v(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) v[i] = mask[i] ? 1.0 : 0.0;
    return v;
}

}  // namespace

BandTerm osc_l2(const ScalarField& probs, const ScalarField& target, const SignedDistanceField& sdf,
                const BandMask& band, const LossConfig& cfg) {
    require_same_shape(probs.shape(), target.shape(), "osc_l2");
    require_same_shape(probs.shape(), sdf.phi.shape(), "osc_l2");
    require_same_shape(probs.shape(), band.combined.shape(), "osc_l2");
    return band_term(probs.values(), target.values(), sdf.phi.values(), sdf.phi.values(), band, cfg, {}, 0.0,
                     nullptr);
}

double osc_l3(std::span<const double> phi, const Shape& shape, double tv_delta) {
    if (!(tv_delta > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "tv_delta must be positive");
    }
    const std::size_t w = shape.width;
    const std::size_t h = shape.height;
    double sum = 0.0;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t i = shape.index(x, y);
            const double dx = x + 1 < w ? phi[i + 1] - phi[i] : 0.0;
            const double dy = y + 1 < h ? phi[i + w] - phi[i] : 0.0;
            sum += std::sqrt(dx * dx + dy * dy + tv_delta * tv_delta) - tv_delta;
        }
    }
    return sum / static_cast<double>(shape.size());
}

double osc_l3(const ScalarField& phi, double tv_delta) { return osc_l3(phi.values(), phi.shape(), tv_delta); }

std::vector<double> osc_l3_grad(std::span<const double> phi, const Shape& shape, double tv_delta) {
    const std::size_t w = shape.width;
    const std::size_t h = shape.height;
    const double inv_n = 1.0 / static_cast<double>(shape.size());
    std::vector<double> grad(shape.size(), 0.0);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t i = shape.index(x, y);
            const double dx = x + 1 < w ? phi[i + 1] - phi[i] : 0.0;
            const double dy = y + 1 < h ? phi[i + w] - phi[i] : 0.0;
            const double s = std::sqrt(dx * dx + dy * dy + tv_delta * tv_delta);
            if (x + 1 < w) {
                grad[i + 1] += inv_n * dx / s;
                grad[i] -= inv_n * dx / s;
            }
            if (y + 1 < h) {
                grad[i + w] += inv_n * dy / s;
                grad[i] -= inv_n * dy / s;
            }
        }
    }
    return grad;
}

namespace detail {

LossBreakdown osc_evaluate(const ProbMap& probs, const LabelMask& truth, const LossConfig& cfg, bool with_gradient) {
    cfg.validate();
    require_same_shape(probs.shape(), truth.shape(), "osc_loss");
    if (probs.num_classes() != truth.num_classes()) {
        throw Error(ErrorKind::ShapeMismatch, "prediction has " + std::to_string(probs.num_classes()) +
                                                  " classes, target has " + std::to_string(truth.num_classes()));
    }
    finite_check(probs.data(), probs.shape());

    const Shape shape = probs.shape();
    const std::size_t n = shape.size();
    const std::size_t k = probs.num_classes();
    const std::size_t foreground_classes = k - 1;

    std::vector<std::vector<double>> grad;
    if (with_gradient) {
        grad.assign(k, std::vector<double>(n, 0.0));
    }

    LossBreakdown out;
    out.l1 = cross_entropy(probs, one_hot(truth), cfg.clamp);
    if (with_gradient) {
        const double scale = -cfg.alpha / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = truth[i];
            const double p = probs(i, c);
            if (inside_clamp(p, cfg.clamp)) {
                grad[c][i] += scale / p;
            }
        }
    }

    const double band_scale = cfg.beta / static_cast<double>(foreground_classes);
    const double length_scale = cfg.eta / static_cast<double>(foreground_classes);
    const double soft_slope = 2.0;

    double l2_sum = 0.0;
    double l3_sum = 0.0;
    for (std::size_t c = 1; c < k; ++c) {
        ClassTerms terms;
        terms.class_index = c;
        const auto plane = probs.plane(c);
        const auto predicted = threshold(plane, shape, 0.5);
        const std::size_t fg = predicted.count();
        if (fg == 0 || fg == n) {
            terms.degenerate = true;
            out.classes.push_back(terms);
            continue;
        }

        const auto sdf = signed_distance(predicted);
        const auto band = band_mask(sdf, cfg.band_half_width);
        const auto target = as_indicator(truth.class_mask(c));
        std::span<double> class_grad = with_gradient ? std::span<double>(grad[c]) : std::span<double>();

        if (cfg.phi_mode == PhiMode::Detached) {
            const auto term = band_term(plane, target, sdf.phi.values(), sdf.phi.values(), band, cfg, class_grad,
                                        band_scale, nullptr);
            terms.l2 = term.value;
            terms.descriptors = term.descriptors;
            terms.band_pixels = term.band_pixels;
            terms.empty_band = term.empty_band;
            terms.l3 = osc_l3(sdf.phi, cfg.tv_delta);
        } else {
            std::vector<double> soft(n);
            for (std::size_t i = 0; i < n; ++i) soft[i] = soft_slope * plane[i] - 1.0;
            const auto term =
                band_term(plane, target, soft, sdf.phi.values(), band, cfg, class_grad, band_scale, &soft_slope);
            terms.l2 = term.value;
            terms.descriptors = term.descriptors;
            terms.band_pixels = term.band_pixels;
            terms.empty_band = term.empty_band;
            terms.l3 = osc_l3(soft, shape, cfg.tv_delta);
            if (with_gradient) {
                const auto g = osc_l3_grad(soft, shape, cfg.tv_delta);
                for (std::size_t i = 0; i < n; ++i) {
                    class_grad[i] += length_scale * soft_slope * g[i];
                }
            }
        }
        l2_sum += terms.l2;
        l3_sum += terms.l3;
        out.band_pixels += terms.band_pixels;
        out.classes.push_back(terms);
    }
    out.l2 = l2_sum / static_cast<double>(foreground_classes);
    out.l3 = l3_sum / static_cast<double>(foreground_classes);
    out.total = cfg.alpha * out.l1 + cfg.beta * out.l2 + cfg.eta * out.l3;

    if (with_gradient) {
        out.gradient.reserve(k);
        for (auto& g : grad) {
            out.gradient.emplace_back(shape.width, shape.height, std::move(g));
        }
    }
    return out;
}

}  // namespace detail

LossBreakdown osc_loss(const ProbMap& probs, const LabelMask& truth, const LossConfig& cfg) {
    if (!probs.check_normalized()) {
        throw Error(ErrorKind::NotNormalized, "prediction probabilities do not sum to one per pixel");
    }
    return detail::osc_evaluate(probs, truth, cfg, true);
}

std::vector<ScalarField> osc_grad(const ProbMap& probs, const LabelMask& truth, const LossConfig& cfg) {
    return osc_loss(probs, truth, cfg).gradient;
}

std::string_view to_string(LossKind kind) noexcept {
    switch (kind) {
        case LossKind::Bce: return "bce";
        case LossKind::Dice: return "dice";
        case LossKind::Focal: return "focal";
        case LossKind::Osc: return "osc";
    }
    return "unknown";
}

LossKind loss_kind_from_string(std::string_view name) {
    if (name == "bce") return LossKind::Bce;
    if (name == "dice") return LossKind::Dice;
    if (name == "focal") return LossKind::Focal;
    if (name == "osc") return LossKind::Osc;
    throw Error(ErrorKind::InvalidArgument, "unknown loss kind '" + std::string(name) + "'");
}

LossEvaluation evaluate_loss(LossKind kind, const ProbMap& probs, const LabelMask& truth, const LossConfig& cfg) {
    LossEvaluation eval;
    eval.kind = kind;
    if (kind == LossKind::Osc) {
        auto breakdown = osc_loss(probs, truth, cfg);
        eval.total = breakdown.total;
        eval.gradient = std::move(breakdown.gradient);
        breakdown.gradient.clear();
        eval.breakdown = std::move(breakdown);
        return eval;
    }

    cfg.validate();
    require_same_shape(probs.shape(), truth.shape(), "evaluate_loss");
    if (probs.num_classes() != truth.num_classes()) {
        throw Error(ErrorKind::ShapeMismatch, "class counts differ");
    }
    finite_check(probs.data(), probs.shape());
    const Shape shape = probs.shape();
    const std::size_t k = probs.num_classes();
    const double inv_fg = 1.0 / static_cast<double>(k - 1);

    eval.gradient.emplace_back(shape.width, shape.height, 0.0);
    for (std::size_t c = 1; c < k; ++c) {
        const auto plane = probs.plane(c);
        const auto target = truth.class_mask(c);
        double value = 0.0;
        std::vector<double> g;
        switch (kind) {
            case LossKind::Bce:
                value = bce(plane, target, cfg.clamp);
                g = bce_grad(plane, target, cfg.clamp);
                break;
            case LossKind::Dice:
                value = dice_loss(plane, target, kDiceSmooth);
                g = dice_grad(plane, target, kDiceSmooth);
                break;
            case LossKind::Focal:
                value = focal_loss(plane, target, cfg.focal_gamma, cfg.focal_alpha, cfg.clamp);
                g = focal_grad(plane, target, cfg.focal_gamma, cfg.focal_alpha, cfg.clamp);
                break;
            case LossKind::Osc:
                break;
        }
        eval.total += inv_fg * value;
        for (auto& v : g) v *= inv_fg;
        eval.gradient.emplace_back(shape.width, shape.height, std::move(g));
    }
    return eval;
}

}  // namespace osc
