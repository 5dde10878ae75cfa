#include "osc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "osc/format.hpp"
#include "osc/geometry.hpp"

namespace osc {

std::string MetricFlags::to_string() const {
    std::string out;
    auto add = [&out](bool set, const char* name) {
        if (!set) return;
        if (!out.empty()) out += ';';
        out += name;
    };
    add(dsc_empty, "dsc_empty");
    add(pre_empty, "pre_empty");
    add(rec_empty, "rec_empty");
    add(hau95_undefined, "hau95_undefined");
    return out;
}

MetricFlags MetricFlags::parse(const std::string& text) {
    MetricFlags flags;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (item.empty()) continue;
        if (item == "dsc_empty") flags.dsc_empty = true;
        else if (item == "pre_empty") flags.pre_empty = true;
        else if (item == "rec_empty") flags.rec_empty = true;
        else if (item == "hau95_undefined") flags.hau95_undefined = true;
        else throw Error(ErrorKind::InvalidArgument, "unknown metric flag '" + item + "'");
    }
    return flags;
}

ConfusionCounts confusion_counts(const BinaryMask& pred, const BinaryMask& truth) {
    require_same_shape(pred.shape(), truth.shape(), "confusion_counts");
    ConfusionCounts counts;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i];
        const bool t = truth[i];
        if (p && t) ++counts.tp;
        else if (p) ++counts.fp;
        else if (t) ++counts.fn;
        else ++counts.tn;
    }
    return counts;
}

MetricsReport confusion_metrics(const BinaryMask& pred, const BinaryMask& truth) {
    const auto c = confusion_counts(pred, truth);
    const auto tp = static_cast<double>(c.tp);
    const auto fp = static_cast<double>(c.fp);
    const auto fn = static_cast<double>(c.fn);

    MetricsReport r;
    if (c.tp + c.fp + c.fn == 0) {
        r.dsc = 1.0;
        r.jac = 1.0;
        r.flags.dsc_empty = true;
    } else {
        r.dsc = 2.0 * tp / (2.0 * tp + fp + fn);
        r.jac = tp / (tp + fp + fn);
    }
    if (c.tp + c.fp == 0) {
        r.pre = c.fn == 0 ? 1.0 : 0.0;
        r.flags.pre_empty = true;
    } else {
        r.pre = tp / (tp + fp);
    }
    if (c.tp + c.fn == 0) {
        r.rec = 1.0;
        r.flags.rec_empty = true;
    } else {
        r.rec = tp / (tp + fn);
    }
    return r;
}

BinaryMask boundary(const BinaryMask& mask) {
    const std::size_t w = mask.width();
    const std::size_t h = mask.height();
    BinaryMask out(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            if (!mask(x, y)) continue;
            const bool edge = x == 0 || y == 0 || x + 1 == w || y + 1 == h || !mask(x - 1, y) ||
                              !mask(x + 1, y) || !mask(x, y - 1) || !mask(x, y + 1);
            out.set(x, y, edge);
        }
    }
    return out;
}

double hausdorff95(const BinaryMask& a, const BinaryMask& b) {
    require_same_shape(a.shape(), b.shape(), "hausdorff95");
    if (a.count() == 0 || b.count() == 0) {
        throw Error(ErrorKind::UndefinedMetric, "hausdorff95 needs two non-empty masks");
    }
    const auto edge_a = boundary(a);
    const auto edge_b = boundary(b);
    const auto to_a = squared_edt(edge_a);
    const auto to_b = squared_edt(edge_b);

    std::vector<double> pooled;
    pooled.reserve(edge_a.count() + edge_b.count());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (edge_a[i]) pooled.push_back(to_b[i]);
        if (edge_b[i]) pooled.push_back(to_a[i]);
    }
    // Nearest rank: smallest value with at least 95% of the samples at or below it.
    const std::size_t n = pooled.size();
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
    const std::size_t idx = std::max<std::size_t>(rank, 1) - 1;
    std::nth_element(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(idx), pooled.end());
    return std::sqrt(pooled[idx]);
}

MetricsReport evaluate(const BinaryMask& pred, const BinaryMask& truth) {
    auto r = confusion_metrics(pred, truth);
    if (pred.count() == 0 || truth.count() == 0) {
        r.hau95 = std::numeric_limits<double>::quiet_NaN();
        r.flags.hau95_undefined = true;
    } else {
        r.hau95 = hausdorff95(pred, truth);
    }
    return r;
}

std::vector<MetricsReport> evaluate_classes(const LabelMask& pred, const LabelMask& truth) {
    require_same_shape(pred.shape(), truth.shape(), "evaluate_classes");
    const std::size_t k = std::max(pred.num_classes(), truth.num_classes());
    std::vector<MetricsReport> out;
    for (std::size_t c = 1; c < k; ++c) {
        out.push_back(evaluate(pred.class_mask(c), truth.class_mask(c)));
    }
    return out;
}

MetricsReport macro_average(const std::vector<MetricsReport>& reports) {
    MetricsReport avg;
    if (reports.empty()) {
        avg.hau95 = std::numeric_limits<double>::quiet_NaN();
        avg.flags.hau95_undefined = true;
        return avg;
    }
    double hau = 0.0;
    std::size_t hau_count = 0;
    for (const auto& r : reports) {
        avg.dsc += r.dsc;
        avg.jac += r.jac;
        avg.pre += r.pre;
        avg.rec += r.rec;
        if (!r.flags.hau95_undefined) {
            hau += r.hau95;
            ++hau_count;
        }
        avg.flags.dsc_empty |= r.flags.dsc_empty;
        avg.flags.pre_empty |= r.flags.pre_empty;
        avg.flags.rec_empty |= r.flags.rec_empty;
        avg.flags.hau95_undefined |= r.flags.hau95_undefined;
    }
    const auto n = static_cast<double>(reports.size());
    avg.dsc /= n;
    avg.jac /= n;
    avg.pre /= n;
    avg.rec /= n;
    avg.hau95 = hau_count ? hau / static_cast<double>(hau_count) : std::numeric_limits<double>::quiet_NaN();
    return avg;
}

std::string to_csv_row(const MetricsRow& row) {
    const auto& r = row.report;
    return row.image_id + "," + row.class_label + "," + format_real(r.dsc) + "," + format_real(r.jac) + "," +
           format_real(r.pre) + "," + format_real(r.rec) + "," + format_real(r.hau95) + "," + r.flags.to_string();
}

MetricsRow parse_metrics_row(const std::string& line) {
    const auto cells = split_csv(line);
    if (cells.size() != 8) {
        throw Error(ErrorKind::InvalidArgument, "metrics row needs 8 fields, got " + std::to_string(cells.size()));
    }
    MetricsRow row;
    row.image_id = cells[0];
    row.class_label = cells[1];
    row.report.dsc = parse_real(cells[2]);
    row.report.jac = parse_real(cells[3]);
    row.report.pre = parse_real(cells[4]);
    row.report.rec = parse_real(cells[5]);
    row.report.hau95 = parse_real(cells[6]);
    row.report.flags = MetricFlags::parse(cells[7]);
    return row;
}

}  // namespace osc
