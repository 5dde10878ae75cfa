#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "osc/grid.hpp"

namespace osc {

/// Flags recording which metric values come from an empty-denominator convention.
struct MetricFlags {
    bool dsc_empty = false;    // both masks empty, dsc = jac = 1
    bool pre_empty = false;    // no predicted foreground
    bool rec_empty = false;    // no true foreground, rec = 1
    bool hau95_undefined = false;

    [[nodiscard]] bool any() const { return dsc_empty || pre_empty || rec_empty || hau95_undefined; }
    /// Semicolon-separated flag names, empty when none is set.
    [[nodiscard]] std::string to_string() const;
    static MetricFlags parse(const std::string& text);
    friend bool operator==(const MetricFlags&, const MetricFlags&) = default;
};

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
};

struct MetricsReport {
    double dsc = 0.0;
    double jac = 0.0;
    double pre = 0.0;
    double rec = 0.0;
    /// NaN when undefined (flags.hau95_undefined).
    double hau95 = 0.0;
    MetricFlags flags;
};

[[nodiscard]] ConfusionCounts confusion_counts(const BinaryMask& pred, const BinaryMask& truth);

/// Dice, Jaccard, precision and recall. Empty denominators:
///   both masks empty          -> dsc = jac = 1
///   no predicted foreground   -> pre = 1 if truth is empty, else 0
///   no true foreground        -> rec = 1
/// Each case sets its flag. hau95 is left at 0 and unflagged.
[[nodiscard]] MetricsReport confusion_metrics(const BinaryMask& pred, const BinaryMask& truth);

/// Foreground pixels with at least one 4-neighbor outside the mask; the image
/// border counts as background.
[[nodiscard]] BinaryMask boundary(const BinaryMask& mask);

/// 95th percentile (nearest rank) of the pooled boundary-to-boundary distances
/// in both directions. Throws UndefinedMetric if either mask is empty.
[[nodiscard]] double hausdorff95(const BinaryMask& a, const BinaryMask& b);

/// Confusion metrics plus hau95 (NaN and flagged when undefined).
[[nodiscard]] MetricsReport evaluate(const BinaryMask& pred, const BinaryMask& truth);

/// Per foreground class one-vs-rest, in ascending class order.
[[nodiscard]] std::vector<MetricsReport> evaluate_classes(const LabelMask& pred, const LabelMask& truth);

/// Arithmetic mean over the reports in order; hau95 averaged over the defined
/// values only (NaN if none). Flags are OR-ed.
[[nodiscard]] MetricsReport macro_average(const std::vector<MetricsReport>& reports);

struct MetricsRow {
    std::string image_id;
    std::string class_label;
    MetricsReport report;
};

inline constexpr const char* kMetricsCsvHeader = "image_id,class,dsc,jac,pre,rec,hau95,flags";

[[nodiscard]] std::string to_csv_row(const MetricsRow& row);
/// Throws InvalidArgument on a malformed row.
[[nodiscard]] MetricsRow parse_metrics_row(const std::string& line);

}  // namespace osc
