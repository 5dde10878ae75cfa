#pragma once

#include <cstddef>
#include <vector>

#include "osc/grid.hpp"

namespace osc {

/// Exact Euclidean distance (pixel units) from every pixel center to the
/// nearest foreground pixel center. Throws EmptyMask without foreground.
[[nodiscard]] ScalarField exact_edt(const BinaryMask& mask);

/// Squared distances as produced by the lower-envelope passes; integer valued.
[[nodiscard]] std::vector<double> squared_edt(const BinaryMask& mask);

/// phi > 0 inside the object, phi < 0 outside. |phi| is the distance to the
/// nearest pixel center of the opposite region, so it is never below 1.
struct SignedDistanceField {
    ScalarField phi;
    BinaryMask source;
};

/// Throws DegenerateMask if the mask is all-foreground or all-background.
[[nodiscard]] SignedDistanceField signed_distance(const BinaryMask& mask);

/// Smoothed step 1/2 (1 + 2/pi atan(x / eps)). Throws InvalidEpsilon for eps <= 0.
[[nodiscard]] double heaviside(double x, double eps);
/// Derivative of heaviside: eps / (pi (eps^2 + x^2)).
[[nodiscard]] double dirac(double x, double eps);

struct BandMask {
    double half_width = 0.0;
    BinaryMask inner;     // 0 < phi <= B
    BinaryMask outer;     // -B <= phi <= 0
    BinaryMask combined;  // |phi| <= B
    bool empty = false;

    [[nodiscard]] std::size_t pixel_count() const { return combined.count(); }
};

/// Closed band: pixels with |phi| == B are included.
[[nodiscard]] BandMask band_mask(const SignedDistanceField& sdf, double half_width);
[[nodiscard]] BandMask band_mask(const ScalarField& phi, double half_width);

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Polyline2D {
    std::vector<Point2> points;
    bool closed = true;

    /// Throws DegenerateCurve on fewer than 3 points (closed) or repeated consecutive points.
    void validate() const;
    [[nodiscard]] double perimeter() const;
    /// Shoelace formula; positive for counter-clockwise in (x, y) coordinates.
    [[nodiscard]] double signed_area() const;
};

enum class OffsetDirection { Inward, Outward };

struct OffsetResult {
    Polyline2D curve;
    double translation = 0.0;
    OffsetDirection direction = OffsetDirection::Inward;
    bool regular = true;
    std::vector<std::size_t> singular_indices;
};

/// Signed circumcircle curvature at each vertex of a closed polyline,
/// positive where the curve bends toward its interior. Collinear triples give 0.
[[nodiscard]] std::vector<double> curvature(const Polyline2D& poly);

/// Unit inward normals from the central-difference tangent.
[[nodiscard]] std::vector<Point2> inward_normals(const Polyline2D& poly);

/// Displaces each vertex by `translation` along its inward (or outward) unit
/// normal. A vertex is singular when |kappa| >= 1 / translation.
[[nodiscard]] OffsetResult offset_polyline(const Polyline2D& poly, double translation, OffsetDirection direction);

}  // namespace osc
