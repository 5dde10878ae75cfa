#include "osc/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace osc {

namespace {

// Sentinel for "no site yet". Large enough to lose every comparison against a
// real squared distance, small enough to keep the envelope arithmetic finite.
constexpr double kFar = 1e20;

constexpr double kMinSeparation = 1e-9;
constexpr double kCollinearTolerance = 1e-12;

// One-dimensional squared distance transform by the lower envelope of
// parabolas rooted at each sample. `f` is read with `stride` and the result
// is written back in place.
void envelope_pass(double* f, std::size_t n, std::size_t stride, std::vector<std::size_t>& sites,
                   std::vector<double>& bounds, std::vector<double>& scratch) {
    sites.resize(n);
    bounds.resize(n + 1);
    scratch.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        scratch[i] = f[i * stride];
    }

    std::size_t k = 0;
    sites[0] = 0;
    bounds[0] = -std::numeric_limits<double>::infinity();
    bounds[1] = std::numeric_limits<double>::infinity();
    auto intersect = [&](std::size_t q, std::size_t p) {
        const auto qd = static_cast<double>(q);
        const auto pd = static_cast<double>(p);
        return ((scratch[q] + qd * qd) - (scratch[p] + pd * pd)) / (2.0 * (qd - pd));
    };
    for (std::size_t q = 1; q < n; ++q) {
        // bounds[0] is -inf, so k never underflows.
        double s = intersect(q, sites[k]);
        while (s <= bounds[k]) {
            --k;
            s = intersect(q, sites[k]);
        }
        ++k;
        sites[k] = q;
        bounds[k] = s;
        bounds[k + 1] = std::numeric_limits<double>::infinity();
    }

    k = 0;
    for (std::size_t q = 0; q < n; ++q) {
        const auto qd = static_cast<double>(q);
        while (bounds[k + 1] < qd) {
            ++k;
        }
        const double d = qd - static_cast<double>(sites[k]);
        f[q * stride] = d * d + scratch[sites[k]];
    }
}

void require_epsilon(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw Error(ErrorKind::InvalidEpsilon, "eps must be a positive finite number");
    }
}

double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
Point2 sub(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
double norm(Point2 a) { return std::hypot(a.x, a.y); }

}  // namespace

std::vector<double> squared_edt(const BinaryMask& mask) {
    if (mask.count() == 0) {
        throw Error(ErrorKind::EmptyMask, "distance transform needs at least one foreground pixel");
    }
    const std::size_t w = mask.width();
    const std::size_t h = mask.height();
    std::vector<double> f(mask.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = mask[i] ? 0.0 : kFar;
    }

    std::vector<std::size_t> sites;
    std::vector<double> bounds;
    std::vector<double> scratch;
    for (std::size_t x = 0; x < w; ++x) {
        envelope_pass(f.data() + x, h, w, sites, bounds, scratch);
    }
    for (std::size_t y = 0; y < h; ++y) {
        envelope_pass(f.data() + y * w, w, 1, sites, bounds, scratch);
    }
    return f;
}

ScalarField exact_edt(const BinaryMask& mask) {
    auto sq = squared_edt(mask);
    for (auto& v : sq) {
        v = std::sqrt(v);
    }
    return {mask.width(), mask.height(), std::move(sq)};
}

SignedDistanceField signed_distance(const BinaryMask& mask) {
    const std::size_t fg = mask.count();
    if (fg == 0 || fg == mask.size()) {
        throw Error(ErrorKind::DegenerateMask,
                    fg == 0 ? "mask has no foreground pixel" : "mask has no background pixel");
    }
    const auto to_foreground = squared_edt(mask);
    const auto to_background = squared_edt(complement(mask));
    std::vector<double> phi(mask.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        phi[i] = mask[i] ? std::sqrt(to_background[i]) : -std::sqrt(to_foreground[i]);
    }
    return {ScalarField(mask.width(), mask.height(), std::move(phi)), mask};
}

double heaviside(double x, double eps) {
    require_epsilon(eps);
    return 0.5 * (1.0 + (2.0 / std::numbers::pi) * std::atan(x / eps));
}

double dirac(double x, double eps) {
    require_epsilon(eps);
    return (1.0 / std::numbers::pi) * eps / (eps * eps + x * x);
}

BandMask band_mask(const ScalarField& phi, double half_width) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw Error(ErrorKind::InvalidArgument, "band half width must be positive");
    }
    BandMask band;
    band.half_width = half_width;
    band.inner = BinaryMask(phi.width(), phi.height());
    band.outer = BinaryMask(phi.width(), phi.height());
    band.combined = BinaryMask(phi.width(), phi.height());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (std::abs(phi[i]) <= half_width) {
            band.combined.set(i, true);
            if (phi[i] > 0.0) {
                band.inner.set(i, true);
            } else {
                band.outer.set(i, true);
            }
        }
    }
    band.empty = band.combined.count() == 0;
    return band;
}

BandMask band_mask(const SignedDistanceField& sdf, double half_width) { return band_mask(sdf.phi, half_width); }

void Polyline2D::validate() const {
    const std::size_t n = points.size();
    if (closed ? n < 3 : n < 2) {
        throw Error(ErrorKind::DegenerateCurve, "polyline has too few points: " + std::to_string(n));
    }
    const std::size_t segments = closed ? n : n - 1;
    for (std::size_t i = 0; i < segments; ++i) {
        const Point2 a = points[i];
        const Point2 b = points[(i + 1) % n];
        if (!std::isfinite(a.x) || !std::isfinite(a.y)) {
            throw Error(ErrorKind::DegenerateCurve, "non-finite vertex " + std::to_string(i));
        }
        if (norm(sub(b, a)) <= kMinSeparation) {
            throw Error(ErrorKind::DegenerateCurve, "repeated vertex at index " + std::to_string(i));
        }
    }
}

double Polyline2D::perimeter() const {
    const std::size_t n = points.size();
    if (n < 2) {
        return 0.0;
    }
    double total = 0.0;
    const std::size_t segments = closed ? n : n - 1;
    for (std::size_t i = 0; i < segments; ++i) {
        total += norm(sub(points[(i + 1) % n], points[i]));
    }
    return total;
}

double Polyline2D::signed_area() const {
    double twice = 0.0;
    const std::size_t n = points.size();
    for (std::size_t i = 0; i < n; ++i) {
        twice += cross(points[i], points[(i + 1) % n]);
    }
    return 0.5 * twice;
}

namespace {

void require_closed(const Polyline2D& poly) {
    if (!poly.closed) {
        throw Error(ErrorKind::DegenerateCurve, "operation needs a closed polyline");
    }
    poly.validate();
}

double orientation(const Polyline2D& poly) { return poly.signed_area() >= 0.0 ? 1.0 : -1.0; }

}  // namespace

std::vector<double> curvature(const Polyline2D& poly) {
    require_closed(poly);
    const std::size_t n = poly.points.size();
    const double sign = orientation(poly);
    std::vector<double> kappa(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = poly.points[(i + n - 1) % n];
        const Point2 b = poly.points[i];
        const Point2 c = poly.points[(i + 1) % n];
        const Point2 ab = sub(b, a);
        const Point2 bc = sub(c, b);
        const double turn = cross(ab, bc);
        const double lengths = norm(ab) * norm(bc) * norm(sub(c, a));
        if (std::abs(turn) <= kCollinearTolerance * norm(ab) * norm(bc) || lengths == 0.0) {
            kappa[i] = 0.0;
            continue;
        }
        kappa[i] = sign * 2.0 * turn / lengths;
    }
    return kappa;
}

std::vector<Point2> inward_normals(const Polyline2D& poly) {
    require_closed(poly);
    const std::size_t n = poly.points.size();
    const double sign = orientation(poly);
    std::vector<Point2> normals(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 tangent = sub(poly.points[(i + 1) % n], poly.points[(i + n - 1) % n]);
        const double len = norm(tangent);
        if (len <= kMinSeparation) {
            throw Error(ErrorKind::DegenerateCurve, "cannot estimate normal at vertex " + std::to_string(i));
        }
        // Left normal of a counter-clockwise curve points inside.
        normals[i] = {-sign * tangent.y / len, sign * tangent.x / len};
    }
    return normals;
}

OffsetResult offset_polyline(const Polyline2D& poly, double translation, OffsetDirection direction) {
    if (!(translation > 0.0) || !std::isfinite(translation)) {
        throw Error(ErrorKind::InvalidArgument, "offset translation must be positive");
    }
    const auto normals = inward_normals(poly);
    const auto kappa = curvature(poly);
    const double step = direction == OffsetDirection::Inward ? translation : -translation;

    OffsetResult result;
    result.translation = translation;
    result.direction = direction;
    result.curve.closed = true;
    result.curve.points.reserve(poly.points.size());
    const double bound = 1.0 / translation;
    for (std::size_t i = 0; i < poly.points.size(); ++i) {
        const Point2 p = poly.points[i];
        result.curve.points.push_back({p.x + step * normals[i].x, p.y + step * normals[i].y});
        if (std::abs(kappa[i]) >= bound) {
            result.singular_indices.push_back(i);
        }
    }
    result.regular = result.singular_indices.empty();
    return result;
}

}  // namespace osc
