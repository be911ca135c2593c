#include "gmclab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gmclab/error.hpp"
#include "gmclab/format.hpp"

namespace gmclab {

namespace {

bool finite_all(std::initializer_list<double> vs) {
    return std::all_of(vs.begin(), vs.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

UHPRect::UHPRect(double x0, double x1, double y0, double y1) : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
    if (!finite_all({x0, x1, y0, y1})) throw PreconditionError("rectangle coordinates must be finite");
    if (!(x0 < x1)) throw PreconditionError("rectangle needs x0 < x1");
    if (!(y0 >= 0.0 && y0 < y1)) throw PreconditionError("rectangle needs 0 <= y0 < y1");
}

bool UHPRect::contains(const UHPRect& o) const {
    return o.x0_ >= x0_ && o.x1_ <= x1_ && o.y0_ >= y0_ && o.y1_ <= y1_;
}

UHPRect UHPRect::scaled(double r) const {
    if (!(r > 0.0) || !std::isfinite(r)) throw PreconditionError("scale factor must be positive");
    return UHPRect(r * x0_, r * x1_, r * y0_, r * y1_);
}

UHPRect UHPRect::translated(double dx) const { return UHPRect(x0_ + dx, x1_ + dx, y0_, y1_); }

double UHPRect::distance_to(const UHPRect& o) const {
    double dx = std::max({0.0, o.x0_ - x1_, x0_ - o.x1_});
    double dy = std::max({0.0, o.y0_ - y1_, y0_ - o.y1_});
    return std::hypot(dx, dy);
}

std::string UHPRect::csv_row() const {
    return format_double(x0_) + "," + format_double(x1_) + "," + format_double(y0_) + "," +
           format_double(y1_);
}

CarlesonCube::CarlesonCube(double a, double b) : a_(a), b_(b) {
    if (!finite_all({a, b})) throw PreconditionError("cube endpoints must be finite");
    if (!(a < b)) throw PreconditionError("Carleson cube needs a < b");
}

CarlesonCube carleson(double a, double b) { return CarlesonCube(a, b); }

WhitneySplit whitney_split(const CarlesonCube& q) {
    double m = q.midpoint();
    double h = q.width();
    return WhitneySplit{CarlesonCube(q.a(), m).rect(), CarlesonCube(m, q.b()).rect(),
                        UHPRect(q.a(), q.b(), 0.5 * h, h)};
}

std::vector<UHPRect> whitney_partition(const CarlesonCube& q, int depth) {
    if (depth < 0) throw PreconditionError("whitney_partition: depth must be >= 0");
    // 2^{depth+1} bottom cubes; beyond this the cube widths are no longer distinct doubles
    // for typical inputs and the output would not fit in memory anyway.
    if (depth > 24) throw PreconditionError("whitney_partition: depth too large to represent scale");
    double w = q.width();
    std::vector<UHPRect> out;
    out.reserve((std::size_t{1} << (depth + 1)) * 2);
    double cube_w = w;  // width of the cubes being split at level n
    for (int n = 0; n <= depth; ++n) {
        std::size_t count = std::size_t{1} << n;
        double child_w = 0.5 * cube_w;
        if (!(child_w > 0.0) || q.a() + child_w == q.a())
            throw PreconditionError("whitney_partition: depth too large to represent scale");
        for (std::size_t i = 0; i < count; ++i) {
            double a = q.a() + static_cast<double>(i) * cube_w;
            double b = (i + 1 == count) ? q.b() : q.a() + static_cast<double>(i + 1) * cube_w;
            out.emplace_back(a, b, child_w, cube_w);
        }
        cube_w = child_w;
    }
    std::size_t bottom = std::size_t{1} << (depth + 1);
    for (std::size_t i = 0; i < bottom; ++i) {
        double a = q.a() + static_cast<double>(i) * cube_w;
        double b = (i + 1 == bottom) ? q.b() : q.a() + static_cast<double>(i + 1) * cube_w;
        out.emplace_back(a, b, 0.0, cube_w);
    }
    return out;
}

std::vector<UHPRect> horizontal_slices(const CarlesonCube& q, int n_max) {
    if (n_max < 0) throw PreconditionError("horizontal_slices: n_max must be >= 0");
    std::vector<UHPRect> out;
    double top = q.half_width();
    for (int n = 0; n <= n_max; ++n) {
        double bottom = 0.5 * top;
        out.emplace_back(q.a(), q.b(), bottom, top);
        top = bottom;
    }
    return out;
}

std::vector<UHPRect> vertical_slices(const UHPRect& side, int n, StripOrigin origin) {
    if (n < 1) throw PreconditionError("vertical_slices: N must be >= 1");
    double delta = side.width() / n;
    std::vector<UHPRect> out;
    out.reserve(n);
    for (int j = 1; j <= n; ++j) {
        if (origin == StripOrigin::right_edge) {
            double hi = (j == 1) ? side.x1() : side.x1() - (j - 1) * delta;
            double lo = (j == n) ? side.x0() : side.x1() - j * delta;
            out.emplace_back(lo, hi, side.y0(), side.y1());
        } else {
            double lo = (j == 1) ? side.x0() : side.x0() + (j - 1) * delta;
            double hi = (j == n) ? side.x1() : side.x0() + j * delta;
            out.emplace_back(lo, hi, side.y0(), side.y1());
        }
    }
    return out;
}

double total_area(const std::vector<UHPRect>& rects) {
    double s = 0.0;
    for (const auto& r : rects) s += r.area();
    return s;
}

bool interiors_disjoint(const std::vector<UHPRect>& rects) {
    for (std::size_t i = 0; i < rects.size(); ++i) {
        for (std::size_t j = i + 1; j < rects.size(); ++j) {
            const auto& a = rects[i];
            const auto& b = rects[j];
            bool sep = a.x1() <= b.x0() || b.x1() <= a.x0() || a.y1() <= b.y0() || b.y1() <= a.y0();
            if (!sep) return false;
        }
    }
    return true;
}

UHPRect parse_region(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw PreconditionError("region: cannot parse number '" + tok + "'");
        }
    }
    if (v.size() == 2) return carleson(v[0], v[1]).rect();
    if (v.size() == 4) return UHPRect(v[0], v[1], v[2], v[3]);
    throw PreconditionError("region must be 'a,b' (Carleson cube) or 'x0,x1,y0,y1'");
}

}  // namespace gmclab
