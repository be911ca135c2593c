#pragma once

#include <string>
#include <vector>

namespace gmclab {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Closed axis-aligned rectangle [x0,x1]x[y0,y1] in the closed upper half-plane.
class UHPRect {
public:
    UHPRect(double x0, double x1, double y0, double y1);

    double x0() const { return x0_; }
    double x1() const { return x1_; }
    double y0() const { return y0_; }
    double y1() const { return y1_; }
    double width() const { return x1_ - x0_; }
    double height() const { return y1_ - y0_; }
    double area() const { return width() * height(); }

    bool contains(const UHPRect& other) const;
    UHPRect scaled(double r) const;       // z -> r z
    UHPRect translated(double dx) const;  // horizontal shift keeps the boundary fixed
    double distance_to(const UHPRect& other) const;

    std::string csv_row() const;

    friend bool operator==(const UHPRect&, const UHPRect&) = default;

private:
    double x0_, x1_, y0_, y1_;
};

class CarlesonCube {
public:
    CarlesonCube(double a, double b);

    double a() const { return a_; }
    double b() const { return b_; }
    double width() const { return b_ - a_; }
    double half_width() const { return 0.5 * (b_ - a_); }
    double midpoint() const { return 0.5 * (a_ + b_); }
    UHPRect rect() const { return UHPRect(a_, b_, 0.0, b_ - a_); }

    friend bool operator==(const CarlesonCube&, const CarlesonCube&) = default;

private:
    double a_, b_;
};

CarlesonCube carleson(double a, double b);

struct WhitneySplit {
    UHPRect left;
    UHPRect right;
    UHPRect upper;
};

WhitneySplit whitney_split(const CarlesonCube& q);

// Upper blocks for levels 0..depth (2^n at level n) followed by the 2^{depth+1} bottom cubes.
std::vector<UHPRect> whitney_partition(const CarlesonCube& q, int depth);

// L_n = [a,b] x [2^{-n-1} r, 2^{-n} r], n = 0..n_max, with r the half-width of q.
std::vector<UHPRect> horizontal_slices(const CarlesonCube& q, int n_max);

enum class StripOrigin {
    right_edge,  // side lies left of the split line (Q^L): strips run leftwards from x1
    left_edge,   // side lies right of the split line (Q^R): strips run rightwards from x0
};

std::vector<UHPRect> vertical_slices(const UHPRect& side, int n, StripOrigin origin);

double total_area(const std::vector<UHPRect>& rects);
bool interiors_disjoint(const std::vector<UHPRect>& rects);

// Region descriptor used by the CLI: "a,b" (Carleson cube) or "x0,x1,y0,y1".
UHPRect parse_region(const std::string& text);

}  // namespace gmclab
