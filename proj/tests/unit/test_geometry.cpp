#include <doctest.h>

#include <cmath>

#include "gmclab/error.hpp"
#include "gmclab/geometry.hpp"

using namespace gmclab;

TEST_CASE("carleson cube rect") {
    CHECK(carleson(-1, 1).rect() == UHPRect(-1, 1, 0, 2));
    CHECK(carleson(0, 1).rect() == UHPRect(0, 1, 0, 1));
    CHECK_THROWS_AS(carleson(3, 3), PreconditionError);
    CHECK_THROWS_AS(carleson(0, NAN), PreconditionError);
    CHECK_THROWS_AS(carleson(0, INFINITY), PreconditionError);
}

TEST_CASE("rect invariants") {
    CHECK_THROWS_AS(UHPRect(1, 0, 0, 1), PreconditionError);
    CHECK_THROWS_AS(UHPRect(0, 1, -0.1, 1), PreconditionError);
    CHECK_THROWS_AS(UHPRect(0, 1, 1, 1), PreconditionError);
    UHPRect r(0, 2, 1, 3);
    CHECK(r.scaled(0.5) == UHPRect(0, 1, 0.5, 1.5));
    CHECK(r.area() == 4.0);
    CHECK(UHPRect(0, 1, 0, 1).distance_to(UHPRect(1.25, 2, 0, 1)) == 0.25);
    CHECK(r.csv_row() == "0,2,1,3");
}

TEST_CASE("whitney split") {
    double r = 0.75;
    auto s = whitney_split(carleson(-r, r));
    CHECK(s.left == carleson(-r, 0).rect());
    CHECK(s.right == carleson(0, r).rect());
    CHECK(s.upper == UHPRect(-r, r, r, 2 * r));
    auto t = whitney_split(carleson(0, 1));
    CHECK(t.left == UHPRect(0, 0.5, 0, 0.5));
    CHECK(t.right == UHPRect(0.5, 1, 0, 0.5));
    CHECK(t.upper == UHPRect(0, 1, 0.5, 1));
    CHECK(s.left.area() + s.right.area() + s.upper.area() == carleson(-r, r).rect().area());
    CHECK(interiors_disjoint({s.left, s.right, s.upper}));
}

TEST_CASE("whitney split commutes with boundary scaling") {
    auto q = carleson(-1, 1);
    auto left_scaled = whitney_split(q).left.scaled(0.5);
    // Q^L of Q_{[-1,1]} scaled by 1/2 is Q_{[-1/2,0]}, i.e. Q_{[-1/4,1/4]} translated.
    CHECK(left_scaled == carleson(-0.5, 0).rect());
    CHECK(left_scaled == carleson(-0.25, 0.25).rect().translated(-0.25));
}

TEST_CASE("whitney partition") {
    auto q = carleson(-1, 1);
    auto p0 = whitney_partition(q, 0);
    REQUIRE(p0.size() == 3);
    CHECK(p0[0] == UHPRect(-1, 1, 1, 2));
    CHECK(p0[1] == carleson(-1, 0).rect());
    CHECK(p0[2] == carleson(0, 1).rect());

    auto p2 = whitney_partition(q, 2);
    REQUIRE(p2.size() == 7 + 8);
    for (int i = 0; i < 7; ++i) {
        // upper-type: aspect ratio 2 (width twice height)
        CHECK(p2[i].width() == 2 * p2[i].height());
    }
    for (int i = 7; i < 15; ++i) {
        CHECK(p2[i].y0() == 0.0);
        CHECK(p2[i].width() == 0.25);
        CHECK(p2[i].height() == 0.25);
    }
    CHECK(total_area(p2) == q.rect().area());
    CHECK(interiors_disjoint(p2));

    auto p7 = whitney_partition(carleson(0.1, 0.4), 7);
    CHECK(std::abs(total_area(p7) - 0.09) <= 1e-12 * 0.09);
    CHECK(interiors_disjoint(p7));
    CHECK_THROWS_AS(whitney_partition(q, -1), PreconditionError);
    CHECK_THROWS_AS(whitney_partition(q, 60), PreconditionError);
}

TEST_CASE("horizontal slices") {
    auto q = carleson(-1, 1);
    auto s0 = horizontal_slices(q, 0);
    REQUIRE(s0.size() == 1);
    CHECK(s0[0] == UHPRect(-1, 1, 0.5, 1));
    auto s3 = horizontal_slices(q, 3);
    REQUIRE(s3.size() == 4);
    double h = 0;
    for (auto& s : s3) h += s.height();
    CHECK(h == 1.0 - 1.0 / 16);
    for (std::size_t n = 1; n < s3.size(); ++n) CHECK(s3[n].area() == 0.5 * s3[n - 1].area());
    CHECK(interiors_disjoint(s3));

    // slices + bottom strip + upper Whitney block tile the cube
    auto tiles = s3;
    tiles.emplace_back(-1, 1, 0, 1.0 / 16);
    tiles.push_back(whitney_split(q).upper);
    CHECK(interiors_disjoint(tiles));
    CHECK(total_area(tiles) == q.rect().area());
}

TEST_CASE("vertical slices") {
    UHPRect side(-1, 0, 0, 1);
    auto one = vertical_slices(side, 1, StripOrigin::right_edge);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == side);
    auto four = vertical_slices(side, 4, StripOrigin::right_edge);
    REQUIRE(four.size() == 4);
    CHECK(four[0] == UHPRect(-0.25, 0, 0, 1));
    CHECK(four[3] == UHPRect(-1, -0.75, 0, 1));
    auto right = vertical_slices(UHPRect(0, 1, 0, 1), 4, StripOrigin::left_edge);
    CHECK(right[0] == UHPRect(0, 0.25, 0, 1));
    CHECK(right[1] == UHPRect(0.25, 0.5, 0, 1));
    double w = 0;
    for (auto& s : vertical_slices(UHPRect(0, 0.3, 0, 0.3), 7, StripOrigin::left_edge)) w += s.width();
    CHECK(std::abs(w - 0.3) <= 1e-15);
    CHECK(interiors_disjoint(four));
}

TEST_CASE("region parsing") {
    CHECK(parse_region("-1,1") == UHPRect(-1, 1, 0, 2));
    CHECK(parse_region("0,1,0.5,1") == UHPRect(0, 1, 0.5, 1));
    CHECK_THROWS_AS(parse_region("1"), PreconditionError);
    CHECK_THROWS_AS(parse_region("a,b"), PreconditionError);
    CHECK_THROWS_AS(parse_region("1,0"), PreconditionError);
}
