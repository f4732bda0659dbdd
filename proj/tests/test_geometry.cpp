#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bbr/box.hpp"
#include "test_helpers.hpp"

using bbr::Box;
using bbr::PairGeometry;

TEST_CASE("make_box validates its fields") {
    const Box b = bbr::make_box(0.0, 0.0, 1.0, 1.0);
    CHECK(b.cx == 0.0);
    CHECK(b.w == 1.0);

    CHECK_THROWS_WITH_AS(bbr::make_box(0, 0, 0, 1),
                         doctest::Contains("width"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(bbr::make_box(0, 0, 1, -2),
                         doctest::Contains("height"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        bbr::make_box(0, 0, std::numeric_limits<double>::quiet_NaN(), 1),
        doctest::Contains("'w'"), std::invalid_argument);
    CHECK_THROWS_AS(
        bbr::make_box(std::numeric_limits<double>::infinity(), 0, 1, 1),
        std::invalid_argument);
}

TEST_CASE("box_from_corners converts and validates") {
    const Box b = bbr::box_from_corners(0.0, 0.0, 2.0, 1.0);
    CHECK(b.cx == 1.0);
    CHECK(b.cy == 0.5);
    CHECK(b.w == 2.0);
    CHECK(b.h == 1.0);
    CHECK_THROWS_AS(bbr::box_from_corners(1, 0, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(bbr::box_from_corners(0, 2, 1, 1), std::invalid_argument);
}

TEST_CASE("pair_geometry on identical boxes") {
    const Box b{0.5, 0.5, 1.0, 1.0};
    const PairGeometry g = bbr::pair_geometry(b, b);
    CHECK(g.inter == 1.0);
    CHECK(g.union_area == 1.0);
    CHECK(g.iou == 1.0);
    CHECK(g.center_dist_sq == 0.0);
    CHECK(g.enc_w == 1.0);
    CHECK(g.enc_h == 1.0);
    CHECK(g.enc_diag_sq == 2.0);
}

TEST_CASE("pair_geometry on the half-overlap unit squares") {
    // Unit squares offset by 0.5: I = 0.5 x 1, U = 2 - 0.5.
    const Box pred{0.5, 0.5, 1.0, 1.0};
    const Box gt{1.0, 0.5, 1.0, 1.0};
    const PairGeometry g = bbr::pair_geometry(pred, gt);
    CHECK(g.inter == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.union_area == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(g.iou == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(g.enc_w == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(g.enc_h == 1.0);
    CHECK(g.center_dist_sq == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("pair_geometry on disjoint boxes") {
    const Box a{0.0, 0.0, 1.0, 1.0};
    const Box b{10.0, 10.0, 1.0, 1.0};
    const PairGeometry g = bbr::pair_geometry(a, b);
    CHECK(g.inter == 0.0);
    CHECK(g.iou == 0.0);
    CHECK(g.center_dist_sq == 200.0);
}

TEST_CASE("touching edges have zero intersection") {
    const Box a{0.0, 0.0, 1.0, 1.0};
    const Box b{1.0, 0.0, 1.0, 1.0};  // shares the x = 0.5 edge
    CHECK(bbr::pair_geometry(a, b).inter == 0.0);
    CHECK(bbr::iou(a, b) == 0.0);
}

TEST_CASE("containment gives inter == area(pred) exactly") {
    const Box inner{0.1, -0.2, 0.5, 0.25};
    const Box outer{0.0, 0.0, 4.0, 4.0};
    CHECK(bbr::pair_geometry(inner, outer).inter == inner.area());
}

TEST_CASE("geometry is symmetric in its arguments") {
    bbrtest::PairSampler sampler(17);
    for (int i = 0; i < 500; ++i) {
        const Box a = sampler.box();
        const Box b = sampler.box();
        const PairGeometry ab = bbr::pair_geometry(a, b);
        const PairGeometry ba = bbr::pair_geometry(b, a);
        CHECK(ab.inter == ba.inter);
        CHECK(ab.union_area == ba.union_area);
        CHECK(ab.iou == ba.iou);
        CHECK(ab.enc_w == ba.enc_w);
        CHECK(ab.enc_h == ba.enc_h);
        CHECK(ab.enc_area == ba.enc_area);
        CHECK(ab.center_dist_sq == ba.center_dist_sq);
    }
}

TEST_CASE("pair_geometry internal consistency on random pairs") {
    bbrtest::PairSampler sampler(99);
    for (int i = 0; i < 500; ++i) {
        const Box a = sampler.box();
        const Box b = sampler.box();
        const PairGeometry g = bbr::pair_geometry(a, b);
        CHECK(g.inter >= 0.0);
        CHECK(g.inter <= std::min(a.area(), b.area()) + 1e-15);
        CHECK(g.union_area ==
              doctest::Approx(a.area() + b.area() - g.inter).epsilon(1e-14));
        CHECK(g.iou >= 0.0);
        CHECK(g.iou <= 1.0);
        CHECK(g.enc_area >= g.union_area - 1e-12 * g.union_area);
        CHECK(g.enc_diag_sq ==
              doctest::Approx(g.enc_w * g.enc_w + g.enc_h * g.enc_h));
        CHECK(g.center_dist_sq <= g.enc_diag_sq);
    }
}

TEST_CASE("iou is scale invariant") {
    bbrtest::PairSampler sampler(5);
    const double scales[] = {0.125, 3.0, 17.5, 1e3};
    for (int i = 0; i < 200; ++i) {
        const Box a = sampler.box();
        const Box b = sampler.box();
        const double base = bbr::iou(a, b);
        for (double k : scales) {
            const Box ak{k * a.cx, k * a.cy, k * a.w, k * a.h};
            const Box bk{k * b.cx, k * b.cy, k * b.w, k * b.h};
            CHECK(bbrtest::rel_diff(base, bbr::iou(ak, bk)) < 1e-12);
        }
    }
}
