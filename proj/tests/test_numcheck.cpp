#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bbr/numcheck.hpp"
#include "test_helpers.hpp"

using bbr::Box;
using bbr::FdConfig;
using bbr::GradCheckReport;
using bbr::LossKind;
using bbr::LossTag;

TEST_CASE("fd_gradient at identity: exact zeros in the symmetric "
          "components, O(step) across the size kink") {
    // pred == gt ties every edge, so the loss has a kink in w and h; the
    // centered stencil cancels the one-sided slopes only to O(step).
    // Identity pairs are excluded from oracle tolerance checks for
    // exactly this reason. The analytic gradient is exactly zero.
    const Box b{0.4, -0.7, 1.3, 0.8};
    for (const LossKind& kind : bbr::all_kinds()) {
        const auto fd = bbr::fd_gradient(kind, b, b);
        CHECK(fd[0] == 0.0);  // mirror symmetry in cx
        CHECK(fd[1] == 0.0);
        CHECK(std::abs(fd[2]) < 1e-4);
        CHECK(std::abs(fd[3]) < 1e-4);
        for (double g : bbr::loss(kind, b, b).grad) CHECK(g == 0.0);
    }
}

TEST_CASE("fd_gradient matches the analytic niou gradient on the offset "
          "pair along its smooth directions") {
    // The pair is smooth in cx and w; its y-edges are exactly tied, so cy
    // and h sit on the convention-defined kink (analytic 0, fd O(step)).
    const Box pred{0.5, 0.5, 1.0, 1.0};
    const Box gt{1.0, 0.5, 1.0, 1.0};
    const LossKind kind{LossTag::NIoU, 9.0};
    const auto fd = bbr::fd_gradient(kind, pred, gt);
    const auto an = bbr::loss(kind, pred, gt).grad;
    for (int i : {0, 2}) {
        CHECK(std::abs(an[i] - fd[i]) <=
              1e-6 * std::max({std::abs(an[i]), std::abs(fd[i]), 1e-3}));
    }
    CHECK(an[1] == 0.0);
    CHECK(an[3] == 0.0);
    CHECK(std::abs(fd[1]) < 1e-4);
    CHECK(std::abs(fd[3]) < 1e-4);
}

TEST_CASE("fd_gradient sees the vanishing iou gradient on disjoint boxes") {
    const Box pred{0.0, 0.0, 1.0, 1.0};
    const Box gt{5.0, 5.0, 1.0, 1.0};
    const auto fd = bbr::fd_gradient(LossKind{LossTag::IoU}, pred, gt);
    CHECK(fd[0] == 0.0);
    CHECK(fd[1] == 0.0);
}

TEST_CASE("fd_gradient rejects sizes that a step would drive non-positive") {
    const Box pred{0.0, 0.0, 1e-6, 1.0};
    const Box gt{0.0, 0.0, 1.0, 1.0};
    CHECK_THROWS_AS(bbr::fd_gradient(LossKind{LossTag::IoU}, pred, gt),
                    std::invalid_argument);
}

TEST_CASE("FdConfig is validated") {
    const Box b{0, 0, 1, 1};
    FdConfig bad;
    bad.step_rel = 1e-8;  // not above tol_rel
    bad.tol_rel = 1e-6;
    CHECK_THROWS_AS(bbr::fd_gradient(LossKind{LossTag::IoU}, b, b, bad),
                    std::invalid_argument);
    FdConfig neg;
    neg.tol_abs = -1.0;
    CHECK_THROWS_AS(bbr::fd_gradient(LossKind{LossTag::IoU}, b, b, neg),
                    std::invalid_argument);
}

TEST_CASE("central and forward differences agree on smooth pairs") {
    bbrtest::PairSampler sampler(41);
    const FdConfig cfg;
    int checked = 0;
    for (int i = 0; i < 200 && checked < 60; ++i) {
        const Box pred = sampler.box();
        const Box gt = sampler.box();
        if (bbr::near_nonsmooth(pred, gt, 1e-3)) continue;
        ++checked;
        for (const LossKind& kind :
             {LossKind{LossTag::CIoU}, LossKind{LossTag::NEIoU, 9.0}}) {
            const auto c = bbr::fd_gradient(kind, pred, gt, cfg);
            const auto f = bbr::fd_gradient_forward(kind, pred, gt, cfg);
            for (int k = 0; k < 4; ++k) {
                // one-sided is only O(step) accurate
                CHECK(std::abs(c[k] - f[k]) <=
                      100.0 * cfg.step_rel *
                          std::max(1.0, std::abs(c[k])));
            }
        }
    }
    CHECK(checked == 60);
}

TEST_CASE("near_nonsmooth flags edge alignment and touching boxes") {
    const Box a{0.0, 0.0, 1.0, 1.0};
    CHECK(bbr::near_nonsmooth(a, a, 1e-4));  // every edge tied
    const Box touching{1.0, 0.0, 1.0, 1.0};
    CHECK(bbr::near_nonsmooth(a, touching, 1e-4));
    const Box offset{0.4, 0.1, 1.1, 0.9};
    CHECK_FALSE(bbr::near_nonsmooth(a, offset, 1e-4));
    // pure x-translation keeps the y-edges tied
    CHECK(bbr::near_nonsmooth(a, Box{0.3, 0.0, 1.0, 1.0}, 1e-6));
    const Box near_corner{1.00005, 0.37, 1.0, 0.9};
    CHECK(bbr::near_nonsmooth(a, near_corner, 1e-4));
    CHECK_FALSE(bbr::near_nonsmooth(a, near_corner, 1e-6));
}

TEST_CASE("run_gradcheck passes on a small deterministic population") {
    const GradCheckReport r =
        bbr::run_gradcheck(bbr::all_kinds(), 500, 7, FdConfig{});
    CHECK(r.passed);
    CHECK(r.pairs_tested + r.pairs_skipped == 500);
    CHECK(r.max_rel_err <= 1e-6);
}

TEST_CASE("run_gradcheck reports are identical across runs and threads") {
    const GradCheckReport a =
        bbr::run_gradcheck(bbr::all_kinds(), 800, 42, FdConfig{}, 1);
    const GradCheckReport b =
        bbr::run_gradcheck(bbr::all_kinds(), 800, 42, FdConfig{}, 1);
    const GradCheckReport c =
        bbr::run_gradcheck(bbr::all_kinds(), 800, 42, FdConfig{}, 4);
    for (const GradCheckReport* r : {&b, &c}) {
        CHECK(a.pairs_tested == r->pairs_tested);
        CHECK(a.pairs_skipped == r->pairs_skipped);
        CHECK(a.max_rel_err == r->max_rel_err);
        CHECK(a.worst.component == r->worst.component);
        CHECK(a.worst.kind.tag == r->worst.kind.tag);
        CHECK(a.worst.pred.cx == r->worst.pred.cx);
        CHECK(a.worst.gt.cx == r->worst.gt.cx);
    }
}

TEST_CASE("a wide exclusion margin skips aggressively but passes on the "
          "remainder") {
    FdConfig cfg;
    cfg.exclusion_margin = 0.5;  // flags a large share of random pairs
    const GradCheckReport r =
        bbr::run_gradcheck(bbr::all_kinds(), 400, 11, cfg);
    CHECK(r.pairs_skipped > 100);
    CHECK(r.pairs_tested + r.pairs_skipped == 400);
    CHECK(r.passed);
}

TEST_CASE("run_gradcheck fails when the tolerance is absurdly tight") {
    FdConfig cfg;
    cfg.tol_rel = 1e-15;
    cfg.step_rel = 1e-5;
    cfg.tol_abs = 1e-18;
    const GradCheckReport r =
        bbr::run_gradcheck(bbr::all_kinds(), 50, 3, cfg);
    CHECK_FALSE(r.passed);
    CHECK(r.worst.component >= 0);
}

TEST_CASE("run_gradcheck validates its arguments") {
    CHECK_THROWS_AS(bbr::run_gradcheck({}, 10, 0), std::invalid_argument);
    CHECK_THROWS_AS(bbr::run_gradcheck(bbr::all_kinds(), 0, 0),
                    std::invalid_argument);
}
