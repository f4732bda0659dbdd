#include "bbr/box.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bbr {

namespace {

void check_field(double value, const char* name) {
    if (!std::isfinite(value)) {
        throw std::invalid_argument(std::string("box field '") + name +
                                    "' is not finite");
    }
}

}  // namespace

Box make_box(double cx, double cy, double w, double h) {
    check_field(cx, "cx");
    check_field(cy, "cy");
    check_field(w, "w");
    check_field(h, "h");
    if (w <= 0.0) {
        throw std::invalid_argument("box has non-positive width w=" +
                                    std::to_string(w));
    }
    if (h <= 0.0) {
        throw std::invalid_argument("box has non-positive height h=" +
                                    std::to_string(h));
    }
    return Box{cx, cy, w, h};
}

Box box_from_corners(double x1, double y1, double x2, double y2) {
    check_field(x1, "x1");
    check_field(y1, "y1");
    check_field(x2, "x2");
    check_field(y2, "y2");
    if (x2 <= x1) {
        throw std::invalid_argument("corner box requires x2 > x1");
    }
    if (y2 <= y1) {
        throw std::invalid_argument("corner box requires y2 > y1");
    }
    return Box{0.5 * (x1 + x2), 0.5 * (y1 + y2), x2 - x1, y2 - y1};
}

namespace detail {

AxisExtents axis_extents(double pc, double ps, double gc, double gs) {
    const double p_lo = pc - 0.5 * ps;
    const double p_hi = pc + 0.5 * ps;
    const double g_lo = gc - 0.5 * gs;
    const double g_hi = gc + 0.5 * gs;

    // Weight of the predicted edge inside min/max; ties split 1/2.
    const double w_hi = p_hi < g_hi ? 1.0 : (p_hi == g_hi ? 0.5 : 0.0);
    const double w_lo = p_lo > g_lo ? 1.0 : (p_lo == g_lo ? 0.5 : 0.0);

    // min(hi) - max(lo) == min(ps, gs, (ps+gs)/2 - |dc|), and likewise
    // max(hi) - min(lo) == max(ps, gs, (ps+gs)/2 + |dc|). The size-limited
    // branches are exact in floating point, so identical or nested boxes
    // produce extents equal to the size itself (no edge cancellation).
    const double half_sum = 0.5 * (ps + gs);
    const double dist = std::abs(pc - gc);

    AxisExtents ax;
    const double raw = std::min({ps, gs, half_sum - dist});
    if (raw >= 0.0) {
        ax.overlap = raw;
        ax.d_ov_c = w_hi - w_lo;
        ax.d_ov_s = 0.5 * (w_hi + w_lo);
    }

    const double e_hi = p_hi > g_hi ? 1.0 : (p_hi == g_hi ? 0.5 : 0.0);
    const double e_lo = p_lo < g_lo ? 1.0 : (p_lo == g_lo ? 0.5 : 0.0);
    ax.enc = std::max({ps, gs, half_sum + dist});
    ax.d_enc_c = e_hi - e_lo;
    ax.d_enc_s = 0.5 * (e_hi + e_lo);
    return ax;
}

}  // namespace detail

PairGeometry pair_geometry(const Box& pred, const Box& gt) {
    const detail::AxisExtents x =
        detail::axis_extents(pred.cx, pred.w, gt.cx, gt.w);
    const detail::AxisExtents y =
        detail::axis_extents(pred.cy, pred.h, gt.cy, gt.h);

    PairGeometry g;
    g.inter = x.overlap * y.overlap;
    g.union_area = pred.area() + gt.area() - g.inter;
    g.iou = g.inter / g.union_area;
    g.enc_w = x.enc;
    g.enc_h = y.enc;
    g.enc_diag_sq = x.enc * x.enc + y.enc * y.enc;
    g.enc_area = x.enc * y.enc;
    const double dx = pred.cx - gt.cx;
    const double dy = pred.cy - gt.cy;
    g.center_dist_sq = dx * dx + dy * dy;
    return g;
}

double iou(const Box& pred, const Box& gt) {
    return pair_geometry(pred, gt).iou;
}

}  // namespace bbr
