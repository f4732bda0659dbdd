#include "bbr/losses.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bbr {

namespace {

struct Quad {
    double cx = 0.0, cy = 0.0, w = 0.0, h = 0.0;

    Quad operator+(const Quad& o) const {
        return {cx + o.cx, cy + o.cy, w + o.w, h + o.h};
    }
    Quad operator-(const Quad& o) const {
        return {cx - o.cx, cy - o.cy, w - o.w, h - o.h};
    }
    Quad operator*(double s) const { return {cx * s, cy * s, w * s, h * s}; }
    std::array<double, 4> arr() const { return {cx, cy, w, h}; }
};

// Pair geometry plus partial derivatives of every primitive with respect
// to the predicted (cx, cy, w, h).
struct PairDiff {
    PairGeometry geo;
    Quad d_inter;
    Quad d_union;
    Quad d_iou;
    Quad d_enc_w;
    Quad d_enc_h;
    Quad d_diag_sq;
    Quad d_enc_area;
    Quad d_rho_sq;
};

PairDiff pair_diff(const Box& p, const Box& g) {
    const detail::AxisExtents ax = detail::axis_extents(p.cx, p.w, g.cx, g.w);
    const detail::AxisExtents ay = detail::axis_extents(p.cy, p.h, g.cy, g.h);

    PairDiff d;
    d.geo.inter = ax.overlap * ay.overlap;
    d.geo.union_area = p.area() + g.area() - d.geo.inter;
    d.geo.iou = d.geo.inter / d.geo.union_area;
    d.geo.enc_w = ax.enc;
    d.geo.enc_h = ay.enc;
    d.geo.enc_diag_sq = ax.enc * ax.enc + ay.enc * ay.enc;
    d.geo.enc_area = ax.enc * ay.enc;
    const double dx = p.cx - g.cx;
    const double dy = p.cy - g.cy;
    d.geo.center_dist_sq = dx * dx + dy * dy;

    d.d_inter = Quad{ay.overlap * ax.d_ov_c, ax.overlap * ay.d_ov_c,
                     ay.overlap * ax.d_ov_s, ax.overlap * ay.d_ov_s};
    d.d_union = Quad{0.0, 0.0, p.h, p.w} - d.d_inter;
    d.d_iou = (d.d_inter - d.d_union * d.geo.iou) * (1.0 / d.geo.union_area);

    d.d_enc_w = Quad{ax.d_enc_c, 0.0, ax.d_enc_s, 0.0};
    d.d_enc_h = Quad{0.0, ay.d_enc_c, 0.0, ay.d_enc_s};
    d.d_diag_sq = d.d_enc_w * (2.0 * ax.enc) + d.d_enc_h * (2.0 * ay.enc);
    d.d_enc_area = d.d_enc_w * ay.enc + d.d_enc_h * ax.enc;
    d.d_rho_sq = Quad{2.0 * dx, 2.0 * dy, 0.0, 0.0};
    return d;
}

// rho^2 / c^2 center-distance penalty shared by DIoU, CIoU, EIoU, NEIoU.
double distance_penalty(const PairDiff& d, Quad* grad) {
    const double c2 = d.geo.enc_diag_sq;
    const double rho2 = d.geo.center_dist_sq;
    if (grad) {
        *grad = *grad +
                (d.d_rho_sq * c2 - d.d_diag_sq * rho2) * (1.0 / (c2 * c2));
    }
    return rho2 / c2;
}

// (s - s_gt)^2 / C^2 for one dimension; dC is the enclosing-extent
// derivative and `slot` selects the w or h gradient component.
double size_penalty(double s, double s_gt, double enc, const Quad& d_enc,
                    int slot, Quad* grad) {
    const double diff = s - s_gt;
    const double enc2 = enc * enc;
    if (grad) {
        Quad q = d_enc * (-2.0 * diff * diff / (enc2 * enc));
        if (slot == 2) {
            q.w += 2.0 * diff / enc2;
        } else {
            q.h += 2.0 * diff / enc2;
        }
        *grad = *grad + q;
    }
    return diff * diff / enc2;
}

double aspect_v(const Box& p, const Box& g, AspectGrad* ag) {
    constexpr double four_over_pi_sq =
        4.0 / (std::numbers::pi * std::numbers::pi);
    const double q = std::atan(g.w / g.h) - std::atan(p.w / p.h);
    if (ag) {
        const double common =
            2.0 * four_over_pi_sq * q / (p.w * p.w + p.h * p.h);
        ag->dv_dw = -common * p.h;
        ag->dv_dh = common * p.w;
    }
    return four_over_pi_sq * q * q;
}

double niou_term(const PairDiff& d, double n, Quad* grad) {
    // Through x = IoU: 1 - (1+n)x/(1+nx). This form is exact at x == 1.
    const double x = d.geo.iou;
    const double den = 1.0 + n * x;
    if (grad) {
        *grad = *grad - d.d_iou * ((1.0 + n) / (den * den));
    }
    return 1.0 - (1.0 + n) * x / den;
}

void require_n(const LossKind& kind) {
    if (kind.tag == LossTag::NIoU || kind.tag == LossTag::NEIoU) {
        if (!(kind.n > 0.0) || !std::isfinite(kind.n)) {
            throw std::invalid_argument(
                std::string(kind_name(kind.tag)) +
                " requires a positive focusing constant n");
        }
    }
}

LossResult evaluate(const LossKind& kind, const Box& pred, const Box& gt,
                    bool want_grad) {
    require_n(kind);
    const PairDiff d = pair_diff(pred, gt);

    double value = 0.0;
    Quad grad;
    Quad* gq = want_grad ? &grad : nullptr;

    switch (kind.tag) {
        case LossTag::IoU:
            value = 1.0 - d.geo.iou;
            if (gq) grad = grad - d.d_iou;
            break;
        case LossTag::GIoU: {
            value = 1.0 - d.geo.iou;
            if (gq) grad = grad - d.d_iou;
            const double ac = d.geo.enc_area;
            value += (ac - d.geo.union_area) / ac;
            if (gq) {
                grad = grad + (d.d_enc_area * d.geo.union_area -
                               d.d_union * ac) *
                                  (1.0 / (ac * ac));
            }
            break;
        }
        case LossTag::DIoU:
            value = 1.0 - d.geo.iou + distance_penalty(d, gq);
            if (gq) grad = grad - d.d_iou;
            break;
        case LossTag::CIoU: {
            value = 1.0 - d.geo.iou + distance_penalty(d, gq);
            if (gq) grad = grad - d.d_iou;
            AspectGrad ag;
            const double v = aspect_v(pred, gt, gq ? &ag : nullptr);
            const double alpha =
                v == 0.0 ? 0.0 : v / ((1.0 - d.geo.iou) + v);
            value += alpha * v;
            if (gq) {
                grad.w += alpha * ag.dv_dw;
                grad.h += alpha * ag.dv_dh;
            }
            break;
        }
        case LossTag::EIoU:
            value = 1.0 - d.geo.iou + distance_penalty(d, gq);
            if (gq) grad = grad - d.d_iou;
            value += size_penalty(pred.w, gt.w, d.geo.enc_w, d.d_enc_w, 2, gq);
            value += size_penalty(pred.h, gt.h, d.geo.enc_h, d.d_enc_h, 3, gq);
            break;
        case LossTag::NIoU:
            value = niou_term(d, kind.n, gq);
            break;
        case LossTag::NEIoU:
            value = niou_term(d, kind.n, gq) + distance_penalty(d, gq);
            value += size_penalty(pred.w, gt.w, d.geo.enc_w, d.d_enc_w, 2, gq);
            value += size_penalty(pred.h, gt.h, d.geo.enc_h, d.d_enc_h, 3, gq);
            break;
    }

    LossResult r;
    r.value = value;
    r.grad = grad.arr();
    return r;
}

}  // namespace

LossResult loss(const LossKind& kind, const Box& pred, const Box& gt) {
    return evaluate(kind, pred, gt, /*want_grad=*/true);
}

double loss_value(const LossKind& kind, const Box& pred, const Box& gt) {
    return evaluate(kind, pred, gt, /*want_grad=*/false).value;
}

CIoUInternals ciou_internals(const Box& pred, const Box& gt) {
    CIoUInternals out;
    out.v = aspect_v(pred, gt, nullptr);
    if (out.v == 0.0) {
        out.alpha = 0.0;
    } else {
        out.alpha = out.v / ((1.0 - iou(pred, gt)) + out.v);
    }
    return out;
}

AspectGrad aspect_penalty_grad(const Box& pred, const Box& gt) {
    AspectGrad ag;
    aspect_v(pred, gt, &ag);
    return ag;
}

double ciou_value_frozen_alpha(const Box& pred, const Box& gt, double alpha) {
    const PairDiff d = pair_diff(pred, gt);
    return 1.0 - d.geo.iou + d.geo.center_dist_sq / d.geo.enc_diag_sq +
           alpha * aspect_v(pred, gt, nullptr);
}

double niou_metric(double inter, double union_area, double n) {
    if (!(union_area > 0.0) || inter < 0.0 || inter > union_area) {
        throw std::invalid_argument(
            "niou_metric requires 0 <= inter <= union_area and union > 0");
    }
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw std::invalid_argument("niou_metric requires n > 0");
    }
    return (1.0 + n) * inter / (union_area + n * inter);
}

const char* kind_name(LossTag tag) {
    switch (tag) {
        case LossTag::IoU: return "iou";
        case LossTag::GIoU: return "giou";
        case LossTag::DIoU: return "diou";
        case LossTag::CIoU: return "ciou";
        case LossTag::EIoU: return "eiou";
        case LossTag::NIoU: return "niou";
        case LossTag::NEIoU: return "neiou";
    }
    return "?";
}

const char* kind_display(LossTag tag) {
    switch (tag) {
        case LossTag::IoU: return "IoU";
        case LossTag::GIoU: return "GIoU";
        case LossTag::DIoU: return "DIoU";
        case LossTag::CIoU: return "CIoU";
        case LossTag::EIoU: return "EIoU";
        case LossTag::NIoU: return "N-IoU";
        case LossTag::NEIoU: return "N-EIoU";
    }
    return "?";
}

LossTag parse_loss_tag(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    s.erase(std::remove(s.begin(), s.end(), '-'), s.end());
    for (LossTag tag : kAllLossTags) {
        if (s == kind_name(tag)) return tag;
    }
    throw std::invalid_argument("unknown loss kind '" + std::string(name) +
                                "' (expected one of iou, giou, diou, ciou, "
                                "eiou, niou, neiou)");
}

std::vector<LossKind> all_kinds(double n) {
    std::vector<LossKind> out;
    out.reserve(kAllLossTags.size());
    for (LossTag tag : kAllLossTags) out.push_back(LossKind{tag, n});
    return out;
}

}  // namespace bbr
