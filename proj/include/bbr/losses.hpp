#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "bbr/box.hpp"

namespace bbr {

enum class LossTag { IoU, GIoU, DIoU, CIoU, EIoU, NIoU, NEIoU };

inline constexpr std::array<LossTag, 7> kAllLossTags = {
    LossTag::IoU,  LossTag::GIoU, LossTag::DIoU, LossTag::CIoU,
    LossTag::EIoU, LossTag::NIoU, LossTag::NEIoU};

/// Loss selector. `n` is the focusing constant; it is read only by NIoU
/// and NEIoU and must be positive for those tags.
struct LossKind {
    LossTag tag = LossTag::NEIoU;
    double n = 9.0;
};

/// Scalar loss value plus its gradient with respect to the predicted
/// box parameters (d/dcx, d/dcy, d/dw, d/dh); the ground truth is
/// treated as constant.
struct LossResult {
    double value = 0.0;
    std::array<double, 4> grad = {0.0, 0.0, 0.0, 0.0};
};

/// CIoU aspect-consistency penalty v and its trade-off weight alpha.
/// v = (4/pi^2) * (atan(w_gt/h_gt) - atan(w/h))^2, in [0, 1];
/// alpha = v / ((1 - IoU) + v), defined as 0 when v == 0.
struct CIoUInternals {
    double v = 0.0;
    double alpha = 0.0;
};

/// Partial derivatives of v with respect to the predicted w and h.
/// They satisfy w * dv_dw + h * dv_dh == 0 (the see-saw identity).
struct AspectGrad {
    double dv_dw = 0.0;
    double dv_dh = 0.0;
};

/// Evaluates one loss and its analytic 4-gradient. alpha in CIoU is held
/// constant during differentiation; every other quantity, including the
/// enclosing-box denominators of the EIoU/NEIoU penalties, is
/// differentiated through.
LossResult loss(const LossKind& kind, const Box& pred, const Box& gt);

/// Value-only evaluation (shared formula path, no derivative bookkeeping).
double loss_value(const LossKind& kind, const Box& pred, const Box& gt);

CIoUInternals ciou_internals(const Box& pred, const Box& gt);

AspectGrad aspect_penalty_grad(const Box& pred, const Box& gt);

/// CIoU value with alpha pinned to the given constant. This is the
/// evaluation the finite-difference oracle perturbs, matching the
/// frozen-alpha differentiation convention.
double ciou_value_frozen_alpha(const Box& pred, const Box& gt, double alpha);

/// (1+n)*I / (U + n*I); equals (1+n)x / (1 + n*x) with x = I/U.
double niou_metric(double inter, double union_area, double n);

const char* kind_name(LossTag tag);     // "iou", "giou", ...
const char* kind_display(LossTag tag);  // "IoU", "GIoU", ...
LossTag parse_loss_tag(std::string_view name);

/// The seven losses in canonical order, N-variants carrying `n`.
std::vector<LossKind> all_kinds(double n = 9.0);

}  // namespace bbr
