#pragma once

namespace bbr {

/// Axis-aligned box in center-size form. Obtain instances through
/// make_box() / box_from_corners(), which enforce w > 0, h > 0 and
/// finiteness; every function in this library assumes those invariants.
struct Box {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const { return w * h; }
    double x1() const { return cx - 0.5 * w; }
    double x2() const { return cx + 0.5 * w; }
    double y1() const { return cy - 0.5 * h; }
    double y2() const { return cy + 0.5 * h; }
};

/// Validating constructor. Throws std::invalid_argument naming the
/// offending field for non-positive sizes or non-finite values.
Box make_box(double cx, double cy, double w, double h);

/// Corner-form (x1, y1, x2, y2) constructor; requires x2 > x1, y2 > y1.
Box box_from_corners(double x1, double y1, double x2, double y2);

/// All pairwise quantities the loss family is built from, computed in one
/// pass. Symbols follow the usual convention: I = inter, U = union_area,
/// c^2 = enc_diag_sq, rho^2 = center_dist_sq.
struct PairGeometry {
    double inter = 0.0;           // intersection area, >= 0
    double union_area = 0.0;      // union area, > 0
    double iou = 0.0;             // inter / union_area, in [0, 1]
    double enc_w = 0.0;           // enclosing-box width
    double enc_h = 0.0;           // enclosing-box height
    double enc_diag_sq = 0.0;     // enc_w^2 + enc_h^2
    double enc_area = 0.0;        // enc_w * enc_h
    double center_dist_sq = 0.0;  // squared distance between centers
};

PairGeometry pair_geometry(const Box& pred, const Box& gt);

double iou(const Box& pred, const Box& gt);

namespace detail {

/// One-axis overlap/enclosing extents together with their subgradients
/// with respect to the predicted center and size. Exact edge ties take
/// weight 1/2 per side so the gradient at pred == gt is exactly zero;
/// the overlap clamp at zero extent keeps its interior-side derivative.
struct AxisExtents {
    double overlap = 0.0;  // clamped overlap extent, >= 0
    double d_ov_c = 0.0;   // d overlap / d pred center
    double d_ov_s = 0.0;   // d overlap / d pred size
    double enc = 0.0;      // enclosing extent
    double d_enc_c = 0.0;
    double d_enc_s = 0.0;
};

AxisExtents axis_extents(double pred_center, double pred_size,
                         double gt_center, double gt_size);

}  // namespace detail

}  // namespace bbr
