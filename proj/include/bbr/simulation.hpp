#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bbr/box.hpp"
#include "bbr/losses.hpp"

namespace bbr {

enum class SweepMode { Translate, Scale, TranslateDiagonal };

const char* sweep_mode_name(SweepMode mode);
SweepMode parse_sweep_mode(std::string_view name);

/// One-parameter family of predicted boxes around a fixed target:
///   translate          equal-size box displaced along +x by t in
///                      [0, (w_pred + w_gt)/2] (boxes just separate at the
///                      upper end)
///   scale              co-centered box, both dimensions scaled by
///                      k in [0.2, 2]
///   translate_diagonal center offset (t, t), t in
///                      [0, min((w_p+w_g)/2, (h_p+h_g)/2)]
struct SweepConfig {
    Box target{0.0, 0.0, 1.0, 1.0};
    SweepMode mode = SweepMode::Translate;
    int samples = 200;
    std::vector<LossKind> kinds = all_kinds();
};

struct SweepRow {
    LossTag kind;
    double n = 9.0;
    double offset = 0.0;  // t (translate modes) or k (scale mode)
    double iou = 0.0;
    double value = 0.0;
    std::array<double, 4> grad{};
    double grad_norm = 0.0;  // Euclidean norm of the 4-gradient
};

struct SweepReport {
    SweepConfig config;
    std::vector<SweepRow> rows;  // sorted by (kind, offset)
};

SweepReport gradient_sweep(const SweepConfig& cfg);

/// Deterministic ring layout of anchors: centers on circles of the given
/// radii, `points_per_ring` per circle, crossed with every scale (area
/// relative to the target) and aspect ratio. center_jitter > 0 adds a
/// seeded uniform offset in [-j, j] per axis to each center.
struct AnchorLayout {
    std::vector<double> ring_radii = {0.3, 0.6, 1.0, 1.5, 2.0, 2.5, 3.0};
    int points_per_ring = 16;
    std::vector<double> scales = {0.5, 0.67, 0.75, 1.0, 1.33, 1.5, 2.0};
    std::vector<double> aspect_ratios = {0.25, 1.0 / 3.0, 0.5, 1.0,
                                         2.0,  3.0,       4.0};
    double center_jitter = 0.0;
};

/// Unit-area targets centered at the origin, aspect ratios
/// 1:4, 1:3, 1:2, 1:1, 2:1, 3:1, 4:1.
std::vector<Box> default_targets();

struct SimConfig {
    std::vector<Box> targets = default_targets();
    AnchorLayout layout;
    int iterations = 200;
    double step_size = 0.1;
    double step_decay = 1.0;  // step at iteration i is step_size*decay^(i-1)
    std::vector<LossKind> kinds = all_kinds();
    std::uint64_t seed = 0;
    int threads = 1;
};

struct SimSeries {
    LossTag kind;
    double n = 9.0;
    // total_error[i] = corner error summed over all (anchor, target)
    // pairs after i update steps; size iterations + 1.
    std::vector<double> total_error;
    std::vector<double> final_errors;  // per (target-major, anchor) pair
};

struct SimReport {
    SimConfig config;
    std::size_t pair_count = 0;  // anchors x targets
    std::vector<SimSeries> series;
};

/// Gradient-descends every (anchor, target) pair independently under each
/// loss: box <- box - step * grad, w and h clamped to 1e-3. Deterministic
/// for a given config, independent of `threads`.
SimReport regression_sim(const SimConfig& cfg);

/// L1 distance between the two boxes' corner coordinates.
double corner_error(const Box& a, const Box& b);

std::vector<Box> build_anchors(const AnchorLayout& layout,
                               std::uint64_t seed);

}  // namespace bbr
