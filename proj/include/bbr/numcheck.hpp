#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bbr/box.hpp"
#include "bbr/losses.hpp"

namespace bbr {

/// Finite-difference settings. A component passes when
/// |analytic - fd| <= max(tol_abs, tol_rel * max(|analytic|, |fd|)).
struct FdConfig {
    double step_rel = 1e-5;          // step = step_rel * max(|coord|, 1)
    double tol_rel = 1e-6;
    double tol_abs = 1e-9;
    double exclusion_margin = 1e-4;  // skip radius around non-smooth configs
};

struct WorstCase {
    LossKind kind;
    Box pred;
    Box gt;
    int component = -1;  // 0..3 = cx, cy, w, h
};

struct GradCheckReport {
    std::uint64_t pairs_tested = 0;
    std::uint64_t pairs_skipped = 0;
    double max_rel_err = 0.0;
    WorstCase worst;
    bool passed = false;
};

/// Central difference (L(p+d) - L(p-d)) / 2d per component. For CIoU the
/// trade-off weight alpha is frozen at its unperturbed value on both
/// sides, matching the analytic differentiation convention. Throws when
/// a perturbation would drive w or h non-positive.
std::array<double, 4> fd_gradient(const LossKind& kind, const Box& pred,
                                  const Box& gt, const FdConfig& cfg = {});

/// Forward one-sided variant, used to cross-check the central stencil.
std::array<double, 4> fd_gradient_forward(const LossKind& kind,
                                          const Box& pred, const Box& gt,
                                          const FdConfig& cfg = {});

/// True when the pair sits within `margin` of a non-differentiable
/// configuration: an exact edge alignment between the two boxes, or an
/// overlap extent about to appear or vanish.
bool near_nonsmooth(const Box& pred, const Box& gt, double margin);

/// Compares analytic gradients against the oracle on `pair_count` random
/// pairs (centers uniform in [-2,2], sizes log-uniform in [0.1,4]),
/// deterministically derived from `seed`. Pairs near non-smooth
/// configurations are skipped and counted. The report is identical for
/// any `threads` >= 1.
GradCheckReport run_gradcheck(const std::vector<LossKind>& kinds,
                              std::uint64_t pair_count, std::uint64_t seed,
                              const FdConfig& cfg = {}, int threads = 1);

/// The sampling distribution used by run_gradcheck, exposed so tests and
/// the simulation jitter share one deterministic uniform mapping.
namespace detail {
double u01(std::uint64_t raw);  // maps a raw 64-bit draw to [0, 1)
}

}  // namespace bbr
