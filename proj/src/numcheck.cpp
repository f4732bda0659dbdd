#include "bbr/numcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace bbr {

namespace detail {

double u01(std::uint64_t raw) {
    // 53-bit mantissa trick; uniform on [0, 1), platform-independent.
    return static_cast<double>(raw >> 11) * 0x1.0p-53;
}

}  // namespace detail

namespace {

void validate(const FdConfig& cfg) {
    if (!(cfg.step_rel > 0.0) || !(cfg.tol_rel > 0.0) ||
        !(cfg.tol_abs > 0.0) || cfg.exclusion_margin < 0.0) {
        throw std::invalid_argument("FdConfig fields must be positive "
                                    "(exclusion_margin >= 0)");
    }
    if (!(cfg.step_rel > cfg.tol_rel)) {
        throw std::invalid_argument("FdConfig requires step_rel > tol_rel");
    }
}

double fd_value(const LossKind& kind, const Box& p, const Box& gt,
                double frozen_alpha) {
    if (kind.tag == LossTag::CIoU) {
        return ciou_value_frozen_alpha(p, gt, frozen_alpha);
    }
    return loss_value(kind, p, gt);
}

std::array<double, 4> fd_impl(const LossKind& kind, const Box& pred,
                              const Box& gt, const FdConfig& cfg,
                              bool central) {
    validate(cfg);
    const double frozen_alpha = kind.tag == LossTag::CIoU
                                    ? ciou_internals(pred, gt).alpha
                                    : 0.0;
    const std::array<double, 4> coords = {pred.cx, pred.cy, pred.w, pred.h};
    const auto with_coord = [&](int i, double value) {
        std::array<double, 4> c = coords;
        c[i] = value;
        return Box{c[0], c[1], c[2], c[3]};
    };
    std::array<double, 4> out{};
    for (int i = 0; i < 4; ++i) {
        const double step = cfg.step_rel * std::max(std::abs(coords[i]), 1.0);
        if (i >= 2 && coords[i] - step <= 0.0) {
            throw std::invalid_argument(
                "finite-difference step drives box size non-positive");
        }
        const Box hi = with_coord(i, coords[i] + step);
        const Box lo = with_coord(i, coords[i] - step);
        if (central) {
            out[i] = (fd_value(kind, hi, gt, frozen_alpha) -
                      fd_value(kind, lo, gt, frozen_alpha)) /
                     (2.0 * step);
        } else {
            out[i] = (fd_value(kind, hi, gt, frozen_alpha) -
                      fd_value(kind, pred, gt, frozen_alpha)) /
                     step;
        }
    }
    return out;
}

struct ChunkResult {
    std::uint64_t tested = 0;
    std::uint64_t skipped = 0;
    double max_rel_err = -1.0;
    WorstCase worst;
};

}  // namespace

std::array<double, 4> fd_gradient(const LossKind& kind, const Box& pred,
                                  const Box& gt, const FdConfig& cfg) {
    return fd_impl(kind, pred, gt, cfg, /*central=*/true);
}

std::array<double, 4> fd_gradient_forward(const LossKind& kind,
                                          const Box& pred, const Box& gt,
                                          const FdConfig& cfg) {
    return fd_impl(kind, pred, gt, cfg, /*central=*/false);
}

bool near_nonsmooth(const Box& pred, const Box& gt, double margin) {
    const double p_edges[4] = {pred.x1(), pred.x2(), pred.y1(), pred.y2()};
    const double g_edges[4] = {gt.x1(), gt.x2(), gt.y1(), gt.y2()};
    // Any exact edge alignment is a kink of min/max (intersection and
    // enclosing extents alike).
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            if (std::abs(p_edges[i] - g_edges[j]) < margin) return true;
            if (std::abs(p_edges[2 + i] - g_edges[2 + j]) < margin)
                return true;
        }
    }
    // Overlap extent about to appear or vanish: the clamp kink.
    const double iw = std::min(p_edges[1], g_edges[1]) -
                      std::max(p_edges[0], g_edges[0]);
    const double ih = std::min(p_edges[3], g_edges[3]) -
                      std::max(p_edges[2], g_edges[2]);
    return std::abs(iw) < margin || std::abs(ih) < margin;
}

GradCheckReport run_gradcheck(const std::vector<LossKind>& kinds,
                              std::uint64_t pair_count, std::uint64_t seed,
                              const FdConfig& cfg, int threads) {
    validate(cfg);
    if (pair_count < 1) {
        throw std::invalid_argument("run_gradcheck requires pair_count >= 1");
    }
    if (kinds.empty()) {
        throw std::invalid_argument("run_gradcheck requires at least one kind");
    }
    if (threads < 1) threads = 1;

    // Pairs are generated sequentially so the population depends only on
    // the seed, never on the thread count.
    std::mt19937_64 rng(seed);
    const double log_lo = std::log(0.1);
    const double log_span = std::log(4.0) - log_lo;
    auto next_box = [&]() {
        const double cx = -2.0 + 4.0 * detail::u01(rng());
        const double cy = -2.0 + 4.0 * detail::u01(rng());
        const double w = std::exp(log_lo + log_span * detail::u01(rng()));
        const double h = std::exp(log_lo + log_span * detail::u01(rng()));
        return Box{cx, cy, w, h};
    };
    std::vector<std::pair<Box, Box>> pairs;
    pairs.reserve(pair_count);
    for (std::uint64_t i = 0; i < pair_count; ++i) {
        Box pred = next_box();
        Box gt = next_box();
        pairs.emplace_back(pred, gt);
    }

    const double rel_floor = cfg.tol_abs / cfg.tol_rel;
    constexpr std::uint64_t kChunk = 512;
    const std::uint64_t n_chunks = (pair_count + kChunk - 1) / kChunk;
    std::vector<ChunkResult> results(n_chunks);

    auto process_chunk = [&](std::uint64_t c) {
        ChunkResult& res = results[c];
        const std::uint64_t lo = c * kChunk;
        const std::uint64_t hi = std::min(pair_count, lo + kChunk);
        for (std::uint64_t i = lo; i < hi; ++i) {
            const auto& [pred, gt] = pairs[i];
            if (near_nonsmooth(pred, gt, cfg.exclusion_margin)) {
                ++res.skipped;
                continue;
            }
            ++res.tested;
            for (const LossKind& kind : kinds) {
                const LossResult r = loss(kind, pred, gt);
                const std::array<double, 4> fd =
                    fd_gradient(kind, pred, gt, cfg);
                for (int k = 0; k < 4; ++k) {
                    // allclose-style: pass iff |a-f| <= tol_abs +
                    // tol_rel*max(|a|,|f|), expressed so that
                    // rel <= tol_rel <=> pass.
                    const double scale =
                        rel_floor +
                        std::max(std::abs(r.grad[k]), std::abs(fd[k]));
                    const double rel = std::abs(r.grad[k] - fd[k]) / scale;
                    if (rel > res.max_rel_err) {
                        res.max_rel_err = rel;
                        res.worst = WorstCase{kind, pred, gt, k};
                    }
                }
            }
        }
    };

    if (threads == 1 || n_chunks <= 1) {
        for (std::uint64_t c = 0; c < n_chunks; ++c) process_chunk(c);
    } else {
        std::vector<std::thread> pool;
        const int n_workers =
            static_cast<int>(std::min<std::uint64_t>(threads, n_chunks));
        for (int t = 0; t < n_workers; ++t) {
            pool.emplace_back([&, t]() {
                for (std::uint64_t c = t; c < n_chunks; c += n_workers) {
                    process_chunk(c);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    // Reduce in chunk (= pair index) order: ties on max_rel_err resolve to
    // the earliest pair, so the report is independent of thread count.
    GradCheckReport report;
    for (const ChunkResult& res : results) {
        report.pairs_tested += res.tested;
        report.pairs_skipped += res.skipped;
        if (res.max_rel_err > report.max_rel_err) {
            report.max_rel_err = res.max_rel_err;
            report.worst = res.worst;
        }
    }
    report.passed = report.max_rel_err <= cfg.tol_rel;
    return report;
}

}  // namespace bbr
