#include "bbr/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "bbr/numcheck.hpp"

namespace bbr {

namespace {

void validate_kinds(const std::vector<LossKind>& kinds) {
    if (kinds.empty()) {
        throw std::invalid_argument("at least one loss kind is required");
    }
}

// Canonical row/series order: by tag, then by n for repeated tags.
std::vector<LossKind> sorted_kinds(std::vector<LossKind> kinds) {
    std::stable_sort(kinds.begin(), kinds.end(),
                     [](const LossKind& a, const LossKind& b) {
                         if (a.tag != b.tag) return a.tag < b.tag;
                         return a.n < b.n;
                     });
    return kinds;
}

Box sweep_pred(const SweepConfig& cfg, double offset) {
    const Box& t = cfg.target;
    switch (cfg.mode) {
        case SweepMode::Translate:
            return Box{t.cx + offset, t.cy, t.w, t.h};
        case SweepMode::Scale:
            return Box{t.cx, t.cy, offset * t.w, offset * t.h};
        case SweepMode::TranslateDiagonal:
            return Box{t.cx + offset, t.cy + offset, t.w, t.h};
    }
    return t;
}

std::pair<double, double> sweep_range(const SweepConfig& cfg) {
    const Box& t = cfg.target;
    switch (cfg.mode) {
        case SweepMode::Translate:
            return {0.0, t.w};  // (w_pred + w_gt)/2 with equal sizes
        case SweepMode::Scale:
            return {0.2, 2.0};
        case SweepMode::TranslateDiagonal:
            return {0.0, std::min(t.w, t.h)};
    }
    return {0.0, 1.0};
}

}  // namespace

const char* sweep_mode_name(SweepMode mode) {
    switch (mode) {
        case SweepMode::Translate: return "translate";
        case SweepMode::Scale: return "scale";
        case SweepMode::TranslateDiagonal: return "translate_diagonal";
    }
    return "?";
}

SweepMode parse_sweep_mode(std::string_view name) {
    if (name == "translate") return SweepMode::Translate;
    if (name == "scale") return SweepMode::Scale;
    if (name == "translate_diagonal") return SweepMode::TranslateDiagonal;
    throw std::invalid_argument("unknown sweep mode '" + std::string(name) +
                                "' (expected translate, scale, or "
                                "translate_diagonal)");
}

SweepReport gradient_sweep(const SweepConfig& cfg) {
    if (cfg.samples < 2) {
        throw std::invalid_argument("sweep requires samples >= 2");
    }
    validate_kinds(cfg.kinds);

    SweepReport report;
    report.config = cfg;
    report.rows.reserve(cfg.kinds.size() *
                        static_cast<std::size_t>(cfg.samples));

    const auto [lo, hi] = sweep_range(cfg);
    for (const LossKind& kind : sorted_kinds(cfg.kinds)) {
        for (int i = 0; i < cfg.samples; ++i) {
            const double offset =
                lo + (hi - lo) * static_cast<double>(i) /
                         static_cast<double>(cfg.samples - 1);
            const Box pred = sweep_pred(cfg, offset);
            const LossResult r = loss(kind, pred, cfg.target);
            SweepRow row;
            row.kind = kind.tag;
            row.n = kind.n;
            row.offset = offset;
            row.iou = iou(pred, cfg.target);
            row.value = r.value;
            row.grad = r.grad;
            row.grad_norm =
                std::sqrt(r.grad[0] * r.grad[0] + r.grad[1] * r.grad[1] +
                          r.grad[2] * r.grad[2] + r.grad[3] * r.grad[3]);
            report.rows.push_back(row);
        }
    }
    return report;
}

std::vector<Box> default_targets() {
    const double ratios[] = {0.25, 1.0 / 3.0, 0.5, 1.0, 2.0, 3.0, 4.0};
    std::vector<Box> out;
    out.reserve(std::size(ratios));
    for (double r : ratios) {
        out.push_back(Box{0.0, 0.0, std::sqrt(r), 1.0 / std::sqrt(r)});
    }
    return out;
}

std::vector<Box> build_anchors(const AnchorLayout& layout,
                               std::uint64_t seed) {
    if (layout.points_per_ring < 1 || layout.ring_radii.empty() ||
        layout.scales.empty() || layout.aspect_ratios.empty()) {
        throw std::invalid_argument("anchor layout must be non-empty");
    }
    for (double r : layout.ring_radii) {
        if (!(r >= 0.0)) throw std::invalid_argument("ring radii must be >= 0");
    }
    for (double s : layout.scales) {
        if (!(s > 0.0)) throw std::invalid_argument("scales must be > 0");
    }
    for (double a : layout.aspect_ratios) {
        if (!(a > 0.0)) {
            throw std::invalid_argument("aspect ratios must be > 0");
        }
    }

    std::mt19937_64 rng(seed);
    std::vector<Box> anchors;
    anchors.reserve(layout.ring_radii.size() *
                    static_cast<std::size_t>(layout.points_per_ring) *
                    layout.scales.size() * layout.aspect_ratios.size());
    for (double radius : layout.ring_radii) {
        for (int p = 0; p < layout.points_per_ring; ++p) {
            const double angle = 2.0 * std::numbers::pi *
                                 static_cast<double>(p) /
                                 static_cast<double>(layout.points_per_ring);
            double cx = radius * std::cos(angle);
            double cy = radius * std::sin(angle);
            if (layout.center_jitter > 0.0) {
                cx += layout.center_jitter *
                      (2.0 * detail::u01(rng()) - 1.0);
                cy += layout.center_jitter *
                      (2.0 * detail::u01(rng()) - 1.0);
            }
            for (double scale : layout.scales) {
                for (double ratio : layout.aspect_ratios) {
                    // area = scale (relative to the unit-area targets)
                    const double w = std::sqrt(scale * ratio);
                    const double h = std::sqrt(scale / ratio);
                    anchors.push_back(Box{cx, cy, w, h});
                }
            }
        }
    }
    return anchors;
}

double corner_error(const Box& a, const Box& b) {
    return std::abs(a.x1() - b.x1()) + std::abs(a.y1() - b.y1()) +
           std::abs(a.x2() - b.x2()) + std::abs(a.y2() - b.y2());
}

SimReport regression_sim(const SimConfig& cfg) {
    if (cfg.iterations < 0) {
        throw std::invalid_argument("iterations must be >= 0");
    }
    if (!(cfg.step_size > 0.0)) {
        throw std::invalid_argument("step_size must be > 0");
    }
    if (!(cfg.step_decay > 0.0) || cfg.step_decay > 1.0) {
        throw std::invalid_argument("step_decay must be in (0, 1]");
    }
    if (cfg.targets.empty()) {
        throw std::invalid_argument("at least one target is required");
    }
    validate_kinds(cfg.kinds);

    const std::vector<Box> anchors = build_anchors(cfg.layout, cfg.seed);
    const std::size_t n_pairs = anchors.size() * cfg.targets.size();
    const std::size_t n_iters = static_cast<std::size_t>(cfg.iterations);
    const int threads = std::max(1, cfg.threads);
    constexpr double kMinSize = 1e-3;

    SimReport report;
    report.config = cfg;
    report.pair_count = n_pairs;

    // (target-major, anchor) pair order; fixed-size chunks make the
    // per-iteration totals independent of the thread count.
    constexpr std::size_t kChunk = 64;
    const std::size_t n_chunks = (n_pairs + kChunk - 1) / kChunk;

    for (const LossKind& kind : sorted_kinds(cfg.kinds)) {
        std::vector<std::vector<double>> chunk_totals(
            n_chunks, std::vector<double>(n_iters + 1, 0.0));
        std::vector<double> finals(n_pairs, 0.0);

        auto run_chunk = [&](std::size_t c) {
            std::vector<double>& totals = chunk_totals[c];
            const std::size_t lo = c * kChunk;
            const std::size_t hi = std::min(n_pairs, lo + kChunk);
            for (std::size_t idx = lo; idx < hi; ++idx) {
                const Box& target = cfg.targets[idx / anchors.size()];
                Box box = anchors[idx % anchors.size()];
                double err = corner_error(box, target);
                totals[0] += err;
                double step = cfg.step_size;
                for (std::size_t it = 1; it <= n_iters; ++it) {
                    const LossResult r = loss(kind, box, target);
                    box.cx -= step * r.grad[0];
                    box.cy -= step * r.grad[1];
                    box.w = std::max(box.w - step * r.grad[2], kMinSize);
                    box.h = std::max(box.h - step * r.grad[3], kMinSize);
                    err = corner_error(box, target);
                    totals[it] += err;
                    step *= cfg.step_decay;
                }
                finals[idx] = err;
            }
        };

        if (threads == 1 || n_chunks <= 1) {
            for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
        } else {
            std::vector<std::thread> pool;
            const std::size_t n_workers =
                std::min<std::size_t>(threads, n_chunks);
            for (std::size_t t = 0; t < n_workers; ++t) {
                pool.emplace_back([&, t]() {
                    for (std::size_t c = t; c < n_chunks; c += n_workers) {
                        run_chunk(c);
                    }
                });
            }
            for (auto& th : pool) th.join();
        }

        SimSeries series;
        series.kind = kind.tag;
        series.n = kind.n;
        series.total_error.assign(n_iters + 1, 0.0);
        for (std::size_t c = 0; c < n_chunks; ++c) {
            for (std::size_t it = 0; it <= n_iters; ++it) {
                series.total_error[it] += chunk_totals[c][it];
            }
        }
        series.final_errors = std::move(finals);
        report.series.push_back(std::move(series));
    }
    return report;
}

}  // namespace bbr
