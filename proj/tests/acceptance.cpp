// Acceptance suite: one criterion per test, one [PASS]/[FAIL] line each.
// Run all with no arguments, or a single one with --criterion N.
// Criterion 9 shells out to the CLI named by $BBR_CLI_BIN.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bbr/box.hpp"
#include "bbr/losses.hpp"
#include "bbr/numcheck.hpp"
#include "bbr/simulation.hpp"

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using bbr::Box;
using bbr::LossKind;
using bbr::LossTag;

struct Checker {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& msg) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += msg;
        }
    }
    void note(const std::string& msg) {
        if (!detail.empty()) detail += "; ";
        detail += msg;
    }
};

double elapsed_s(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

class Sampler {
  public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}
    double u01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    Box box() {
        const double cx = -2.0 + 4.0 * u01();
        const double cy = -2.0 + 4.0 * u01();
        const double w = std::exp(std::log(0.1) + std::log(40.0) * u01());
        const double h = std::exp(std::log(0.1) + std::log(40.0) * u01());
        return Box{cx, cy, w, h};
    }

  private:
    std::mt19937_64 rng_;
};

// --------------------------------------------------------------------
// 1. gradient oracle: gradcheck over 10000 pairs, seed 42, all kinds

void criterion_1(Checker& c) {
    const auto t0 = Clock::now();
    const bbr::GradCheckReport r =
        bbr::run_gradcheck(bbr::all_kinds(), 10000, 42, bbr::FdConfig{});
    const double secs = elapsed_s(t0);
    c.require(r.passed, "gradcheck failed, max_rel_err=" + num(r.max_rel_err));
    c.require(r.max_rel_err <= 1e-6,
              "max_rel_err " + num(r.max_rel_err) + " > 1e-6");
    const double skip_frac =
        static_cast<double>(r.pairs_skipped) /
        static_cast<double>(r.pairs_tested + r.pairs_skipped);
    c.require(skip_frac < 0.02,
              "skipped fraction " + num(skip_frac) + " >= 2%");
    c.require(secs < 10.0, "runtime " + num(secs) + " s >= 10 s");
    c.note("max_rel_err=" + num(r.max_rel_err) + ", skipped " +
           std::to_string(r.pairs_skipped) + "/10000, " + num(secs) + " s");
}

// --------------------------------------------------------------------
// 2. see-saw identity on 1000 random pairs

void criterion_2(Checker& c) {
    const auto t0 = Clock::now();
    Sampler sampler(202);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Box pred = sampler.box();
        const Box gt = sampler.box();
        const bbr::AspectGrad g = bbr::aspect_penalty_grad(pred, gt);
        const double lhs = std::abs(pred.w * g.dv_dw + pred.h * g.dv_dh);
        const double bound =
            1e-12 * std::max(1.0, std::abs(pred.w * g.dv_dw));
        worst = std::max(worst, lhs);
        c.require(lhs <= bound, "pair " + std::to_string(i) + ": residual " +
                                    num(lhs) + " > bound " + num(bound));
        if (!c.ok) return;
    }
    const double secs = elapsed_s(t0);
    c.require(secs < 1.0, "runtime " + num(secs) + " s >= 1 s");
    c.note("worst |w*dv_dw + h*dv_dh| = " + num(worst) + ", " + num(secs) +
           " s");
}

// --------------------------------------------------------------------
// 3. CIoU scale-blindness: v == 0 exactly for pred = k*gt, k in {0.5,2,3}

void criterion_3(Checker& c) {
    const Box bases[] = {Box{0.25, -0.5, 1.25, 0.75}, Box{0.0, 0.0, 1.0, 2.0},
                         Box{1.5, 2.5, 0.5, 3.0}, Box{-0.75, 0.125, 2.0, 0.5}};
    for (const Box& gt : bases) {
        for (double k : {0.5, 2.0, 3.0}) {
            const Box pred{gt.cx, gt.cy, k * gt.w, k * gt.h};
            const bbr::CIoUInternals ci = bbr::ciou_internals(pred, gt);
            c.require(ci.v == 0.0,
                      "v != 0 at k=" + num(k) + " (v=" + num(ci.v) + ")");
            const bbr::PairGeometry g = bbr::pair_geometry(pred, gt);
            const double dw = pred.w - gt.w;
            const double dh = pred.h - gt.h;
            const double asp = dw * dw / (g.enc_w * g.enc_w) +
                               dh * dh / (g.enc_h * g.enc_h);
            c.require(asp > 0.0,
                      "aspect term not positive at k=" + num(k));
            const double eiou =
                bbr::loss_value(LossKind{LossTag::EIoU}, pred, gt);
            const double diou =
                bbr::loss_value(LossKind{LossTag::DIoU}, pred, gt);
            c.require(eiou - diou > 0.0, "eiou aspect penalty missing");
            const double neiou =
                bbr::loss_value(LossKind{LossTag::NEIoU, 9.0}, pred, gt);
            const double niou =
                bbr::loss_value(LossKind{LossTag::NIoU, 9.0}, pred, gt);
            c.require(neiou - niou > 0.0, "neiou aspect penalty missing");
        }
    }
    c.note("v == 0 exactly on 12 scaled pairs; aspect terms strictly "
           "positive");
}

// --------------------------------------------------------------------
// 4. N-IoU value on the offset unit squares

void criterion_4(Checker& c) {
    const Box pred{0.5, 0.5, 1.0, 1.0};
    const Box gt{1.0, 0.5, 1.0, 1.0};
    const double v = bbr::loss_value(LossKind{LossTag::NIoU, 9.0}, pred, gt);
    c.require(std::abs(v - 1.0 / 6.0) <= 1e-12,
              "value " + num(v) + " differs from 1/6");
    c.note("loss = " + num(v) + ", |loss - 1/6| = " +
           num(std::abs(v - 1.0 / 6.0)));
}

// --------------------------------------------------------------------
// 5. focusing contrast on the default translate sweep

void criterion_5(Checker& c) {
    const auto t0 = Clock::now();
    bbr::SweepConfig cfg;  // translate, 200 samples, unit-square target
    cfg.kinds = {LossKind{LossTag::IoU}, LossKind{LossTag::CIoU},
                 LossKind{LossTag::NIoU, 9.0}, LossKind{LossTag::NEIoU, 9.0}};
    const bbr::SweepReport rep = bbr::gradient_sweep(cfg);

    std::vector<bbr::SweepRow> iou, ciou, niou, neiou;
    for (const bbr::SweepRow& row : rep.rows) {
        if (row.kind == LossTag::IoU) iou.push_back(row);
        if (row.kind == LossTag::CIoU) ciou.push_back(row);
        if (row.kind == LossTag::NIoU) niou.push_back(row);
        if (row.kind == LossTag::NEIoU) neiou.push_back(row);
    }

    int in_range = 0, neiou_wins = 0, niou_wins = 0;
    double lowest_violation = 1.0, highest_hold = 0.0;
    for (std::size_t i = 0; i < iou.size(); ++i) {
        const double x = iou[i].iou;
        if (x < 0.1 || x > 0.4) continue;
        ++in_range;
        const bool a = neiou[i].grad_norm > ciou[i].grad_norm;
        const bool b = niou[i].grad_norm > iou[i].grad_norm;
        if (a) ++neiou_wins;
        if (b) ++niou_wins;
        if (a && b) {
            highest_hold = std::max(highest_hold, x);
        } else {
            lowest_violation = std::min(lowest_violation, x);
        }
    }
    c.require(in_range > 0, "no samples landed in [0.1, 0.4]");
    c.require(neiou_wins == in_range,
              "neiou > ciou holds at only " + std::to_string(neiou_wins) +
                  "/" + std::to_string(in_range) + " in-range samples");
    c.require(niou_wins == in_range,
              "niou > iou holds at only " + std::to_string(niou_wins) + "/" +
                  std::to_string(in_range) + " in-range samples");
    const double secs = elapsed_s(t0);
    c.require(secs < 1.0, "runtime " + num(secs) + " s >= 1 s");
    c.note("inequalities hold for achieved IoU <= " + num(highest_hold) +
           " and reverse from " + num(lowest_violation) +
           " up; the n=9 gain factor 10/(1+9x)^2 crosses 1 at x = "
           "(sqrt(10)-1)/9 = 0.24025");
}

// --------------------------------------------------------------------
// 6. simulation convergence under the default config

void criterion_6(Checker& c) {
    const auto t0 = Clock::now();
    bbr::SimConfig cfg;  // full defaults, single-threaded
    const bbr::SimReport rep = bbr::regression_sim(cfg);
    const double secs = elapsed_s(t0);

    double ciou_initial = -1.0, ciou_final = -1.0;
    double neiou_initial = -1.0, neiou_final = -1.0;
    for (const bbr::SimSeries& s : rep.series) {
        if (s.kind == LossTag::CIoU) {
            ciou_initial = s.total_error.front();
            ciou_final = s.total_error.back();
        }
        if (s.kind == LossTag::NEIoU) {
            neiou_initial = s.total_error.front();
            neiou_final = s.total_error.back();
        }
    }
    c.require(ciou_final >= 0.0 && neiou_final >= 0.0, "series missing");
    c.require(neiou_final <= ciou_final,
              "neiou final " + num(neiou_final) + " > ciou final " +
                  num(ciou_final));
    c.require(neiou_final < 0.5 * neiou_initial,
              "neiou final not below 50% of initial");
    c.require(ciou_final < 0.5 * ciou_initial,
              "ciou final not below 50% of initial");
    c.require(secs < 60.0, "runtime " + num(secs) + " s >= 60 s");
    c.note("neiou " + num(neiou_initial) + " -> " + num(neiou_final) +
           ", ciou " + num(ciou_initial) + " -> " + num(ciou_final) + ", " +
           num(secs) + " s");
}

// --------------------------------------------------------------------
// 7. zero at identity and non-negativity

void criterion_7(Checker& c) {
    Sampler sampler(707);
    for (int i = 0; i < 10000 && c.ok; ++i) {
        const Box pred = sampler.box();
        const Box gt = sampler.box();
        for (const LossKind& kind : bbr::all_kinds()) {
            const double v = bbr::loss_value(kind, pred, gt);
            c.require(v >= 0.0 && std::isfinite(v),
                      std::string("negative/non-finite ") +
                          bbr::kind_name(kind.tag) + " at pair " +
                          std::to_string(i));
        }
    }
    Sampler bsampler(708);
    for (int i = 0; i < 1000 && c.ok; ++i) {
        const Box b = bsampler.box();
        for (const LossKind& kind : bbr::all_kinds()) {
            const bbr::LossResult r = bbr::loss(kind, b, b);
            c.require(std::abs(r.value) <= 1e-12,
                      std::string(bbr::kind_name(kind.tag)) +
                          " value not 0 at identity");
            for (double g : r.grad) {
                c.require(std::abs(g) <= 1e-12,
                          std::string(bbr::kind_name(kind.tag)) +
                              " gradient not 0 at identity");
            }
        }
    }
    c.note("10000 pairs non-negative, 1000 identities exactly zero");
}

// --------------------------------------------------------------------
// 8. decomposition identity on 1000 random pairs

void criterion_8(Checker& c) {
    Sampler sampler(808);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Box pred = sampler.box();
        const Box gt = sampler.box();
        const double neiou =
            bbr::loss_value(LossKind{LossTag::NEIoU, 9.0}, pred, gt);
        const double niou =
            bbr::loss_value(LossKind{LossTag::NIoU, 9.0}, pred, gt);
        const double eiou = bbr::loss_value(LossKind{LossTag::EIoU}, pred, gt);
        const double iou_l = bbr::loss_value(LossKind{LossTag::IoU}, pred, gt);
        const double resid = std::abs(neiou - (niou + (eiou - iou_l)));
        worst = std::max(worst, resid);
        c.require(resid <= 1e-12,
                  "pair " + std::to_string(i) + " residual " + num(resid));
        if (!c.ok) return;
    }
    c.note("worst residual " + num(worst));
}

// --------------------------------------------------------------------
// 9. byte-identical CSV outputs across reruns and thread counts

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_9(Checker& c) {
    const char* cli = std::getenv("BBR_CLI_BIN");
    if (!cli || !fs::exists(cli)) {
        c.require(false,
                  "BBR_CLI_BIN not set or missing (run through ctest, or "
                  "export BBR_CLI_BIN=<path to bbr-loss-lab>)");
        return;
    }
    const fs::path base =
        fs::temp_directory_path() /
        ("bbr_accept9_" + std::to_string(static_cast<long>(::getpid())));
    fs::remove_all(base);
    fs::create_directories(base);

    auto run = [&](const std::string& args, const std::string& sub) {
        const fs::path dir = base / sub;
        fs::create_directories(dir);
        const std::string cmd = std::string(cli) + " " + args + " --out " +
                                dir.string() + " >/dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        c.require(rc == 0, "command failed: " + cmd);
        return dir;
    };

    const std::string sweep_args = "sweep --samples 60 --format both";
    const std::string sim_args =
        "simulate --radii 0.4,1.1 --points-per-ring 5 --scales 1,1.5 "
        "--aspect-ratios 0.5,1 --iterations 25 --seed 1";
    const std::string gc_args = "gradcheck --pairs 600 --seed 42 --format csv";

    const fs::path s1 = run(sweep_args, "s1");
    const fs::path s2 = run(sweep_args, "s2");
    c.require(slurp(s1 / "sweep_translate.csv") ==
                  slurp(s2 / "sweep_translate.csv"),
              "sweep csv differs between identical runs");
    c.require(slurp(s1 / "sweep_translate.svg") ==
                  slurp(s2 / "sweep_translate.svg"),
              "sweep svg differs between identical runs");

    const fs::path m1 = run(sim_args + " --threads 1", "m1");
    const fs::path m2 = run(sim_args + " --threads 1", "m2");
    const fs::path m4 = run(sim_args + " --threads 4", "m4");
    const std::string sim_csv = slurp(m1 / "sim_error.csv");
    c.require(!sim_csv.empty(), "sim csv missing");
    c.require(sim_csv == slurp(m2 / "sim_error.csv"),
              "sim csv differs between identical runs");
    c.require(sim_csv == slurp(m4 / "sim_error.csv"),
              "sim csv differs under parallel execution");

    const fs::path g1 = run(gc_args + " --threads 1", "g1");
    const fs::path g2 = run(gc_args + " --threads 1", "g2");
    const fs::path g4 = run(gc_args + " --threads 4", "g4");
    const std::string gc_csv = slurp(g1 / "gradcheck.csv");
    c.require(!gc_csv.empty(), "gradcheck csv missing");
    c.require(gc_csv == slurp(g2 / "gradcheck.csv"),
              "gradcheck csv differs between identical runs");
    c.require(gc_csv == slurp(g4 / "gradcheck.csv"),
              "gradcheck csv differs under parallel execution");

    fs::remove_all(base);
    c.note("sweep/simulate/gradcheck byte-identical, threads 1 == 4");
}

// --------------------------------------------------------------------
// 10. closed-form N-IoU property on 10000 random (I, U)

void criterion_10(Checker& c) {
    Sampler sampler(1010);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = 0.01 + 9.99 * sampler.u01();
        const double inter = u * sampler.u01();
        const double x = inter / u;
        const double metric = bbr::niou_metric(inter, u, 9.0);
        const double closed = 10.0 * x / (1.0 + 9.0 * x);
        const double diff = std::abs(metric - closed);
        worst = std::max(worst, diff / std::max(1.0, std::abs(closed)));
        c.require(diff <= 1e-12 * std::max(1.0, std::abs(closed)),
                  "mismatch at I=" + num(inter) + " U=" + num(u));
        if (!c.ok) return;
    }
    c.note("worst relative deviation " + num(worst));
}

struct Criterion {
    int id;
    const char* name;
    std::function<void(Checker&)> run;
};

const Criterion kCriteria[] = {
    {1, "gradient oracle (10000 pairs, seed 42, all seven losses)",
     criterion_1},
    {2, "see-saw identity on 1000 random pairs", criterion_2},
    {3, "ciou scale-blindness vs eiou/neiou aspect sensitivity", criterion_3},
    {4, "n-iou value 1/6 on the offset unit squares", criterion_4},
    {5, "focusing contrast on the default translate sweep, IoU in [0.1,0.4]",
     criterion_5},
    {6, "simulation convergence, neiou <= ciou and both < 50% of initial",
     criterion_6},
    {7, "zero at identity and non-negativity", criterion_7},
    {8, "n-eiou decomposition identity", criterion_8},
    {9, "byte-identical csv outputs (reruns and parallel execution)",
     criterion_9},
    {10, "closed-form n-iou property on 10000 random (I, U)", criterion_10},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else if (arg == "--help") {
            std::printf("usage: bbr_acceptance [--criterion N]\n");
            return 0;
        }
    }

    int failures = 0;
    for (const Criterion& cr : kCriteria) {
        if (only != 0 && cr.id != only) continue;
        Checker c;
        try {
            cr.run(c);
        } catch (const std::exception& e) {
            c.require(false, std::string("exception: ") + e.what());
        }
        std::printf("[%s] criterion %2d: %s%s%s\n", c.ok ? "PASS" : "FAIL",
                    cr.id, cr.name, c.detail.empty() ? "" : " — ",
                    c.detail.c_str());
        std::fflush(stdout);
        if (!c.ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
