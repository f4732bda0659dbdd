#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bbr/box.hpp"
#include "bbr/losses.hpp"
#include "bbr/numcheck.hpp"
#include "bbr/report.hpp"
#include "bbr/simulation.hpp"
#include "bbr/version.hpp"

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

std::vector<double> parse_doubles(const std::string& text, char sep) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw std::invalid_argument("cannot parse number '" + item +
                                        "' in '" + text + "'");
        }
    }
    return out;
}

bbr::Box parse_box(const std::string& text, bool corners) {
    const std::vector<double> v = parse_doubles(text, ',');
    if (v.size() != 4) {
        throw std::invalid_argument("box '" + text +
                                    "' must have exactly 4 comma-separated "
                                    "values");
    }
    return corners ? bbr::box_from_corners(v[0], v[1], v[2], v[3])
                   : bbr::make_box(v[0], v[1], v[2], v[3]);
}

std::vector<bbr::LossKind> parse_kinds(const std::vector<std::string>& names,
                                       double n) {
    if (names.empty()) return bbr::all_kinds(n);
    std::vector<bbr::LossKind> out;
    out.reserve(names.size());
    for (const std::string& name : names) {
        out.push_back(bbr::LossKind{bbr::parse_loss_tag(name), n});
    }
    return out;
}

std::string kinds_csv(const std::vector<bbr::LossKind>& kinds) {
    std::string s;
    for (const bbr::LossKind& k : kinds) {
        if (!s.empty()) s += ',';
        s += bbr::kind_name(k.tag);
    }
    return s;
}

fs::path resolve_out_dir(const std::string& flag_value) {
    std::string dir = flag_value;
    if (dir.empty()) {
        if (const char* env = std::getenv("BBR_LOSS_LAB_OUT")) dir = env;
    }
    if (dir.empty()) dir = ".";
    fs::create_directories(dir);
    return dir;
}

std::string joined(const std::vector<double>& v) {
    std::string s;
    for (double x : v) {
        if (!s.empty()) s += ',';
        s += fmt(x);
    }
    return s;
}

struct CommonOpts {
    std::vector<std::string> kind_names;
    double n = 9.0;
    std::string out_dir;
    std::string format = "csv";
};

void add_kind_options(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--kinds", o.kind_names,
                    "losses to evaluate (iou, giou, diou, ciou, eiou, niou, "
                    "neiou; default: all seven)")
        ->delimiter(',');
    cmd->add_option("--n", o.n,
                    "focusing constant for niou/neiou (dimensionless)")
                    ->capture_default_str();
}

// ---------------------------------------------------------------- eval

struct EvalOpts : CommonOpts {
    std::string pred, gt;
    bool corners = false;
    bool csv = false;
};

int run_eval(const EvalOpts& o) {
    const bbr::Box pred = parse_box(o.pred, o.corners);
    const bbr::Box gt = parse_box(o.gt, o.corners);
    const std::vector<bbr::LossKind> kinds = parse_kinds(o.kind_names, o.n);
    const bbr::PairGeometry g = bbr::pair_geometry(pred, gt);

    std::cout << "# pred=" << o.pred << (o.corners ? " (corners)" : "")
              << " gt=" << o.gt << "\n";
    std::cout << "# iou=" << fmt(g.iou) << " rho_sq=" << fmt(g.center_dist_sq)
              << " c_sq=" << fmt(g.enc_diag_sq) << " enc_w=" << fmt(g.enc_w)
              << " enc_h=" << fmt(g.enc_h) << "\n";
    std::cout << "kind    value                  d_cx                   "
                 "d_cy                   d_w                    d_h\n";

    bbr::CsvTable table;
    table.metadata = {std::string("tool=bbr-loss-lab ") + bbr::kVersion,
                      "subcommand=eval",
                      "pred=" + o.pred,
                      "gt=" + o.gt,
                      std::string("corners=") + (o.corners ? "1" : "0"),
                      "kinds=" + kinds_csv(kinds),
                      "n=" + fmt(o.n)};
    table.header = {"kind", "value", "d_cx",   "d_cy", "d_w",
                    "d_h",  "iou",   "rho_sq", "c_sq", "enc_w",
                    "enc_h"};
    for (const bbr::LossKind& kind : kinds) {
        const bbr::LossResult r = bbr::loss(kind, pred, gt);
        std::cout << std::left;
        std::cout.width(8);
        std::cout << bbr::kind_name(kind.tag);
        for (double v : {r.value, r.grad[0], r.grad[1], r.grad[2]}) {
            std::string s = fmt(v);
            s.resize(22, ' ');
            std::cout << ' ' << s;
        }
        std::cout << ' ' << fmt(r.grad[3]) << "\n";
        table.rows.push_back({std::string(bbr::kind_name(kind.tag)), r.value,
                              r.grad[0], r.grad[1], r.grad[2], r.grad[3],
                              g.iou, g.center_dist_sq, g.enc_diag_sq,
                              g.enc_w, g.enc_h});
    }
    if (o.csv) {
        const fs::path path = resolve_out_dir(o.out_dir) / "eval.csv";
        bbr::write_csv(table, path);
        std::cout << "wrote " << path.string() << "\n";
    }
    return 0;
}

// ------------------------------------------------------------ gradcheck

struct GradcheckOpts : CommonOpts {
    std::uint64_t pairs = 10000;
    std::uint64_t seed = 0;
    bbr::FdConfig fd;
    int threads = 1;
};

int run_gradcheck(const GradcheckOpts& o) {
    const std::vector<bbr::LossKind> kinds = parse_kinds(o.kind_names, o.n);
    const bbr::GradCheckReport r =
        bbr::run_gradcheck(kinds, o.pairs, o.seed, o.fd, o.threads);

    std::cout << "gradcheck: kinds=" << kinds_csv(kinds)
              << " pairs=" << o.pairs << " seed=" << o.seed << "\n";
    std::cout << "tested=" << r.pairs_tested << " skipped=" << r.pairs_skipped
              << " max_rel_err=" << fmt(r.max_rel_err)
              << " tol_rel=" << fmt(o.fd.tol_rel)
              << " tol_abs=" << fmt(o.fd.tol_abs) << "\n";
    if (r.worst.component >= 0) {
        const char* comp_names[] = {"cx", "cy", "w", "h"};
        std::cout << "worst: kind=" << bbr::kind_name(r.worst.kind.tag)
                  << " component=" << comp_names[r.worst.component]
                  << " pred=" << fmt(r.worst.pred.cx) << ','
                  << fmt(r.worst.pred.cy) << ',' << fmt(r.worst.pred.w) << ','
                  << fmt(r.worst.pred.h) << " gt=" << fmt(r.worst.gt.cx)
                  << ',' << fmt(r.worst.gt.cy) << ',' << fmt(r.worst.gt.w)
                  << ',' << fmt(r.worst.gt.h) << "\n";
    }
    std::cout << (r.passed ? "PASSED" : "FAILED") << "\n";

    if (o.format == "csv" || o.format == "both") {
        std::vector<std::string> meta = {
            std::string("tool=bbr-loss-lab ") + bbr::kVersion,
            "subcommand=gradcheck",
            "kinds=" + kinds_csv(kinds),
            "n=" + fmt(o.n),
            "pairs=" + std::to_string(o.pairs),
            "seed=" + std::to_string(o.seed),
            "step_rel=" + fmt(o.fd.step_rel),
            "tol_rel=" + fmt(o.fd.tol_rel),
            "tol_abs=" + fmt(o.fd.tol_abs),
            "exclusion_margin=" + fmt(o.fd.exclusion_margin)};
        const fs::path path = resolve_out_dir(o.out_dir) / "gradcheck.csv";
        bbr::write_csv(bbr::gradcheck_table(r, std::move(meta)), path);
        std::cout << "wrote " << path.string() << "\n";
    }
    return r.passed ? 0 : 1;
}

// ---------------------------------------------------------------- sweep

struct SweepOpts : CommonOpts {
    std::string mode = "translate";
    int samples = 200;
    std::string target = "0,0,1,1";
    bool log_y = false;
};

int run_sweep(const SweepOpts& o) {
    bbr::SweepConfig cfg;
    cfg.mode = bbr::parse_sweep_mode(o.mode);
    cfg.samples = o.samples;
    cfg.target = parse_box(o.target, false);
    cfg.kinds = parse_kinds(o.kind_names, o.n);
    const bbr::SweepReport report = bbr::gradient_sweep(cfg);

    std::vector<std::string> meta = {
        std::string("tool=bbr-loss-lab ") + bbr::kVersion,
        "subcommand=sweep",
        "mode=" + o.mode,
        "samples=" + std::to_string(o.samples),
        "target=" + o.target,
        "kinds=" + kinds_csv(cfg.kinds),
        "n=" + fmt(o.n),
        "gradient_magnitude=euclidean norm of (d_cx,d_cy,d_w,d_h)"};

    const fs::path dir = resolve_out_dir(o.out_dir);
    const bbr::CsvTable table = bbr::sweep_table(report, std::move(meta));
    const fs::path csv_path = dir / ("sweep_" + o.mode + ".csv");
    bbr::write_csv(table, csv_path);
    std::cout << "wrote " << csv_path.string() << "\n";

    if (o.format == "svg" || o.format == "both") {
        bbr::PlotSpec spec;
        spec.title = "gradient magnitude vs IoU (" + o.mode + " sweep)";
        spec.x_column = "iou";
        spec.x_label = "achieved IoU";
        spec.y_column = "grad_norm";
        spec.y_label = "gradient magnitude";
        spec.log_y = o.log_y;
        const fs::path svg_path = dir / ("sweep_" + o.mode + ".svg");
        bbr::render_svg(table, spec, svg_path);
        std::cout << "wrote " << svg_path.string() << "\n";
    }
    return 0;
}

// ------------------------------------------------------------- simulate

struct SimulateOpts : CommonOpts {
    int iterations = 200;
    double step = 0.1;
    double step_decay = 1.0;
    std::vector<double> radii = {0.3, 0.6, 1.0, 1.5, 2.0, 2.5, 3.0};
    int points_per_ring = 16;
    std::vector<double> scales = {0.5, 0.67, 0.75, 1.0, 1.33, 1.5, 2.0};
    std::vector<double> ratios = {0.25, 1.0 / 3.0, 0.5, 1.0, 2.0, 3.0, 4.0};
    double jitter = 0.0;
    std::string targets;  // optional "cx,cy,w,h;..." override
    std::uint64_t seed = 0;
    int threads = 1;
    bool log_y = false;
};

int run_simulate(const SimulateOpts& o) {
    bbr::SimConfig cfg;
    cfg.iterations = o.iterations;
    cfg.step_size = o.step;
    cfg.step_decay = o.step_decay;
    cfg.layout.ring_radii = o.radii;
    cfg.layout.points_per_ring = o.points_per_ring;
    cfg.layout.scales = o.scales;
    cfg.layout.aspect_ratios = o.ratios;
    cfg.layout.center_jitter = o.jitter;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.kinds = parse_kinds(o.kind_names, o.n);
    if (!o.targets.empty()) {
        cfg.targets.clear();
        std::stringstream ss(o.targets);
        std::string one;
        while (std::getline(ss, one, ';')) {
            cfg.targets.push_back(parse_box(one, false));
        }
    }
    const bbr::SimReport report = bbr::regression_sim(cfg);

    std::vector<std::string> meta = {
        std::string("tool=bbr-loss-lab ") + bbr::kVersion,
        "subcommand=simulate",
        "kinds=" + kinds_csv(cfg.kinds),
        "n=" + fmt(o.n),
        "iterations=" + std::to_string(o.iterations),
        "step=" + fmt(o.step),
        "step_decay=" + fmt(o.step_decay),
        "ring_radii=" + joined(o.radii),
        "points_per_ring=" + std::to_string(o.points_per_ring),
        "scales=" + joined(o.scales),
        "aspect_ratios=" + joined(o.ratios),
        "jitter=" + fmt(o.jitter),
        "targets=" + (o.targets.empty() ? std::string("default7") : o.targets),
        "seed=" + std::to_string(o.seed),
        "pairs=" + std::to_string(report.pair_count),
        "error_metric=L1 over corner coordinates, summed over pairs",
        "protocol=fixed-step gradient descent, w/h clamped at 1e-3"};

    const fs::path dir = resolve_out_dir(o.out_dir);
    const bbr::CsvTable table = bbr::sim_table(report, std::move(meta));
    const fs::path csv_path = dir / "sim_error.csv";
    bbr::write_csv(table, csv_path);
    std::cout << "wrote " << csv_path.string() << "\n";

    if (o.format == "svg" || o.format == "both") {
        bbr::PlotSpec spec;
        spec.title = "anchor regression: total corner error per iteration";
        spec.x_column = "iteration";
        spec.x_label = "iteration";
        spec.y_column = "total_error";
        spec.y_label = "total corner error";
        spec.log_y = o.log_y;
        const fs::path svg_path = dir / "sim_error.svg";
        bbr::render_svg(table, spec, svg_path);
        std::cout << "wrote " << svg_path.string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bbr-loss-lab: IoU-family bounding-box regression losses "
                 "with analytic gradients, a finite-difference oracle, and "
                 "the gradient sweep / anchor regression experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", bbr::kVersion);
    app.set_config("--config", "",
                   "key=value config file; flags take precedence, "
                   "subcommand keys go in a [subcommand] section");

    EvalOpts eval_opts;
    CLI::App* eval = app.add_subcommand(
        "eval", "evaluate losses and gradients for one box pair");
    eval->add_option("--pred", eval_opts.pred,
                     "predicted box, cx,cy,w,h (length units)")
        ->required();
    eval->add_option("--gt", eval_opts.gt, "ground-truth box, cx,cy,w,h")
        ->required();
    eval->add_flag("--corners", eval_opts.corners,
                   "interpret both boxes as corner form x1,y1,x2,y2");
    add_kind_options(eval, eval_opts);
    eval->add_flag("--csv", eval_opts.csv, "also write eval.csv to --out");
    eval->add_option("--out", eval_opts.out_dir,
                     "output directory (default: $BBR_LOSS_LAB_OUT or .)");

    GradcheckOpts gc_opts;
    gc_opts.format = "none";
    CLI::App* gc = app.add_subcommand(
        "gradcheck",
        "compare analytic gradients against central finite differences on "
        "random pairs");
    gc->add_option("--pairs", gc_opts.pairs, "number of random pairs")->capture_default_str();
    gc->add_option("--seed", gc_opts.seed, "RNG seed")->capture_default_str();
    add_kind_options(gc, gc_opts);
    gc->add_option("--step-rel", gc_opts.fd.step_rel,
                   "FD step relative to max(|coordinate|, 1)")->capture_default_str();
    gc->add_option("--tol-rel", gc_opts.fd.tol_rel, "relative tolerance")
                   ->capture_default_str();
    gc->add_option("--tol-abs", gc_opts.fd.tol_abs, "absolute floor")->capture_default_str();
    gc->add_option("--margin", gc_opts.fd.exclusion_margin,
                   "skip radius around non-smooth configurations "
                   "(length units)")
                   ->capture_default_str();
    gc->add_option("--threads", gc_opts.threads,
                   "worker threads (report is thread-count independent)")
                   ->capture_default_str();
    gc->add_option("--format", gc_opts.format,
                   "none|csv: optionally write gradcheck.csv")->capture_default_str()
        ->check(CLI::IsMember({"none", "csv"}));
    gc->add_option("--out", gc_opts.out_dir, "output directory");

    SweepOpts sweep_opts;
    CLI::App* sweep = app.add_subcommand(
        "sweep", "gradient magnitude along a one-parameter box family");
    sweep->add_option("--mode", sweep_opts.mode,
                      "translate|scale|translate_diagonal")->capture_default_str()
        ->check(CLI::IsMember({"translate", "scale", "translate_diagonal"}));
    sweep->add_option("--samples", sweep_opts.samples,
                      "number of offsets sampled (>= 2)")->capture_default_str();
    sweep->add_option("--target", sweep_opts.target,
                      "target box, cx,cy,w,h")->capture_default_str();
    add_kind_options(sweep, sweep_opts);
    sweep->add_option("--format", sweep_opts.format, "csv|svg|both")->capture_default_str()
        ->check(CLI::IsMember({"csv", "svg", "both"}));
    sweep->add_flag("--log-y,!--no-log-y", sweep_opts.log_y,
                    "log-scale y axis in the SVG");
    sweep->add_option("--out", sweep_opts.out_dir, "output directory");

    SimulateOpts sim_opts;
    CLI::App* sim = app.add_subcommand(
        "simulate",
        "gradient-descend ring-layout anchors onto targets under each loss");
    sim->add_option("--iterations", sim_opts.iterations,
                    "descent iterations")->capture_default_str();
    sim->add_option("--step", sim_opts.step, "descent step size")->capture_default_str();
    sim->add_option("--step-decay", sim_opts.step_decay,
                    "per-iteration step multiplier in (0,1]")->capture_default_str();
    sim->add_option("--radii", sim_opts.radii,
                    "anchor ring radii (length units)")->capture_default_str()
        ->delimiter(',');
    sim->add_option("--points-per-ring", sim_opts.points_per_ring,
                    "anchor positions per ring")->capture_default_str();
    sim->add_option("--scales", sim_opts.scales,
                    "anchor areas relative to the target")->capture_default_str()
        ->delimiter(',');
    sim->add_option("--aspect-ratios", sim_opts.ratios,
                    "anchor aspect ratios (w/h)")->capture_default_str()
        ->delimiter(',');
    sim->add_option("--jitter", sim_opts.jitter,
                    "uniform center jitter amplitude (0 = off)")->capture_default_str();
    sim->add_option("--targets", sim_opts.targets,
                    "semicolon-separated target boxes cx,cy,w,h "
                    "(default: 7 unit-area aspect ratios)");
    sim->add_option("--seed", sim_opts.seed,
                    "RNG seed (used only when --jitter > 0)")->capture_default_str();
    add_kind_options(sim, sim_opts);
    sim->add_option("--threads", sim_opts.threads,
                    "worker threads (totals are thread-count independent)")
                    ->capture_default_str();
    sim->add_option("--format", sim_opts.format, "csv|svg|both")->capture_default_str()
        ->check(CLI::IsMember({"csv", "svg", "both"}));
    sim->add_flag("--log-y,!--no-log-y", sim_opts.log_y,
                  "log-scale y axis in the SVG");
    sim->add_option("--out", sim_opts.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (eval->parsed()) return run_eval(eval_opts);
        if (gc->parsed()) return run_gradcheck(gc_opts);
        if (sweep->parsed()) return run_sweep(sweep_opts);
        if (sim->parsed()) return run_simulate(sim_opts);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
