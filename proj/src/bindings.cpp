#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "bbr/box.hpp"
#include "bbr/losses.hpp"
#include "bbr/numcheck.hpp"
#include "bbr/report.hpp"
#include "bbr/simulation.hpp"
#include "bbr/version.hpp"

namespace py = pybind11;

namespace {

bbr::LossKind make_kind(const std::string& name, double n) {
    return bbr::LossKind{bbr::parse_loss_tag(name), n};
}

std::vector<bbr::LossKind> kinds_from_names(
    const std::vector<std::string>& names, double n) {
    if (names.empty()) return bbr::all_kinds(n);
    std::vector<bbr::LossKind> out;
    out.reserve(names.size());
    for (const std::string& s : names) out.push_back(make_kind(s, n));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "IoU-family bounding-box regression losses with analytic "
              "gradients, finite-difference checking, and the gradient "
              "sweep / anchor regression experiments";
    m.attr("__version__") = bbr::kVersion;

    py::class_<bbr::Box>(m, "Box")
        .def(py::init([](double cx, double cy, double w, double h) {
                 return bbr::make_box(cx, cy, w, h);
             }),
             py::arg("cx"), py::arg("cy"), py::arg("w"), py::arg("h"))
        .def_readonly("cx", &bbr::Box::cx)
        .def_readonly("cy", &bbr::Box::cy)
        .def_readonly("w", &bbr::Box::w)
        .def_readonly("h", &bbr::Box::h)
        .def("area", &bbr::Box::area)
        .def("corners",
             [](const bbr::Box& b) {
                 return py::make_tuple(b.x1(), b.y1(), b.x2(), b.y2());
             })
        .def("__repr__", [](const bbr::Box& b) {
            return "Box(cx=" + std::to_string(b.cx) +
                   ", cy=" + std::to_string(b.cy) +
                   ", w=" + std::to_string(b.w) +
                   ", h=" + std::to_string(b.h) + ")";
        });

    m.def("box_from_corners", &bbr::box_from_corners, py::arg("x1"),
          py::arg("y1"), py::arg("x2"), py::arg("y2"));

    py::class_<bbr::PairGeometry>(m, "PairGeometry")
        .def_readonly("inter", &bbr::PairGeometry::inter)
        .def_readonly("union_area", &bbr::PairGeometry::union_area)
        .def_readonly("iou", &bbr::PairGeometry::iou)
        .def_readonly("enc_w", &bbr::PairGeometry::enc_w)
        .def_readonly("enc_h", &bbr::PairGeometry::enc_h)
        .def_readonly("enc_diag_sq", &bbr::PairGeometry::enc_diag_sq)
        .def_readonly("enc_area", &bbr::PairGeometry::enc_area)
        .def_readonly("center_dist_sq", &bbr::PairGeometry::center_dist_sq);

    m.def("pair_geometry", &bbr::pair_geometry, py::arg("pred"),
          py::arg("gt"));
    m.def("iou", &bbr::iou, py::arg("pred"), py::arg("gt"));

    py::class_<bbr::LossKind>(m, "LossKind")
        .def(py::init(&make_kind), py::arg("name"), py::arg("n") = 9.0)
        .def_property_readonly(
            "name",
            [](const bbr::LossKind& k) { return bbr::kind_name(k.tag); })
        .def_readonly("n", &bbr::LossKind::n)
        .def("__repr__", [](const bbr::LossKind& k) {
            return "LossKind('" + std::string(bbr::kind_name(k.tag)) +
                   "', n=" + std::to_string(k.n) + ")";
        });

    py::class_<bbr::LossResult>(m, "LossResult")
        .def_readonly("value", &bbr::LossResult::value)
        .def_readonly("grad", &bbr::LossResult::grad)
        .def("__repr__", [](const bbr::LossResult& r) {
            return "LossResult(value=" + std::to_string(r.value) + ")";
        });

    py::class_<bbr::CIoUInternals>(m, "CIoUInternals")
        .def_readonly("v", &bbr::CIoUInternals::v)
        .def_readonly("alpha", &bbr::CIoUInternals::alpha);

    py::class_<bbr::AspectGrad>(m, "AspectGrad")
        .def_readonly("dv_dw", &bbr::AspectGrad::dv_dw)
        .def_readonly("dv_dh", &bbr::AspectGrad::dv_dh);

    m.def(
        "loss",
        [](const std::string& kind, const bbr::Box& pred, const bbr::Box& gt,
           double n) { return bbr::loss(make_kind(kind, n), pred, gt); },
        py::arg("kind"), py::arg("pred"), py::arg("gt"), py::arg("n") = 9.0,
        "Loss value and analytic gradient (d/dcx, d/dcy, d/dw, d/dh)");
    m.def(
        "loss_value",
        [](const std::string& kind, const bbr::Box& pred, const bbr::Box& gt,
           double n) { return bbr::loss_value(make_kind(kind, n), pred, gt); },
        py::arg("kind"), py::arg("pred"), py::arg("gt"), py::arg("n") = 9.0);
    m.def("ciou_internals", &bbr::ciou_internals, py::arg("pred"),
          py::arg("gt"));
    m.def("aspect_penalty_grad", &bbr::aspect_penalty_grad, py::arg("pred"),
          py::arg("gt"));
    m.def("niou_metric", &bbr::niou_metric, py::arg("inter"),
          py::arg("union_area"), py::arg("n") = 9.0);
    m.def("kind_names", []() {
        std::vector<std::string> out;
        for (bbr::LossTag t : bbr::kAllLossTags) out.push_back(bbr::kind_name(t));
        return out;
    });

    py::class_<bbr::FdConfig>(m, "FdConfig")
        .def(py::init([](double step_rel, double tol_rel, double tol_abs,
                         double exclusion_margin) {
                 return bbr::FdConfig{step_rel, tol_rel, tol_abs,
                                      exclusion_margin};
             }),
             py::arg("step_rel") = 1e-5, py::arg("tol_rel") = 1e-6,
             py::arg("tol_abs") = 1e-9, py::arg("exclusion_margin") = 1e-4)
        .def_readwrite("step_rel", &bbr::FdConfig::step_rel)
        .def_readwrite("tol_rel", &bbr::FdConfig::tol_rel)
        .def_readwrite("tol_abs", &bbr::FdConfig::tol_abs)
        .def_readwrite("exclusion_margin", &bbr::FdConfig::exclusion_margin);

    py::class_<bbr::WorstCase>(m, "WorstCase")
        .def_property_readonly(
            "kind",
            [](const bbr::WorstCase& w) { return bbr::kind_name(w.kind.tag); })
        .def_readonly("pred", &bbr::WorstCase::pred)
        .def_readonly("gt", &bbr::WorstCase::gt)
        .def_readonly("component", &bbr::WorstCase::component);

    py::class_<bbr::GradCheckReport>(m, "GradCheckReport")
        .def_readonly("pairs_tested", &bbr::GradCheckReport::pairs_tested)
        .def_readonly("pairs_skipped", &bbr::GradCheckReport::pairs_skipped)
        .def_readonly("max_rel_err", &bbr::GradCheckReport::max_rel_err)
        .def_readonly("worst", &bbr::GradCheckReport::worst)
        .def_readonly("passed", &bbr::GradCheckReport::passed);

    m.def(
        "fd_gradient",
        [](const std::string& kind, const bbr::Box& pred, const bbr::Box& gt,
           double n, const bbr::FdConfig& cfg) {
            return bbr::fd_gradient(make_kind(kind, n), pred, gt, cfg);
        },
        py::arg("kind"), py::arg("pred"), py::arg("gt"), py::arg("n") = 9.0,
        py::arg("cfg") = bbr::FdConfig{},
        "Central-difference gradient (CIoU: alpha frozen)");
    m.def("near_nonsmooth", &bbr::near_nonsmooth, py::arg("pred"),
          py::arg("gt"), py::arg("margin") = 1e-4);
    m.def(
        "run_gradcheck",
        [](const std::vector<std::string>& kinds, std::uint64_t pairs,
           std::uint64_t seed, double n, const bbr::FdConfig& cfg,
           int threads) {
            return bbr::run_gradcheck(kinds_from_names(kinds, n), pairs, seed,
                                      cfg, threads);
        },
        py::arg("kinds") = std::vector<std::string>{}, py::arg("pairs") = 10000,
        py::arg("seed") = 0, py::arg("n") = 9.0,
        py::arg("cfg") = bbr::FdConfig{}, py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());

    py::enum_<bbr::SweepMode>(m, "SweepMode")
        .value("translate", bbr::SweepMode::Translate)
        .value("scale", bbr::SweepMode::Scale)
        .value("translate_diagonal", bbr::SweepMode::TranslateDiagonal);

    py::class_<bbr::SweepRow>(m, "SweepRow")
        .def_property_readonly(
            "kind",
            [](const bbr::SweepRow& r) { return bbr::kind_name(r.kind); })
        .def_readonly("n", &bbr::SweepRow::n)
        .def_readonly("offset", &bbr::SweepRow::offset)
        .def_readonly("iou", &bbr::SweepRow::iou)
        .def_readonly("value", &bbr::SweepRow::value)
        .def_readonly("grad", &bbr::SweepRow::grad)
        .def_readonly("grad_norm", &bbr::SweepRow::grad_norm);

    py::class_<bbr::SweepReport>(m, "SweepReport")
        .def_readonly("rows", &bbr::SweepReport::rows);

    m.def(
        "gradient_sweep",
        [](const std::string& mode, const bbr::Box& target, int samples,
           const std::vector<std::string>& kinds, double n) {
            bbr::SweepConfig cfg;
            cfg.mode = bbr::parse_sweep_mode(mode);
            cfg.target = target;
            cfg.samples = samples;
            cfg.kinds = kinds_from_names(kinds, n);
            return bbr::gradient_sweep(cfg);
        },
        py::arg("mode") = "translate",
        py::arg("target") = bbr::Box{0.0, 0.0, 1.0, 1.0},
        py::arg("samples") = 200,
        py::arg("kinds") = std::vector<std::string>{}, py::arg("n") = 9.0);

    py::class_<bbr::AnchorLayout>(m, "AnchorLayout")
        .def(py::init<>())
        .def_readwrite("ring_radii", &bbr::AnchorLayout::ring_radii)
        .def_readwrite("points_per_ring", &bbr::AnchorLayout::points_per_ring)
        .def_readwrite("scales", &bbr::AnchorLayout::scales)
        .def_readwrite("aspect_ratios", &bbr::AnchorLayout::aspect_ratios)
        .def_readwrite("center_jitter", &bbr::AnchorLayout::center_jitter);

    py::class_<bbr::SimSeries>(m, "SimSeries")
        .def_property_readonly(
            "kind",
            [](const bbr::SimSeries& s) { return bbr::kind_name(s.kind); })
        .def_readonly("n", &bbr::SimSeries::n)
        .def_readonly("total_error", &bbr::SimSeries::total_error)
        .def_readonly("final_errors", &bbr::SimSeries::final_errors);

    py::class_<bbr::SimReport>(m, "SimReport")
        .def_readonly("pair_count", &bbr::SimReport::pair_count)
        .def_readonly("series", &bbr::SimReport::series);

    m.def("default_targets", &bbr::default_targets);
    m.def("build_anchors", &bbr::build_anchors, py::arg("layout"),
          py::arg("seed") = 0);
    m.def("corner_error", &bbr::corner_error, py::arg("a"), py::arg("b"));

    m.def(
        "regression_sim",
        [](const std::vector<bbr::Box>& targets, const bbr::AnchorLayout& layout,
           int iterations, double step_size, double step_decay,
           const std::vector<std::string>& kinds, double n,
           std::uint64_t seed, int threads) {
            bbr::SimConfig cfg;
            if (!targets.empty()) cfg.targets = targets;
            cfg.layout = layout;
            cfg.iterations = iterations;
            cfg.step_size = step_size;
            cfg.step_decay = step_decay;
            cfg.kinds = kinds_from_names(kinds, n);
            cfg.seed = seed;
            cfg.threads = threads;
            return bbr::regression_sim(cfg);
        },
        py::arg("targets") = std::vector<bbr::Box>{},
        py::arg("layout") = bbr::AnchorLayout{}, py::arg("iterations") = 200,
        py::arg("step_size") = 0.1, py::arg("step_decay") = 1.0,
        py::arg("kinds") = std::vector<std::string>{}, py::arg("n") = 9.0,
        py::arg("seed") = 0, py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());

    m.def(
        "write_sweep_csv",
        [](const bbr::SweepReport& report, const std::filesystem::path& path,
           const std::vector<std::string>& metadata) {
            bbr::write_csv(bbr::sweep_table(report, metadata), path);
        },
        py::arg("report"), py::arg("path"),
        py::arg("metadata") = std::vector<std::string>{});
    m.def(
        "write_sim_csv",
        [](const bbr::SimReport& report, const std::filesystem::path& path,
           const std::vector<std::string>& metadata) {
            bbr::write_csv(bbr::sim_table(report, metadata), path);
        },
        py::arg("report"), py::arg("path"),
        py::arg("metadata") = std::vector<std::string>{});
    m.def(
        "render_sweep_svg",
        [](const bbr::SweepReport& report, const std::filesystem::path& path,
           bool log_y) {
            bbr::PlotSpec spec;
            spec.title = "gradient magnitude vs IoU";
            spec.x_column = "iou";
            spec.x_label = "achieved IoU";
            spec.y_column = "grad_norm";
            spec.y_label = "gradient magnitude";
            spec.log_y = log_y;
            bbr::render_svg(bbr::sweep_table(report, {}), spec, path);
        },
        py::arg("report"), py::arg("path"), py::arg("log_y") = false);
    m.def(
        "render_sim_svg",
        [](const bbr::SimReport& report, const std::filesystem::path& path,
           bool log_y) {
            bbr::PlotSpec spec;
            spec.title = "anchor regression: total corner error";
            spec.x_column = "iteration";
            spec.x_label = "iteration";
            spec.y_column = "total_error";
            spec.y_label = "total corner error";
            spec.log_y = log_y;
            bbr::render_svg(bbr::sim_table(report, {}), spec, path);
        },
        py::arg("report"), py::arg("path"), py::arg("log_y") = false);
}
