"""IoU-family bounding-box regression losses with analytic gradients.

The heavy lifting lives in the compiled extension; this package simply
re-exports it.
"""

from ._core import (  # noqa: F401
    AnchorLayout,
    AspectGrad,
    Box,
    CIoUInternals,
    FdConfig,
    GradCheckReport,
    LossKind,
    LossResult,
    PairGeometry,
    SimReport,
    SimSeries,
    SweepMode,
    SweepReport,
    SweepRow,
    WorstCase,
    __version__,
    aspect_penalty_grad,
    box_from_corners,
    build_anchors,
    ciou_internals,
    corner_error,
    default_targets,
    fd_gradient,
    gradient_sweep,
    iou,
    kind_names,
    loss,
    loss_value,
    near_nonsmooth,
    niou_metric,
    pair_geometry,
    regression_sim,
    render_sim_svg,
    render_sweep_svg,
    run_gradcheck,
    write_sim_csv,
    write_sweep_csv,
)
