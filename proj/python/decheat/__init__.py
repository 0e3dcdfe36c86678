"""Heat diffusion on triangulated surfaces with discrete exterior calculus."""

from ._decheat import (
    BLUE_THRESHOLD,
    ConfigError,
    DualMetrics,
    Error,
    GeometryError,
    IoError,
    LaplaceOperator,
    MeshError,
    NumericalError,
    ParseError,
    PhysicalParams,
    SolverError,
    Surface,
    TopologyError,
    build_metrics,
    cg_solve,
    classify,
    convergence_study,
    cotan_laplacian,
    export_csv,
    export_ply,
    laplacian,
    load_obj,
    load_obj_string,
    meshgen,
    perturbation_ratios,
    run,
    save_obj,
    step,
)

__all__ = [name for name in dir() if not name.startswith("_")]
