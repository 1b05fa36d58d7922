"""Riemannian geometry of SPD matrices (affine-invariant metric)."""

from ._core import (
    SpdGeomError,
    MeanResult,
    PgaModel,
    airm_distance,
    geodesic,
    log_map,
    exp_map,
    log_map_whitened,
    exp_map_whitened,
    matrix_log,
    matrix_exp,
    spd_validate,
    karcher_mean,
    log_euclidean_mean,
    euclidean_mean,
    sym_vec,
    sym_unvec,
    embed,
    pga_fit,
    random_spd,
    run_cli,
)

__all__ = [
    "SpdGeomError",
    "MeanResult",
    "PgaModel",
    "airm_distance",
    "geodesic",
    "log_map",
    "exp_map",
    "log_map_whitened",
    "exp_map_whitened",
    "matrix_log",
    "matrix_exp",
    "spd_validate",
    "karcher_mean",
    "log_euclidean_mean",
    "euclidean_mean",
    "sym_vec",
    "sym_unvec",
    "embed",
    "pga_fit",
    "random_spd",
    "run_cli",
]
