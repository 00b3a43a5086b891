"""Python bindings for the quantized distributed primal-dual simulator."""

from ._core import (
    InfeasibleParameters,
    NetworkGraph,
    QdpdError,
    __version__,
    bandwidth_per_step,
    bandwidth_report,
    canonical_config,
    check_T,
    cli,
    dequantize,
    derive_eta,
    derive_rho,
    pack_frame,
    piecewise_gradient,
    piecewise_value,
    quantize,
    run_config,
    solve_table1,
    table1_coefficients,
    unpack_frame,
)

__all__ = [
    "InfeasibleParameters",
    "NetworkGraph",
    "QdpdError",
    "__version__",
    "bandwidth_per_step",
    "bandwidth_report",
    "canonical_config",
    "check_T",
    "cli",
    "dequantize",
    "derive_eta",
    "derive_rho",
    "pack_frame",
    "piecewise_gradient",
    "piecewise_value",
    "quantize",
    "run_config",
    "solve_table1",
    "table1_coefficients",
    "unpack_frame",
]
