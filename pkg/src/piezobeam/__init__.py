"""Numerical laboratory for a current-driven piezoelectric composite beam.

Two discretizations of the same cantilevered two-layer beam: a nodal finite
element scheme and a port-based mixed finite element scheme.  Both expose a
single-input state-space model with an energy Gram matrix, on top of which
the package provides spectral convergence studies, controllability and
stabilizability audits, and lossless/dissipative time integration.
"""

from .materials import (
    CompositeParams,
    LayerGeometry,
    MaterialParams,
    OperatorCoefficients,
    SectionProps,
    composite_params,
    continuous_energy_density,
    default_composite_params,
    operator_coefficients,
    section_props,
)
from .fem import ElementMatrices, assemble_fem, element_matrices, energy_gram_fem
from .mfem import (
    BoundaryPortSpec,
    CoenergyMatrix,
    ElementPort,
    assemble_mfem,
    derive_Q,
    element_port,
    legendre_momenta,
)
from .analysis import (
    ControlReport,
    SpectrumReport,
    brockett_check,
    closed_loop,
    control_report,
    convergence_sweep,
    kalman_rank,
    spectrum,
    staircase_decomposition,
)
from .simulation import (
    Snapshot,
    Trajectory,
    integrate,
    reconstruct_deflections,
    restore_state,
    run_snapshot_protocol,
    snapshot_state,
)
from .statespace import StateSpaceModel, energy_skewness_defect, load_model, save_model

__version__ = "0.1.0"

__all__ = [
    "BoundaryPortSpec",
    "CoenergyMatrix",
    "CompositeParams",
    "ControlReport",
    "ElementMatrices",
    "ElementPort",
    "LayerGeometry",
    "MaterialParams",
    "OperatorCoefficients",
    "SectionProps",
    "Snapshot",
    "SpectrumReport",
    "StateSpaceModel",
    "Trajectory",
    "assemble_fem",
    "assemble_mfem",
    "brockett_check",
    "closed_loop",
    "composite_params",
    "continuous_energy_density",
    "control_report",
    "convergence_sweep",
    "default_composite_params",
    "derive_Q",
    "element_matrices",
    "element_port",
    "energy_gram_fem",
    "energy_skewness_defect",
    "integrate",
    "kalman_rank",
    "legendre_momenta",
    "load_model",
    "operator_coefficients",
    "reconstruct_deflections",
    "restore_state",
    "run_snapshot_protocol",
    "save_model",
    "section_props",
    "snapshot_state",
    "spectrum",
    "staircase_decomposition",
]
