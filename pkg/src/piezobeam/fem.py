"""Nodal finite element discretization of the composite beam.

The six fields (v, w_z, Phi, and their velocities) share one hat-function
basis on a uniform mesh of ``n`` segments over [0, L].  The clamped-end node
z = 0 is eliminated, the free-end node is kept, so every field contributes
``n`` unknowns and the state dimension is ``6 n`` with ordering
``(c1, ..., c6)`` by field blocks.

Two element-matrix variants are built:

``standard``
    Consistent Galerkin matrices.  Mass ``M1`` and stiffness ``K2`` carry the
    free-end boundary rows of the hat basis, ``K1 = -(phi_i, phi_j')`` is
    antisymmetric in the interior with a ``-1/2`` free-end corner, and the
    load vector is the consistent quadrature of the uniform current source.
    The velocity rows apply ``K1`` and the flux row applies ``-K1^T``; that
    transpose pairing is what makes the assembled generator exactly skew in
    the energy inner product, while keeping the full coupling between the
    electromagnetic and mechanical blocks (including at n = 1, where an
    antisymmetric 1x1 matrix would otherwise sever it).

``paper``
    The element matrices transcribed verbatim from the reference scheme:
    nonstandard ``2,4,2 / 2,4`` mass boundary rows, an unmodified ``2``
    stiffness corner, and a bare ``-beta/(2 g_b)`` load without the mass
    inverse or mesh weight.  Kept for fidelity reporting; its energy
    skewness defect is confined to boundary rows and is reported, not
    asserted.

The energy Gram is always assembled from the consistent matrices: it
discretizes the physical total energy regardless of which operator variant
is requested.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import AssemblyError, ValidationError
from .materials import CompositeParams, operator_coefficients
from .statespace import StateSpaceModel, collocated_output

VARIANTS = ("standard", "paper")

FEM_ORDERING = "fem-nodal:c1..c6 at z_k=k*L/N, k=1..N, clamped node eliminated"


@dataclass(frozen=True)
class ElementMatrices:
    """Assembled global matrices of one scalar field on the shared mesh."""

    m1: np.ndarray      # mass
    k1: np.ndarray      # first-derivative pairing, -(phi_i, phi_j')
    k2: np.ndarray      # stiffness
    b1: np.ndarray      # current load column
    h: float            # mesh size L/N
    variant: str


def _tridiag(n: int, lower: float, diag: float, upper: float) -> np.ndarray:
    out = np.diag(np.full(n, diag))
    if n > 1:
        out += np.diag(np.full(n - 1, lower), -1) + np.diag(np.full(n - 1, upper), 1)
    return out


def element_matrices(n: int, params: CompositeParams, variant: str = "standard") -> ElementMatrices:
    """Build M1, K1, K2 and the load column for ``n`` mesh segments."""
    if n < 1:
        raise ValidationError(f"segment count must be a positive integer, got {n}")
    if variant not in VARIANTS:
        raise ValidationError(f"unknown element variant {variant!r}, expected one of {VARIANTS}")
    h = params.length / n
    scale = -params.beta / (2.0 * params.g_b)

    k1 = _tridiag(n, 0.5, 0.0, -0.5)
    if variant == "paper":
        m1 = _tridiag(n, 1.0, 4.0, 1.0)
        if n >= 2:
            m1[n - 1, n - 2] = 2.0
        if n >= 3:
            m1[n - 2, n - 3] = 2.0
            m1[n - 2, n - 1] = 2.0
        m1 *= h / 6.0
        k2 = _tridiag(n, -1.0, 2.0, -1.0) / h
        b1 = np.full(n, scale)
    else:
        m1 = _tridiag(n, 1.0, 4.0, 1.0)
        m1[n - 1, n - 1] = 2.0
        m1 *= h / 6.0
        k2 = _tridiag(n, -1.0, 2.0, -1.0) / h
        k2[n - 1, n - 1] = 1.0 / h
        k1[n - 1, n - 1] = -0.5
        load = np.full(n, h)
        load[n - 1] = h / 2.0
        b1 = la.solve(m1, scale * load)
    return ElementMatrices(m1=m1, k1=k1, k2=k2, b1=b1, h=h, variant=variant)


def energy_gram_fem(params: CompositeParams, n: int, variant: str = "standard") -> np.ndarray:
    """Symmetric Gram E with H(x) = x^T E x / 2 the discrete total energy.

    Built from the consistent mass and stiffness matrices for every variant:
    the Gram represents the physical energy of the interpolated fields, not
    the operator discretization.
    """
    elem = element_matrices(n, params, "standard")
    m1, k2 = elem.m1, elem.k2
    e = np.zeros((6 * n, 6 * n))
    s = [slice(i * n, (i + 1) * n) for i in range(6)]
    e[s[0], s[0]] = params.c_a * k2
    e[s[1], s[1]] = params.c_i * k2
    e[s[0], s[1]] = -params.c_i0 * k2
    e[s[1], s[0]] = -params.c_i0 * k2
    e[s[2], s[2]] = (params.a_p / params.mu) * k2
    e[s[3], s[3]] = params.rho_a * m1
    e[s[4], s[4]] = params.rho_i * m1
    e[s[3], s[4]] = -params.rho_i0 * m1
    e[s[4], s[3]] = -params.rho_i0 * m1
    e[s[5], s[5]] = (params.a_p / params.beta) * m1
    return e


def assemble_fem(
    params: CompositeParams,
    n: int,
    variant: str = "standard",
    collocation: str = "energy",
) -> StateSpaceModel:
    """Assemble the 6n-state nodal model.

    The upper half of A maps velocities to coordinate rates (identity
    blocks); the lower half applies ``M1^-1 K2`` with the operator
    coefficients, plus the gamma coupling through ``M1^-1 K1`` in the
    velocity rows and ``-M1^-1 K1^T`` in the flux row.
    """
    elem = element_matrices(n, params, variant)
    coef = operator_coefficients(params)
    try:
        lu = la.lu_factor(elem.m1)
        x2 = la.lu_solve(lu, elem.k2)
        x1 = la.lu_solve(lu, elem.k1)
        x1t = la.lu_solve(lu, -elem.k1.T)
    except la.LinAlgError as exc:
        raise AssemblyError(f"singular mass matrix for n={n}, variant={variant}: {exc}") from exc

    a = np.zeros((6 * n, 6 * n))
    s = [slice(i * n, (i + 1) * n) for i in range(6)]
    a[s[0], s[3]] = np.eye(n)
    a[s[1], s[4]] = np.eye(n)
    a[s[2], s[5]] = np.eye(n)
    a[s[3], s[0]] = -coef.a41 * x2
    a[s[3], s[1]] = coef.a42 * x2
    a[s[3], s[5]] = coef.a46 * x1
    a[s[4], s[0]] = coef.a51 * x2
    a[s[4], s[1]] = -coef.a52 * x2
    a[s[4], s[5]] = -coef.a56 * x1
    a[s[5], s[2]] = -coef.a63 * x2
    a[s[5], s[3]] = coef.a64 * x1t
    a[s[5], s[4]] = -coef.a65 * x1t

    b = np.zeros(6 * n)
    b[s[5]] = elem.b1
    e = energy_gram_fem(params, n, variant)
    c = collocated_output(b, e, collocation)
    return StateSpaceModel(
        a=a, b=b, c=c, e=e,
        scheme="fem", segments=n, variant=variant,
        ordering=FEM_ORDERING, params=params, collocation=collocation,
    )
