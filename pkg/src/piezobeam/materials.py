"""Material and geometric data for the current-driven piezoelectric composite.

A piezoelectric layer is bonded on top of a purely mechanical substrate.
Both layers are rectangular prisms sharing the beam length and half-width;
they are distinguished by their through-thickness faces ``h_a < h_b``.
This module turns the raw inputs (densities, stiffnesses, the piezoelectric
coupling ``gamma``, the dielectric impermittivity ``beta``, the magnetic
permeability ``mu``, and the two layer geometries) into the derived
coefficients of the composite equations of motion:

* per-layer cross-section ``A``, second moment ``I`` and first moment ``I0``,
* composite line densities ``rho_a, rho_i, rho_i0`` and line stiffnesses
  ``c_a, c_i, c_i0`` (the ``i0`` pair comes from the piezo layer alone),
* the nine coefficients ``a41 .. a65`` of the first-order operator form.

All quantities are SI.  Derived values are always computed here, never
hand-entered downstream.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

#: Default configuration: 1 m x 0.2 m beam, 10 mm piezo layer on top of a
#: 10 mm substrate with the interface at z3 = 0.  The single published
#: thickness value is read as per-layer thickness; both faces are
#: configurable, so the alternative split-total reading stays reachable.
DEFAULT_PIEZO_FACES = (0.0, 0.01)
DEFAULT_SUBSTRATE_FACES = (-0.01, 0.0)
DEFAULT_LENGTH = 1.0
DEFAULT_HALF_WIDTH = 0.1


@dataclass(frozen=True)
class LayerGeometry:
    """One rectangular layer: length, half-width and through-thickness faces."""

    length: float
    g_b: float
    h_a: float
    h_b: float

    def __post_init__(self):
        if not self.length > 0:
            raise ValidationError(f"layer length must satisfy length > 0, got {self.length}")
        if not self.g_b > 0:
            raise ValidationError(f"half-width must satisfy g_b > 0, got {self.g_b}")
        if not self.h_b > self.h_a:
            raise ValidationError(
                f"layer faces must satisfy h_b > h_a, got h_a={self.h_a}, h_b={self.h_b}"
            )

    @property
    def thickness(self) -> float:
        return self.h_b - self.h_a


@dataclass(frozen=True)
class MaterialParams:
    """Raw material inputs for substrate (``_s``) and piezo (``_p``) layers."""

    rho_s: float        # substrate density [kg/m^3]
    c11_s: float        # substrate stiffness [N/m^2]
    rho_p: float        # piezo density [kg/m^3]
    c11_p: float        # piezo stiffness [N/m^2]
    gamma: float        # piezoelectric constant [C/m^2]
    beta: float         # dielectric impermittivity [m/F]
    mu: float           # magnetic permeability [H/m]

    def __post_init__(self):
        for name in ("rho_s", "c11_s", "rho_p", "c11_p", "beta", "mu"):
            value = getattr(self, name)
            if not value > 0:
                raise ValidationError(f"material parameter {name} must be > 0, got {value}")
        if self.gamma < 0:
            raise ValidationError(f"coupling gamma must be >= 0, got {self.gamma}")


#: Default material values (SI).
DEFAULT_MATERIAL = MaterialParams(
    rho_s=5000.0, c11_s=1e5, rho_p=7600.0, c11_p=1.4e7,
    gamma=1e-3, beta=1e6, mu=1.2e6,
)


def default_piezo_geometry() -> LayerGeometry:
    return LayerGeometry(DEFAULT_LENGTH, DEFAULT_HALF_WIDTH, *DEFAULT_PIEZO_FACES)


def default_substrate_geometry() -> LayerGeometry:
    return LayerGeometry(DEFAULT_LENGTH, DEFAULT_HALF_WIDTH, *DEFAULT_SUBSTRATE_FACES)


@dataclass(frozen=True)
class SectionProps:
    """Cross-section area and moments of one layer.

    ``area = 2 g_b (h_b - h_a)``, ``inertia = (2/3) g_b (h_b^3 - h_a^3)``,
    ``first_moment = g_b (h_b^2 - h_a^2)``.  The first moment vanishes in
    centroidal coordinates ``h_b = -h_a``.
    """

    area: float
    inertia: float
    first_moment: float


def section_props(geom: LayerGeometry) -> SectionProps:
    """Closed-form cross-section integrals of ``1``, ``z3^2`` and ``z3``."""
    area = 2.0 * geom.g_b * (geom.h_b - geom.h_a)
    inertia = (2.0 / 3.0) * geom.g_b * (geom.h_b**3 - geom.h_a**3)
    first_moment = geom.g_b * (geom.h_b**2 - geom.h_a**2)
    if not area > 0:
        raise ValidationError(f"cross-section area must be > 0, got {area}")
    if not inertia > 0:
        raise ValidationError(f"cross-section inertia must be > 0, got {inertia}")
    return SectionProps(area, inertia, first_moment)


@dataclass(frozen=True)
class CompositeParams:
    """Derived line coefficients of the two-layer composite.

    The mass form ``[[rho_a, -rho_i0], [-rho_i0, rho_i]]`` and the stiffness
    form ``[[c_a, -c_i0], [-c_i0, c_i]]`` must both be positive definite;
    this is checked on construction.
    """

    rho_a: float        # [kg/m]
    rho_i: float        # [kg m]
    rho_i0: float       # [kg]
    c_a: float          # [N]
    c_i: float          # [N m^2]
    c_i0: float         # [N m]
    a_p: float          # piezo cross-section [m^2]
    i0: float           # piezo first moment [m^3]
    beta: float
    mu: float
    gamma: float
    g_b: float
    length: float

    def __post_init__(self):
        mass_det = self.rho_a * self.rho_i - self.rho_i0**2
        if not mass_det > 0:
            raise ValidationError(
                f"mass form not positive definite: rho_a*rho_i - rho_i0^2 = {mass_det}"
            )
        stiff_det = self.c_a * self.c_i - self.c_i0**2
        if not stiff_det > 0:
            raise ValidationError(
                f"stiffness form not positive definite: c_a*c_i - c_i0^2 = {stiff_det}"
            )

    @property
    def mass_det(self) -> float:
        return self.rho_a * self.rho_i - self.rho_i0**2

    @property
    def thickness_p(self) -> float:
        """Piezo layer thickness ``h_b - h_a = a_p / (2 g_b)``."""
        return self.a_p / (2.0 * self.g_b)


def composite_params(
    materials: MaterialParams,
    piezo: LayerGeometry,
    substrate: LayerGeometry,
) -> CompositeParams:
    """Combine the two layers into the composite line coefficients.

    Area and inertia terms add across layers; the cross terms ``rho_i0`` and
    ``c_i0`` involve only the piezo layer's first moment.  ``gamma`` does not
    enter any derived coefficient, it is just carried along.
    """
    if piezo.length != substrate.length:
        raise ValidationError(
            f"layers must share the beam length, got {piezo.length} and {substrate.length}"
        )
    if piezo.g_b != substrate.g_b:
        raise ValidationError(
            f"layers must share the half-width, got {piezo.g_b} and {substrate.g_b}"
        )
    sec_p = section_props(piezo)
    sec_s = section_props(substrate)
    return CompositeParams(
        rho_a=materials.rho_p * sec_p.area + materials.rho_s * sec_s.area,
        rho_i=materials.rho_p * sec_p.inertia + materials.rho_s * sec_s.inertia,
        rho_i0=materials.rho_p * sec_p.first_moment,
        c_a=materials.c11_p * sec_p.area + materials.c11_s * sec_s.area,
        c_i=materials.c11_p * sec_p.inertia + materials.c11_s * sec_s.inertia,
        c_i0=materials.c11_p * sec_p.first_moment,
        a_p=sec_p.area,
        i0=sec_p.first_moment,
        beta=materials.beta,
        mu=materials.mu,
        gamma=materials.gamma,
        g_b=piezo.g_b,
        length=piezo.length,
    )


def default_composite_params() -> CompositeParams:
    return composite_params(
        DEFAULT_MATERIAL, default_piezo_geometry(), default_substrate_geometry()
    )


@dataclass(frozen=True)
class OperatorCoefficients:
    """The nine coefficients of the first-order operator form.

    ``a41, a42, a51, a52`` couple the mechanical accelerations to the
    stiffness terms through the inverse of the 2x2 mass form; ``a46, a56``
    carry the gamma coupling into the mechanical rows, and
    ``a63 = beta/mu``, ``a64 = gamma*beta``, ``a65 = gamma*beta*i0/a_p``
    govern the magnetic-flux row.
    """

    a41: float
    a42: float
    a46: float
    a51: float
    a52: float
    a56: float
    a63: float
    a64: float
    a65: float


def operator_coefficients(params: CompositeParams) -> OperatorCoefficients:
    det = params.mass_det
    return OperatorCoefficients(
        a41=(params.rho_i * params.c_a - params.rho_i0 * params.c_i0) / det,
        a42=(params.rho_i * params.c_i0 - params.rho_i0 * params.c_i) / det,
        a46=params.gamma * (params.rho_i * params.a_p - params.rho_i0 * params.i0) / det,
        a51=(params.rho_a * params.c_i0 - params.rho_i0 * params.c_a) / det,
        a52=(params.rho_a * params.c_i - params.rho_i0 * params.c_i0) / det,
        a56=params.gamma * (params.rho_a * params.i0 - params.rho_i0 * params.a_p) / det,
        a63=params.beta / params.mu,
        a64=params.gamma * params.beta,
        a65=params.gamma * params.beta * params.i0 / params.a_p,
    )


def stiffness_form(params: CompositeParams) -> np.ndarray:
    """3x3 quadratic form of the gradient variables (v_z, w_zz, Phi_z)."""
    return np.array([
        [params.c_a, -params.c_i0, 0.0],
        [-params.c_i0, params.c_i, 0.0],
        [0.0, 0.0, params.a_p / params.mu],
    ])


def mass_form(params: CompositeParams) -> np.ndarray:
    """3x3 quadratic form of the velocity variables (v_t, w_zt, Phi_t)."""
    return np.array([
        [params.rho_a, -params.rho_i0, 0.0],
        [-params.rho_i0, params.rho_i, 0.0],
        [0.0, 0.0, params.a_p / params.beta],
    ])


def continuous_energy_density(state, params: CompositeParams) -> float:
    """Energy per unit length of a pointwise state.

    ``state`` holds the six energy variables at one point of the beam:
    the gradients ``(v_z, w_zz, Phi_z)`` followed by the velocities
    ``(v_t, w_zt, Phi_t)``.  The density is the quadratic form

        1/2 [ c_a v_z^2 + c_i w_zz^2 - 2 c_i0 v_z w_zz + (a_p/mu) Phi_z^2
            + rho_a v_t^2 + rho_i w_zt^2 - 2 rho_i0 v_t w_zt + (a_p/beta) Phi_t^2 ]

    which is nonnegative whenever both composite forms are positive definite.
    """
    x = np.asarray(state, dtype=float)
    if x.shape != (6,):
        raise ValidationError(f"state must be a sextuple, got shape {x.shape}")
    q, v = x[:3], x[3:]
    return 0.5 * (q @ stiffness_form(params) @ q + v @ mass_form(params) @ v)
