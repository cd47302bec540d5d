"""Dense state-space models and their energy geometry.

Both discretizations produce a single-input model

    x' = A x + B u,     y = C x,

together with a symmetric positive definite Gram matrix ``E`` whose quadratic
form is the discrete total energy ``H(x) = x^T E x / 2``.  Losslessness of
the open loop is the skewness of ``A`` in the ``E`` inner product,
``E A + A^T E = 0``.

The collocated output is the power conjugate of the current input,
``C = (E B)^T``, so that ``dH/dt = u y`` along solutions and the feedback
``u = -kappa y`` dissipates at the exact rate ``-kappa y^2``.  A plain
Euclidean transpose output is available via ``collocation="euclidean"`` for
side-by-side experiments; it satisfies none of the energy identities.
"""
from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as la

from .errors import SolverError, ValidationError
from .materials import CompositeParams

_FMT = "%.17g"


@dataclass(frozen=True)
class StateSpaceModel:
    """Dense (A, B, C) with the energy Gram E and provenance metadata.

    ``segments`` is the mesh resolution N; the state dimension is ``6 N``.
    ``ordering`` names the state layout: nodal field blocks for the FEM,
    per-element sextuples for the MFEM.  ``kappa`` records the collocated
    feedback gain baked into ``A`` (0 for the open loop).
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    e: np.ndarray
    scheme: str
    segments: int
    variant: str
    ordering: str
    params: CompositeParams
    kappa: float = 0.0
    collocation: str = "energy"

    def __post_init__(self):
        n = self.a.shape[0]
        if self.a.shape != (n, n) or self.b.shape != (n,) or self.c.shape != (n,):
            raise ValidationError("inconsistent model dimensions")
        if self.e.shape != (n, n):
            raise ValidationError("Gram matrix dimension mismatch")
        if n != 6 * self.segments:
            raise ValidationError(f"state dimension {n} != 6*{self.segments}")

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def energy(self, x: np.ndarray) -> np.ndarray:
        """H = x^T E x / 2, columnwise if ``x`` is a state matrix."""
        ex = self.e @ x
        return 0.5 * np.einsum("i...,i...->...", x, ex)

    def output(self, x: np.ndarray) -> np.ndarray:
        return self.c @ x

    @property
    def provenance_hash(self) -> str:
        """Identity of the plant realization (not of any feedback gain).

        Snapshots taken from an open-loop run restore into the closed loop
        built on the same plant, so the hash covers scheme, resolution,
        variant, ordering and the physical parameters only.
        """
        h = hashlib.sha256()
        h.update(f"{self.scheme}|{self.segments}|{self.variant}|{self.ordering}".encode())
        for name in sorted(vars(self.params)):
            h.update((_FMT % getattr(self.params, name)).encode())
        return h.hexdigest()


def collocated_output(b: np.ndarray, e: np.ndarray, collocation: str = "energy") -> np.ndarray:
    if collocation == "energy":
        return e @ b
    if collocation == "euclidean":
        return b.copy()
    raise ValidationError(f"unknown collocation convention {collocation!r}")


def energy_skewness_defect(model: StateSpaceModel) -> float:
    """|| E A + A^T E ||_F / (||E||_F ||A||_F), zero for a lossless model."""
    num = np.linalg.norm(model.e @ model.a + model.a.T @ model.e)
    return num / (np.linalg.norm(model.e) * np.linalg.norm(model.a))


def energy_cholesky(e: np.ndarray) -> np.ndarray:
    """Lower-triangular L with E = L L^T, via Jacobi pre-scaling.

    The Gram entries span many orders of magnitude (stiffness against
    magnetic terms), so E is equilibrated by its diagonal before the
    factorization; the factor is rescaled back afterwards.
    """
    d = np.sqrt(np.diag(e))
    if not np.all(d > 0):
        raise SolverError("Gram matrix has a nonpositive diagonal entry")
    scaled = (e / d).T / d
    try:
        lhat = la.cholesky(0.5 * (scaled + scaled.T), lower=True)
    except la.LinAlgError as exc:
        raise SolverError(f"Gram matrix is not positive definite: {exc}") from exc
    return (lhat.T * d).T


def energy_normalized(model: StateSpaceModel):
    """Return (A~, B~, L) with A~ = L^T A L^-T, B~ = L^T B and E = L L^T.

    In these coordinates H = |x~|^2 / 2, a lossless A~ is exactly
    skew-symmetric, and the collocated output is y = B~^T x~.  All rank and
    stability questions are similarity-invariant, but the conditioning is
    dramatically better than in the raw nodal coordinates.
    """
    lfac = energy_cholesky(model.e)
    a_tilde = lfac.T @ la.solve_triangular(lfac, model.a.T, lower=True).T
    b_tilde = lfac.T @ model.b
    return a_tilde, b_tilde, lfac


def with_feedback(model: StateSpaceModel, kappa: float) -> StateSpaceModel:
    """Close the loop with u = -kappa y:  A_cl = A - kappa B C."""
    if kappa < 0:
        raise ValidationError(f"feedback gain must be >= 0, got {kappa}")
    a_cl = model.a - kappa * np.outer(model.b, model.c)
    return replace(model, a=a_cl, kappa=kappa)


# ---------------------------------------------------------------------------
# plain-text serialization (matrix-market style: % comments, dense blocks)

def save_model(model: StateSpaceModel, path) -> None:
    buf = io.StringIO()
    buf.write("%%piezobeam state-space model v1\n")
    buf.write(f"% scheme: {model.scheme}\n")
    buf.write(f"% segments: {model.segments}\n")
    buf.write(f"% variant: {model.variant}\n")
    buf.write(f"% ordering: {model.ordering}\n")
    buf.write(f"% collocation: {model.collocation}\n")
    buf.write(f"% kappa: {_FMT % model.kappa}\n")
    buf.write(f"% params_hash: {model.provenance_hash}\n")
    for name in sorted(vars(model.params)):
        buf.write(f"% param {name} {_FMT % getattr(model.params, name)}\n")
    for name, mat in (("A", model.a), ("B", model.b.reshape(-1, 1)),
                      ("C", model.c.reshape(1, -1)), ("E", model.e)):
        buf.write(f"% matrix {name} {mat.shape[0]} {mat.shape[1]}\n")
        for row in mat:
            buf.write(" ".join(_FMT % v for v in row))
            buf.write("\n")
    data = buf.getvalue()
    with open(path, "w") as fh:
        fh.write(data)


def load_model(path) -> StateSpaceModel:
    meta: dict[str, str] = {}
    params_kv: dict[str, float] = {}
    matrices: dict[str, np.ndarray] = {}
    with open(path) as fh:
        lines = fh.read().splitlines()
    i = 0
    while i < len(lines):
        line = lines[i]
        if line.startswith("% param "):
            _, _, name, value = line.split()
            params_kv[name] = float(value)
        elif line.startswith("% matrix "):
            _, _, name, rows, cols = line.split()
            rows, cols = int(rows), int(cols)
            block = np.array(
                [[float(v) for v in lines[i + 1 + r].split()] for r in range(rows)]
            ).reshape(rows, cols)
            matrices[name] = block
            i += rows
        elif line.startswith("% ") and ":" in line:
            key, _, value = line[2:].partition(":")
            meta[key.strip()] = value.strip()
        i += 1
    params = CompositeParams(**params_kv)
    model = StateSpaceModel(
        a=matrices["A"],
        b=matrices["B"].ravel(),
        c=matrices["C"].ravel(),
        e=matrices["E"],
        scheme=meta["scheme"],
        segments=int(meta["segments"]),
        variant=meta["variant"],
        ordering=meta["ordering"],
        params=params,
        kappa=float(meta["kappa"]),
        collocation=meta["collocation"],
    )
    return model
