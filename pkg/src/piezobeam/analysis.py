"""Spectral and stabilizability analysis of the assembled models.

Covers the dense eigensolves behind the mode-convergence table, the Kalman
controllability rank, the orthogonal staircase (controllable/uncontrollable)
decomposition, the full-row-rank necessary condition for continuous
stabilizing feedback, and the collocated closed loop.

Rank computations run on the energy-normalized realization
``(L^T A L^-T, L^T B)`` with ``E = L L^T``: ranks are invariant under the
similarity, while the raw nodal coordinates mix scales across sixteen orders
of magnitude and hide the weak gamma-coupled directions below any sensible
threshold.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import SolverError, ValidationError
from .fem import assemble_fem
from .materials import CompositeParams
from .mfem import assemble_mfem
from .statespace import StateSpaceModel, energy_normalized, with_feedback

#: modes with |Im| below this are treated as rigid/algebraic content and
#: excluded from the mode numbering
IMAG_FLOOR = 1e-6

#: largest state dimension for which the dense controllability matrix is built
MAX_RANK_DIM = 600


@dataclass(frozen=True)
class SpectrumReport:
    """All eigenvalues of one model, sorted by |Im| ascending."""

    scheme: str
    segments: int
    variant: str
    eigenvalues: np.ndarray
    residuals: np.ndarray

    @property
    def spectral_radius(self) -> float:
        return float(np.abs(self.eigenvalues).max())

    def mode_frequencies(self, count: int = 4) -> np.ndarray:
        """Imaginary parts of the first ``count`` oscillatory modes.

        Modes are indexed over the positive-imaginary half-spectrum in
        ascending |Im|, skipping near-zero imaginary parts.
        """
        ims = np.sort(self.eigenvalues.imag[self.eigenvalues.imag > IMAG_FLOOR])
        if len(ims) < count:
            raise SolverError(f"only {len(ims)} oscillatory modes available, wanted {count}")
        return ims[:count]


def spectrum(model: StateSpaceModel) -> SpectrumReport:
    """Full spectrum by a dense general eigensolver, with per-pair residuals."""
    a = model.a
    if not np.all(np.isfinite(a)):
        raise ValidationError("model matrix contains non-finite entries")
    try:
        eigvals, eigvecs = la.eig(a)
    except la.LinAlgError as exc:
        raise SolverError(f"dense eigensolver did not converge: {exc}") from exc
    order = np.argsort(np.abs(eigvals.imag), kind="stable")
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    norm_a = np.linalg.norm(a)
    resid = np.linalg.norm(a @ eigvecs - eigvecs * eigvals, axis=0) / norm_a
    return SpectrumReport(
        scheme=model.scheme, segments=model.segments, variant=model.variant,
        eigenvalues=eigvals, residuals=resid,
    )


def conjugate_symmetry_defect(report: SpectrumReport) -> float:
    """Worst distance of any eigenvalue to the conjugate of another, over rho(A)."""
    ev = report.eigenvalues
    osc = ev[np.abs(ev.imag) > 0]
    if len(osc) == 0:
        return 0.0
    worst = max(np.abs(osc.conj()[:, None] - ev[None, :]).min(axis=1).max(), 0.0)
    return float(worst / report.spectral_radius)


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    segments: int
    variant: str
    mode: int
    im_lambda: float


def convergence_sweep(
    params: CompositeParams,
    schemes=("fem", "mfem"),
    n_values=(12, 16, 20, 24, 28, 32, 36, 40, 100),
    variant: str = "standard",
    modes: int = 4,
) -> list[SweepRow]:
    """First ``modes`` oscillatory frequencies per (scheme, N)."""
    if len(n_values) == 0:
        raise ValidationError("sweep needs at least one segment count")
    rows = []
    for scheme in schemes:
        for n in n_values:
            model = _assemble(params, scheme, n, variant)
            freqs = spectrum(model).mode_frequencies(modes)
            for k, im in enumerate(freqs, start=1):
                rows.append(SweepRow(scheme, n, model.variant, k, float(im)))
    return rows


def _assemble(params, scheme, n, variant="standard"):
    if scheme == "fem":
        return assemble_fem(params, n, variant)
    if scheme == "mfem":
        return assemble_mfem(params, n)
    raise ValidationError(f"unknown scheme {scheme!r}, expected 'fem' or 'mfem'")


# ---------------------------------------------------------------------------
# controllability and stabilizability

@dataclass(frozen=True)
class KalmanResult:
    rank: int
    n: int
    singular_values: np.ndarray
    tol: float
    sv_gap: float
    stable: bool        # same rank under tol*10 and tol/10


def kalman_rank(model: StateSpaceModel, tol: float = 1e-10) -> KalmanResult:
    """Numeric rank of [B, AB, ..., A^{n-1}B] on the energy-normalized pair.

    Columns are generated incrementally by matrix-vector products and each
    is normalized before the next power is applied, so no overflow from
    repeated powers can occur.  Rank is the count of singular values above
    ``tol * sigma_max * n``; the decision is rechecked at tol*10 and tol/10.
    """
    n = model.n
    if n > MAX_RANK_DIM:
        raise SolverError(
            f"controllability matrix for n={n} exceeds the supported size {MAX_RANK_DIM}"
        )
    a_t, b_t, _ = energy_normalized(model)
    cols = np.empty((n, n))
    v = b_t / np.linalg.norm(b_t)
    cols[:, 0] = v
    for k in range(1, n):
        v = a_t @ v
        if not np.all(np.isfinite(v)):
            raise SolverError("non-finite entries while building the controllability matrix; "
                              "use the (default) normalized mode")
        nv = np.linalg.norm(v)
        if nv > 0:
            v = v / nv
        cols[:, k] = v
    sv = la.svdvals(cols)

    def decide(t):
        return int(np.sum(sv > t * sv[0] * n))

    rank = decide(tol)
    gap = float(sv[rank - 1] / sv[rank]) if 0 < rank < n else float(sv[-1] / (tol * sv[0] * n))
    stable = decide(tol * 10) == rank == decide(tol / 10)
    return KalmanResult(rank=rank, n=n, singular_values=sv, tol=tol, sv_gap=gap, stable=stable)


@dataclass(frozen=True)
class StaircaseResult:
    """Orthogonal similarity isolating the controllable block.

    ``t`` is orthogonal on the energy-normalized realization; ``a_bar`` and
    ``b_bar`` are the transformed matrices with ``b_bar`` supported on the
    leading block and the lower-left of ``a_bar`` zero to tolerance.
    """

    t: np.ndarray
    a_bar: np.ndarray
    b_bar: np.ndarray
    block_sizes: list[int]
    controllable_dim: int
    uncontrollable_eigenvalues: np.ndarray


def staircase_decomposition(model: StateSpaceModel, tol: float = 1e-10) -> StaircaseResult:
    """Iterative SVD compression of (A, B) to staircase form.

    Stage ranks are decided against the global scale ``tol * max(|A|, |B|)``
    so that an exactly decoupled subsystem terminates the sweep instead of
    accreting roundoff-rank stages.
    """
    a_t, b_t, _ = energy_normalized(model)
    n = model.n
    scale = max(np.linalg.norm(a_t, 2), np.linalg.norm(b_t))
    t_total = np.eye(n)
    a_k = a_t.copy()
    b_k = b_t.reshape(n, 1).copy()
    sizes: list[int] = []
    done = 0

    u, s, _ = la.svd(b_k, full_matrices=True)
    r = int(np.sum(s > tol * scale))
    if r > 0:
        t_total = t_total @ u
        a_k = u.T @ a_k @ u
        b_k = u.T @ b_k
        sizes.append(r)
        done = r
        while done < n:
            block = a_k[done:, done - sizes[-1]:done]
            u2, s2, _ = la.svd(block, full_matrices=True)
            r2 = int(np.sum(s2 > tol * scale))
            if r2 == 0:
                break
            z = la.block_diag(np.eye(done), u2)
            t_total = t_total @ z
            a_k = z.T @ a_k @ z
            b_k = z.T @ b_k
            sizes.append(r2)
            done += r2
    unc = la.eigvals(a_k[done:, done:]) if done < n else np.array([], dtype=complex)
    # blocks listed controllable stages first, then one uncontrollable block
    block_sizes = sizes + ([n - done] if done < n else [])
    return StaircaseResult(
        t=t_total, a_bar=a_k, b_bar=b_k.ravel(),
        block_sizes=block_sizes, controllable_dim=done,
        uncontrollable_eigenvalues=unc,
    )


@dataclass(frozen=True)
class BrockettResult:
    passed: bool
    rank: int
    n: int


def brockett_check(model: StateSpaceModel, tol: float = 1e-10) -> BrockettResult:
    """Full-row-rank test of [A B], necessary for continuous stabilizing feedback."""
    a_t, b_t, _ = energy_normalized(model)
    mat = np.column_stack([a_t, b_t])
    sv = la.svdvals(mat)
    rank = int(np.sum(sv > tol * sv[0] * max(mat.shape))) if sv.size and sv[0] > 0 else 0
    return BrockettResult(passed=rank == model.n, rank=rank, n=model.n)


@dataclass(frozen=True)
class ControlReport:
    scheme: str
    segments: int
    n: int
    kalman_rank: int
    brockett_rank: int
    brockett_passed: bool
    tol: float
    sv_gap: float
    rank_stable: bool
    staircase_block_sizes: list[int]
    uncontrollable_eigenvalues: np.ndarray = field(repr=False)

    def __post_init__(self):
        if sum(self.staircase_block_sizes) != self.n:
            raise ValidationError("staircase block sizes must sum to the state dimension")


def control_report(model: StateSpaceModel, tol: float = 1e-10) -> ControlReport:
    kal = kalman_rank(model, tol)
    stair = staircase_decomposition(model, tol)
    brock = brockett_check(model, tol)
    return ControlReport(
        scheme=model.scheme, segments=model.segments, n=model.n,
        kalman_rank=kal.rank, brockett_rank=brock.rank, brockett_passed=brock.passed,
        tol=tol, sv_gap=kal.sv_gap, rank_stable=kal.stable,
        staircase_block_sizes=stair.block_sizes,
        uncontrollable_eigenvalues=stair.uncontrollable_eigenvalues,
    )


# ---------------------------------------------------------------------------
# collocated closed loop

def closed_loop(model: StateSpaceModel, kappa: float) -> StateSpaceModel:
    """Collocated output feedback u = -kappa y, A_cl = A - kappa B C.

    With the power-conjugate output the closed-loop Gram identity is
    E A_cl + A_cl^T E = -2 kappa (E B)(E B)^T, so the energy decays at the
    exact rate -kappa y^2 and no eigenvalue can cross into the right half
    plane.
    """
    return with_feedback(model, kappa)


def high_frequency_axis_approach(eigenvalues: np.ndarray, decile: float = 0.1):
    """Formalized asymptote check on a closed-loop spectrum.

    Compares the damping of the highest-|Im| decile against the bulk damping
    of the lowest decile: returns (passed, max_re_top, median_abs_re_bottom)
    with passed = max Re over the top decile > -10 x the bottom median.
    """
    ev = np.asarray(eigenvalues)
    order = np.argsort(np.abs(ev.imag))
    ev = ev[order]
    k = max(1, int(len(ev) * decile))
    bottom, top = ev[:k], ev[-k:]
    med_bottom = float(np.median(np.abs(bottom.real)))
    max_top = float(top.real.max())
    return max_top > -10.0 * med_bottom, max_top, med_bottom


def timed_sweep(params: CompositeParams, **kwargs):
    """convergence_sweep plus wall-clock duration, for runtime budgets."""
    t0 = time.perf_counter()
    rows = convergence_sweep(params, **kwargs)
    return rows, time.perf_counter() - t0
