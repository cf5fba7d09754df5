"""v-representability: point classification, maps, sweeps and boundary forces."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, optimize

from .analytic import (
    FunctionalKind,
    evaluate,
    f_r_pure_general,
    force_prefactor,
)
from .model import (
    InteractionParams,
    OneBodyParams,
    PolarRdm,
    RealRdm,
    Rdm,
    SingletState,
    ground_state,
    hamiltonian,
    polar_from_cartesian,
    rdm_from_state,
)
from .search import GridField, SearchOptions, grid_functional, lower_convex_envelope

BOUNDARY_BAND = 1e-3
GAP_RTOL = 1e-6
PREFACTOR_TOL = 1e-9
FIT_RESIDUAL_TOL = 1e-2
ZERO_DERIVATIVE = 1e-12


class VrepStatus(enum.IntEnum):
    representable = 0
    not_representable = 1
    boundary_excluded = 2
    boundary_touchpoint = 3


@dataclass(frozen=True)
class VrepVerdict:
    status: VrepStatus
    gap: float


def _gap_threshold(f_ens, tol):
    return tol * np.maximum(1.0, np.abs(f_ens))


def _boundary_status(w, phi):
    scale = max(1.0, abs(w.U), abs(w.V))
    c = np.asarray(force_prefactor(w, phi))
    return np.where(c > PREFACTOR_TOL * scale, VrepStatus.boundary_excluded, VrepStatus.boundary_touchpoint)


def classify_point(
    kind_pure: FunctionalKind,
    kind_ens: FunctionalKind,
    w: InteractionParams,
    r: RealRdm,
    tol: float = GAP_RTOL,
    opts: SearchOptions | None = None,
) -> VrepVerdict:
    """Compare a pure functional with its ensemble counterpart at one 1RDM.

    Inside the boundary band the verdict follows the sign of the exchange
    force instead: a nonzero prefactor excludes the point.
    """
    f_pure = evaluate(kind_pure, w, r, opts)
    f_ens = f_pure if kind_pure is kind_ens else evaluate(kind_ens, w, r, opts)
    gap = float(f_pure - f_ens)
    p = polar_from_cartesian(r)
    if p.R < BOUNDARY_BAND:
        return VrepVerdict(VrepStatus(int(_boundary_status(w, p.phi))), gap)
    status = VrepStatus.not_representable if gap > _gap_threshold(f_ens, tol) else VrepStatus.representable
    return VrepVerdict(status, gap)


@dataclass(frozen=True)
class VrepMap:
    """Verdict codes and raw gaps on the disk grid."""

    status: GridField
    gap: GridField

    def not_representable(self) -> np.ndarray:
        return self.status.mask & (np.nan_to_num(self.status.values, nan=-1) == VrepStatus.not_representable)

    def region_count(self) -> int:
        _, n = ndimage.label(self.not_representable())
        return int(n)

    def counts(self) -> dict[str, int]:
        vals = self.status.values[self.status.mask]
        return {s.name: int(np.sum(vals == s)) for s in VrepStatus}


def vrep_map(kinds, w: InteractionParams, resolution: int = 201, tol: float = GAP_RTOL) -> VrepMap:
    """Classify every disk-grid node for the pair ``kinds = (pure, ensemble)``.

    The ensemble side is the discrete lower convex envelope of the pure grid.
    Complex-variable pure kinds coincide with the ensemble functional on this
    two-site system, so their interior maps are empty.
    """
    if resolution < 101:
        raise ValueError("resolution must be >= 101")
    kind_pure, kind_ens = kinds
    pure = grid_functional(kind_pure, w, resolution)
    ens = pure if kind_ens is kind_pure else lower_convex_envelope(pure)
    G11, G12 = pure.mesh()
    m = pure.mask
    gap = np.full(m.shape, np.nan)
    gap[m] = pure.values[m] - ens.values[m]
    status = np.full(m.shape, np.nan)
    status[m] = np.where(
        gap[m] > _gap_threshold(ens.values[m], tol), VrepStatus.not_representable, VrepStatus.representable
    )
    p = polar_from_cartesian(RealRdm(G11[m], G12[m]))
    band = p.R < BOUNDARY_BAND
    sub = status[m]
    sub[band] = _boundary_status(w, p.phi[band])
    status[m] = sub
    meta = {"kinds": [kind_pure.value, kind_ens.value], "U": w.U, "V": w.V, "X": w.X, "tolerance": tol}
    return VrepMap(pure.with_values(status, None, field="status", **meta), pure.with_values(gap, None, field="gap", **meta))


# --------------------------------------------------------------------------
# ground-state sweep
# --------------------------------------------------------------------------

SWEEP_COLUMNS = ("t", "eps1", "eps2", "g11", "g12", "energy", "degeneracy")


@dataclass(frozen=True)
class SweepResult:
    rows: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return self.rows[:, 3:5]

    def rdms(self) -> list[RealRdm]:
        return [RealRdm(a, b) for a, b in self.points]


def ground_state_sweep(
    w: InteractionParams,
    t_range: tuple[float, float] = (1e-3, 1e2),
    eps_range: tuple[float, float] | None = None,
    samples: int = 10_000,
) -> SweepResult:
    """Ground-state 1RDMs over a deterministic (t, eps1 - eps2) grid.

    ``t`` is log-spaced with both signs, the site-energy difference linear and
    split symmetrically. Degenerate ground spaces contribute one row per
    eigenvector.
    """
    if samples < 1000:
        raise ValueError("samples must be >= 1000")
    if eps_range is None:
        s = 10.0 * max(1.0, abs(w.U))
        eps_range = (-s, s)
    # about 4 site-energy values per t value covers the attained set most evenly
    n_t = max(2, int(round(np.sqrt(samples / 8))))
    n_e = int(np.ceil(samples / (2 * n_t)))
    ts = np.geomspace(*t_range, n_t)
    ts = np.concatenate([-ts[::-1], ts])
    rows = []
    for t in ts:
        for d in np.linspace(*eps_range, n_e):
            p = OneBodyParams(float(t), 0.5 * d, -0.5 * d)
            E, states, deg = ground_state(p, w)
            for st in states:
                r = rdm_from_state(st)
                rows.append((t, p.eps1, p.eps2, r.g11, r.g12.real, E, deg))
    return SweepResult(np.array(rows, dtype=float))


# --------------------------------------------------------------------------
# degenerate family
# --------------------------------------------------------------------------


def degenerate_family(x: complex, sign: int = 1, branch: str = "left") -> tuple[SingletState, Rdm]:
    """Superposition of a doubly occupied site and phi3 with weight ``x``.

    ``left``: x on phi2 (doubly occupied site 2); ``right``: x on phi1.
    """
    x = complex(x)
    if abs(x) > 1.0 + 1e-12:
        raise ValueError(f"|x| must not exceed 1, got {abs(x)}")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    c = sign * np.sqrt(max(0.0, 1.0 - abs(x) ** 2))
    if branch == "left":
        v = [0.0, x, c]
    elif branch == "right":
        v = [x, 0.0, c]
    else:
        raise ValueError(f"unknown branch {branch!r}")
    s = SingletState.from_vector(v, normalize=True)
    return s, rdm_from_state(s)


def _spectral_gap(w, delta, t=0.0):
    p = OneBodyParams(t, 0.5 * delta, -0.5 * delta)
    vals = np.linalg.eigvalsh(hamiltonian(p, w))
    return float(vals[1] - vals[0])


def locate_degenerate_h(w: InteractionParams, branch: str = "left", n_scan: int = 2001) -> OneBodyParams:
    """Site-energy difference at t = 0 where the ground state becomes degenerate.

    Scans eps1 - eps2 over the half line belonging to ``branch`` and refines
    the minimum of the spectral gap.
    """
    span = 10.0 * max(1.0, abs(w.U), abs(w.V), abs(w.X))
    lo, hi = (0.0, span) if branch == "left" else (-span, 0.0)
    grid = np.linspace(lo, hi, n_scan)
    gaps = np.array([_spectral_gap(w, d) for d in grid])
    k = int(np.argmin(gaps))
    step = grid[1] - grid[0]
    res = optimize.minimize_scalar(
        lambda d: _spectral_gap(w, d), bounds=(grid[k] - step, grid[k] + step),
        method="bounded", options={"xatol": 1e-14},
    )
    d = float(res.x) if res.fun <= gaps[k] else float(grid[k])
    p = OneBodyParams(0.0, 0.5 * d, -0.5 * d)
    if ground_state(p, w)[2] < 2:
        raise RuntimeError("no ground-state degeneracy found on the scanned line")
    return p


# --------------------------------------------------------------------------
# exchange force
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ForceFit:
    prefactor: float
    exponent: float
    residual: float
    phi: float
    ok: bool = True


def force_fit(
    w: InteractionParams, phi: float, r_min: float = 1e-4, r_max: float = 1e-2, points: int = 16
) -> ForceFit:
    """Fit |dF/dR| ~ C R^p along a ray at angle ``phi`` near the boundary.

    The derivative is a central difference of the real pure functional. The
    log-log model carries the first two corrections of the boundary expansion,
    log|dF/dR| = log C + p log R + a sqrt(R) + b R, so that C and p are not
    biased by the O(1) and O(sqrt R) terms. An
    identically vanishing derivative yields ``prefactor = 0`` and a NaN
    exponent; a poor fit is returned with ``ok = False``.
    """
    if not (0 < r_min < r_max <= 0.05):
        raise ValueError("need 0 < r_min < r_max <= 0.05")
    if points < 8:
        raise ValueError("need at least 8 points")
    R = np.geomspace(r_min, r_max, points)
    h = 1e-3 * R
    dF = (f_r_pure_general(w, PolarRdm(R + h, phi)) - f_r_pure_general(w, PolarRdm(R - h, phi))) / (2 * h)
    mag = np.abs(dF)
    if np.all(mag < ZERO_DERIVATIVE):
        return ForceFit(float(mag.max()), float("nan"), 0.0, float(phi), True)
    if np.any(mag == 0.0):
        return ForceFit(float(mag.max()), float("nan"), float("inf"), float(phi), False)
    A = np.column_stack([np.ones_like(R), np.log(R), np.sqrt(R), R])
    coef, *_ = np.linalg.lstsq(A, np.log(mag), rcond=None)
    resid = float(np.sqrt(np.mean((np.log(mag) - A @ coef) ** 2)))
    return ForceFit(float(np.exp(coef[0])), float(coef[1]), resid, float(phi), resid <= FIT_RESIDUAL_TOL)


__all__ = [
    "BOUNDARY_BAND",
    "ForceFit",
    "SWEEP_COLUMNS",
    "SweepResult",
    "VrepMap",
    "VrepStatus",
    "VrepVerdict",
    "classify_point",
    "degenerate_family",
    "force_fit",
    "ground_state_sweep",
    "locate_degenerate_h",
    "vrep_map",
]
