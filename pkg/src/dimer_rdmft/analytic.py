"""Closed-form universal functionals of the (generalized) Hubbard dimer.

Every function here accepts scalar or array-valued 1RDM containers, so the
same code path serves single points and whole grids.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .model import (
    InteractionParams,
    PolarRdm,
    RealRdm,
    Rdm,
    cartesian_from_polar,
    polar_from_cartesian,
)

SQRT2 = np.sqrt(2.0)
MEMBERSHIP_TOL = 1e-10
ANGLE_TOL = 1e-10
HESSIAN_MIN_R = 1e-3
KINK_TUBE = 1e-4


class UnsupportedAnalyticError(ValueError):
    """No closed form is available for the requested parameters."""


class FunctionalKind(enum.Enum):
    FR_pure = "fr-pure"
    FR_ens = "fr-ens"
    FC_pure = "fc-pure"
    FC_ens = "fc-ens"
    FCtilde_pure = "fct-pure"
    FCtilde_ens = "fct-ens"

    @property
    def is_pure(self) -> bool:
        return self.value.endswith("pure")

    @property
    def is_tilde(self) -> bool:
        return self.value.startswith("fct")

    @property
    def real_states(self) -> bool:
        return self.value.startswith("fr")

    def ensemble_partner(self) -> "FunctionalKind":
        return FunctionalKind(self.value.replace("pure", "ens"))

    @classmethod
    def parse(cls, text: str) -> "FunctionalKind":
        text = text.strip()
        for k in cls:
            if text in (k.value, k.name):
                return k
        raise ValueError(f"unknown functional kind {text!r}")


def _scalarize(v):
    return float(v) if np.ndim(v) == 0 else v


# --------------------------------------------------------------------------
# on-site interaction
# --------------------------------------------------------------------------


def _fr_onsite_xy(U, x, y2):
    r2 = x * x + y2
    root = np.sqrt(np.clip(1.0 - 4.0 * r2, 0.0, None))
    with np.errstate(invalid="ignore", divide="ignore"):
        val = U * (x * x + 0.5 * y2 * (1.0 - np.sign(U) * root)) / r2
    return np.where(r2 == 0.0, min(0.0, U), val)


def f_r_pure_onsite(U: float, r: RealRdm):
    """Real pure-state functional for W = U (n1up n1dn + n2up n2dn).

    At the disk center the value is the constrained-search minimum,
    ``min(0, U)``; for U > 0 this is the lower semi-continuous 0.
    """
    return _scalarize(_fr_onsite_xy(U, r.x, r.y**2))


def f_ctilde_pure_onsite(U: float, r: Rdm):
    """Complex pure-state functional of the full 1RDM; depends on |g12| only."""
    return f_r_pure_onsite(U, RealRdm(r.g11, np.abs(r.g12)))


def f_c_pure_onsite(U: float, r: RealRdm):
    """Complex pure-state functional of Re(gamma); the lower convex envelope of F_R.

    For U <= 0 the real functional is already convex and is returned as is.
    """
    fr = _fr_onsite_xy(U, r.x, r.y**2)
    if U <= 0:
        return _scalarize(fr)
    g11 = np.asarray(r.g11, dtype=float)
    y2 = r.y**2
    left = y2 <= g11 * (1.0 - 2.0 * g11)
    right = y2 <= g11 * (3.0 - 2.0 * g11) - 1.0
    val = np.where(left, U * (1.0 - 2.0 * g11), np.where(right, U * (2.0 * g11 - 1.0), fr))
    return _scalarize(val)


def c2_candidates(r: RealRdm) -> tuple[float, float]:
    """Weights c^2 of phi3 of the two real pure states mapping to ``r``."""
    x, y = float(r.x), float(r.y)
    r2 = x * x + y * y
    if r2 == 0.0:
        raise ValueError("c^2 candidates are undefined at the disk center")
    root = np.sqrt(max(0.0, 1.0 - 4.0 * r2))
    return y * y * (1.0 + root) / (2.0 * r2), y * y * (1.0 - root) / (2.0 * r2)


# --------------------------------------------------------------------------
# generic reflection-symmetric interaction
# --------------------------------------------------------------------------


def _kink(w: InteractionParams, s):
    return (w.V - w.U) * s - 2.0 * w.V


def f_r_pure_general(w: InteractionParams, p: PolarRdm):
    """Real pure-state functional in polar coordinates (distance to boundary, angle)."""
    U, V, X = w.U, w.V, w.X
    R = np.asarray(p.R, dtype=float)
    s = np.sin(p.phi)
    s2 = s * s
    rho = 1.0 - 2.0 * R
    val = (
        U
        + SQRT2 * X * rho * s
        + 0.5 * (V - U) * s2
        - 0.5 * np.sqrt(np.clip(1.0 - rho * rho, 0.0, None)) * np.abs(_kink(w, s2))
    )
    return _scalarize(val)


def center_value(w: InteractionParams) -> float:
    """Value at (1/2, 0): the infimum over angles of the polar form at R = 1/2.

    The polar form there is piecewise linear in sin^2(phi), so the infimum is
    attained at sin^2 = 0, sin^2 = 1, or the kink.
    """
    U, V = w.U, w.V
    cands = [U - abs(V), 0.5 * (U + V) - 0.5 * abs(U + V)]
    if V != U:
        s = 2.0 * V / (V - U)
        if 0.0 <= s <= 1.0:
            cands.append(U + 0.5 * (V - U) * s)
    return float(min(cands))


def f_r_pure_general_cartesian(w: InteractionParams, r: RealRdm):
    """The same functional written in (g11, g12)."""
    U, V, X = w.U, w.V, w.X
    x, y = r.x, r.y
    r2 = x * x + y * y
    with np.errstate(invalid="ignore", divide="ignore"):
        s2 = np.where(r2 > 0.0, y * y / np.where(r2 > 0.0, r2, 1.0), 0.0)
    val = (
        U
        + 2.0 * SQRT2 * X * y
        + 0.5 * (V - U) * s2
        - np.sqrt(np.clip(0.25 - r2, 0.0, None)) * np.abs((V - U) * s2 - 2.0 * V)
    )
    val = np.where(r2 == 0.0, center_value(w), val)
    return _scalarize(val)


def boundary_interaction_energy(w: InteractionParams, phi):
    """<W> of the unique pure state whose 1RDM sits on the boundary at angle phi."""
    th = 0.5 * np.asarray(phi)
    a, b, c = np.cos(th) ** 2, np.sin(th) ** 2, SQRT2 * np.sin(th) * np.cos(th)
    val = w.U * (a * a + b * b) + 2.0 * w.V * a * b + 2.0 * w.X * c * (a + b)
    return _scalarize(val)


# --------------------------------------------------------------------------
# exchange force
# --------------------------------------------------------------------------


def force_prefactor(w: InteractionParams, phi):
    """C(phi) in dF/dR = -C / sqrt(R) + O(1)."""
    s2 = np.sin(phi) ** 2
    return _scalarize(0.5 * np.abs(_kink(w, s2)))


class _AllAngles:
    """Returned when the prefactor vanishes for every angle (no interaction)."""

    def __repr__(self):
        return "ALL_ANGLES"

    def __contains__(self, phi):
        return True

    def __len__(self):
        raise TypeError("ALL_ANGLES has no length")


ALL_ANGLES = _AllAngles()


def _canonical_angles(angles):
    out = []
    for a in sorted(np.mod(angles, 2 * np.pi)):
        if a > 2 * np.pi - ANGLE_TOL:
            a = 0.0
        if not any(abs(a - b) < ANGLE_TOL for b in out):
            out.append(float(a))
    return sorted(out)


def vanishing_angles(w: InteractionParams):
    """Boundary angles where the exchange-force prefactor is zero."""
    U, V = w.U, w.V
    if U == V:
        return ALL_ANGLES if V == 0.0 else []
    ratio = 2.0 * V / (V - U)
    if ratio < -ANGLE_TOL or ratio > 1.0 + ANGLE_TOL:
        return []
    s = np.arcsin(np.sqrt(np.clip(ratio, 0.0, 1.0)))
    return _canonical_angles([s, -s, np.pi - s, np.pi + s])


# --------------------------------------------------------------------------
# ellipses of non-representable 1RDMs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EllipseSpec:
    """Axis-aligned ellipse in the (g11, g12) plane.

    ``orientation`` names the axis along which the ellipse pair is displaced
    from the disk center; ``branch`` says which member of the pair this is.
    """

    center: tuple[float, float]
    semi_axes: tuple[float, float]
    orientation: str
    branch: str

    def __post_init__(self):
        if min(self.semi_axes) <= 0:
            raise ValueError(f"semi-axes must be positive: {self.semi_axes}")

    def residual(self, g11, g12):
        (c1, c2), (a1, a2) = self.center, self.semi_axes
        q = ((np.asarray(g11) - c1) / a1) ** 2 + ((np.asarray(g12) - c2) / a2) ** 2 - 1.0
        return _scalarize(q)

    def sample(self, n: int = 64, endpoint: bool = False) -> np.ndarray:
        t = np.linspace(0.0, 2 * np.pi, n, endpoint=endpoint)
        (c1, c2), (a1, a2) = self.center, self.semi_axes
        return np.column_stack([c1 + a1 * np.cos(t), c2 + a2 * np.sin(t)])


def ellipse_onsite(U: float) -> list[EllipseSpec]:
    """Boundary of the non-representable set of F_R for on-site U.

    2 g12^2 + (2|g11 - 1/2| - 1/2)^2 = 1/4; empty for U <= 0, where F_R is convex.
    """
    if U <= 0:
        return []
    a1, a2 = 0.25, np.sqrt(2.0) / 4.0
    return [
        EllipseSpec((0.25, 0.0), (a1, a2), "g11", "left"),
        EllipseSpec((0.75, 0.0), (a1, a2), "g11", "right"),
    ]


def onsite_ellipse_residual(g11, g12):
    """Left side minus right side of the on-site ellipse equation."""
    return _scalarize(2.0 * np.asarray(g12) ** 2 + (2.0 * np.abs(np.asarray(g11) - 0.5) - 0.5) ** 2 - 0.25)


def ellipses_general(w: InteractionParams) -> list[EllipseSpec]:
    """Ellipses bounding the non-representable set of F_R for X = 0.

    U > V: a pair displaced along g11; nonempty only for U > 0 and V > -U.
    U < V: a pair displaced along g12; nonempty only for V > 0.
    """
    U, V, X = w.U, w.V, w.X
    if X != 0.0:
        raise UnsupportedAnalyticError("closed-form ellipses are available for X = 0 only")
    if U == V:
        raise UnsupportedAnalyticError("closed-form ellipses are undefined for U = V")
    if U > V:
        if U <= 0 or V <= -U:
            return []
        v = V / U
        ax = 0.25 * np.sqrt(1.0 - v * v)
        ay = 0.25 * np.sqrt(2.0 * (1.0 - v))
        return [
            EllipseSpec((0.5 - ax, 0.0), (ax, ay), "g11", "left"),
            EllipseSpec((0.5 + ax, 0.0), (ax, ay), "g11", "right"),
        ]
    if V <= 0:
        return []
    u = U / V
    k_y = (3.0 - u) ** 2 / (8.0 * (1.0 - u))
    k_x = (3.0 - u) / (4.0 * (1.0 - u))
    ay = 0.25 / np.sqrt(k_y)
    ax = 0.25 / np.sqrt(k_x)
    return [
        EllipseSpec((0.5, ay), (ax, ay), "g12", "upper"),
        EllipseSpec((0.5, -ay), (ax, ay), "g12", "lower"),
    ]


def general_ellipse_residual(w: InteractionParams, g11, g12):
    """Left side minus 1/16 of the written ellipse equation for the active branch."""
    U, V = w.U, w.V
    x = np.asarray(g11) - 0.5
    y = np.asarray(g12)
    if U > V:
        v = V / U
        lhs = y**2 / (2 * (1 - v)) + (np.abs(x) - 0.25 * np.sqrt(1 - v * v)) ** 2 / (1 - v * v)
    else:
        u = U / V
        lhs = (3 - u) ** 2 / (8 * (1 - u)) * (np.abs(y) - 0.25 * np.sqrt(8 * (1 - u) / (3 - u) ** 2)) ** 2 + (
            3 - u
        ) / (4 * (1 - u)) * x**2
    return _scalarize(lhs - 1.0 / 16.0)


def membership(r: RealRdm, ellipses: list[EllipseSpec], tol: float = MEMBERSHIP_TOL):
    """'inside', 'on' or 'outside' the union of ``ellipses``."""
    if not ellipses:
        return "outside"
    q = min(e.residual(r.g11, r.g12) for e in ellipses)
    if q < -tol:
        return "inside"
    if q <= tol:
        return "on"
    return "outside"


def inside_mask(g11, g12, ellipses: list[EllipseSpec], tol: float = 0.0) -> np.ndarray:
    mask = np.zeros(np.shape(g11), dtype=bool)
    for e in ellipses:
        mask |= np.asarray(e.residual(g11, g12)) < -tol
    return mask


# --------------------------------------------------------------------------
# local convexity
# --------------------------------------------------------------------------


def _second_derivatives(f, x, y, h):
    fxx = (f(x + h, y) - 2 * f(x, y) + f(x - h, y)) / h**2
    fyy = (f(x, y + h) - 2 * f(x, y) + f(x, y - h)) / h**2
    fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4 * h * h)
    return fxx, fyy, fxy


def hessian_det_f_r(w: InteractionParams, r: RealRdm, h: float = 1e-5) -> float:
    """det of the (g11, g12) Hessian of F_R by central differences with one Richardson step."""
    p = polar_from_cartesian(r)
    if p.R < HESSIAN_MIN_R:
        raise ValueError(f"too close to the disk boundary (R = {p.R:.2e})")
    if np.hypot(float(r.x), float(r.y)) < 10 * h:
        raise ValueError("Hessian is undefined at the disk center")
    scale = max(1.0, abs(w.U), abs(w.V))
    if abs(_kink(w, np.sin(p.phi) ** 2)) < KINK_TUBE * scale:
        raise ValueError("point lies on the kink locus of the functional")

    def f(a, b):
        return f_r_pure_general_cartesian(w, RealRdm(a, b))

    x0, y0 = float(r.g11), float(r.g12)
    coarse = np.array(_second_derivatives(f, x0, y0, h))
    fine = np.array(_second_derivatives(f, x0, y0, h / 2))
    fxx, fyy, fxy = (4 * fine - coarse) / 3
    return float(fxx * fyy - fxy * fxy)


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------


def has_closed_form(kind: FunctionalKind, w: InteractionParams) -> bool:
    if kind is FunctionalKind.FR_pure:
        return True
    if kind in (FunctionalKind.FC_pure, FunctionalKind.FCtilde_pure):
        return w.is_onsite
    return False


def evaluate(kind: FunctionalKind, w: InteractionParams, r, opts=None) -> float:
    """Value of any of the six functionals at a single 1RDM.

    Tilde kinds take the full complex :class:`Rdm`; the others take the real
    part. Kinds without a closed form are computed by constrained search.
    """
    from . import search

    if kind.is_tilde:
        target = r if isinstance(r, Rdm) else Rdm(r.g11, complex(r.g12))
    else:
        target = r.real_part if isinstance(r, Rdm) else r
    if kind is FunctionalKind.FR_pure:
        return float(f_r_pure_general_cartesian(w, target))
    if kind is FunctionalKind.FCtilde_pure:
        if w.is_onsite:
            return float(f_ctilde_pure_onsite(w.U, target))
        return search.min_pure_complex(w, target, opts)
    if kind is FunctionalKind.FC_pure:
        if w.is_onsite:
            return float(f_c_pure_onsite(w.U, target))
        return search.min_pure_complex_reduced(w, target, opts)
    # ensemble kinds: FR_ens and FC_ens coincide because W is real
    value, _ = search.min_ensemble(w, target, opts)
    return value


__all__ = [
    "ALL_ANGLES",
    "EllipseSpec",
    "FunctionalKind",
    "UnsupportedAnalyticError",
    "boundary_interaction_energy",
    "c2_candidates",
    "cartesian_from_polar",
    "center_value",
    "ellipse_onsite",
    "ellipses_general",
    "evaluate",
    "f_c_pure_onsite",
    "f_ctilde_pure_onsite",
    "f_r_pure_general",
    "f_r_pure_general_cartesian",
    "f_r_pure_onsite",
    "force_prefactor",
    "general_ellipse_residual",
    "has_closed_form",
    "hessian_det_f_r",
    "inside_mask",
    "membership",
    "onsite_ellipse_residual",
    "vanishing_angles",
]
