"""Brute-force constrained-search oracles, convex envelopes and energy recovery.

None of the oracles here use the closed-form functionals; they search the
state space directly and serve as the independent side of every analytic
cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.spatial import ConvexHull

from .analytic import (
    FunctionalKind,
    f_c_pure_onsite,
    f_r_pure_general_cartesian,
)
from .model import (
    DensityOperator,
    InteractionParams,
    OneBodyParams,
    OutOfDiskError,
    RealRdm,
    Rdm,
    SingletState,
    build_interaction_matrix,
    rdm_from_density,
    rdm_from_state,
    rdm_linear_map,
)

SQRT2 = np.sqrt(2.0)
FEASIBILITY_TOL = 1e-10
MINIMIZER_TOL = 1e-8
SNAP_TOL = 1e-12
AXIS_TOL = 1e-13


@dataclass(frozen=True)
class SearchOptions:
    restarts: int = 64
    max_iterations: int = 500
    tolerance: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")


DEFAULT_OPTIONS = SearchOptions()


def _check_disk(g11, g12_abs):
    if (g11 - 0.5) ** 2 + g12_abs**2 > 0.25 + 1e-12:
        raise OutOfDiskError(f"target outside the disk: g11={g11}, |g12|={g12_abs}")


def _energy(wmat, v):
    """<v|W|v> for a vector, or row-wise for a stack of vectors."""
    return np.real(np.einsum("...i,ij,...j->...", np.conj(v), wmat, v))


def _polish_periodic(f, n_scan=512, n_refine=3):
    """Global minimum of a smooth 2*pi-periodic function; ``f`` must accept arrays."""
    tau = np.linspace(0.0, 2 * np.pi, n_scan, endpoint=False)
    vals = f(tau)
    best_val, best_tau = np.inf, 0.0
    step = tau[1] - tau[0]
    for k in np.argsort(vals)[:n_refine]:
        res = optimize.minimize_scalar(
            f, bounds=(tau[k] - step, tau[k] + step), method="bounded", options={"xatol": 1e-13}
        )
        for v, t in ((res.fun, res.x), (vals[k], tau[k])):
            if v < best_val:
                best_val, best_tau = float(v), float(t)
    return best_val, best_tau


# --------------------------------------------------------------------------
# pure real states
# --------------------------------------------------------------------------


def _real_candidates(x, y):
    """All real (a, b, c) with the given (x, y) = (g11 - 1/2, g12), up to sign."""
    r2 = x * x + y * y
    root = np.sqrt(max(0.0, 1.0 - 4.0 * r2))
    out = []
    # p = a + b, m = a - b: p*m = 2x, c*p = sqrt2*y, p^2 + m^2 + 2c^2 = 2
    for p2 in (1.0 + root, 4.0 * r2 / (1.0 + root)):
        if p2 <= 0.0:
            continue
        p = np.sqrt(p2)
        m, c = 2.0 * x / p, SQRT2 * y / p
        v = np.array([(p + m) / 2.0, (p - m) / 2.0, c])
        out.append(v / np.linalg.norm(v))
    return out


def min_pure_real(w: InteractionParams, target: RealRdm, opts: SearchOptions | None = None):
    """Minimum of <W> over real normalized singlets with the given 1RDM."""
    opts = opts or DEFAULT_OPTIONS
    g11, g12 = float(target.g11), float(target.g12)
    _check_disk(g11, abs(g12))
    wmat = build_interaction_matrix(w)
    x, y = g11 - 0.5, g12
    cands = _real_candidates(x, y)
    if x * x + y * y == 0.0:
        # p = 0 branch: a = -b = m/2 with m^2 + 2c^2 = 2, a circle of states
        def circle(theta):
            return np.stack([np.cos(theta) / SQRT2, -np.cos(theta) / SQRT2, np.sin(theta)], axis=-1)

        val, theta = _polish_periodic(lambda t: _energy(wmat, circle(t)))
        cands.append(circle(theta))
    best = min(cands, key=lambda v: _energy(wmat, v))
    state = SingletState.from_vector(best, normalize=True)
    _assert_feasible(rdm_from_state(state), g11, complex(g12))
    return float(_energy(wmat, best)), state


def _assert_feasible(r: Rdm, g11, g12):
    res = max(abs(r.g11 - g11), abs(r.g12 - g12))
    if res > FEASIBILITY_TOL:
        raise RuntimeError(f"constraint residual {res:.2e} exceeds tolerance")


# --------------------------------------------------------------------------
# pure complex states
# --------------------------------------------------------------------------


def _complex_family(x, g12):
    """Closed curve tau -> state vector of complex singlets with 1RDM (x + 1/2, g12).

    Gauge: c real and non-negative. With q = a + conj(b), d = a - conj(b) the
    constraints fix |q| and Re(q conj(d)); c^2 ranges over an interval whose two
    ends join the two signs of Im(q conj(d)).
    """
    m2 = abs(g12) ** 2
    r2 = x * x + m2
    root = np.sqrt(max(0.0, 1.0 - 4.0 * r2))
    u_hi = m2 * (1.0 + root) / (2.0 * r2)
    u_lo = 2.0 * m2 / (1.0 + root)
    u_half = 0.5 * (u_hi - u_lo)
    phase = g12 / abs(g12)

    def vec(tau):
        u = u_lo + u_half * (1.0 + np.cos(tau))
        c = np.sqrt(u)
        qa = SQRT2 * abs(g12) / c
        alpha = 2.0 * x / qa
        beta2 = 2.0 * (1.0 - u) - qa * qa - alpha * alpha
        beta = np.sign(np.sin(tau)) * np.sqrt(np.clip(beta2, 0.0, None))
        q = qa * phase
        d = phase * (alpha + 1j * beta)
        a = 0.5 * (q + d)
        b = np.conj(0.5 * (q - d))
        return np.stack([a, b, c + 0j], axis=-1)

    return vec


def _complex_axis_family(x):
    """g12 = 0 with x != 0: c = 0 and a free relative phase between a and b."""
    aa, bb = np.sqrt(0.5 + x), np.sqrt(max(0.0, 0.5 - x))

    def vec(theta):
        theta = np.asarray(theta, dtype=float)
        return np.stack([np.full(theta.shape, aa + 0j), bb * np.exp(1j * theta), np.zeros(theta.shape, complex)], axis=-1)

    return vec


def _center_complex_min(wmat):
    """g11 = 1/2, g12 = 0: either c = 0 with |a| = |b|, or b = -conj(a)."""

    def c_zero(theta):
        theta = np.asarray(theta, dtype=float)
        one = np.ones(theta.shape)
        return np.stack([one + 0j, np.exp(1j * theta), 0 * one + 0j], axis=-1) / SQRT2

    best, _ = _polish_periodic(lambda t: _energy(wmat, c_zero(t)))

    def q_zero(u, theta):
        u = np.clip(u, 0.0, 1.0)
        a = np.sqrt((1.0 - u) / 2.0) * np.exp(1j * theta)
        return np.stack([a, -np.conj(a), np.sqrt(u) + 0j], axis=-1)

    U, TH = np.meshgrid(np.linspace(0.0, 1.0, 65), np.linspace(0.0, 2 * np.pi, 128, endpoint=False))
    vals = _energy(wmat, q_zero(U, TH)).ravel()
    best = min(best, float(vals.min()))
    for k in np.argsort(vals)[:3]:
        res = optimize.minimize(
            lambda z: float(_energy(wmat, q_zero(z[0], z[1]))), [U.flat[k], TH.flat[k]],
            method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15},
        )
        best = min(best, float(res.fun))
    return float(best)


def min_pure_complex(w: InteractionParams, target: Rdm, opts: SearchOptions | None = None) -> float:
    """Minimum of <W> over complex normalized singlets with the given complex 1RDM."""
    g11, g12 = float(target.g11), complex(target.g12)
    _check_disk(g11, abs(g12))
    wmat = build_interaction_matrix(w)
    x = g11 - 0.5
    if abs(g12) < AXIS_TOL:
        # the c > 0 parameterization degenerates; treat as g12 = 0
        if abs(x) < AXIS_TOL:
            return _center_complex_min(wmat)
        vec = _complex_axis_family(x)
        g12 = 0j
    else:
        vec = _complex_family(x, g12)
    val, tau = _polish_periodic(lambda t: _energy(wmat, vec(t)))
    _assert_feasible(rdm_from_state(SingletState.from_vector(vec(tau), normalize=True)), g11, g12)
    return val


def min_pure_complex_reduced(
    w: InteractionParams, target: RealRdm, opts: SearchOptions | None = None, n_scan: int = 41
) -> float:
    """Minimum of :func:`min_pure_complex` over the free imaginary part of g12."""
    g11, y = float(target.g11), float(target.g12)
    _check_disk(g11, abs(y))
    s_max = np.sqrt(max(0.0, 0.25 - (g11 - 0.5) ** 2 - y * y))

    def f(s):
        s = float(np.clip(s, -s_max, s_max))
        return min_pure_complex(w, Rdm(g11, complex(y, s)), opts)

    if s_max == 0.0:
        return f(0.0)
    grid = np.linspace(-s_max, s_max, n_scan)
    vals = np.array([f(s) for s in grid])
    step = grid[1] - grid[0]
    best = float(vals.min())
    for k in np.argsort(vals)[:3]:
        lo, hi = max(-s_max, grid[k] - step), min(s_max, grid[k] + step)
        res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        best = min(best, float(res.fun))
    return best


# --------------------------------------------------------------------------
# ensembles
# --------------------------------------------------------------------------


def _ensemble_problem(w: InteractionParams, g11: float, g12: complex, complex_states: bool):
    wmat = build_interaction_matrix(w)
    m11, m12 = rdm_linear_map()
    nvar = 12 if complex_states else 6

    def unpack(z):
        if complex_states:
            return (z[:6] + 1j * z[6:]).reshape(3, 2)
        return z.reshape(3, 2)

    def gamma(z):
        L = unpack(z)
        return L @ L.conj().T

    def objective(z):
        return float(np.real(np.trace(wmat @ gamma(z))))

    # each constraint is Re Tr[A_k Gamma] - b_k with A_k Hermitian
    mats = [np.eye(3), m11, (m12 + m12.conj().T) / 2]
    rhs = [1.0, g11, g12.real]
    if complex_states:
        mats.append((m12 - m12.conj().T) / 2j)
        rhs.append(g12.imag)

    def constraints(z):
        G = gamma(z)
        return np.array([np.real(np.trace(A @ G)) - b for A, b in zip(mats, rhs)])

    def jacobian(z):
        L = unpack(z)
        rows = []
        for A in mats:
            d = 2.0 * (A @ L)
            rows.append(np.concatenate([d.real.ravel(), d.imag.ravel()]) if complex_states else d.real.ravel())
        return np.array(rows)

    return nvar, gamma, objective, constraints, jacobian


def _project_constraints(z, constraints, jacobian, iters=200):
    # Gauss-Newton; only linear near the disk edge, where the Jacobian turns singular
    for _ in range(iters):
        c = constraints(z)
        if np.max(np.abs(c)) < 1e-15:
            break
        z = z - np.linalg.lstsq(jacobian(z), c, rcond=None)[0]
    return z


def min_ensemble(w: InteractionParams, target, opts: SearchOptions | None = None):
    """Minimum of Tr[W Gamma] over rank-2 density operators with the given 1RDM.

    A real target is searched over real symmetric Gamma; a complex :class:`Rdm`
    with nonzero imaginary part over complex Hermitian Gamma.
    """
    opts = opts or DEFAULT_OPTIONS
    if isinstance(target, Rdm):
        g11, g12 = float(target.g11), complex(target.g12)
    else:
        g11, g12 = float(target.g11), complex(float(target.g12))
    _check_disk(g11, abs(g12))
    complex_states = g12.imag != 0.0
    nvar, gamma, objective, constraints, jacobian = _ensemble_problem(w, g11, g12, complex_states)
    rng = np.random.default_rng(opts.seed)
    cons = {"type": "eq", "fun": constraints, "jac": jacobian}
    best_val, best_z = np.inf, None
    agree = 0
    for _ in range(opts.restarts):
        z0 = rng.normal(size=nvar)
        z0 /= np.linalg.norm(z0)
        res = optimize.minimize(
            objective, z0, method="SLSQP", constraints=[cons],
            options={"maxiter": opts.max_iterations, "ftol": opts.tolerance},
        )
        z = _project_constraints(res.x, constraints, jacobian)
        if np.max(np.abs(constraints(z))) > FEASIBILITY_TOL:
            continue
        val = objective(z)
        if val < best_val - 1e-9:
            best_val, best_z, agree = val, z, 1
        elif abs(val - best_val) <= 1e-9:
            agree += 1
            if val < best_val:
                best_val, best_z = val, z
        if agree >= 6:
            break
    if best_z is None:
        raise RuntimeError("ensemble search found no feasible point")
    G = gamma(best_z)
    G = G / np.real(np.trace(G))
    op = DensityOperator(G)
    _assert_feasible(rdm_from_density(op), g11, g12)
    return float(best_val), op


# --------------------------------------------------------------------------
# grids and the lower convex envelope
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GridField:
    """Values on a square (g11, g12) grid clipped to the disk.

    ``values[i, j]`` belongs to ``(g11[i], g12[j])`` and is NaN where
    ``mask`` is False. ``ring`` optionally carries extra exact boundary
    samples as rows (g11, g12, value).
    """

    g11: np.ndarray
    g12: np.ndarray
    values: np.ndarray
    mask: np.ndarray
    ring: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.g11) < 2 or len(self.g12) < 2:
            raise ValueError("grid resolution must be >= 2 per axis")
        if self.values.shape != (len(self.g11), len(self.g12)) or self.mask.shape != self.values.shape:
            raise ValueError("values and mask must match the grid axes")

    @property
    def resolution(self) -> int:
        return len(self.g11)

    @property
    def spacing(self) -> float:
        return float(self.g11[1] - self.g11[0])

    def mesh(self):
        return np.meshgrid(self.g11, self.g12, indexing="ij")

    def nodes(self):
        """(g11, g12, value) of unmasked nodes, flattened."""
        G11, G12 = self.mesh()
        return G11[self.mask], G12[self.mask], self.values[self.mask]

    def with_values(self, values, ring=None, **meta) -> "GridField":
        return GridField(self.g11, self.g12, values, self.mask, ring, {**self.meta, **meta})


def disk_grid(resolution: int):
    g11 = np.linspace(0.0, 1.0, resolution)
    g12 = np.linspace(-0.5, 0.5, resolution)
    G11, G12 = np.meshgrid(g11, g12, indexing="ij")
    mask = (G11 - 0.5) ** 2 + G12**2 <= 0.25 + 1e-12
    return g11, g12, mask


def boundary_ring(n: int) -> tuple[np.ndarray, np.ndarray]:
    phi = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    return 0.5 + 0.5 * np.cos(phi), 0.5 * np.sin(phi)


def sample_grid(func, resolution: int, ring_points: int | None = None, **meta) -> GridField:
    """Evaluate a vectorized ``func(g11, g12)`` on the disk grid.

    ``ring_points`` (default ``4 * resolution``; 0 disables) adds exact samples
    on the disk boundary.
    """
    g11, g12, mask = disk_grid(resolution)
    G11, G12 = np.meshgrid(g11, g12, indexing="ij")
    values = np.full(mask.shape, np.nan)
    values[mask] = func(G11[mask], G12[mask])
    n_ring = 4 * resolution if ring_points is None else ring_points
    ring = None
    if n_ring:
        bx, by = boundary_ring(n_ring)
        ring = np.column_stack([bx, by, func(bx, by)])
    return GridField(g11, g12, values, mask, ring, {"resolution": resolution, "mask": "disk", **meta})


def _hull_values(px, py, pz, nbins=128):
    """Lower convex hull of lifted points, evaluated at every input point."""
    A = np.column_stack([px, py, np.ones_like(px)])
    coef, *_ = np.linalg.lstsq(A, pz, rcond=None)
    if np.max(np.abs(A @ coef - pz)) < 1e-13 * max(1.0, np.max(np.abs(pz))):
        return pz.copy()
    hull = ConvexHull(np.column_stack([px, py, pz]))
    eq = hull.equations
    low = eq[:, 2] < -1e-12
    eq, simp = eq[low], hull.simplices[low]
    pa, pb, pc = -eq[:, 0] / eq[:, 2], -eq[:, 1] / eq[:, 2], -eq[:, 3] / eq[:, 2]

    env = pz.copy()
    is_vertex = np.zeros(len(pz), dtype=bool)
    is_vertex[np.unique(simp)] = True
    q = np.flatnonzero(~is_vertex)
    if len(q) == 0:
        return env

    # bin facets by bounding box so each node only tests nearby planes
    x0, y0 = px.min(), py.min()
    sx = (px.max() - x0) / nbins * (1 + 1e-9)
    sy = (py.max() - y0) / nbins * (1 + 1e-9)

    def bin_of(v, lo, s):
        return np.clip(np.floor((v - lo) / s).astype(int), 0, nbins - 1)

    tx, ty = px[simp], py[simp]
    bx0, bx1 = bin_of(tx.min(1), x0, sx), bin_of(tx.max(1), x0, sx)
    by0, by1 = bin_of(ty.min(1), y0, sy), bin_of(ty.max(1), y0, sy)
    qbin = bin_of(px[q], x0, sx) * nbins + bin_of(py[q], y0, sy)
    needed = np.zeros(nbins * nbins, dtype=bool)
    needed[qbin] = True

    ny = by1 - by0 + 1
    count = (bx1 - bx0 + 1) * ny
    fidx = np.repeat(np.arange(len(pa)), count)
    off = np.arange(count.sum()) - np.repeat(np.cumsum(count) - count, count)
    fbin = (bx0[fidx] + off // ny[fidx]) * nbins + (by0[fidx] + off % ny[fidx])
    keep = needed[fbin]
    fidx, fbin = fidx[keep], fbin[keep]
    order = np.argsort(fbin, kind="stable")
    fidx, fbin = fidx[order], fbin[order]
    starts = np.searchsorted(fbin, np.arange(nbins * nbins))
    ends = np.searchsorted(fbin, np.arange(nbins * nbins), side="right")

    qorder = np.argsort(qbin, kind="stable")
    qsorted = qbin[qorder]
    for b in np.unique(qsorted):
        nodes = q[qorder[np.searchsorted(qsorted, b) : np.searchsorted(qsorted, b, side="right")]]
        fs = fidx[starts[b] : ends[b]]
        planes = np.outer(px[nodes], pa[fs]) + np.outer(py[nodes], pb[fs]) + pc[fs]
        env[nodes] = np.minimum(pz[nodes], planes.max(axis=1))
    return env


def lower_convex_envelope(f: GridField) -> GridField:
    """Discrete lower convex envelope from the lower faces of the lifted convex hull."""
    gx, gy, gv = f.nodes()
    if len(gv) < 3:
        raise ValueError("need at least 3 unmasked nodes")
    px, py, pz = gx, gy, gv
    if f.ring is not None:
        px = np.concatenate([gx, f.ring[:, 0]])
        py = np.concatenate([gy, f.ring[:, 1]])
        pz = np.concatenate([gv, f.ring[:, 2]])
    env = _hull_values(px, py, pz)
    env = np.where(np.abs(env - pz) <= SNAP_TOL * np.maximum(1.0, np.abs(pz)), pz, env)
    values = np.full(f.values.shape, np.nan)
    values[f.mask] = env[: len(gv)]
    ring = None if f.ring is None else np.column_stack([f.ring[:, :2], env[len(gv) :]])
    return f.with_values(values, ring, envelope=True)


# --------------------------------------------------------------------------
# Legendre-Fenchel energy
# --------------------------------------------------------------------------


def one_body_energy(p: OneBodyParams, g11, g12):
    """2 Tr[h1 gamma] for the per-spin block gamma."""
    return 2.0 * p.eps1 * g11 + 2.0 * p.eps2 * (1.0 - g11) - 4.0 * p.t * g12


def grid_functional(kind: FunctionalKind, w: InteractionParams, resolution: int) -> GridField:
    """Real-variable functional of ``kind`` sampled on the disk grid.

    Pure real kinds use the closed form. Every other kind reduces, for real
    one-body terms, to the ensemble functional: on-site via its closed form,
    otherwise via the lower convex envelope of the real pure samples.
    """

    def fr(a, b):
        return f_r_pure_general_cartesian(w, RealRdm(a, b))

    if kind is FunctionalKind.FR_pure:
        return sample_grid(fr, resolution, kind=kind.value)
    if w.is_onsite:
        return sample_grid(lambda a, b: f_c_pure_onsite(w.U, RealRdm(a, b)), resolution, kind=kind.value)
    return lower_convex_envelope(sample_grid(fr, resolution, kind=kind.value))


def _to_disk(z):
    x, y = z[0] - 0.5, z[1]
    r = np.hypot(x, y)
    if r > 0.5:
        x, y = 0.5 * x / r, 0.5 * y / r
    return 0.5 + x, y


def legendre_fenchel_energy(
    p: OneBodyParams, kind: FunctionalKind, w: InteractionParams, resolution: int = 801, polish: bool = True
):
    """Ground-state energy as min over the disk of 2 Tr[h1 gamma] + F(gamma).

    Returns the energy and every minimizer within ``MINIMIZER_TOL`` (grid
    nodes plus polished points, deduplicated).
    """
    if resolution < 51:
        raise ValueError("resolution must be >= 51")
    field_ = grid_functional(kind, w, resolution)
    G11, G12 = field_.mesh()
    total = np.where(field_.mask, one_body_energy(p, G11, G12) + field_.values, np.inf)
    pts = [(G11[field_.mask], G12[field_.mask], total[field_.mask])]
    if field_.ring is not None:
        rx, ry, rv = field_.ring.T
        pts.append((rx, ry, one_body_energy(p, rx, ry) + rv))
    px, py, pv = (np.concatenate(c) for c in zip(*pts))

    cand = [(float(v), float(a), float(b)) for v, a, b in zip(pv, px, py)]
    if polish:
        # min of a linear term over F equals the min over conv F, so polishing
        # on the real pure closed form is valid for every kind
        def objective(z):
            a, b = _to_disk(z)
            return float(one_body_energy(p, a, b) + f_r_pure_general_cartesian(w, RealRdm(a, b)))

        def from_sqrt_polar(z):
            rho = 1.0 - 2.0 * min(z[0] * z[0], 0.5)
            return 0.5 * (1.0 + rho * np.cos(z[1])), 0.5 * rho * np.sin(z[1])

        def objective_polar(z):
            # sqrt(R) as coordinate keeps the boundary divergence of dF/dR finite
            return objective(np.array(from_sqrt_polar(z)))

        nm = {"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000}
        for k in np.argsort(pv)[:5]:
            res = optimize.minimize(objective, [px[k], py[k]], method="Nelder-Mead", options=nm)
            a, b = _to_disk(res.x)
            cand.append((float(res.fun), a, b))
            x0, y0 = px[k] - 0.5, py[k]
            z0 = [np.sqrt(max(0.0, 0.5 - np.hypot(x0, y0))), np.arctan2(y0, x0)]
            res = optimize.minimize(objective_polar, z0, method="Nelder-Mead", options=nm)
            a, b = _to_disk(from_sqrt_polar(res.x))
            cand.append((float(res.fun), a, b))
    E = min(c[0] for c in cand)
    mins: list[tuple[float, float]] = []
    for v, a, b in sorted(c for c in cand if c[0] <= E + MINIMIZER_TOL):
        if all(np.hypot(a - c, b - d) > 1e-6 for c, d in mins):
            mins.append((a, b))
    return float(E), [RealRdm(a, b) for a, b in mins]


__all__ = [
    "DEFAULT_OPTIONS",
    "GridField",
    "SearchOptions",
    "boundary_ring",
    "disk_grid",
    "grid_functional",
    "legendre_fenchel_energy",
    "lower_convex_envelope",
    "min_ensemble",
    "min_pure_complex",
    "min_pure_complex_reduced",
    "min_pure_real",
    "one_body_energy",
    "sample_grid",
]
