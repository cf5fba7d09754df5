"""Singlet sector of the two-site, two-fermion Hubbard dimer.

Basis ordering is fixed throughout the package::

    phi1 = c+_{1up} c+_{1dn} |0>
    phi2 = c+_{2up} c+_{2dn} |0>
    phi3 = (c+_{1up} c+_{2dn} - c+_{1dn} c+_{2up}) |0> / sqrt(2)

All 1RDMs are the spin-up block with unit trace. The one-body energy of a
state is therefore ``2 * Tr[h1 @ gamma]`` with ``h1 = [[eps1, -t], [-t, eps2]]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

NORM_TOL = 1e-12
DISK_TOL = 1e-12
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
DEGENERACY_RTOL = 1e-9

BASIS_LABEL = "phi1,phi2,phi3"
TRACE_CONVENTION = "per_spin_block_trace1"


class OutOfDiskError(ValueError):
    """A 1RDM lies outside the N-representable disk."""


# --------------------------------------------------------------------------
# parameter and state types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class OneBodyParams:
    t: float = 0.0
    eps1: float = 0.0
    eps2: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite([self.t, self.eps1, self.eps2])):
            raise ValueError(f"non-finite one-body parameters: {self}")

    @property
    def h1(self) -> np.ndarray:
        """Per-spin one-particle matrix on the two sites."""
        return np.array([[self.eps1, -self.t], [-self.t, self.eps2]], dtype=float)


@dataclass(frozen=True)
class InteractionParams:
    U: float = 0.0
    V: float = 0.0
    X: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite([self.U, self.V, self.X])):
            raise ValueError(f"non-finite interaction parameters: {self}")

    @property
    def is_onsite(self) -> bool:
        return self.V == 0.0 and self.X == 0.0


@dataclass(frozen=True)
class SingletState:
    """Amplitudes (a, b, c) over (phi1, phi2, phi3)."""

    a: complex
    b: complex
    c: complex

    def __post_init__(self):
        norm2 = abs(self.a) ** 2 + abs(self.b) ** 2 + abs(self.c) ** 2
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: |psi|^2 = {norm2!r}")

    @classmethod
    def from_vector(cls, v, normalize: bool = False) -> "SingletState":
        v = np.asarray(v, dtype=complex).reshape(3)
        if normalize:
            v = v / np.linalg.norm(v)
        return cls(complex(v[0]), complex(v[1]), complex(v[2]))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c], dtype=complex)

    @property
    def is_real(self) -> bool:
        # up to a global phase
        v = self.vector
        k = int(np.argmax(np.abs(v)))
        v = v * np.exp(-1j * np.angle(v[k]))
        return bool(np.all(np.abs(v.imag) <= 1e-14))


@dataclass(frozen=True)
class DensityOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (3, 3):
            raise ValueError(f"density operator must be 3x3, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density operator is not Hermitian")
        if abs(np.trace(m).real - 1.0) > NORM_TOL:
            raise ValueError(f"density operator trace {np.trace(m).real!r} != 1")
        if np.linalg.eigvalsh(m).min() < -PSD_TOL:
            raise ValueError("density operator is not positive semidefinite")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def pure(cls, s: SingletState) -> "DensityOperator":
        v = s.vector
        return cls(np.outer(v, v.conj()))

    @classmethod
    def mixture(cls, weights, operators) -> "DensityOperator":
        return cls(sum(w * g.matrix for w, g in zip(weights, operators)))

    @property
    def rank(self) -> int:
        return int(np.sum(np.linalg.eigvalsh(self.matrix) > PSD_TOL))


def _disk_excess(g11, g12_abs2):
    return (np.asarray(g11) - 0.5) ** 2 + g12_abs2 - 0.25


@dataclass(frozen=True)
class Rdm:
    """Complex spin-up block; ``g22 = 1 - g11``.

    Fields may be scalars or equally shaped arrays (a batch of 1RDMs).
    """

    g11: float
    g12: complex

    def __post_init__(self):
        if np.any(_disk_excess(self.g11, np.abs(self.g12) ** 2) > DISK_TOL):
            raise OutOfDiskError(f"1RDM outside the disk: g11={self.g11}, g12={self.g12}")

    @property
    def real_part(self) -> "RealRdm":
        return RealRdm(self.g11, np.real(self.g12))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.g11, self.g12], [np.conj(self.g12), 1.0 - self.g11]])


@dataclass(frozen=True)
class RealRdm:
    g11: float
    g12: float

    def __post_init__(self):
        if np.any(_disk_excess(self.g11, np.asarray(self.g12) ** 2) > DISK_TOL):
            raise OutOfDiskError(f"1RDM outside the disk: g11={self.g11}, g12={self.g12}")

    @property
    def x(self):
        return np.asarray(self.g11) - 0.5

    @property
    def y(self):
        return np.asarray(self.g12)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.g11, self.g12], [self.g12, 1.0 - self.g11]], dtype=float)


@dataclass(frozen=True)
class PolarRdm:
    """Distance ``R`` to the disk boundary and polar angle ``phi`` about (1/2, 0)."""

    R: float
    phi: float

    def __post_init__(self):
        R = np.asarray(self.R)
        if np.any(R < -DISK_TOL) or np.any(R > 0.5 + DISK_TOL):
            raise OutOfDiskError(f"R must lie in [0, 1/2], got {self.R}")


def polar_from_cartesian(r: RealRdm) -> PolarRdm:
    x, y = r.x, r.y
    R = 0.5 - np.hypot(x, y)
    phi = np.mod(np.arctan2(y, x), 2 * np.pi)
    R = np.clip(R, 0.0, 0.5)
    if np.ndim(R) == 0:
        return PolarRdm(float(R), float(phi))
    return PolarRdm(R, phi)


def cartesian_from_polar(p: PolarRdm) -> RealRdm:
    rho = 1.0 - 2.0 * np.asarray(p.R)
    g11 = 0.5 * (1.0 + rho * np.cos(p.phi))
    g12 = 0.5 * rho * np.sin(p.phi)
    if np.ndim(g11) == 0:
        return RealRdm(float(g11), float(g12))
    return RealRdm(g11, g12)


# --------------------------------------------------------------------------
# second quantization on four spin orbitals (1up, 1dn, 2up, 2dn)
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _fock_operators():
    """Jordan-Wigner annihilators and the 16x3 singlet embedding."""
    eye, z = np.eye(2), np.diag([1.0, -1.0])
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])
    ann = []
    for j in range(4):
        ops = [z] * j + [lower] + [eye] * (3 - j)
        ann.append(reduce(np.kron, ops))
    cre = [op.T for op in ann]
    vac = np.zeros(16)
    vac[0] = 1.0
    phi1 = cre[0] @ cre[1] @ vac
    phi2 = cre[2] @ cre[3] @ vac
    phi3 = (cre[0] @ cre[3] - cre[1] @ cre[2]) @ vac / np.sqrt(2.0)
    embed = np.column_stack([phi1, phi2, phi3])
    return tuple(ann), tuple(cre), embed


def _project(op: np.ndarray) -> np.ndarray:
    _, _, embed = _fock_operators()
    return embed.T @ op @ embed


@lru_cache(maxsize=None)
def _rdm_maps():
    """3x3 matrices M with gamma_ij = Tr[M_ij Gamma], gamma_ij = <c+_{j up} c_{i up}>."""
    ann, cre, _ = _fock_operators()
    m11 = _project(cre[0] @ ann[0])
    m12 = _project(cre[2] @ ann[0])
    for m in (m11, m12):
        m.setflags(write=False)
    return m11, m12


@lru_cache(maxsize=None)
def _one_body_terms():
    ann, cre, _ = _fock_operators()
    hop = -sum(cre[i] @ ann[j] + cre[j] @ ann[i] for i, j in ((0, 2), (1, 3)))
    n1 = cre[0] @ ann[0] + cre[1] @ ann[1]
    n2 = cre[2] @ ann[2] + cre[3] @ ann[3]
    return _project(hop), _project(n1), _project(n2)


def onsite_interaction_from_fock(U: float) -> np.ndarray:
    """Singlet-sector matrix of U (n1up n1dn + n2up n2dn) built in Fock space."""
    ann, cre, _ = _fock_operators()
    dbl = cre[0] @ ann[0] @ cre[1] @ ann[1] + cre[2] @ ann[2] @ cre[3] @ ann[3]
    return U * _project(dbl)


def build_one_body_matrix(p: OneBodyParams) -> np.ndarray:
    hop, n1, n2 = _one_body_terms()
    return p.t * hop + p.eps1 * n1 + p.eps2 * n2


def build_interaction_matrix(w: InteractionParams) -> np.ndarray:
    U, V, X = w.U, w.V, w.X
    return np.array([[U, V, X], [V, U, X], [X, X, 0.0]], dtype=float)


def hamiltonian(p: OneBodyParams, w: InteractionParams) -> np.ndarray:
    return build_one_body_matrix(p) + build_interaction_matrix(w)


# --------------------------------------------------------------------------
# states -> 1RDMs
# --------------------------------------------------------------------------


def _rdm_entries(gamma: np.ndarray) -> tuple[float, complex]:
    m11, m12 = _rdm_maps()
    g11 = float(np.real(np.trace(m11 @ gamma)))
    g12 = complex(np.trace(m12 @ gamma))
    return g11, g12


def rdm_from_state(s: SingletState) -> Rdm:
    v = s.vector
    return Rdm(*_rdm_entries(np.outer(v, v.conj())))


def rdm_from_density(g: DensityOperator) -> Rdm:
    return Rdm(*_rdm_entries(g.matrix))


def rdm_linear_map() -> tuple[np.ndarray, np.ndarray]:
    """The constant matrices ``(M11, M12)`` of the state-to-1RDM map."""
    return _rdm_maps()


def expectation(matrix: np.ndarray, s: SingletState) -> float:
    v = s.vector
    return float(np.real(v.conj() @ matrix @ v))


# --------------------------------------------------------------------------
# exact diagonalization
# --------------------------------------------------------------------------


def ground_state(p: OneBodyParams, w: InteractionParams):
    """Lowest eigenvalue, an orthonormal basis of its eigenspace, and its dimension.

    Eigenvalues within ``1e-9 * (spectral range)`` of the minimum count as
    degenerate.
    """
    H = hamiltonian(p, w)
    vals, vecs = np.linalg.eigh(H)
    spread = vals[-1] - vals[0]
    cut = DEGENERACY_RTOL * spread
    deg = int(np.sum(vals - vals[0] <= cut))
    states = [SingletState.from_vector(vecs[:, k], normalize=True) for k in range(deg)]
    return float(vals[0]), states, deg
