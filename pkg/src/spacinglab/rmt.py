"""Gaussian matrix ensembles.

Sampling for the three classical symmetry classes, eigenvalue extraction by
cyclic Jacobi rotations, two routes to the 2x2 level spacing, the joint
eigenvalue log-density, and the exact matrix-valued OU transition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonConvergenceError, UnsupportedKindError

_JACOBI_SWEEPS = 100
_JACOBI_REL_TOL = 1e-12
_MAX_DIM = 64


@dataclass(frozen=True)
class EnsembleSpec:
    """Symmetry index, matrix size, element scale, and the OU time scale."""

    dyson_index: int
    dim: int
    scale2: float = 1.0
    friction: float = 1.0

    def __post_init__(self):
        if self.dyson_index not in (1, 2, 4):
            raise DomainError(
                f"symmetry index must be 1, 2, or 4, got {self.dyson_index}")
        if int(self.dim) != self.dim or self.dim < 2:
            raise DomainError("dimension must be an integer of at least 2")
        object.__setattr__(self, "dim", int(self.dim))
        if not (self.scale2 > 0.0 and math.isfinite(self.scale2)):
            raise DomainError("scale parameter must be positive and finite")
        if not (self.friction > 0.0 and math.isfinite(self.friction)):
            raise DomainError("friction must be positive and finite")

    @property
    def independent_count(self) -> int:
        """Independent real components, n + n(n-1) beta/2."""
        n = self.dim
        return n + n * (n - 1) * self.dyson_index // 2


@dataclass(frozen=True)
class MatrixState:
    """One ensemble member; the array layout is fixed by the symmetry class.

    Index 1 stores a real symmetric (n, n) array, index 2 a complex
    Hermitian one.  Index 4 (size 2 only) stores the complex 4x4 self-dual
    embedding of the quaternion matrix, whose two levels are Kramers
    degenerate.
    """

    dyson_index: int
    matrix: np.ndarray
    eigenvalues: tuple = None   # optional cache, ascending

    def __post_init__(self):
        if self.dyson_index not in (1, 2, 4):
            raise DomainError(f"symmetry index must be 1, 2, or 4")
        m = np.array(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
            raise DomainError("matrix must be square and at least 2x2")
        if self.dyson_index == 1 and not np.isrealobj(m):
            raise DomainError("the orthogonal class stores a real matrix")
        # exact by construction, so exact equality is the invariant
        if not np.array_equal(m, m.conj().T):
            raise DomainError("matrix must be Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        n = self.matrix.shape[0]
        return n // 2 if self.dyson_index == 4 else n


def _validate_count(count) -> int:
    if int(count) != count or count < 1:
        raise DomainError("sample count must be a positive integer")
    return int(count)


def sample_matrix(spec: EnsembleSpec, rng) -> MatrixState:
    """One draw with element variance (a^2/2 beta)(1 + delta_ij) per real
    component, i.e. P(M) proportional to exp(-beta Tr MM* / 2 a^2)."""
    n, beta, a2 = spec.dim, spec.dyson_index, spec.scale2
    sig_diag = math.sqrt(a2 / beta)
    sig_off = math.sqrt(a2 / (2.0 * beta))
    if beta == 1:
        upper = np.zeros((n, n))
        upper[np.triu_indices(n, 1)] = rng.normal(0.0, sig_off, n * (n - 1) // 2)
        m = upper + upper.T + np.diag(rng.normal(0.0, sig_diag, n))
        return MatrixState(1, m)
    if beta == 2:
        cnt = n * (n - 1) // 2
        x = np.zeros((n, n))
        y = np.zeros((n, n))
        x[np.triu_indices(n, 1)] = rng.normal(0.0, sig_off, cnt)
        y[np.triu_indices(n, 1)] = rng.normal(0.0, sig_off, cnt)
        m = (x + x.T) + 1j * (y - y.T) + np.diag(rng.normal(0.0, sig_diag, n))
        return MatrixState(2, m)
    if n != 2:
        raise UnsupportedKindError(
            "the quaternion class is implemented for dimension 2 only")
    d = rng.normal(0.0, sig_diag, 2)
    q = rng.normal(0.0, sig_off, 4)
    block = np.array([[q[0] + 1j * q[1], q[2] + 1j * q[3]],
                      [-q[2] + 1j * q[3], q[0] - 1j * q[1]]])
    m = np.zeros((4, 4), dtype=complex)
    m[:2, :2] = d[0] * np.eye(2)
    m[2:, 2:] = d[1] * np.eye(2)
    m[:2, 2:] = block
    m[2:, :2] = block.conj().T
    return MatrixState(4, m)


def _jacobi(a: np.ndarray) -> np.ndarray:
    """Cyclic Jacobi on a real symmetric array (modified in place)."""
    n = a.shape[0]
    scale = float(np.linalg.norm(a))
    if scale == 0.0:
        return np.zeros(n)
    tol = _JACOBI_REL_TOL * scale
    skip = tol / n
    for _ in range(_JACOBI_SWEEPS):
        # summing the off-diagonal entries directly avoids the cancellation
        # floor of the Frobenius-minus-diagonal form
        stripped = a.copy()
        np.fill_diagonal(stripped, 0.0)
        off2 = float(np.sum(stripped * stripped))
        if off2 <= tol * tol:
            return np.sort(np.diag(a).copy())
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
    raise NonConvergenceError(
        f"off-diagonal norm still above tolerance after {_JACOBI_SWEEPS} sweeps")


def eigenvalues(state: MatrixState) -> np.ndarray:
    """Ascending spectrum.

    Complex Hermitian input goes through the real doubling embedding
    [[X, -Y], [Y, X]], whose spectrum holds every eigenvalue twice; the
    duplicates are dropped.  The quaternion class additionally drops the
    Kramers copy, leaving its two distinct levels.
    """
    if state.eigenvalues is not None:
        return np.asarray(state.eigenvalues, dtype=float)
    m = state.matrix
    if m.shape[0] > _MAX_DIM:
        raise DomainError(f"dimension is capped at {_MAX_DIM}")
    if np.isrealobj(m):
        eigs = _jacobi(np.array(m, dtype=float))
    else:
        x, y = m.real.copy(), m.imag.copy()
        eigs = _jacobi(np.block([[x, -y], [y, x]]))[::2]
    if state.dyson_index == 4:
        eigs = eigs[::2]
    return eigs


def spacing_from_matrix(spec: EnsembleSpec, rng, count: int) -> np.ndarray:
    """Gap |lambda_2 - lambda_1| per 2x2 draw, batch-rescaled to mean 1.

    The gap comes from the exact two-level algebra
    2 sqrt(((m_11 - m_22)/2)^2 + |m_12|^2), evaluated on element samples
    with the ensemble variances; the eigensolver route agrees to machine
    precision.
    """
    if spec.dim != 2:
        raise DomainError("the matrix spacing construction needs dimension 2")
    count = _validate_count(count)
    beta, a2 = spec.dyson_index, spec.scale2
    n_off = {1: 1, 2: 2, 4: 4}[beta]
    d = rng.normal(0.0, math.sqrt(a2 / beta), size=(count, 2))
    c = rng.normal(0.0, math.sqrt(a2 / (2.0 * beta)), size=(count, n_off))
    gaps = np.sqrt((d[:, 0] - d[:, 1]) ** 2 + 4.0 * np.sum(c * c, axis=1))
    return gaps / gaps.mean()


def spacing_from_components(k: int, rng, count: int) -> np.ndarray:
    """Euclidean norm of k unit Gaussians, batch-rescaled to mean 1.

    k = 2, 3, 4, 5 reproduce the orthogonal, unitary, Ginibre-surmise, and
    symplectic spacing laws respectively.
    """
    if k not in (2, 3, 4, 5):
        raise DomainError(f"component count must be 2, 3, 4, or 5, got {k}")
    count = _validate_count(count)
    g = rng.normal(size=(count, k))
    s = np.sqrt(np.sum(g * g, axis=1))
    return s / s.mean()


def joint_eigen_logdensity(spec: EnsembleSpec, lambdas) -> float:
    """log of the unnormalized joint eigenvalue density,
    beta * (sum_{i<j} ln|l_j - l_i| - sum_i l_i^2 / 2 a^2).

    Expects an ascending vector; any coincident or out-of-order pair
    returns -inf (the repulsion factor vanishes there).
    """
    lam = np.asarray(lambdas, dtype=float)
    if lam.ndim != 1 or lam.size != spec.dim:
        raise DomainError("need one eigenvalue per matrix dimension")
    if np.any(np.diff(lam) <= 0.0):
        return -math.inf
    diffs = lam[None, :] - lam[:, None]
    repulsion = float(np.sum(np.log(diffs[np.triu_indices(lam.size, 1)])))
    confinement = float(np.sum(lam * lam)) / (2.0 * spec.scale2)
    return spec.dyson_index * (repulsion - confinement)


def matrix_ou_step(spec: EnsembleSpec, current: MatrixState, t: float,
                   rng) -> MatrixState:
    """Exact OU transition M(t) = q M' + sqrt(1 - q^2) G with
    q = exp(-t / a^2 nu) and G a fresh stationary draw.

    Gaussian transition kernels compose, so stepping t1 then t2 is
    distributionally one step of t1 + t2; q -> 0 recovers stationarity.
    """
    if not (t > 0.0 and math.isfinite(t)):
        raise DomainError("step duration must be positive and finite")
    if current.dyson_index != spec.dyson_index:
        raise DomainError("state and ensemble symmetry classes differ")
    fresh = sample_matrix(spec, rng)
    if current.matrix.shape != fresh.matrix.shape:
        raise DomainError("state size does not match the ensemble")
    q = math.exp(-t / (spec.scale2 * spec.friction))
    mixed = q * current.matrix + math.sqrt(1.0 - q * q) * fresh.matrix
    return MatrixState(spec.dyson_index, mixed)
