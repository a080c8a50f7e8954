"""Differential, discrete, and relative entropy over densities and grids.

Two container types are shared across the package: CoarseGrid holds cell
masses obtained by integrating a density over a uniform partition of [0, L],
GridDensity holds a nonnegative density sampled on uniform nodes.  Negative
differential entropies are legitimate (localization regime) and returned
as-is.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from . import special_fns as sf
from .densities import DensityModel
from .errors import (
    DomainError,
    NonConvergenceError,
    SupportError,
    TailMassError,
)

_MASS_TOL_GRID = 1e-10
_MASS_TOL_COARSE = 1e-12
_SUPPORT_FLOOR = 1e-300


@dataclass(frozen=True)
class CoarseGrid:
    """Cell masses mu_j over N equal cells partitioning [0, L].

    Invariants: every mass is nonnegative and the masses sum to one within
    1e-12.
    """

    interval_length: float
    cells: int
    masses: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not (self.interval_length > 0.0 and math.isfinite(self.interval_length)):
            raise DomainError("interval length must be positive and finite")
        if self.cells < 1 or self.cells != int(self.cells):
            raise DomainError("cell count must be a positive integer")
        masses = np.asarray(self.masses, dtype=float)
        if masses.shape != (self.cells,):
            raise DomainError("mass vector length must equal the cell count")
        if np.any(masses < 0.0):
            raise DomainError("cell masses must be nonnegative")
        total = float(masses.sum())
        if abs(total - 1.0) > _MASS_TOL_COARSE:
            raise DomainError(f"cell masses must sum to 1, got {total!r}")
        masses = masses.copy()
        masses.flags.writeable = False
        object.__setattr__(self, "masses", masses)

    @property
    def cell_width(self) -> float:
        return self.interval_length / self.cells


@dataclass(frozen=True)
class GridDensity:
    """A density tabulated on uniform nodes, unit mass under the cell sum.

    The mass convention is the cell-average one, sum(values) * dx = 1; it is
    what keeps discrete Gibbs states exactly stationary downstream.
    """

    nodes: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise DomainError("need at least two grid nodes")
        if values.shape != nodes.shape:
            raise DomainError("node and value arrays must have equal length")
        steps = np.diff(nodes)
        dx = steps[0]
        if dx <= 0.0 or np.any(np.abs(steps - dx) > 1e-9 * abs(dx)):
            raise DomainError("grid nodes must be uniform and increasing")
        if np.any(values < 0.0) or not np.all(np.isfinite(values)):
            raise DomainError("density values must be finite and nonnegative")
        mass = float(values.sum() * dx)
        if abs(mass - 1.0) > _MASS_TOL_GRID:
            raise DomainError(f"grid density mass must be 1, got {mass!r}")
        for name, arr in (("nodes", nodes), ("values", values)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def dx(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    @staticmethod
    def normalized(nodes, values) -> "GridDensity":
        """Build a GridDensity from raw nonnegative values, rescaling mass to 1."""
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        dx = nodes[1] - nodes[0]
        total = values.sum() * dx
        if not (total > 0.0 and np.isfinite(total)):
            raise DomainError("cannot normalize: total mass not positive")
        return GridDensity(nodes, values / total)


def discrete_entropy(grid) -> float:
    """Shannon entropy -sum mu ln mu of cell masses; lies in [0, ln N]."""
    masses = grid.masses if isinstance(grid, CoarseGrid) else np.asarray(grid, dtype=float)
    if np.any(masses < 0.0):
        raise DomainError("cell masses must be nonnegative")
    pos = masses[masses > 0.0]
    return float(-(pos * np.log(pos)).sum())


def _model_entropy_quad(model: DensityModel, tol: float) -> float:
    hi = model.tail_cutoff(1e-16)

    def integrand(s):
        p = model.pdf(s)
        return -p * model.logpdf(s) if p > 0.0 else 0.0

    # split at the mean: the integrand peaks near there and quad's panels
    # behave better on each side separately
    mid = min(max(model.mean, 1e-3), hi / 2.0)
    total, err = _split_quad(integrand, (0.0, mid, hi), tol)
    if err > tol:
        raise NonConvergenceError(f"entropy quadrature error {err:g} above {tol:g}")
    return total


def _split_quad(integrand, knots, tol):
    # integrable log singularities at the origin make QUADPACK's extrapolation
    # grumble; the abserr check below is the real convergence gate
    total = 0.0
    err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for a, b in zip(knots[:-1], knots[1:]):
            val, abserr = quad(integrand, a, b, limit=400,
                               epsabs=tol * 1e-3, epsrel=tol * 1e-3)
            total += val
            err += abserr
    return total, err


def differential_entropy(density, tol: float = 1e-8) -> float:
    """-integral rho ln rho, by adaptive quadrature (models) or trapezoid (grids)."""
    if isinstance(density, DensityModel):
        return _model_entropy_quad(density, tol)
    if isinstance(density, GridDensity):
        vals = density.values
        plogp = np.zeros_like(vals)
        pos = vals > 0.0
        plogp[pos] = -vals[pos] * np.log(vals[pos])
        return float(np.trapezoid(plogp, density.nodes))
    raise TypeError("expected a DensityModel or GridDensity")


def dimensionless_entropy(density, delta: float) -> float:
    """Entropy relative to a partition unit: differential entropy minus ln delta."""
    if not (delta > 0.0 and math.isfinite(delta)):
        raise DomainError("partition unit must be positive and finite")
    return differential_entropy(density) - math.log(delta)


def family_entropy_closed(model: DensityModel) -> float:
    """Closed-form entropy of any member of the s^beta exp(-b s^alpha) family.

    -ln C - beta <ln s> + b <s^alpha>, with <ln s> = (psi(nu) - ln b)/alpha
    and <s^alpha> = nu/b.  Reduces to the printed special cases.
    """
    nu = model.shape_order
    mean_log = (sf.digamma(nu) - math.log(model.rate)) / model.alpha
    return -model.log_norm - model.beta * mean_log + nu


def coarse_grain(model: DensityModel, length: float, cells: int) -> CoarseGrid:
    """Integrate the density over N equal cells of [0, L] and renormalize.

    Cell masses are exact cdf differences.  Fails if the mass beyond L
    exceeds 1e-6.
    """
    if not (length > 0.0 and math.isfinite(length)):
        raise DomainError("interval length must be positive and finite")
    if cells < 1:
        raise DomainError("need at least one cell")
    tail = model.tail_mass(length)
    if tail >= 1e-6:
        raise TailMassError(
            f"tail mass {tail:.3g} beyond L={length:g} exceeds 1e-6; enlarge L")
    edges = np.linspace(0.0, length, cells + 1)
    masses = np.maximum(np.diff(model.cdf(edges)), 0.0)
    return CoarseGrid(length, cells, masses / masses.sum())


def _kl_models(rho: DensityModel, ref: DensityModel, tol: float) -> float:
    hi = max(rho.tail_cutoff(1e-18), ref.tail_cutoff(1e-18))

    def integrand(s):
        p = rho.pdf(s)
        if p <= 0.0:
            return 0.0
        return p * (rho.logpdf(s) - ref.logpdf(s))

    mid = min(max(rho.mean, 1e-3), hi / 2.0)
    total, err = _split_quad(integrand, (0.0, mid, hi), tol)
    if err > tol:
        raise NonConvergenceError(f"KL quadrature error {err:g} above {tol:g}")
    return total


def _node_values(density, nodes: np.ndarray) -> np.ndarray:
    if isinstance(density, GridDensity):
        if density.nodes.shape != nodes.shape or np.any(np.abs(density.nodes - nodes) > 1e-12):
            raise DomainError("grid KL requires both densities on the same nodes")
        return density.values
    return np.asarray(density.pdf(nodes))


def kl_divergence(rho, ref, tol: float = 1e-8) -> float:
    """Relative entropy integral rho ln(rho/ref); nonnegative.

    Model pairs go through adaptive quadrature.  If either side lives on a
    grid, both are evaluated on that grid and summed by trapezoid; cells
    where the reference vanishes but rho does not raise SupportError.
    """
    if isinstance(rho, DensityModel) and isinstance(ref, DensityModel):
        return _kl_models(rho, ref, tol)
    nodes = rho.nodes if isinstance(rho, GridDensity) else ref.nodes
    p = _node_values(rho, nodes)
    q = _node_values(ref, nodes)
    bad = (q < _SUPPORT_FLOOR) & (p > 0.0)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise SupportError(
            f"rho has mass where the reference vanishes (node {nodes[k]:g})")
    terms = np.zeros_like(p)
    pos = p > 0.0
    terms[pos] = p[pos] * (np.log(p[pos]) - np.log(q[pos]))
    return float(np.trapezoid(terms, nodes))


def entropy_table(models: dict) -> list:
    """Rows (label, S_closed, S_quadrature, abs_diff) for a label->model map."""
    rows = []
    for label, model in models.items():
        closed = family_entropy_closed(model)
        quadr = differential_entropy(model)
        rows.append((label, closed, quadr, abs(closed - quadr)))
    return rows
