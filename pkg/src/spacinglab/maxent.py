"""Constrained entropy extremization.

Three solvers live here: maximum Shannon entropy under polynomial moment
constraints (damped Newton on the convex dual), minimum relative entropy
against a reference law under one auxiliary-function constraint (scalar
safeguarded root-find), and the minimum-information check for Gaussian
matrix-element ensembles.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from . import special_fns as sf
from .densities import DensityModel
from .entropy import GridDensity
from .errors import (
    ConstraintRepairError,
    DomainError,
    InfeasibleError,
    NoRootError,
    NonConvergenceError,
)
from .streams import stream

_MAX_ORDER = 6
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def feasibility_halfline(m1: float, m2: float) -> bool:
    """Existence window for half-line maxent with two moments: m1^2 <= m2 <= 2 m1^2."""
    if not (m1 > 0.0 and m2 > 0.0):
        raise DomainError("half-line moments must be positive")
    return m1 * m1 <= m2 <= 2.0 * m1 * m1


@dataclass(frozen=True)
class MomentConstraintSet:
    """Targets m_k = <x^k> on a support interval; m_0 = 1 is implicit."""

    support: tuple
    moments: tuple

    def __post_init__(self):
        lo, hi = self.support
        if not lo < hi:
            raise DomainError("support must be an interval with lo < hi")
        object.__setattr__(self, "support", (float(lo), float(hi)))
        seen = {}
        for k, mk in self.moments:
            if k != int(k) or k < 0:
                raise DomainError(f"moment order must be a nonnegative integer, got {k}")
            if int(k) in seen:
                raise DomainError(f"duplicate moment order {k}")
            seen[int(k)] = float(mk)
        if seen.get(0, 1.0) != 1.0:
            raise DomainError("m_0 must equal 1")
        seen.pop(0, None)
        object.__setattr__(
            self, "moments", tuple(sorted((k, v) for k, v in seen.items())))

    @property
    def orders(self) -> tuple:
        return tuple(k for k, _ in self.moments)

    @property
    def targets(self) -> np.ndarray:
        return np.array([v for _, v in self.moments])

    @property
    def half_line(self) -> bool:
        return self.support == (0.0, math.inf)

    @property
    def feasible(self):
        """Two-moment half-line rule; None when the rule does not apply."""
        table = dict(self.moments)
        if self.half_line and 1 in table and 2 in table:
            return feasibility_halfline(table[1], table[2])
        return None

    def to_json(self) -> str:
        return json.dumps({"support": [self.support[0], self.support[1]],
                           "moments": [[k, v] for k, v in self.moments]})

    @staticmethod
    def from_json(text: str) -> "MomentConstraintSet":
        raw = json.loads(text)
        return MomentConstraintSet(tuple(raw["support"]),
                                   tuple((k, v) for k, v in raw["moments"]))


@dataclass(frozen=True)
class MaxentSolution:
    multipliers: tuple          # lambda_0 .. lambda_M, dense
    achieved_moments: tuple     # (k, <x^k>) for each constrained order
    entropy_value: float
    converged: bool
    iterations: int
    trace: tuple = field(repr=False, default=())  # (iter, lambdas, residual, objective)

    def to_json(self) -> str:
        return json.dumps({
            "multipliers": list(self.multipliers),
            "achieved_moments": [[k, v] for k, v in self.achieved_moments],
            "entropy": self.entropy_value,
            "converged": self.converged,
            "iterations": self.iterations,
        })


def _exp_poly_stats(coef, support, top_order):
    """ln Z and <x^p>, p = 1..top_order, for density ~ exp(-sum coef[k] x^k).

    coef is dense, coef[0] unused.  Returns None when the polynomial does not
    confine the density on the given support.
    """
    lo, hi = support
    coef = np.asarray(coef, dtype=float)
    lead = 0
    for k in range(len(coef) - 1, 0, -1):
        if coef[k] != 0.0:
            lead = k
            break

    def q(x):
        return sum(coef[k] * x ** k for k in range(1, len(coef)))

    if math.isinf(hi) or math.isinf(lo):
        if lead == 0 or coef[lead] <= 0.0:
            return None
        if math.isinf(lo) and lead % 2 == 1:
            return None

    def cutoff(direction):
        u = 1.0
        for _ in range(60):
            probe = np.linspace(0.0, u, 513) * direction
            qv = q(probe)
            if qv[-1] - qv.min() > 60.0:
                return u
            u *= 2.0
        return None

    a, b = lo, hi
    if math.isinf(hi):
        b = cutoff(+1.0)
        if b is None:
            return None
    if math.isinf(lo):
        a = -cutoff(-1.0)
        if a is None:
            return None

    edges = np.linspace(a, b, 17)
    x = np.concatenate([(_GL_NODES + 1.0) * 0.5 * (r - l) + l
                        for l, r in zip(edges[:-1], edges[1:])])
    w = np.concatenate([_GL_WEIGHTS * 0.5 * (r - l)
                        for l, r in zip(edges[:-1], edges[1:])])
    qx = q(x)
    qmin = qx.min()
    dens = w * np.exp(-(qx - qmin))
    total = dens.sum()
    ln_z = math.log(total) - qmin
    moms = np.array([(dens * x ** p).sum() / total for p in range(1, top_order + 1)])
    return ln_z, moms


def solve_maxent(constraints: MomentConstraintSet, tol: float = 1e-10,
                 max_iter: int = 100) -> MaxentSolution:
    """Maximize -int rho ln rho subject to <x^k> = m_k.

    Works on the dual: minimize ln Z(lam) + lam . m, a smooth convex function
    whose Hessian is the moment covariance.  Damped Newton with Armijo
    backtracking; steps leaving the integrable region are rejected by the
    line search.
    """
    orders = constraints.orders
    targets = constraints.targets
    lo, hi = constraints.support
    if not orders:
        if math.isinf(hi) or math.isinf(lo):
            raise DomainError("unbounded support needs at least one moment constraint")
        width = hi - lo
        return MaxentSolution((math.log(width),), ((0, 1.0),), math.log(width),
                              True, 0)
    top = max(orders)
    if top > _MAX_ORDER:
        raise DomainError(f"moment order above {_MAX_ORDER} unsupported")
    if constraints.feasible is False:
        table = dict(constraints.moments)
        raise InfeasibleError(
            f"half-line moments m1={table[1]:g}, m2={table[2]:g} violate m2 <= 2 m1^2")

    table = dict(constraints.moments)
    coef = np.zeros(top + 1)
    if math.isinf(lo) and 2 in table:
        mu = table.get(1, 0.0)
        var = table[2] - mu * mu
        if var <= 0.0:
            raise InfeasibleError("second moment at or below the squared first moment")
        coef[2] = 0.5 / var
        if 1 in table:
            coef[1] = -mu / var
    elif 1 in table and table[1] > 0.0:
        coef[1] = 1.0 / table[1]
    else:
        coef[top] = 1.0 / (top * abs(table[top]) + 1e-12)

    idx = np.array(orders)
    trace = []
    stats = _exp_poly_stats(coef, constraints.support, 2 * top)
    if stats is None:
        raise NonConvergenceError("initial multipliers do not confine the density")
    # integrability demands a positive leading coefficient; when a Newton
    # direction exits through that face we pin the order at zero, minimize
    # over the rest, and release only if the KKT test says the interior helps
    pinned = set()
    iterations = 0
    for iterations in range(1, max_iter + 1):
        ln_z, moms = stats
        psi = ln_z + float(coef[idx] @ targets)
        grad = targets - moms[idx - 1]
        residual = float(np.max(np.abs(grad)))
        trace.append((iterations - 1, tuple(coef), residual, psi))
        if residual <= tol:
            break
        free = [j for j, k in enumerate(idx) if int(k) not in pinned]
        if pinned and float(np.max(np.abs(grad[free]))) <= tol:
            worst = min((j for j, k in enumerate(idx) if int(k) in pinned),
                        key=lambda j: grad[j])
            if grad[worst] >= -tol:
                raise NonConvergenceError(
                    "dual minimum sits on the family boundary (leading "
                    "coefficient zero): the targets are approached, not attained")
            pinned.discard(int(idx[worst]))
            free = [j for j, k in enumerate(idx) if int(k) not in pinned]
        orders_free = idx[free]
        hess = np.array([[moms[p + q - 1] - moms[p - 1] * moms[q - 1]
                          for q in orders_free] for p in orders_free])
        try:
            step = -np.linalg.solve(hess, grad[free])
        except np.linalg.LinAlgError as exc:
            raise NonConvergenceError(f"singular moment covariance: {exc}")
        slope = float(grad[free] @ step)
        t = 1.0
        accepted = None
        while t > 1e-14:
            cand = coef.copy()
            cand[orders_free] += t * step
            cand_stats = _exp_poly_stats(cand, constraints.support, 2 * top)
            if cand_stats is not None:
                cand_psi = cand_stats[0] + float(cand[idx] @ targets)
                if cand_psi <= psi + 1e-4 * t * slope:
                    accepted = (cand, cand_stats)
                    break
            t *= 0.5
        if accepted is None:
            blockers = [int(k) for s, k in zip(step, orders_free)
                        if coef[int(k)] == 0.0 and s < 0.0]
            if blockers:
                pinned.add(max(blockers))
                continue
            raise NonConvergenceError(
                f"line search stalled at residual {residual:g} (iteration {iterations})")
        coef, stats = accepted
    else:
        raise NonConvergenceError(
            f"no convergence after {max_iter} iterations, residual {trace[-1][2]:g}")

    ln_z, moms = stats
    multipliers = np.zeros(top + 1)
    multipliers[0] = ln_z
    multipliers[1:] = coef[1:]
    entropy = ln_z + float(coef[idx] @ moms[idx - 1])
    achieved = tuple((int(k), float(moms[k - 1])) for k in idx)
    return MaxentSolution(tuple(multipliers), achieved, entropy, True,
                          iterations - 1, tuple(trace))


def maxent_density(solution: MaxentSolution, x):
    """Evaluate the exponential-polynomial density of a solution."""
    x = np.asarray(x, dtype=float)
    lam = solution.multipliers
    expo = -lam[0] - sum(lam[k] * x ** k for k in range(1, len(lam)))
    return np.exp(expo)


# ---- relative-entropy minimization ------------------------------------------


@dataclass(frozen=True)
class KLConstraint:
    """Fix <T> = theta while staying as close as possible to ref in KL."""

    ref: DensityModel
    theta: float
    t_id: str = "neg_log"
    t_func: object = None   # callable overriding the builtin, e.g. a table interp

    def __post_init__(self):
        if self.t_func is None and self.t_id != "neg_log":
            raise DomainError(f"unknown auxiliary function {self.t_id!r}")
        # <T> under the reference must be finite
        val = mean_t(self, 0.0)
        if not math.isfinite(val):
            raise DomainError("auxiliary function not integrable against the reference")


def _shifted(ref: DensityModel, lam: float) -> float:
    return (ref.beta + lam + 1.0) / ref.alpha


def _tilted_cutoff(ref: DensityModel, t, lam: float):
    """Upper limit where rho_ref e^(-lam T) has decayed, plus the log peak."""
    hi = ref.tail_cutoff(1e-16)
    for _ in range(40):
        xs = np.linspace(hi / 512.0, hi, 512)
        logs = ref.logpdf(xs) - lam * np.array([t(x) for x in xs])
        peak = logs.max()
        if not math.isfinite(peak):
            raise DomainError("tilted reference not integrable")
        if logs[-1] - peak <= math.log(1e-13):
            return hi, peak
        hi *= 2.0
        if hi > 1e7:
            raise DomainError("tilted reference decays too slowly to integrate")
    return hi, peak


def mean_t(constraint: KLConstraint, lam: float) -> float:
    """<T> under rho_ref e^(-lam T), normalized.  Monotone nonincreasing in lam."""
    ref = constraint.ref
    if constraint.t_func is None:
        nu = _shifted(ref, lam)
        if nu <= 0.0:
            raise DomainError("tilt exponent outside the integrable range")
        return -(sf.digamma(nu) - math.log(ref.rate)) / ref.alpha
    t = constraint.t_func
    hi, peak = _tilted_cutoff(ref, t, lam)

    def g(x):
        return math.exp(ref.logpdf(x) - lam * t(x) - peak) if x > 0.0 else 0.0

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        z, err_z = quad(g, 0.0, hi, limit=200, epsabs=1e-11, epsrel=1e-11)
        num, err_num = quad(lambda x: t(x) * g(x), 0.0, hi, limit=200,
                            epsabs=1e-11, epsrel=1e-11)
    if not (z > 0.0 and math.isfinite(z) and math.isfinite(num)):
        raise DomainError("tilted reference not integrable")
    # a divergent integral comes back as a finite number with a huge error
    # estimate, so the estimate is the real integrability gate
    if err_z > 1e-6 * z or err_num > 1e-6 * (abs(num) + z):
        raise DomainError("auxiliary-function average did not converge; "
                          "likely not integrable against the reference")
    return num / z


def solve_kl_min(constraint: KLConstraint, tol: float = 1e-10):
    """Find lam with <T> = theta under rho* = C rho_ref exp(-lam T).

    Returns (lam, C, density).  <T> is strictly decreasing in lam, so a sign
    change brackets the unique root; bisection polished by secant steps.
    """
    theta = constraint.theta

    def f(lam):
        return mean_t(constraint, lam) - theta

    f0 = f(0.0)
    if abs(f0) <= tol:
        lam = 0.0
    else:
        lo = hi = 0.0
        flo = fhi = f0
        step = 1.0
        while not (flo >= 0.0 and fhi < 0.0):
            if step > 1e8:
                raise NoRootError(
                    f"theta={theta:g} outside the attainable range of <T>")
            try:
                if flo < 0.0:   # theta above current mean: push lam down
                    cand = lo - step
                    flo, lo = f(cand), cand
                else:
                    cand = hi + step
                    fhi, hi = f(cand), cand
                step *= 2.0
            except DomainError:
                step *= 0.25
                if step < 1e-12:
                    raise NoRootError(
                        f"theta={theta:g} unreachable inside the integrable range")

        lam = 0.5 * (lo + hi)
        for it in range(300):
            # secant when it behaves, bisection every other step as safeguard
            if it % 2 == 0 and flo != fhi:
                lam = lo + (hi - lo) * flo / (flo - fhi)
                if not lo < lam < hi:
                    lam = 0.5 * (lo + hi)
            else:
                lam = 0.5 * (lo + hi)
            val = f(lam)
            if abs(val) <= tol:
                break
            if val > 0.0:
                lo, flo = lam, val
            else:
                hi, fhi = lam, val
        else:
            raise NonConvergenceError("multiplier root-find did not reach tolerance")

    ref = constraint.ref
    if constraint.t_func is None:
        nu_new = _shifted(ref, lam)
        log_c = (math.log(ref.alpha) + nu_new * math.log(ref.rate)
                 - sf.ln_gamma(nu_new)) - ref.log_norm
        rounded = round(lam)
        if abs(lam - rounded) < 1e-9 and ref.beta + rounded >= 0:
            density = DensityModel(beta=ref.beta + int(rounded), alpha=ref.alpha,
                                   rate=ref.rate)
        else:
            # cell-center nodes keep the grid strictly inside the support
            dx = ref.tail_cutoff(1e-14) / 8000.0
            nodes = (np.arange(8000) + 0.5) * dx
            vals = np.exp(log_c + ref.logpdf(nodes) + lam * np.log(nodes))
            density = GridDensity.normalized(nodes, vals)
        return lam, math.exp(log_c), density

    t = constraint.t_func
    hi_x, peak = _tilted_cutoff(ref, t, lam)
    dx = hi_x / 8000.0
    nodes = (np.arange(8000) + 0.5) * dx
    logs = ref.logpdf(nodes) - lam * np.array([t(x) for x in nodes])
    raw = np.exp(logs - peak)
    z_shifted = float(raw.sum() * dx)
    if not (z_shifted > 0.0 and math.isfinite(z_shifted)):
        raise NonConvergenceError("tilted density mass lost to underflow")
    density = GridDensity.normalized(nodes, raw)
    return lam, math.exp(-math.log(z_shifted) - peak), density


def theta_for_lambda(constraint_or_ref, lam: float) -> float:
    """The theta value that makes lam the solve_kl_min answer (target-lambda mode)."""
    if isinstance(constraint_or_ref, DensityModel):
        constraint = KLConstraint(constraint_or_ref, 0.0)
    else:
        constraint = constraint_or_ref
    return mean_t(constraint, lam)


# ---- closed-form logarithmic moments ----------------------------------------


def log_moment_exponential(alpha: float) -> float:
    """int_0^inf exp(-alpha x) ln x dx = -(gamma + ln alpha)/alpha."""
    if not alpha > 0.0:
        raise DomainError("decay rate must be positive")
    return -(sf.EULER_GAMMA + math.log(alpha)) / alpha


def log_moment_gaussian(alpha: float) -> float:
    """int_0^inf exp(-alpha x^2) ln x dx = -sqrt(pi/16 alpha) (gamma + ln 4 alpha)."""
    if not alpha > 0.0:
        raise DomainError("decay rate must be positive")
    return -math.sqrt(math.pi / (16.0 * alpha)) * (sf.EULER_GAMMA + math.log(4.0 * alpha))


# ---- minimum-information check for Gaussian ensembles ------------------------


@dataclass(frozen=True)
class BalianReport:
    info_star: float        # I[P*] = int P* ln P*
    trace_target: float
    component_count: int
    perturbed_infos: tuple
    all_above: bool
    min_margin: float


def _component_plan(dyson_index: int, dim: int, a2: float):
    """(variance, trace weight) per independent real component."""
    if dyson_index not in (1, 2, 4):
        raise DomainError(f"symmetry index must be 1, 2, or 4, got {dyson_index}")
    if dim < 2 or dim > 4:
        raise DomainError("dimension must be between 2 and 4")
    if not a2 > 0.0:
        raise DomainError("scale parameter must be positive")
    comps = [(a2 / dyson_index, 1.0)] * dim
    comps += [(a2 / (2.0 * dyson_index), 2.0)] * (dim * (dim - 1) // 2 * dyson_index)
    return comps


def _mixture_information(w, mu, var, nodes):
    dens = np.zeros_like(nodes)
    for wk, mk, vk in zip(w, mu, var):
        dens += wk * np.exp(-0.5 * (nodes - mk) ** 2 / vk) / math.sqrt(2.0 * math.pi * vk)
    mask = dens > 0.0
    info = float(np.trapezoid(np.where(mask, dens * np.log(np.maximum(dens, 1e-300)), 0.0),
                              nodes))
    second = float(np.trapezoid(dens * nodes ** 2, nodes))
    return info, second


def balian_min_check(dyson_index: int, dim: int, a2: float,
                     perturbations: int, seed: int = 0) -> BalianReport:
    """Compare I[P] = int P ln P of the Gaussian ensemble law against
    constraint-preserving perturbations.

    P factorizes over independent matrix elements, so I is a sum of
    one-dimensional integrals.  Perturbations replace each component with a
    two-Gaussian mixture, then a single global coordinate rescale restores
    the quadratic trace constraint (the rescale shifts I by -N ln s exactly).
    """
    comps = _component_plan(dyson_index, dim, a2)
    n_comp = len(comps)
    target = sum(c * v for v, c in comps)
    info_star = -sum(0.5 * math.log(2.0 * math.pi * math.e * v) for v, _ in comps)

    perturbed = []
    for trial in range(perturbations):
        rng = stream(seed, trial)
        raw_info = 0.0
        weighted_second = 0.0
        for v, c in comps:
            sigma = math.sqrt(v)
            w1 = rng.uniform(0.2, 0.8)
            mu = rng.uniform(-1.0, 1.0, size=2) * sigma
            var = rng.uniform(0.4, 2.0, size=2) * v
            span = 10.0 * math.sqrt(max(var.max(), v)) + abs(mu).max()
            nodes = np.linspace(-span, span, 4001)
            info, second = _mixture_information((w1, 1.0 - w1), mu, var, nodes)
            raw_info += info
            weighted_second += c * second
        scale2 = target / weighted_second
        if not (scale2 > 0.0 and math.isfinite(scale2)):
            raise ConstraintRepairError(
                f"trial {trial}: cannot rescale to the trace constraint")
        perturbed.append(raw_info - n_comp * 0.5 * math.log(scale2))

    perturbed = tuple(perturbed)
    margins = [p - info_star for p in perturbed]
    return BalianReport(info_star, target, n_comp, perturbed,
                        all(m > 0.0 for m in margins),
                        min(margins) if margins else math.nan)
