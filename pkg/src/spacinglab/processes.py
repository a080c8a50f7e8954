"""Stochastic-process engines.

Three related diffusions: the radial Bessel process (the norm of an
n-component Brownian motion), its harmonically confined Bessel-OU variant
together with the exact radial OU transition kernel, and the Dyson
eigenvalue SDE whose stationary law is the Gaussian-ensemble joint
eigenvalue density.

Stepping is Euler-Maruyama throughout.  Inadmissible proposals (a radial
sign crossing, a Dyson ordering violation) are rejected and retried with a
halved step and fresh noise; the step floor turns persistent rejection into
an error instead of a silent constraint repair.  Batch runs give every path
its own counter-based stream, so results do not depend on how many paths
run together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DomainError, OrderingError, StepFloorError
from .rmt import EnsembleSpec
from .special_fns import bessel_i_log, ln_gamma
from .streams import stream

_PROCESSES = ("bessel", "bessel_ou", "dyson")
_OBSERVABLES = ("final", "histogram", "entropy_series", "snapshots", "trajectory")

# combined small-argument branch of the transition kernel: below this the
# Bessel-I series is collapsed analytically so e^{-t} underflow cancels
_KERNEL_SMALL_Z = 1e-3

# a move r -> r' crosses the origin mid-step with the Brownian-bridge
# probability exp(-2 r r' / dt); below this it is treated as zero so no
# test variate is consumed
_BRIDGE_EPS = 1e-16

# consecutive rejections allowed at the dt_min floor before giving up
_FLOOR_RETRY_CAP = 128


# ---- domain types ----------------------------------------------------------


@dataclass(frozen=True)
class TrajectoryState:
    """One point of one trajectory: a time stamp plus a position vector.

    A single coordinate is a radial state and must be positive; two or more
    coordinates form a Dyson configuration and must be strictly increasing.
    """

    time: float
    positions: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.time) and self.time >= 0.0):
            raise DomainError(f"time must be finite and >= 0, got {self.time}")
        pos = np.array(self.positions, dtype=float)
        if pos.ndim != 1 or pos.size == 0:
            raise DomainError("positions must be a nonempty 1-d vector")
        if not np.all(np.isfinite(pos)):
            raise DomainError("positions must be finite")
        if pos.size == 1:
            if not pos[0] > 0.0:
                raise DomainError(f"radial position must be > 0, got {pos[0]}")
        elif not np.all(np.diff(pos) > 0.0):
            raise OrderingError("positions must be strictly increasing")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)


@dataclass(frozen=True)
class SdeConfig:
    """Step-size policy: base step, halving floor, seed, adaptivity flag."""

    dt_base: float
    dt_min: float
    seed: int = 0
    adaptive: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.dt_base) and math.isfinite(self.dt_min)):
            raise DomainError("step sizes must be finite")
        if not 0.0 < self.dt_min <= self.dt_base:
            raise DomainError(
                f"need 0 < dt_min <= dt_base, got dt_min={self.dt_min}, dt_base={self.dt_base}"
            )
        object.__setattr__(self, "seed", int(self.seed))


# ---- drifts and potentials --------------------------------------------------


def _check_n(n: int) -> int:
    if not (isinstance(n, (int, np.integer)) and n >= 2):
        raise DomainError(f"component count must be an integer >= 2, got {n}")
    return int(n)


def bessel_drift(n: int, r):
    """Radial Brownian drift (n-1)/2r."""
    _check_n(n)
    r = np.asarray(r, dtype=float)
    if not np.all(r > 0.0):
        raise DomainError("radial coordinate must be > 0")
    out = (n - 1.0) / (2.0 * r)
    return float(out) if out.ndim == 0 else out


def bessel_ou_drift(n: int, r):
    """Confined radial drift (n-1)/2r - r; vanishes at r = sqrt((n-1)/2)."""
    _check_n(n)
    r = np.asarray(r, dtype=float)
    if not np.all(r > 0.0):
        raise DomainError("radial coordinate must be > 0")
    out = (n - 1.0) / (2.0 * r) - r
    return float(out) if out.ndim == 0 else out


def bessel_ou_potential(n: int, r):
    """Potential (1/2)(r^2 - (n-1) ln r) whose negative gradient is the drift."""
    _check_n(n)
    r = np.asarray(r, dtype=float)
    if not np.all(r > 0.0):
        raise DomainError("radial coordinate must be > 0")
    out = 0.5 * (r * r - (n - 1.0) * np.log(r))
    return float(out) if out.ndim == 0 else out


def bessel_ou_potential_grad(n: int, r):
    _check_n(n)
    r = np.asarray(r, dtype=float)
    if not np.all(r > 0.0):
        raise DomainError("radial coordinate must be > 0")
    out = r - (n - 1.0) / (2.0 * r)
    return float(out) if out.ndim == 0 else out


def dyson_spec(dim: int, dyson_index: int = 1, scale2: float | None = None) -> EnsembleSpec:
    """Ensemble parameters for the eigenvalue SDE; default variance beta*n."""
    if scale2 is None:
        scale2 = float(dyson_index) * float(dim)
    return EnsembleSpec(dyson_index=dyson_index, dim=dim, scale2=scale2)


def _dyson_drift_batch(spec: EnsembleSpec, lam: np.ndarray) -> np.ndarray:
    # lam has shape (paths, n); pairwise interaction runs over all i != j
    diff = lam[:, :, None] - lam[:, None, :]
    idx = np.arange(lam.shape[1])
    diff[:, idx, idx] = np.inf
    half_beta = 0.5 * spec.dyson_index
    return half_beta * np.sum(1.0 / diff, axis=2) - (half_beta / spec.scale2) * lam


def dyson_drift(spec: EnsembleSpec, positions) -> np.ndarray:
    """Drift of the eigenvalue SDE: -(beta/2a^2) l_j + (beta/2) sum 1/(l_j - l_i).

    With the default scaling a^2 = beta*n the confining term is -l_j/(2n).
    """
    lam = np.asarray(positions, dtype=float)
    if lam.ndim != 1 or lam.size != spec.dim:
        raise DomainError(f"expected {spec.dim} positions, got shape {lam.shape}")
    if not np.all(np.diff(lam) > 0.0):
        raise OrderingError("positions must be strictly increasing")
    return _dyson_drift_batch(spec, lam[None, :])[0]


# ---- single-trajectory steps ------------------------------------------------


class _Halver:
    """Rejection bookkeeping for one macro step of one trajectory.

    Halves on rejection until the floor, then retries at the floor itself;
    a long run of floor-level rejections means no admissible move exists at
    dt_min and becomes the step-floor error.
    """

    def __init__(self, cfg: SdeConfig, what: str):
        self._cfg = cfg
        self._what = what
        self._floor_tries = 0

    def next_dt(self, dt: float) -> float:
        cfg = self._cfg
        if not cfg.adaptive:
            raise StepFloorError(f"{self._what}: proposal rejected with adaptivity disabled")
        if 0.5 * dt >= cfg.dt_min:
            return 0.5 * dt
        self._floor_tries += 1
        if self._floor_tries >= _FLOOR_RETRY_CAP:
            raise StepFloorError(
                f"{self._what}: no admissible move at the step floor {cfg.dt_min:g}"
            )
        return dt


def _stiffness_dt(dt: float, move: float, scale: float, cfg: SdeConfig) -> float:
    # accuracy control, not admissibility: halve while the deterministic move
    # overshoots the local state scale, clamped at the floor without error
    if cfg.adaptive:
        while move * dt > 0.5 * scale and 0.5 * dt >= cfg.dt_min:
            dt = 0.5 * dt
            # the drift is frozen at the current state, so the move shrinks
            # with dt and the loop terminates
    return dt


def _radial_step(n, restoring, state, cfg, rng):
    _check_n(n)
    if state.positions.size != 1:
        raise DomainError("radial processes carry a single coordinate")
    r = float(state.positions[0])
    dt = cfg.dt_base
    halver = _Halver(cfg, "radial step")
    while True:
        drift = (n - 1.0) / (2.0 * r) - (r if restoring else 0.0)
        dt = _stiffness_dt(dt, abs(drift), r, cfg)
        prop = r + drift * dt + math.sqrt(dt) * float(rng.standard_normal())
        if prop > 0.0:
            # a positive endpoint can still hide a mid-step excursion below
            # the origin; veto it with the Brownian-bridge crossing law
            p_cross = math.exp(-2.0 * r * prop / dt)
            if p_cross < _BRIDGE_EPS or float(ndtr(rng.standard_normal())) >= p_cross:
                return TrajectoryState(state.time + dt, np.array([prop]))
        dt = halver.next_dt(dt)


def bessel_step(n: int, state: TrajectoryState, cfg: SdeConfig, rng) -> TrajectoryState:
    """One Euler move of dR = ((n-1)/2R) dt + dW, kept on the positive axis."""
    return _radial_step(n, False, state, cfg, rng)


def bessel_ou_step(n: int, state: TrajectoryState, cfg: SdeConfig, rng) -> TrajectoryState:
    """One Euler move of dR = ((n-1)/2R - R) dt + dW, kept on the positive axis."""
    return _radial_step(n, True, state, cfg, rng)


def dyson_step(spec: EnsembleSpec, state: TrajectoryState, cfg: SdeConfig, rng) -> TrajectoryState:
    """One Euler move of the eigenvalue SDE with full-step ordering rejection."""
    lam = state.positions
    if lam.size != spec.dim:
        raise DomainError(f"expected {spec.dim} positions, got {lam.size}")
    drift = _dyson_drift_batch(spec, lam[None, :])[0]
    move = float(np.max(np.abs(drift)))
    gap = float(np.min(np.diff(lam)))
    dt = cfg.dt_base
    halver = _Halver(cfg, "eigenvalue step")
    while True:
        dt = _stiffness_dt(dt, move, gap, cfg)
        eps = np.asarray(rng.standard_normal(lam.size), dtype=float)
        prop = lam + drift * dt + math.sqrt(dt) * eps
        if np.all(np.diff(prop) > 0.0):
            return TrajectoryState(state.time + dt, prop)
        dt = halver.next_dt(dt)


# ---- exact radial OU transition kernel --------------------------------------


def bessel_ou_transition_pdf(n: int, r_from: float, r_to: float, t: float) -> float:
    """Transition density of the confined radial process, started at r_from.

    Evaluated in log space: for small times the Bessel-I argument grows like
    1/t, and for large times it underflows together with e^{-t}; the small-z
    branch folds the leading series term into the exponent analytically so
    the t -> infinity limit lands on the stationary density exactly.
    """
    _check_n(n)
    for name, value in (("r_from", r_from), ("r_to", r_to), ("t", t)):
        if not (math.isfinite(value) and value > 0.0):
            raise DomainError(f"{name} must be finite and > 0, got {value}")
    alpha = 0.5 * (n - 2.0)
    q = math.exp(-t)
    w = -math.expm1(-2.0 * t)  # 1 - e^{-2t}, exact for small t
    z = 2.0 * r_to * r_from * q / w
    base = (
        math.log(2.0)
        + (n - 1.0) * math.log(r_to)
        - r_to * r_to
        - (r_to * r_to + r_from * r_from) * q * q / w
    )
    if z < _KERNEL_SMALL_Z:
        # ln I_a(z) ~ a ln(z/2) - ln G(a+1) + z^2/(4(a+1)); the a ln(z/2)
        # piece cancels the [r r' e^{-t}]^{-a} prefactor in closed form
        log_p = (
            base
            - (1.0 + alpha) * math.log(w)
            - ln_gamma(alpha + 1.0)
            + z * z / (4.0 * (alpha + 1.0))
        )
    else:
        log_p = (
            base
            - math.log(w)
            - alpha * (math.log(r_to) + math.log(r_from) - t)
            + bessel_i_log(alpha, z)
        )
    return math.exp(log_p)


# ---- batch driver ------------------------------------------------------------


class _NoiseBank:
    """Chunk-buffered per-path normal draws.

    Path i consumes stream(seed, i) strictly in order, one value per Euler
    attempt per coordinate, so a batch run reproduces a scalar per-path loop
    bit for bit and never depends on how many other paths run alongside.
    """

    _CHUNK = 128

    def __init__(self, seed: int, paths: int):
        self._gens = [stream(seed, i) for i in range(paths)]
        self._buf = np.zeros((paths, self._CHUNK))
        self._cur = np.full(paths, self._CHUNK, dtype=np.int64)

    def draw(self, idx: np.ndarray, count: int) -> np.ndarray:
        out = np.empty((idx.size, count))
        for j in range(count):
            exhausted = idx[self._cur[idx] >= self._CHUNK]
            for i in exhausted:
                self._buf[i] = self._gens[int(i)].standard_normal(self._CHUNK)
                self._cur[i] = 0
            out[:, j] = self._buf[idx, self._cur[idx]]
            self._cur[idx] += 1
        return out


@dataclass
class SimulationBundle:
    """Batch-run record: counters plus the observables that were requested."""

    process: str
    n: int
    paths: int
    t_final: float
    seed: int
    dyson_index: int | None = None
    scale2: float | None = None
    total_steps: int = 0
    total_retries: int = 0
    ordering_violations: int = 0
    final_positions: np.ndarray | None = None
    histogram: tuple[np.ndarray, np.ndarray] | None = None  # (edges, density)
    entropy_series: list[tuple[float, float]] | None = None
    snapshots: list[tuple[float, np.ndarray]] | None = None
    trajectory: list[tuple[int, float, np.ndarray]] | None = None

    def to_json(self) -> dict:
        # snapshots and trajectories are bulk data, not statistics; the
        # trajectory table is dumped as CSV by the command-line layer
        out = {
            "process": self.process,
            "n": self.n,
            "paths": self.paths,
            "t_final": self.t_final,
            "seed": self.seed,
            "total_steps": self.total_steps,
            "total_retries": self.total_retries,
            "ordering_violations": self.ordering_violations,
        }
        if self.dyson_index is not None:
            out["dyson_index"] = self.dyson_index
            out["scale2"] = self.scale2
        if self.final_positions is not None:
            out["final_positions"] = self.final_positions.tolist()
        if self.histogram is not None:
            out["histogram"] = {
                "edges": self.histogram[0].tolist(),
                "density": self.histogram[1].tolist(),
            }
        if self.entropy_series is not None:
            out["entropy_series"] = [[t, s] for t, s in self.entropy_series]
        return out


def _hist_entropy(sample: np.ndarray, edges: np.ndarray) -> float:
    counts, _ = np.histogram(sample, bins=edges)
    if sample.size == 0:
        return math.nan
    p = counts[counts > 0] / sample.size
    return float(-(p * np.log(p)).sum() + math.log(edges[1] - edges[0]))


def simulate(
    process: str,
    n: int,
    cfg: SdeConfig,
    t_final: float,
    paths: int,
    observables=("final",),
    dyson_index: int = 1,
    scale2: float | None = None,
    initial=None,
    bins: int = 64,
    hist_range: tuple[float, float] | None = None,
    checkpoints=(),
) -> SimulationBundle:
    """Run independent trajectories and collect the requested observables.

    Paths are driven by per-path streams derived from cfg.seed, stepped in
    lockstep between checkpoint boundaries.  Step errors carry the index of
    the offending path.
    """
    if process not in _PROCESSES:
        raise DomainError(f"unknown process {process!r}; expected one of {_PROCESSES}")
    _check_n(n)
    if not (isinstance(paths, (int, np.integer)) and paths >= 0):
        raise DomainError(f"path count must be an integer >= 0, got {paths}")
    if not (math.isfinite(t_final) and t_final > 0.0):
        raise DomainError(f"t_final must be finite and > 0, got {t_final}")
    want = tuple(observables)
    for name in want:
        if name not in _OBSERVABLES:
            raise DomainError(f"unknown observable {name!r}; expected one of {_OBSERVABLES}")
    if not (isinstance(bins, (int, np.integer)) and bins >= 2):
        raise DomainError(f"bin count must be an integer >= 2, got {bins}")

    radial = process != "dyson"
    spec = None if radial else dyson_spec(n, dyson_index, scale2)
    m = 1 if radial else n

    if initial is None:
        init = np.array([1.0]) if radial else np.linspace(-1.0, 1.0, n)
    else:
        init = np.atleast_1d(np.asarray(initial, dtype=float))
    if init.size != m:
        raise DomainError(f"initial state needs {m} coordinates, got {init.size}")
    init = TrajectoryState(0.0, init).positions  # reuse the state invariants

    marks = sorted({float(c) for c in checkpoints})
    for c in marks:
        if not 0.0 < c <= t_final:
            raise DomainError(f"checkpoints must lie in (0, t_final], got {c}")
    boundaries = marks if marks and marks[-1] == t_final else marks + [t_final]

    needs_hist = "histogram" in want or "entropy_series" in want
    if needs_hist and hist_range is None:
        if radial:
            hist_range = (0.0, 6.0)
        else:
            raise DomainError("hist_range is required for eigenvalue histograms")
    edges = None
    if needs_hist:
        lo, hi = float(hist_range[0]), float(hist_range[1])
        if not hi > lo:
            raise DomainError(f"empty histogram range {hist_range}")
        edges = np.linspace(lo, hi, bins + 1)

    pos = np.tile(init, (paths, 1))
    t = np.zeros(paths)
    bank = _NoiseBank(cfg.seed, paths) if paths else None
    steps = retries = violations = 0
    snaps: list[tuple[float, np.ndarray]] = []
    traj: list[tuple[int, float, np.ndarray]] | None = None
    if "trajectory" in want:
        traj = [(i, 0.0, init.copy()) for i in range(paths)]

    for b in boundaries:
        tiny = 1e-12 * max(1.0, b)
        while paths:
            t[np.abs(b - t) <= tiny] = b
            work = np.flatnonzero(t < b)
            if work.size == 0:
                break
            dt = np.minimum(cfg.dt_base, b - t[work])
            floor_tries = np.zeros(work.size, dtype=np.int64)
            while work.size:
                cur = pos[work]
                if radial:
                    drift = (n - 1.0) / (2.0 * cur)
                    if process == "bessel_ou":
                        drift = drift - cur
                    move = np.abs(drift[:, 0])
                    scale = cur[:, 0]
                else:
                    drift = _dyson_drift_batch(spec, cur)
                    move = np.max(np.abs(drift), axis=1)
                    scale = np.min(np.diff(cur, axis=1), axis=1)
                if cfg.adaptive:
                    # same per-state stiffness halving as the scalar steps
                    while True:
                        stiff = (move * dt > 0.5 * scale) & (0.5 * dt >= cfg.dt_min)
                        if not stiff.any():
                            break
                        dt = np.where(stiff, 0.5 * dt, dt)
                eps = bank.draw(work, m)
                prop = cur + drift * dt[:, None] + np.sqrt(dt)[:, None] * eps
                if radial:
                    ok = prop[:, 0] > 0.0
                    # bridge-crossing veto, consuming one test variate per
                    # boundary-adjacent move exactly as the scalar step does
                    p_cross = np.exp(-2.0 * cur[:, 0] * np.where(ok, prop[:, 0], 1.0) / dt)
                    need = ok & (p_cross >= _BRIDGE_EPS)
                    if np.any(need):
                        u = ndtr(bank.draw(work[need], 1)[:, 0])
                        ok[need] = u >= p_cross[need]
                else:
                    ok = np.all(np.diff(prop, axis=1) > 0.0, axis=1)
                acc = work[ok]
                if acc.size:
                    pos[acc] = prop[ok]
                    t[acc] = t[acc] + dt[ok]
                    steps += acc.size
                    # audit the constraint on the stored state, not the proposal
                    if radial:
                        violations += int(np.count_nonzero(pos[acc, 0] <= 0.0))
                    else:
                        violations += int(
                            np.count_nonzero(~np.all(np.diff(pos[acc], axis=1) > 0.0, axis=1))
                        )
                    if traj is not None:
                        for i in acc:
                            traj.append((int(i), float(t[i]), pos[i].copy()))
                work = work[~ok]
                dt = dt[~ok]
                floor_tries = floor_tries[~ok]
                if work.size:
                    retries += work.size
                    if not cfg.adaptive:
                        raise StepFloorError(
                            f"path {int(work[0])}: proposal rejected with adaptivity disabled"
                        )
                    can_halve = 0.5 * dt >= cfg.dt_min
                    dt = np.where(can_halve, 0.5 * dt, dt)
                    floor_tries = floor_tries + ~can_halve
                    capped = floor_tries >= _FLOOR_RETRY_CAP
                    if np.any(capped):
                        k = int(work[np.argmax(capped)])
                        raise StepFloorError(
                            f"path {k}: no admissible move at the step floor "
                            f"{cfg.dt_min:g} (t={float(t[k]):g})"
                        )
        snaps.append((b, pos.copy()))

    bundle = SimulationBundle(
        process=process,
        n=int(n),
        paths=int(paths),
        t_final=float(t_final),
        seed=cfg.seed,
        dyson_index=None if radial else spec.dyson_index,
        scale2=None if radial else spec.scale2,
        total_steps=steps,
        total_retries=retries,
        ordering_violations=violations,
    )
    if "final" in want:
        bundle.final_positions = pos.copy()
    if "histogram" in want:
        counts, _ = np.histogram(pos.ravel(), bins=edges)
        total = max(pos.size, 1)
        bundle.histogram = (edges, counts / (total * (edges[1] - edges[0])))
    if "entropy_series" in want:
        bundle.entropy_series = [(b, _hist_entropy(p.ravel(), edges)) for b, p in snaps]
    if "snapshots" in want:
        bundle.snapshots = snaps
    if traj is not None:
        bundle.trajectory = traj
    return bundle
