"""Closed-form probability laws on the half line.

Every law handled here has the shape

    rho(s) = C * s**beta * exp(-rate * s**alpha),    s >= 0,

with integer beta >= 0 and stretch exponent alpha in {1, 2}.  That single
family covers the Erlang laws (alpha=1), the radial Gaussian laws (alpha=2),
the half-line Gaussian (beta=0, alpha=2), and the whole unit-mean spacing
catalog (Poisson, semi-Poisson, Wigner-type surmises, and the spacing-free
reference law P0).

Exact constructions are used for sampling: alpha=1 laws are sums of
exponentials, alpha=2 laws are norms of beta+1 independent unit Gaussians
rescaled by 1/sqrt(2*rate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammainc

from . import special_fns as sf
from .errors import DomainError, UnsupportedKindError

_KINDS = ("GenericFamily", "Erlang", "BesselOU", "HalfLineGaussian", "SurmiseCatalog")
_MAX_MOMENT_ORDER = 8


@dataclass(frozen=True)
class DensityModel:
    """Parameters of one law rho(s) = C s^beta exp(-rate s^alpha)."""

    beta: int
    alpha: float
    rate: float
    kind: str = "GenericFamily"
    label: str = ""
    prefactor: float | None = None  # exact catalog constant; None means derive C

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown density kind {self.kind!r}")
        if self.alpha not in (1.0, 2.0):
            raise DomainError(f"stretch exponent must be 1 or 2, got {self.alpha}")
        if not (isinstance(self.beta, (int, np.integer)) and self.beta >= 0):
            raise DomainError(f"polynomial exponent must be an integer >= 0, got {self.beta}")
        if not (self.rate > 0.0 and math.isfinite(self.rate)):
            raise DomainError(f"rate must be positive and finite, got {self.rate}")

    # ---- normalization ----------------------------------------------------

    @property
    def shape_order(self) -> float:
        """(beta + 1) / alpha, the gamma-function order of the law."""
        return (self.beta + 1.0) / self.alpha

    @property
    def log_norm(self) -> float:
        """ln C with C the normalization constant."""
        if self.prefactor is not None:
            return math.log(self.prefactor)
        nu = self.shape_order
        return math.log(self.alpha) + nu * math.log(self.rate) - sf.ln_gamma(nu)

    # ---- pointwise evaluation ---------------------------------------------

    def logpdf(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < 0.0):
            raise DomainError("density arguments must be >= 0")
        with np.errstate(divide="ignore"):
            out = self.log_norm + self.beta * np.log(s) - self.rate * s ** self.alpha
        if self.beta == 0:
            out = np.where(s == 0.0, self.log_norm, out)
        return out if out.ndim else float(out)

    def pdf(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < 0.0):
            raise DomainError("density arguments must be >= 0")
        if self.beta == 0:
            val = np.exp(self.log_norm - self.rate * s ** self.alpha)
        else:
            val = np.zeros_like(s)
            pos = s > 0.0
            val[pos] = np.exp(self.log_norm + self.beta * np.log(s[pos])
                              - self.rate * s[pos] ** self.alpha)
        return val if val.ndim else float(val)

    def cdf(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < 0.0):
            raise DomainError("density arguments must be >= 0")
        val = gammainc(self.shape_order, self.rate * s ** self.alpha)
        return val if val.ndim else float(val)

    # ---- moments ------------------------------------------------------------

    def moment(self, k: int) -> float:
        """<s^k> via gamma-function ratios, k <= 8."""
        if k < 0 or k > _MAX_MOMENT_ORDER:
            raise DomainError(f"moment order must be in 0..{_MAX_MOMENT_ORDER}, got {k}")
        nu = self.shape_order
        return math.exp(sf.ln_gamma(nu + k / self.alpha) - sf.ln_gamma(nu)
                        - (k / self.alpha) * math.log(self.rate))

    @property
    def mean(self) -> float:
        return self.moment(1)

    @property
    def variance(self) -> float:
        m1 = self.moment(1)
        return self.moment(2) - m1 * m1

    def tail_mass(self, cut: float) -> float:
        return 1.0 - self.cdf(cut)

    def tail_cutoff(self, eps: float = 1e-14) -> float:
        """Smallest power-of-two multiple of the mean with tail mass < eps."""
        cut = max(self.mean, 1.0)
        for _ in range(60):
            if self.tail_mass(cut) < eps:
                return cut
            cut *= 2.0
        raise DomainError("tail cutoff search failed")

    # ---- sampling -----------------------------------------------------------

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Exact i.i.d. draws via the law's defining construction."""
        if count < 1:
            raise DomainError(f"count must be >= 1, got {count}")
        k = self.beta + 1
        if self.alpha == 1.0:
            # sum of k unit-rate exponentials, rescaled
            return rng.standard_exponential((count, k)).sum(axis=1) / self.rate
        # norm of k unit Gaussians, rescaled
        x = rng.standard_normal((count, k))
        return np.sqrt((x * x).sum(axis=1) / (2.0 * self.rate))

    # ---- serialization --------------------------------------------------------

    def to_json(self) -> dict:
        if self.kind == "Erlang":
            params = {"rate": self.rate, "shape": self.beta + 1}
        elif self.kind == "BesselOU":
            params = {"dim": self.beta + 1, "rate": self.rate}
        elif self.kind == "HalfLineGaussian":
            params = {"sigma_sq": 0.5 / self.rate}
        elif self.kind == "SurmiseCatalog":
            params = {"label": self.label}
        else:
            params = {"beta": self.beta, "alpha": self.alpha, "rate": self.rate}
        return {"kind": self.kind, "params": params}


def from_json(obj: dict) -> DensityModel:
    kind = obj.get("kind")
    params = obj.get("params", {})
    if kind == "Erlang":
        return erlang(params["rate"], params["shape"])
    if kind == "BesselOU":
        model = bessel_ou(params["dim"])
        rate = params.get("rate", 1.0)
        return model if rate == 1.0 else replace(model, rate=rate)
    if kind == "HalfLineGaussian":
        return half_line_gaussian(params["sigma_sq"])
    if kind == "SurmiseCatalog":
        return surmise_catalog()[params["label"]]
    if kind == "GenericFamily":
        return generic_family(params["beta"], params["alpha"], params.get("rate"))
    raise DomainError(f"unknown density kind {kind!r}")


# ---- constructors ------------------------------------------------------------


def erlang(rate: float, shape: int) -> DensityModel:
    """Erlang law rate^n s^{n-1} e^{-rate s} / (n-1)!."""
    if not (isinstance(shape, (int, np.integer)) and shape >= 1):
        raise DomainError(f"Erlang shape must be an integer >= 1, got {shape}")
    return DensityModel(beta=int(shape) - 1, alpha=1.0, rate=float(rate), kind="Erlang")


def bessel_ou(dim: int) -> DensityModel:
    """Radial law (2 / Gamma(n/2)) r^{n-1} e^{-r^2}: the norm of n unit
    Gaussians divided by sqrt(2)."""
    if not (isinstance(dim, (int, np.integer)) and dim >= 1):
        raise DomainError(f"dim must be an integer >= 1, got {dim}")
    return DensityModel(beta=int(dim) - 1, alpha=2.0, rate=1.0, kind="BesselOU")


def half_line_gaussian(sigma_sq: float) -> DensityModel:
    """|N(0, sigma^2)| with pdf sqrt(2/(pi sigma^2)) e^{-s^2 / (2 sigma^2)}."""
    if not sigma_sq > 0.0:
        raise DomainError(f"sigma_sq must be positive, got {sigma_sq}")
    return DensityModel(beta=0, alpha=2.0, rate=0.5 / float(sigma_sq), kind="HalfLineGaussian")


def unit_mean_rate(beta: int, alpha: float) -> float:
    """Rate giving <s> = 1: (Gamma((beta+2)/alpha) / Gamma((beta+1)/alpha))^alpha."""
    lo = (beta + 1.0) / alpha
    hi = (beta + 2.0) / alpha
    return math.exp(alpha * (sf.ln_gamma(hi) - sf.ln_gamma(lo)))


def generic_family(beta: int, alpha: float, rate: float | None = None) -> DensityModel:
    """General member s^beta exp(-rate s^alpha); rate=None picks unit mean."""
    if beta not in (0, 1, 2, 3, 4):
        raise DomainError(f"generic family restricts beta to 0..4, got {beta}")
    if rate is None:
        rate = unit_mean_rate(beta, alpha)
    return DensityModel(beta=int(beta), alpha=float(alpha), rate=float(rate))


def normalize_unit_mean(model: DensityModel) -> DensityModel:
    """Rescale to <s> = 1; models already at unit mean come back unchanged."""
    target = unit_mean_rate(model.beta, model.alpha)
    if abs(model.rate - target) <= 1e-12 * target:
        return model  # fixed point: keep the exact stored rate
    return replace(model, rate=target, prefactor=None)


# ---- the unit-mean spacing catalog ---------------------------------------------

_PI = math.pi


def surmise_catalog() -> dict[str, DensityModel]:
    """All unit-mean spacing laws, with their exact literature coefficients."""

    def entry(label, beta, alpha, rate, prefactor):
        return DensityModel(beta=beta, alpha=alpha, rate=rate, kind="SurmiseCatalog",
                            label=label, prefactor=prefactor)

    return {
        "Poisson": entry("Poisson", 0, 1.0, 1.0, 1.0),
        "SemiPoisson2": entry("SemiPoisson2", 1, 1.0, 2.0, 4.0),
        "SemiPoisson3": entry("SemiPoisson3", 2, 1.0, 3.0, 27.0 / 2.0),
        "SemiPoisson5": entry("SemiPoisson5", 4, 1.0, 5.0, 3125.0 / 24.0),
        "GOE": entry("GOE", 1, 2.0, _PI / 4.0, _PI / 2.0),
        "GUE": entry("GUE", 2, 2.0, 4.0 / _PI, 32.0 / _PI ** 2),
        "Ginibre": entry("Ginibre", 3, 2.0, 9.0 * _PI / 16.0, 3.0 ** 4 * _PI ** 2 / 2.0 ** 7),
        "GSE": entry("GSE", 4, 2.0, 64.0 / (9.0 * _PI), 2.0 ** 18 / (3.0 ** 6 * _PI ** 3)),
        "P0": entry("P0", 0, 2.0, 1.0 / _PI, 2.0 / _PI),
    }


# ---- closed-form Shannon entropies ----------------------------------------------


def shannon_entropy_closed(model: DensityModel) -> float:
    """Differential entropy -int rho ln rho from the closed form.

    Only the kinds with a published closed form are accepted; use the entropy
    module's quadrature for catalog or generic entries.
    """
    if model.kind == "Erlang":
        n = model.beta + 1
        return (sf.ln_gamma(n) + (1.0 - n) * sf.digamma(n) + n - math.log(model.rate))
    if model.kind == "BesselOU":
        n = model.beta + 1
        half = 0.5 * n
        return (sf.ln_gamma(half) - math.log(2.0) - 0.5 * math.log(model.rate)
                - 0.5 * (n - 1.0) * sf.digamma(half) + half)
    if model.kind == "HalfLineGaussian":
        sigma_sq = 0.5 / model.rate
        return 0.5 * (math.log(sigma_sq * _PI / 2.0) + 1.0)
    raise UnsupportedKindError(
        f"no closed-form entropy for kind {model.kind!r}; use quadrature")


def bessel_ou_entropy_uncorrected(dim: int) -> float:
    """Closed-form variant that omits the constant 1/2 - ln 2.

    The correct differential entropy of the radial law (2/Gamma(n/2)) r^{n-1}
    e^{-r^2} is ln Gamma(n/2) - ln 2 - ((n-1)/2) psi(n/2) + n/2 (see
    shannon_entropy_closed).  This variant, ln Gamma(n/2) - ((n-1)/2) psi(n/2)
    + (n-1)/2, circulates as a closed form but differs from the quadrature
    value by exactly 1/2 - ln 2; it is kept so the discrepancy stays a
    documented, testable constant.
    """
    if not (isinstance(dim, (int, np.integer)) and dim >= 1):
        raise DomainError(f"dim must be an integer >= 1, got {dim}")
    half = 0.5 * dim
    return sf.ln_gamma(half) - 0.5 * (dim - 1.0) * sf.digamma(half) + 0.5 * (dim - 1.0)
