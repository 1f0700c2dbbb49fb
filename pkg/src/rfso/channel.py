"""Fading models for the two hops.

The RF hop is Rayleigh faded, so its SNR is exponential. The FSO hop follows
the Malaga (M) irradiance law with integer ``beta``, which is a finite
mixture of Gamma-Gamma laws: component ``k`` (1 <= k <= beta) is the product
of Gamma(alpha) and Gamma(k) variates scaled by ``1/Lambda``, and the mixture
weights form a Binomial(beta - 1, Omega' / (xi beta + Omega')) law on k - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

from .numerics import (
    QuadratureSettings,
    bessel_k,
    integrate_finite,
    meijer_g_batch,
)

__all__ = [
    "FsoSnrParams",
    "MalagaParams",
    "RayleighParams",
    "fso_snr_cdf",
    "fso_snr_cdf_quadrature",
    "fso_snr_pdf",
    "gamma_gamma_pdf",
    "k_distribution_pdf",
    "make_gamma_gamma",
    "make_k_distribution",
    "malaga_cdf",
    "malaga_from_budget",
    "malaga_pdf",
    "rayleigh_snr_cdf",
    "rayleigh_snr_pdf",
    "sample_malaga",
    "sample_rayleigh_snr",
]


@dataclass(frozen=True)
class MalagaParams:
    """Malaga irradiance parameters with integer ``beta``.

    Attributes
    ----------
    alpha : float
        Effective number of large-scale scattering cells.
    beta : int
        Fading parameter (natural number).
    rho : float
        Share of scatter power coupled to the line-of-sight term, in [0, 1].
    b0 : float
        Half the total scatter power.
    omega : float
        Line-of-sight power.
    phase_diff : float
        Deterministic phase of the LoS term minus that of the coupled scatter.
    """

    alpha: float
    beta: int
    rho: float
    b0: float
    omega: float
    phase_diff: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        if int(self.beta) != self.beta or self.beta < 1:
            raise ValueError(f"beta must be a positive integer, got {self.beta!r}")
        object.__setattr__(self, "beta", int(self.beta))
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho!r}")
        if not self.b0 > 0:
            raise ValueError(f"b0 must be positive, got {self.b0!r}")
        if not self.omega >= 0:
            raise ValueError(f"omega must be nonnegative, got {self.omega!r}")
        if not self.xi * self.beta + self.omega_prime > 0:
            raise ValueError("xi * beta + Omega' must be positive")

    @property
    def xi(self) -> float:
        return 2.0 * self.b0 * (1.0 - self.rho)

    @property
    def omega_prime(self) -> float:
        coupled = 2.0 * self.rho * self.b0
        return (self.omega + coupled
                + 2.0 * math.sqrt(coupled * self.omega) * math.cos(self.phase_diff))

    @property
    def lambda_const(self) -> float:
        return self.alpha * self.beta / (self.xi * self.beta + self.omega_prime)

    @property
    def mean(self) -> float:
        return self.xi + self.omega_prime

    @property
    def weights(self) -> tuple[float, ...]:
        """Mixture weights w_1..w_beta; they sum to one."""
        p = self.omega_prime / (self.xi * self.beta + self.omega_prime)
        n = self.beta - 1
        return tuple(math.comb(n, j) * p ** j * (1.0 - p) ** (n - j) for j in range(n + 1))

    @property
    def a_const(self) -> float:
        """The normalising constant A; NaN when xi = 0 (it is singular there)."""
        a, b, xi, op = self.alpha, self.beta, self.xi, self.omega_prime
        if xi == 0.0:
            return math.nan
        return (2.0 * a ** (a / 2) / (xi ** (1 + a / 2) * math.gamma(a))
                * (xi * b / (xi * b + op)) ** (a / 2 + b))

    @property
    def a_k(self) -> tuple[float, ...]:
        """Series coefficients a_1..a_beta; NaN when xi = 0."""
        a, b, xi, op = self.alpha, self.beta, self.xi, self.omega_prime
        if xi == 0.0:
            return (math.nan,) * b
        return tuple(
            math.comb(b - 1, k - 1) * (xi * b + op) ** (1 - k / 2) / math.factorial(k - 1)
            * (op / xi) ** (k - 1) * (a / b) ** (k / 2)
            for k in range(1, b + 1)
        )

    def a_times_ak(self) -> tuple[float, ...]:
        """Products A * a_k, finite even where A and a_k separately are not."""
        lam, a = self.lambda_const, self.alpha
        return tuple(
            2.0 * w * lam ** ((a + k) / 2) / (math.gamma(a) * math.gamma(k))
            for k, w in enumerate(self.weights, start=1)
        )

    def components(self) -> list[tuple[int, float]]:
        """(k, w_k) for the mixture components with nonzero weight."""
        return [(k, w) for k, w in enumerate(self.weights, start=1) if w > 0.0]

    @property
    def is_k_distribution(self) -> bool:
        return self.rho == 0.0 and self.omega == 0.0

    @property
    def is_gamma_gamma(self) -> bool:
        return self.rho == 1.0 and abs(self.omega_prime - 1.0) < 1e-12


def malaga_from_budget(alpha, beta, rho, b0, phase_diff=0.0) -> MalagaParams:
    """Parameters with the optical power normalised as Omega + 2 b0 = 1."""
    if not 0 < 2 * b0 <= 1:
        raise ValueError("need 0 < 2 b0 <= 1 for Omega = 1 - 2 b0 to be valid")
    return MalagaParams(alpha, beta, rho, b0, 1.0 - 2.0 * b0, phase_diff)


def make_k_distribution(alpha: float, b0: float, beta: int = 1) -> MalagaParams:
    """K-distribution as the Malaga special case rho = 0, Omega = 0."""
    return MalagaParams(alpha, beta, 0.0, b0, 0.0, 0.0)


def make_gamma_gamma(alpha: float, beta: int) -> MalagaParams:
    """Gamma-Gamma as the Malaga special case rho = 1, Omega' = 1.

    All scatter power is coupled (b0 = 1/2, Omega = 0), so xi = 0 and only
    the k = beta component survives.
    """
    return MalagaParams(alpha, beta, 1.0, 0.5, 0.0, 0.0)


@dataclass(frozen=True)
class RayleighParams:
    gamma_bar_1: float

    def __post_init__(self):
        if not self.gamma_bar_1 > 0:
            raise ValueError("average RF SNR must be positive")


@dataclass(frozen=True)
class FsoSnrParams:
    malaga: MalagaParams
    gamma_bar_2: float

    def __post_init__(self):
        if not self.gamma_bar_2 > 0:
            raise ValueError("average FSO SNR must be positive")


# ---------------------------------------------------------------------------
# Densities and distribution functions
# ---------------------------------------------------------------------------

def _positive(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError(f"{name} must be positive")
    return arr


def _log_gg_norm(alpha: float, k: float, lam: float) -> float:
    return (math.log(2.0) + 0.5 * (alpha + k) * math.log(lam)
            - sc.gammaln(alpha) - sc.gammaln(k))


def gamma_gamma_pdf(i, alpha: float, k: float, lam: float):
    """Density of X*Y/lam with X ~ Gamma(alpha), Y ~ Gamma(k)."""
    i = _positive(i, "irradiance")
    log_pref = _log_gg_norm(alpha, k, lam) + (0.5 * (alpha + k) - 1.0) * np.log(i)
    return np.exp(log_pref) * bessel_k(alpha - k, 2.0 * np.sqrt(lam * i))


def malaga_pdf(p: MalagaParams, i):
    """Malaga irradiance density f_I(i)."""
    i = _positive(i, "irradiance")
    lam = p.lambda_const
    out = np.zeros_like(i, dtype=float)
    for k, w in p.components():
        out = out + w * gamma_gamma_pdf(i, p.alpha, k, lam)
    return out if out.ndim else float(out)


def k_distribution_pdf(i, alpha: float, b0: float):
    """Two-parameter K density written out directly."""
    i = _positive(i, "irradiance")
    lam = alpha / (2.0 * b0)
    return (2.0 / math.gamma(alpha) * lam ** ((alpha + 1) / 2) * i ** ((alpha - 1) / 2)
            * bessel_k(alpha - 1, 2.0 * np.sqrt(lam * i)))


def fso_snr_pdf(p: FsoSnrParams, gamma2):
    """Density of the FSO electrical SNR gamma2 = Gamma2 * I**2."""
    g = _positive(gamma2, "gamma2")
    m = p.malaga
    lam, g2 = m.lambda_const, p.gamma_bar_2
    out = np.zeros_like(g, dtype=float)
    for (k, w), a_ak in zip(enumerate(m.weights, start=1), m.a_times_ak()):
        if w == 0.0:
            continue
        e = (m.alpha + k) / 4.0
        out = out + (0.5 * a_ak * g ** (e - 1.0) / g2 ** e
                     * bessel_k(m.alpha - k, 2.0 * np.sqrt(lam * np.sqrt(g / g2))))
    return out if out.ndim else float(out)


def series_coefficients(p: MalagaParams) -> list[tuple[int, float, float]]:
    """(k, w_k, c_k) with c_k = 2^(alpha+k) w_k / (4 pi Gamma(alpha) Gamma(k)).

    ``c_k`` is the common prefactor ``(A/(8 pi)) a_k 2^(alpha+k) Lambda^-(alpha+k)/2``
    of every Meijer-G series in the end-to-end statistics.
    """
    out = []
    for k, w in p.components():
        log_c = ((p.alpha + k) * math.log(2.0) + math.log(w) - math.log(4.0 * math.pi)
                 - sc.gammaln(p.alpha) - sc.gammaln(k))
        out.append((k, w, math.exp(log_c)))
    return out


def kappa2(alpha: float, k: int) -> tuple[float, ...]:
    return (alpha / 2, (alpha + 1) / 2, k / 2, (k + 1) / 2, 0.0)


_G_SETTINGS = QuadratureSettings(abs_tol=1e-300, rel_tol=1e-11)


def fso_snr_cdf(p: FsoSnrParams, gamma, settings: QuadratureSettings | None = None):
    """CDF of gamma2 as a Meijer-G series, G^{4,1}_{1,5}(Lambda^2 g / 16 Gamma2 | 1; kappa2)."""
    settings = settings or _G_SETTINGS
    g = _positive(gamma, "gamma")
    m = p.malaga
    z = m.lambda_const ** 2 * np.atleast_1d(g) / (16.0 * p.gamma_bar_2)
    total = np.zeros_like(z)
    for k, _, c in series_coefficients(m):
        total += c * meijer_g_batch(4, 1, (1.0,), kappa2(m.alpha, k), z, settings)
    total = np.clip(total, 0.0, 1.0) if np.all((total > -1e-7) & (total < 1 + 1e-7)) else total
    return total.reshape(g.shape) if g.ndim else float(total[0])


def malaga_cdf(p: MalagaParams, i, settings: QuadratureSettings | None = None):
    """Irradiance CDF by quadrature of the density.

    For an array the points are sorted and the density is integrated panel
    by panel between consecutive points, so large sample sets (as used in
    goodness-of-fit checks) cost one pass.
    """
    settings = settings or QuadratureSettings(abs_tol=1e-13, rel_tol=1e-11)
    arr = _positive(i, "irradiance")
    flat = np.atleast_1d(arr).ravel()
    order = np.argsort(flat)
    xs = flat[order]

    def pdf(x):
        return malaga_pdf(p, np.maximum(x, 1e-300))

    first = integrate_finite(pdf, 0.0, float(xs[0]), settings)
    nodes, weights = np.polynomial.legendre.leggauss(20)
    lo, hi = xs[:-1], xs[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    panels = np.zeros_like(lo)
    chunk = 20000
    for s in range(0, lo.size, chunk):
        x = mid[s:s + chunk, None] + half[s:s + chunk, None] * nodes
        panels[s:s + chunk] = half[s:s + chunk] * (pdf(x.ravel()).reshape(x.shape) @ weights)
    cdf_sorted = first + np.concatenate([[0.0], np.cumsum(panels)])
    out = np.empty_like(flat)
    out[order] = np.minimum(cdf_sorted, 1.0)
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


def fso_snr_cdf_quadrature(p: FsoSnrParams, gamma, settings: QuadratureSettings | None = None):
    """CDF of gamma2 by quadrature of the irradiance density (no Meijer-G)."""
    g = _positive(gamma, "gamma")
    return malaga_cdf(p.malaga, np.sqrt(g / p.gamma_bar_2), settings)


def rayleigh_snr_pdf(p: RayleighParams, gamma):
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ValueError("gamma must be nonnegative")
    out = np.exp(-g / p.gamma_bar_1) / p.gamma_bar_1
    return out if out.ndim else float(out)


def rayleigh_snr_cdf(p: RayleighParams, gamma):
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ValueError("gamma must be nonnegative")
    out = -np.expm1(-g / p.gamma_bar_1)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------

def sample_malaga(p: MalagaParams, rng: np.random.Generator, count: int) -> np.ndarray:
    """Draw ``count`` irradiance samples from the Malaga law.

    The component index is drawn from the binomial mixture law, then
    ``I = X * Y / Lambda`` with ``X ~ Gamma(alpha)`` and ``Y ~ Gamma(k)``.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    succ = p.omega_prime / (p.xi * p.beta + p.omega_prime)
    k = 1 + rng.binomial(p.beta - 1, succ, size=count)
    x = rng.standard_gamma(p.alpha, size=count)
    y = rng.standard_gamma(k.astype(float))
    return x * y / p.lambda_const


def sample_rayleigh_snr(p: RayleighParams, rng: np.random.Generator, count: int) -> np.ndarray:
    if count < 1:
        raise ValueError("count must be >= 1")
    return p.gamma_bar_1 * rng.standard_exponential(count)
