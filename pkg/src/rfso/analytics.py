"""End-to-end statistics and average symbol error rates.

Closed forms are Meijer-G series over the mixture components of the FSO hop.
Each one also has a direct-quadrature counterpart that integrates over the
irradiance density and never touches Meijer-G, so the two can be checked
against each other.

Numerical note: for the fixed-gain relay the G-function in the MGF and CDF
is dominated at high SNR by its leading residue, which cancels against the
``1`` in front of it. The closed forms here subtract that residue
analytically (see :func:`rfso.numerics.meijer_g_remainder`) so small ASERs
keep full relative accuracy.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special as sc

from .channel import (
    FsoSnrParams,
    MalagaParams,
    RayleighParams,
    fso_snr_cdf,
    fso_snr_cdf_quadrature,
    gamma_gamma_pdf,
    kappa2,
    series_coefficients,
)
from .numerics import (
    NumericsError,
    QuadratureSettings,
    integrate_finite,
    integrate_semi_infinite,
    meijer_g_batch,
    meijer_g_remainder,
)
from .relay import ChannelDependent, FixedGain, RelayStrategy

__all__ = [
    "DPSK",
    "LinkBudget",
    "MPSK",
    "Modulation",
    "NCFSK",
    "ProbabilityRangeError",
    "SpecialCase",
    "aser",
    "aser_dpsk_ncfsk",
    "aser_dpsk_ncfsk_channel_dependent",
    "aser_dpsk_ncfsk_channel_dependent_special",
    "aser_dpsk_ncfsk_fixed",
    "aser_dpsk_ncfsk_fixed_special",
    "aser_dpsk_ncfsk_quadrature",
    "aser_mpsk_approx",
    "aser_mpsk_channel_dependent",
    "aser_mpsk_exact",
    "aser_mpsk_quadrature",
    "aser_quadrature",
    "cdf",
    "cdf_channel_dependent",
    "cdf_channel_dependent_quadrature",
    "cdf_fixed_gain",
    "cdf_fixed_gain_quadrature",
    "mgf",
    "mgf_channel_dependent",
    "mgf_channel_dependent_special",
    "mgf_channel_dependent_quadrature",
    "mgf_fixed_gain",
    "mgf_fixed_gain_quadrature",
    "mgf_fixed_gain_special",
    "modulation_from_name",
    "mpsk_sep",
    "mpsk_sep_slope",
    "rayleigh_mpsk_ser",
]


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MPSK:
    """M-ary phase shift keying."""

    order: int

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 2:
            raise ValueError(f"MPSK order must be an integer >= 2, got {self.order!r}")
        object.__setattr__(self, "order", int(self.order))

    @property
    def name(self) -> str:
        return {2: "bpsk", 4: "qpsk"}.get(self.order, f"{self.order}psk")

    @property
    def theta(self) -> float:
        """Upper limit (M - 1) pi / M of the angular integral."""
        return (self.order - 1) * math.pi / self.order

    @property
    def n(self) -> float:
        return math.sin(math.pi / self.order)

    @property
    def s_points(self) -> tuple[float, float, float]:
        s1 = self.n ** 2
        return (s1, 4.0 * s1 / 3.0, 1.0)

    @property
    def approx_weights(self) -> tuple[float, float, float]:
        base = (self.order - 1) / (2.0 * self.order)
        return (base - 1.0 / 6.0, 0.25, base - 0.25)


@dataclass(frozen=True)
class DPSK:
    """Differential PSK; conditional SEP 0.5 exp(-gamma)."""

    @property
    def name(self) -> str:
        return "dpsk"

    @property
    def m(self) -> int:
        return 1


@dataclass(frozen=True)
class NCFSK:
    """Non-coherent binary FSK; conditional SEP 0.5 exp(-gamma / 2)."""

    @property
    def name(self) -> str:
        return "ncfsk"

    @property
    def m(self) -> int:
        return 2


Modulation = Union[MPSK, DPSK, NCFSK]


def modulation_from_name(name: str) -> Modulation:
    """Parse ``bpsk``, ``qpsk``, ``<M>psk``, ``dpsk`` or ``ncfsk``."""
    key = name.strip().lower()
    if key == "dpsk":
        return DPSK()
    if key == "ncfsk":
        return NCFSK()
    if key == "bpsk":
        return MPSK(2)
    if key == "qpsk":
        return MPSK(4)
    if key.endswith("psk") and key[:-3].isdigit():
        return MPSK(int(key[:-3]))
    raise ValueError(f"unknown modulation {name!r}")


@dataclass(frozen=True)
class LinkBudget:
    """Everything the end-to-end statistics depend on."""

    rf: RayleighParams
    fso: FsoSnrParams
    strategy: RelayStrategy

    @classmethod
    def symmetric(cls, malaga: MalagaParams, snr: float, strategy: RelayStrategy):
        """Both hops at the same average SNR (linear)."""
        return cls(RayleighParams(snr), FsoSnrParams(malaga, snr), strategy)

    @property
    def gamma_bar_1(self) -> float:
        return self.rf.gamma_bar_1

    @property
    def gamma_bar_2(self) -> float:
        return self.fso.gamma_bar_2

    @property
    def malaga(self) -> MalagaParams:
        return self.fso.malaga


class SpecialCase(enum.Enum):
    K = "K"
    GAMMA_GAMMA = "GG"


class ProbabilityRangeError(NumericsError):
    """A computed probability (or MGF value) fell outside [0, 1] by more than the tolerance."""


_CLAMP_TOL = 1e-7
_G_SETTINGS = QuadratureSettings(abs_tol=1e-300, rel_tol=1e-11)
_ANGLE_SETTINGS = QuadratureSettings(abs_tol=1e-15, rel_tol=1e-10)
_EXPECT_SETTINGS = QuadratureSettings(abs_tol=1e-16, rel_tol=1e-11, max_subdivisions=4000)


def _probability(x, what: str):
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < -_CLAMP_TOL) or np.any(arr > 1 + _CLAMP_TOL):
        bad = arr[~((arr >= -_CLAMP_TOL) & (arr <= 1 + _CLAMP_TOL))]
        raise ProbabilityRangeError(f"{what} left [0, 1]: {bad[:3]}", estimate=arr)
    out = np.clip(arr, 0.0, 1.0)
    return out if out.ndim else float(out)


def _require(lb: LinkBudget, kind: type):
    if not isinstance(lb.strategy, kind):
        raise TypeError(f"expected a {kind.__name__} link budget, got {lb.strategy!r}")


def _g_sum(m, n, a, kappa_of_k, coeffs, z, remainder: bool) -> np.ndarray:
    """sum_k c_k G(z | a; kappa(k)) over mixture components.

    Arguments are grouped into two-decade bins so each contour stays close
    to the saddle of every argument it serves.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.zeros_like(z)
    bins = np.floor(np.log10(z) / 2.0)
    for b in np.unique(bins):
        sel = bins == b
        for k, c in coeffs:
            b_par = kappa_of_k(k)
            if remainder:
                g = meijer_g_remainder(m, n, a, b_par, z[sel], _G_SETTINGS)
            else:
                g = meijer_g_batch(m, n, a, b_par, z[sel], _G_SETTINGS)
            out[sel] += c * g
    return out


def _coeffs(p: MalagaParams):
    return [(k, c) for k, _, c in series_coefficients(p)]


def _kappa3(alpha):
    return lambda k: kappa2(alpha, k)[:4]


def _kappa2(alpha):
    return lambda k: kappa2(alpha, k)


def _nonneg(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr >= 0)):
        raise ValueError(f"{name} must be nonnegative")
    return arr


def _scalar_or_array(template: np.ndarray, flat: np.ndarray):
    return flat.reshape(template.shape) if template.ndim else float(flat[0])


# ---------------------------------------------------------------------------
# Fixed gain
# ---------------------------------------------------------------------------

def cdf_fixed_gain(lb: LinkBudget, gamma):
    """CDF of gamma1 gamma2 / (gamma2 + C)."""
    _require(lb, FixedGain)
    g = np.asarray(gamma, dtype=float)
    if np.any(~(g > 0)):
        raise ValueError("gamma must be positive")
    flat = np.atleast_1d(g).ravel()
    p, g1, g2, c = lb.malaga, lb.gamma_bar_1, lb.gamma_bar_2, lb.strategy.c
    z = p.lambda_const ** 2 * c * flat / (16.0 * g1 * g2)
    rest = _g_sum(5, 0, (), _kappa2(p.alpha), _coeffs(p), z, remainder=True)
    val = -np.expm1(-flat / g1) - np.exp(-flat / g1) * rest
    return _probability(_scalar_or_array(g, val), "fixed-gain CDF")


def mgf_fixed_gain(lb: LinkBudget, s):
    """MGF E[exp(-s gamma)] of the fixed-gain end-to-end SNR."""
    _require(lb, FixedGain)
    s = _nonneg(s, "s")
    flat = np.atleast_1d(s).ravel()
    p, g1, g2, c = lb.malaga, lb.gamma_bar_1, lb.gamma_bar_2, lb.strategy.c
    x = g1 * flat
    inf = np.isinf(flat)
    out = np.zeros_like(flat)
    fin = ~inf
    if np.any(fin):
        xf = x[fin]
        z = p.lambda_const ** 2 * c / (16.0 * g2 * (1.0 + xf))
        rest = _g_sum(5, 1, (0.0,), _kappa2(p.alpha), _coeffs(p), z, remainder=True)
        out[fin] = 1.0 / (1.0 + xf) - xf / (1.0 + xf) * rest
    return _probability(_scalar_or_array(s, out), "fixed-gain MGF")


def _special_params(kind: SpecialCase, p: MalagaParams):
    if kind is SpecialCase.K:
        if not p.is_k_distribution:
            raise ValueError("K-distribution formulas need rho = 0 and Omega = 0")
        return (2.0 ** p.alpha / (2.0 * math.pi * math.gamma(p.alpha)),
                (p.alpha / 2, (p.alpha + 1) / 2, 0.5, 1.0),
                p.alpha ** 2 / (64.0 * p.b0 ** 2))
    if kind is SpecialCase.GAMMA_GAMMA:
        if not p.is_gamma_gamma:
            raise ValueError("Gamma-Gamma formulas need rho = 1 and Omega' = 1")
        a, b = p.alpha, p.beta
        return (2.0 ** (a + b) / (4.0 * math.pi * math.gamma(a) * math.gamma(b)),
                (a / 2, (a + 1) / 2, b / 2, (b + 1) / 2),
                (a * b) ** 2 / 16.0)
    raise ValueError(f"unknown special case {kind!r}")


def mgf_fixed_gain_special(kind: SpecialCase, lb: LinkBudget, s):
    """MGF for K or Gamma-Gamma FSO hops, written directly in Meijer-G form."""
    _require(lb, FixedGain)
    coef, kap, zscale = _special_params(kind, lb.malaga)
    s = _nonneg(s, "s")
    flat = np.atleast_1d(s).ravel()
    x = lb.gamma_bar_1 * flat
    z = zscale * lb.strategy.c / (lb.gamma_bar_2 * (1.0 + x))
    g = meijer_g_batch(5, 1, (0.0,), kap + (0.0,), z, _G_SETTINGS)
    return _probability(_scalar_or_array(s, 1.0 - coef * x / (1.0 + x) * g), "MGF")


def aser_dpsk_ncfsk_fixed(lb: LinkBudget, mod: DPSK | NCFSK) -> float:
    """ASER of DPSK / NCFSK over the fixed-gain relay, in closed form."""
    _require(lb, FixedGain)
    p, g1, g2, c, m = lb.malaga, lb.gamma_bar_1, lb.gamma_bar_2, lb.strategy.c, mod.m
    z = m * p.lambda_const ** 2 * c / (16.0 * g2 * (m + g1))
    rest = _g_sum(5, 1, (0.0,), _kappa2(p.alpha), _coeffs(p), z, remainder=True)[0]
    return _probability(m / (2.0 * (m + g1)) - g1 / (2.0 * (m + g1)) * rest, "ASER")


def aser_dpsk_ncfsk_fixed_special(kind: SpecialCase, lb: LinkBudget, mod: DPSK | NCFSK) -> float:
    _require(lb, FixedGain)
    coef, kap, zscale = _special_params(kind, lb.malaga)
    g1, m = lb.gamma_bar_1, mod.m
    z = m * zscale * lb.strategy.c / (lb.gamma_bar_2 * (m + g1))
    g = meijer_g_batch(5, 1, (0.0,), kap + (0.0,), [z], _G_SETTINGS)[0]
    return _probability(0.5 - 0.5 * coef * g1 / (m + g1) * g, "ASER")


# ---------------------------------------------------------------------------
# Channel dependent (min bound)
# ---------------------------------------------------------------------------

def cdf_channel_dependent(lb: LinkBudget, gamma):
    """CDF of min(gamma1, gamma2)."""
    _require(lb, ChannelDependent)
    g = np.asarray(gamma, dtype=float)
    if np.any(~(g > 0)):
        raise ValueError("gamma must be positive")
    flat = np.atleast_1d(g).ravel()
    f2 = np.atleast_1d(fso_snr_cdf(lb.fso, flat))
    val = -np.expm1(-flat / lb.gamma_bar_1) + np.exp(-flat / lb.gamma_bar_1) * f2
    return _probability(_scalar_or_array(g, val), "channel-dependent CDF")


def mgf_channel_dependent(lb: LinkBudget, s, form: str = "reduced"):
    """MGF of min(gamma1, gamma2).

    ``form="reduced"`` uses G^{4,1}_{1,4}; ``form="intermediate"`` uses the
    equivalent G^{4,2}_{2,5} before the parameter cancellation.
    """
    _require(lb, ChannelDependent)
    s = _nonneg(s, "s")
    flat = np.atleast_1d(s).ravel()
    p, g1, g2 = lb.malaga, lb.gamma_bar_1, lb.gamma_bar_2
    out = np.zeros_like(flat)
    fin = ~np.isinf(flat)
    if np.any(fin):
        x = g1 * flat[fin]
        z = p.lambda_const ** 2 * g1 / (16.0 * g2 * (1.0 + x))
        if form == "reduced":
            series = _g_sum(4, 1, (1.0,), _kappa3(p.alpha), _coeffs(p), z, remainder=False)
        elif form == "intermediate":
            series = _g_sum(4, 2, (0.0, 1.0), _kappa2(p.alpha), _coeffs(p), z, remainder=False)
        else:
            raise ValueError(f"unknown form {form!r}")
        out[fin] = 1.0 / (1.0 + x) + x / (1.0 + x) * series
    return _probability(_scalar_or_array(s, out), "channel-dependent MGF")


def _special_cd(kind: SpecialCase, p: MalagaParams):
    coef, kap, _ = _special_params(kind, p)
    return coef, kap


def mgf_channel_dependent_special(kind: SpecialCase, lb: LinkBudget, s):
    _require(lb, ChannelDependent)
    coef, kap = _special_cd(kind, lb.malaga)
    s = _nonneg(s, "s")
    flat = np.atleast_1d(s).ravel()
    g1, lam = lb.gamma_bar_1, lb.malaga.lambda_const
    x = g1 * flat
    z = lam ** 2 * g1 / (16.0 * lb.gamma_bar_2 * (1.0 + x))
    g = meijer_g_batch(4, 1, (1.0,), kap, z, _G_SETTINGS)
    val = 1.0 - x / (1.0 + x) + coef * x / (1.0 + x) * g
    return _probability(_scalar_or_array(s, val), "MGF")


def aser_dpsk_ncfsk_channel_dependent(lb: LinkBudget, mod: DPSK | NCFSK) -> float:
    _require(lb, ChannelDependent)
    p, g1, g2, m = lb.malaga, lb.gamma_bar_1, lb.gamma_bar_2, mod.m
    z = m * p.lambda_const ** 2 * g1 / (16.0 * g2 * (m + g1))
    series = _g_sum(4, 1, (1.0,), _kappa3(p.alpha), _coeffs(p), z, remainder=False)[0]
    return _probability(m / (2.0 * (m + g1)) + g1 / (2.0 * (m + g1)) * series, "ASER")


def aser_dpsk_ncfsk_channel_dependent_special(kind: SpecialCase, lb: LinkBudget,
                                              mod: DPSK | NCFSK) -> float:
    _require(lb, ChannelDependent)
    coef, kap = _special_cd(kind, lb.malaga)
    g1, m, lam = lb.gamma_bar_1, mod.m, lb.malaga.lambda_const
    z = m * lam ** 2 * g1 / (16.0 * lb.gamma_bar_2 * (m + g1))
    g = meijer_g_batch(4, 1, (1.0,), kap, [z], _G_SETTINGS)[0]
    return _probability(0.5 - g1 / (2.0 * (m + g1)) + 0.5 * coef * g1 / (m + g1) * g, "ASER")


# ---------------------------------------------------------------------------
# Strategy-polymorphic entry points
# ---------------------------------------------------------------------------

def mgf(lb: LinkBudget, s):
    if isinstance(lb.strategy, FixedGain):
        return mgf_fixed_gain(lb, s)
    return mgf_channel_dependent(lb, s)


def cdf(lb: LinkBudget, gamma):
    if isinstance(lb.strategy, FixedGain):
        return cdf_fixed_gain(lb, gamma)
    return cdf_channel_dependent(lb, gamma)


def _require_mpsk(mod):
    if not isinstance(mod, MPSK):
        raise TypeError(f"expected an MPSK modulation, got {mod!r}")


def _angular_integrand(lb: LinkBudget, mod: MPSK, mgf_fn):
    n2 = mod.n ** 2

    def f(theta: np.ndarray) -> np.ndarray:
        out = np.zeros_like(theta)
        pos = theta > 0
        if np.any(pos):
            out[pos] = np.atleast_1d(mgf_fn(lb, n2 / np.sin(theta[pos]) ** 2))
        return out

    return f


def aser_mpsk_exact(lb: LinkBudget, mod: MPSK) -> float:
    """(1/pi) int_0^Theta M(n^2 / sin^2 theta) d theta for either strategy."""
    _require_mpsk(mod)
    val = integrate_finite(_angular_integrand(lb, mod, mgf), 0.0, mod.theta, _ANGLE_SETTINGS)
    return _probability(val / math.pi, "ASER")


def aser_mpsk_approx(lb: LinkBudget, mod: MPSK) -> float:
    """Three-point MGF approximation of the MPSK ASER."""
    _require_mpsk(mod)
    w = np.array(mod.approx_weights)
    s = np.array(mod.s_points)
    keep = w != 0.0
    vals = np.atleast_1d(mgf(lb, s[keep]))
    return float(np.dot(w[keep], vals))


def aser_mpsk_channel_dependent(lb: LinkBudget, mod: MPSK, method: str = "exact") -> float:
    """MPSK ASER under the min bound; a lower bound on the true ASER."""
    _require(lb, ChannelDependent)
    if method == "exact":
        return aser_mpsk_exact(lb, mod)
    if method == "approx":
        return aser_mpsk_approx(lb, mod)
    raise ValueError(f"unknown method {method!r}")


def aser_dpsk_ncfsk(lb: LinkBudget, mod: DPSK | NCFSK) -> float:
    if isinstance(lb.strategy, FixedGain):
        return aser_dpsk_ncfsk_fixed(lb, mod)
    return aser_dpsk_ncfsk_channel_dependent(lb, mod)


def aser(lb: LinkBudget, mod: Modulation, method: str = "exact") -> float:
    """ASER by ``exact`` (closed form / angular integral), ``approx`` or ``quadrature``."""
    if method == "quadrature":
        return aser_quadrature(lb, mod)
    if isinstance(mod, MPSK):
        if method == "exact":
            return aser_mpsk_exact(lb, mod)
        if method == "approx":
            return aser_mpsk_approx(lb, mod)
    elif method == "exact":
        return aser_dpsk_ncfsk(lb, mod)
    raise ValueError(f"method {method!r} is not available for {mod.name}")


# ---------------------------------------------------------------------------
# Direct quadrature paths (no Meijer-G)
# ---------------------------------------------------------------------------

def _expect_irradiance(p: MalagaParams, h, settings: QuadratureSettings | None = None) -> float:
    """E[h(I)] for Malaga I, integrating each mixture component separately."""
    settings = settings or _EXPECT_SETTINGS
    lam = p.lambda_const
    total = 0.0
    for k, w in p.components():
        def integrand(i, k=k):
            i = np.maximum(i, 1e-300)
            return h(i) * gamma_gamma_pdf(i, p.alpha, k, lam)

        total += w * integrate_semi_infinite(integrand, 0.0, settings, scale=p.alpha * k / lam)
    return total


def rayleigh_mpsk_ser(mod: MPSK, gamma_bar):
    """Average MPSK SER over Rayleigh fading with mean SNR ``gamma_bar``."""
    gb = np.asarray(gamma_bar, dtype=float)
    M = mod.order
    g = gb * mod.n ** 2
    r = np.sqrt(g / (1.0 + g))
    cot = math.cos(math.pi / M) / math.sin(math.pi / M)
    val = (M - 1) / M - r / math.pi * (0.5 * math.pi + np.arctan(r * cot))
    return np.maximum(val, 0.0)


def mgf_fixed_gain_quadrature(lb: LinkBudget, s: float) -> float:
    """E over the FSO hop of the Rayleigh MGF with mean gamma_bar_1 a(I).

    a(I) = Gamma2 I^2 / (Gamma2 I^2 + C) is the fixed-gain attenuation.
    """
    _require(lb, FixedGain)
    g1, g2, c = lb.gamma_bar_1, lb.gamma_bar_2, lb.strategy.c

    def h(i):
        y = g2 * i * i
        return (y + c) / (y + c + g1 * s * y)

    return _expect_irradiance(lb.malaga, h)


def cdf_fixed_gain_quadrature(lb: LinkBudget, gamma: float) -> float:
    _require(lb, FixedGain)
    g1, g2, c = lb.gamma_bar_1, lb.gamma_bar_2, lb.strategy.c

    def h(i):
        return np.exp(-gamma * c / (g1 * g2 * i * i))

    return float(-math.expm1(-gamma / g1) + math.exp(-gamma / g1) * (1.0 - _expect_irradiance(lb.malaga, h)))


def mgf_channel_dependent_quadrature(lb: LinkBudget, s: float) -> float:
    """E over gamma2 of the MGF of min(gamma1, gamma2) given gamma2."""
    _require(lb, ChannelDependent)
    g1, g2 = lb.gamma_bar_1, lb.gamma_bar_2
    x = g1 * s

    def h(i):
        return np.exp(-g2 * i * i * (s + 1.0 / g1))

    return float((1.0 + x * _expect_irradiance(lb.malaga, h)) / (1.0 + x))


def cdf_channel_dependent_quadrature(lb: LinkBudget, gamma: float) -> float:
    _require(lb, ChannelDependent)
    f1 = -math.expm1(-gamma / lb.gamma_bar_1)
    f2 = fso_snr_cdf_quadrature(lb.fso, gamma)
    return float(f1 + f2 - f1 * f2)


def aser_dpsk_ncfsk_quadrature(lb: LinkBudget, mod: DPSK | NCFSK) -> float:
    if isinstance(lb.strategy, FixedGain):
        return 0.5 * mgf_fixed_gain_quadrature(lb, 1.0 / mod.m)
    return 0.5 * mgf_channel_dependent_quadrature(lb, 1.0 / mod.m)


def mpsk_sep(mod: MPSK, gamma):
    """MPSK symbol error probability at instantaneous SNR ``gamma`` (AWGN).

    Written with Owen's T function so it is exact for every order.
    """
    g = _nonneg(gamma, "gamma") * mod.n ** 2
    cot = math.cos(math.pi / mod.order) / math.sin(math.pi / mod.order)
    val = 0.5 * sc.erfc(np.sqrt(g)) + 2.0 * sc.owens_t(np.sqrt(2.0 * g), cot)
    return val if np.ndim(val) else float(val)


def mpsk_sep_slope(mod: MPSK, gamma):
    """-d/dgamma of :func:`mpsk_sep`; integrable like gamma^(-1/2) at zero."""
    gamma = np.asarray(gamma, dtype=float)
    n2 = mod.n ** 2
    g = n2 * gamma
    h = np.sqrt(2.0 * g)
    cot = math.cos(math.pi / mod.order) / math.sin(math.pi / mod.order)
    e = np.exp(-g)
    val = (n2 * e / (2.0 * np.sqrt(math.pi * g))
           + 2.0 * n2 / h * e / math.sqrt(2.0 * math.pi) * (sc.ndtr(cot * h) - 0.5))
    return val if val.ndim else float(val)


def aser_mpsk_quadrature(lb: LinkBudget, mod: MPSK) -> float:
    """MPSK ASER without Meijer-G.

    Fixed gain: the Rayleigh SER with mean gamma_bar_1 a(I), averaged over I.
    Channel dependent: E[P(Z)] = int_0^inf -P'(z) F_Z(z) dz with the AWGN
    SEP ``P`` and F_Z built from the quadrature CDF of the FSO hop.
    """
    _require_mpsk(mod)
    if isinstance(lb.strategy, FixedGain):
        g1, g2, c = lb.gamma_bar_1, lb.gamma_bar_2, lb.strategy.c

        def h(i):
            y = g2 * i * i
            return rayleigh_mpsk_ser(mod, g1 * y / (y + c))

        return _expect_irradiance(lb.malaga, h)

    _require(lb, ChannelDependent)
    g1 = lb.gamma_bar_1

    def integrand(z):
        z = np.maximum(z, 1e-300)
        f1 = -np.expm1(-z / g1)
        f2 = fso_snr_cdf_quadrature(lb.fso, z)
        return mpsk_sep_slope(mod, z) * (f1 + f2 - f1 * f2)

    return integrate_semi_infinite(integrand, 0.0, _EXPECT_SETTINGS, scale=1.0 / mod.n ** 2)


def aser_quadrature(lb: LinkBudget, mod: Modulation) -> float:
    if isinstance(mod, MPSK):
        return aser_mpsk_quadrature(lb, mod)
    return aser_dpsk_ncfsk_quadrature(lb, mod)
