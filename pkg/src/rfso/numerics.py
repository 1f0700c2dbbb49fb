"""Special functions and quadrature used by the link analysis.

Gamma-family helpers are thin wrappers over :mod:`scipy.special`. The
modified Bessel function of the second kind, the adaptive quadrature rules
and the Mellin-Barnes evaluation of Meijer's G-function are implemented here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special as sc
from scipy.optimize import minimize_scalar

__all__ = [
    "BesselRangeError",
    "MeijerGError",
    "MeijerGSpec",
    "NumericsError",
    "QuadratureError",
    "QuadratureSettings",
    "bessel_k",
    "binomial",
    "gamma",
    "integrate_finite",
    "integrate_semi_infinite",
    "leading_residue",
    "log_gamma",
    "meijer_g",
    "meijer_g_batch",
    "meijer_g_remainder",
]


class NumericsError(ArithmeticError):
    """Base class for numerical failures that carry a best estimate."""

    def __init__(self, message: str, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class QuadratureError(NumericsError):
    """Adaptive quadrature ran out of subdivisions before meeting tolerance."""


class MeijerGError(NumericsError):
    """Mellin-Barnes contour integral did not converge within budget."""


class BesselRangeError(OverflowError):
    """K_nu(x) is not representable in double precision."""


@dataclass(frozen=True)
class QuadratureSettings:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-9
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.abs_tol > 0 or not self.rel_tol > 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")

    def target(self, value):
        return np.maximum(self.abs_tol, self.rel_tol * np.abs(value))


DEFAULT_SETTINGS = QuadratureSettings()


# ---------------------------------------------------------------------------
# Gamma family
# ---------------------------------------------------------------------------

def log_gamma(x: float) -> float:
    """Natural log of the gamma function for positive real ``x``."""
    if not x > 0:
        raise ValueError(f"log_gamma requires x > 0, got {x!r}")
    return float(sc.gammaln(x))


def gamma(x: float) -> float:
    if x <= 0 and float(x).is_integer():
        raise ValueError(f"gamma has a pole at {x!r}")
    return float(sc.gamma(x))


def binomial(n: int, k: int) -> int:
    return math.comb(n, k)


# ---------------------------------------------------------------------------
# Modified Bessel function of the second kind (Temme's method)
# ---------------------------------------------------------------------------

# Odd Taylor coefficients of 1/Gamma(1+z); used where the difference quotient
# 1/Gamma(1-mu) - 1/Gamma(1+mu) over 2 mu loses precision.
_RGAMMA_ODD = (
    0.5772156649015329,
    -0.0420026350340952,
    -0.0421977345555443,
    0.0072189432466630,
)
_EPS = 1e-16
_SERIES_XMAX = 2.0


def _temme_gammas(mu: float) -> tuple[float, float, float, float]:
    gampl = float(sc.rgamma(1.0 + mu))
    gammi = float(sc.rgamma(1.0 - mu))
    gam2 = 0.5 * (gammi + gampl)
    if abs(mu) < 1e-2:
        mu2 = mu * mu
        c1, c3, c5, c7 = _RGAMMA_ODD
        gam1 = -(c1 + mu2 * (c3 + mu2 * (c5 + mu2 * c7)))
    else:
        gam1 = (gammi - gampl) / (2.0 * mu)
    return gam1, gam2, gampl, gammi


def _k_pair_series(mu: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """K_mu and K_{mu+1} for |mu| <= 1/2 and x <= 2 (Temme's series)."""
    gam1, gam2, gampl, gammi = _temme_gammas(mu)
    mu2 = mu * mu
    x2 = 0.5 * x
    pimu = math.pi * mu
    fact = 1.0 if abs(pimu) < _EPS else pimu / math.sin(pimu)
    d = -np.log(x2)
    e = mu * d
    with np.errstate(invalid="ignore", divide="ignore"):
        fact2 = np.where(np.abs(e) < _EPS, 1.0, np.sinh(e) / e)
    ff = fact * (gam1 * np.cosh(e) + gam2 * fact2 * d)
    total = ff.copy()
    ee = np.exp(e)
    p = 0.5 * ee / gampl
    q = 0.5 / (ee * gammi)
    c = np.ones_like(x)
    dd = x2 * x2
    total1 = p.copy()
    for i in range(1, 500):
        ff = (i * ff + p + q) / (i * i - mu2)
        c = c * dd / i
        p = p / (i - mu)
        q = q / (i + mu)
        delta = c * ff
        total += delta
        total1 += c * (p - i * ff)
        if np.all(np.abs(delta) < np.abs(total) * _EPS):
            break
    return total, total1 * (2.0 / x)


def _k_pair_cf2(mu: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """K_mu and K_{mu+1} for |mu| <= 1/2 and x > 2 (Steed's continued fraction)."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25 - mu * mu
    q = np.full_like(x, a1)
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 5000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels / s) < _EPS):
            break
    h = a1 * h
    kmu = np.sqrt(math.pi / (2.0 * x)) * np.exp(-x) / s
    k1 = kmu * (mu + x + 0.5 - h) / x
    return kmu, k1


def bessel_k(nu: float, x):
    """Modified Bessel function of the second kind, K_nu(x), for real order.

    Temme's series is used for ``x <= 2`` and Steed's continued fraction
    above; orders outside [-1/2, 1/2] are reached by forward recurrence, which
    is stable for K. ``x`` may be a scalar or an array.
    """
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    if np.any(~(xa > 0)):
        raise ValueError("bessel_k requires x > 0")
    nu = abs(float(nu))
    nl = int(nu + 0.5)
    mu = nu - nl
    kmu = np.empty_like(xa)
    k1 = np.empty_like(xa)
    small = xa <= _SERIES_XMAX
    if np.any(small):
        kmu[small], k1[small] = _k_pair_series(mu, xa[small])
    if np.any(~small):
        kmu[~small], k1[~small] = _k_pair_cf2(mu, xa[~small])
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, nl + 1):
            kmu, k1 = k1, (mu + i) * (2.0 / xa) * k1 + kmu
    if not np.all(np.isfinite(kmu)):
        bad = xa[~np.isfinite(kmu)]
        raise BesselRangeError(
            f"K_{nu}(x) overflows double precision for x as small as {bad.min():.3g}"
        )
    return float(kmu[0]) if scalar else kmu


# ---------------------------------------------------------------------------
# Adaptive quadrature
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)


def _as_vectorized(f: Callable) -> Callable[[np.ndarray], np.ndarray]:
    def g(x: np.ndarray) -> np.ndarray:
        try:
            y = np.asarray(f(x), dtype=float)
            if y.shape == x.shape:
                return y
        except (TypeError, ValueError):
            pass
        return np.array([float(f(float(v))) for v in x])

    return g


def _gauss(f, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    nodes = mid[:, None] + half[:, None] * _GL_NODES
    vals = f(nodes.ravel()).reshape(nodes.shape)
    return half * (vals @ _GL_WEIGHTS)


def integrate_finite(
    f: Callable,
    a: float,
    b: float,
    settings: QuadratureSettings | None = None,
) -> float:
    """Globally adaptive Gauss-Legendre quadrature of ``f`` over ``[a, b]``.

    ``f`` should accept a numpy array; scalar callables are wrapped. Each
    panel is estimated by a 15-point rule on the whole panel and on its two
    halves, and panels whose discrepancy exceeds their share of the
    tolerance are bisected until the summed discrepancy meets
    ``max(abs_tol, rel_tol * |I|)``.
    """
    settings = settings or DEFAULT_SETTINGS
    if a == b:
        return 0.0
    if b < a:
        return -integrate_finite(f, b, a, settings)
    fv = _as_vectorized(f)
    width = b - a

    lo = np.array([a])
    hi = np.array([b])
    mid = 0.5 * (lo + hi)
    coarse = _gauss(fv, lo, hi)
    left = _gauss(fv, lo, mid)
    right = _gauss(fv, mid, hi)
    n_panels = 1
    while True:
        fine = left + right
        err = np.abs(coarse - fine)
        total = float(fine.sum())
        err_total = float(err.sum())
        tol = float(settings.target(total))
        if not math.isfinite(total):
            raise QuadratureError("integrand produced non-finite values", total, err_total)
        if err_total <= tol or err_total <= 50 * _EPS * float(np.abs(fine).sum()):
            return total
        if n_panels >= settings.max_subdivisions:
            raise QuadratureError(
                f"quadrature budget of {settings.max_subdivisions} panels exhausted "
                f"(estimate {total:.6g}, error {err_total:.3g})",
                total,
                err_total,
            )
        share = tol * (hi - lo) / width
        split = err > share
        room = settings.max_subdivisions - n_panels
        if split.sum() > room:
            idx = np.argsort(err)[::-1][:room]
            split = np.zeros_like(split)
            split[idx] = True
        keep = ~split
        s_lo, s_hi = lo[split], hi[split]
        s_mid = 0.5 * (s_lo + s_hi)
        c_lo = np.concatenate([s_lo, s_mid])
        c_hi = np.concatenate([s_mid, s_hi])
        c_coarse = np.concatenate([left[split], right[split]])
        c_mid = 0.5 * (c_lo + c_hi)
        c_left = _gauss(fv, c_lo, c_mid)
        c_right = _gauss(fv, c_mid, c_hi)
        lo = np.concatenate([lo[keep], c_lo])
        hi = np.concatenate([hi[keep], c_hi])
        coarse = np.concatenate([coarse[keep], c_coarse])
        left = np.concatenate([left[keep], c_left])
        right = np.concatenate([right[keep], c_right])
        n_panels += int(split.sum())


def integrate_semi_infinite(
    f: Callable,
    a: float,
    settings: QuadratureSettings | None = None,
    scale: float = 1.0,
) -> float:
    """Integral of ``f`` over ``[a, inf)`` via ``x = a + scale * t / (1 - t)``.

    ``scale`` should be comparable to the width of the integrand's mass.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    fv = _as_vectorized(f)

    def g(t: np.ndarray) -> np.ndarray:
        one_minus = 1.0 - t
        x = a + scale * t / one_minus
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            y = fv(x) * (scale / (one_minus * one_minus))
        return np.where(np.isfinite(x), y, 0.0)

    return integrate_finite(g, 0.0, 1.0, settings)


# ---------------------------------------------------------------------------
# Meijer G-function via Mellin-Barnes integrals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeijerGSpec:
    """G^{m,n}_{p,q}(z | a; b) with real parameters and positive argument."""

    m: int
    n: int
    a: tuple[float, ...]
    b: tuple[float, ...]
    z: float

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        p, q = len(self.a), len(self.b)
        if not (0 <= self.m <= q and 0 <= self.n <= p):
            raise ValueError(f"need 0<=m<=q and 0<=n<=p, got m={self.m}, n={self.n}, p={p}, q={q}")
        if p > q:
            raise ValueError("only p <= q is supported")
        if not self.z > 0:
            raise ValueError(f"argument must be positive, got {self.z!r}")

    @property
    def p(self) -> int:
        return len(self.a)

    @property
    def q(self) -> int:
        return len(self.b)

    def with_z(self, z: float) -> "MeijerGSpec":
        return MeijerGSpec(self.m, self.n, self.a, self.b, z)


class _Kernel:
    """Gamma-ratio part of the Mellin-Barnes integrand, independent of z."""

    def __init__(self, m: int, n: int, a: Sequence[float], b: Sequence[float]):
        self.m, self.n = m, n
        self.a = tuple(float(v) for v in a)
        self.b = tuple(float(v) for v in b)
        p, q = len(self.a), len(self.b)
        if m < 1:
            raise ValueError("m >= 1 required for a vertical contour")
        self.decay = 2 * (m + n) - p - q
        if self.decay <= 0:
            raise ValueError(
                f"G^{{{m},{n}}}_{{{p},{q}}} has no absolutely convergent vertical contour"
            )
        # Poles of Gamma(1 - a_j + s) lie at a_j - 1 - k; of Gamma(b_j - s) at b_j + k.
        self.lo = max((aj - 1.0 for aj in self.a[:n]), default=-math.inf)
        self.hi = min(self.b[:m])
        if not self.lo < self.hi:
            raise ValueError("pole families overlap; no separating vertical contour")

    def log(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=complex)
        out = np.zeros_like(s)
        with np.errstate(all="ignore"):
            for bj in self.b[: self.m]:
                out += sc.loggamma(bj - s)
            for aj in self.a[: self.n]:
                out += sc.loggamma(1.0 - aj + s)
            for bj in self.b[self.m:]:
                out -= sc.loggamma(1.0 - bj + s)
            for aj in self.a[self.n:]:
                out -= sc.loggamma(aj - s)
        bad = ~np.isfinite(out)
        if np.any(bad):
            # only reachable through a reciprocal-gamma zero
            out[bad] = -np.inf
        return out


def _saddle_sigma(kernel: _Kernel, log_z: float, lo: float, hi: float) -> float:
    """Real abscissa in (lo, hi) minimising the integrand modulus at t = 0."""

    def phi(sig: float) -> float:
        return float(kernel.log(np.array([sig + 0j]))[0].real) + sig * log_z

    if math.isfinite(lo) and math.isfinite(hi):
        margin = min(0.1, 0.25 * (hi - lo))
        res = minimize_scalar(phi, bounds=(lo + margin, hi - margin), method="bounded",
                              options={"xatol": 1e-3})
        return float(res.x)
    margin = 0.1
    span = 10.0
    while True:
        if math.isfinite(hi):
            left, right = hi - span, hi - margin
        else:
            left, right = lo + margin, lo + span
        res = minimize_scalar(phi, bounds=(left, right), method="bounded",
                              options={"xatol": 1e-3})
        x = float(res.x)
        near_open_end = (x - left < 1e-2 * span) if math.isfinite(hi) else (right - x < 1e-2 * span)
        if not near_open_end or span > 1e5:
            return x
        span *= 4.0


def _trapezoid_contour(
    kernel: _Kernel,
    sigma: float,
    lo: float,
    hi: float,
    log_z: np.ndarray,
    settings: QuadratureSettings,
) -> np.ndarray:
    """(1/2 pi i) * integral over Re s = sigma, for each log z, by trapezoid rule.

    The integrand is analytic in the strip lo < Re s < hi, so the trapezoid
    rule converges geometrically; the step is halved until successive
    estimates agree.
    """
    c = kernel.decay
    dist = min(sigma - lo, hi - sigma)
    h = min(0.5, dist)
    log_z = np.asarray(log_z, dtype=float)

    def values(t: np.ndarray) -> np.ndarray:
        s = sigma + 1j * t
        return np.exp(kernel.log(s)[:, None] + s[:, None] * log_z[None, :]).real

    def modulus(t: float) -> np.ndarray:
        s = np.array([sigma + 1j * t])
        return np.exp(kernel.log(s)[0].real + sigma * log_z)

    T = 4.0
    while True:
        t = np.arange(0.0, T + 0.5 * h, h)
        f = values(t)
        est = (h / math.pi) * (0.5 * f[0] + f[1:].sum(axis=0))
        f_end = modulus(t[-1])
        tail = f_end * 2.0 / (c * math.pi * math.pi)
        decaying = np.all(f_end <= modulus(0.5 * t[-1]))
        if decaying and np.all(tail <= 1e-3 * settings.target(est)):
            break
        T *= 1.5
        if T > 1e4:
            raise MeijerGError("contour tail does not decay within budget", est, tail)

    max_nodes = 64 * settings.max_subdivisions
    n_nodes = t.size
    while True:
        mids = t[:-1] + 0.5 * h
        new = (0.5 * est) + (0.5 * h / math.pi) * values(mids).sum(axis=0)
        n_nodes += mids.size
        diff = np.abs(new - est)
        t = np.sort(np.concatenate([t, mids]))
        h *= 0.5
        est = new
        if np.all(diff <= settings.target(est)):
            return est
        if n_nodes > max_nodes:
            raise MeijerGError(
                f"contour refinement exceeded {max_nodes} nodes "
                f"(max discrepancy {float(diff.max()):.3g})",
                est,
                diff,
            )


def meijer_g_batch(
    m: int,
    n: int,
    a: Sequence[float],
    b: Sequence[float],
    z,
    settings: QuadratureSettings | None = None,
    sigma: float | None = None,
) -> np.ndarray:
    """Evaluate G^{m,n}_{p,q}(z | a; b) for an array of positive ``z``.

    All arguments share one vertical contour; by default its abscissa is the
    real saddle point for the geometric-mean argument.
    """
    settings = settings or DEFAULT_SETTINGS
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(~(z > 0)):
        raise ValueError("Meijer-G arguments must be positive")
    kernel = _Kernel(m, n, a, b)
    log_z = np.log(z)
    if sigma is None:
        sigma = _saddle_sigma(kernel, float(np.median(log_z)), kernel.lo, kernel.hi)
    elif not kernel.lo < sigma < kernel.hi:
        raise ValueError(f"contour abscissa {sigma} does not separate the pole families "
                         f"({kernel.lo}, {kernel.hi})")
    return _trapezoid_contour(kernel, sigma, kernel.lo, kernel.hi, log_z, settings)


def meijer_g(
    spec: MeijerGSpec,
    settings: QuadratureSettings | None = None,
    sigma: float | None = None,
) -> float:
    """Meijer's G-function by numerical Mellin-Barnes integration."""
    return float(meijer_g_batch(spec.m, spec.n, spec.a, spec.b, [spec.z], settings, sigma)[0])


def _leading_pole(m: int, b: Sequence[float]) -> tuple[int, float]:
    head = list(b[:m])
    h = int(np.argmin(head))
    bh = head[h]
    others = [bj for j, bj in enumerate(head) if j != h]
    if any(abs(bj - bh) < 1e-12 for bj in others):
        raise ValueError("leading pole is not simple")
    nxt = min([bh + 1.0] + others)
    return h, nxt


def leading_residue(spec: MeijerGSpec) -> float:
    """Contribution of the left-most pole of the Gamma(b_j - s) family.

    The pole must be simple. Together with :func:`meijer_g_remainder` this
    splits G into its leading small-z term and the rest.
    """
    m, n, a, b = spec.m, spec.n, spec.a, spec.b
    h, _ = _leading_pole(m, b)
    bh = b[h]
    val = 1.0
    for j in range(m):
        if j != h:
            val *= sc.gamma(b[j] - bh)
    for j in range(n):
        val *= sc.gamma(1.0 - a[j] + bh)
    for j in range(m, len(b)):
        val *= sc.rgamma(1.0 - b[j] + bh)
    for j in range(n, len(a)):
        val *= sc.rgamma(a[j] - bh)
    return float(val * spec.z ** bh)


def meijer_g_remainder(
    m: int,
    n: int,
    a: Sequence[float],
    b: Sequence[float],
    z,
    settings: QuadratureSettings | None = None,
) -> np.ndarray:
    """G(z) minus its leading residue, for an array of ``z``.

    Evaluated directly on a contour placed between the first and second poles
    of the Gamma(b_j - s) family, so no cancellation against the leading term
    occurs when z is small.
    """
    settings = settings or DEFAULT_SETTINGS
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(~(z > 0)):
        raise ValueError("Meijer-G arguments must be positive")
    kernel = _Kernel(m, n, a, b)
    h, nxt = _leading_pole(m, kernel.b)
    lo = kernel.b[h]
    log_z = np.log(z)
    sigma = _saddle_sigma(kernel, float(np.median(log_z)), lo, nxt)
    return _trapezoid_contour(kernel, sigma, lo, nxt, log_z, settings)
