"""High-SNR behaviour: asymptotic ASERs, their constants, diversity and SNR gaps.

Fixed gain. At high SNR the MGF behaves as 1/(Gamma1 s), so MPSK gives
Xi / Gamma1 and DPSK/NCFSK give m / (2 Gamma1), whatever the FSO channel.
Two values of Xi are available: the exact angular integral and the one that
follows from the three-point approximation. When both hops grow together
and the irradiance density is positive at zero, deep FSO fades add a second
term of the same order; :func:`aser_asymptotic_fixed_linked` includes it.

Channel dependent. The k = 1 mixture component dominates and the ASER decays
as Gamma2^(-1/2) with coefficient B_1 times a modulation constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import special as sc

from .analytics import DPSK, MPSK, NCFSK, Modulation
from .channel import MalagaParams

__all__ = [
    "AsymptoticReport",
    "AsymptoticValidityError",
    "aser_asymptotic",
    "aser_asymptotic_channel_dependent",
    "aser_asymptotic_fixed",
    "aser_asymptotic_fixed_linked",
    "bk_coefficients",
    "d_constant",
    "d_exact",
    "density_at_origin",
    "diversity_order_fit",
    "horizontal_offset_db",
    "snr_gap_channel_dependent",
    "snr_gap_fixed",
    "snr_gap_mpsk_fixed",
    "xi",
    "xi_approx",
    "xi_exact",
]

XiVariant = Literal["exact", "approx"]


class AsymptoticValidityError(ValueError):
    """The channel-dependent expansion is not valid for these parameters."""


@dataclass(frozen=True)
class AsymptoticReport:
    """ASER ~ leading_coefficient * SNR^(-diversity_order)."""

    leading_coefficient: float
    diversity_order: float
    validity_note: str = ""

    def __post_init__(self):
        if not self.diversity_order > 0:
            raise ValueError("diversity order must be positive")

    def __call__(self, snr):
        return self.leading_coefficient * np.asarray(snr, dtype=float) ** (-self.diversity_order)


def _mpsk(mod):
    if not isinstance(mod, MPSK):
        raise TypeError(f"expected MPSK, got {mod!r}")
    return mod


def xi_exact(mod: MPSK) -> float:
    """(2 Theta - sin 2 Theta) / (4 n^2 pi), i.e. (1/pi) int_0^Theta sin^2 / n^2."""
    mod = _mpsk(mod)
    t = mod.theta
    return (2.0 * t - math.sin(2.0 * t)) / (4.0 * mod.n ** 2 * math.pi)


def xi_approx(mod: MPSK) -> float:
    """Three-point weights applied to the high-SNR MGF 1/(Gamma1 s)."""
    mod = _mpsk(mod)
    return sum(w / s for w, s in zip(mod.approx_weights, mod.s_points))


def xi(mod: MPSK, variant: XiVariant = "approx") -> float:
    if variant == "exact":
        return xi_exact(mod)
    if variant == "approx":
        return xi_approx(mod)
    raise ValueError(f"unknown Xi variant {variant!r}")


def aser_asymptotic_fixed(mod: Modulation, gamma_bar_1: float,
                          xi_variant: XiVariant = "exact") -> float:
    """High-SNR fixed-gain ASER; independent of the FSO hop."""
    if not gamma_bar_1 > 0:
        raise ValueError("gamma_bar_1 must be positive")
    if isinstance(mod, MPSK):
        return xi(mod, xi_variant) / gamma_bar_1
    return mod.m / (2.0 * gamma_bar_1)


def density_at_origin(p: MalagaParams) -> float:
    """f_I(0) = w_1 Lambda / (alpha - 1); only the k = 1 component is nonzero there."""
    if not p.alpha > 1:
        raise AsymptoticValidityError("f_I(0) is unbounded for alpha <= 1")
    return p.weights[0] * p.lambda_const / (p.alpha - 1.0)


def aser_asymptotic_fixed_linked(mod: Modulation, p: MalagaParams, c: float,
                                 xi_variant: XiVariant = "exact") -> float:
    """Coefficient of 1/Gamma in the fixed-gain ASER when Gamma1 = Gamma2 = Gamma.

    Fades with I^2 of order C / Gamma^2 contribute (pi/2) f_I(0) sqrt(C s) / s
    to Gamma * MGF(s), on top of the FSO-free 1/s. With f_I(0) = 0 (no k = 1
    component) this reduces to :func:`aser_asymptotic_fixed` at Gamma1 = 1.
    """
    if not c > 0:
        raise ValueError("C must be positive")
    a = density_at_origin(p) * math.sqrt(c)
    if isinstance(mod, MPSK):
        if xi_variant == "exact":
            return xi_exact(mod) + a * (1.0 - math.cos(mod.theta)) / (2.0 * mod.n)
        if xi_variant == "approx":
            tail = sum(w / math.sqrt(s) for w, s in zip(mod.approx_weights, mod.s_points))
            return xi_approx(mod) + 0.5 * math.pi * a * tail
        raise ValueError(f"unknown Xi variant {xi_variant!r}")
    return 0.5 * mod.m * (1.0 + 0.5 * math.pi * a / math.sqrt(mod.m))


def _check_expansion(p: MalagaParams) -> None:
    if not p.alpha > p.beta:
        raise AsymptoticValidityError(
            f"need alpha > beta for Gamma(alpha - k) to stay finite (alpha={p.alpha}, beta={p.beta})")


def bk_coefficients(p: MalagaParams) -> list[float]:
    """B_k = (w_k / 2) Lambda^k Gamma(k/2) Gamma(alpha - k) / (Gamma(alpha) Gamma(k)).

    This is (A/4) a_k Lambda^((k - alpha)/2) Gamma(k/2) Gamma(alpha - k) written
    with the mixture weights, so it stays finite when xi = 0.
    """
    _check_expansion(p)
    lam, a = p.lambda_const, p.alpha
    out = []
    for k, w in enumerate(p.weights, start=1):
        if w == 0.0:
            out.append(0.0)
            continue
        log_b = (math.log(0.5 * w) + k * math.log(lam) + sc.gammaln(k / 2) + sc.gammaln(a - k)
                 - sc.gammaln(a) - sc.gammaln(k))
        out.append(math.exp(log_b))
    return out


def d_constant(mod: MPSK) -> float:
    """(8M + 3 sqrt(3) M + (6M - 12) sqrt(s1) - 12) / (24 M sqrt(s1))."""
    mod = _mpsk(mod)
    M = mod.order
    r = math.sqrt(mod.s_points[0])
    return (8 * M + 3 * math.sqrt(3) * M + (6 * M - 12) * r - 12) / (24 * M * r)


def _b1_for_asymptote(p: MalagaParams) -> float:
    b = bk_coefficients(p)
    if p.rho == 1.0 or b[0] == 0.0:
        raise AsymptoticValidityError(
            "the k = 1 term vanishes (Gamma-Gamma limit); the Gamma2^(-1/2) expansion "
            "does not apply and higher-k series do not converge for beta > 1")
    return b[0]


def d_exact(mod: MPSK) -> float:
    """(1 - cos Theta) / (pi n): the angular integral of sin(theta) / n over pi."""
    mod = _mpsk(mod)
    return (1.0 - math.cos(mod.theta)) / (math.pi * mod.n)


def aser_asymptotic_channel_dependent(mod: Modulation, p: MalagaParams, gamma_bar_2: float,
                                      xi_variant: XiVariant = "exact") -> float:
    """High-SNR channel-dependent ASER, proportional to Gamma2^(-1/2).

    For MPSK ``"approx"`` uses D_M from the three-point rule and ``"exact"``
    the angular integral, so each matches the corresponding ASER method.
    """
    if not gamma_bar_2 > 0:
        raise ValueError("gamma_bar_2 must be positive")
    b1 = _b1_for_asymptote(p)
    if isinstance(mod, MPSK):
        if xi_variant == "exact":
            const = d_exact(mod)
        elif xi_variant == "approx":
            const = d_constant(mod)
        else:
            raise ValueError(f"unknown Xi variant {xi_variant!r}")
        return b1 * const / math.sqrt(gamma_bar_2)
    return 0.5 * b1 * math.sqrt(mod.m) / math.sqrt(gamma_bar_2)


def aser_asymptotic(mod: Modulation, strategy, p: MalagaParams,
                    xi_variant: XiVariant = "exact") -> AsymptoticReport:
    """Leading term of the ASER in the common SNR Gamma1 = Gamma2 = Gamma."""
    from .relay import FixedGain

    if isinstance(strategy, FixedGain):
        return AsymptoticReport(aser_asymptotic_fixed(mod, 1.0, xi_variant), 1.0,
                                "independent of the FSO channel")
    return AsymptoticReport(aser_asymptotic_channel_dependent(mod, p, 1.0, xi_variant), 0.5,
                            "dominated by the k = 1 mixture component")


def diversity_order_fit(snr_db, aser, window: tuple[float, float]) -> float:
    """Negated least-squares slope of log10(ASER) against log10(SNR) in ``window`` (dB)."""
    snr_db = np.asarray(snr_db, dtype=float)
    aser = np.asarray(aser, dtype=float)
    if snr_db.shape != aser.shape:
        raise ValueError("snr_db and aser must have the same shape")
    lo, hi = window
    sel = (snr_db >= lo - 1e-9) & (snr_db <= hi + 1e-9)
    if sel.sum() < 2:
        raise ValueError(f"window {window} holds fewer than two grid points")
    if np.any(~(aser[sel] > 0)):
        raise ValueError("ASER values in the window must be positive")
    slope = np.polyfit(snr_db[sel] / 10.0, np.log10(aser[sel]), 1)[0]
    return float(-slope)


def snr_gap_fixed(mod_a: MPSK, m: int, xi_variant: XiVariant = "approx") -> float:
    """Extra SNR (dB) DPSK (m=1) or NCFSK (m=2) needs over ``mod_a``; fixed gain."""
    if m not in (1, 2):
        raise ValueError("m must be 1 (DPSK) or 2 (NCFSK)")
    return 10.0 * math.log10(m / (2.0 * xi(mod_a, xi_variant)))


def snr_gap_mpsk_fixed(mod_a: MPSK, mod_b: MPSK, xi_variant: XiVariant = "approx") -> float:
    """Extra SNR (dB) ``mod_b`` needs over ``mod_a`` under fixed gain."""
    return 10.0 * math.log10(xi(mod_b, xi_variant) / xi(mod_a, xi_variant))


def snr_gap_channel_dependent(mod: MPSK, m: int) -> float:
    """Extra SNR (dB) DPSK/NCFSK needs over ``mod``; channel dependent.

    The ASER falls as Gamma^(-1/2), so the SNR ratio is the square of the
    coefficient ratio: 10 log10(m / (4 D_M^2)).
    """
    if m not in (1, 2):
        raise ValueError("m must be 1 (DPSK) or 2 (NCFSK)")
    return 10.0 * math.log10(m / (4.0 * d_constant(mod) ** 2))


def horizontal_offset_db(report_a: AsymptoticReport, report_b: AsymptoticReport) -> float:
    """Horizontal distance (dB) from asymptote ``a`` to ``b`` at equal ASER.

    Both must share a diversity order.
    """
    d = report_a.diversity_order
    if not math.isclose(d, report_b.diversity_order):
        raise ValueError("asymptotes with different slopes have no constant offset")
    return 10.0 * math.log10(report_b.leading_coefficient / report_a.leading_coefficient) / d
