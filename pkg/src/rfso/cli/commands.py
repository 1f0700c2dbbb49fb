"""Implementations behind the CLI subcommands, usable from Python as well."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Any

import numpy as np

from .. import __version__
from ..analytics import (
    DPSK,
    MPSK,
    NCFSK,
    LinkBudget,
    SpecialCase,
    aser,
    aser_dpsk_ncfsk_channel_dependent_special,
    aser_dpsk_ncfsk_fixed_special,
    aser_quadrature,
    cdf,
    cdf_channel_dependent_quadrature,
    cdf_fixed_gain_quadrature,
    mgf,
    mgf_channel_dependent,
    mgf_channel_dependent_quadrature,
    mgf_channel_dependent_special,
    mgf_fixed_gain_quadrature,
    mgf_fixed_gain_special,
    modulation_from_name,
)
from ..asymptotics import (
    AsymptoticValidityError,
    aser_asymptotic_channel_dependent,
    aser_asymptotic_fixed,
    diversity_order_fit,
    snr_gap_channel_dependent,
    snr_gap_fixed,
    snr_gap_mpsk_fixed,
)
from ..channel import malaga_pdf, sample_malaga
from ..numerics import NumericsError, QuadratureSettings, integrate_semi_infinite
from ..relay import FixedGain
from ..simulate import block_rng, estimate_aser_many, sample_e2e_snr
from .config import METHODS, AserCurve, ConfigError, RunConfig

__all__ = [
    "Check",
    "compute_curve",
    "diversity_table",
    "gap_table",
    "run_validation",
    "sample_values",
]

PHASE_NOTE = ("phase_diff is the LoS-minus-coupled-scatter phase; 0 means the coupled "
              "scatter adds in phase with the LoS term")


def _metadata(cfg: RunConfig, timestamp: bool) -> dict[str, Any]:
    meta = {
        "tool": "rfso",
        "version": __version__,
        "config": cfg.to_dict(),
        "seed": cfg.mc.seed,
        "phase_diff_note": PHASE_NOTE,
    }
    if timestamp:
        meta["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return meta


def compute_curve(cfg: RunConfig, timestamp: bool = True,
                  workers: int | None = None) -> tuple[AserCurve, int]:
    """Evaluate every requested column over the grid.

    Returns the curve and the number of points that failed numerically
    (stored as NaN).
    """
    cfg.validate()
    cols = cfg.columns()
    mods = cfg.mods()
    grid = cfg.grid.points()
    rows = np.full((grid.size, len(cols)), math.nan)
    rows[:, 0] = grid
    failures = 0
    index = {c: j for j, c in enumerate(cols)}
    mc_cfg = cfg.mc.to_mc() if "mc" in cfg.methods else None
    for i, snr_db in enumerate(grid):
        lb = cfg.link_budget(float(snr_db))
        for mod in mods:
            for method in METHODS:
                key = f"{mod.name}_{method}"
                if method == "mc" or key not in index:
                    continue
                try:
                    rows[i, index[key]] = _point(cfg, lb, mod, method)
                except (NumericsError, AsymptoticValidityError, ArithmeticError) as exc:
                    failures += 1
                    warnings.warn(f"{key} at {snr_db:g} dB failed: {exc}", RuntimeWarning,
                                  stacklevel=2)
        if mc_cfg is not None:
            ests = estimate_aser_many(lb, mods, mc_cfg, workers)
            for mod, est in zip(mods, ests):
                rows[i, index[f"{mod.name}_mc"]] = est.mean
                rows[i, index[f"{mod.name}_mc_lo"]] = est.ci_low
                rows[i, index[f"{mod.name}_mc_hi"]] = est.ci_high
    return AserCurve(cols, rows, _metadata(cfg, timestamp)), failures


def _point(cfg: RunConfig, lb: LinkBudget, mod, method: str) -> float:
    if method in ("exact", "approx"):
        return aser(lb, mod, method)
    if method == "asymptotic":
        if isinstance(lb.strategy, FixedGain):
            return aser_asymptotic_fixed(mod, lb.gamma_bar_1, cfg.xi_variant)
        return aser_asymptotic_channel_dependent(mod, lb.malaga, lb.gamma_bar_2, cfg.xi_variant)
    raise ValueError(method)


# ---------------------------------------------------------------------------
# gap
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GapRow:
    strategy: str
    reference: str
    other: str
    variant: str
    gap_db: float


def gap_table(strategy: str | None = None, reference: str = "bpsk",
              others: tuple[str, ...] | None = None, cfg: RunConfig | None = None) -> list[GapRow]:
    """Asymptotic SNR gaps (dB); positive means ``other`` needs more SNR."""
    ref = modulation_from_name(reference)
    if not isinstance(ref, MPSK):
        raise ConfigError("the reference modulation must be MPSK")
    strategies = [strategy] if strategy else ["fixed", "channel_dependent"]
    rows: list[GapRow] = []
    for strat in strategies:
        if strat == "channel_dependent" and cfg is not None:
            p = cfg.channel.params()
            if p.rho == 1.0:
                raise AsymptoticValidityError(
                    "channel-dependent gaps need the Gamma2^(-1/2) expansion, which does not "
                    "hold in the Gamma-Gamma limit (rho = 1)")
        names = others or (("dpsk", "ncfsk", "qpsk") if strat == "fixed" else ("dpsk", "ncfsk"))
        for name in names:
            other = modulation_from_name(name)
            if strat == "fixed":
                for variant in ("approx", "exact"):
                    if isinstance(other, MPSK):
                        g = snr_gap_mpsk_fixed(ref, other, variant)
                    else:
                        g = snr_gap_fixed(ref, other.m, variant)
                    rows.append(GapRow(strat, ref.name, other.name, variant, g))
            elif strat == "channel_dependent":
                if isinstance(other, MPSK):
                    raise ConfigError("channel-dependent gaps are defined against DPSK/NCFSK")
                rows.append(GapRow(strat, ref.name, other.name, "-",
                                   snr_gap_channel_dependent(ref, other.m)))
            else:
                raise ConfigError(f"unknown strategy {strat!r}")
    return rows


# ---------------------------------------------------------------------------
# diversity
# ---------------------------------------------------------------------------

def diversity_table(cfg: RunConfig, window: tuple[float, float]) -> list[tuple[str, float, str]]:
    """Fit the log-log slope of the exact ASER for each modulation."""
    grid = cfg.grid.points()
    lo, hi = window
    if lo < grid[0] - 1e-9 or hi > grid[-1] + 1e-9 or hi <= lo:
        raise ConfigError(f"window {window} lies outside the grid [{grid[0]}, {grid[-1]}]")
    sub = replace(cfg, methods=("exact",),
                  grid=replace(cfg.grid, start=float(grid[grid >= lo - 1e-9][0]), stop=hi))
    curve, failures = compute_curve(sub, timestamp=False)
    if failures:
        raise NumericsError(f"{failures} grid points failed")
    note = ""
    if cfg.strategy == "channel_dependent" and cfg.channel.params().rho == 1.0:
        note = "Gamma-Gamma limit: no Gamma2^(-1/2) term, slope reported numerically only"
    out = []
    for mod in cfg.mods():
        slope = diversity_order_fit(curve.snr_db, curve.column(f"{mod.name}_exact"), window)
        out.append((mod.name, slope, note))
    return out


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

@dataclass
class Check:
    name: str
    value: float
    reference: float
    tolerance: float
    kind: str = "rel"
    passed: bool = field(init=False)

    def __post_init__(self):
        if self.kind == "rel":
            err = abs(self.value - self.reference) / max(abs(self.reference), 1e-300)
        elif self.kind == "abs":
            err = abs(self.value - self.reference)
        elif self.kind == "sigma":
            # reference = analytic value, tolerance = 3 * std_error
            err = abs(self.value - self.reference)
        elif self.kind == "upper":
            err = max(0.0, self.value - self.reference)
        else:
            raise ValueError(self.kind)
        self.error = err
        self.passed = bool(err <= self.tolerance)

    def as_dict(self) -> dict[str, Any]:
        return {"name": self.name, "value": self.value, "reference": self.reference,
                "tolerance": self.tolerance, "error": self.error, "kind": self.kind,
                "passed": self.passed}

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return (f"[{mark}] {self.name}: value={self.value:.10g} reference={self.reference:.10g} "
                f"error={self.error:.3g} tol={self.tolerance:.3g}")


def run_validation(cfg: RunConfig, snr_points_db=(10.0, 20.0, 30.0), mc_samples: int = 200_000,
                   tolerance_scale: float = 1.0) -> list[Check]:
    """Closed form vs quadrature vs Monte Carlo, plus normalisation checks.

    ``tolerance_scale`` multiplies every tolerance (a value of 0 forces
    failures, which exercises the error path).
    """
    cfg.validate()
    ts = tolerance_scale
    checks: list[Check] = []
    p = cfg.channel.params()

    checks.append(Check("mixture weights sum to one", sum(p.weights), 1.0, 1e-10 * ts, "abs"))
    settings = QuadratureSettings(abs_tol=1e-14, rel_tol=1e-11)
    norm = integrate_semi_infinite(lambda i: malaga_pdf(p, np.maximum(i, 1e-300)), 0.0,
                                   settings, scale=p.mean)
    checks.append(Check("irradiance density integrates to one", norm, 1.0, 1e-8 * ts, "abs"))

    mc_cfg = replace(cfg.mc, samples=mc_samples, chunk_size=min(cfg.mc.chunk_size, mc_samples)).to_mc()
    mods = cfg.mods()
    for snr_db in snr_points_db:
        lb = cfg.link_budget(snr_db)
        tag = f"@{snr_db:g}dB"
        s = 1.0
        if isinstance(lb.strategy, FixedGain):
            checks.append(Check(f"MGF closed form vs quadrature s=1 {tag}", mgf(lb, s),
                                mgf_fixed_gain_quadrature(lb, s), 1e-5 * ts))
            g = lb.gamma_bar_1 / 2
            checks.append(Check(f"CDF closed form vs quadrature {tag}", cdf(lb, g),
                                cdf_fixed_gain_quadrature(lb, g), 1e-5 * ts))
        else:
            checks.append(Check(f"MGF closed form vs quadrature s=1 {tag}", mgf(lb, s),
                                mgf_channel_dependent_quadrature(lb, s), 1e-5 * ts))
            checks.append(Check(f"MGF reduced vs intermediate form {tag}", mgf(lb, s),
                                mgf_channel_dependent(lb, s, form="intermediate"), 1e-8 * ts, "abs"))
            g = lb.gamma_bar_1 / 2
            checks.append(Check(f"CDF closed form vs quadrature {tag}", cdf(lb, g),
                                cdf_channel_dependent_quadrature(lb, g), 1e-5 * ts))
        exact = {}
        for mod in mods:
            exact[mod.name] = aser(lb, mod)
            checks.append(Check(f"{mod.name} ASER closed form vs quadrature {tag}", exact[mod.name],
                                aser_quadrature(lb, mod), 1e-5 * ts))
        ests = estimate_aser_many(lb, mods, mc_cfg)
        for mod, est in zip(mods, ests):
            if isinstance(lb.strategy, FixedGain):
                checks.append(Check(f"{mod.name} ASER within 3 sigma of Monte Carlo {tag}", est.mean,
                                    exact[mod.name], 3.0 * est.std_error * ts, "sigma"))
            else:
                checks.append(Check(f"{mod.name} lower bound below Monte Carlo + 3 sigma {tag}",
                                    exact[mod.name], est.mean + 3.0 * est.std_error * ts, 0.0,
                                    "upper"))
        checks.extend(_special_checks(lb, p, tag, ts))
    return checks


def _special_checks(lb: LinkBudget, p, tag: str, ts: float) -> list[Check]:
    kinds = []
    if p.is_k_distribution:
        kinds.append(SpecialCase.K)
    if p.is_gamma_gamma:
        kinds.append(SpecialCase.GAMMA_GAMMA)
    out = []
    for kind in kinds:
        if isinstance(lb.strategy, FixedGain):
            out.append(Check(f"{kind.name} MGF special form vs general {tag}",
                             mgf_fixed_gain_special(kind, lb, 1.0), mgf(lb, 1.0), 1e-6 * ts))
            for mod in (DPSK(), NCFSK()):
                out.append(Check(f"{kind.name} {mod.name} special form vs general {tag}",
                                 aser_dpsk_ncfsk_fixed_special(kind, lb, mod), aser(lb, mod),
                                 1e-6 * ts))
        else:
            out.append(Check(f"{kind.name} MGF special form vs general {tag}",
                             mgf_channel_dependent_special(kind, lb, 1.0), mgf(lb, 1.0), 1e-6 * ts))
            for mod in (DPSK(), NCFSK()):
                out.append(Check(f"{kind.name} {mod.name} special form vs general {tag}",
                                 aser_dpsk_ncfsk_channel_dependent_special(kind, lb, mod),
                                 aser(lb, mod), 1e-6 * ts))
    return out


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------

def sample_values(cfg: RunConfig, n: int, what: str = "irradiance",
                  snr_db: float = 20.0) -> np.ndarray:
    """Deterministic draws for a seed: irradiance, or end-to-end SNR at ``snr_db``."""
    if n <= 0:
        raise ConfigError("n must be positive")
    rng = block_rng(cfg.mc.seed, 0)
    if what == "irradiance":
        return sample_malaga(cfg.channel.params(), rng, n)
    if what == "snr":
        return sample_e2e_snr(cfg.link_budget(snr_db), rng, n)
    raise ConfigError(f"unknown sample kind {what!r}")
