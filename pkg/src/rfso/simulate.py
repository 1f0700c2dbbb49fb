"""Semi-analytic Monte Carlo for the end-to-end ASER.

Both hops are sampled, combined with the relay's true SNR law, and the
exact conditional SEP is averaged. Random streams are tied to fixed-size
blocks of samples: block ``b`` always draws from ``SeedSequence(seed,
spawn_key=(b,))`` and block statistics are merged in block order. The
estimate therefore depends only on ``(seed, samples)``, never on the chunk
size or the number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .analytics import MPSK, LinkBudget, Modulation, mpsk_sep
from .channel import sample_malaga, sample_rayleigh_snr
from .relay import ChannelDependent, e2e_snr

__all__ = [
    "BLOCK_SIZE",
    "block_rng",
    "McConfig",
    "McEstimate",
    "THREADS_ENV",
    "conditional_sep",
    "estimate_aser",
    "estimate_aser_many",
    "estimate_bound_gap",
    "estimate_cdf_point",
    "estimate_ser_symbol_level",
    "sample_e2e_snr",
    "worker_count",
]

BLOCK_SIZE = 1 << 14
THREADS_ENV = "RFSO_THREADS"


@dataclass(frozen=True)
class McConfig:
    samples: int = 1_000_000
    seed: int = 0
    chunk_size: int = 1 << 16
    confidence_level: float = 0.997

    def __post_init__(self):
        if int(self.samples) != self.samples or self.samples < 1:
            raise ValueError("samples must be a positive integer")
        if int(self.chunk_size) != self.chunk_size or self.chunk_size < 1:
            raise ValueError("chunk_size must be a positive integer")
        if self.chunk_size > self.samples:
            raise ValueError("chunk_size may not exceed samples")
        if not 0 <= int(self.seed) < 2 ** 64 or int(self.seed) != self.seed:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 0.0 < self.confidence_level < 1.0:
            raise ValueError("confidence_level must lie in (0, 1)")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    ci_low: float
    ci_high: float
    samples_used: int

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high

    def within(self, value: float, n_sigma: float = 3.0) -> bool:
        return abs(self.mean - value) <= n_sigma * self.std_error


def conditional_sep(mod: Modulation, gamma):
    """Exact symbol error probability at instantaneous SNR ``gamma``."""
    g = np.asarray(gamma, dtype=float)
    if np.any(~(g >= 0)):
        raise ValueError("gamma must be nonnegative")
    if isinstance(mod, MPSK):
        out = mpsk_sep(mod, g)
    else:
        out = 0.5 * np.exp(-g / mod.m)
    return out if np.ndim(out) else float(out)


def worker_count(workers: int | None = None) -> int:
    """Explicit value, else the environment variable, else the CPU count."""
    if workers is not None:
        if workers < 1:
            raise ValueError("workers must be >= 1")
        return workers
    env = os.environ.get(THREADS_ENV, "").strip()
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be >= 1")
        return n
    return os.cpu_count() or 1


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Generator for sample block ``block`` of stream ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def sample_e2e_snr(lb: LinkBudget, rng: np.random.Generator, count: int,
                   combining: str = "true") -> np.ndarray:
    """End-to-end SNR draws.

    ``combining="true"`` uses the exact relay law; ``"min"`` uses the
    min(gamma1, gamma2) bound (channel-dependent relays only).
    """
    g1 = sample_rayleigh_snr(lb.rf, rng, count)
    i = sample_malaga(lb.malaga, rng, count)
    g2 = lb.gamma_bar_2 * i * i
    if combining == "true":
        return e2e_snr(lb.strategy, g1, g2, exact=True)
    if combining == "min":
        if not isinstance(lb.strategy, ChannelDependent):
            raise ValueError("min combining applies to channel-dependent relays only")
        return e2e_snr(lb.strategy, g1, g2, exact=False)
    raise ValueError(f"unknown combining {combining!r}")


def _block_stats(values: np.ndarray) -> tuple[int, float, float]:
    n = values.size
    mean = float(values.mean())
    m2 = float(np.sum((values - mean) ** 2))
    return n, mean, m2


def _merge(a: tuple[int, float, float], b: tuple[int, float, float]) -> tuple[int, float, float]:
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    delta = mb - ma
    return n, ma + delta * nb / n, sa + sb + delta * delta * na * nb / n


def _run_blocks(cfg: McConfig, statistic, n_out: int, workers: int | None):
    """Apply ``statistic(rng, count) -> (n_out, count) array`` blockwise and merge."""
    n_blocks = -(-cfg.samples // BLOCK_SIZE)
    per_task = max(1, -(-cfg.chunk_size // BLOCK_SIZE))
    tasks = [range(s, min(s + per_task, n_blocks)) for s in range(0, n_blocks, per_task)]

    def run(blocks: range):
        out = []
        for b in blocks:
            count = min(BLOCK_SIZE, cfg.samples - b * BLOCK_SIZE)
            vals = statistic(block_rng(cfg.seed, b), count)
            out.append([_block_stats(v) for v in vals])
        return out

    n_workers = min(worker_count(workers), len(tasks))
    if n_workers == 1:
        results = [run(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(run, tasks))

    merged = [None] * n_out
    for task in results:
        for block in task:
            for j, st in enumerate(block):
                merged[j] = st if merged[j] is None else _merge(merged[j], st)
    z = float(stats.norm.ppf(0.5 + 0.5 * cfg.confidence_level))
    out = []
    for n, mean, m2 in merged:
        se = math.sqrt(m2 / (n - 1) / n) if n > 1 else 0.0
        out.append(McEstimate(mean, se, mean - z * se, mean + z * se, n))
    return out


def estimate_aser_many(lb: LinkBudget, mods: Sequence[Modulation], cfg: McConfig,
                       workers: int | None = None, combining: str = "true") -> list[McEstimate]:
    """ASER estimates for several modulations from one shared set of SNR draws."""
    mods = list(mods)

    def statistic(rng, count):
        g = sample_e2e_snr(lb, rng, count, combining)
        return [np.asarray(conditional_sep(mod, g)) for mod in mods]

    return _run_blocks(cfg, statistic, len(mods), workers)


def estimate_aser(lb: LinkBudget, mod: Modulation, cfg: McConfig,
                  workers: int | None = None, combining: str = "true") -> McEstimate:
    return estimate_aser_many(lb, [mod], cfg, workers, combining)[0]


def estimate_cdf_point(lb: LinkBudget, gamma: float, cfg: McConfig,
                       workers: int | None = None, combining: str = "true") -> McEstimate:
    """Empirical Pr[gamma_end <= gamma]."""
    if not gamma >= 0:
        raise ValueError("gamma must be nonnegative")

    def statistic(rng, count):
        return [(sample_e2e_snr(lb, rng, count, combining) <= gamma).astype(float)]

    return _run_blocks(cfg, statistic, 1, workers)[0]


def estimate_bound_gap(lb: LinkBudget, mods: Sequence[Modulation], cfg: McConfig,
                       workers: int | None = None) -> list[McEstimate]:
    """E[P(true SNR) - P(min bound)] for a channel-dependent relay.

    Both SEPs are evaluated on the same draws, so the difference has far
    less variance than two independent ASER estimates would.
    """
    if not isinstance(lb.strategy, ChannelDependent):
        raise ValueError("the min bound applies to channel-dependent relays only")
    mods = list(mods)

    def statistic(rng, count):
        g1 = sample_rayleigh_snr(lb.rf, rng, count)
        i = sample_malaga(lb.malaga, rng, count)
        g2 = lb.gamma_bar_2 * i * i
        true = e2e_snr(lb.strategy, g1, g2, exact=True)
        bound = e2e_snr(lb.strategy, g1, g2, exact=False)
        return [np.asarray(conditional_sep(m, true)) - np.asarray(conditional_sep(m, bound))
                for m in mods]

    return _run_blocks(cfg, statistic, len(mods), workers)


def estimate_ser_symbol_level(lb: LinkBudget, mod: MPSK, cfg: McConfig,
                              workers: int | None = None) -> McEstimate:
    """Symbol-by-symbol detection over AWGN; BPSK and QPSK only.

    Much noisier than :func:`estimate_aser`; kept as an independent check of
    the conditional SEP formulas.
    """
    if not isinstance(mod, MPSK) or mod.order not in (2, 4):
        raise ValueError("symbol-level simulation supports BPSK and QPSK")
    M = mod.order

    def statistic(rng, count):
        g = sample_e2e_snr(lb, rng, count)
        sym = rng.integers(0, M, size=count)
        phase = 2.0 * np.pi * sym / M
        tx = np.sqrt(g) * np.exp(1j * phase)
        noise = (rng.standard_normal(count) + 1j * rng.standard_normal(count)) / math.sqrt(2.0)
        rx = tx + noise
        est = np.mod(np.rint(np.angle(rx) * M / (2.0 * np.pi)), M).astype(int)
        return [(est != sym).astype(float)]

    return _run_blocks(cfg, statistic, 1, workers)[0]

