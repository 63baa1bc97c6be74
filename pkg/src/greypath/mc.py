"""Monte Carlo plumbing: deterministic streams, merged statistics, reports.

Reproducibility contract: work is split into fixed-size chunks whose random
streams are derived from (master seed, chunk index) alone, and per-chunk
statistics are merged in a fixed pairwise tree.  Results are therefore
byte-identical for any worker count.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "splitmix64",
    "stream_for",
    "default_workers",
    "RunningStats",
    "combine_stats",
    "pairwise_reduce",
    "run_chunks",
    "MonteCarloReport",
    "canonical_json",
    "CHUNK_SIZE",
]

CHUNK_SIZE = 4096

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """The 64-bit splitmix finalizer; stateless stream derivation."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def stream_for(seed: int, index: int) -> np.random.Generator:
    """Independent generator for stream ``index`` under a 64-bit master seed."""
    return np.random.Generator(np.random.PCG64((seed ^ splitmix64(index)) & _MASK64))


def default_workers() -> int:
    env = os.environ.get("GREYPATH_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class RunningStats:
    """Streaming count / mean / second central moment."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def from_values(cls, values: np.ndarray) -> "RunningStats":
        values = np.asarray(values, dtype=float)
        n = values.size
        if n == 0:
            return cls()
        mean = float(values.mean())
        return cls(n, mean, float(np.sum((values - mean) ** 2)))

    @property
    def variance(self) -> float:
        return self.m2 / (self.n - 1) if self.n > 1 else 0.0

    @property
    def se(self) -> float:
        return float(np.sqrt(self.variance / self.n)) if self.n > 0 else 0.0


def combine_stats(a: RunningStats, b: RunningStats) -> RunningStats:
    """Chan et al. pairwise combination of two partial statistics."""
    if a.n == 0:
        return b
    if b.n == 0:
        return a
    n = a.n + b.n
    delta = b.mean - a.mean
    mean = a.mean + delta * (b.n / n)
    m2 = a.m2 + b.m2 + delta * delta * (a.n * b.n / n)
    return RunningStats(n, mean, m2)


def pairwise_reduce(stats: list[RunningStats]) -> RunningStats:
    """Reduce chunk statistics in a fixed binary tree (order-independent)."""
    if not stats:
        return RunningStats()
    level = list(stats)
    while len(level) > 1:
        nxt = [combine_stats(level[i], level[i + 1]) if i + 1 < len(level)
               else level[i]
               for i in range(0, len(level), 2)]
        level = nxt
    return level[0]


def run_chunks(total: int, work, seed: int, workers: int | None = None,
               chunk_size: int = CHUNK_SIZE, stream_base: int = 0):
    """Run ``work(rng, count)`` over fixed chunks, in parallel, deterministically.

    ``work`` returns a dict of per-draw value arrays; the result maps each key
    to the pairwise-merged RunningStats plus the merged ``_scalars`` dict of
    summed per-chunk integer counters (key prefix ``#``).
    """
    if total < 1:
        raise ValueError("total draw count must be positive")
    workers = workers or default_workers()
    starts = list(range(0, total, chunk_size))
    counts = [min(chunk_size, total - s) for s in starts]

    def run_one(c: int):
        rng = stream_for(seed, stream_base + c)
        return work(rng, counts[c])

    if workers == 1 or len(starts) == 1:
        raw = [run_one(c) for c in range(len(starts))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(run_one, range(len(starts))))

    keys = raw[0].keys()
    merged: dict[str, RunningStats | int] = {}
    for key in keys:
        if key.startswith("#"):
            merged[key] = int(sum(int(r[key]) for r in raw))
        else:
            merged[key] = pairwise_reduce(
                [RunningStats.from_values(r[key]) for r in raw])
    return merged


def _fmt(x):
    if isinstance(x, float):
        return format(x, ".17g")
    if isinstance(x, bool):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    if isinstance(x, dict):
        items = (f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in x.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(x, (np.floating,)):
        return format(float(x), ".17g")
    raise TypeError(f"cannot serialize {type(x)!r}")


def canonical_json(obj: dict) -> str:
    """Deterministic JSON with %.17g floats (byte-stable across runs)."""
    return _fmt(obj) + "\n"


@dataclass
class MonteCarloReport:
    """Unit of verification output: estimates, errors, z-score, verdict."""

    command: str
    parameters: dict
    seed: int
    n_samples: int
    estimates: dict
    passed: bool
    density: dict | None = None
    counters: dict = field(default_factory=dict)
    schema: str = "greypath.report/1"

    def to_dict(self) -> dict:
        out = {
            "schema": self.schema,
            "command": self.command,
            "parameters": self.parameters,
            "seed": self.seed,
            "n_samples": self.n_samples,
            "estimates": self.estimates,
        }
        if self.density is not None:
            out["density"] = self.density
        if self.counters:
            out["counters"] = self.counters
        out["passed"] = self.passed
        return out

    def to_json(self) -> str:
        return canonical_json(self.to_dict())
