"""Slope-function specifications for admissible shift directions.

A shift direction is described by its square-integrable slope; the lifted
path shift is produced on whatever grid a draw lives on, so one spec serves
every random horizon.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = ["HdotSpec", "parse_hdot"]


@dataclass(frozen=True)
class HdotSpec:
    """Piecewise description of a slope function on [0, cutoff].

    kind 'const' is the constant ``value`` on [0, cutoff]; 'ramp' is
    ``value * s`` on [0, cutoff]; 'table' is piecewise constant with the
    given left edges and values (zero beyond the last edge).  The slope
    vanishes outside its support, so likelihood factors are unchanged by
    enlarging the horizon.
    """

    kind: str
    value: float = 0.0
    cutoff: float = 1.0
    edges: tuple = field(default=())
    values: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("const", "ramp", "table"):
            raise DomainError(f"unknown slope kind {self.kind!r}")
        if self.kind == "table":
            e = np.asarray(self.edges, dtype=float)
            if e.size < 2 or np.any(np.diff(e) <= 0) or e[0] != 0.0:
                raise DomainError("table edges must increase from 0")
            if len(self.values) != e.size - 1:
                raise DomainError("table needs one value per interval")
        elif not self.cutoff > 0.0:
            raise DomainError("slope support must have positive length")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "const":
            out = np.where((s >= 0.0) & (s < self.cutoff), self.value, 0.0)
        elif self.kind == "ramp":
            out = np.where((s >= 0.0) & (s < self.cutoff), self.value * s, 0.0)
        else:
            e = np.asarray(self.edges)
            v = np.asarray(self.values + (0.0,))
            idx = np.clip(np.searchsorted(e, s, side="right") - 1, -1, v.size - 1)
            out = np.where((s >= 0.0) & (s < e[-1]), v[idx], 0.0)
        return out if out.ndim else float(out)

    @property
    def is_zero(self) -> bool:
        if self.kind == "table":
            return all(v == 0.0 for v in self.values)
        return self.value == 0.0

    def norm_sq(self) -> float:
        """Squared L2 norm of the slope over its full support (closed form)."""
        if self.kind == "const":
            return self.value ** 2 * self.cutoff
        if self.kind == "ramp":
            return self.value ** 2 * self.cutoff ** 3 / 3.0
        e = np.asarray(self.edges)
        v = np.asarray(self.values)
        return float(np.sum(v * v * np.diff(e)))

    def label(self) -> str:
        if self.kind == "table":
            return f"table[{len(self.values)}]"
        return f"{self.kind}:{self.value:g}"


def parse_hdot(text: str, cutoff: float = 1.0) -> HdotSpec:
    """Parse a CLI slope spec: const:c, ramp:a, or table:<csv-path>.

    CSV tables have a header row and columns ``t,hdot``: each value applies
    from its edge to the next; end the table with a closing edge (value
    ignored, conventionally 0).
    """
    kind, _, arg = text.partition(":")
    if kind in ("const", "ramp"):
        try:
            return HdotSpec(kind, float(arg), cutoff)
        except ValueError as exc:
            raise DomainError(f"bad slope value in {text!r}") from exc
    if kind == "table":
        rows = np.loadtxt(arg, delimiter=",", skiprows=1, ndmin=2)
        edges = tuple(rows[:, 0])
        return HdotSpec("table", 0.0, float(edges[-1]),
                        edges=edges, values=tuple(rows[:-1, 1]))
    raise DomainError(f"unknown slope spec {text!r} "
                      "(expected const:c, ramp:a or table:<csv>)")
