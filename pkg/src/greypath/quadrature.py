"""Gauss-Legendre rules and quadrature for endpoint-singular integrands."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["gauss_legendre_unit", "quad_power_graded"]

_RULE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre_unit(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule mapped to [0, 1]."""
    try:
        return _RULE_CACHE[n]
    except KeyError:
        x, w = np.polynomial.legendre.leggauss(n)
        rule = (0.5 * (x + 1.0), 0.5 * w)
        _RULE_CACHE[n] = rule
        return rule


def _graded_edges(levels: int) -> np.ndarray:
    edges = [2.0 ** (-k) for k in range(levels, 0, -1)]
    return np.unique(np.array([0.0] + edges + [1.0]))


def _half_panel(f, anchor, width, p, sign, nodes):
    # geometric grading depth: enough to resolve residual fractional powers
    # after the substitution, capped so anchor + width*u**p stays normal
    levels = int(min(40.0, max(1.0, math.ceil(42.0 / p)), 800.0 / p))
    edges = _graded_edges(levels)
    gn, gw = gauss_legendre_unit(nodes)
    a, b = edges[:-1], edges[1:]
    u = a[:, None] + (b - a)[:, None] * gn[None, :]
    w = (b - a)[:, None] * gw[None, :]
    r = anchor + sign * width * u ** p
    jac = width * p * u ** (p - 1.0)
    vals = np.asarray(f(r.ravel()), dtype=float).reshape(r.shape)
    return float(np.sum(w * vals * jac))


def quad_power_graded(f, lo: float, hi: float, p_lo: float = 1.0,
                      p_hi: float = 1.0, nodes: int = 24) -> float:
    """Integrate a vectorized ``f`` on [lo, hi] with algebraic endpoint blowup.

    Each half interval is mapped through a power substitution (``r = lo +
    w*u**p_lo`` on the left, ``r = hi - w*u**p_hi`` on the right) that turns
    the dominant endpoint behaviour into a bounded function of ``u``; the
    substituted integrand is then integrated on panels graded geometrically
    toward the endpoint, which absorbs any leftover fractional powers.

    ``p_lo``/``p_hi`` should be ``1/(1 + a)`` for an integrand growing like
    ``(r - lo)**a`` (``a > -1``); ``1.0`` means no singularity.  ``f`` is only
    evaluated strictly inside (lo, hi).
    """
    if hi <= lo:
        return 0.0
    width = 0.5 * (hi - lo)
    left = _half_panel(f, lo, width, p_lo, +1.0, nodes)
    right = _half_panel(f, hi, width, p_hi, -1.0, nodes)
    return left + right
