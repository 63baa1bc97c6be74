"""Cylinder functionals, directional derivatives, gradients, adjoint identity.

A cylinder functional reads the process at finitely many times through a
smooth bounded function.  Its derivative along an admissible shift has a
Riesz representative in the shift space, assembled from kernel sections at
the observation times; the adjoint of the derivative combines the negated
derivative with the driving-noise integral of the direction.  The two-sided
Monte Carlo check of the duality identity is this module's endpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .fbm import CameronMartinElement, TimeGrid, apply_kernel, build_kernel_matrix, wiener_integral
from .ggbm import GgbmDraw, GgbmParams, draw_batch
from .mc import CHUNK_SIZE, MonteCarloReport, run_chunks
from .shifts import HdotSpec
from .specfun import gamma_fn

__all__ = [
    "CylinderFunction",
    "GradientElement",
    "cylinder",
    "CYLINDER_LIBRARY",
    "directional_derivative",
    "gradient",
    "ibp_adjoint",
    "verify_ibp",
    "lp_moment_bound",
]

_FD_STEP = 1e-5
_FD_TOL = 1e-6
_FD_PROBES = 8


@dataclass(frozen=True)
class CylinderFunction:
    """Functional f(X(t_1), ..., X(t_n)) with bounded smooth f.

    ``fn`` maps an (n, batch) array of coordinates to a (batch,) array;
    ``grad`` returns the (n, batch) array of partial derivatives.  Declared
    sup norms of the partials feed the closed-form moment bounds.  Functions
    with unbounded derivatives are admitted only behind ``bounded=False``
    (oracle tests), since the duality theorems assume boundedness.
    """

    name: str
    times: tuple
    fn: object
    grad: object
    sup_norms: tuple
    bounded: bool = True

    def __post_init__(self):
        ts = np.asarray(self.times, dtype=float)
        if ts.size == 0 or np.any(ts <= 0.0) or np.any(np.diff(ts) <= 0.0):
            raise DomainError("cylinder times must be strictly increasing and positive")
        if len(self.sup_norms) != ts.size:
            raise DomainError("one sup norm per coordinate is required")
        if not all(math.isfinite(s) for s in self.sup_norms):
            raise DomainError("declared sup norms must be finite")
        self._check_gradient()

    def _check_gradient(self):
        rng = np.random.Generator(np.random.PCG64(0x5EED))
        x = rng.normal(0.0, 1.5, size=(len(self.times), _FD_PROBES))
        g = np.asarray(self.grad(x), dtype=float)
        for i in range(len(self.times)):
            xp = x.copy(); xp[i] += _FD_STEP
            xm = x.copy(); xm[i] -= _FD_STEP
            fd = (np.asarray(self.fn(xp)) - np.asarray(self.fn(xm))) / (2 * _FD_STEP)
            if np.max(np.abs(fd - g[i])) > _FD_TOL * max(1.0, float(np.max(np.abs(g[i])))):
                raise DomainError(f"gradient oracle of {self.name!r} disagrees "
                                  "with finite differences")

    @property
    def n(self) -> int:
        return len(self.times)

    def eval(self, coords) -> float:
        return float(np.asarray(self.fn(np.asarray(coords, dtype=float)[:, None]))[0])

    def grad_at(self, coords) -> np.ndarray:
        return np.asarray(self.grad(np.asarray(coords, dtype=float)[:, None]))[:, 0]


def _bump(x):
    return np.exp(-x * x)


def _logistic(x):
    return 1.0 / (1.0 + np.exp(-x))


_SUP_BUMP = math.sqrt(2.0 / math.e)

_LIB_1 = {
    "one": (lambda x: np.ones(x.shape[1]), lambda x: np.zeros_like(x), (0.0,), True),
    "tanh": (lambda x: np.tanh(x[0]), lambda x: (1.0 / np.cosh(x)) ** 2, (1.0,), True),
    "sin": (lambda x: np.sin(x[0]), lambda x: np.cos(x), (1.0,), True),
    "bump": (lambda x: _bump(x[0]), lambda x: -2.0 * x * _bump(x), (_SUP_BUMP,), True),
    "logistic": (lambda x: _logistic(x[0]),
                 lambda x: _logistic(x) * (1.0 - _logistic(x)), (0.25,), True),
    "linear": (lambda x: x[0], lambda x: np.ones_like(x), (1.0,), False),
}

_LIB_2 = {
    "sin_tanh": (
        lambda x: np.sin(x[0]) * np.tanh(x[1]),
        lambda x: np.stack([np.cos(x[0]) * np.tanh(x[1]),
                            np.sin(x[0]) / np.cosh(x[1]) ** 2]),
        (1.0, 1.0), True),
    "tanh_logistic": (
        lambda x: np.tanh(x[0]) * _logistic(x[1]),
        lambda x: np.stack([_logistic(x[1]) / np.cosh(x[0]) ** 2,
                            np.tanh(x[0]) * _logistic(x[1]) * (1.0 - _logistic(x[1]))]),
        (1.0, 0.25), True),
    "bump_tanh": (
        lambda x: _bump(x[0]) * np.tanh(x[1]),
        lambda x: np.stack([-2.0 * x[0] * _bump(x[0]) * np.tanh(x[1]),
                            _bump(x[0]) / np.cosh(x[1]) ** 2]),
        (_SUP_BUMP, 1.0), True),
}

CYLINDER_LIBRARY = tuple(sorted(_LIB_1) + sorted(_LIB_2))


def cylinder(name: str, times) -> CylinderFunction:
    """Build a library cylinder functional at the given observation times."""
    times = tuple(float(t) for t in np.atleast_1d(times))
    if name in _LIB_1:
        fn, grad, sup, bounded = _LIB_1[name]
        if len(times) != 1:
            raise DomainError(f"{name!r} takes one observation time")
    elif name in _LIB_2:
        fn, grad, sup, bounded = _LIB_2[name]
        if len(times) != 2:
            raise DomainError(f"{name!r} takes two observation times")
    else:
        raise DomainError(f"unknown cylinder function {name!r}; "
                          f"available: {', '.join(CYLINDER_LIBRARY)}")
    return CylinderFunction(name, times, fn, grad, sup, bounded)


# ---------------------------------------------------------------------------
# draw-level operations


def _draw_indices(F: CylinderFunction, draw: GgbmDraw) -> list[int]:
    base = draw.base_grid
    return [base.index_of(t) for t in F.times]


def _coords(F: CylinderFunction, draw: GgbmDraw, values=None) -> np.ndarray:
    vals = draw.values if values is None else values
    return np.asarray([vals[i] for i in _draw_indices(F, draw)])


def directional_derivative(F: CylinderFunction, h: CameronMartinElement,
                           draw: GgbmDraw, values=None) -> float:
    """Derivative of F along the lifted shift h, at one draw."""
    if not h.grid.matches(draw.coupled.grid):
        raise DomainError("shift is not lifted on this draw's grid")
    coords = _coords(F, draw, values)
    g = F.grad_at(coords)
    hvals = np.asarray([h.h_values[i] for i in _draw_indices(F, draw)])
    return float(np.dot(g, hvals))


GradientElement = CameronMartinElement
"""The Riesz representative of the derivative is itself an admissible shift."""


def gradient(F: CylinderFunction, draw: GgbmDraw) -> GradientElement:
    """Riesz representative of h -> dF/dh at one draw.

    Its slope part combines the kernel sections at the (scaled) observation
    times, weighted by the partial derivatives; for Brownian coupling the
    sections are indicator cells, so the slope is a step function with jumps
    at the scaled observation times.
    """
    grid = draw.coupled.grid
    coords = _coords(F, draw)
    g = F.grad_at(coords)
    mat = build_kernel_matrix(draw.params.hurst, grid)
    cells = np.zeros(grid.m)
    for k, i in enumerate(_draw_indices(F, draw)):
        if i > 0:
            cells += g[k] * mat[i - 1]
    return apply_kernel(draw.params.hurst, cells, grid)


def ibp_adjoint(G: CylinderFunction, h: CameronMartinElement, draw: GgbmDraw,
                T: float) -> float:
    """Adjoint-derivative value -dG/dh + G * int hdot dB at one draw."""
    horizon = T * draw.tau ** (1.0 / draw.params.alpha)
    w = wiener_integral(h, draw.coupled, horizon)
    return (-directional_derivative(G, h, draw)
            + F_value(G, draw) * w)


def F_value(F: CylinderFunction, draw: GgbmDraw, values=None) -> float:
    """Evaluate a cylinder functional on one draw."""
    return F.eval(_coords(F, draw, values))


def lp_moment_bound(F: CylinderFunction, hdot: HdotSpec, params: GgbmParams,
                    p: float) -> float:
    """Closed-form bound on E|dF/dh|^p.

    n^{p-1} ||hdot||^p sum_i ||d_i f||^p t_i^{pH} * Gamma(p/2+1)/Gamma(beta p/2+1).
    """
    n = F.n
    h_norm = math.sqrt(hdot.norm_sq())
    hexp = params.hurst.value
    tail = gamma_fn(p / 2.0 + 1.0) / gamma_fn(params.beta * p / 2.0 + 1.0)
    body = sum(s ** p * t ** (p * hexp) for s, t in zip(F.sup_norms, F.times))
    return n ** (p - 1.0) * h_norm ** p * body * tail


# ---------------------------------------------------------------------------
# two-sided Monte Carlo check of the duality identity


def _row_setup(times_f, times_g, grid: TimeGrid):
    all_times = sorted(set(times_f) | set(times_g))
    rows = [grid.index_of(t) for t in all_times]
    pos = {t: k for k, t in enumerate(all_times)}
    return rows, [pos[t] for t in times_f], [pos[t] for t in times_g]


def verify_ibp(F: CylinderFunction, G: CylinderFunction, hdot: HdotSpec,
               params: GgbmParams, T: float, N: int, seed: int,
               m: int = 256, workers: int | None = None,
               chunk_size: int = CHUNK_SIZE) -> MonteCarloReport:
    """Estimate E[G dF/dh] and E[F (adjoint dG/dh)] on independent draw sets.

    Passes when the difference is within 3 pooled standard errors.
    """
    if N < 1000:
        raise DomainError("N < 1000 gives a meaningless confidence interval")
    grid = TimeGrid(T, m)
    rows, posF, posG = _row_setup(F.times, G.times, grid)
    n_chunks = math.ceil(N / chunk_size)

    def lhs(rng, count):
        b = draw_batch(params, grid, rows, rng, count, hdot_fn=hdot)
        gf = np.asarray(F.grad(b["values"][posF]))
        dF = np.einsum("ik,ik->k", gf, b["shift"][posF])
        gv = np.asarray(G.fn(b["values"][posG]))
        return {"value": gv * dF, "#resamples": b["#resamples"]}

    def rhs(rng, count):
        b = draw_batch(params, grid, rows, rng, count, hdot_fn=hdot)
        gg = np.asarray(G.grad(b["values"][posG]))
        dG = np.einsum("ik,ik->k", gg, b["shift"][posG])
        gv = np.asarray(G.fn(b["values"][posG]))
        fv = np.asarray(F.fn(b["values"][posF]))
        return {"value": fv * (-dG + gv * b["wiener"]),
                "#resamples": b["#resamples"]}

    left = run_chunks(N, lhs, seed, workers, chunk_size, stream_base=0)
    right = run_chunks(N, rhs, seed, workers, chunk_size, stream_base=n_chunks)
    sl, sr = left["value"], right["value"]
    diff = sl.mean - sr.mean
    pooled = math.sqrt(sl.se ** 2 + sr.se ** 2)
    z = diff / pooled if pooled > 0.0 else (0.0 if diff == 0.0 else math.inf)
    return MonteCarloReport(
        command="verify-ibp",
        parameters={"beta": params.beta, "alpha": params.alpha, "T": T,
                    "m": m, "hdot": hdot.label(),
                    "F": F.name, "F_times": list(F.times),
                    "G": G.name, "G_times": list(G.times)},
        seed=seed, n_samples=N,
        estimates={"lhs": {"mean": sl.mean, "se": sl.se},
                   "rhs": {"mean": sr.mean, "se": sr.se},
                   "difference": diff, "pooled_se": pooled, "z_score": z},
        counters={"resamples": left["#resamples"] + right["#resamples"]},
        passed=bool(abs(z) <= 3.0))
