"""Generalized grey Brownian motion built from subordinated path synthesis.

A draw couples the subordination variable tau with a synthesized path on the
random horizon T * tau**(1/(2H)): the value at logical time t_i is the path
at t_i * tau**(1/(2H)).  The equal-in-law product construction (sqrt(tau)
times the path on the unscaled grid) is kept alongside for cross-checks.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError
from .fbm import (CoupledPath, HurstParam, TimeGrid, build_kernel_matrix,
                  sample_coupled, unit_kernel_gram)
from .specfun import BetaParam, as_beta, gamma_fn, mittag_leffler
from .subordinator import sample_mwright

__all__ = [
    "GgbmParams",
    "GgbmDraw",
    "HORIZON_CAP",
    "sample_ggbm",
    "sample_ggbm_product",
    "ggbm_covariance",
    "ggbm_moment",
    "ggbm_increment_char",
    "ggbm_char",
    "discrete_covariance",
    "discrete_moment",
    "discrete_increment_char",
    "draw_batch",
]

log = logging.getLogger("greypath")

HORIZON_CAP = 1e8          # reject tau draws whose scaled horizon exceeds this
_MAX_RESAMPLE_ROUNDS = 10


@dataclass(frozen=True)
class GgbmParams:
    """Process parameters: order beta in (0, 1] and scaling exponent alpha.

    alpha = 2H with H the self-similarity index of the underlying path;
    1 <= alpha < 2.  beta == 1 is the degenerate mode in which the
    subordination variable is constant and the process is Gaussian.
    """

    beta: float
    alpha: float

    def __post_init__(self):
        as_beta(self.beta)
        if not (1.0 <= self.alpha < 2.0):
            raise DomainError(f"alpha must lie in [1, 2), got {self.alpha}")

    @property
    def beta_param(self) -> BetaParam:
        return as_beta(self.beta)

    @property
    def hurst(self) -> HurstParam:
        return HurstParam(self.alpha / 2.0)


@dataclass(frozen=True)
class GgbmDraw:
    """One Monte Carlo draw: tau, the coupled path, and the process values.

    For subordination draws the coupled path lives on the scaled horizon and
    ``values[i]`` is the path at t_i * tau**(1/(2H)); density evaluation must
    read the same coupled increments.
    """

    params: GgbmParams
    base_grid: TimeGrid
    tau: float
    coupled: CoupledPath
    values: np.ndarray
    resamples: int = 0


def _tau_scale(params: GgbmParams, tau) -> np.ndarray:
    return np.asarray(tau) ** (1.0 / params.alpha)


def sample_ggbm(params: GgbmParams, grid: TimeGrid,
                rng: np.random.Generator) -> GgbmDraw:
    """Subordination draw: path on the random horizon T * tau**(1/(2H))."""
    resamples = 0
    for _ in range(_MAX_RESAMPLE_ROUNDS + 1):
        tau = float(sample_mwright(params.beta_param, rng))
        horizon = grid.t_max * float(_tau_scale(params, tau))
        if horizon <= HORIZON_CAP:
            break
        resamples += 1
        log.warning("resampling tau=%.3e (scaled horizon %.3e beyond cap)",
                    tau, horizon)
    else:
        raise NumericError(
            f"{_MAX_RESAMPLE_ROUNDS} consecutive subordinator draws exceeded "
            f"the horizon cap {HORIZON_CAP:g}")
    scaled = TimeGrid(horizon, grid.m)
    coupled = sample_coupled(params.hurst, scaled, rng)
    return GgbmDraw(params, grid, tau, coupled, coupled.fbm_path, resamples)


def sample_ggbm_product(params: GgbmParams, grid: TimeGrid,
                        rng: np.random.Generator) -> GgbmDraw:
    """Product draw: sqrt(tau) times a path sampled on the unscaled grid."""
    tau = float(sample_mwright(params.beta_param, rng))
    coupled = sample_coupled(params.hurst, grid, rng)
    return GgbmDraw(params, grid, tau, coupled,
                    math.sqrt(tau) * coupled.fbm_path, 0)


def ggbm_covariance(params: GgbmParams, t, s):
    """Closed-form covariance (t^a + s^a - |t-s|^a) / (2 Gamma(beta+1))."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(t < 0.0) or np.any(s < 0.0):
        raise DomainError("covariance requires nonnegative times")
    a = params.alpha
    out = (t ** a + s ** a - np.abs(t - s) ** a) / (2.0 * gamma_fn(params.beta + 1.0))
    return float(out) if out.ndim == 0 else out


def ggbm_moment(params: GgbmParams, order: int, t: float) -> float:
    """Closed-form moment of X(t); odd orders vanish, even orders are
    (2n)! / (2^n Gamma(beta*n + 1)) * t^(n*alpha)."""
    if order < 0:
        raise DomainError("moment order must be nonnegative")
    if order % 2 == 1:
        return 0.0
    n = order // 2
    return (math.factorial(2 * n) / (2.0 ** n * gamma_fn(params.beta * n + 1.0))
            * t ** (n * params.alpha))


def ggbm_increment_char(params: GgbmParams, theta: float, t: float, s: float) -> float:
    """Characteristic function of an increment: E_beta(-theta^2 |t-s|^alpha / 2)."""
    return mittag_leffler(params.beta_param,
                          -0.5 * theta * theta * abs(t - s) ** params.alpha)


def ggbm_char(params: GgbmParams, thetas, times) -> float:
    """Joint characteristic function E_beta(-theta' Sigma theta / 2) with
    Sigma_jk = (t_j^a + t_k^a - |t_j - t_k|^a) / 2.

    The half inside Sigma is forced by consistency: the n = 1 case must
    reproduce the increment characteristic function at s = 0, and the
    subordinated construction yields exactly this quadratic form.
    """
    th = np.asarray(thetas, dtype=float)
    ts = np.asarray(times, dtype=float)
    if th.shape != ts.shape:
        raise DomainError("thetas and times must have matching shapes")
    a = params.alpha
    sigma = 0.5 * (ts[:, None] ** a + ts[None, :] ** a
                   - np.abs(ts[:, None] - ts[None, :]) ** a)
    quad = float(th @ sigma @ th)
    return mittag_leffler(params.beta_param, -0.5 * quad)


# ---------------------------------------------------------------------------
# exact statistics of the discrete synthesized model (midpoint-rule kernel);
# their gap to the closed forms is the documented O(dt^{2-alpha}) grid bias


def _gram_entry(params: GgbmParams, m: int, grid: TimeGrid, t: float, s: float) -> float:
    gram = unit_kernel_gram(params.hurst.value, m)
    i, k = grid.index_of(t), grid.index_of(s)
    if i == 0 or k == 0:
        return 0.0
    return float(gram[i - 1, k - 1])


def discrete_covariance(params: GgbmParams, grid: TimeGrid, t: float, s: float) -> float:
    """Exact covariance of the discrete model at grid times t, s."""
    g = _gram_entry(params, grid.m, grid, t, s)
    return grid.t_max ** params.alpha * g / gamma_fn(params.beta + 1.0)


def discrete_moment(params: GgbmParams, grid: TimeGrid, order: int, t: float) -> float:
    """Exact moment of the discrete model at a grid time."""
    if order % 2 == 1:
        return 0.0
    n = order // 2
    g = _gram_entry(params, grid.m, grid, t, t)
    var_unit = grid.t_max ** params.alpha * g
    return (math.factorial(2 * n) / (2.0 ** n * gamma_fn(params.beta * n + 1.0))
            * var_unit ** n)


def discrete_increment_char(params: GgbmParams, grid: TimeGrid, theta: float,
                            t: float, s: float) -> float:
    """Exact increment characteristic function of the discrete model."""
    w = (_gram_entry(params, grid.m, grid, t, t)
         + _gram_entry(params, grid.m, grid, s, s)
         - 2.0 * _gram_entry(params, grid.m, grid, t, s))
    c = 0.5 * theta * theta * grid.t_max ** params.alpha * w
    return mittag_leffler(params.beta_param, -c)


# ---------------------------------------------------------------------------
# vectorized draw engine


def _mm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # einsum keeps a fixed summation order, so results are bit-stable
    # under any worker count (BLAS may repartition reductions)
    return np.einsum("ij,jk->ik", a, b, optimize=False)


def _batch_tau(params: GgbmParams, rng: np.random.Generator, count: int,
               t_max: float):
    tau = np.asarray(sample_mwright(params.beta_param, rng, size=count), dtype=float)
    resamples = 0
    for _ in range(_MAX_RESAMPLE_ROUNDS):
        bad = t_max * _tau_scale(params, tau) > HORIZON_CAP
        n_bad = int(np.count_nonzero(bad))
        if n_bad == 0:
            return tau, resamples
        resamples += n_bad
        tau[bad] = sample_mwright(params.beta_param, rng, size=n_bad)
    raise NumericError("subordinator horizon cap exceeded after "
                       f"{_MAX_RESAMPLE_ROUNDS} resampling rounds")


def draw_batch(params: GgbmParams, grid: TimeGrid, rows, rng: np.random.Generator,
               count: int, hdot_fn=None, full_paths: bool = False,
               _force_matrix: bool = False) -> dict:
    """Vectorized subordination draws evaluated at the given grid indices.

    Returns per-draw arrays: ``tau``, ``values`` (len(rows) x count), and
    when ``hdot_fn`` is given the grid-consistent ``shift`` at the same
    indices, the driving-noise integral ``wiener`` over the full scaled
    horizon and the accumulated squared slope norm ``hnorm2``.  The draw law
    and randomness consumption match ``sample_ggbm`` draw by draw.

    Brownian coupling takes a running-sum fast path; ``_force_matrix``
    routes it through the kernel matrix instead (the two must agree, which
    the consistency tests assert).
    """
    m = grid.m
    h = params.hurst.value
    rows = np.asarray(rows, dtype=int)
    if np.any(rows < 0) or np.any(rows > m):
        raise DomainError("row indices must lie in [0, m]")
    tau, resamples = _batch_tau(params, rng, count, grid.t_max)
    horizon = grid.t_max * _tau_scale(params, tau)          # (count,)
    z = rng.standard_normal((m, count))
    out: dict = {"tau": tau, "#resamples": resamples}

    if params.hurst.is_brownian and not _force_matrix:
        cum = np.cumsum(z, axis=0)
        picked = np.zeros((rows.size, count))
        nz = rows > 0
        picked[nz] = cum[rows[nz] - 1]
        values = np.sqrt(horizon / m)[None, :] * picked
        if full_paths:
            paths = np.vstack([np.zeros((1, count)), cum]) * np.sqrt(horizon / m)[None, :]
    else:
        mat = build_kernel_matrix(params.hurst, TimeGrid(1.0, m))
        rows_nz = rows[rows > 0]
        base = np.zeros((rows.size, count))
        base[rows > 0] = _mm(mat[rows_nz - 1], z)
        values = horizon[None, :] ** h / math.sqrt(m) * base
        if full_paths:
            paths = np.vstack([np.zeros((1, count)), _mm(mat, z)])
            paths *= horizon[None, :] ** h / math.sqrt(m)
    out["values"] = values
    if full_paths:
        out["paths"] = paths

    if hdot_fn is not None:
        mids = (np.arange(m) + 0.5) / m                      # unit-grid midpoints
        cells = np.asarray(hdot_fn(mids[:, None] * horizon[None, :]), dtype=float)
        cells = cells * np.ones((m, count))
        dt = horizon / m
        out["wiener"] = np.sqrt(dt) * np.einsum("jk,jk->k", cells, z)
        out["hnorm2"] = dt * np.einsum("jk,jk->k", cells, cells)
        if params.hurst.is_brownian and not _force_matrix:
            ccum = np.cumsum(cells, axis=0)
            sh = np.zeros((rows.size, count))
            sh[rows > 0] = ccum[rows[rows > 0] - 1]
            out["shift"] = dt[None, :] * sh
        else:
            sh = np.zeros((rows.size, count))
            sh[rows > 0] = _mm(mat[rows_nz - 1], cells)
            out["shift"] = (horizon[None, :] ** (h + 0.5) / m) * sh
    return out
