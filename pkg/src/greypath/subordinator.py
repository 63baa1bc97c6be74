"""Sampling the M-Wright subordination variable.

The variable with Laplace transform E_beta(-s) is obtained as S**(-beta)
from a one-sided beta-stable draw S with transform exp(-s**beta); both laws
are verified against their transform and moment identities rather than
against the transformation's pedigree.
"""

from __future__ import annotations

import numpy as np

from .specfun import as_beta

__all__ = ["sample_positive_stable", "sample_mwright"]


def sample_positive_stable(beta, rng: np.random.Generator, size=None):
    """One-sided stable draw(s) with E[exp(-s*S)] = exp(-s**beta), 0 < beta < 1.

    Kanter's representation: with U uniform on (0,1) and E standard
    exponential,

        S = sin(beta*pi*U) * sin((1-beta)*pi*U)**((1-beta)/beta)
            / sin(pi*U)**(1/beta) * E**(-(1-beta)/beta).
    """
    b = as_beta(beta)
    if b.degenerate:
        raise ValueError("the one-sided stable law requires beta < 1")
    u = rng.random(size)
    u = np.maximum(u, 2.0 ** -53)  # rng.random() may return exactly 0
    e = rng.standard_exponential(size)
    bu = np.pi * u
    bv = b.value
    num = np.sin(bv * bu) * np.sin((1.0 - bv) * bu) ** ((1.0 - bv) / bv)
    out = num / np.sin(bu) ** (1.0 / bv) * e ** (-(1.0 - bv) / bv)
    return float(out) if size is None else out


def sample_mwright(beta, rng: np.random.Generator, size=None):
    """M-Wright draw(s): E[exp(-s*Y)] equals the Mittag-Leffler function at -s.

    beta == 1 is the degenerate mode: Y is the constant 1 (no randomness
    consumed).
    """
    b = as_beta(beta)
    if b.degenerate:
        return 1.0 if size is None else np.ones(size)
    s = sample_positive_stable(b, rng, size)
    return s ** (-b.value)
