"""Named target functions for experiments.

Every target maps float arrays to float arrays.  Univariate targets take a
(n,) array; with ``dim >= 2`` the returned callable takes an (n, d) array of
points and, when the named target is univariate, applies it to the first
coordinate (the "x-only" consistency configuration).
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .activations import get_activation
from .chebyshev import ChebyshevSeries, clenshaw


def target_abs(x):
    return np.abs(np.asarray(x, dtype=float))


def target_runge(x):
    x = np.asarray(x, dtype=float)
    return 1.0 / (1.0 + 25.0 * x * x)


def make_ck_spline(k: int) -> Callable:
    """max(x, 0)^(k+1): k times continuously differentiable, not k+1 times."""
    if k < 0:
        raise ValueError(f"smoothness order must be >= 0, got {k}")

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.maximum(x, 0.0) ** (k + 1)

    return f


def make_realizable(activation_name: str) -> Callable:
    """The activation itself: exactly representable by a width-1 network."""
    act = get_activation(activation_name)
    return lambda x: act.eval_real(np.asarray(x, dtype=float))


def make_poly(coeffs) -> Callable:
    """Polynomial given by Chebyshev-T coefficients a_0, a_1, ..."""
    series = ChebyshevSeries(np.asarray(coeffs, dtype=float))
    return lambda x: clenshaw(series.coeffs, np.asarray(x, dtype=float))


def separable_abs(points):
    """sum_j |x_j| over coordinates; the canonical kinked multivariate target."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    return np.sum(np.abs(p), axis=1)


def get_target(spec: str, dim: int = 1) -> Callable:
    """Resolve a target descriptor.

    Descriptors: ``abs``, ``runge``, ``abs_sum`` (multivariate |x|+|y|(+|z|)),
    ``ck_spline:K``, ``realizable:ACTIVATION``, ``poly:a0,a1,...``.
    For dim >= 2, univariate descriptors act on the first coordinate.
    """
    name, _, arg = spec.partition(":")
    name = name.strip()
    if name == "abs":
        base = target_abs
    elif name == "runge":
        base = target_runge
    elif name == "abs_sum":
        if dim < 2:
            raise ValueError("abs_sum is a multivariate target; set dim >= 2")
        return separable_abs
    elif name == "ck_spline":
        base = make_ck_spline(int(arg))
    elif name == "realizable":
        base = make_realizable(arg.strip())
    elif name == "poly":
        coeffs = [float(tok) for tok in arg.split(",") if tok.strip()]
        if not coeffs:
            raise ValueError("poly target needs at least one coefficient")
        base = make_poly(coeffs)
    else:
        raise ValueError(f"unknown target {spec!r}")
    if dim == 1:
        return base

    def on_first_coordinate(points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return base(p[:, 0])

    return on_first_coordinate
