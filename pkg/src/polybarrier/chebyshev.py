"""Chebyshev-T series on [-1, 1]: interpolation and Clenshaw evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


def chebyshev_points(n: int) -> np.ndarray:
    """Chebyshev points of the second kind, sorted increasing.

    ``n`` is the number of points; the set includes the endpoints for
    ``n >= 2``.  For ``n == 1`` the convention is the single point 0.
    """
    if n < 1:
        raise ValueError(f"need at least one point, got {n}")
    if n == 1:
        return np.zeros(1)
    return -np.cos(np.pi * np.arange(n) / (n - 1))


def clenshaw(coeffs, x):
    """Clenshaw recurrence for sum(a_k * T_k(x)); works for real or complex x."""
    coeffs = np.asarray(coeffs)
    x = np.asarray(x)
    if coeffs.size == 1:
        return np.broadcast_to(coeffs[0], x.shape).copy() if x.shape else coeffs[0] * np.ones_like(x)
    b_next = np.zeros_like(x)
    b_cur = np.zeros_like(x) + coeffs[-1]
    for k in range(coeffs.size - 2, 0, -1):
        b_next, b_cur = b_cur, coeffs[k] + 2 * x * b_cur - b_next
    return coeffs[0] + x * b_cur - b_next


@dataclass(frozen=True)
class ChebyshevSeries:
    """Polynomial sum(a_k * T_k) on [-1, 1], stored by its T-basis coefficients."""

    coeffs: np.ndarray = field()

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coeffs must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(c)):
            raise ValueError("coeffs must be finite")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, x):
        return eval_clenshaw(self, x)


def eval_clenshaw(p: ChebyshevSeries, x):
    """Evaluate ``p`` at real ``x`` in [-1, 1] via the Clenshaw recurrence.

    Points outside the interval are a domain error; the complex extension to
    Bernstein ellipses lives in :mod:`polybarrier.ellipse`.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1.0 + 4 * np.finfo(float).eps):
        bad = np.max(np.abs(xa))
        raise ValueError(f"argument outside [-1, 1]: |x| = {bad}")
    out = clenshaw(p.coeffs, xa)
    return float(out) if np.isscalar(x) or xa.ndim == 0 else out


def cheb_interpolate(f: Callable, n: int) -> ChebyshevSeries:
    """Interpolate ``f`` at the n+1 Chebyshev points of the second kind.

    Returns the unique degree-n series matching ``f`` at the nodes.  A
    non-finite sample is rejected with the offending node in the message.
    """
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    nodes = chebyshev_points(n + 1)
    vals = np.asarray(f(nodes), dtype=float)
    if vals.shape != nodes.shape:
        vals = np.array([float(f(t)) for t in nodes])
    if not np.all(np.isfinite(vals)):
        k = int(np.argmax(~np.isfinite(vals)))
        raise ValueError(f"target not finite at Chebyshev node x = {nodes[k]!r}")
    if n == 0:
        return ChebyshevSeries(vals[:1])
    # type-I DCT with halved end weights: a_k = (2/n) * sum'' f(x_j) cos(k j pi / n)
    j = np.arange(n + 1)
    theta = np.pi * np.outer(j, j) / n
    w = np.ones(n + 1)
    w[0] = w[-1] = 0.5
    # nodes are sorted increasing = cos(pi (n-j)/n), so flip values into cos order
    vc = vals[::-1]
    a = (2.0 / n) * (np.cos(theta) @ (w * vc))
    a[0] *= 0.5
    a[-1] *= 0.5
    return ChebyshevSeries(a)
