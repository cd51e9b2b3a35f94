"""Bernstein ellipses, complex sup norms, and strip-to-ellipse geometry."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chebyshev import ChebyshevSeries, clenshaw

DEFAULT_BOUNDARY_SAMPLES = 4096
_MAX_BOUNDARY_SAMPLES = 2 ** 16


def joukowski(w):
    """The conformal map w -> (w + 1/w)/2; sends |w| = rho to the ellipse E_rho."""
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        raise ValueError("joukowski map undefined at w = 0")
    out = 0.5 * (w + 1.0 / w)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BernsteinEllipse:
    """Ellipse with foci +-1 and parameter rho > 1, dilated by a factor >= 1.

    The undilated ellipse is the image of |w| = rho under the Joukowski map;
    the dilation scales it about the origin (it models the inner-parameter
    cap of a ridge network, so activation arguments stay inside the dilated
    set).
    """

    rho: float
    dilation: float = 1.0

    def __post_init__(self):
        if not (self.rho > 1.0):
            raise ValueError(f"rho must exceed 1, got {self.rho}")
        if not (self.dilation >= 1.0):
            raise ValueError(f"dilation must be >= 1, got {self.dilation}")

    @property
    def semi_major(self) -> float:
        return 0.5 * (self.rho + 1.0 / self.rho)

    @property
    def semi_minor(self) -> float:
        return 0.5 * (self.rho - 1.0 / self.rho)

    def contains(self, z, tol: float = 1e-10) -> np.ndarray:
        """Whether z lies in the closed dilated ellipse (with relative slack)."""
        z = np.asarray(z, dtype=complex)
        a = self.dilation * self.semi_major
        b = self.dilation * self.semi_minor
        return (z.real / a) ** 2 + (z.imag / b) ** 2 <= 1.0 + tol


def ellipse_boundary(e: BernsteinEllipse, n_samples: int) -> np.ndarray:
    """Boundary points dilation * joukowski(rho e^{i theta}) at equispaced angles.

    ``n_samples`` must be even (and >= 8) so the sample set is symmetric under
    both conjugation and negation.
    """
    if n_samples < 8:
        raise ValueError(f"need at least 8 samples, got {n_samples}")
    if n_samples % 2 != 0:
        raise ValueError(f"sample count must be even, got {n_samples}")
    theta = 2.0 * np.pi * np.arange(n_samples) / n_samples
    return e.dilation * joukowski(e.rho * np.exp(1j * theta))


def ellipse_norm(h: Callable, e: BernsteinEllipse,
                 n_samples: int = DEFAULT_BOUNDARY_SAMPLES) -> float:
    """Sup of |h| over the dilated ellipse, by boundary sampling.

    By the maximum principle the boundary maximum equals the sup over the
    closed region, and sampling approaches it from below.  The sample count
    doubles (up to 2^16) until the value moves by less than 1e-8 relative.
    A non-finite sample is a hard error naming the point: it means the
    caller's analyticity certificate for ``h`` does not actually cover the
    ellipse.
    """
    n = int(n_samples)
    prev = None
    while True:
        z = ellipse_boundary(e, n)
        vals = np.abs(np.asarray(h(z), dtype=complex))
        if not np.all(np.isfinite(vals)):
            k = int(np.argmax(~np.isfinite(vals)))
            raise ValueError(
                f"non-finite evaluation on the ellipse boundary at z = {z[k]!r}; "
                "analyticity precondition violated"
            )
        cur = float(np.max(vals))
        if prev is not None and abs(cur - prev) <= 1e-8 * max(1.0, cur):
            return cur
        if n >= _MAX_BOUNDARY_SAMPLES:
            return cur
        prev = cur
        n *= 2


def max_rho_for_strip(delta: float, L: float = 1.0, safety: float = 1.0) -> float:
    """Largest ellipse parameter whose semi-minor axis is safety * delta / L.

    Closed form rho = b + sqrt(b^2 + 1) with b = safety * delta / L.  For
    safety < 1 the dilated ellipse L * E_rho stays strictly inside the strip
    |Im z| < delta.
    """
    if not (delta > 0 and np.isfinite(delta)):
        raise ValueError(f"strip half-width must be positive and finite, got {delta}")
    if not (L > 0 and np.isfinite(L)):
        raise ValueError(f"dilation must be positive and finite, got {L}")
    if not (0 < safety <= 1):
        raise ValueError(f"safety must lie in (0, 1], got {safety}")
    b = safety * delta / L
    return float(b + np.sqrt(b * b + 1.0))


def cheb_eval_complex(p: ChebyshevSeries, z):
    """Analytic continuation of a Chebyshev series to complex arguments.

    The real-axis evaluator in :mod:`polybarrier.chebyshev` enforces the
    [-1, 1] domain; ellipse norms of polynomials go through here instead.
    """
    za = np.asarray(z, dtype=complex)
    out = clenshaw(p.coeffs.astype(complex), za)
    return complex(out) if za.ndim == 0 else out
