"""Activation catalog with analyticity and Gevrey regularity metadata.

Strip half-widths are the distance from the real axis to the nearest
singularity of the complex extension: tanh has poles at i pi/2 + i pi k,
the logistic at i pi + 2 i pi k, and 1/(1+t^2) at +-i.  The bump function
extends by zero outside (-1, 1); it has no complex half-plane of analyticity
and carries Gevrey-class metadata instead.

The bump Gevrey constants are frozen numerical fits: C is sup|phi| = 1/e
exactly, and R was fitted against high-precision derivative maxima of order
<= 8 (see tools/fit_bump_gevrey.py) so that sup|phi^(n)| <= C R^n (n!)^2
holds with margin over that whole range.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np


@dataclass(frozen=True)
class StripAnalyticity:
    """Holomorphic and bounded on |Im z| < half_width."""

    half_width: float


ENTIRE = "entire"
NONE = "none"
Analyticity = Union[str, StripAnalyticity]  # ENTIRE, NONE, or a strip


@dataclass(frozen=True)
class ActivationSpec:
    """An activation with real/complex evaluators and regularity metadata.

    ``gevrey`` is an optional (C, R, s) triple bounding derivatives by
    C * R^n * (n!)^s; ``sup_real`` is sup over the real line of |phi| when
    finite, None otherwise.  ``deriv_real`` is the first derivative, used by
    the least-squares fitter and by finite-difference cross-checks.
    """

    name: str
    eval_real: Callable
    eval_complex: Callable
    analyticity: Analyticity
    deriv_real: Callable
    gevrey: Optional[Tuple[float, float, float]] = None
    sup_real: Optional[float] = None

    def strip_half_width(self) -> Optional[float]:
        if isinstance(self.analyticity, StripAnalyticity):
            return self.analyticity.half_width
        return None

    def covers_ellipse(self, rho: float, dilation: float) -> bool:
        """Whether the complex extension is certified on dilation * E_rho."""
        if self.analyticity == ENTIRE:
            return True
        if isinstance(self.analyticity, StripAnalyticity):
            semi_minor = 0.5 * (rho - 1.0 / rho)
            return dilation * semi_minor < self.analyticity.half_width
        return False


def _bump_real(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


def _bump_deriv(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        out[inside] = np.exp(-1.0 / (1.0 - ti ** 2)) * (-2.0 * ti) / (1.0 - ti ** 2) ** 2
    return out


def _bump_complex(z):
    # Formal extension; the catalog marks the bump non-analytic, so ellipse
    # norms never query this.  On the real axis it honors the cut-off.
    z = np.asarray(z, dtype=complex)
    out = np.zeros_like(z)
    on_axis = z.imag == 0
    outside = on_axis & (np.abs(z.real) >= 1.0)
    ok = ~outside & (np.abs(1.0 - z * z) > 0)
    with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
        out[ok] = np.exp(-1.0 / (1.0 - z[ok] ** 2))
    return out


def _logistic_real(t):
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _logistic_deriv(t):
    s = _logistic_real(t)
    return s * (1.0 - s)


# Frozen fit from tools/fit_bump_gevrey.py (mpmath, derivative orders <= 8).
BUMP_GEVREY_C = float(np.exp(-1.0))
BUMP_GEVREY_R = 3.1
BUMP_GEVREY_S = 2.0

_CATALOG = {
    "exp": ActivationSpec(
        name="exp",
        eval_real=np.exp,
        eval_complex=np.exp,
        analyticity=ENTIRE,
        deriv_real=np.exp,
        sup_real=None,
    ),
    "sin": ActivationSpec(
        name="sin",
        eval_real=np.sin,
        eval_complex=np.sin,
        analyticity=ENTIRE,
        deriv_real=np.cos,
        sup_real=1.0,
    ),
    "gaussian": ActivationSpec(
        name="gaussian",
        eval_real=lambda t: np.exp(-np.asarray(t, dtype=float) ** 2),
        eval_complex=lambda z: np.exp(-np.asarray(z, dtype=complex) ** 2),
        analyticity=ENTIRE,
        deriv_real=lambda t: -2.0 * np.asarray(t, dtype=float) * np.exp(-np.asarray(t, dtype=float) ** 2),
        sup_real=1.0,
    ),
    "tanh": ActivationSpec(
        name="tanh",
        eval_real=np.tanh,
        eval_complex=np.tanh,
        analyticity=StripAnalyticity(np.pi / 2),
        deriv_real=lambda t: 1.0 / np.cosh(np.asarray(t, dtype=float)) ** 2,
        sup_real=1.0,
    ),
    "logistic": ActivationSpec(
        name="logistic",
        eval_real=_logistic_real,
        eval_complex=lambda z: 1.0 / (1.0 + np.exp(-np.asarray(z, dtype=complex))),
        analyticity=StripAnalyticity(np.pi),
        deriv_real=_logistic_deriv,
        sup_real=1.0,
    ),
    "runge": ActivationSpec(
        name="runge",
        eval_real=lambda t: 1.0 / (1.0 + np.asarray(t, dtype=float) ** 2),
        eval_complex=lambda z: 1.0 / (1.0 + np.asarray(z, dtype=complex) ** 2),
        analyticity=StripAnalyticity(1.0),
        deriv_real=lambda t: -2.0 * np.asarray(t, dtype=float) / (1.0 + np.asarray(t, dtype=float) ** 2) ** 2,
        sup_real=1.0,
    ),
    "bump": ActivationSpec(
        name="bump",
        eval_real=_bump_real,
        eval_complex=_bump_complex,
        analyticity=NONE,
        deriv_real=_bump_deriv,
        gevrey=(BUMP_GEVREY_C, BUMP_GEVREY_R, BUMP_GEVREY_S),
        sup_real=BUMP_GEVREY_C,
    ),
}


def get_activation(name: str) -> ActivationSpec:
    """Look up a catalog activation by name; KeyError lists what exists."""
    try:
        return _CATALOG[name]
    except KeyError:
        raise KeyError(
            f"unknown activation {name!r}; catalog: {', '.join(sorted(_CATALOG))}"
        ) from None


def catalog_names() -> list:
    return sorted(_CATALOG)
