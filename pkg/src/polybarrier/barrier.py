"""Executable barrier certificates.

The central inequality is one-sided: a fitted network error upper-bounds the
infimum over the constrained class, and the certificate checks

    net_error >= E_m(f) - residual(m)

row by row.  Residuals are always certified upper bounds on E_m of network
outputs, built constructively from ellipse geometry (never fitted to data),
so a passing report is a genuine consequence of the inequality and a failing
one indicates a software bug.

Constant choices, documented here because the bounds leave them open:

* Analytic mode uses C(rho) = 2/(rho - 1), the classical constant from
  Chebyshev truncation of functions analytic on E_rho.
* Strip mode derives rho_m from the strip half-width via the safety factor
  (default 1/2), then reuses the analytic-mode formula with the ellipse norm
  computed on the dilated rho_m-ellipse.  The induced decay exp(-m log rho_m)
  matches the exp(-c m / L_m) shape with c ~ safety * delta for large L_m.
* Gevrey mode defaults to A = e * C_phi and c = s / (e * R_phi)^(1/s), the
  constants produced by Stirling optimization of the derivative bound
  C (R L)^n (n!)^s over the truncation order n; tests validate empirically
  that the resulting residual dominates measured Remez errors of Gevrey
  network outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linprog

from .activations import ENTIRE, ActivationSpec, StripAnalyticity
from .ellipse import BernsteinEllipse, ellipse_norm, max_rho_for_strip
from .network import (
    ConstraintSet,
    FitConfig,
    NetworkParams,
    barron_weighted_norm,
    eval_real,
    fit_l1_constrained,
    frequency_split,
)
from .remez import remez_best_approx

SLACK_TOLERANCE = 1e-9


# ---------------------------------------------------------------------------
# residual parameters


@dataclass(frozen=True)
class AnalyticEllipseParams:
    """Fixed-ellipse residual data: rho, the activation sup norm M on the
    dilated ellipse, the Bernstein constant C(rho) and the dilation."""

    rho: float
    M: float
    C_of_rho: Optional[float] = None
    dilation: float = 1.0

    def __post_init__(self):
        if not (self.rho > 1):
            raise ValueError(f"rho must exceed 1, got {self.rho}")
        if not (self.M > 0 and np.isfinite(self.M)):
            raise ValueError(f"ellipse norm must be positive, got {self.M}")
        if self.C_of_rho is None:
            object.__setattr__(self, "C_of_rho", 2.0 / (self.rho - 1.0))
        if self.C_of_rho < 0:
            raise ValueError(f"C(rho) must be >= 0, got {self.C_of_rho}")


@dataclass(frozen=True)
class StripParams:
    """Strip-mode residual data: half-width and the ellipse safety factor."""

    delta: float
    safety: float = 0.5

    def __post_init__(self):
        if not (self.delta > 0):
            raise ValueError(f"half-width must be positive, got {self.delta}")
        if not (0 < self.safety < 1):
            raise ValueError(f"safety must lie in (0, 1), got {self.safety}")


@dataclass(frozen=True)
class GevreyParams:
    """Gevrey-mode residual constants (index s, prefactor A, exponent c)."""

    s: float
    A: float
    c: float

    def __post_init__(self):
        if not (self.s >= 1):
            raise ValueError(f"Gevrey index must be >= 1, got {self.s}")
        if not (self.A > 0 and self.c > 0):
            raise ValueError("Gevrey constants A, c must be positive")


ResidualParams = Union[AnalyticEllipseParams, StripParams, GevreyParams]


def analytic_params_for(
    act: ActivationSpec,
    L: float = 1.0,
    rho: Optional[float] = None,
    safety: float = 0.5,
    C_of_rho: Optional[float] = None,
) -> AnalyticEllipseParams:
    """Build analytic-mode parameters for an activation.

    When ``rho`` is not given, strip activations get the constructive value
    from `max_rho_for_strip` at the safety factor and entire activations get
    rho = 2.  The ellipse norm M is computed on the dilated ellipse with
    dilation max(L, 1) (a dilation below 1 only shrinks the set, so the
    larger ellipse still certifies the bound).
    """
    L_eff = max(float(L), 1.0)
    if rho is None:
        hw = act.strip_half_width()
        if hw is not None:
            rho = max_rho_for_strip(hw, L_eff, safety)
        elif act.analyticity == ENTIRE:
            rho = 2.0
        else:
            raise ValueError(
                f"activation {act.name!r} has no analyticity certificate"
            )
    if not act.covers_ellipse(rho, L_eff):
        raise ValueError(
            f"activation {act.name!r} is not analytic on {L_eff} * E_{rho}"
        )
    M = ellipse_norm(act.eval_complex, BernsteinEllipse(rho, L_eff))
    return AnalyticEllipseParams(rho=rho, M=M, C_of_rho=C_of_rho, dilation=L_eff)


def default_gevrey_constants(act: ActivationSpec) -> GevreyParams:
    """Stirling-optimized residual constants from the activation's (C, R, s)."""
    if act.gevrey is None:
        raise ValueError(f"activation {act.name!r} carries no Gevrey metadata")
    C, R, s = act.gevrey
    A = math.e * C
    c = s / (math.e * R) ** (1.0 / s)
    return GevreyParams(s=s, A=A, c=c)


# ---------------------------------------------------------------------------
# residual formulas


def analytic_residual(m: int, B_m: float, rp: AnalyticEllipseParams) -> float:
    """C(rho) * B_m * M * rho^-m."""
    return float(rp.C_of_rho * B_m * rp.M * rp.rho ** (-m))


def strip_residual(
    m: int,
    B_m: float,
    L_m: float,
    act: ActivationSpec,
    safety: float = 0.5,
    delta: Optional[float] = None,
) -> float:
    """Optimized-scaling residual for strip-analytic activations.

    Chooses rho_m so the L_m-dilated ellipse sits inside the strip (scaled by
    ``safety``), evaluates the activation sup norm there and applies the
    analytic formula.  For fixed L the m-dependence is exp(-m log rho_m),
    i.e. the exp(-c m / L_m) shape with the constant fixed by construction.
    """
    if delta is None:
        delta = act.strip_half_width()
        if delta is None:
            raise ValueError(
                f"activation {act.name!r} is not certified on a strip; "
                "pass delta explicitly or use analytic mode"
            )
    L_eff = max(float(L_m), 1.0)
    rho_m = max_rho_for_strip(delta, L_eff, safety)
    M_m = ellipse_norm(act.eval_complex, BernsteinEllipse(rho_m, L_eff))
    return float((2.0 / (rho_m - 1.0)) * B_m * M_m * rho_m ** (-m))


def gevrey_residual(m: int, B_m: float, L_m: float, s: float, A: float, c: float) -> float:
    """A * B_m * exp(-c * (m / L_m)^(1/s))."""
    if not (s >= 1):
        raise ValueError(f"Gevrey index must be >= 1, got {s}")
    if not (A > 0 and c > 0):
        raise ValueError("Gevrey constants A, c must be positive")
    return float(A * B_m * math.exp(-c * (m / L_m) ** (1.0 / s)))


# ---------------------------------------------------------------------------
# schedules and reports


@dataclass(frozen=True)
class Schedule:
    """Rows (m, B_m, L_m) with strictly increasing widths."""

    rows: Tuple[Tuple[int, float, float], ...]

    def __post_init__(self):
        rows = tuple((int(m), float(b), float(l)) for m, b, l in self.rows)
        if not rows:
            raise ValueError("schedule must be non-empty")
        ms = [r[0] for r in rows]
        if any(b <= ms[i] for i, b in enumerate(ms[1:])):
            raise ValueError("widths must be strictly increasing")
        if any(b <= 0 or l <= 0 for _, b, l in rows):
            raise ValueError("budgets and caps must be positive")
        object.__setattr__(self, "rows", rows)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class BarrierRow:
    m: int
    E_m_f: float
    net_error: float
    residual: float
    slack: float
    sharpness_ratio: float


@dataclass(frozen=True)
class BarrierReport:
    """Per-width certificate rows; passes iff every slack >= -1e-9."""

    rows: Tuple[BarrierRow, ...]

    @property
    def passes(self) -> bool:
        return all(r.slack >= -SLACK_TOLERANCE for r in self.rows)

    def to_csv(self, seed: Optional[int] = None) -> str:
        out = []
        if seed is not None:
            out.append(f"# seed={seed}")
        out.append("m,E_m_f,net_error,residual,slack,sharpness_ratio")
        for r in self.rows:
            out.append(
                f"{r.m},{r.E_m_f:.17g},{r.net_error:.17g},{r.residual:.17g},"
                f"{r.slack:.17g},{r.sharpness_ratio:.17g}"
            )
        return "\n".join(out) + "\n"


def _make_row(m, E, net_err, residual):
    slack = net_err - (E - residual)
    ratio = net_err / E if E > 0 else float("nan")
    return BarrierRow(m=m, E_m_f=E, net_error=net_err, residual=residual,
                      slack=slack, sharpness_ratio=ratio)


def zero_residual_report(report: BarrierReport) -> BarrierReport:
    """Rebuild a report with the residual column forced to zero.

    This deliberately breaks the certificate's constant (the designed
    negative control): whenever the fitted error drops below E_m(f), the
    broken report must fail.
    """
    return BarrierReport(rows=tuple(
        _make_row(r.m, r.E_m_f, r.net_error, 0.0) for r in report.rows
    ))


def _residual_for(mode: ResidualParams, m, B_m, L_m, act, safety=0.5):
    if isinstance(mode, AnalyticEllipseParams):
        if L_m > mode.dilation * (1 + 1e-12):
            raise ValueError(
                f"schedule cap L_m = {L_m} exceeds the ellipse dilation "
                f"{mode.dilation}; rebuild the residual parameters"
            )
        return analytic_residual(m, B_m, mode)
    if isinstance(mode, StripParams):
        return strip_residual(m, B_m, L_m, act, mode.safety, mode.delta)
    if isinstance(mode, GevreyParams):
        return gevrey_residual(m, B_m, L_m, mode.s, mode.A, mode.c)
    raise TypeError(f"unknown residual mode {mode!r}")


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class PolyBoundRow:
    m: int
    error: float
    residual: float
    margin: float
    passed: bool


def verify_network_poly_bound(
    net: NetworkParams,
    rp: AnalyticEllipseParams,
    degrees: Sequence[int],
    tol: float = 1e-10,
) -> list:
    """Check E_m(net) <= C(rho) * (sum |lambda|) * M * rho^-m per degree.

    E_m comes from the Remez route; the residual from the closed formula.
    Returns one row per degree with the margin residual - E_m.
    """
    if net.dim != 1:
        raise ValueError("network polynomial bound applies to dim 1 networks")
    if net.width and float(np.max(net.alpha_norms())) > rp.dilation * (1 + 1e-12):
        raise ValueError("network inner parameters exceed the certified dilation")
    if not net.activation.covers_ellipse(rp.rho, rp.dilation):
        raise ValueError(
            f"activation {net.activation.name!r} not analytic on the certified ellipse"
        )
    B = net.weight_l1()
    g = lambda x: eval_real(net, x)
    rows = []
    for m in degrees:
        E = remez_best_approx(g, int(m), tol=tol).error
        r = analytic_residual(int(m), B, rp)
        rows.append(PolyBoundRow(m=int(m), error=E, residual=r,
                                 margin=r - E, passed=E <= r + SLACK_TOLERANCE))
    return rows


def verify_barrier(
    f: Callable,
    act: ActivationSpec,
    sched: Schedule,
    mode: ResidualParams,
    cfg: FitConfig,
    remez_tol: float = 1e-10,
) -> BarrierReport:
    """Assemble the barrier report for a univariate target.

    Per row: E_m(f) by Remez, the fitted network error at width m under
    (B_m, L_m), and the mode's residual.  Row order follows the schedule.
    """
    rows = []
    for m, B_m, L_m in sched:
        E = remez_best_approx(f, m, tol=remez_tol).error
        _, net_err = fit_l1_constrained(f, m, ConstraintSet(B_m, L_m), cfg, act)
        residual = _residual_for(mode, m, B_m, L_m, act)
        rows.append(_make_row(m, E, net_err, residual))
    return BarrierReport(rows=tuple(rows))


# ---------------------------------------------------------------------------
# regime classification


@dataclass(frozen=True)
class RegimeResult:
    label: str
    trend: Tuple[float, ...]
    residuals: Tuple[float, ...]


def regime_classification(
    sched: Schedule,
    mode: ResidualParams,
    act: Optional[ActivationSpec] = None,
) -> RegimeResult:
    """Classify a schedule as vanishing / non-vanishing / indeterminate.

    The trend statistic is x_m = log B_m / (m / L_m) in analytic and strip
    modes and log B_m / (m / L_m)^(1/s) in Gevrey mode.  Vanishing requires
    the last-quartile mean of |x_m| to drop below half the first-quartile
    mean (or the whole sequence to sit at zero) together with a decreasing
    residual sequence; non-vanishing requires |x_m| bounded away from zero
    and a non-decreasing residual sequence.
    """
    n = len(sched)
    if n < 4:
        raise ValueError(f"schedule must have at least 4 rows, got {n}")
    s_index = mode.s if isinstance(mode, GevreyParams) else 1.0
    xs = []
    rs = []
    for m, B_m, L_m in sched:
        xs.append(math.log(B_m) / (m / L_m) ** (1.0 / s_index))
        rs.append(_residual_for(mode, m, B_m, L_m, act))
    axs = np.abs(xs)
    q = max(1, n // 4)
    q1 = float(np.mean(axs[:q]))
    q4 = float(np.mean(axs[-q:]))
    tiny = float(np.max(axs)) <= 1e-12
    r = np.asarray(rs)
    decreasing = bool(np.all(r[1:] <= r[:-1] * (1 + 1e-12)) and r[-1] < r[0])
    nondecreasing = bool(np.all(r[1:] >= r[:-1] * (1 - 1e-12)) and r[-1] > r[0])
    if (tiny or q4 < 0.5 * q1) and decreasing:
        label = "vanishing"
    elif not tiny and q4 >= 0.5 * q1 and q4 > 1e-9 and nondecreasing:
        label = "non-vanishing"
    else:
        label = "indeterminate"
    return RegimeResult(label=label, trend=tuple(xs), residuals=tuple(rs))


# ---------------------------------------------------------------------------
# Barron remainder


@dataclass(frozen=True)
class BarronCheck:
    bound: float
    measured: float
    passed: bool


def barron_remainder_check(net: NetworkParams, L: float, n_grid: int = 1001) -> BarronCheck:
    """High-frequency remainder bound: ||r_{>L}||_inf <= (weighted norm / L) sup|phi|.

    Requires a bounded activation; the measured side is the grid sup of the
    high part from the frequency split.
    """
    if net.activation.sup_real is None:
        raise ValueError(
            f"activation {net.activation.name!r} is unbounded on the real line; "
            "the remainder bound needs a bounded activation"
        )
    if not (L > 0):
        raise ValueError(f"threshold must be positive, got {L}")
    bound = barron_weighted_norm(net) / L * net.activation.sup_real
    _, high = frequency_split(net, L)
    from .network import _chebyshev_grid

    grid = _chebyshev_grid(n_grid, net.dim)
    vals = eval_real(high, grid)
    measured = float(np.max(np.abs(vals))) if np.size(vals) else 0.0
    return BarronCheck(bound=bound, measured=measured,
                       passed=measured <= bound + SLACK_TOLERANCE)


# ---------------------------------------------------------------------------
# multivariate extension (d = 2, 3)


def total_degree_exponents(m: int, d: int) -> list:
    """Exponent tuples of the total-degree-m tensor Chebyshev basis."""
    return [e for e in product(range(m + 1), repeat=d) if sum(e) <= m]


def best_poly_multid(f: Callable, m: int, grid_per_axis: int, dim: int):
    """Discrete minimax over the tensor Chebyshev grid in total degree m.

    Returns ``(exponents, coefficients, error)``.  The error is the exact
    minimax value on the grid, a lower bound for the continuous E_m over the
    cube.  Same LP backend as the univariate oracle.
    """
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    if m > 10:
        raise ValueError(f"total degree capped at 10, got {m}")
    if grid_per_axis < 2 * m + 1:
        raise ValueError(
            f"grid_per_axis must be >= 2m+1 = {2 * m + 1}, got {grid_per_axis}"
        )
    from .chebyshev import chebyshev_points

    xs = chebyshev_points(grid_per_axis)
    axes = np.meshgrid(*([xs] * dim), indexing="ij")
    pts = np.stack([a.ravel() for a in axes], axis=1)
    fv = np.asarray(f(pts), dtype=float)
    exps = total_degree_exponents(m, dim)
    if len(exps) > pts.shape[0]:
        raise ValueError(
            f"basis size {len(exps)} exceeds grid size {pts.shape[0]}"
        )
    V1 = [np.polynomial.chebyshev.chebvander(pts[:, j], m) for j in range(dim)]
    cols = []
    for e in exps:
        col = V1[0][:, e[0]]
        for j in range(1, dim):
            col = col * V1[j][:, e[j]]
        cols.append(col)
    V = np.column_stack(cols)
    n, nb = V.shape
    A = np.block([[V, -np.ones((n, 1))], [-V, -np.ones((n, 1))]])
    b = np.concatenate([fv, -fv])
    c = np.zeros(nb + 1)
    c[-1] = 1.0
    res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * (nb + 1), method="highs")
    if not res.success:
        raise RuntimeError(f"multivariate minimax LP failed: {res.message}")
    return exps, res.x[:nb], float(res.x[-1])


def verify_barrier_multid(
    f: Callable,
    act: ActivationSpec,
    sched: Schedule,
    dim: int,
    cfg: FitConfig,
    safety: float = 0.5,
    grid_per_axis: Optional[int] = None,
) -> BarrierReport:
    """Barrier report over the cube: grid lower bound for E_m^{(d)}, the
    d-dimensional fitter, and the strip residual with the inner cap scaled by
    sqrt(d) (the ridge argument <alpha, x> ranges over [-L sqrt(d), L sqrt(d)]).

    Using a grid lower bound for E only strengthens the pass condition.
    """
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    rows = []
    for m, B_m, L_m in sched:
        gpa = grid_per_axis if grid_per_axis is not None else max(2 * m + 1, 13)
        _, _, E = best_poly_multid(f, m, gpa, dim)
        _, net_err = fit_l1_constrained(
            f, m, ConstraintSet(B_m, L_m), cfg, act, dim=dim
        )
        L_eff = L_m * math.sqrt(dim)
        if isinstance(act.analyticity, StripAnalyticity):
            residual = strip_residual(m, B_m, L_eff, act, safety)
        elif act.analyticity == ENTIRE:
            rp = analytic_params_for(act, L_eff, rho=2.0)
            residual = analytic_residual(m, B_m, rp)
        else:
            raise ValueError(
                f"activation {act.name!r} must be entire or strip-analytic"
            )
        rows.append(_make_row(m, E, net_err, residual))
    return BarrierReport(rows=tuple(rows))
