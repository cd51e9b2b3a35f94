"""Constrained single-hidden-layer ridge networks.

A network is x -> sum_k lambda_k phi(<alpha_k, x>) on [-1, 1]^d, without bias
terms (the data model has no bias slot).  Constraint sets cap the output
weights in l1 norm and the inner parameters in Euclidean norm; the fitter
only ever emits networks satisfying its constraint set, and its reported
error is an upper bound on the infimum over the class, which is all the
barrier certificates need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .activations import ActivationSpec, get_activation
from .ellipse import BernsteinEllipse, ellipse_norm

_SLACK = 1.0 + 1e-12


@dataclass(frozen=True)
class NetworkParams:
    """Output weights, inner parameters, activation reference and dimension.

    ``alphas`` has shape (m,) for dim 1 and (m, dim) for dim 2 or 3.  The
    zero network (m = 0) is a valid sentinel: it evaluates to 0 everywhere
    and satisfies every constraint set; fitted networks always have m >= 1.
    """

    lambdas: np.ndarray
    alphas: np.ndarray
    activation: ActivationSpec
    dim: int = 1

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.lambdas, dtype=float))
        al = np.asarray(self.alphas, dtype=float)
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.dim == 1:
            al = np.atleast_1d(al)
            if al.ndim != 1:
                raise ValueError("alphas must be one scalar per unit for dim 1")
        else:
            al = np.atleast_2d(al) if al.size else al.reshape(0, self.dim)
            if al.ndim != 2 or (al.size and al.shape[1] != self.dim):
                raise ValueError(f"alphas must have shape (m, {self.dim})")
        if lam.shape[0] != al.shape[0]:
            raise ValueError(
                f"lambdas ({lam.shape[0]}) and alphas ({al.shape[0]}) differ in length"
            )
        if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(al))):
            raise ValueError("network parameters must be finite")
        lam = lam.copy()
        al = al.copy()
        lam.flags.writeable = False
        al.flags.writeable = False
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "alphas", al)

    @property
    def width(self) -> int:
        return self.lambdas.shape[0]

    def weight_l1(self) -> float:
        return float(np.sum(np.abs(self.lambdas)))

    def alpha_norms(self) -> np.ndarray:
        if self.dim == 1:
            return np.abs(self.alphas)
        if self.width == 0:
            return np.zeros(0)
        return np.linalg.norm(self.alphas, axis=1)


def zero_network(activation: ActivationSpec, dim: int = 1) -> NetworkParams:
    """The explicit width-0 sentinel."""
    alphas = np.zeros(0) if dim == 1 else np.zeros((0, dim))
    return NetworkParams(np.zeros(0), alphas, activation, dim)


@dataclass(frozen=True)
class ConstraintSet:
    """l1 budget on output weights and Euclidean cap on inner parameters."""

    B: float
    L: float

    def __post_init__(self):
        if not (self.B > 0 and np.isfinite(self.B)):
            raise ValueError(f"budget B must be positive, got {self.B}")
        if not (self.L > 0 and np.isfinite(self.L)):
            raise ValueError(f"cap L must be positive, got {self.L}")

    def satisfies(self, net: NetworkParams) -> bool:
        if net.width == 0:
            return True
        ok_l1 = net.weight_l1() <= self.B * _SLACK
        ok_cap = float(np.max(net.alpha_norms())) <= self.L * _SLACK
        return bool(ok_l1 and ok_cap)


@dataclass(frozen=True)
class StepRule:
    """Projected-gradient step schedule: initial step and backtracking factor."""

    initial_step: float = 0.5
    backtrack: float = 0.5
    grow: float = 1.25

    def __post_init__(self):
        if not (self.initial_step > 0):
            raise ValueError("initial step must be positive")
        if not (0 < self.backtrack < 1):
            raise ValueError("backtracking factor must lie in (0, 1)")
        if not (self.grow >= 1):
            raise ValueError("growth factor must be >= 1")


@dataclass(frozen=True)
class FitConfig:
    """Fitter configuration.  Grid sizes are per-axis point counts.

    The least-squares surrogate is minimized on a Chebyshev grid of
    ``grid_size`` points per axis; the reported error is the sup over a
    ``report_grid_size``-per-axis grid (at least 4x finer).
    """

    n_restarts: int = 16
    max_iters: int = 2000
    grid_size: int = 257
    report_grid_size: int = 1028
    seed: int = 42
    step_rule: StepRule = field(default_factory=StepRule)

    def __post_init__(self):
        if self.n_restarts < 1:
            raise ValueError("need at least one restart")
        if self.max_iters < 1:
            raise ValueError("need at least one iteration")
        if self.report_grid_size < 4 * self.grid_size:
            raise ValueError(
                f"report grid ({self.report_grid_size}) must be >= 4x the fit "
                f"grid ({self.grid_size})"
            )
        if not (0 <= self.seed < 2 ** 64):
            raise ValueError("seed must fit in 64 unsigned bits")


# ---------------------------------------------------------------------------
# evaluation


def _inner_products(net: NetworkParams, x: np.ndarray) -> np.ndarray:
    """<alpha_k, x_i> as an (npoints, width) array."""
    if net.dim == 1:
        return np.outer(x, net.alphas)
    return x @ net.alphas.T


def eval_real(net: NetworkParams, x):
    """Evaluate the network at real points of the cube.

    ``x`` is a scalar or (n,) array for dim 1, and a (d,) or (n, d) array for
    dim >= 2.
    """
    if net.dim == 1:
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        scalar = np.isscalar(x) or np.asarray(x).ndim == 0
    else:
        xa = np.asarray(x, dtype=float)
        scalar = xa.ndim == 1
        xa = np.atleast_2d(xa)
    if net.width == 0:
        out = np.zeros(xa.shape[0])
    else:
        out = net.activation.eval_real(_inner_products(net, xa)) @ net.lambdas
    return float(out[0]) if scalar else out


def eval_complex(net: NetworkParams, z, e: BernsteinEllipse):
    """Holomorphic extension sum_k lambda_k phi(alpha_k z) on the base ellipse.

    Validates the certificate before evaluating: dim 1 only, every |alpha_k|
    within the ellipse dilation, z inside the closed undilated E_rho, and the
    activation analytic on the dilated ellipse.
    """
    if net.dim != 1:
        raise ValueError("complex evaluation is defined for dim 1 networks only")
    if net.width:
        caps = np.abs(net.alphas)
        if float(np.max(caps)) > e.dilation * _SLACK:
            k = int(np.argmax(caps))
            raise ValueError(
                f"alpha_{k} = {net.alphas[k]!r} exceeds the ellipse dilation {e.dilation}"
            )
    if not net.activation.covers_ellipse(e.rho, e.dilation):
        raise ValueError(
            f"activation {net.activation.name!r} is not certified analytic on "
            f"{e.dilation} * E_{e.rho}"
        )
    base = BernsteinEllipse(e.rho, 1.0)
    za = np.asarray(z, dtype=complex)
    if not np.all(base.contains(za)):
        raise ValueError(f"argument outside the closed ellipse E_{e.rho}")
    if net.width == 0:
        out = np.zeros_like(za)
    else:
        args = za[..., None] * net.alphas if za.ndim else za * net.alphas
        out = net.activation.eval_complex(args) @ net.lambdas
    return complex(out) if za.ndim == 0 else out


def holo_sup_bound(net: NetworkParams, e: BernsteinEllipse) -> float:
    """l1-weighted activation sup norm: (sum |lambda_k|) * M_{rho,L}(phi).

    Dominates the sup of |net| over the base ellipse whenever the network's
    inner parameters respect the dilation (triangle inequality termwise).
    """
    if net.dim != 1:
        raise ValueError("holomorphic bound is defined for dim 1 networks only")
    if net.width:
        caps = np.abs(net.alphas)
        if float(np.max(caps)) > e.dilation * _SLACK:
            k = int(np.argmax(caps))
            raise ValueError(
                f"alpha_{k} = {net.alphas[k]!r} exceeds the ellipse dilation {e.dilation}"
            )
    if not net.activation.covers_ellipse(e.rho, e.dilation):
        raise ValueError(
            f"activation {net.activation.name!r} is not certified analytic on "
            f"{e.dilation} * E_{e.rho}"
        )
    total = net.weight_l1()
    if total == 0.0:
        return 0.0
    return total * ellipse_norm(net.activation.eval_complex, e)


# ---------------------------------------------------------------------------
# l1 projection


def l1_ball_projection(v, B: float) -> np.ndarray:
    """Euclidean projection of v onto the l1 ball of radius B.

    Sort-based threshold search (Duchi et al.); the threshold index is the
    largest valid one.  Signs are preserved componentwise and interior points
    come back unchanged.
    """
    if not (B > 0):
        raise ValueError(f"radius must be positive, got {B}")
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot project a non-finite vector")
    a = np.abs(v)
    if float(a.sum()) <= B:
        return v.copy()
    u = np.sort(a)[::-1]
    cs = np.cumsum(u)
    j = np.arange(1, u.size + 1)
    cand = u - (cs - B) / j
    rho = int(np.max(np.nonzero(cand > 0)[0])) + 1
    theta = (cs[rho - 1] - B) / rho
    return np.sign(v) * np.maximum(a - theta, 0.0)


def _cap_alphas(al: np.ndarray, L: float, dim: int) -> np.ndarray:
    if dim == 1:
        return np.clip(al, -L, L)
    norms = np.linalg.norm(al, axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.minimum(1.0, L / np.where(norms > 0, norms, 1.0))
    return al * scale


def _chebyshev_grid(n: int, dim: int) -> np.ndarray:
    from .chebyshev import chebyshev_points

    xs = chebyshev_points(n)
    if dim == 1:
        return xs
    axes = np.meshgrid(*([xs] * dim), indexing="ij")
    return np.stack([a.ravel() for a in axes], axis=1)


def fit_l1_constrained(
    f: Callable,
    m: int,
    cs: ConstraintSet,
    cfg: FitConfig,
    activation: ActivationSpec,
    dim: int = 1,
) -> Tuple[NetworkParams, float]:
    """Fit a width-m network to ``f`` under ``cs`` by projected gradient descent.

    Least-squares surrogate on a Chebyshev grid, l1-ball projection of the
    output weights and norm clipping of the inner parameters after every
    step, backtracking line search, multi-start (restart r uses seed + r).
    Restart 0 starts from zero output weights (the empty-model basin, which
    keeps trivially-representable targets exact); later restarts draw
    uniform feasible initializers.  Returns the best restart by (sup-norm
    error on the report grid, restart index); the result always satisfies
    ``cs``.  Poor fits are valid outputs: the reported error upper bounds
    the infimum over the class, which is the only property consumers rely
    on.
    """
    if m < 1:
        raise ValueError(f"width must be >= 1, got {m}")
    phi = activation.eval_real
    dphi = activation.deriv_real
    X = _chebyshev_grid(cfg.grid_size, dim)
    Xr = _chebyshev_grid(cfg.report_grid_size, dim)
    fx = np.asarray(f(X), dtype=float)
    fr = np.asarray(f(Xr), dtype=float)
    npts = fx.shape[0]
    B, L = cs.B, cs.L
    rule = cfg.step_rule

    best: Optional[Tuple[float, int, np.ndarray, np.ndarray]] = None
    for restart in range(cfg.n_restarts):
        rng = np.random.default_rng((cfg.seed + restart) % 2 ** 64)
        lam = rng.uniform(-1.0, 1.0, m)
        if restart == 0:
            lam = np.zeros(m)
        s = float(np.sum(np.abs(lam)))
        if s > B:
            lam *= B / s
        if dim == 1:
            al = rng.uniform(-L, L, m)
        else:
            al = _cap_alphas(rng.uniform(-L, L, (m, dim)), L, dim)
        step = rule.initial_step
        T = np.outer(X, al) if dim == 1 else X @ al.T
        P = phi(T)
        res = P @ lam - fx
        J = float(res @ res) / npts
        for _ in range(cfg.max_iters):
            D = dphi(T)
            glam = (2.0 / npts) * (P.T @ res)
            if dim == 1:
                gal = (2.0 / npts) * ((D * X[:, None]).T @ res) * lam
            else:
                gal = (2.0 / npts) * ((D * res[:, None]).T @ X) * lam[:, None]
            accepted = False
            for _bt in range(40):
                lam2 = l1_ball_projection(lam - step * glam, B)
                al2 = _cap_alphas(al - step * gal, L, dim)
                T2 = np.outer(X, al2) if dim == 1 else X @ al2.T
                P2 = phi(T2)
                res2 = P2 @ lam2 - fx
                J2 = float(res2 @ res2) / npts
                if J2 <= J:
                    accepted = True
                    break
                step *= rule.backtrack
            if not accepted:
                break
            move = max(float(np.max(np.abs(lam2 - lam))), float(np.max(np.abs(al2 - al))))
            decrease = J - J2
            lam, al, T, P, res, J = lam2, al2, T2, P2, res2, J2
            step *= rule.grow
            if move < 1e-14 and decrease < 1e-18:
                break
        Tr = np.outer(Xr, al) if dim == 1 else Xr @ al.T
        err = float(np.max(np.abs(phi(Tr) @ lam - fr)))
        if best is None or err < best[0]:
            best = (err, restart, lam, al)

    err, _, lam, al = best
    lam = l1_ball_projection(lam, B)
    al = _cap_alphas(al, L, dim)
    net = NetworkParams(lam, al, activation, dim)
    if not cs.satisfies(net):
        raise RuntimeError("fitter produced an infeasible network; this is a bug")
    return net, err


# ---------------------------------------------------------------------------
# network functionals


def barron_weighted_norm(net: NetworkParams) -> float:
    """Weighted variation sum_k |lambda_k| * ||alpha_k||."""
    if net.width == 0:
        return 0.0
    return float(np.sum(np.abs(net.lambdas) * net.alpha_norms()))


def frequency_split(net: NetworkParams, L: float) -> Tuple[NetworkParams, NetworkParams]:
    """Split into low (||alpha_k|| <= L) and high (rest) parts.

    The parts reconstruct the network pointwise; an empty part is the
    explicit zero network.
    """
    if not (L > 0):
        raise ValueError(f"threshold must be positive, got {L}")
    norms = net.alpha_norms()
    low_mask = norms <= L

    def _part(mask):
        if not np.any(mask):
            return zero_network(net.activation, net.dim)
        return NetworkParams(
            net.lambdas[mask],
            net.alphas[mask],
            net.activation,
            net.dim,
        )

    return _part(low_mask), _part(~low_mask)


def gevrey_derivative_bound(cs: ConstraintSet, act: ActivationSpec, n: int) -> float:
    """Derivative bound C * B * (R * L)^n * (n!)^s for constrained networks.

    Requires Gevrey metadata (C, R, s) on the activation.
    """
    if act.gevrey is None:
        raise ValueError(f"activation {act.name!r} carries no Gevrey metadata")
    if n < 0:
        raise ValueError(f"derivative order must be >= 0, got {n}")
    C, R, s = act.gevrey
    return float(C * cs.B * (R * cs.L) ** n * math.factorial(n) ** s)


# ---------------------------------------------------------------------------
# serialization


def save_network(net: NetworkParams, cs: ConstraintSet, path) -> None:
    """Write the plain-text record: header `dim m activation B L`, then one
    `lambda alpha_1 .. alpha_d` line per unit, 17 significant digits."""
    lines = [
        f"{net.dim} {net.width} {net.activation.name} {cs.B:.17g} {cs.L:.17g}"
    ]
    al = net.alphas if net.dim > 1 else net.alphas.reshape(-1, 1)
    for k in range(net.width):
        row = " ".join(f"{v:.17g}" for v in al[k])
        lines.append(f"{net.lambdas[k]:.17g} {row}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_network(path) -> Tuple[NetworkParams, ConstraintSet]:
    """Read a record written by :func:`save_network`."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"empty network record: {path}")
    head = lines[0].split()
    if len(head) != 5:
        raise ValueError(f"malformed header {lines[0]!r}")
    dim, m = int(head[0]), int(head[1])
    act = get_activation(head[2])
    cs = ConstraintSet(float(head[3]), float(head[4]))
    if len(lines) - 1 != m:
        raise ValueError(f"expected {m} unit lines, found {len(lines) - 1}")
    lams = np.zeros(m)
    alphas = np.zeros(m) if dim == 1 else np.zeros((m, dim))
    for k, ln in enumerate(lines[1:]):
        parts = [float(tok) for tok in ln.split()]
        if len(parts) != 1 + dim:
            raise ValueError(f"unit line {k} has {len(parts)} fields, expected {1 + dim}")
        lams[k] = parts[0]
        if dim == 1:
            alphas[k] = parts[1]
        else:
            alphas[k] = parts[1:]
    if m == 0:
        return zero_network(act, dim), cs
    return NetworkParams(lams, alphas, act, dim), cs
