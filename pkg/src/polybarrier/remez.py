"""Best uniform polynomial approximation on [-1, 1].

Two independent routes are provided: a Remez multi-point exchange
(`remez_best_approx`) and an exact discrete minimax solved as a linear
program on a caller-supplied grid (`discrete_minimax`).  The LP route is the
oracle used to cross-check the exchange; the two share no iteration logic.

Even and odd targets are detected and reduced to half-degree problems via
T_2k(x) = T_k(2x^2 - 1); without the reduction the exchange can cycle on
parity-degenerate references (the optimum then carries m+3 equioscillation
points, one more than a reference can hold).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog, minimize_scalar

from .chebyshev import ChebyshevSeries, chebyshev_points, clenshaw

_EPS = np.finfo(float).eps


class RemezConvergenceError(RuntimeError):
    """Exchange failed to level within the iteration cap.

    Carries the last reference set and the remaining gap between the largest
    residual and the levelled error, for diagnosis.
    """

    def __init__(self, message, reference=None, gap=None):
        super().__init__(message)
        self.reference = None if reference is None else np.asarray(reference)
        self.gap = gap


@dataclass(frozen=True)
class EquioscillationSolution:
    """Best-approximation certificate: polynomial, error and alternation set.

    ``alternation_signs`` records the residual sign pattern at the
    alternation points.  For degenerate targets whose residual is machine
    zero (exactly representable polynomials) the pattern is the formal
    alternating one; the residual magnitudes are then below the solver floor
    and carry no sign information.
    """

    polynomial: ChebyshevSeries
    error: float
    alternation_points: np.ndarray
    alternation_signs: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.alternation_points, dtype=float)
        sgn = np.asarray(self.alternation_signs, dtype=float)
        if pts.size != sgn.size:
            raise ValueError("points and signs must have equal length")
        object.__setattr__(self, "alternation_points", pts)
        object.__setattr__(self, "alternation_signs", sgn)


def _as_vectorized(f: Callable) -> Callable:
    """Wrap f so it maps float arrays to float arrays.

    Whether f accepts arrays is probed once on the first call; scalar-only
    callables are evaluated in a loop from then on.
    """
    mode = {"array": None}

    def loop(x):
        return np.array([float(f(float(t))) for t in np.atleast_1d(x)])

    def fv(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if mode["array"] is None:
            import warnings

            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("error", DeprecationWarning)
                    y = np.asarray(f(x), dtype=float)
                mode["array"] = y.shape == x.shape
                if mode["array"]:
                    return y
            except Exception:
                mode["array"] = False
        if mode["array"]:
            y = np.asarray(f(x), dtype=float)
            if y.shape == x.shape:
                return y
            mode["array"] = False
        return loop(x)

    return fv


# ---------------------------------------------------------------------------
# exchange machinery


def _candidate_extrema(r: np.ndarray) -> list:
    """Grid indices of endpoints plus interior slope sign changes."""
    idx = [0]
    ds = np.sign(np.diff(r))
    last = 0.0
    for i in range(1, len(r) - 1):
        s_prev = ds[i - 1] if ds[i - 1] != 0 else last
        if ds[i - 1] != 0:
            last = ds[i - 1]
        if s_prev != 0 and ds[i] != 0 and ds[i] != s_prev:
            idx.append(i)
    idx.append(len(r) - 1)
    return sorted(set(idx))


def _alternating_candidates(px, pr, zfloor):
    """Collapse same-sign runs keeping the largest |r| per run.

    Residuals at or below ``zfloor`` are sign wildcards: they adopt whatever
    sign extends the alternation.  This is what makes references touching a
    machine-zero residual (interpolation-degenerate steps) usable.
    """
    signs = [0.0 if abs(v) <= zfloor else float(np.sign(v)) for v in pr]
    first = next((i for i, s in enumerate(signs) if s != 0), None)
    if first is None:
        return np.asarray(px), np.asarray(pr)
    for i in range(first - 1, -1, -1):
        signs[i] = -signs[i + 1]
    for i in range(first + 1, len(signs)):
        if signs[i] == 0:
            signs[i] = -signs[i - 1]
    kx, kr, ks = [], [], []
    for x, v, s in zip(px, pr, signs):
        if ks and ks[-1] == s:
            if abs(v) > abs(kr[-1]):
                kx[-1], kr[-1] = x, v
        else:
            kx.append(x)
            kr.append(v)
            ks.append(s)
    return np.asarray(kx), np.asarray(kr)


def _select_window(xs, rs, target):
    """Pick the length-``target`` consecutive window holding the global max
    and maximizing the smallest |r|; None if too few candidates."""
    n = len(xs)
    if n < target:
        return None
    gmax = int(np.argmax(np.abs(rs)))
    best = None
    for s in range(n - target + 1):
        if not (s <= gmax < s + target):
            continue
        lo = float(np.min(np.abs(rs[s:s + target])))
        if best is None or lo > best[0]:
            best = (lo, s)
    if best is None:
        best = max(
            ((float(np.min(np.abs(rs[s:s + target]))), s) for s in range(n - target + 1)),
            key=lambda t: t[0],
        )
    s = best[1]
    return xs[s:s + target], rs[s:s + target]


def _single_point_exchange(ref, rref, xstar, rstar):
    """First-algorithm exchange of one point; keeps signs alternating."""
    ref = list(ref)
    rref = list(rref)
    s_star = 1.0 if rstar >= 0 else -1.0
    signs = [1.0 if v >= 0 else -1.0 for v in rref]
    if xstar < ref[0]:
        if s_star == signs[0]:
            ref[0], rref[0] = xstar, rstar
        else:
            ref.insert(0, xstar)
            rref.insert(0, rstar)
            ref.pop()
            rref.pop()
    elif xstar > ref[-1]:
        if s_star == signs[-1]:
            ref[-1], rref[-1] = xstar, rstar
        else:
            ref.append(xstar)
            rref.append(rstar)
            ref.pop(0)
            rref.pop(0)
    else:
        i = int(np.searchsorted(ref, xstar))
        if s_star == signs[i - 1]:
            ref[i - 1], rref[i - 1] = xstar, rstar
        else:
            ref[i], rref[i] = xstar, rstar
    return np.asarray(ref), np.asarray(rref)


def _remez_core(g, K, w=None, tol=1e-10, max_iter=100, oversample=32):
    """Weighted exchange: min over deg-K q of max |w(u) (g(u) - q(u))|.

    Returns (coeffs, error, reference, iterations).  The reference holds the
    K+2 alternation points of the weighted residual.
    """
    dense = chebyshev_points(oversample * (K + 1) + 1)
    gdense = g(dense)
    wdense = w(dense) if w is not None else np.ones_like(dense)
    scale = max(1.0, float(np.max(np.abs(wdense * gdense))))
    floor = 64 * _EPS * scale
    ref = -np.cos(np.pi * np.arange(K + 2) / (K + 1))

    def res_scalar(x, q):
        wv = float(w(np.array([x]))[0]) if w is not None else 1.0
        return wv * (float(g(np.array([x]))[0]) - clenshaw(q, x))

    gap_hist = []
    single_mode = False
    max_res = np.inf
    h = 0.0
    for it in range(max_iter):
        wr = w(ref) if w is not None else np.ones_like(ref)
        A = np.column_stack(
            [np.polynomial.chebyshev.chebvander(ref, K) * wr[:, None],
             (-1.0) ** np.arange(ref.size)]
        )
        sol = np.linalg.solve(A, wr * g(ref))
        q, h = sol[:K + 1], float(sol[K + 1])
        R = wdense * (gdense - clenshaw(q, dense))
        px, pr = [], []
        for j in _candidate_extrema(R):
            if j == 0 or j == len(dense) - 1:
                px.append(dense[j])
                pr.append(R[j])
                continue
            lo, hi = dense[j - 1], dense[j + 1]
            sgn = 1.0 if R[j] >= 0 else -1.0
            opt = minimize_scalar(
                lambda x: -sgn * res_scalar(x, q),
                bounds=(lo, hi), method="bounded", options={"xatol": 1e-14},
            )
            x0 = float(opt.x)
            v0 = res_scalar(x0, q)
            if abs(v0) >= abs(R[j]):
                px.append(x0)
                pr.append(v0)
            else:  # keep the grid point when polishing did not improve
                px.append(dense[j])
                pr.append(R[j])
        order = np.argsort(px)
        px = np.asarray(px)[order]
        pr = np.asarray(pr)[order]
        max_res = float(np.max(np.abs(pr)))
        if max_res <= floor:
            return q, max_res, ref, it + 1
        cx, cr = _alternating_candidates(px, pr, zfloor=floor)
        if max_res - abs(h) <= tol * max_res + floor:
            sel = _select_window(cx, cr, K + 2)
            return q, max_res, (sel[0] if sel is not None else ref), it + 1
        gap_hist.append(max_res - abs(h))
        if len(gap_hist) >= 8 and gap_hist[-1] > 0.5 * gap_hist[-8]:
            single_mode = True  # multi-point exchange is cycling
        sel = None if single_mode else _select_window(cx, cr, K + 2)
        if sel is None:
            wr = w(ref) if w is not None else np.ones_like(ref)
            rr = wr * (g(ref) - clenshaw(q, ref))
            gi = int(np.argmax(np.abs(pr)))
            ref, _ = _single_point_exchange(ref, rr, float(px[gi]), float(pr[gi]))
        else:
            ref = sel[0]
    raise RemezConvergenceError(
        f"no convergence after {max_iter} iterations (gap {max_res - abs(h):.3e})",
        reference=ref, gap=max_res - abs(h),
    )


# ---------------------------------------------------------------------------
# parity reductions


def _half_x(u):
    return np.sqrt(np.clip((1.0 + np.asarray(u, dtype=float)) / 2.0, 0.0, 1.0))


def _mirror_certificate(xpos, rvals, parity, target, err, floor):
    """Mirror a half-interval alternation set onto [-1, 1] and trim."""
    pts = {}
    for x, r in zip(xpos, rvals):
        pts[float(x)] = float(r)
        pts[float(-x)] = float(parity * r)
    xs = np.array(sorted(pts))
    rs = np.array([pts[x] for x in xs])
    cx, cr = _alternating_candidates(list(xs), list(rs), zfloor=floor)
    sel = _select_window(cx, cr, target)
    if sel is not None:
        return sel[0], sel[1]
    if err <= max(floor, 1e-12):
        # machine-zero residual: formal certificate on Chebyshev extrema
        pts = -np.cos(np.pi * np.arange(target) / (target - 1))
        return pts, np.zeros(target)
    raise RemezConvergenceError(
        f"parity-reduced certificate has {len(cx)} < {target} alternations"
    )


def remez_best_approx(f: Callable, m: int, tol: float = 1e-10,
                      max_iter: int = 100, oversample: int = 32) -> EquioscillationSolution:
    """Best uniform degree-<=m polynomial approximation of ``f`` on [-1, 1].

    Multi-point Remez exchange initialized at the Chebyshev extrema of degree
    m+1, with residual extrema located on a dense grid of ``oversample*(m+1)+1``
    Chebyshev points and polished by derivative-free bounded search.
    Converges when (max residual - levelled error) <= tol * max residual, up
    to a roundoff floor proportional to the sampled scale of ``f``.

    Raises :class:`RemezConvergenceError` with the last reference and gap if
    the cap is hit.
    """
    if m < 0:
        raise ValueError(f"degree must be >= 0, got {m}")
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    fv = _as_vectorized(f)
    probe = chebyshev_points(oversample * (m + 1) + 1)
    fp = fv(probe)
    if not np.all(np.isfinite(fp)):
        k = int(np.argmax(~np.isfinite(fp)))
        raise ValueError(f"target not finite at x = {probe[k]!r}")
    scale = max(1.0, float(np.max(np.abs(fp))))
    sym_tol = 8 * _EPS * scale
    is_even = float(np.max(np.abs(fp - fp[::-1]))) <= sym_tol
    is_odd = float(np.max(np.abs(fp + fp[::-1]))) <= sym_tol
    floor = 64 * _EPS * scale
    if m >= 1 and is_even and not is_odd:
        coeffs, err, pts, rs = _remez_even(fv, m, tol, max_iter, oversample, floor)
    elif m >= 1 and is_odd and not is_even:
        coeffs, err, pts, rs = _remez_odd(fv, m, tol, max_iter, oversample, floor)
    else:
        q, err, ref, _ = _remez_core(fv, m, None, tol, max_iter, oversample)
        coeffs = q
        pts = np.asarray(ref)
        rs = fv(pts) - clenshaw(q, pts)
    signs = _formal_signs(rs, floor)
    return EquioscillationSolution(
        polynomial=ChebyshevSeries(coeffs),
        error=float(err),
        alternation_points=pts,
        alternation_signs=signs,
    )


def _formal_signs(rs, floor):
    """Residual signs with machine-zero entries filled by alternation."""
    rs = np.asarray(rs, dtype=float)
    signs = np.where(np.abs(rs) <= floor, 0.0, np.sign(rs))
    nz = np.nonzero(signs)[0]
    if nz.size == 0:
        signs = (-1.0) ** np.arange(rs.size)
    else:
        first = nz[0]
        for i in range(first - 1, -1, -1):
            signs[i] = -signs[i + 1]
        for i in range(first + 1, signs.size):
            if signs[i] == 0:
                signs[i] = -signs[i - 1]
    return signs


def _remez_even(fv, m, tol, max_iter, oversample, floor):
    K = m // 2
    g = lambda u: fv(_half_x(u))
    q, err, uref, _ = _remez_core(g, K, None, tol, max_iter, oversample)
    coeffs = np.zeros(m + 1)
    coeffs[0:2 * K + 1:2] = q
    uref = np.asarray(uref)
    rvals = g(uref) - clenshaw(q, uref)
    pts, rs = _mirror_certificate(_half_x(uref), rvals, +1, m + 2, err, floor)
    return coeffs, err, pts, rs


def _remez_odd(fv, m, tol, max_iter, oversample, floor):
    K = (m - 1) // 2 if m % 2 == 1 else m // 2 - 1
    if K < 0:  # m == 0 for an odd target: best constant is the levelled 0
        q, err, ref, _ = _remez_core(fv, m, None, tol, max_iter, oversample)
        pts = np.asarray(ref)
        return q, err, pts, fv(pts) - clenshaw(q, pts)

    def g(u):
        x = _half_x(u)
        out = np.empty_like(x)
        small = x < 1e-12
        out[~small] = fv(x[~small]) / x[~small]
        if np.any(small):
            out[small] = fv(np.full(int(np.sum(small)), 1e-8))[0] / 1e-8
        return out

    q, err, uref, _ = _remez_core(g, K, _half_x, tol, max_iter, oversample)
    # p(x) = x q(2x^2-1) and x T_k(2x^2-1) = (T_{2k+1} + T_{|2k-1|}) / 2
    coeffs = np.zeros(m + 1)
    for k, b in enumerate(q):
        coeffs[2 * k + 1] += b / 2.0
        coeffs[abs(2 * k - 1)] += b / 2.0
    uref = np.asarray(uref)
    rvals = _half_x(uref) * (g(uref) - clenshaw(q, uref))
    pts, rs = _mirror_certificate(_half_x(uref), rvals, -1, m + 2, err, floor)
    return coeffs, err, pts, rs


# ---------------------------------------------------------------------------
# discrete minimax oracle (LP)


def discrete_minimax(f: Callable, m: int, grid: Sequence[float]):
    """Exact minimax fit on a finite grid, solved as a linear program.

    Returns ``(ChebyshevSeries, error)`` minimizing max over the grid of
    |f - p| among polynomials of degree <= m.  The value lower-bounds the
    continuous E_m(f) on [-1, 1].  Independent of the Remez path by
    construction (HiGHS simplex/interior LP on the grid).
    """
    grid = np.unique(np.asarray(grid, dtype=float))
    if grid.size < m + 2:
        raise ValueError(
            f"grid has {grid.size} distinct points; need at least {m + 2}"
        )
    fv = _as_vectorized(f)
    fvals = fv(grid)
    if not np.all(np.isfinite(fvals)):
        k = int(np.argmax(~np.isfinite(fvals)))
        raise ValueError(f"target not finite at grid point {grid[k]!r}")
    V = np.polynomial.chebyshev.chebvander(grid, m)
    n = grid.size
    A = np.block([[V, -np.ones((n, 1))], [-V, -np.ones((n, 1))]])
    b = np.concatenate([fvals, -fvals])
    c = np.zeros(m + 2)
    c[-1] = 1.0
    res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * (m + 2), method="highs")
    if not res.success:
        raise RuntimeError(f"discrete minimax LP failed: {res.message}")
    return ChebyshevSeries(res.x[:m + 1]), float(res.x[-1])


def decay_rate_fit(errors) -> float:
    """Geometric decay rate of an error sequence: exp(-slope of log E vs m).

    ``errors`` is a sequence of (m, E_m) pairs with E_m > 0; at least three
    entries are required.  Non-monotone data is accepted; the fit is a
    diagnostic and the result can dip below 1 for non-decaying input.
    """
    pairs = [(int(m), float(e)) for m, e in errors if e > 0]
    if len(pairs) < 3:
        raise ValueError(f"need at least 3 positive entries, got {len(pairs)}")
    ms = np.array([p[0] for p in pairs], dtype=float)
    es = np.array([p[1] for p in pairs])
    slope = np.polyfit(ms, np.log(es), 1)[0]
    return float(np.exp(-slope))
