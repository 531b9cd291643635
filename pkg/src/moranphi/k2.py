"""Exact minimisation of ``M(p)`` for families of two-map IFSs.

Atom ``i`` of a :class:`~moranphi.model.K2Spec` has scales ``a**alpha_i``
(left) and ``a**beta_i`` (right) and the weight vector is ``(p, 1 - p)``.
With ``d_i = beta_i - alpha_i`` sorted non-increasingly, the upper selector
at exponent ``θ`` sends the first ``j`` atoms left, so ``G(θ)`` is one of

    f_j(p) = (S_j log p + (1 - S_j) log(1 - p)) / (T_j log a),   j = 0..L,

and ``M(p)`` is the largest ``f_j`` whose index is reachable at ``p``.
Writing ``s = log(p / (1 - p))`` and ``u = θ |log a|``, atom ``i`` goes left
iff ``d_i u >= s``; index ``j`` is reachable iff some ``u >= 0`` satisfies
``d_j u >= s`` (``j >= 1``) and ``d_{j+1} u < s`` (``j < L``).  Equal
consecutive differences make some indices unreachable; those curves are
simply absent.

Each ``f_j`` decreases on ``(0, S_j]`` and increases on ``[S_j, 1)``, and
the difference of two curves has at most two roots separated by one
critical point.  :func:`min_m_algorithm` follows the top curve away from
``p = 1/2`` across these crossings until it stops at a vertex ``S_j`` or at
a crossing where the next curve turns upward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import bisect, brentq

from .errors import ConsistencyError, PreconditionError
from .gcore import g_upper
from .model import K2Spec, MoranModel, to_k2

__all__ = [
    "FjCurve",
    "TransitionPoint",
    "K2Trace",
    "K2Minimum",
    "GridMinimum",
    "ClosedForm",
    "as_k2",
    "curves",
    "f_eval",
    "feasible_indices",
    "m_of_p_k2",
    "m_grid_values",
    "min_m_algorithm",
    "min_m_grid",
    "golden_section",
    "two_ifs_closed_form",
    "fj_table",
    "fj_table_csv",
]

RESIDUAL_TOL = 1e-8
_EDGE = 1e-12
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def as_k2(obj, base: float = 0.5) -> K2Spec:
    """Accept a :class:`K2Spec` or a K = 2 IFS family."""
    if isinstance(obj, K2Spec):
        return obj
    if isinstance(obj, MoranModel):
        return to_k2(obj, base)
    raise PreconditionError(f"expected a K2Spec or a MoranModel, got {type(obj).__name__}")


@dataclass(frozen=True)
class FjCurve:
    """One candidate value of ``G`` as a function of the left weight ``p``."""

    j: int
    S: float
    T: float
    log_base: float

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        with np.errstate(divide="ignore"):
            num = self.S * np.log(p) + (1.0 - self.S) * np.log1p(-p)
        out = num / (self.T * self.log_base)
        return float(out) if out.ndim == 0 else out

    @property
    def vertex(self):
        """Minimiser ``p = S_j``."""
        return self.S

    def increasing_at(self, p):
        return p > self.S


@dataclass(frozen=True)
class TransitionPoint:
    """A crossing where the top curve changes from ``from_j`` to ``to_j``."""

    b: float
    from_j: int
    to_j: int
    side: str


@dataclass
class K2Trace:
    """Record of one run of :func:`min_m_algorithm`.

    ``curves`` lists the visited curve indices in order and ``transitions``
    the crossings taken.  ``stop`` is ``"half"``, ``"vertex"`` or
    ``"transition"``; ``fallback`` is set when the grid search had to be
    used instead.  ``p_canonical`` refers to the sorted, possibly mirrored
    orientation of the K2Spec.
    """

    direction: str = "none"
    curves: list = field(default_factory=list)
    transitions: list = field(default_factory=list)
    stop: str = ""
    p_canonical: float = 0.5
    residual: float = 0.0
    fallback: bool = False

    def to_dict(self):
        return {
            "direction": self.direction,
            "curves": list(self.curves),
            "transitions": [{"b": t.b, "from": t.from_j, "to": t.to_j, "side": t.side}
                            for t in self.transitions],
            "stop": self.stop,
            "p_canonical": self.p_canonical,
            "residual": self.residual,
            "fallback": self.fallback,
        }


class K2Minimum(NamedTuple):
    p: float
    d: float
    trace: K2Trace


class GridMinimum(NamedTuple):
    p: float
    d: float


class ClosedForm(NamedTuple):
    p: float
    d: float
    case: str


def curves(spec: K2Spec) -> list[FjCurve]:
    return [FjCurve(j, float(spec.S[j]), float(spec.T[j]), spec.log_base)
            for j in range(spec.L + 1)]


def f_eval(spec: K2Spec, j: int, p: float) -> float:
    """``f_j(p)`` in canonical orientation.

    Examples
    --------
    >>> spec = K2Spec.from_exponents(1/3, (1.1, 1.1, 1), (4.1, 3.1, 2))
    >>> round(f_eval(spec, 3, 0.5), 4)
    0.5915
    """
    if not 0 < p < 1:
        raise PreconditionError(f"p = {p} must lie in (0, 1)")
    if not 0 <= j <= spec.L:
        raise PreconditionError(f"j = {j} must lie in 0..{spec.L}")
    return curves(spec)[j](p)


def _present_masks(spec: K2Spec):
    """Reachable indices for ``p < 1/2``, ``p = 1/2`` and ``p > 1/2``."""
    d, L, N, tol = spec.diffs, spec.L, spec.N, spec.tie_tol
    j = np.arange(L + 1)
    # a strict drop d_j > d_{j+1} (or j = L) opens a window for s/u in (d_{j+1}, d_j]
    drop = np.ones(L + 1, dtype=bool)
    drop[1:L] = d[1:] < d[:-1] - tol
    drop[0] = True
    left = (j >= N) & drop
    right = np.zeros(L + 1, dtype=bool)
    right[0] = True
    right[1:] = (d > tol) & drop[1:]
    half = (j == N) | (j == L)
    return left, half, right


def feasible_indices(spec: K2Spec, p: float) -> list[int]:
    """Curve indices that the upper selector can reach at weight ``p``."""
    left, half, right = _present_masks(spec)
    mask = left if p < 0.5 else right if p > 0.5 else half
    return [int(i) for i in np.flatnonzero(mask)]


def m_grid_values(spec: K2Spec, p) -> np.ndarray:
    """Vectorised ``M`` in canonical orientation."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    left, half, right = _present_masks(spec)
    S, T = spec.S, spec.T
    with np.errstate(divide="ignore"):
        F = (np.outer(np.log(p), S) + np.outer(np.log1p(-p), 1.0 - S)) / (T * spec.log_base)
    mask = np.where((p < 0.5)[:, None], left, np.where((p > 0.5)[:, None], right, half))
    return np.where(mask, F, -np.inf).max(axis=1)


def m_of_p_k2(spec, p: float) -> float:
    """``M(p)`` for the weight vector ``(p, 1 - p)`` in the input orientation.

    Examples
    --------
    >>> spec = K2Spec.from_exponents(1/3, (1.1, 1.1, 1), (4.1, 3.1, 2))
    >>> round(m_of_p_k2(spec, 0.5), 4)
    0.5915
    """
    spec = as_k2(spec)
    if not 0 < p < 1:
        raise PreconditionError(f"p = {p} must lie in (0, 1)")
    return float(m_grid_values(spec, spec.canonical_p(p))[0])


# root finding between two curves

def _crossings(ci: FjCurve, ck: FjCurve, lo: float, hi: float, tol: float):
    """Roots of ``f_i - f_k`` in ``(lo, hi)``, ascending.

    The sign of the difference is that of ``c1 log p + c2 log(1 - p)``,
    which has a single critical point, so splitting there leaves monotone
    pieces that each hold at most one root.
    """
    c1 = ck.T * ci.S - ci.T * ck.S
    c2 = ck.T * (1.0 - ci.S) - ci.T * (1.0 - ck.S)

    def h(p):
        return c1 * math.log(p) + c2 * math.log1p(-p)

    cuts = [lo, hi]
    if c1 + c2 != 0:
        pc = c1 / (c1 + c2)
        if lo < pc < hi:
            cuts = [lo, pc, hi]
    roots = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        ha, hb = h(a), h(b)
        if ha == 0.0:
            roots.append(a)
        elif ha * hb < 0:
            roots.append(brentq(h, a, b, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200))
    return sorted(r for r in roots if lo < r < hi)


def _walk(spec, cs, start, present, direction, root_tol, trace):
    """Follow the top curve from ``p = 1/2`` in ``direction`` (-1 left, +1 right)."""
    order = [int(i) for i in np.flatnonzero(present)]
    c, p_cur = start, 0.5
    trace.curves.append(c)
    for _ in range(spec.L + 2):
        pos = order.index(c)
        nxt_pos = pos + 1 if direction < 0 else pos - 1
        nxt = order[nxt_pos] if 0 <= nxt_pos < len(order) else None
        cur = cs[c]
        b = None
        if nxt is not None:
            if direction < 0:
                roots = _crossings(cur, cs[nxt], _EDGE, p_cur, root_tol)
                roots = [r for r in roots if r < p_cur * (1 - 1e-13)]
                b = roots[-1] if roots else None
            else:
                roots = _crossings(cur, cs[nxt], p_cur, 1.0 - _EDGE, root_tol)
                roots = [r for r in roots if 1 - r < (1 - p_cur) * (1 - 1e-13)]
                b = roots[0] if roots else None
        vertex_first = b is None or (b <= cur.S if direction < 0 else b >= cur.S)
        if vertex_first:
            trace.stop = "vertex"
            return cur.S
        side = "left" if direction < 0 else "right"
        trace.transitions.append(TransitionPoint(float(b), int(c), int(nxt), side))
        turns = cs[nxt].increasing_at(b) if direction > 0 else not cs[nxt].increasing_at(b)
        if turns or b == cs[nxt].S:
            trace.stop = "transition"
            return b
        c, p_cur = nxt, b
        trace.curves.append(c)
    raise ConsistencyError("transition walk did not terminate")


def _canonical_minimum(spec: K2Spec, root_tol: float, trace: K2Trace) -> float:
    cs = curves(spec)
    left, _, right = _present_masks(spec)
    N = spec.N
    c_left = N
    c_right = int(np.flatnonzero(right).max())
    if cs[c_left].S < 0.5:
        trace.direction = "left"
        return _walk(spec, cs, c_left, left, -1, root_tol, trace)
    if cs[c_right].S > 0.5:
        trace.direction = "right"
        return _walk(spec, cs, c_right, right, +1, root_tol, trace)
    trace.curves.append(c_left)
    trace.stop = "half"
    return 0.5


def _residual(spec: K2Spec, p: float, d: float) -> float:
    model = spec.ifs_model().with_weights((p, 1.0 - p))
    return abs(g_upper(model, d).value - d)


def min_m_algorithm(spec, root_tol: float = 1e-12) -> K2Minimum:
    """Minimum of ``M`` over ``p`` by following curve crossings from ``p = 1/2``.

    At ``p = 1/2`` the top curve on the left is ``f_N`` and on the right the
    last reachable index at most ``N`` (``N - 1`` when ``d_N = 0``).  If the
    top curve rises to the right of ``1/2`` but falls to the left, the walk
    goes left (and symmetrically), otherwise the minimum is at ``1/2``.
    The returned ``p`` is the left weight in the input orientation, and
    ``d`` is re-checked as a fixed point of ``G``; a failed check or a walk
    that does not terminate falls back to :func:`min_m_grid`.

    Examples
    --------
    >>> spec = K2Spec.from_exponents(1/3, (1.1, 1.1, 1), (4.1, 3.1, 2))
    >>> round(min_m_algorithm(spec).d, 4)
    0.4138
    """
    spec = as_k2(spec)
    trace = K2Trace()
    try:
        pc = _canonical_minimum(spec, root_tol, trace)
        d = float(m_grid_values(spec, pc)[0])
        trace.residual = _residual(spec, pc, d)
        if trace.residual > RESIDUAL_TOL:
            raise ConsistencyError(f"fixed-point residual {trace.residual:.3g}")
    except ConsistencyError:
        trace.fallback = True
        pc = spec.canonical_p(min_m_grid(spec).p)
        d = float(m_grid_values(spec, pc)[0])
        trace.residual = _residual(spec, pc, d)
    trace.p_canonical = float(pc)
    return K2Minimum(float(spec.user_p(pc)), d, trace)


def golden_section(f, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200):
    """Minimise a unimodal scalar ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    a, b = lo, hi
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
    best = min((f1, x1), (f2, x2), (f(lo), lo), (f(hi), hi))
    return best[1], best[0]


def min_m_grid(spec, n_grid: int = 4001, refine_tol: float = 1e-12, eps: float = 1e-6,
               n_polish: int = 8) -> GridMinimum:
    """Dense-grid minimum of ``M`` on ``(eps, 1 - eps)`` polished by golden section.

    The grid always contains ``p = 1/2`` and the curve vertices ``S_j``,
    where kinks of ``M`` are most likely.  The ``n_polish`` lowest grid
    points are refined on either side.  ``p`` is returned in the input
    orientation.
    """
    spec = as_k2(spec)
    if n_grid < 1000:
        raise PreconditionError(f"n_grid must be >= 1000, got {n_grid}")
    grid = np.linspace(eps, 1.0 - eps, n_grid)
    extra = [0.5] + [s for s in spec.S if eps < s < 1 - eps]
    grid = np.unique(np.concatenate([grid, extra]))
    vals = m_grid_values(spec, grid)
    f = lambda p: float(m_grid_values(spec, p)[0])
    i_best = int(np.argmin(vals))
    x, fx = float(grid[i_best]), float(vals[i_best])
    # M has kinks (and a jump at 1/2), so polish each half-cell of the best few cells separately
    for i in np.argsort(vals, kind="stable")[:n_polish]:
        for lo, hi in ((grid[max(i - 1, 0)], grid[i]), (grid[i], grid[min(i + 1, len(grid) - 1)])):
            if hi > lo:
                xc, fc = golden_section(f, float(lo), float(hi), refine_tol)
                if fc < fx:
                    x, fx = xc, fc
    return GridMinimum(float(spec.user_p(x)), float(fx))


def two_ifs_closed_form(spec) -> ClosedForm:
    """Closed-form minimum of ``M`` for two equally likely IFSs.

    With canonical differences ``d_1 > d_2``:

    * ``d_1 >= 0 > d_2``: ``2 log 2 / ((alpha_1 + beta_2) |log a|)`` at ``p = 1/2``;
    * ``d_2 > 0``: the root ``θ0`` of
      ``θ = 2 log(1 + a**(d_2 θ)) / ((alpha_1 + alpha_2) |log a|)``, at
      ``p0 = 1 / (1 + a**(d_2 θ0))``;
    * ``d_2 = 0``: ``2 log 2 / ((alpha_1 + alpha_2) |log a|)`` at ``p = 1/2``.

    Examples
    --------
    >>> two_ifs_closed_form(K2Spec.from_exponents(0.5, (1, 2), (4, 1)))
    ClosedForm(p=0.5, d=1.0, case='i')
    """
    spec = as_k2(spec)
    if spec.L != 2:
        raise PreconditionError(f"closed form needs exactly two IFSs, got {spec.L}")
    if abs(spec.masses[0] - spec.masses[1]) > 1e-12:
        raise PreconditionError("closed form needs equal masses; use min_m_algorithm")
    d1, d2 = (float(x) for x in spec.diffs)
    if abs(d2) <= spec.tie_tol:
        d2 = 0.0
    if not d1 > d2 + spec.tie_tol:
        raise PreconditionError("closed form needs beta_1 - alpha_1 > beta_2 - alpha_2")
    a1, a2 = spec.alphas
    b2 = spec.betas[1]
    la = abs(spec.log_base)
    if d2 < 0:
        return ClosedForm(0.5, 2 * math.log(2) / ((a1 + b2) * la), "i")
    if d2 == 0:
        return ClosedForm(0.5, 2 * math.log(2) / ((a1 + a2) * la), "iii")
    scale = (a1 + a2) * la

    def eq(theta):
        return theta - 2 * math.log1p(spec.base ** (d2 * theta)) / scale

    theta0 = bisect(eq, 0.0, 2 * math.log(2) / scale, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                    maxiter=400)
    p0 = 1.0 / (1.0 + spec.base ** (d2 * theta0))
    return ClosedForm(float(spec.user_p(p0)), float(theta0), "ii")


def fj_table(spec, n_points: int = 1000):
    """Header and rows ``(p, f_0(p), ..., f_L(p), M(p))`` in canonical orientation.

    ``p`` runs uniformly over ``[0.001, 0.999]``.
    """
    spec = as_k2(spec)
    if n_points < 2:
        raise PreconditionError(f"n_points must be >= 2, got {n_points}")
    p = np.linspace(0.001, 0.999, n_points)
    cols = [c(p) for c in curves(spec)]
    header = ["p"] + [f"f{j}" for j in range(spec.L + 1)] + ["M"]
    table = np.column_stack([p] + cols + [m_grid_values(spec, p)])
    return header, table


def fj_table_csv(spec, n_points: int = 1000) -> str:
    """:func:`fj_table` as CSV text with 12 significant digits."""
    header, table = fj_table(spec, n_points)
    lines = [",".join(header)]
    lines += [",".join(f"{x:.12g}" for x in row) for row in table]
    return "\n".join(lines) + "\n"
