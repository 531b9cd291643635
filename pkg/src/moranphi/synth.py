"""Weights that realise prescribed measure dimensions.

Two settings are covered.

*Dependent weights.*  Each IFS atom gets its own weight vector, chosen as a
function of its scales.  Any upper dimension ``d >= D`` and any lower
dimension ``d in (0, D]`` is reached exactly, either by the power rule
``p(j) = a(j)**t / sum_i a(i)**t`` at a suitable ``t`` or by putting mass
``q`` on the largest (upper) or smallest (lower) child.

*Independent weights.*  One weight vector ``p`` is used regardless of the
IFS.  Then ``M(p) = updim`` is bounded below by ``D`` with a strict gap
unless the natural weights ``a(i)**D / sum a**D`` coincide across IFS atoms.
:func:`min_updim_single` and :func:`max_lowdim_single` search the simplex
for the extremal values and :func:`detect_gap` decides the gap exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

import numpy as np
from scipy.optimize import bisect
from scipy.special import comb, logsumexp

from . import dims
from .errors import ConsistencyError, PreconditionError
from .model import MoranModel, WeightAtom, model_to_document, require_valid

__all__ = [
    "SynthesizedWeights",
    "GapVerdict",
    "SingleOptimum",
    "synth_upper_dependent",
    "synth_lower_dependent",
    "m_of_p",
    "mprime_of_p",
    "min_updim_single",
    "max_lowdim_single",
    "attain_updim_single",
    "attain_lowdim_single",
    "natural_weights",
    "detect_gap",
]

GAP_TOL = 1e-12
WEIGHT_FLOOR = 1e-9
VERIFY_TOL = 1e-6
MAX_GRID_POINTS = 200_000


@dataclass(frozen=True)
class SynthesizedWeights:
    """Constructed weights together with the dimension they achieve.

    ``weights`` holds one vector per IFS atom (dependent constructions) or a
    single vector (independent constructions).  ``t`` is the exponent of the
    power rule and ``q`` the concentrated mass, whichever applies.
    """

    weights: tuple
    target: float
    achieved: float
    mechanism: str
    model: MoranModel
    t: float | None = None
    q: float | None = None

    def to_model(self) -> MoranModel:
        return self.model

    def to_dict(self):
        return {
            "target": self.target,
            "achieved": self.achieved,
            "mechanism": self.mechanism,
            "t": self.t,
            "q": self.q,
            "weights": [list(w) for w in self.weights] if self.weights and
            isinstance(self.weights[0], tuple) else list(self.weights),
            "model": model_to_document(self.model),
        }


@dataclass(frozen=True)
class GapVerdict:
    """Whether independent weights necessarily leave a gap around ``D``.

    ``witness`` is ``(i, j, j2, eta1, eta2)``: the 1-based child index and
    0-based IFS atoms whose natural weights ``eta1 != eta2`` differ most.
    ``common_weights`` is the shared natural vector when there is no gap.
    """

    has_gap: bool
    D: float
    natural_weights_per_atom: tuple[tuple[float, ...], ...]
    witness: tuple | None = None
    common_weights: tuple[float, ...] | None = None

    def to_dict(self):
        out = {
            "has_gap": self.has_gap,
            "D": self.D,
            "natural_weights_per_atom": [list(w) for w in self.natural_weights_per_atom],
            "witness": None,
            "common_weights": list(self.common_weights) if self.common_weights else None,
        }
        if self.witness is not None:
            i, j, j2, e1, e2 = self.witness
            out["witness"] = {"child": i, "atoms": [j, j2], "eta": [e1, e2]}
        return out


class SingleOptimum(NamedTuple):
    """Optimal single weight vector and its dimension; unpacks as ``(p, d)``."""

    weights: tuple[float, ...]
    value: float


# power-rule helpers

def _power_weights(log_a, t):
    """Rows of ``a**t / sum a**t``."""
    z = t * log_a
    return np.exp(z - logsumexp(z, axis=-1, keepdims=True))


def _dependent_model(masses, scales, weights):
    atoms = [(float(m), tuple(s), tuple(w)) for m, s, w in zip(masses, scales, weights)]
    return MoranModel.dependent(atoms, k=scales.shape[1])


def _ifs_setup(ifs_model):
    require_valid(ifs_model.ifs_family())
    masses, scales = ifs_model.ifs_arrays()
    return masses, scales, np.log(scales)


def _finish(masses, scales, w, target, mechanism, upper, t=None, q=None):
    w = np.array([WeightAtom(tuple(row)).weights for row in w])
    model = _dependent_model(masses, scales, w)
    achieved = dims.updim(model) if upper else dims.lowdim(model)
    if abs(achieved - target) > VERIFY_TOL:
        raise ConsistencyError(
            f"synthesised weights reach {achieved!r}, target was {target!r}")
    return SynthesizedWeights(
        weights=tuple(tuple(float(x) for x in row) for row in w),
        target=float(target), achieved=float(achieved), mechanism=mechanism,
        model=model, t=None if t is None else float(t), q=None if q is None else float(q))


def _check_target(d):
    if not (isinstance(d, (int, float, np.floating)) and math.isfinite(d)):
        raise PreconditionError(f"target dimension must be a finite real, got {d!r}")


def _solve_increasing(f, target, lo, hi):
    """Root of ``f(t) = target`` for increasing ``f`` with ``f(lo) <= target <= f(hi)``."""
    return bisect(lambda t: f(t) - target, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps,
                  maxiter=400)


def synth_upper_dependent(ifs_model: MoranModel, d: float) -> SynthesizedWeights:
    """Per-atom weights whose upper measure dimension equals ``d >= D``.

    If some atom has unequal scales, the power rule is used with the
    ``t >= D`` solving ``t - E log sum a**t / E log a_min = d``.  If every
    atom is equicontractive, the largest-scale child gets
    ``q = exp(d * E log a_max) <= 1/K`` and the rest share ``1 - q``
    equally.

    Examples
    --------
    >>> fam = MoranModel.independent([(1.0, (1/3, 1/3))])
    >>> w = synth_upper_dependent(fam, 1.0)
    >>> [round(x, 12) for x in w.weights[0]], w.mechanism
    ([0.333333333333, 0.666666666667], 'q-floor')
    """
    _check_target(d)
    masses, scales, log_a = _ifs_setup(ifs_model)
    D = dims.hausdorff_d(ifs_model)
    if d < D - 1e-12:
        raise PreconditionError(f"upper target {d} is below D = {D!r}")
    k = scales.shape[1]
    mean_top = float(masses @ log_a.max(axis=1))
    mean_bot = float(masses @ log_a.min(axis=1))
    if mean_top == mean_bot:
        q = math.exp(d * mean_top)
        first = np.argmax(log_a, axis=1)
        w = np.full(scales.shape, (1.0 - q) / (k - 1))
        w[np.arange(len(w)), first] = q
        return _finish(masses, scales, w, d, "q-floor", True, q=q)

    def g(t):
        return t - float(masses @ logsumexp(t * log_a, axis=1)) / mean_bot

    if d <= g(D):
        t = D
    else:
        hi = D + 1.0
        while g(hi) < d:
            hi = D + 2.0 * (hi - D)
            if hi > 1e6:
                raise ConsistencyError("could not bracket the power-rule exponent")
        t = _solve_increasing(g, d, D, hi)
    return _finish(masses, scales, _power_weights(log_a, t), d, "natural-power-t", True, t=t)


def synth_lower_dependent(ifs_model: MoranModel, d: float) -> SynthesizedWeights:
    """Per-atom weights whose lower measure dimension equals ``d in (0, D]``.

    With ``d0 = -log K / E log a_min``: for ``d <= d0`` the smallest-scale
    child gets ``q = exp(d * E log a_min) in [1/K, 1)``; otherwise the power
    rule is used with ``t in [0, D]`` solving the same scalar equation as
    the upper construction.

    Examples
    --------
    >>> fam = MoranModel.independent([(1.0, (1/3, 1/3))])
    >>> w = synth_lower_dependent(fam, math.log(4/3) / math.log(3))
    >>> [round(x, 12) for x in w.weights[0]]
    [0.25, 0.75]
    """
    _check_target(d)
    masses, scales, log_a = _ifs_setup(ifs_model)
    D = dims.hausdorff_d(ifs_model)
    if not (0 < d <= D + 1e-12):
        raise PreconditionError(f"lower target {d} must lie in (0, D = {D!r}]")
    k = scales.shape[1]
    mean_bot = float(masses @ log_a.min(axis=1))
    d0 = -math.log(k) / mean_bot
    if d <= d0:
        q = math.exp(d * mean_bot)
        # last index among the smallest scales, matching a decreasing stable sort
        last = k - 1 - np.argmin(log_a[:, ::-1], axis=1)
        w = np.full(scales.shape, (1.0 - q) / (k - 1))
        w[np.arange(len(w)), last] = q
        return _finish(masses, scales, w, d, "q-cap", False, q=q)

    def f(t):
        return t - float(masses @ logsumexp(t * log_a, axis=1)) / mean_bot

    t = D if d >= f(D) else _solve_increasing(f, d, 0.0, D)
    return _finish(masses, scales, _power_weights(log_a, t), d, "natural-power-t", False, t=t)


# single weight vectors

def _check_single_p(p, k):
    arr = np.asarray(p, dtype=float)
    if arr.shape != (k,):
        raise PreconditionError(f"weight vector must have {k} entries, got shape {arr.shape}")
    if not np.all(arr > 0) or not np.all(np.isfinite(arr)):
        raise PreconditionError(f"weights must be strictly positive and finite, got {list(arr)}")
    if abs(math.fsum(arr) - 1.0) > 1e-12:
        raise PreconditionError(f"weights sum {math.fsum(arr)!r} != 1")
    return WeightAtom(tuple(arr)).weights


def m_of_p(model_ifs: MoranModel, p, method: str = "auto") -> float:
    """Upper measure dimension when the single weight vector ``p`` is always used."""
    w = _check_single_p(p, model_ifs.k)
    return dims.updim(model_ifs.with_weights(w), method=method)


def mprime_of_p(model_ifs: MoranModel, p, method: str = "auto") -> float:
    """Lower measure dimension when the single weight vector ``p`` is always used."""
    w = _check_single_p(p, model_ifs.k)
    return dims.lowdim(model_ifs.with_weights(w), method=method)


def _simplex_grid(k, resolution):
    """Interior compositions ``c / r`` with every ``c_i >= 1`` and ``sum c = r``."""
    while resolution > k and comb(resolution - 1, k - 1) > MAX_GRID_POINTS:
        resolution //= 2
    # stars and bars: choose k-1 cut points among r-1 slots
    cuts = np.array(list(combinations(range(1, resolution), k - 1)), dtype=float)
    if cuts.size == 0:
        return np.full((1, k), 1.0 / k)
    edges = np.hstack([np.zeros((len(cuts), 1)), cuts, np.full((len(cuts), 1), resolution)])
    return np.diff(edges, axis=1) / resolution


class _Objective:
    """Batched ``±M(p)`` over rows of weight vectors, smaller is better."""

    def __init__(self, masses, log_a, upper):
        self.masses, self.log_a, self.upper = masses, log_a, upper
        self.sign = 1.0 if upper else -1.0

    def __call__(self, P):
        P = np.atleast_2d(P)
        vals = dims.fixed_point_dims(self.log_a, np.log(P)[:, None, :], self.masses, self.upper)
        return self.sign * vals


def _project(P):
    P = np.maximum(P, WEIGHT_FLOOR)
    return P / P.sum(axis=-1, keepdims=True)


def _pattern_search(obj, x, fx, h, tol):
    """Shrinking line sampling along every ``e_i - e_j`` direction."""
    k = len(x)
    dirs = []
    for i, j in combinations(range(k), 2):
        e = np.zeros(k)
        e[i], e[j] = 1.0, -1.0
        dirs.append(e)
    dirs = np.array(dirs)
    steps = np.linspace(-1.0, 1.0, 17)
    while h > tol:
        cand = x[None, None, :] + h * steps[None, :, None] * dirs[:, None, :]
        cand = _project(cand.reshape(-1, k))
        vals = obj(cand)
        b = int(np.argmin(vals))
        if vals[b] < fx:
            x, fx = cand[b], float(vals[b])
            if abs(steps[b % len(steps)]) < 1.0:
                h /= 4.0
        else:
            h /= 4.0
    return x, fx


def _search(model_ifs, upper, grid, refine_tol):
    if model_ifs.k < 2:
        raise PreconditionError("weight search needs K >= 2")
    if grid < 64:
        raise PreconditionError(f"grid resolution must be >= 64, got {grid}")
    fam = model_ifs.ifs_family()
    masses, scales, log_a = _ifs_setup(fam)
    obj = _Objective(masses, log_a, upper)
    k = scales.shape[1]
    D = dims.hausdorff_d(fam)
    nat = _power_weights(log_a, D)
    seeds = np.vstack([nat, masses @ nat, np.full(k, 1.0 / k)])
    P = np.vstack([_simplex_grid(k, grid), _project(seeds)])
    vals = obj(P)
    b = int(np.argmin(vals))
    x, fx = _pattern_search(obj, P[b], float(vals[b]), 1.0 / grid, refine_tol)
    w = WeightAtom(tuple(x)).weights
    value = dims.updim(fam.with_weights(w)) if upper else dims.lowdim(fam.with_weights(w))
    return SingleOptimum(w, float(value))


def min_updim_single(model_ifs: MoranModel, grid: int = 64,
                     refine_tol: float = 1e-12) -> SingleOptimum:
    """Minimise ``M(p)`` over single weight vectors.

    A uniform interior grid of the simplex (``grid`` steps per axis, coarsened
    when the point count would exceed ``MAX_GRID_POINTS``), seeded with the
    natural weights of each atom, is followed by a pattern search with
    shrinking steps down to ``refine_tol``.  Weights are floored at
    ``WEIGHT_FLOOR``.  The returned value is recomputed exactly.
    """
    return _search(model_ifs, True, grid, refine_tol)


def max_lowdim_single(model_ifs: MoranModel, grid: int = 64,
                      refine_tol: float = 1e-12) -> SingleOptimum:
    """Maximise ``M'(p)`` over single weight vectors; see :func:`min_updim_single`."""
    return _search(model_ifs, False, grid, refine_tol)


def _attain(model_ifs, target, upper, grid):
    _check_target(target)
    fam = model_ifs.ifs_family()
    best = _search(fam, upper, grid, 1e-12)
    slack = 1e-9
    if (upper and target < best.value - slack) or (not upper and target > best.value + slack):
        word = "below the minimum" if upper else "above the maximum"
        raise PreconditionError(f"target {target} is {word} {best.value!r} over single weights")
    if not upper and target <= 0:
        raise PreconditionError("target must be positive")
    p0 = np.asarray(best.weights)
    vertex = np.zeros_like(p0)
    vertex[int(np.argmax(p0))] = 1.0
    measure = (lambda w: dims.updim(fam.with_weights(w), method="bisect", tol=1e-13)) if upper \
        else (lambda w: dims.lowdim(fam.with_weights(w), method="bisect", tol=1e-13))

    def path(s):
        return WeightAtom(tuple((1.0 - s) * p0 + s * vertex)).weights

    def gap(s):
        v = measure(path(s))
        return v - target if upper else target - v

    if gap(0.0) >= 0:
        w = best.weights
    else:
        s_hi = 0.5
        while gap(s_hi) < 0:
            s_hi = 1.0 - (1.0 - s_hi) / 16.0
            if 1.0 - s_hi < 1e-15:
                raise PreconditionError(f"target {target} is not reached along the search path")
        s = bisect(gap, 0.0, s_hi, xtol=1e-15, maxiter=400)
        w = path(s)
    model = fam.with_weights(w)
    achieved = dims.updim(model) if upper else dims.lowdim(model)
    return SynthesizedWeights(weights=tuple(w), target=float(target), achieved=float(achieved),
                              mechanism="single-path", model=model)


def attain_updim_single(model_ifs: MoranModel, target: float, grid: int = 64) -> SynthesizedWeights:
    """A single weight vector with ``M(p) = target`` for any target above the minimum.

    Walks the segment from the minimiser towards the vertex of its largest
    weight, along which ``M`` is continuous and unbounded, and bisects.
    """
    return _attain(model_ifs, target, True, grid)


def attain_lowdim_single(model_ifs: MoranModel, target: float, grid: int = 64) -> SynthesizedWeights:
    """A single weight vector with ``M'(p) = target`` for any target in ``(0, max M']``."""
    return _attain(model_ifs, target, False, grid)


# gap detection

def natural_weights(ifs_atom, D: float) -> tuple[float, ...]:
    """``a(i)**D / sum_l a(l)**D`` for one IFS atom.

    Examples
    --------
    >>> [round(x, 4) for x in natural_weights((0.25, 0.5), 0.6942419136306174)]
    [0.382, 0.618]
    """
    if not D > 0:
        raise PreconditionError(f"D must be positive, got {D}")
    scales = getattr(ifs_atom, "scales", ifs_atom)
    log_a = np.log(np.asarray(scales, dtype=float))
    return WeightAtom(tuple(_power_weights(log_a, D))).weights


def detect_gap(model_ifs: MoranModel) -> GapVerdict:
    """Decide whether every single weight vector misses ``D``.

    There is no gap exactly when the natural weight vectors of all IFS
    atoms agree (to ``GAP_TOL``); their common value then gives
    ``updim = lowdim = D``.
    """
    fam = model_ifs.ifs_family()
    masses, scales, log_a = _ifs_setup(fam)
    D = dims.hausdorff_d(fam)
    nat = _power_weights(log_a, D)
    spread = nat.max(axis=0) - nat.min(axis=0)
    per_atom = tuple(tuple(float(x) for x in row) for row in nat)
    i = int(np.argmax(spread))
    if spread[i] > GAP_TOL:
        j, j2 = int(np.argmin(nat[:, i])), int(np.argmax(nat[:, i]))
        witness = (i + 1, j, j2, float(nat[j, i]), float(nat[j2, i]))
        return GapVerdict(True, D, per_atom, witness=witness)
    common = WeightAtom(tuple(masses @ nat)).weights
    return GapVerdict(False, D, per_atom, common_weights=common)
