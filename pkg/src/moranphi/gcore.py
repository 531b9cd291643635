"""Index selectors, the ratio functions G and G', and the selector functional H.

For an atom ``λ`` and an exponent ``θ >= 0`` the upper selector picks the
child maximising ``a(i)**θ / p(i)`` and the lower selector the child
minimising it.  Comparisons are done on ``θ*log a(i) - log p(i)``; ties,
including floating-point near-ties within ``NEAR_TIE`` (relative), go to the
smallest index.

Every quantity here is an exact finite sum over the expanded atoms.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import EnumerationCapError, PreconditionError
from .model import MoranModel, require_valid

__all__ = [
    "NEAR_TIE",
    "DEFAULT_CAP",
    "Selector",
    "GValue",
    "argmax_index",
    "argmin_index",
    "select",
    "g_upper",
    "g_lower",
    "h_of_selector",
    "selector_count",
    "enumerate_selectors",
    "extreme_h",
]

NEAR_TIE = 1e-14
DEFAULT_CAP = 2 ** 26
_TAIL_SIZE = 2 ** 16


@dataclass(frozen=True)
class Selector:
    """A child choice for every expanded atom, as 1-based indices."""

    assignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(i) for i in self.assignment))

    def __len__(self):
        return len(self.assignment)

    def __iter__(self):
        return iter(self.assignment)

    def zero_based(self):
        return np.asarray(self.assignment, dtype=np.intp) - 1


@dataclass(frozen=True)
class GValue:
    theta: float
    numerator: float
    denominator: float
    value: float
    chosen: Selector


def select(theta, log_a, log_p, upper=True):
    """0-based chosen child along the last axis of ``theta*log_a - log_p``.

    Broadcasts: ``theta`` may be a scalar or an array aligned with the leading
    axes of ``log_a``/``log_p``.
    """
    theta = np.asarray(theta, dtype=float)
    v = theta[..., None] * log_a - log_p
    if upper:
        best = v.max(axis=-1, keepdims=True)
        cand = v >= best - NEAR_TIE * np.maximum(1.0, np.abs(best))
    else:
        best = v.min(axis=-1, keepdims=True)
        cand = v <= best + NEAR_TIE * np.maximum(1.0, np.abs(best))
    return np.argmax(cand, axis=-1)


def _check_theta(theta):
    if not theta >= 0:
        raise PreconditionError(f"theta must be >= 0, got {theta}")


def _atom_logs(scales, weights):
    scales = getattr(scales, "scales", scales)
    weights = getattr(weights, "weights", weights)
    return np.log(np.asarray(scales, dtype=float)), np.log(np.asarray(weights, dtype=float))


def argmax_index(theta, scales, weights):
    """Smallest child index (1-based) maximising ``a(i)**theta / p(i)``.

    Examples
    --------
    >>> argmax_index(1.0, (0.25, 0.5), (0.5, 0.5))
    2
    """
    _check_theta(theta)
    la, lp = _atom_logs(scales, weights)
    return int(select(theta, la, lp, upper=True)) + 1


def argmin_index(theta, scales, weights):
    """Smallest child index (1-based) minimising ``a(i)**theta / p(i)``."""
    _check_theta(theta)
    la, lp = _atom_logs(scales, weights)
    return int(select(theta, la, lp, upper=False)) + 1


def _g(model, theta, upper):
    _check_theta(theta)
    lam = require_valid(model).expand()
    idx = select(theta, lam.log_a, lam.log_p, upper=upper)
    rows = np.arange(lam.n)
    num = float(lam.masses @ lam.log_p[rows, idx])
    den = float(lam.masses @ lam.log_a[rows, idx])
    return GValue(float(theta), num, den, num / den, Selector(idx + 1))


def g_upper(model: MoranModel, theta: float) -> GValue:
    """``G(θ)``: expected log-weight over expected log-scale along the upper selector."""
    return _g(model, theta, True)


def g_lower(model: MoranModel, theta: float) -> GValue:
    """``G'(θ)``: the same ratio along the lower selector."""
    return _g(model, theta, False)


def h_of_selector(model: MoranModel, chi) -> float:
    """``H(χ) = E log p(χ(λ), λ) / E log a(χ(λ), λ)`` for a selector ``χ``.

    ``chi`` is a :class:`Selector` or any sequence of 1-based child indices,
    one per expanded atom.
    """
    lam = require_valid(model).expand()
    assignment = chi.assignment if isinstance(chi, Selector) else tuple(chi)
    if len(assignment) != lam.n:
        raise PreconditionError(f"selector has {len(assignment)} entries, model has {lam.n} atoms")
    idx = np.asarray(assignment, dtype=np.intp) - 1
    if np.any(idx < 0) or np.any(idx >= lam.k):
        raise PreconditionError(f"selector indices must lie in 1..{lam.k}")
    rows = np.arange(lam.n)
    num = lam.masses @ lam.log_p[rows, idx]
    den = lam.masses @ lam.log_a[rows, idx]
    return float(num / den)


def selector_count(model: MoranModel) -> int:
    return model.k ** model.n_atoms


def _check_cap(model, cap):
    count = selector_count(model)
    if count > cap:
        raise EnumerationCapError(count, cap)
    return count


def enumerate_selectors(model: MoranModel, cap: int = DEFAULT_CAP):
    """All ``K**n`` selectors in lexicographic order (first atom most significant).

    The cap is checked eagerly, so the call itself raises
    :class:`EnumerationCapError` rather than the first iteration.
    """
    _check_cap(model, cap)
    k, n = model.k, model.n_atoms
    return (Selector(tuple(c + 1 for c in combo)) for combo in product(range(k), repeat=n))


def _outer_sums(cols):
    """Lexicographic table of per-atom contributions: ``cols`` is (t, K)."""
    acc = np.zeros(1)
    for row in cols:
        acc = (acc[:, None] + row[None, :]).ravel()
    return acc


def _decode(flat, k, width):
    digits = []
    for _ in range(width):
        flat, r = divmod(flat, k)
        digits.append(r)
    return digits[::-1]


def extreme_h(model: MoranModel, upper: bool = True, cap: int = DEFAULT_CAP):
    """Max (``upper``) or min of ``H`` over every selector, with the optimiser.

    Uses a split enumeration: the last atoms are tabulated as one vector of
    partial sums and the leading atoms are iterated, so memory stays bounded
    while the order of visiting (and hence tie-breaking towards the
    lexicographically first selector) matches :func:`enumerate_selectors`.
    """
    lam = require_valid(model).expand()
    _check_cap(model, cap)
    k, n = lam.k, lam.n
    num_c = lam.masses[:, None] * lam.log_p
    den_c = lam.masses[:, None] * lam.log_a
    t = min(n, max(1, int(np.log(_TAIL_SIZE) // np.log(k))))
    h = n - t
    tail_num = _outer_sums(num_c[h:])
    tail_den = _outer_sums(den_c[h:])
    best_val, best_sel = None, None
    for combo in product(range(k), repeat=h):
        hn = sum(num_c[i, c] for i, c in enumerate(combo))
        hd = sum(den_c[i, c] for i, c in enumerate(combo))
        ratio = (hn + tail_num) / (hd + tail_den)
        j = int(np.argmax(ratio) if upper else np.argmin(ratio))
        val = float(ratio[j])
        if best_val is None or (val > best_val if upper else val < best_val):
            best_val = val
            best_sel = tuple(combo) + tuple(_decode(j, k, t))
    return best_val, Selector(tuple(c + 1 for c in best_sel))
