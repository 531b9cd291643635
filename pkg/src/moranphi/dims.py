"""Almost-sure dimensions of the random set and of the random measure.

``D`` solves ``E log sum_i a(i)**x = 0``.  The upper measure dimension is the
boundary of ``{ψ : G(ψ) >= ψ}`` and the lower one the boundary of
``{ψ : G'(ψ) <= ψ}``.  Both predicates reduce to the sign of a piecewise
linear function of ``ψ``,

    Φ(ψ)  = E max_i (ψ log a(i) - log p(i))     (convex, decreasing)
    Φ'(ψ) = E min_i (ψ log a(i) - log p(i))     (concave, decreasing)

since ``G(ψ) - ψ = -Φ(ψ) / E log a(m)`` with a negative denominator.  The
``bisect`` route brackets the sign change; the ``enum`` route maximises (or
minimises) ``H`` over every selector.  A third route, ``newton``, iterates
``ψ <- G(ψ)`` (Newton's method on ``Φ``), which terminates after finitely
many steps on a piecewise linear function and is what the weight searches use
for batched evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect
from scipy.special import logsumexp

from .errors import ConsistencyError, PreconditionError
from .gcore import DEFAULT_CAP, Selector, extreme_h, g_lower, g_upper, selector_count
from .model import MoranModel, require_valid

__all__ = [
    "DimensionReport",
    "hausdorff_d",
    "updim",
    "lowdim",
    "measure_dim",
    "fixed_point_dims",
    "fixed_point_residual",
    "dim_report",
]

BISECT_MAXITER = 200
METHODS = ("auto", "bisect", "enum", "both", "newton")


def _set_log_sum(log_a, masses, x):
    return float(masses @ logsumexp(x * log_a, axis=1))


def hausdorff_d(model: MoranModel, tol: float = 1e-12) -> float:
    """Almost-sure Hausdorff dimension of the random Moran set.

    Only the IFS part of the model is used, so weights may be absent.

    Examples
    --------
    >>> round(hausdorff_d(MoranModel.single((1/3, 1/3), (0.5, 0.5))), 10)
    0.6309297536
    """
    require_valid(model)
    masses, scales = model.ifs_arrays()
    log_a = np.log(scales)
    k = scales.shape[1]
    hi = math.log(k) / abs(math.log(scales.max())) + 1.0
    f = lambda x: _set_log_sum(log_a, masses, x)
    return float(bisect(f, 0.0, hi, xtol=tol, maxiter=BISECT_MAXITER, disp=False))


def _phi(lam, psi, upper):
    v = psi * lam.log_a - lam.log_p
    ext = v.max(axis=1) if upper else v.min(axis=1)
    return float(lam.masses @ ext)


def _bracket_hi(lam):
    return 1.0 + np.abs(lam.log_p).max() / np.abs(lam.log_a).min()


def _bisect_dim(lam, upper, tol):
    f = lambda psi: _phi(lam, psi, upper)
    return float(bisect(f, 0.0, _bracket_hi(lam), xtol=tol, maxiter=BISECT_MAXITER, disp=False))


def fixed_point_dims(log_a, log_p, masses, upper=True, max_iter=500):
    """Batched upper (or lower) dimension by iterating ``ψ <- G(ψ)`` from ``ψ = 0``.

    Parameters
    ----------
    log_a : ndarray, shape (n, K)
    log_p : ndarray, shape (..., n, K) or (..., 1, K)
        Leading axes index independent problems sharing the same scales; a
        singleton atom axis applies one weight vector to every atom.
    masses : ndarray, shape (n,)

    Returns
    -------
    ndarray, shape (...)
    """
    log_a = np.asarray(log_a, dtype=float)
    log_p = np.asarray(log_p, dtype=float)
    shape = np.broadcast_shapes(log_a.shape, log_p.shape)
    batch = shape[:-2]
    log_p = np.broadcast_to(log_p, shape).reshape((-1,) + shape[-2:])
    la = np.broadcast_to(log_a, log_p.shape)
    psi = np.zeros(log_p.shape[0])
    active = np.ones_like(psi, dtype=bool)
    for _ in range(max_iter):
        v = psi[:, None, None] * la - log_p
        idx = (v.argmax if upper else v.argmin)(axis=-1)[..., None]
        num = np.take_along_axis(log_p, idx, -1)[..., 0] @ masses
        den = np.take_along_axis(la, idx, -1)[..., 0] @ masses
        new = num / den
        # upper iterates rise monotonically to the root; lower ones overshoot once then fall
        progress = new > psi if upper else (new < psi) | (psi == 0)
        active &= progress
        if not active.any():
            break
        psi = np.where(active, new, psi)
    return psi.reshape(batch)


def _newton_dim(lam, upper):
    return float(fixed_point_dims(lam.log_a, lam.log_p, lam.masses, upper))


def measure_dim(model: MoranModel, upper: bool = True, method: str = "auto",
                tol: float = 1e-10, cap: int = DEFAULT_CAP):
    """Upper or lower measure dimension with the optimising selector when known.

    Returns ``(value, selector_or_None, method_used)``.  ``auto`` resolves to
    ``both`` when the selector count is within ``cap`` and to ``bisect``
    otherwise.  ``both`` raises :class:`ConsistencyError` when the two routes
    differ by more than ``10 * tol``.
    """
    if method not in METHODS:
        raise PreconditionError(f"unknown method {method!r}; expected one of {METHODS}")
    if not tol > 0:
        raise PreconditionError(f"tol must be positive, got {tol}")
    lam = require_valid(model).expand()
    if method == "auto":
        method = "both" if selector_count(model) <= cap else "bisect"
    if method == "newton":
        return _newton_dim(lam, upper), None, method
    if method == "bisect":
        return _bisect_dim(lam, upper, tol), None, method
    val_e, sel = extreme_h(model, upper=upper, cap=cap)
    if method == "both":
        val_b = _bisect_dim(lam, upper, tol)
        if abs(val_b - val_e) > 10 * tol:
            which = "upper" if upper else "lower"
            raise ConsistencyError(
                f"{which} dimension: bisection gives {val_b!r}, enumeration gives {val_e!r}")
    return val_e, sel, method


def updim(model: MoranModel, method: str = "auto", tol: float = 1e-10,
          cap: int = DEFAULT_CAP) -> float:
    """Almost-sure upper large-Φ dimension of the random measure (``sup_θ G``)."""
    return measure_dim(model, True, method, tol, cap)[0]


def lowdim(model: MoranModel, method: str = "auto", tol: float = 1e-10,
           cap: int = DEFAULT_CAP) -> float:
    """Almost-sure lower large-Φ dimension of the random measure (``inf_θ G'``)."""
    return measure_dim(model, False, method, tol, cap)[0]


def fixed_point_residual(model: MoranModel, t: float):
    """Signed residuals ``(G(t) - t, G'(t) - t)``."""
    return g_upper(model, t).value - t, g_lower(model, t).value - t


@dataclass(frozen=True)
class DimensionReport:
    D: float
    updim: float
    lowdim: float
    method: str
    residual_up: float
    residual_low: float
    argmax_selector: Selector | None = None
    argmin_selector: Selector | None = None
    gap: object = None
    tolerances: dict = field(default_factory=dict)

    def to_dict(self):
        out = {
            "D": self.D,
            "updim": self.updim,
            "lowdim": self.lowdim,
            "method": self.method,
            "residual_up": self.residual_up,
            "residual_low": self.residual_low,
            "argmax_selector": list(self.argmax_selector) if self.argmax_selector else None,
            "argmin_selector": list(self.argmin_selector) if self.argmin_selector else None,
        }
        if self.gap is not None:
            out["gap"] = self.gap.to_dict()
        return out


def dim_report(model: MoranModel, tol: float = 1e-10, method: str = "auto",
               cap: int = DEFAULT_CAP, gap=None) -> DimensionReport:
    """Assemble ``D``, both measure dimensions and their fixed-point residuals.

    ``gap`` is an optional verdict from :func:`moranphi.synth.detect_gap`
    attached verbatim.  Raises :class:`ConsistencyError` if the computed
    values break ``lowdim <= D <= updim``.
    """
    require_valid(model)
    d_set = hausdorff_d(model)
    if method == "auto" and selector_count(model) > cap:
        method = "bisect"
    up, up_sel, used = measure_dim(model, True, method, tol, cap)
    low, low_sel, _ = measure_dim(model, False, method, tol, cap)
    slack = 10 * tol + 1e-12
    if not (low <= d_set + slack and d_set <= up + slack):
        raise ConsistencyError(f"sandwich violated: lowdim={low!r}, D={d_set!r}, updim={up!r}")
    return DimensionReport(
        D=d_set, updim=up, lowdim=low, method=used,
        residual_up=abs(g_upper(model, up).value - up),
        residual_low=abs(g_lower(model, low).value - low),
        argmax_selector=up_sel, argmin_selector=low_sel, gap=gap,
        tolerances={"set_tol": 1e-12, "measure_tol": tol},
    )
