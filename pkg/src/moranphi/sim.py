"""Monte Carlo realisations of the random Moran construction.

Random numbers come from NumPy's ``PCG64`` bit generator (permuted
congruential generator, 128-bit state), which produces the same stream on
every platform for a given seed.  A trial ``t`` under seed ``s`` uses the
stream seeded by ``SeedSequence([s, t])``, so trials are independent and can
run in any order.  Atoms are drawn by inverse-CDF lookup of uniform variates
in the cumulative masses.

Because the greedy child ``m(θ, λ)`` depends only on the current atom, the
greedy path at a fixed ``θ`` is itself a selector and its empirical ratio
converges to ``H`` of that selector.
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dims
from .errors import PreconditionError
from .gcore import Selector, enumerate_selectors, h_of_selector, select
from .model import MoranModel, require_valid

__all__ = [
    "CHECKPOINTS",
    "LambdaSequence",
    "PathStats",
    "EmpiricalSummary",
    "IntervalTable",
    "make_rng",
    "sample_sequence",
    "path_ratio",
    "greedy_selector",
    "empirical_dims",
    "emit_intervals",
]

CHECKPOINTS = (100, 1_000, 10_000, 100_000)
MAX_DEPTH = 40
MAX_ROWS = 2 ** 22


def make_rng(seed: int, trial: int | None = None) -> np.random.Generator:
    """``PCG64`` generator for ``seed`` (and optionally a trial index)."""
    entropy = [int(seed)] if trial is None else [int(seed), int(trial)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


@dataclass(frozen=True)
class LambdaSequence:
    """An iid sequence of 0-based atom indices of the expanded parameter space."""

    seed: int
    draws: np.ndarray
    trial: int | None = None

    def __len__(self):
        return len(self.draws)


@dataclass(frozen=True)
class PathStats:
    """Cumulative log-weight and log-scale sums along one path.

    ``rule`` names the selector; ``trace`` holds ``(n, ratio)`` at the
    checkpoints not exceeding the path length.
    """

    rule: tuple[int, ...]
    sum_log_p: float
    sum_log_a: float
    ratio: float
    trace: tuple[tuple[int, float], ...] = ()


def sample_sequence(model: MoranModel, n: int, seed: int, trial: int | None = None) -> LambdaSequence:
    """Draw ``n`` atoms iid according to their masses.

    Examples
    --------
    >>> m = MoranModel.single((1/3, 1/3), (0.5, 0.5))
    >>> sample_sequence(m, 5, seed=1).draws.tolist()
    [0, 0, 0, 0, 0]
    """
    if n < 1:
        raise PreconditionError(f"sequence length must be >= 1, got {n}")
    lam = require_valid(model).expand()
    cdf = np.cumsum(lam.masses)
    u = make_rng(seed, trial).random(int(n))
    draws = np.minimum(np.searchsorted(cdf, u, side="right"), lam.n - 1)
    draws.setflags(write=False)
    return LambdaSequence(int(seed), draws, trial)


def _as_selector(chi) -> Selector:
    return chi if isinstance(chi, Selector) else Selector(tuple(chi))


def path_ratio(model: MoranModel, seq: LambdaSequence, chi, checkpoints=CHECKPOINTS) -> PathStats:
    """Empirical ``sum log p / sum log a`` along the path that follows ``chi``."""
    lam = require_valid(model).expand()
    sel = _as_selector(chi)
    if len(sel) != lam.n:
        raise PreconditionError(f"selector has {len(sel)} entries, model has {lam.n} atoms")
    child = sel.zero_based()[seq.draws]
    lp = np.cumsum(lam.log_p[seq.draws, child])
    la = np.cumsum(lam.log_a[seq.draws, child])
    trace = tuple((int(c), float(lp[c - 1] / la[c - 1])) for c in checkpoints if c <= len(seq))
    return PathStats(tuple(sel), float(lp[-1]), float(la[-1]), float(lp[-1] / la[-1]), trace)


def greedy_selector(model: MoranModel, theta: float, upper: bool = True) -> Selector:
    """The child ``m(θ, λ)`` (or ``m'``) for every atom, as a selector."""
    lam = require_valid(model).expand()
    return Selector(select(theta, lam.log_a, lam.log_p, upper) + 1)


@dataclass(frozen=True)
class EmpiricalSummary:
    """Final path ratios per trial for the greedy paths and any fixed selectors."""

    n: int
    seed: int
    updim: float
    lowdim: float
    upper_ratios: tuple[float, ...]
    lower_ratios: tuple[float, ...]
    fixed: dict = field(default_factory=dict)

    def within(self, tol: float):
        """Trial counts within ``tol`` of the exact targets."""
        up = sum(abs(r - self.updim) <= tol for r in self.upper_ratios)
        low = sum(abs(r - self.lowdim) <= tol for r in self.lower_ratios)
        fixed = {k: sum(abs(r - v["h"]) <= tol for r in v["ratios"]) for k, v in self.fixed.items()}
        return {"upper": up, "lower": low, "fixed": fixed}

    def to_dict(self, tol: float = 0.02):
        def stats(xs):
            a = np.asarray(xs)
            return {"mean": float(a.mean()), "std": float(a.std()), "min": float(a.min()),
                    "max": float(a.max())}

        counts = self.within(tol)
        return {
            "n": self.n,
            "trials": len(self.upper_ratios),
            "seed": self.seed,
            "updim": self.updim,
            "lowdim": self.lowdim,
            "m_path": dict(stats(self.upper_ratios), within=counts["upper"]),
            "m_prime_path": dict(stats(self.lower_ratios), within=counts["lower"]),
            "fixed_selectors": [
                dict(selector=list(k), h=v["h"], within=counts["fixed"][k], **stats(v["ratios"]))
                for k, v in self.fixed.items()
            ],
            "band": tol,
        }


def empirical_dims(model: MoranModel, n: int, trials: int, seed: int, selectors=None,
                   threads: int = 1) -> EmpiricalSummary:
    """Follow the greedy ``m(updim)`` and ``m'(lowdim)`` paths over many trials.

    ``selectors`` is ``None``, ``"all"`` (every selector, subject to the
    enumeration cap) or an explicit list; their ratios are reported next to
    the exact ``H`` values.  ``threads > 1`` runs trials concurrently; the
    output does not depend on it.
    """
    if n < 1000:
        raise PreconditionError(f"path length must be >= 1000, got {n}")
    if trials < 1:
        raise PreconditionError(f"trials must be >= 1, got {trials}")
    require_valid(model)
    up = dims.updim(model)
    low = dims.lowdim(model)
    m_sel = greedy_selector(model, up, True)
    mp_sel = greedy_selector(model, low, False)
    if selectors == "all":
        selectors = list(enumerate_selectors(model))
    fixed = [_as_selector(s) for s in (selectors or ())]

    def run(t):
        seq = sample_sequence(model, n, seed, t)
        r_up = path_ratio(model, seq, m_sel, ()).ratio
        r_low = path_ratio(model, seq, mp_sel, ()).ratio
        return r_up, r_low, [path_ratio(model, seq, s, ()).ratio for s in fixed]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(trials)))
    else:
        results = [run(t) for t in range(trials)]
    fixed_out = {
        tuple(s): {"h": h_of_selector(model, s), "ratios": tuple(r[2][i] for r in results)}
        for i, s in enumerate(fixed)
    }
    return EmpiricalSummary(int(n), int(seed), float(up), float(low),
                            tuple(r[0] for r in results), tuple(r[1] for r in results), fixed_out)


@dataclass(frozen=True)
class IntervalTable:
    """Moran intervals of one level: address, left endpoint, length and measure."""

    address: tuple[str, ...]
    left: np.ndarray
    length: np.ndarray
    measure: np.ndarray

    def __len__(self):
        return len(self.address)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("address,left,length,measure\n")
        for a, x, l, m in zip(self.address, self.left, self.length, self.measure):
            buf.write(f"{a},{x:.17g},{l:.17g},{m:.17g}\n")
        return buf.getvalue()


def _parse_prefix(prefix, k):
    if prefix is None or prefix == "":
        return []
    parts = prefix.split(".") if "." in prefix or k >= 10 else list(prefix)
    try:
        digits = [int(c) - 1 for c in parts]
    except ValueError as exc:
        raise PreconditionError(f"bad address prefix {prefix!r}") from exc
    if any(not 0 <= c < k for c in digits):
        raise PreconditionError(f"address prefix {prefix!r} uses children outside 1..{k}")
    return digits


def _addresses(codes: np.ndarray, k: int) -> tuple[str, ...]:
    if k >= 10:
        return tuple(".".join(str(c + 1) for c in row) for row in codes)
    if codes.shape[1] == 0:
        return ("",) * len(codes)
    # one ASCII digit per level, viewed as fixed-width byte strings
    digits = np.ascontiguousarray((codes + ord("1")).astype(np.uint8))
    return tuple(digits.view(f"S{codes.shape[1]}").ravel().astype(str).tolist())


def emit_intervals(model: MoranModel, seq: LambdaSequence, depth: int, out=None,
                   address_prefix: str | None = None, max_rows: int = MAX_ROWS) -> IntervalTable:
    """Level-``depth`` Moran intervals along the atom sequence ``seq``.

    Level ``n`` uses atom ``seq.draws[n - 1]`` for every interval.  Child
    positions come from the atom's offsets, or the even-gap layout when
    offsets are absent.  Addresses are 1-based child digits (dot separated
    when ``K >= 10``).  ``address_prefix`` restricts output to descendants of
    one interval.  ``depth`` above 40 needs a prefix, and the row count may
    not exceed ``max_rows``.  ``out`` may be a path or a text stream.
    """
    lam_model = require_valid(model)
    lam = lam_model.expand()
    k = lam.k
    prefix = _parse_prefix(address_prefix, k)
    if depth < 0:
        raise PreconditionError(f"depth must be >= 0, got {depth}")
    if depth > MAX_DEPTH and not prefix:
        raise PreconditionError(f"depth {depth} exceeds {MAX_DEPTH}; supply an address prefix")
    if len(prefix) > depth:
        raise PreconditionError("address prefix is longer than the depth")
    if depth > len(seq):
        raise PreconditionError(f"sequence has {len(seq)} draws, depth {depth} requested")
    rows = k ** (depth - len(prefix))
    if rows > max_rows:
        raise PreconditionError(f"{rows} intervals exceed the row cap {max_rows}")
    atoms = list(lam_model.iter_lambda())
    left = np.zeros(1)
    length = np.ones(1)
    measure = np.ones(1)
    codes = np.zeros((1, 0), dtype=np.int64)
    for level in range(depth):
        _, ifs, w = atoms[int(seq.draws[level])]
        offs = np.asarray(ifs.layout())
        scales = np.asarray(ifs.scales)
        weights = np.asarray(w.weights)
        kids = np.array([prefix[level]]) if level < len(prefix) else np.arange(k)
        left = (left[:, None] + length[:, None] * offs[kids][None, :]).ravel()
        measure = (measure[:, None] * weights[kids][None, :]).ravel()
        length = (length[:, None] * scales[kids][None, :]).ravel()
        codes = np.hstack([np.repeat(codes, len(kids), axis=0),
                           np.tile(kids, len(codes))[:, None]])
    address = _addresses(codes, k)
    table = IntervalTable(address, left, length, measure)
    if out is not None:
        text = table.to_csv()
        if hasattr(out, "write"):
            out.write(text)
        else:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    return table
