"""Finite random Moran models: types, validation, JSON documents, K=2 exponent form.

A model is a finite atomic probability space of (scale vector, weight vector)
pairs.  In *dependent* mode the pairs are listed directly; in *independent*
mode the space is the product of a list of IFS atoms and a list of weight
atoms, each with its own masses.  An independent model with an empty weight
list is an *IFS family*: it carries the random set but no measure yet, and is
what the weight-synthesis routines take as input.

Child indices are 1-based everywhere in the public API (they label the
children ``1..K`` of a Moran interval); atom indices are 0-based positions in
the expanded list.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from .errors import ModelValidationError, PreconditionError, SchemaError

__all__ = [
    "IfsAtom",
    "WeightAtom",
    "MoranModel",
    "Expanded",
    "ValidationReport",
    "K2Spec",
    "validate_model",
    "require_valid",
    "load_model",
    "dumps_model",
    "read_model",
    "model_to_document",
    "model_from_document",
    "load_k2",
    "to_k2",
]

SUM_TOL = 1e-12


def _normalize(values):
    """Rescale ``values`` so that ``math.fsum`` of the result is exactly 1.0.

    Idempotent: a vector whose fsum is already 1.0 is returned unchanged.
    """
    values = tuple(float(v) for v in values)
    total = math.fsum(values)
    if total == 1.0 or not math.isfinite(total) or total <= 0:
        return values
    scaled = [v / total for v in values]
    big = max(range(len(scaled)), key=lambda i: scaled[i])
    others = [v for i, v in enumerate(scaled) if i != big]
    x = 1.0 - math.fsum(others)
    # that subtraction may round; step to the neighbouring float whose exact total rounds to 1
    for _ in range(4):
        total = math.fsum(others + [x])
        if total == 1.0:
            break
        x = math.nextafter(x, math.inf if total < 1.0 else -math.inf)
    scaled[big] = x
    return tuple(scaled)


def _as_floats(values):
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class IfsAtom:
    """One IFS of ``K`` similarities on [0, 1].

    Parameters
    ----------
    scales : sequence of float
        Contraction ratios of the children, in child order.
    offsets : sequence of float, optional
        Left endpoints of the children inside the unit parent.  Only the
        simulator's interval geometry uses them.
    """

    scales: tuple[float, ...]
    offsets: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "scales", _as_floats(self.scales))
        if self.offsets is not None:
            object.__setattr__(self, "offsets", _as_floats(self.offsets))

    @property
    def k(self):
        return len(self.scales)

    def layout(self):
        """Left endpoints of the children: stored offsets or an even-gap layout."""
        if self.offsets is not None:
            return self.offsets
        k = self.k
        gap = (1.0 - math.fsum(self.scales)) / (k - 1) if k > 1 else 0.0
        lefts, x = [], 0.0
        for s in self.scales:
            lefts.append(x)
            x += s + gap
        return tuple(lefts)


@dataclass(frozen=True)
class WeightAtom:
    """A probability weight vector over the ``K`` children.

    A vector summing to 1 within 1e-12 is renormalized so that it sums to
    exactly 1; anything further off is kept as given and reported by
    :func:`validate_model`.
    """

    weights: tuple[float, ...]

    def __post_init__(self):
        w = _as_floats(self.weights)
        total = math.fsum(w)
        if math.isfinite(total) and abs(total - 1.0) <= SUM_TOL:
            w = _normalize(w)
        object.__setattr__(self, "weights", w)

    @property
    def k(self):
        return len(self.weights)


def _ifs(atom):
    if isinstance(atom, IfsAtom):
        return atom
    return IfsAtom(tuple(atom))


def _wts(atom):
    if isinstance(atom, WeightAtom):
        return atom
    return WeightAtom(tuple(atom))


def _masses(values):
    values = _as_floats(values)
    total = math.fsum(values)
    if math.isfinite(total) and abs(total - 1.0) <= SUM_TOL:
        values = _normalize(values)
    return values


@dataclass(frozen=True)
class Expanded:
    """The atoms of the parameter space as dense arrays.

    Attributes
    ----------
    masses : ndarray, shape (n,)
    scales, weights : ndarray, shape (n, K)
    log_a, log_p : ndarray, shape (n, K)
        Natural logs of ``scales`` and ``weights``.
    ifs_index, weight_index : ndarray of int, shape (n,)
        Which IFS atom / weight atom each expanded atom came from.  In
        dependent mode both equal ``arange(n)``.
    """

    masses: np.ndarray
    scales: np.ndarray
    weights: np.ndarray
    log_a: np.ndarray
    log_p: np.ndarray
    ifs_index: np.ndarray
    weight_index: np.ndarray

    @property
    def n(self):
        return self.masses.shape[0]

    @property
    def k(self):
        return self.scales.shape[1]


def _frozen(arr):
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MoranModel:
    """A finite random Moran model.

    Build with :meth:`dependent` or :meth:`independent` rather than the raw
    constructor.  Instances are immutable; all derived arrays are cached.
    """

    k: int
    mode: str
    atoms: tuple = ()
    ifs_atoms: tuple = ()
    weight_atoms: tuple = ()
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @classmethod
    def dependent(cls, atoms, k=None):
        """``atoms`` is a sequence of ``(mass, scales, weights)`` triples."""
        masses = _masses([a[0] for a in atoms])
        triples = tuple((m, _ifs(a[1]), _wts(a[2])) for m, a in zip(masses, atoms))
        if k is None:
            k = triples[0][1].k if triples else 0
        return cls(k=k, mode="dependent", atoms=triples)

    @classmethod
    def independent(cls, ifs_atoms, weight_atoms=(), k=None):
        """``ifs_atoms``: ``(mass, scales)`` pairs; ``weight_atoms``: ``(mass, weights)`` pairs."""
        im = _masses([a[0] for a in ifs_atoms])
        wm = _masses([a[0] for a in weight_atoms])
        ifs = tuple((m, _ifs(a[1])) for m, a in zip(im, ifs_atoms))
        wts = tuple((m, _wts(a[1])) for m, a in zip(wm, weight_atoms))
        if k is None:
            k = ifs[0][1].k if ifs else 0
        return cls(k=k, mode="independent", ifs_atoms=ifs, weight_atoms=wts)

    @classmethod
    def single(cls, scales, weights):
        """A deterministic model: one IFS used with one weight vector at every step."""
        return cls.dependent([(1.0, scales, weights)])

    @property
    def has_weights(self):
        if self.mode == "dependent":
            return bool(self.atoms)
        return bool(self.weight_atoms)

    def iter_lambda(self) -> Iterator[tuple[float, IfsAtom, WeightAtom]]:
        """Iterate over the atoms of the parameter space as ``(mass, ifs, weights)``.

        Independent models are expanded lazily in lexicographic order, IFS atom
        outermost.
        """
        if self.mode == "dependent":
            yield from self.atoms
            return
        for (mi, ifs), (mw, w) in product(self.ifs_atoms, self.weight_atoms):
            yield mi * mw, ifs, w

    def ifs_marginal(self):
        """``(mass, IfsAtom)`` pairs describing the random set alone."""
        if self.mode == "dependent":
            return tuple((m, ifs) for m, ifs, _ in self.atoms)
        return self.ifs_atoms

    def ifs_family(self):
        """The IFS part of the model as an independent model with no weights."""
        if self.mode == "independent" and not self.weight_atoms:
            return self
        return MoranModel.independent(self.ifs_marginal(), (), k=self.k)

    def with_weights(self, weights):
        """The independent model using one weight vector at every step."""
        return MoranModel.independent(self.ifs_marginal(), [(1.0, weights)], k=self.k)

    def with_weight_distribution(self, weight_atoms):
        """The independent model with weights drawn from ``(mass, weights)`` pairs."""
        return MoranModel.independent(self.ifs_marginal(), weight_atoms, k=self.k)

    # derived constants

    @property
    def min_scale(self):
        """The constant ``A``: smallest contraction ratio over all IFS atoms."""
        return min(min(ifs.scales) for _, ifs in self.ifs_marginal())

    @property
    def max_scale(self):
        """Largest single contraction ratio over all IFS atoms."""
        return max(max(ifs.scales) for _, ifs in self.ifs_marginal())

    @property
    def max_scale_sum(self):
        """The constant ``B``: largest per-atom sum of contraction ratios."""
        return max(math.fsum(ifs.scales) for _, ifs in self.ifs_marginal())

    @property
    def tau(self):
        """Derived separation constant ``(1 - B) / K``."""
        return (1.0 - self.max_scale_sum) / self.k

    def expand(self) -> Expanded:
        """Dense arrays over the expanded parameter space (cached)."""
        if "expanded" in self._cache:
            return self._cache["expanded"]
        if not self.has_weights:
            raise PreconditionError("model has no weight atoms; attach weights first")
        rows = list(self.iter_lambda())
        masses = np.array([r[0] for r in rows], dtype=float)
        masses = masses / masses.sum()
        scales = np.array([r[1].scales for r in rows], dtype=float)
        weights = np.array([r[2].weights for r in rows], dtype=float)
        if self.mode == "dependent":
            ii = wi = np.arange(len(rows))
        else:
            nw = len(self.weight_atoms)
            ii = np.repeat(np.arange(len(self.ifs_atoms)), nw)
            wi = np.tile(np.arange(nw), len(self.ifs_atoms))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = Expanded(
                masses=_frozen(masses),
                scales=_frozen(scales),
                weights=_frozen(weights),
                log_a=_frozen(np.log(scales)),
                log_p=_frozen(np.log(weights)),
                ifs_index=_frozen(ii),
                weight_index=_frozen(wi),
            )
        self._cache["expanded"] = out
        return out

    def ifs_arrays(self):
        """``(masses, scales)`` arrays of the IFS marginal (cached)."""
        if "ifs" not in self._cache:
            marg = self.ifs_marginal()
            masses = np.array([m for m, _ in marg], dtype=float)
            scales = np.array([ifs.scales for _, ifs in marg], dtype=float)
            self._cache["ifs"] = (_frozen(masses / masses.sum()), _frozen(scales))
        return self._cache["ifs"]

    @property
    def n_atoms(self):
        if self.mode == "dependent":
            return len(self.atoms)
        return len(self.ifs_atoms) * len(self.weight_atoms)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok


def _fmt(x):
    return f"{x:.12g}"


def _check_masses(label, masses, out):
    if not masses:
        out.append(f"{label}: empty")
        return
    for i, m in enumerate(masses):
        if not (math.isfinite(m) and m > 0):
            out.append(f"{label} {i}: mass {_fmt(m)} is not strictly positive")
    total = math.fsum(masses)
    if not abs(total - 1.0) <= SUM_TOL:
        out.append(f"{label}: masses sum {_fmt(total)} ≠ 1")


def _check_ifs(label, ifs, k, tau, out):
    if ifs.k != k:
        out.append(f"{label}: has {ifs.k} scales, expected K = {k}")
        return
    bad = [s for s in ifs.scales if not (math.isfinite(s) and 0 < s < 1)]
    for s in bad:
        out.append(f"{label}: scale {_fmt(s)} outside (0, 1)")
    total = math.fsum(ifs.scales)
    if not total < 1:
        out.append(f"{label}: scale sum {_fmt(total)} ≥ 1")
    if ifs.offsets is None or bad:
        return
    if len(ifs.offsets) != k:
        out.append(f"{label}: has {len(ifs.offsets)} offsets, expected K = {k}")
        return
    ivs = sorted(zip(ifs.offsets, ifs.scales))
    for x, s in ivs:
        if not (x >= 0 and x + s <= 1 + 1e-15):
            out.append(f"{label}: child [{_fmt(x)}, {_fmt(x + s)}] leaves [0, 1]")
    for (x0, s0), (x1, _) in zip(ivs, ivs[1:]):
        gap = x1 - (x0 + s0)
        if gap < tau - 1e-15:
            out.append(f"{label}: gap {_fmt(gap)} between children below tau = {_fmt(tau)}")


def _check_weights(label, w, k, out):
    if w.k != k:
        out.append(f"{label}: has {w.k} weights, expected K = {k}")
        return
    for x in w.weights:
        if not (math.isfinite(x) and x > 0):
            out.append(f"{label}: weight {_fmt(x)} is not strictly positive")
    total = math.fsum(w.weights)
    if not abs(total - 1.0) <= SUM_TOL:
        out.append(f"{label}: weights sum {_fmt(total)} ≠ 1")


def validate_model(model: MoranModel) -> ValidationReport:
    """Check every model constraint; violations are returned, never raised.

    An independent model without weight atoms is a valid IFS family.
    """
    v: list[str] = []
    k = model.k
    if isinstance(k, bool) or not isinstance(k, int) or k < 2:
        v.append(f"k = {k!r} must be an integer ≥ 2")
        return ValidationReport(tuple(v))
    if model.mode not in ("dependent", "independent"):
        v.append(f"mode {model.mode!r} must be 'dependent' or 'independent'")
        return ValidationReport(tuple(v))
    if model.mode == "dependent":
        if model.ifs_atoms or model.weight_atoms:
            v.append("dependent model must not list ifs_atoms/weight_atoms")
        _check_masses("atom", [m for m, _, _ in model.atoms], v)
        ifs_list = [ifs for _, ifs, _ in model.atoms]
    else:
        if model.atoms:
            v.append("independent model must not list atoms")
        _check_masses("ifs atom", [m for m, _ in model.ifs_atoms], v)
        if model.weight_atoms:
            _check_masses("weight atom", [m for m, _ in model.weight_atoms], v)
        ifs_list = [ifs for _, ifs in model.ifs_atoms]
    sums = [math.fsum(ifs.scales) for ifs in ifs_list if ifs.k == k]
    tau = (1.0 - max(sums)) / k if sums else 0.0
    label = "atom" if model.mode == "dependent" else "ifs atom"
    for i, ifs in enumerate(ifs_list):
        _check_ifs(f"{label} {i}", ifs, k, tau, v)
    if model.mode == "dependent":
        for i, (_, _, w) in enumerate(model.atoms):
            _check_weights(f"atom {i}", w, k, v)
    else:
        for i, (_, w) in enumerate(model.weight_atoms):
            _check_weights(f"weight atom {i}", w, k, v)
    return ValidationReport(tuple(v))


def require_valid(model: MoranModel) -> MoranModel:
    """Return ``model`` or raise :class:`ModelValidationError` listing its violations."""
    if not model._cache.get("valid"):
        report = validate_model(model)
        if not report.ok:
            raise ModelValidationError("invalid model: " + "; ".join(report.violations),
                                       report.violations)
        model._cache["valid"] = True
    return model


# documents

def _num_list(obj, key, where):
    val = obj.get(key)
    if not isinstance(val, list) or not val:
        raise SchemaError(f"{where}: '{key}' must be a non-empty list of numbers")
    for x in val:
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise SchemaError(f"{where}: '{key}' must contain only numbers, got {x!r}")
    return [float(x) for x in val]


def _mass(obj, where):
    m = obj.get("mass")
    if isinstance(m, bool) or not isinstance(m, (int, float)):
        raise SchemaError(f"{where}: 'mass' must be a number")
    return float(m)


def _obj_list(doc, key, where="document"):
    val = doc.get(key)
    if not isinstance(val, list) or not val:
        raise SchemaError(f"{where}: '{key}' must be a non-empty list of objects")
    for i, x in enumerate(val):
        if not isinstance(x, dict):
            raise SchemaError(f"{key}[{i}]: must be an object")
    return val


def model_from_document(doc) -> MoranModel:
    """Build a model from a parsed document without validating its values."""
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    if "alphas" in doc or "base" in doc:
        return load_k2(doc).ifs_model(orientation="input")
    k = doc.get("k")
    if isinstance(k, bool) or not isinstance(k, int):
        raise SchemaError(f"'k' must be an integer, got {k!r}")
    mode = doc.get("mode")
    if mode == "dependent":
        atoms = []
        for i, a in enumerate(_obj_list(doc, "atoms")):
            where = f"atoms[{i}]"
            offs = _num_list(a, "offsets", where) if "offsets" in a else None
            atoms.append((_mass(a, where), IfsAtom(_num_list(a, "scales", where), offs),
                          WeightAtom(_num_list(a, "weights", where))))
        return MoranModel.dependent(atoms, k=k)
    if mode == "independent":
        ifs = []
        for i, a in enumerate(_obj_list(doc, "ifs_atoms")):
            where = f"ifs_atoms[{i}]"
            offs = _num_list(a, "offsets", where) if "offsets" in a else None
            ifs.append((_mass(a, where), IfsAtom(_num_list(a, "scales", where), offs)))
        wts = []
        if doc.get("weight_atoms") is not None:
            for i, a in enumerate(_obj_list(doc, "weight_atoms")):
                where = f"weight_atoms[{i}]"
                wts.append((_mass(a, where), WeightAtom(_num_list(a, "weights", where))))
        return MoranModel.independent(ifs, wts, k=k)
    raise SchemaError(f"'mode' must be 'dependent' or 'independent', got {mode!r}")


def load_model(text: str) -> MoranModel:
    """Parse and validate a JSON model document (either schema).

    Raises
    ------
    SchemaError
        Malformed JSON or a missing/ill-typed field.
    ModelValidationError
        Well-formed document whose values break a model constraint.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc}") from exc
    return require_valid(model_from_document(doc))


def read_model(path) -> MoranModel:
    with open(path, encoding="utf-8") as fh:
        return load_model(fh.read())


def model_to_document(model: MoranModel) -> dict:
    def ifs_obj(mass, ifs):
        obj = {"mass": mass, "scales": list(ifs.scales)}
        if ifs.offsets is not None:
            obj["offsets"] = list(ifs.offsets)
        return obj

    doc = {"k": model.k, "mode": model.mode}
    if model.mode == "dependent":
        doc["atoms"] = [dict(ifs_obj(m, ifs), weights=list(w.weights)) for m, ifs, w in model.atoms]
    else:
        doc["ifs_atoms"] = [ifs_obj(m, ifs) for m, ifs in model.ifs_atoms]
        if model.weight_atoms:
            doc["weight_atoms"] = [{"mass": m, "weights": list(w.weights)}
                                   for m, w in model.weight_atoms]
    return doc


def dumps_model(model: MoranModel, indent=2) -> str:
    return json.dumps(model_to_document(model), indent=indent, ensure_ascii=False)


# K = 2 exponent form

# exponents computed from raw scales carry rounding, so exact ties rarely survive
DIFF_TIE_TOL = 1e-12

@dataclass(frozen=True)
class K2Spec:
    """A two-similarity IFS family in exponent form, canonically ordered.

    Atom ``i`` has left scale ``base**alphas[i]`` and right scale
    ``base**betas[i]``.  Atoms are sorted so that ``betas - alphas`` is
    non-increasing, and at least one difference is non-negative; if the input
    had only negative differences, left and right were swapped and
    ``mirrored`` is set.  ``order[i]`` is the input position of canonical
    atom ``i``.

    Use :meth:`from_exponents` or :func:`to_k2`; the raw constructor checks
    the ordering invariants but does not sort.
    """

    base: float
    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    masses: tuple[float, ...]
    mirrored: bool = False
    order: tuple[int, ...] | None = None

    def __post_init__(self):
        for name in ("alphas", "betas", "masses"):
            object.__setattr__(self, name, _as_floats(getattr(self, name)))
        if self.order is None:
            object.__setattr__(self, "order", tuple(range(len(self.alphas))))
        if not 0 < self.base < 1:
            raise PreconditionError(f"base {self.base} must lie in (0, 1)")
        n = len(self.alphas)
        if n == 0 or len(self.betas) != n or len(self.masses) != n:
            raise PreconditionError("alphas, betas and masses must be non-empty and equal length")
        if any(not (x > 0 and math.isfinite(x)) for x in self.alphas + self.betas):
            raise PreconditionError("exponents must be positive and finite")
        if any(not m > 0 for m in self.masses):
            raise PreconditionError("masses must be positive")
        d = self.diffs
        if np.any(np.diff(d) > 0):
            raise PreconditionError("betas - alphas must be non-increasing")
        if d[0] < 0:
            raise PreconditionError("at least one beta - alpha must be non-negative")

    @classmethod
    def from_exponents(cls, base, alphas, betas, masses=None):
        """Sort (and mirror if needed) raw exponents into canonical form."""
        alphas, betas = _as_floats(alphas), _as_floats(betas)
        n = len(alphas)
        if masses is None:
            masses = (1.0 / n,) * n
        masses = _masses(masses)
        mirrored = all(b - a < 0 for a, b in zip(alphas, betas))
        if mirrored:
            alphas, betas = betas, alphas
        order = sorted(range(n), key=lambda i: -(betas[i] - alphas[i]))
        return cls(base=float(base),
                   alphas=tuple(alphas[i] for i in order),
                   betas=tuple(betas[i] for i in order),
                   masses=tuple(masses[i] for i in order),
                   mirrored=mirrored, order=tuple(order))

    @property
    def L(self):
        return len(self.alphas)

    @cached_property
    def diffs(self):
        return np.array(self.betas) - np.array(self.alphas)

    @cached_property
    def tie_tol(self):
        """Differences closer than this are treated as equal (and as zero)."""
        return DIFF_TIE_TOL * max(1.0, float(np.max(np.abs(self.diffs))))

    @cached_property
    def N(self):
        """Number of atoms with ``beta - alpha >= 0`` up to :attr:`tie_tol`."""
        return int(np.count_nonzero(self.diffs >= -self.tie_tol))

    @cached_property
    def S(self):
        """``S[j]``: total mass of the first ``j`` atoms, ``j = 0..L``."""
        return np.concatenate([[0.0], np.cumsum(self.masses)])

    @cached_property
    def T(self):
        """``T[j] = sum_{i<=j} alpha_i pi_i + sum_{i>j} beta_i pi_i``, ``j = 0..L``."""
        ap = np.array(self.alphas) * np.array(self.masses)
        bp = np.array(self.betas) * np.array(self.masses)
        head = np.concatenate([[0.0], np.cumsum(ap)])
        tail = np.concatenate([np.cumsum(bp[::-1])[::-1], [0.0]])
        return head + tail

    @property
    def log_base(self):
        return math.log(self.base)

    def user_p(self, p):
        """Map a canonical-orientation left weight to the input orientation."""
        return 1.0 - p if self.mirrored else p

    canonical_p = user_p

    def ifs_model(self, orientation="canonical") -> MoranModel:
        """The IFS family (no weights) with scales ``base**exponent``.

        ``orientation="input"`` restores the input atom order and left/right
        roles; ``"canonical"`` keeps the sorted, unmirrored-if-needed form.
        """
        pairs = [(m, (self.base ** a, self.base ** b))
                 for m, a, b in zip(self.masses, self.alphas, self.betas)]
        if orientation == "input":
            inv = [0] * self.L
            for pos, orig in enumerate(self.order):
                inv[orig] = pos
            pairs = [pairs[inv[i]] for i in range(self.L)]
            if self.mirrored:
                pairs = [(m, (s[1], s[0])) for m, s in pairs]
        return MoranModel.independent(pairs, (), k=2)

    def to_document(self):
        return {"base": self.base, "alphas": list(self.alphas),
                "betas": list(self.betas), "masses": list(self.masses)}


def load_k2(doc) -> K2Spec:
    """Build a :class:`K2Spec` from a parsed K2 document ``{base, alphas, betas, masses?}``."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed JSON: {exc}") from exc
    base = doc.get("base")
    if isinstance(base, bool) or not isinstance(base, (int, float)):
        raise SchemaError("'base' must be a number")
    alphas = _num_list(doc, "alphas", "document")
    betas = _num_list(doc, "betas", "document")
    masses = _num_list(doc, "masses", "document") if "masses" in doc else None
    if len(betas) != len(alphas) or (masses is not None and len(masses) != len(alphas)):
        raise SchemaError("'alphas', 'betas' and 'masses' must have equal length")
    try:
        return K2Spec.from_exponents(float(base), alphas, betas, masses)
    except PreconditionError as exc:
        raise ModelValidationError(str(exc), [str(exc)]) from exc


def to_k2(model: MoranModel, base: float = 0.5) -> K2Spec:
    """Convert a K = 2 IFS family (or single-weight model) to exponent form.

    Exponents are ``log(scale) / log(base)``; atoms are sorted by
    ``beta - alpha`` non-increasing and mirrored when every difference is
    negative (see :class:`K2Spec`).  Any weight attached to the model is
    ignored: the exponent form describes the IFS family only.
    """
    if model.k != 2:
        raise PreconditionError(f"to_k2 needs K = 2, model has K = {model.k}")
    if not 0 < base < 1:
        raise PreconditionError(f"base {base} must lie in (0, 1)")
    if model.mode == "dependent":
        raise PreconditionError("to_k2 needs an independent model (an IFS family)")
    if len(model.weight_atoms) > 1:
        raise PreconditionError("to_k2 needs a single weight atom or none")
    lb = math.log(base)
    marg = model.ifs_marginal()
    for i, (_, ifs) in enumerate(marg):
        if ifs.k != 2 or any(not 0 < s < 1 for s in ifs.scales):
            raise PreconditionError(f"ifs atom {i}: degenerate scales {ifs.scales}")
    alphas = [math.log(ifs.scales[0]) / lb for _, ifs in marg]
    betas = [math.log(ifs.scales[1]) / lb for _, ifs in marg]
    return K2Spec.from_exponents(base, alphas, betas, [m for m, _ in marg])
