"""Seeded generators of small random models for checks and demonstrations.

Scales are drawn uniformly from ``[0.05, 0.45]`` and redrawn until their sum
is below one.  Weights are drawn uniformly from ``[0.05, 0.95]`` and then
normalised, and masses likewise from ``[0.1, 1]``.  Every generator takes a
``numpy.random.Generator`` so that callers own the stream.
"""

from __future__ import annotations

import numpy as np

from .model import K2Spec, MoranModel

__all__ = ["random_scales", "random_weights", "random_model", "random_ifs_family", "random_k2_spec"]

SCALE_RANGE = (0.05, 0.45)
WEIGHT_RANGE = (0.05, 0.95)


def random_scales(rng: np.random.Generator, k: int) -> tuple[float, ...]:
    while True:
        s = rng.uniform(*SCALE_RANGE, size=k)
        if s.sum() < 1.0:
            return tuple(float(x) for x in s)


def random_weights(rng: np.random.Generator, k: int) -> tuple[float, ...]:
    w = rng.uniform(*WEIGHT_RANGE, size=k)
    return tuple(float(x) for x in w / w.sum())


def _masses(rng, n):
    m = rng.uniform(0.1, 1.0, size=n)
    return m / m.sum()


def random_model(rng: np.random.Generator, max_atoms: int = 6, max_k: int = 3) -> MoranModel:
    """A dependent or independent model with at most ``max_atoms`` expanded atoms."""
    k = int(rng.integers(2, max_k + 1))
    if rng.random() < 0.5:
        n = int(rng.integers(1, max_atoms + 1))
        atoms = [(m, random_scales(rng, k), random_weights(rng, k)) for m in _masses(rng, n)]
        return MoranModel.dependent(atoms, k=k)
    n_ifs = int(rng.integers(1, min(3, max_atoms) + 1))
    n_w = int(rng.integers(1, max_atoms // n_ifs + 1))
    ifs = [(m, random_scales(rng, k)) for m in _masses(rng, n_ifs)]
    wts = [(m, random_weights(rng, k)) for m in _masses(rng, n_w)]
    return MoranModel.independent(ifs, wts, k=k)


def random_ifs_family(rng: np.random.Generator, max_atoms: int = 4, max_k: int = 3) -> MoranModel:
    """An independent model without weights (an IFS family)."""
    k = int(rng.integers(2, max_k + 1))
    n = int(rng.integers(1, max_atoms + 1))
    return MoranModel.independent([(m, random_scales(rng, k)) for m in _masses(rng, n)], k=k)


def random_k2_spec(rng: np.random.Generator, max_l: int = 8, base: float = 0.5,
                   lo: float = 1.1, hi: float = 6.0, equal_masses: bool = True) -> K2Spec:
    """Exponent-form family with ``alpha, beta`` uniform in ``[lo, hi]``."""
    n = int(rng.integers(1, max_l + 1))
    alphas = rng.uniform(lo, hi, size=n)
    betas = rng.uniform(lo, hi, size=n)
    masses = None if equal_masses else _masses(rng, n)
    return K2Spec.from_exponents(base, alphas, betas, masses)
