import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moranphi.errors import EnumerationCapError, PreconditionError
from moranphi.gcore import (
    Selector,
    argmax_index,
    argmin_index,
    enumerate_selectors,
    extreme_h,
    g_lower,
    g_upper,
    h_of_selector,
    selector_count,
)
from moranphi.model import MoranModel
from moranphi.randmodels import random_model

CANTOR = MoranModel.single((1 / 3, 1 / 3), (0.5, 0.5))
LN2_LN3 = math.log(2) / math.log(3)
TWO_ATOM = MoranModel.dependent([
    (0.5, (0.25, 0.5), (0.5, 0.5)),
    (0.5, (1 / 3, 1 / 3), (1 / 3, 2 / 3)),
])


def brute_h_values(model):
    """Every H(chi) by direct summation over the expanded atoms."""
    rows = list(model.iter_lambda())
    out = {}
    for chi in product(range(model.k), repeat=len(rows)):
        num = sum(m * math.log(w.weights[c]) for c, (m, _, w) in zip(chi, rows))
        den = sum(m * math.log(s.scales[c]) for c, (m, s, _) in zip(chi, rows))
        out[tuple(c + 1 for c in chi)] = num / den
    return out


def test_argmax_examples():
    assert argmax_index(7, (1 / 3, 1 / 3), (0.5, 0.5)) == 1
    assert argmax_index(1, (0.25, 0.5), (0.5, 0.5)) == 2
    assert argmax_index(0, (0.25, 0.5), (0.5, 0.5)) == 1


def test_argmin_examples():
    for theta in (0.0, 1.0, 5.0):
        assert argmin_index(theta, (1 / 3, 1 / 3), (1 / 3, 2 / 3)) == 2
    assert argmin_index(3, (1 / 3, 1 / 3), (0.5, 0.5)) == 1
    assert argmin_index(1, (0.25, 0.5), (0.5, 0.5)) == 1


def test_near_tie_goes_to_smallest_index():
    # ratios differ by one ulp of the log ratio
    w = (0.5, 0.5 * (1 + 2e-16))
    assert argmax_index(0.0, (0.2, 0.2), w) == 1
    assert argmin_index(0.0, (0.2, 0.2), w) == 1


def test_negative_theta_rejected():
    with pytest.raises(PreconditionError):
        argmax_index(-1.0, (0.2, 0.3), (0.5, 0.5))
    with pytest.raises(PreconditionError):
        g_upper(CANTOR, -0.5)


@pytest.mark.parametrize("theta", [0.0, 0.5, 1.0, 10.0])
def test_cantor_g_is_constant(theta):
    assert g_upper(CANTOR, theta).value == pytest.approx(LN2_LN3, abs=1e-15)
    assert g_lower(CANTOR, theta).value == pytest.approx(LN2_LN3, abs=1e-15)


def test_two_atom_g_upper_at_one():
    g = g_upper(TWO_ATOM, 1.0)
    assert tuple(g.chosen) == (2, 1)
    assert g.numerator == pytest.approx((math.log(0.5) + math.log(1 / 3)) / 2, abs=1e-15)
    assert g.denominator == pytest.approx(g.numerator, abs=1e-15)
    assert g.value == pytest.approx(1.0, abs=1e-15)


def test_two_atom_h_values():
    assert h_of_selector(TWO_ATOM, (2, 1)) == pytest.approx(1.0, abs=1e-15)
    # (ln 2 + ln(3/2)) / (ln 4 + ln 3)
    assert h_of_selector(TWO_ATOM, Selector((1, 2))) == pytest.approx(
        (math.log(2) + math.log(1.5)) / (math.log(4) + math.log(3)), abs=1e-15)
    vals = brute_h_values(TWO_ATOM)
    assert sorted(round(v, 4) for v in vals.values()) == [0.4421, 0.6131, 0.7211, 1.0]


def test_cantor_h():
    assert h_of_selector(CANTOR, (1,)) == pytest.approx(LN2_LN3, abs=1e-15)


def test_h_rejects_bad_selector():
    with pytest.raises(PreconditionError):
        h_of_selector(TWO_ATOM, (1,))
    with pytest.raises(PreconditionError):
        h_of_selector(TWO_ATOM, (1, 3))


def test_enumeration_counts_and_order():
    assert len(list(enumerate_selectors(TWO_ATOM))) == 4
    m3 = MoranModel.dependent([(1 / 3, (0.1, 0.2, 0.3), (0.2, 0.3, 0.5))] * 3)
    sels = [tuple(s) for s in enumerate_selectors(m3)]
    assert len(sels) == 27 and len(set(sels)) == 27
    assert sels == sorted(sels)


def test_enumeration_cap_refusal():
    big = MoranModel.dependent([(1 / 30, (0.2, 0.3), (0.5, 0.5))] * 30)
    assert selector_count(big) == 2 ** 30
    with pytest.raises(EnumerationCapError, match="bisect"):
        enumerate_selectors(big)
    with pytest.raises(EnumerationCapError):
        extreme_h(big)


def _random_dependent(rng, n):
    return MoranModel.dependent([(1 / n, tuple(rng.uniform(0.05, 0.3, 2)), tuple(rng.dirichlet((2, 2))))
                                 for _ in range(n)])


def test_extreme_h_matches_brute_force():
    small = _random_dependent(np.random.default_rng(5), 10)
    vals = brute_h_values(small)
    top, sel = extreme_h(small, upper=True)
    assert top == pytest.approx(max(vals.values()), abs=1e-14)
    assert h_of_selector(small, sel) == pytest.approx(top, abs=1e-14)
    low, _ = extreme_h(small, upper=False)
    assert low == pytest.approx(min(vals.values()), abs=1e-14)


def test_split_enumeration_agrees_with_bisection():
    from moranphi.dims import measure_dim

    big = _random_dependent(np.random.default_rng(6), 18)  # 2**18 selectors: head and tail
    for upper in (True, False):
        val, sel = extreme_h(big, upper=upper)
        assert h_of_selector(big, sel) == pytest.approx(val, abs=1e-14)
        assert measure_dim(big, upper, "bisect", 1e-12)[0] == pytest.approx(val, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0, 20))
def test_g_is_an_h_value_between_the_extremes(seed, theta):
    m = random_model(np.random.default_rng(seed))
    g = g_upper(m, theta)
    gl = g_lower(m, theta)
    assert g.numerator < 0 and g.denominator < 0 and 0 < g.value < math.inf
    assert h_of_selector(m, g.chosen) == pytest.approx(g.value, rel=1e-14)
    assert h_of_selector(m, gl.chosen) == pytest.approx(gl.value, rel=1e-14)
    lo, _ = extreme_h(m, upper=False)
    hi, _ = extreme_h(m, upper=True)
    assert lo - 1e-14 <= g.value <= hi + 1e-14
    assert lo - 1e-14 <= gl.value <= hi + 1e-14


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_k2_selection_switches_at_most_once(seed):
    rng = np.random.default_rng(seed)
    p = float(rng.uniform(0.05, 0.95))
    fam = MoranModel.independent([(0.25, tuple(rng.uniform(0.05, 0.45, 2))) for _ in range(4)])
    model = fam.with_weights((p, 1 - p))
    chosen = np.array([tuple(g_upper(model, t).chosen) for t in np.linspace(0, 30, 600)])
    switches = (np.diff(chosen, axis=0) != 0).sum(axis=0)
    assert np.all(switches <= 1)


def test_tie_break_determinism():
    m = random_model(np.random.default_rng(11))
    a = [tuple(g_upper(m, t).chosen) for t in np.linspace(0, 5, 50)]
    b = [tuple(g_upper(m, t).chosen) for t in np.linspace(0, 5, 50)]
    assert a == b
