import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moranphi.errors import ModelValidationError, PreconditionError, SchemaError
from moranphi.model import (
    IfsAtom,
    K2Spec,
    MoranModel,
    WeightAtom,
    dumps_model,
    load_k2,
    load_model,
    model_to_document,
    to_k2,
    validate_model,
)
from moranphi.randmodels import random_model

CANTOR = MoranModel.single((1 / 3, 1 / 3), (0.5, 0.5))

THREE_IFS_DOC = {
    "base": 1 / 3,
    "alphas": [1.1, 1.1, 1],
    "betas": [4.1, 3.1, 2],
    "masses": [1 / 3, 1 / 3, 1 / 3],
}


def test_cantor_is_valid():
    assert validate_model(CANTOR).ok


def test_weight_sum_violation_message():
    rep = validate_model(MoranModel.single((1 / 3, 1 / 3), (0.5, 0.6)))
    assert not rep.ok
    assert any("weights sum 1.1 ≠ 1" in v for v in rep.violations)


def test_scale_sum_violation_message():
    rep = validate_model(MoranModel.single((0.5, 0.6), (0.5, 0.5)))
    assert any("scale sum 1.1 ≥ 1" in v for v in rep.violations)


def test_violation_names_the_atom():
    m = MoranModel.dependent([(0.5, (0.2, 0.3), (0.5, 0.5)), (0.5, (0.2, 0.3), (0.0, 1.0))])
    rep = validate_model(m)
    assert rep.violations == ("atom 1: weight 0 is not strictly positive",)


def test_mismatched_k_and_masses():
    m = MoranModel.independent([(0.5, (0.2, 0.3)), (0.6, (0.1, 0.1, 0.1))], [(1.0, (0.5, 0.5))], k=2)
    text = " | ".join(validate_model(m).violations)
    assert "masses sum 1.1 ≠ 1" in text
    assert "ifs atom 1: has 3 scales, expected K = 2" in text


def test_near_unit_weights_are_renormalised_exactly():
    w = WeightAtom((0.3, 0.7 + 5e-13))
    assert math.fsum(w.weights) == 1.0
    assert WeightAtom(w.weights) == w


def test_offsets_must_respect_tau():
    # B = 0.6, tau = 0.2; gap 0.1 between the children is too small
    bad = MoranModel.dependent([(1.0, IfsAtom((0.3, 0.3), (0.0, 0.4)), (0.5, 0.5))])
    assert any("below tau" in v for v in validate_model(bad).violations)
    good = MoranModel.dependent([(1.0, IfsAtom((0.3, 0.3), (0.0, 0.7)), (0.5, 0.5))])
    assert validate_model(good).ok


def test_even_gap_layout():
    assert IfsAtom((1 / 3, 1 / 3)).layout() == pytest.approx((0.0, 2 / 3))
    assert IfsAtom((0.2, 0.1, 0.3)).layout() == pytest.approx((0.0, 0.4, 0.7))


def test_three_ifs_document_loads_as_k2_family():
    m = load_model(json.dumps(THREE_IFS_DOC))
    assert m.mode == "independent" and len(m.ifs_atoms) == 3 and m.k == 2
    spec = to_k2(m, base=1 / 3)
    assert spec.alphas == pytest.approx((1.1, 1.1, 1.0), abs=1e-12)


def test_schema_error_on_string_k():
    doc = {"k": "two", "mode": "dependent", "atoms": []}
    with pytest.raises(SchemaError):
        load_model(json.dumps(doc))


def test_malformed_json_and_validation_error():
    with pytest.raises(SchemaError):
        load_model("{not json")
    doc = {"k": 2, "mode": "dependent", "atoms": [{"mass": 1, "scales": [0.5, 0.6], "weights": [0.5, 0.5]}]}
    with pytest.raises(ModelValidationError) as exc:
        load_model(json.dumps(doc))
    assert not isinstance(exc.value, SchemaError)
    assert exc.value.violations


def test_independent_iterates_product():
    m = MoranModel.independent([(0.25, (0.2, 0.3)), (0.75, (0.1, 0.4))],
                               [(0.5, (0.5, 0.5)), (0.5, (0.1, 0.9))])
    rows = list(m.iter_lambda())
    assert len(rows) == 4 and m.n_atoms == 4
    assert [r[0] for r in rows] == pytest.approx([0.125, 0.125, 0.375, 0.375])
    assert rows[1][1].scales == (0.2, 0.3) and rows[1][2].weights == (0.1, 0.9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_document_round_trip(seed):
    m = random_model(np.random.default_rng(seed))
    back = load_model(dumps_model(m))
    assert back == m
    assert model_to_document(back) == model_to_document(m)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_valid_models_have_positive_atoms(seed):
    m = random_model(np.random.default_rng(seed))
    assert validate_model(m).ok
    lam = m.expand()
    assert np.all(lam.masses > 0) and np.all(lam.weights > 0)
    assert np.all(lam.scales.sum(axis=1) < 1)


def test_to_k2_exponents():
    m = MoranModel.independent([(1.0, (0.5 ** 1.1, 0.5 ** 10.1))])
    spec = to_k2(m, 0.5)
    assert spec.alphas[0] == pytest.approx(1.1, abs=1e-12)
    assert spec.betas[0] == pytest.approx(10.1, abs=1e-12)
    assert not spec.mirrored


def test_to_k2_mirrors_when_all_right_larger():
    m = MoranModel.independent([(0.5, (0.1, 0.4)), (0.5, (0.2, 0.3))])
    spec = to_k2(m)
    assert spec.mirrored
    assert np.all(spec.diffs[:1] >= 0)
    assert spec.user_p(0.3) == pytest.approx(0.7)


def test_to_k2_rejects_wrong_shapes():
    with pytest.raises(PreconditionError):
        to_k2(MoranModel.independent([(1.0, (0.1, 0.2, 0.3))]))
    with pytest.raises(PreconditionError):
        to_k2(CANTOR)


def _rand_pairs(rng, n):
    return [(m, tuple(rng.uniform(0.05, 0.45, 2))) for m in np.full(n, 1.0 / n)]


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 8))
def test_to_k2_idempotent(seed, n):
    fam = MoranModel.independent(_rand_pairs(np.random.default_rng(seed), n))
    s1 = to_k2(fam, 0.5)
    s2 = to_k2(s1.ifs_model(orientation="input"), 0.5)
    for name in ("alphas", "betas", "masses"):
        assert np.allclose(getattr(s1, name), getattr(s2, name), atol=1e-12, rtol=0)
    assert s1.N == s2.N
    assert np.allclose(s1.S, s2.S, atol=1e-12) and np.allclose(s1.T, s2.T, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 8),
       st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_base_change_invariance_of_t(seed, n, b1, b2):
    fam = MoranModel.independent(_rand_pairs(np.random.default_rng(seed), n))
    s1, s2 = to_k2(fam, b1), to_k2(fam, b2)
    assert np.allclose(s1.T * math.log(b1), s2.T * math.log(b2), atol=1e-12, rtol=0)


def test_k2_base_change_by_hand():
    # T_j log a is the mass-weighted sum of raw log scales: left for the first j atoms
    fam = load_model(json.dumps(THREE_IFS_DOC))
    s_third, s_half = to_k2(fam, 1 / 3), to_k2(fam, 0.5)
    log_scales = np.log([ifs.scales for _, ifs in fam.ifs_atoms])
    direct = [np.sum(np.concatenate([log_scales[:j, 0], log_scales[j:, 1]])) / 3 for j in range(4)]
    assert np.allclose(s_third.T * math.log(1 / 3), direct, atol=1e-12)
    assert np.allclose(s_half.T * math.log(0.5), direct, atol=1e-12)


def test_k2spec_t_monotone_structure():
    spec = load_k2(THREE_IFS_DOC)
    T, N = spec.T, spec.N
    assert N == 3
    assert np.all(np.diff(T[: N + 1]) <= 1e-15)
    assert np.all(np.diff(T[N:]) >= -1e-15)
    assert T[3] == pytest.approx(3.2 / 3)


def test_k2spec_rejects_unsorted_raw_constructor():
    with pytest.raises(PreconditionError):
        K2Spec(0.5, (1.0, 1.0), (1.5, 3.0), (0.5, 0.5))
    with pytest.raises(PreconditionError):
        K2Spec(1.5, (1.0,), (2.0,), (1.0,))


def test_k2_document_with_bad_base():
    with pytest.raises(SchemaError):
        load_k2({"base": "half", "alphas": [1], "betas": [2]})
    with pytest.raises(ModelValidationError):
        load_k2({"base": 2.0, "alphas": [1], "betas": [2]})


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.05, 0.95), min_size=2, max_size=6))
def test_normalisation_is_exact_and_idempotent(raw):
    total = sum(raw)
    w = WeightAtom(tuple(x / total for x in raw)).weights
    assert math.fsum(w) == 1.0
    assert WeightAtom(w).weights == w


def test_round_trip_regression_rounded_largest_weight():
    # 1 - sum(others) rounds for this vector
    w = WeightAtom((0.057356471150577286, 0.4242456483108759, 0.5183978805385467)).weights
    assert math.fsum(w) == 1.0 and WeightAtom(w).weights == w
