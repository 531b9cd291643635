import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moranphi import dims, synth
from moranphi.errors import PreconditionError
from moranphi.model import K2Spec, MoranModel, WeightAtom, load_model
from moranphi.randmodels import random_ifs_family, random_weights

LN2_LN3 = math.log(2) / math.log(3)
CANTOR_FAM = MoranModel.independent([(1.0, (1 / 3, 1 / 3))])
GOLDEN_FAM = MoranModel.independent([(1.0, (0.25, 0.5))])
D_GOLDEN = math.log2((1 + math.sqrt(5)) / 2)
TEN_IFS = K2Spec.from_exponents(
    0.5, (1.1, 1.3, 1.5, 1.8, 1.7, 1.9, 1.6, 2.9, 5, 7), (10.1, 7.0, 4.6, 4.2, 2.8, 2.2, 1.7, 1.6, 2.8, 3))
THREE_IFS = K2Spec.from_exponents(1 / 3, (1.1, 1.1, 1), (4.1, 3.1, 2))

# frozen from a plain-Python brute force over selectors with a bounded scalar minimiser
MIN_M_TEN = 0.5359565700285309
MIN_M_THREE = 0.4138429744897821


def test_upper_cantor_at_d_is_uniform():
    out = synth.synth_upper_dependent(CANTOR_FAM, LN2_LN3)
    assert out.weights[0] == pytest.approx((0.5, 0.5), abs=1e-15)
    assert out.achieved == pytest.approx(LN2_LN3, abs=1e-12)


def test_upper_equicontractive_third():
    out = synth.synth_upper_dependent(CANTOR_FAM, 1.0)
    assert out.mechanism == "q-floor"
    assert out.q == pytest.approx(1 / 3, abs=1e-15)
    assert out.weights[0] == pytest.approx((1 / 3, 2 / 3), abs=1e-15)
    assert dims.updim(out.to_model()) == pytest.approx(1.0, abs=1e-9)


def _power_rule_oracle(scales, d):
    """Solve t - log(sum a^t)/log(a_min) = d by plain bisection."""
    f = lambda t: t - math.log(sum(a ** t for a in scales)) / math.log(min(scales)) - d
    lo, hi = 0.0, 50.0
    for _ in range(200):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if f(mid) < 0 else (lo, mid)
    return (lo + hi) / 2


def test_upper_golden_target_one():
    out = synth.synth_upper_dependent(GOLDEN_FAM, 1.0)
    t = _power_rule_oracle((0.25, 0.5), 1.0)
    assert out.mechanism == "natural-power-t" and out.t == pytest.approx(t, abs=1e-10)
    z = 0.25 ** t + 0.5 ** t
    assert out.weights[0] == pytest.approx((0.25 ** t / z, 0.5 ** t / z), abs=1e-10)
    assert abs(out.achieved - 1.0) <= 1e-6


def test_upper_rejects_below_d():
    with pytest.raises(PreconditionError, match="0.6309"):
        synth.synth_upper_dependent(CANTOR_FAM, 0.5)
    with pytest.raises(PreconditionError):
        synth.synth_upper_dependent(CANTOR_FAM, math.inf)


def test_lower_cantor_examples():
    out = synth.synth_lower_dependent(CANTOR_FAM, LN2_LN3)
    assert out.weights[0] == pytest.approx((0.5, 0.5), abs=1e-12)
    d = math.log(4 / 3) / math.log(3)
    out = synth.synth_lower_dependent(CANTOR_FAM, d)
    assert out.mechanism == "q-cap" and out.q == pytest.approx(0.75, abs=1e-15)
    assert out.weights[0] == pytest.approx((0.25, 0.75), abs=1e-15)
    assert dims.lowdim(out.to_model()) == pytest.approx(d, abs=1e-9)


def test_lower_golden_at_d_gives_natural_weights():
    out = synth.synth_lower_dependent(GOLDEN_FAM, dims.hausdorff_d(GOLDEN_FAM))
    assert out.t == pytest.approx(D_GOLDEN, abs=1e-11)
    phi = (1 + math.sqrt(5)) / 2
    assert out.weights[0] == pytest.approx((1 / phi ** 2, 1 / phi), abs=1e-10)


def test_lower_rejects_out_of_range():
    for bad in (0.0, -1.0, 0.7, math.nan):
        with pytest.raises(PreconditionError):
            synth.synth_lower_dependent(CANTOR_FAM, bad)


def test_weights_are_unpermuted():
    fam = MoranModel.independent([(0.5, (0.1, 0.3, 0.2)), (0.5, (0.3, 0.2, 0.25))])
    out = synth.synth_upper_dependent(fam, dims.hausdorff_d(fam) + 0.3)
    for (_, ifs), w in zip(fam.ifs_atoms, out.weights):
        # the power rule keeps each weight increasing with its scale
        assert np.argsort(ifs.scales).tolist() == np.argsort(w).tolist()
    low = synth.synth_lower_dependent(fam, 0.05)
    assert [int(np.argmax(w)) for w in low.weights] == [0, 1]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.0, 2.0))
def test_round_trip_upper(seed, extra):
    fam = random_ifs_family(np.random.default_rng(seed))
    d = dims.hausdorff_d(fam) + extra
    out = synth.synth_upper_dependent(fam, d)
    for w in out.weights:
        WeightAtom(w)
        assert math.fsum(w) == pytest.approx(1.0, abs=1e-15) and min(w) > 0
    assert abs(dims.updim(out.to_model()) - d) <= 1e-6


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.01, 1.0))
def test_round_trip_lower(seed, frac):
    fam = random_ifs_family(np.random.default_rng(seed))
    d = dims.hausdorff_d(fam) * frac
    out = synth.synth_lower_dependent(fam, d)
    assert abs(dims.lowdim(out.to_model()) - d) <= 1e-6


def test_synthesised_model_serialises():
    out = synth.synth_upper_dependent(GOLDEN_FAM, 1.2)
    doc = out.to_dict()["model"]
    import json

    back = load_model(json.dumps(doc))
    assert dims.updim(back) == pytest.approx(1.2, abs=1e-6)


def test_m_of_p_examples():
    assert synth.m_of_p(CANTOR_FAM, (0.5, 0.5)) == pytest.approx(LN2_LN3, abs=1e-12)
    fam3 = THREE_IFS.ifs_model()
    # log 2 / (T_N |log a|) with T_N = 3.2 / 3
    assert synth.m_of_p(fam3, (0.5, 0.5)) == pytest.approx(math.log(2) / (3.2 / 3 * math.log(3)), abs=1e-12)
    assert synth.m_of_p(fam3, (1e-6, 1 - 1e-6)) > 10
    assert synth.mprime_of_p(fam3, (0.5, 0.5)) < dims.hausdorff_d(fam3)


def test_m_of_p_rejects_invalid():
    for bad in ((0.5, 0.6), (0.0, 1.0), (1.0,), (-0.1, 1.1)):
        with pytest.raises(PreconditionError):
            synth.m_of_p(CANTOR_FAM, bad)


def test_min_updim_single_examples():
    p, d = synth.min_updim_single(TEN_IFS.ifs_model())
    assert d == pytest.approx(MIN_M_TEN, abs=1e-8)
    assert abs(d - 0.5360) < 5e-4
    p, d = synth.min_updim_single(THREE_IFS.ifs_model())
    assert d == pytest.approx(MIN_M_THREE, abs=1e-8)
    p, d = synth.min_updim_single(CANTOR_FAM)
    assert p == pytest.approx((0.5, 0.5), abs=1e-12) and d == pytest.approx(LN2_LN3, abs=1e-12)


def test_max_lowdim_single_examples():
    q, d = synth.max_lowdim_single(CANTOR_FAM)
    assert q == pytest.approx((0.5, 0.5), abs=1e-12) and d == pytest.approx(LN2_LN3, abs=1e-12)
    fam3 = THREE_IFS.ifs_model()
    q, d = synth.max_lowdim_single(fam3)
    assert d < dims.hausdorff_d(fam3)
    equi = MoranModel.independent([(0.3, (0.2, 0.2, 0.2)), (0.7, (0.1, 0.1, 0.1))])
    q, d = synth.max_lowdim_single(equi)
    assert q == pytest.approx((1 / 3,) * 3, abs=1e-9)
    assert d == pytest.approx(dims.hausdorff_d(equi), abs=1e-9)


def test_search_preconditions():
    with pytest.raises(PreconditionError):
        synth.min_updim_single(CANTOR_FAM, grid=10)


def test_search_beats_random_weights():
    fam = MoranModel.independent([(0.5, (0.2, 0.3, 0.1)), (0.5, (0.25, 0.15, 0.3))])
    p, d = synth.min_updim_single(fam)
    q, dl = synth.max_lowdim_single(fam)
    rng = np.random.default_rng(0)
    for _ in range(30):
        w = random_weights(rng, 3)
        assert synth.m_of_p(fam, w) >= d - 1e-12
        assert synth.mprime_of_p(fam, w) <= dl + 1e-12


def test_natural_weights_examples():
    assert synth.natural_weights((1 / 3, 1 / 3), 0.4) == pytest.approx((0.5, 0.5), abs=1e-15)
    w = synth.natural_weights((0.25, 0.5), D_GOLDEN)
    assert w == pytest.approx((1 / (1 + 2 ** D_GOLDEN), 2 ** D_GOLDEN / (1 + 2 ** D_GOLDEN)), abs=1e-14)
    assert w == pytest.approx((0.3820, 0.6180), abs=1e-4)
    a = synth.natural_weights((0.1, 0.3, 0.2), 0.7)
    b = synth.natural_weights((0.3, 0.2, 0.1), 0.7)
    assert b == pytest.approx((a[1], a[2], a[0]), abs=1e-15)
    with pytest.raises(PreconditionError):
        synth.natural_weights((0.1, 0.2), 0.0)


def test_detect_gap_examples():
    two = MoranModel.independent([(0.5, (1 / 3, 1 / 3)), (0.5, (0.25, 0.5))])
    v = synth.detect_gap(two)
    D = dims.hausdorff_d(two)
    assert v.has_gap
    i, j, j2, e1, e2 = v.witness
    assert i == 1 and {j, j2} == {0, 1}
    assert sorted([e1, e2]) == pytest.approx(sorted([0.5, 1 / (1 + 2 ** D)]), abs=1e-12)
    equi = MoranModel.independent([(0.5, (0.2, 0.2)), (0.5, (0.1, 0.1))])
    v = synth.detect_gap(equi)
    assert not v.has_gap and v.common_weights == pytest.approx((0.5, 0.5), abs=1e-15)
    assert synth.detect_gap(TEN_IFS.ifs_model()).has_gap
    assert v.to_dict()["witness"] is None


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_no_gap_attainment(seed):
    # one IFS (possibly listed twice) never has a gap
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 4))
    scales = tuple(rng.uniform(0.05, 0.3, k))
    fam = MoranModel.independent([(0.4, scales), (0.6, scales)])
    v = synth.detect_gap(fam)
    assert not v.has_gap
    D = dims.hausdorff_d(fam)
    assert synth.m_of_p(fam, v.common_weights) == pytest.approx(D, abs=1e-9)
    assert synth.mprime_of_p(fam, v.common_weights) == pytest.approx(D, abs=1e-9)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_dominance_on_gapped_families(seed):
    fam = random_ifs_family(np.random.default_rng(seed), max_k=2)
    v = synth.detect_gap(fam)
    grid = np.linspace(0.01, 0.99, 99)
    m = [synth.m_of_p(fam, (p, 1 - p), method="newton") for p in grid]
    if v.has_gap:
        assert min(m) > v.D
    else:
        assert min(m) >= v.D - 1e-9


@pytest.mark.parametrize("offset", [0.0, 0.1, 1.0])
def test_interval_attainment_upper(offset):
    fam = THREE_IFS.ifs_model()
    _, d_star = synth.min_updim_single(fam)
    out = synth.attain_updim_single(fam, d_star + offset)
    assert abs(synth.m_of_p(fam, out.weights) - (d_star + offset)) <= 1e-6


@pytest.mark.parametrize("frac", [1.0, 0.5, 0.1])
def test_interval_attainment_lower(frac):
    fam = MoranModel.independent([(0.5, (0.2, 0.3, 0.1)), (0.5, (0.25, 0.15, 0.3))])
    _, d_star = synth.max_lowdim_single(fam)
    out = synth.attain_lowdim_single(fam, d_star * frac)
    assert abs(synth.mprime_of_p(fam, out.weights) - d_star * frac) <= 1e-6


def test_interval_attainment_rejects_unreachable():
    fam = THREE_IFS.ifs_model()
    with pytest.raises(PreconditionError):
        synth.attain_updim_single(fam, 0.3)
    with pytest.raises(PreconditionError):
        synth.attain_lowdim_single(fam, 0.5)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_mixtures_never_beat_the_better_pure_weight(seed):
    rng = np.random.default_rng(seed)
    fam = random_ifs_family(rng)
    k = fam.k
    w1, w2 = random_weights(rng, k), random_weights(rng, k)
    m = float(rng.uniform(0.1, 0.9))
    mix = fam.with_weight_distribution([(m, w1), (1 - m, w2)])
    assert dims.updim(mix) >= min(synth.m_of_p(fam, w1), synth.m_of_p(fam, w2)) - 1e-12
