import hypothesis.extra.numpy as hnp
import hypothesis.strategies as st
import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings

from ncplay import presets
from ncplay.bvcalc import (
    Path,
    TimeChange,
    arc_length_profile,
    bv_distance,
    combine,
    compose_time_change,
    from_csv,
    identity_time_change,
    refine,
    reparametrize_by_arclength,
    speed_profile,
    strict_distance,
    sup_distance,
    to_csv,
    variation,
)
from ncplay.errors import BadInterval, DegenerateVariation, DimensionMismatch, InvalidPath


def dense_eval(f, t):
    """Independent linear interpolation (no np.interp)."""
    k = np.clip(np.searchsorted(f.times, t, side="right") - 1, 0, len(f) - 2)
    lam = (t - f.times[k]) / (f.times[k + 1] - f.times[k])
    return f.values[k] + lam[:, None] * (f.values[k + 1] - f.values[k])


def dense_variation(f, a=0.0, b=None, n=200_001):
    b = f.T if b is None else b
    t = np.union1d(np.linspace(a, b, n), f.times[(f.times >= a) & (f.times <= b)])
    return float(np.sum(np.linalg.norm(np.diff(dense_eval(f, t), axis=0), axis=1)))


@st.composite
def paths(draw, dim=2, T=1.0, max_n=12):
    n = draw(st.integers(2, max_n))
    gaps = draw(hnp.arrays(float, n - 1, elements=st.floats(0.05, 1.0)))
    t = np.concatenate([[0.0], np.cumsum(gaps)])
    t = t * (T / t[-1])
    t[-1] = T
    v = draw(hnp.arrays(float, (n, dim), elements=st.floats(-3.0, 3.0)))
    return Path(t, v)


ZIGZAG = Path([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])


def test_path_validation():
    with pytest.raises(InvalidPath):
        Path([0.0, 1.0, 1.0], [0.0, 1.0, 2.0])
    with pytest.raises(InvalidPath):
        Path([0.0], [0.0])
    with pytest.raises(InvalidPath):
        Path([0.5, 1.0], [0.0, 1.0])
    with pytest.raises(InvalidPath):
        TimeChange([0.0, 1.0, 2.0], [0.0, 1.5, 1.0])
    with pytest.raises(InvalidPath):
        TimeChange([0.0, 1.0], [0.0, 0.5])


def test_variation_examples():
    assert variation(Path([0, 1, 2], [[0, 0], [1, 0], [1, 1]])) == 2.0
    assert variation(Path([0, 1], [3.0, 3.0])) == 0.0
    assert variation(ZIGZAG, 0.5, 1.5) == 1.0


def test_variation_bad_interval():
    with pytest.raises(BadInterval):
        variation(ZIGZAG, 1.5, 0.5)
    with pytest.raises(BadInterval):
        variation(ZIGZAG, 0.0, 3.0)


@settings(max_examples=30, deadline=None)
@given(f=paths(), a=st.floats(0, 1), b=st.floats(0, 1))
def test_variation_matches_dense_oracle(f, a, b):
    a, b = min(a, b), max(a, b)
    assert variation(f, a, b) == pytest.approx(dense_variation(f, a, b, 2001), rel=1e-12, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(f=paths(), cuts=st.lists(st.floats(0, 1), min_size=3, max_size=3))
def test_variation_additive(f, cuts):
    a, b, c = sorted(cuts)
    assert variation(f, a, b) + variation(f, b, c) == pytest.approx(variation(f, a, c), abs=1e-12)


def test_sup_distance_examples():
    f = Path([0, 1], [0.0, 1.0])
    assert sup_distance(f, f) == 0.0
    assert sup_distance(f, Path([0, 1], [0.0, 2.0])) == 1.0
    assert sup_distance(f, refine(f, 3)) == 0.0


def test_sup_distance_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        sup_distance(Path([0, 1], [0.0, 1.0]), Path([0, 1], [[0, 0], [1, 1]]))


@settings(max_examples=30, deadline=None)
@given(f=paths(), g=paths())
def test_sup_distance_dense_oracle(f, g):
    t = np.linspace(0, 1, 20001)
    dense = np.max(np.linalg.norm(dense_eval(f, t) - dense_eval(g, t), axis=1))
    assert sup_distance(f, g) >= dense - 1e-12
    assert sup_distance(f, g) <= dense + 1e-3


def test_bv_and_strict_examples():
    f = Path([0, 0.5, 1], [0.0, 0.1, 0.0])
    g = Path([0, 0.5, 1], [0.0, -0.1, 0.0])
    assert bv_distance(f, f) == 0.0
    assert bv_distance(f, g) == pytest.approx(0.6, abs=1e-15)
    assert strict_distance(f, g) == pytest.approx(0.2, abs=1e-15)
    assert strict_distance(f, f) == 0.0
    h = Path([0, 1], [0.0, 1.0])
    assert strict_distance(h, Path([0, 1], [0.0, 2.0])) == 2.0
    c = np.array([0.3, -0.4])
    p = Path([0, 0.3, 1], [[0, 0], [1, 2], [0, 1]])
    assert bv_distance(p, Path(p.times, p.values + c)) == pytest.approx(0.5, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(f=paths(), g=paths())
def test_metric_inequalities(f, g):
    diff = combine(f, g, 1.0, -1.0)
    assert abs(variation(f) - variation(g)) <= variation(diff) + 1e-12
    assert strict_distance(f, g) <= bv_distance(f, g) + 1e-12


@settings(max_examples=30, deadline=None)
@given(f=paths(), g=paths(), lf=st.integers(0, 2), lg=st.integers(0, 2))
def test_metrics_refinement_invariant(f, g, lf, lg):
    rf, rg = refine(f, lf), refine(g, lg)
    assert variation(rf) == pytest.approx(variation(f), abs=1e-12)
    for metric in (sup_distance, bv_distance, strict_distance):
        assert metric(rf, rg) == pytest.approx(metric(f, g), abs=1e-12)


def test_refine_examples():
    assert refine(ZIGZAG, 0) is ZIGZAG
    r = refine(Path([0, 1], [0.0, 1.0]), 3)
    assert len(r) == 9
    npt.assert_array_equal(r.values[[0, -1], 0], [0.0, 1.0])
    assert variation(refine(ZIGZAG, 4)) == variation(ZIGZAG)


def test_arc_length_profile_examples():
    f = Path([0, 1], [[0, 0], [1, 0]])
    npt.assert_array_equal(arc_length_profile(f).values[:, 0], [0.0, 1.0])
    g = Path([0, 0.5, 1], [0.0, 0.9, 1.0])
    npt.assert_allclose(arc_length_profile(g).values[:, 0], [0.0, 0.9, 1.0], atol=1e-15)
    const = Path([0, 0.5, 1], [2.0, 2.0, 2.0])
    npt.assert_array_equal(arc_length_profile(const).values[:, 0], 0.0)


def test_reparametrize_examples():
    f = Path([0, 1], [[0, 0], [1, 0]])
    ell, ft = reparametrize_by_arclength(f)
    npt.assert_array_equal(ft.values, f.values)
    npt.assert_array_equal(ell.values[:, 0], f.times)
    g = Path([0, 0.5, 1], [0.0, 0.9, 1.0])
    _, gt = reparametrize_by_arclength(g)
    npt.assert_allclose(speed_profile(gt), 1.0, atol=1e-12)
    with pytest.raises(DegenerateVariation):
        reparametrize_by_arclength(Path([0, 1], [1.0, 1.0]))


def test_reparametrize_plateau_dense():
    f = Path([0, 1, 2, 3, 4], [[0, 0], [1, 0], [1, 0], [1, 1], [1, 1]])
    ell, ft = reparametrize_by_arclength(f)
    assert np.all(ft.segment_lengths() > 0)
    t = np.linspace(0, f.T, 40001)
    back = dense_eval(ft, dense_eval(ell, t)[:, 0])
    npt.assert_allclose(back, dense_eval(f, t), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(f=paths(max_n=20))
def test_reparametrization_identities(f):
    if variation(f) < 1e-6:
        return
    ell, ft = reparametrize_by_arclength(f)
    assert sup_distance(compose_time_change(ft, ell), f) <= 1e-12 * max(1.0, np.abs(f.values).max())
    # a segment's time step carries absolute rounding ~eps*T, so speeds are only
    # resolvable to 1e-9 on segments that are not vanishingly short
    lengths = ft.segment_lengths()
    ok = lengths >= 1e-6 * variation(f)
    npt.assert_allclose(speed_profile(ft)[ok], variation(f) / f.T, rtol=1e-9)


def test_compose_examples():
    f = presets.circle_arc(T=1.0, n=9)
    same = compose_time_change(f, identity_time_change(1.0))
    assert sup_distance(same, f) == 0.0
    phi = TimeChange([0, 0.3, 0.6, 1.0], [0.0, 0.4, 0.4, 1.0])
    out = compose_time_change(f, phi)
    mask = (out.times >= 0.3) & (out.times <= 0.6)
    npt.assert_array_equal(out.values[mask], np.tile(f(0.4), (mask.sum(), 1)))
    t = np.linspace(0, 1, 11)
    sq = compose_time_change(Path([0, 1], [0.0, 1.0]), TimeChange(t, t**2))
    npt.assert_allclose(sq.values[:, 0], t**2, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(f=paths(max_n=8), knots=st.lists(st.floats(0.01, 0.99), min_size=1, max_size=6))
def test_compose_exact_against_dense(f, knots):
    s = np.sort(np.array(knots))
    t = np.linspace(0, 1, len(s) + 2)
    phi = TimeChange(t, np.concatenate([[0.0], s, [1.0]]))
    out = compose_time_change(f, phi)
    dense = np.linspace(0, 1, 5001)
    expect = dense_eval(f, dense_eval(phi, dense)[:, 0])
    npt.assert_allclose(dense_eval(out, dense), expect, atol=1e-12)


def test_csv_roundtrip(tmp_path):
    f = presets.lissajous(n=33)
    to_csv(f, tmp_path / "f.csv")
    g = from_csv(tmp_path / "f.csv")
    npt.assert_array_equal(g.times, f.times)
    npt.assert_array_equal(g.values, f.values)
    assert (tmp_path / "f.csv").read_text().splitlines()[0] == "t,v1,v2"


def test_csv_rejects_nonincreasing(tmp_path):
    (tmp_path / "bad.csv").write_text("t,v1\n0,0\n1,1\n1,2\n")
    with pytest.raises(InvalidPath):
        from_csv(tmp_path / "bad.csv")
