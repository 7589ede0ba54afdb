import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from nwci.errors import DegenerateSample, InvalidSample, NoLocalData, NoValidBandwidth
from nwci.kernels import epanechnikov_kernel, gaussian_kernel
from nwci.simulation import draw_scenario_sample
from nwci.smoothing import (
    Sample,
    aicc_scores,
    effective_sample_size,
    kde_at,
    kde_curve,
    lscv_scores,
    nw_at,
    nw_at_design,
    nw_curve,
    select_density_bandwidth,
    select_h0_aicc,
    select_h0_lscv,
)

# mpmath oracle (30 digits) for xs={-1,0,1}, ys={0,1,1}, h=0.5, x=0:
# weights phi(2), phi(0), phi(2); sum 0.5069241...
KDE_3PT = 0.33794947561853919
NW_3PT = 0.89349302108079925
NEFF_3PT = 1.7969995484147387

THREE = Sample([-1.0, 0.0, 1.0], [0, 1, 1])


def _phi(u):
    return math.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)


def test_three_point_values():
    assert kde_at(THREE, 0.0, 0.5) == pytest.approx(KDE_3PT, rel=1e-13)
    assert nw_at(THREE, 0.0, 0.5) == pytest.approx(NW_3PT, rel=1e-13)
    assert effective_sample_size(THREE, 0.0, 0.5) == pytest.approx(NEFF_3PT, rel=1e-13)


def test_sample_validation():
    with pytest.raises(InvalidSample):
        Sample([0.0, 1.0], [0, 2])
    with pytest.raises(InvalidSample):
        Sample([0.0, np.nan], [0, 1])
    with pytest.raises(InvalidSample):
        Sample([0.0], [0, 1])
    with pytest.raises(InvalidSample):
        Sample([], [])
    s = Sample([0.0, 1.0], [True, False])
    assert s.ys.tolist() == [1.0, 0.0]
    with pytest.raises(ValueError):
        s.xs[0] = 3.0


def test_bad_bandwidth():
    with pytest.raises(ValueError):
        nw_at(THREE, 0.0, 0.0)
    with pytest.raises(ValueError):
        kde_at(THREE, 0.0, -1.0)


def test_no_local_data_far_away():
    with pytest.raises(NoLocalData):
        nw_at(THREE, 1e6, 0.1)
    with pytest.raises(NoLocalData):
        nw_at(THREE, 5.0, 0.5, epanechnikov_kernel())
    curve = nw_curve(THREE, [0.0, 1e6], 0.1)
    assert np.isfinite(curve[0]) and np.isnan(curve[1])


def test_large_h_limits():
    rng = np.random.default_rng(1)
    xs = rng.normal(size=50)
    ys = rng.random(50) < 0.3
    s = Sample(xs, ys)
    h = 1e8 * np.ptp(xs)
    assert abs(nw_at(s, 0.3, h) - ys.mean()) < 1e-9
    assert effective_sample_size(s, 0.3, h) == pytest.approx(50 * math.sqrt(2), rel=1e-6)


@given(st.lists(st.tuples(st.floats(-5, 5), st.booleans()), min_size=1, max_size=20),
       st.floats(-3, 3), st.floats(0.1, 3))
def test_nw_matches_brute_force(pairs, x, h):
    s = Sample([p[0] for p in pairs], [p[1] for p in pairs])
    w = [_phi((x - xi) / h) for xi, _ in pairs]
    den = math.fsum(w)
    if den == 0.0:
        with pytest.raises(NoLocalData):
            nw_at(s, x, h)
        return
    assume(den > 1e-250)
    expected = math.fsum(wi * yi for wi, (_, yi) in zip(w, pairs)) / den
    assert nw_at(s, x, h) == pytest.approx(expected, abs=1e-12)
    assert 0.0 <= nw_at(s, x, h) <= 1.0


@given(st.lists(st.tuples(st.floats(-5, 5), st.booleans()), min_size=2, max_size=15),
       st.floats(0.1, 3), st.randoms(use_true_random=False))
def test_permutation_invariance(pairs, h, rnd):
    s = Sample([p[0] for p in pairs], [p[1] for p in pairs])
    perm = list(pairs)
    rnd.shuffle(perm)
    t = Sample([p[0] for p in perm], [p[1] for p in perm])
    assert nw_at(t, 0.2, h) == pytest.approx(nw_at(s, 0.2, h), abs=1e-13)
    assert kde_at(t, 0.2, h) == pytest.approx(kde_at(s, 0.2, h), rel=1e-13)


@given(st.lists(st.tuples(st.floats(-5, 5), st.booleans()), min_size=1, max_size=15),
       st.floats(0.1, 3))
def test_duplication_doubles_neff_keeps_estimates(pairs, h):
    s = Sample([p[0] for p in pairs], [p[1] for p in pairs])
    d = Sample([p[0] for p in pairs] * 2, [p[1] for p in pairs] * 2)
    assume(effective_sample_size(s, 0.0, h) > 1e-200)
    assert nw_at(d, 0.0, h) == pytest.approx(nw_at(s, 0.0, h), abs=1e-13)
    assert kde_at(d, 0.0, h) == pytest.approx(kde_at(s, 0.0, h), rel=1e-12)
    assert effective_sample_size(d, 0.0, h) == pytest.approx(2 * effective_sample_size(s, 0.0, h), rel=1e-12)


def test_curves_agree_with_pointwise():
    grid = np.linspace(-1, 1, 7)
    assert np.allclose(kde_curve(THREE, grid, 0.4), [kde_at(THREE, g, 0.4) for g in grid], rtol=1e-14)
    assert np.allclose(nw_curve(THREE, grid, 0.4), [nw_at(THREE, g, 0.4) for g in grid], rtol=1e-14)


def test_nw_at_design_matches_pointwise():
    rng = np.random.default_rng(3)
    s = Sample(rng.normal(size=40), rng.random(40) < 0.5)
    fit = nw_at_design(s, 0.3)
    assert np.allclose(fit, [nw_at(s, x, 0.3) for x in s.xs], rtol=0, atol=1e-13)


def _aicc_oracle(s, h):
    n = s.n
    K = np.array([[_phi((a - b) / h) for b in s.xs] for a in s.xs])
    H = K / K.sum(axis=1, keepdims=True)
    fit = H @ s.ys
    tr = np.trace(H)
    if tr + 2 >= n:
        return math.nan
    return math.log(np.mean((s.ys - fit) ** 2)) + (1 + tr / n) / (1 - (tr + 2) / n)


def _lscv_oracle(s, h):
    total = 0.0
    for i in range(s.n):
        w = np.array([_phi((s.xs[i] - s.xs[j]) / h) if j != i else 0.0 for j in range(s.n)])
        total += (s.ys[i] - w @ s.ys / w.sum()) ** 2
    return total


def test_aicc_and_lscv_match_dense_oracles():
    rng = np.random.default_rng(4)
    s = Sample(rng.normal(size=25), rng.random(25) < 0.4)
    grid = np.array([0.05, 0.2, 0.5, 1.0, 3.0])
    assert np.allclose(aicc_scores(s, grid=grid), [_aicc_oracle(s, h) for h in grid],
                       rtol=1e-12, equal_nan=True)
    assert np.allclose(lscv_scores(s, grid=grid), [_lscv_oracle(s, h) for h in grid], rtol=1e-12)


def test_aicc_skips_overfitting_bandwidths():
    s = Sample([0.0, 1.0, 2.0, 3.0, 4.0], [0, 1, 0, 1, 1])
    scores = aicc_scores(s, grid=[0.01, 10.0])
    assert np.isnan(scores[0]) and np.isfinite(scores[1])
    with pytest.raises(NoValidBandwidth):
        select_h0_aicc(s, grid=[0.01])


def test_lscv_four_point_example():
    s = Sample([0.0, 1.0, 2.0, 3.0], [0, 0, 1, 1])
    scores = lscv_scores(s, grid=[0.5, 5.0])
    assert scores == pytest.approx([_lscv_oracle(s, 0.5), _lscv_oracle(s, 5.0)], rel=1e-12)
    assert select_h0_lscv(s, grid=[0.5, 5.0]) == 0.5


def test_lscv_flat_truth_prefers_large_h():
    grid = np.geomspace(0.05, 5.0, 30)
    wins = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        s = Sample(rng.uniform(-2, 2, 150), rng.random(150) < 0.5)
        wins += select_h0_lscv(s, grid=grid) >= grid[-3]
    assert wins >= 10


def test_constant_responses_pick_smallest_h():
    s = Sample(np.linspace(-1, 1, 20), np.ones(20))
    grid = np.geomspace(0.2, 2.0, 10)
    assert select_h0_aicc(s, grid=grid) == grid[0]


def test_aicc_near_asymptotic_optimum_scenario1():
    rng = np.random.default_rng(2024)
    s = draw_scenario_sample(1, 1000, rng)
    h0 = select_h0_aicc(s)
    assert 0.188 / 2 <= h0 <= 0.188 * 2


def test_default_grid_needs_spread():
    s = Sample([1.0, 1.0, 1.0], [0, 1, 0])
    with pytest.raises(DegenerateSample):
        select_h0_aicc(s)


def test_density_bandwidth():
    xs = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    sd = np.std(xs, ddof=1)
    iqr = 2.0
    assert select_density_bandwidth(xs) == pytest.approx(1.06 * min(sd, iqr / 1.34) * 5 ** -0.2)
    # IQR of zero falls back to sd
    ys = np.array([0.0] * 10 + [1.0])
    assert select_density_bandwidth(ys) == pytest.approx(1.06 * np.std(ys, ddof=1) * 11 ** -0.2)
    with pytest.raises(DegenerateSample):
        select_density_bandwidth([2.0, 2.0])
    assert select_density_bandwidth(Sample(xs, [0] * 5)) == select_density_bandwidth(xs)


def test_kde_integrates_to_one():
    rng = np.random.default_rng(9)
    s = Sample(rng.normal(size=30), np.zeros(30))
    grid = np.linspace(-8, 8, 4001)
    assert np.sum(kde_curve(s, grid, 0.4)) * (grid[1] - grid[0]) == pytest.approx(1.0, abs=1e-6)
    assert kde_at(s, 0.0, 0.4, gaussian_kernel()) > 0
