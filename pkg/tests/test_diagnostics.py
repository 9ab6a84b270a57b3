import math

import numpy as np
import pytest

from coxsim.coxmodels import sample_satellites
from coxsim.diagnostics import (CountHistogram, DistanceEstimate,
                                count_tv_lower_bound,
                                coupled_wasserstein_lower_bound,
                                empirical_count_tv, invariance_check,
                                mecke_check_bpp, mecke_check_ppp,
                                mecke_functionals, planar_functional_family,
                                planar_region_set, poisson_pmf, rate_regression,
                                sphere_functional_family, sphere_region_set,
                                tv_vs_poisson, wasserstein_lower_bound)
from coxsim.geometry import Disk, LatitudeBand, Rect
from coxsim.glauber import Functional, count_indicator
from coxsim.pointprocess import (PLANE, SPHERE, Configuration, ModelParams,
                                 RngStream, sample_ppp_window,
                                 sample_uniform_sphere)

WINDOW = Rect(0.0, 0.0, 1.0, 1.0)


def rng_for(idx, seed=31415):
    return RngStream(seed, idx).generator()


class TestPoissonPmf:
    def test_matches_direct_formula(self):
        m = 2.7
        pmf, tail = poisson_pmf(m)
        for k in (0, 1, 5):
            direct = math.exp(-m) * m ** k / math.factorial(k)
            assert pmf[k] == pytest.approx(direct, rel=1e-12)
        assert tail <= 1e-12
        assert pmf.sum() == pytest.approx(1.0, abs=1e-11)

    def test_zero_mean(self):
        pmf, tail = poisson_pmf(0.0)
        assert pmf.tolist() == [1.0]
        assert tail == 0.0


class TestTv:
    def test_identical_counts(self):
        c = np.array([0, 1, 2, 1, 0])
        assert empirical_count_tv(c, c) == 0.0

    def test_disjoint_supports(self):
        assert empirical_count_tv(np.zeros(100, int), np.full(100, 5)) == 1.0

    def test_order_invariance(self):
        rng = rng_for(0)
        a = rng.poisson(2.0, 5000)
        b = rng.poisson(2.0, 5000)
        t1 = empirical_count_tv(a, b)
        t2 = empirical_count_tv(rng.permutation(a), rng.permutation(b))
        assert t1 == t2

    def test_hand_computed_two_point(self):
        # empirical pmf (1/2, 1/2) against Poisson(1)
        counts = np.array([0] * 500 + [1] * 500)
        pmf, tail = poisson_pmf(1.0)
        expect = 0.5 * (abs(0.5 - pmf[0]) + abs(0.5 - pmf[1])
                        + pmf[2:].sum() + tail)
        assert tv_vs_poisson(counts, 1.0) == pytest.approx(expect, abs=1e-12)

    def test_zero_target_mean(self):
        counts = np.array([0] * 900 + [1] * 100)
        assert tv_vs_poisson(counts, 0.0) == pytest.approx(0.1)

    def test_exact_law_goes_to_zero(self):
        rng = rng_for(1)
        tv_small = tv_vs_poisson(rng.poisson(1.5, 40_000), 1.5)
        assert tv_small < 0.02


class TestCountTvLowerBound:
    def test_split_sample_sanity(self):
        # the model's own empirical law against itself sits at the noise floor
        params = ModelParams.spherical(2.0, 5)
        rng = rng_for(2)
        band = LatitudeBand(-1 / 3, 1 / 3)
        counts = np.array([sample_satellites(params, rng).points.count_in(band)
                           for _ in range(8000)])
        half = counts.size // 2
        tv = empirical_count_tv(counts[:half], counts[half:])
        assert tv < 2.0 / math.sqrt(half)

    def test_satellites_positive_below_bound(self):
        # n=5, c=2: strictly positive distance, below the 2c^2/n = 1.6 bound
        params = ModelParams.spherical(2.0, 5)
        rng = rng_for(3)
        samples = [sample_satellites(params, rng).points for _ in range(6000)]
        band = LatitudeBand(-1 / 6, 1 / 6)
        est = count_tv_lower_bound(samples, band, 2.0 * band.measure,
                                   rng=rng_for(4))
        assert est.value - est.stderr > 0
        assert est.value < 1.6
        assert est.kind == "tv-counts"

    def test_needs_enough_samples(self):
        with pytest.raises(ValueError):
            count_tv_lower_bound([Configuration.empty(SPHERE)] * 10,
                                 LatitudeBand(-1, 1), 1.0)

    def test_counts_array_input(self):
        counts = rng_for(5).poisson(2.0, 5000)
        est = count_tv_lower_bound(counts, None, 2.0, rng=rng_for(6),
                                   region_name="total")
        assert est.value < 0.05
        assert est.regions == "total"
        assert est.stderr > 0


class TestWassersteinLowerBound:
    def test_identical_samplers_near_zero(self):
        rng = rng_for(7)
        samples = [sample_ppp_window(WINDOW, 2.0, rng) for _ in range(4000)]
        ref = lambda r: sample_ppp_window(WINDOW, 2.0, r)
        fam = [count_indicator(WINDOW, {0}), count_indicator(WINDOW, {1}),
               count_indicator(WINDOW, {2})]
        est = wasserstein_lower_bound(samples, ref, fam, rng_for(8))
        assert est.value < 0.02

    def test_constant_family_zero(self):
        samples = [Configuration.empty(PLANE)] * 1000
        ref = lambda r: Configuration.empty(PLANE)
        fam = [Functional("const", lambda cfg: 1.0)]
        est = wasserstein_lower_bound(samples, ref, fam, rng_for(9))
        assert est.value == 0.0

    def test_rejects_non_lipschitz(self):
        fam = [Functional("bad", lambda cfg: 2.0 * len(cfg), lipschitz=False)]
        with pytest.raises(ValueError):
            wasserstein_lower_bound([Configuration.empty(PLANE)],
                                    lambda r: Configuration.empty(PLANE),
                                    fam, rng_for(10))

    def test_dominates_count_tv_with_level_sets(self):
        # with all contiguous count-range indicators in the family, the max
        # gap reaches the count-law TV (the optimal set is a range here)
        rng = rng_for(11)
        samples = [sample_ppp_window(WINDOW, 1.0, rng) for _ in range(5000)]
        fam = [count_indicator(WINDOW, set(range(a, b + 1)),
                               name=f"range[{a},{b}]")
               for a in range(0, 9) for b in range(a, 9)]
        ref = lambda r: sample_ppp_window(WINDOW, 2.0, r)
        est = wasserstein_lower_bound(samples, ref, fam, rng_for(12),
                                      ref_factor=8)
        counts = np.array([len(s) for s in samples])
        tv = tv_vs_poisson(counts, 2.0)
        assert est.value + 4 * est.stderr >= tv - 0.01

    def test_detects_rate_mismatch(self):
        rng = rng_for(13)
        samples = [sample_ppp_window(WINDOW, 1.0, rng) for _ in range(4000)]
        ref = lambda r: sample_ppp_window(WINDOW, 2.0, r)
        fam = [count_indicator(WINDOW, {0})]
        est = wasserstein_lower_bound(samples, ref, fam, rng_for(14))
        # |P(N1=0) - P(N2=0)| = e^-1 - e^-2
        expect = math.exp(-1) - math.exp(-2)
        assert est.value == pytest.approx(expect, abs=0.03)


class TestCoupled:
    def test_identical_pairs_zero(self):
        cfg = Configuration([[0.0, 0.0, 1.0]], SPHERE)
        pairs = [(cfg, cfg)] * 500
        fam = [count_indicator(LatitudeBand(0, 1), {1})]
        est = coupled_wasserstein_lower_bound(pairs, fam)
        assert est.value == 0.0

    def test_detects_shift(self):
        rng = rng_for(15)
        pairs = []
        band = LatitudeBand(0.0, 1.0)
        for _ in range(2000):
            a = Configuration(sample_uniform_sphere(rng, 2), SPHERE)
            b = Configuration(sample_uniform_sphere(rng, 1), SPHERE)
            pairs.append((a, b))
        fam = [count_indicator(band, {0})]
        est = coupled_wasserstein_lower_bound(pairs, fam)
        # |P(Binom(2,1/2)=0) - P(Binom(1,1/2)=0)| = 1/4
        assert est.value == pytest.approx(0.25, abs=0.05)


class TestMecke:
    def test_ppp_all_registry(self):
        rng = rng_for(16)
        for mf in mecke_functionals(WINDOW):
            res = mecke_check_ppp(mf, 3.0, WINDOW, 30_000, rng)
            assert res.passed, res
            if res.oracle is not None:
                assert abs(res.lhs - res.oracle) <= 3 * res.stderr

    def test_bpp_all_registry(self):
        rng = rng_for(17)
        for mf in mecke_functionals(WINDOW):
            res = mecke_check_bpp(mf, 6, WINDOW, 30_000, rng)
            assert res.passed, res
            if res.oracle is not None:
                assert abs(res.lhs - res.oracle) <= 3 * res.stderr

    def test_ppp_oracles_with_independent_formulas(self):
        # freeze the analytic values independently of the registry lambdas
        lam = 3.0
        A = Rect(0, 0, 0.5, 1)
        B = Rect(0.5, 0, 1, 1)
        expected = {
            "F=1": lam * WINDOW.area,
            "F=1{x in A}": lam * A.area,
            "F=1{x in A}|w∩A|": (lam * A.area) ** 2,
            "F=1{x in A}1{|w∩B|>=1}": lam * A.area * (1 - math.exp(-lam * B.area)),
        }
        for mf in mecke_functionals(WINDOW):
            if mf.name in expected:
                assert mf.oracle_ppp(lam, WINDOW) == pytest.approx(expected[mf.name])

    def test_bpp_oracles_with_independent_formulas(self):
        N = 6
        mu_half = 0.5
        expected = {
            "F=1": float(N),
            "F=1{x in A}": N * mu_half,
            "F=1{x in A}|w∩A|": N * mu_half * (1 + (N - 1) * mu_half),
            "F=1{x in A}1{|w∩B|>=1}": N * mu_half * (1 - (1 - mu_half) ** (N - 1)),
        }
        for mf in mecke_functionals(WINDOW):
            if mf.name in expected:
                assert mf.oracle_bpp(N, WINDOW) == pytest.approx(expected[mf.name])

    def test_disk_window_halves(self):
        rng = rng_for(18)
        disk = Disk((0.0, 0.0), 1.0)
        for mf in mecke_functionals(disk)[:3]:
            res = mecke_check_ppp(mf, 2.0, disk, 20_000, rng)
            assert res.passed, res


class TestInvariance:
    def test_endpoints_and_middle(self):
        # region means kept below ~1 so the empirical-TV noise floor sits
        # well under the 2/sqrt(reps) tolerance
        regions = [("window", WINDOW), ("left", Rect(0, 0, 0.5, 1))]
        for k, t in enumerate((0.0, 0.5, 1.0)):
            rows = invariance_check(0.5, WINDOW, t, regions, 20_000, rng_for(20 + k))
            for name, tv, threshold in rows:
                assert tv <= threshold, (t, name, tv, threshold)

    def test_joint_two_region_product(self):
        # joint occupancy of two disjoint regions also matches a fresh PPP:
        # E[1{A>=1} 1{B>=1}] agrees within 3 combined stderr, and the PPP
        # independence oracle (1-e^-mA)(1-e^-mB) agrees too
        from coxsim.pointprocess import ppp_batch, region_counts, thin
        lam, t, reps = 0.8, 0.5, 30_000
        A, B = Rect(0, 0, 0.5, 1), Rect(0.5, 0, 1, 1)
        rng = rng_for(24)
        _, p1, i1 = ppp_batch(WINDOW, lam, reps, rng)
        _, p2, i2 = ppp_batch(WINDOW, lam, reps, rng)
        k1 = rng.random(p1.shape[0]) < t
        k2 = rng.random(p2.shape[0]) < (1.0 - t)
        _, p3, i3 = ppp_batch(WINDOW, lam, reps, rng)
        ca = (region_counts(p1[k1], i1[k1], A, reps)
              + region_counts(p2[k2], i2[k2], A, reps))
        cb = (region_counts(p1[k1], i1[k1], B, reps)
              + region_counts(p2[k2], i2[k2], B, reps))
        prod_thin = ((ca >= 1) & (cb >= 1)).astype(float)
        prod_fresh = ((region_counts(p3, i3, A, reps) >= 1)
                      & (region_counts(p3, i3, B, reps) >= 1)).astype(float)
        se = math.sqrt(prod_thin.var(ddof=1) / reps + prod_fresh.var(ddof=1) / reps)
        assert abs(prod_thin.mean() - prod_fresh.mean()) <= 3 * se
        oracle = (1 - math.exp(-lam * A.area)) * (1 - math.exp(-lam * B.area))
        assert abs(prod_thin.mean() - oracle) <= 4 * se

    def test_invalid_t(self):
        with pytest.raises(ValueError):
            invariance_check(2.0, WINDOW, 1.5, [("w", WINDOW)], 1000, rng_for(23))


class TestRateRegression:
    def test_exact_inverse_law(self):
        points = [(x, 7.0 / x) for x in (1.0, 2.0, 4.0, 8.0, 16.0)]
        fit = rate_regression(points)
        assert fit.slope == pytest.approx(-1.0, abs=1e-9)
        assert fit.intercept == pytest.approx(math.log(7.0), abs=1e-9)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_inverse_square(self):
        points = [(x, 1.0 / x ** 2) for x in (1.0, 2.0, 4.0, 8.0)]
        assert rate_regression(points).slope == pytest.approx(-2.0, abs=1e-9)

    def test_accepts_distance_estimates(self):
        points = [(x, DistanceEstimate(1.0 / x, 0.01, "tv-counts", "w"))
                  for x in (1.0, 2.0, 4.0, 8.0)]
        assert rate_regression(points).slope == pytest.approx(-1.0, abs=1e-9)

    def test_validation(self):
        with pytest.raises(ValueError):
            rate_regression([(1.0, 1.0), (2.0, 0.5), (4.0, 0.25)])
        with pytest.raises(ValueError):
            rate_regression([(1.0, 1.0), (2.0, 0.5), (2.0, 0.3), (4.0, 0.2)])
        with pytest.raises(ValueError):
            rate_regression([(1.0, 1.0), (2.0, 0.5), (4.0, 0.0), (8.0, 0.1)])


class TestPresets:
    def test_planar_regions_disk(self):
        regions = dict(planar_region_set(Disk((0.0, 0.0), 1.0)))
        assert len(regions) == 20
        # grid cells tile the inscribed square
        cell_area = sum(r.measure for n, r in regions.items()
                        if n.startswith("cell_"))
        assert cell_area == pytest.approx(2.0)
        # annuli tile the disk
        ann_area = sum(r.measure for n, r in regions.items()
                       if n.startswith("annulus_"))
        assert ann_area == pytest.approx(math.pi)
        disk = regions["window"]
        for name, reg in regions.items():
            if name.startswith("cell_"):
                corners = np.array([[reg.x0, reg.y0], [reg.x0, reg.y1],
                                    [reg.x1, reg.y0], [reg.x1, reg.y1]])
                assert disk.contains(corners).all()

    def test_planar_regions_rect(self):
        regions = dict(planar_region_set(Rect(0, 0, 2, 1)))
        cell_area = sum(r.measure for n, r in regions.items()
                        if n.startswith("cell_"))
        assert cell_area == pytest.approx(1.0)  # 4x4 grid of the short side

    def test_sphere_regions(self):
        regions = dict(sphere_region_set())
        band_measure = sum(r.measure for n, r in regions.items()
                           if n.startswith("band_"))
        assert band_measure == pytest.approx(1.0)
        assert regions["cap_n08"].measure == pytest.approx(0.1)
        assert regions["sphere"].measure == pytest.approx(1.0)

    def test_families_are_lipschitz(self):
        for F in sphere_functional_family():
            assert F.lipschitz
        for F in planar_functional_family(Disk((0.0, 0.0), 1.0)):
            assert F.lipschitz


class TestDistanceEstimate:
    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            DistanceEstimate(-0.1, 0.0, "tv-counts", "w")

    def test_conservative(self):
        est = DistanceEstimate(0.05, 0.02, "tv-counts", "w")
        assert est.conservative() == pytest.approx(0.03)
        est2 = DistanceEstimate(0.01, 0.02, "tv-counts", "w")
        assert est2.conservative() == 0.0


class TestCountHistogram:
    def test_from_counts(self):
        h = CountHistogram.from_counts("w", np.array([0, 1, 1, 3]))
        assert h.freqs.tolist() == [1, 2, 0, 1]
        assert h.reps == 4
        assert h.pmf().tolist() == [0.25, 0.5, 0.0, 0.25]
        assert h.pmf(6).tolist() == [0.25, 0.5, 0.0, 0.25, 0.0, 0.0]
