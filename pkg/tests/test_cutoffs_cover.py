import math

import numpy as np
import pytest

from ultrajet import descend as dsc
from ultrajet import seqcalc as sq
from ultrajet.errors import CutoffError
from ultrajet.extend import cover as cov_mod
from ultrajet.extend import cutoffs
from ultrajet.jets import CompactSet1D


@pytest.fixture(scope="module")
def gev2_family():
    g2 = sq.gevrey(2, K=512)
    D = dsc.descend(g2, K_eff=256)
    return cutoffs.make_cutoff_family(D, g2, conv_depth=24)


class TestAlphaSequence:
    def test_alpha_zero_is_one(self, gev2_family):
        fam = gev2_family
        for p in (1, 2, 5):
            a = cutoffs.alpha_sequence(fam.D, fam.Ndot, p, fam.A)
            assert a.log_alpha[0] == 0.0

    def test_lattice_values(self, gev2_family):
        # alpha_k = (2p)^k below the order: p=2, k=1 -> 4
        fam = gev2_family
        a = cutoffs.alpha_sequence(fam.D, fam.Ndot, 2, fam.A)
        assert math.exp(a.log_alpha[1]) == pytest.approx(4.0, rel=1e-12)

    def test_ratio_sum_within_one(self, gev2_family):
        fam = gev2_family
        for p in (1, 2, 4, 8, 16, 32):
            a = cutoffs.alpha_sequence(fam.D, fam.Ndot, p, fam.A)
            assert a.valid and a.ratio_sum <= 1.0 + 1e-12

    def test_too_small_A_detected(self, gev2_family):
        fam = gev2_family
        a = cutoffs.alpha_sequence(fam.D, fam.Ndot, 4, 0.25)
        assert not a.valid


class TestBuildCutoff:
    @pytest.mark.parametrize("eps", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("t", [1.5, 2.0, 4.0])
    def test_acceptance_grid(self, gev2_family, eps, t):
        res = cutoffs.build_cutoff(gev2_family, eps, t)
        rep = cutoffs.verify_cutoff(gev2_family, res, orders=range(0, 9))
        assert rep["range_ok"] and rep["plateau_ok"] and rep["support_exact"]
        assert rep["bound_ok"]
        assert all(o["violations"] == 0 for o in rep["orders"].values()
                   if o["checked"])

    def test_endpoint_values(self, gev2_family):
        res = cutoffs.build_cutoff(gev2_family, 1.0, 2.0)
        assert res.pp(0.0) == 1.0
        assert res.pp(2.0) == 0.0 and res.pp(-2.0) == 0.0

    def test_depth_guard(self, gev2_family):
        with pytest.raises(CutoffError) as err:
            cutoffs.build_cutoff(gev2_family, 1.0, 2.0, min_smoothness=200)
        assert err.value.code == "DEPTH_INSUFFICIENT"

    def test_invalid_inputs(self, gev2_family):
        with pytest.raises(ValueError):
            cutoffs.build_cutoff(gev2_family, 1.0, 1.0)
        with pytest.raises(ValueError):
            cutoffs.build_cutoff(gev2_family, 0.0, 2.0)

    def test_omega2_chain_cutoff(self, omega2_matrix):
        mat = omega2_matrix
        Ddot = dsc.descend(mat.rows[mat.params.index(1.0)], K_eff=256)
        fam = cutoffs.make_cutoff_family(Ddot, mat.rows[mat.params.index(8.0)])
        res = cutoffs.build_cutoff(fam, 1.0, 1.5, min_smoothness=6)
        rep = cutoffs.verify_cutoff(fam, res, orders=range(0, 7))
        assert rep["range_ok"] and rep["plateau_ok"] and rep["bound_ok"]


class TestWhitneyCover:
    @pytest.mark.parametrize("pts", [(0.0,), (0.0, 1.0), (0.0, 0.1, 1.0)])
    def test_cover_constants(self, pts):
        cov = cov_mod.whitney_cover(CompactSet1D(points=pts), d_min=1e-6)
        assert cov.n0 <= 5
        assert 0 < cov.a < cov.b
        # distance comparability within every inflated interval
        for (cx, r) in cov.balls[:: max(1, len(cov.balls) // 20)]:
            probes = np.linspace(cx - cov.c * r, cx + cov.c * r, 11)
            inside = (probes > cov.working[0]) & (probes < cov.working[1])
            d = cov.E.distance(probes[inside])
            assert np.all(d >= cov.a * r - 1e-15)
            assert np.all(d <= cov.b * r + 1e-15)

    def test_coverage_probes(self):
        E = CompactSet1D(points=(0.0, 1.0))
        cov = cov_mod.whitney_cover(E, d_min=1e-6)
        xs = np.linspace(cov.working[0], cov.working[1], 1000)
        need = E.distance(xs) >= cov.d_min
        assert np.all(cov.covers(xs)[need])

    def test_single_point_symmetric(self):
        cov = cov_mod.whitney_cover(CompactSet1D(points=(0.0,)), d_min=1e-6)
        centers = np.array([b[0] for b in cov.balls])
        assert np.allclose(np.sort(centers), np.sort(-centers))
        assert cov.n0 <= 3

    def test_short_gap_single_interval(self):
        E = CompactSet1D(points=(0.0, 3e-6))
        cov = cov_mod.whitney_cover(E, d_min=1e-6)
        assert cov.degenerate_gaps == ((0.0, 3e-6),)

    def test_interval_component(self):
        E = CompactSet1D(points=(2.0,), intervals=((0.0, 1.0),))
        cov = cov_mod.whitney_cover(E, d_min=1e-5)
        xs = np.linspace(-1.9, 3.9, 800)
        need = E.distance(xs) >= cov.d_min
        assert np.all(cov.covers(xs)[need])
