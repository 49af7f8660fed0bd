import math

import numpy as np
import pytest

from ultrajet import descend as dsc
from ultrajet import jets
from ultrajet import seqcalc as sq
from ultrajet import weightfunc as wf
from ultrajet.errors import ExtensionError
from ultrajet.extend import (ExtensionConfig, check_taylor_difference_bound,
                             cutoffs, extend_jet, partition_of_unity,
                             select_row_chain, verify_partition, whitney_cover)
from ultrajet.extend.operator import fit_rho, search_h_square_constant, search_lambda


@pytest.fixture(scope="module")
def gev2_matrix(gevrey2):
    return wf.matrix_from_rows([gevrey2], params=[1.0], origin="gevrey2-singleton")


@pytest.fixture(scope="module")
def gev2_family(gevrey2):
    D = dsc.descend(gevrey2, K_eff=256)
    return cutoffs.make_cutoff_family(D, gevrey2, conv_depth=24)


@pytest.fixture(scope="module")
def partition_zero(gev2_family):
    cov = whitney_cover(jets.CompactSet1D(points=(0.0,)), d_min=1e-5)
    return partition_of_unity(cov, gev2_family, epsilon=2.0, min_smoothness=6)


class TestPartition:
    def test_sum_to_one(self, partition_zero):
        rep = verify_partition(partition_zero, orders=(0, 1, 2, 3, 4))
        assert rep["sum_max_err"] < 1e-9
        assert rep["range_ok"] and rep["support_ok"] and rep["bound_ok"]

    def test_leftover_vanishes_on_covered(self, partition_zero):
        cov = partition_zero.cover
        xs = np.linspace(*cov.working, 700)
        covered = cov.covers(xs)
        assert np.max(np.abs(partition_zero.leftover(xs)[covered])) == 0.0

    def test_supports_subordinate(self, partition_zero):
        for f, (cx, r) in zip(partition_zero.functions, partition_zero.cover.balls):
            lo, hi = f.support()
            assert lo >= cx - 1.5 * r - 1e-12
            assert hi <= cx + 1.5 * r + 1e-12

    @pytest.mark.parametrize("pts", [(0.0, 1.0), (0.0, 0.1, 1.0)])
    def test_other_sets(self, gev2_family, pts):
        cov = whitney_cover(jets.CompactSet1D(points=pts), d_min=1e-4)
        part = partition_of_unity(cov, gev2_family, epsilon=2.0, min_smoothness=4)
        rep = verify_partition(part, orders=(0, 1, 2, 3, 4))
        assert rep["sum_max_err"] < 1e-9
        assert rep["support_ok"] and rep["bound_ok"]


class TestRowChain:
    def test_singleton_chain(self, gev2_matrix):
        chain = select_row_chain(gev2_matrix, 0, 256)
        assert chain.indices == (0, 0, 0)

    def test_omega2_chain(self, omega2_matrix):
        chain = select_row_chain(omega2_matrix, 0, 256)
        i0, i1, i2 = chain.indices
        assert i0 == 0 and i1 > i0 and i2 > i1

    def test_qgevrey_chain_unavailable(self, qgevrey2):
        mat = wf.matrix_from_rows([qgevrey2], params=[1.0])
        with pytest.raises(ExtensionError) as err:
            select_row_chain(mat, 0, 128)
        assert err.value.code == "ROW_CHAIN_UNAVAILABLE"

    def test_constants_searches(self, omega2_matrix):
        chain = select_row_chain(omega2_matrix, 0, 256)
        lam = search_lambda(chain.S, chain.S_dot)
        assert 0 < lam < 1
        D = search_h_square_constant(chain.S_dot.small_s, chain.S_ddot.small_s)
        assert D >= 1.0


class TestExtendJet:
    def test_polynomial_reproduction(self, gev2_matrix):
        E = jets.CompactSet1D(points=(0.0, 1.0))
        F = jets.sample_jet({"kind": "polynomial", "coeffs": [0, 0, 1]}, E, 12)
        res = extend_jet(F, gev2_matrix, ExtensionConfig(p_max_eval=4, d_min=1e-5))
        xs = np.linspace(-0.49, 1.49, 501)
        sel = E.distance(xs) < 0.5
        assert np.max(np.abs(res.f(xs[sel]) - xs[sel] ** 2)) < 1e-9

    def test_exp_boundary_match(self, omega2_matrix):
        E = jets.CompactSet1D(points=(0.0,))
        F = jets.sample_jet({"kind": "exp"}, E, 16)
        res = extend_jet(F, omega2_matrix,
                         ExtensionConfig(p_max_eval=8, d_min=1e-5))
        for k in range(9):
            for x in (1e-4, -1e-4):
                assert abs(res.f(x, order=k) - 1.0) <= 1e-3
        assert res.verification["boundary"]["monotone_ok"]
        assert res.verification["growth"]["finite"]

    def test_not_in_class_rejected(self, omega2_matrix):
        # k!^2 outgrows every descendant row of the log-square classes
        E = jets.CompactSet1D(points=(0.0,))
        bad = jets.table_jet(E, {0.0: [math.factorial(k) ** 2 for k in range(13)]}, 12)
        with pytest.raises(ExtensionError) as err:
            extend_jet(bad, omega2_matrix, ExtensionConfig())
        assert err.value.code == "JET_NOT_IN_CLASS"

    def test_zero_jet(self, omega2_matrix):
        E = jets.CompactSet1D(points=(0.0,))
        res = extend_jet(jets.zero_jet(E, 16), omega2_matrix,
                         ExtensionConfig(p_max_eval=4, d_min=1e-4, L=16.0,
                                         epsilon=64.0))
        xs = np.linspace(-2, 2, 300)
        assert np.max(np.abs(res.f(xs))) == 0.0
        assert res.verification["growth"]["C_prime"] == 0.0

    def test_linearity(self, omega2_matrix):
        E = jets.CompactSet1D(points=(0.0,))
        F1 = jets.sample_jet({"kind": "exp"}, E, 16)
        F2 = jets.sample_jet({"kind": "sin"}, E, 16)
        cfg = ExtensionConfig(p_max_eval=4, d_min=1e-4, L=16.0, epsilon=64.0)
        r1 = extend_jet(F1, omega2_matrix, cfg)
        r2 = extend_jet(F2, omega2_matrix, cfg)
        rc = extend_jet(F1.combine(F2, 2.0, -3.0), omega2_matrix, cfg)
        xs = np.linspace(-1.9, 1.9, 400)
        gap = np.abs(2 * r1.f(xs) - 3 * r2.f(xs) - rc.f(xs))
        assert np.max(gap) < 1e-9

    def test_assembly_consistency(self, omega2_matrix):
        E = jets.CompactSet1D(points=(0.0,))
        F = jets.sample_jet({"kind": "exp"}, E, 16)
        res = extend_jet(F, omega2_matrix,
                         ExtensionConfig(p_max_eval=4, d_min=1e-4, L=16.0,
                                         epsilon=64.0))
        assert res.verification["assembly_consistency"]["max_abs_gap"] < 1e-8

    def test_global_cutoff_support(self, omega2_matrix):
        E = jets.CompactSet1D(points=(0.0,))
        F = jets.sample_jet({"kind": "exp"}, E, 16)
        res = extend_jet(F, omega2_matrix,
                         ExtensionConfig(p_max_eval=4, d_min=1e-4, L=16.0,
                                         epsilon=64.0))
        lo, hi = res.f.support()
        assert lo >= -1.0 - 1e-9 and hi <= 1.0 + 1e-9


class TestTaylorEstimates:
    def test_difference_bound_trivial_cases(self, omega2_matrix):
        E = jets.CompactSet1D(points=(0.0, 1.0))
        F = jets.sample_jet({"kind": "exp"}, E, 12)
        chain = select_row_chain(omega2_matrix, 0, 256)
        C, rho = fit_rho(F, chain.S, [2.0 ** j for j in range(-3, 13)])
        lhs, rhs = check_taylor_difference_bound(F, chain.S, 0.0, 0.0, 4, 0, 0.5,
                                                 C, rho)
        assert lhs == 0.0 <= rhs
        # polynomial jet: identical Taylor polynomials above the degree
        Fp = jets.sample_jet({"kind": "polynomial", "coeffs": [0, 0, 1]}, E, 12)
        lhs, rhs = check_taylor_difference_bound(Fp, chain.S, 0.0, 1.0, 5, 0, 0.3,
                                                 1.0, 1.0)
        assert lhs < 1e-12

    def test_difference_bound_exp(self, omega2_matrix):
        E = jets.CompactSet1D(points=(0.0, 1.0))
        F = jets.sample_jet({"kind": "exp"}, E, 12)
        chain = select_row_chain(omega2_matrix, 0, 256)
        C, rho = fit_rho(F, chain.S, [2.0 ** j for j in range(-3, 13)])
        rng = np.random.default_rng(5)
        for _ in range(100):
            p = int(rng.integers(1, 9))
            k = int(rng.integers(0, p + 1))
            a1, a2 = rng.choice([0.0, 1.0], 2)
            x = float(rng.uniform(-0.5, 1.5))
            lhs, rhs = check_taylor_difference_bound(F, chain.S, a1, a2, p, k, x,
                                                     C, rho)
            assert lhs <= rhs * (1 + 1e-9)
