import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ultrajet import decide
from ultrajet import weightfunc as wf
from ultrajet.errors import ConjugateUnbounded
from ultrajet.report import FAILS, HOLDS, NOT_WITNESSED


class TestYoungConjugate:
    def test_omega2_closed_form_points(self):
        w = wf.omega_s(2)
        assert wf.young_conjugate(w, 2.0) == pytest.approx(1.0, abs=1e-9)
        assert wf.young_conjugate(w, 4.0) == pytest.approx(4.0, abs=1e-9)
        assert wf.young_conjugate(w, 0.0) == 0.0

    def test_brute_force_grid_max(self):
        # oracle: dense grid max of 4y - y^2
        w = wf.omega_s(2)
        ys = np.linspace(0, 10, 200_001)
        assert wf.young_conjugate(w, 4.0) == pytest.approx(
            float(np.max(4.0 * ys - ys ** 2)), abs=1e-8)

    @pytest.mark.parametrize("s", [1.5, 2.0, 2.5, 3.0])
    def test_closed_form_agreement(self, s):
        w = wf.omega_s(s)
        for x in np.geomspace(0.1, 50, 30):
            num = wf.young_conjugate(w, float(x))
            exact = float(wf.omega_s_conjugate_exact(s, x))
            assert num == pytest.approx(exact, rel=1e-6)

    def test_unbounded_for_slow_table(self):
        # omega ~ log t: phi linear, conjugate diverges past the slope
        w = wf.omega_table([(1.0, 0.0), (math.e, 1.0), (math.e ** 4, 4.0),
                            (math.e ** 8, 8.0)])
        with pytest.raises(ConjugateUnbounded):
            wf.young_conjugate(w, 5.0)

    @given(x=st.floats(min_value=0.01, max_value=30.0),
           y=st.floats(min_value=0.0, max_value=60.0))
    @settings(max_examples=200, deadline=None)
    def test_fenchel_inequality(self, x, y):
        w = wf.omega_s(2)
        assert x * y <= float(w.phi(y)) + wf.young_conjugate(w, x) + 1e-7


class TestMatrix:
    def test_closed_form_w2(self, omega2_matrix):
        i = omega2_matrix.params.index(1.0)
        assert math.exp(omega2_matrix.rows[i].log_M[2]) == pytest.approx(math.e)

    def test_rows_pointwise_ordered(self, omega2_matrix):
        assert omega2_matrix.pointwise_ordered()

    def test_lemma_2_6_pairs(self, omega2_matrix):
        mat = omega2_matrix
        for i, x in enumerate(mat.params):
            if 4 * x not in mat.params:
                continue
            j = mat.params.index(4 * x)
            a, b = mat.rows[i], mat.rows[j]
            for k in range(2, mat.K // 2):
                assert a.log_mu[2 * k - 1] <= b.log_mu[k - 1] + 1e-9

    def test_eq_3_4_some_H(self, omega2_matrix):
        # rho^k W^x <= C W^{Hx} for rho = 2 and some H <= 64 in the grid
        mat = omega2_matrix
        k = np.arange(mat.K + 1)
        for i, x in enumerate(mat.params[:4]):
            found = False
            for H in (2, 4, 8, 16, 32, 64):
                if H * x not in mat.params:
                    continue
                j = mat.params.index(H * x)
                gap = k * math.log(2) + mat.rows[i].log_M - mat.rows[j].log_M
                if np.max(gap) < 60:
                    found = True
                    break
            assert found, f"no H works for x={x}"

    def test_prop_5_14_item3_exact(self):
        # theta_{k+1}^{s,rho} <= (W_k^{s,6 rho})^{1/k}
        for rho in (0.5, 1.0, 2.0, 4.0):
            mat = wf.associated_matrix(wf.omega_s(2), params=[rho, 6 * rho], K=256)
            row, row6 = mat.rows
            for k in range(1, 257):
                assert row.log_mu[k] <= row6.log_M[k] / k + 1e-9 if k < 256 else True

    def test_eq_5_20_power_gaps(self):
        for r in (1.1, 1.5, 2.0):
            k = np.arange(1, 513, dtype=float)
            gaps = (k + 1) ** r - k ** r
            assert np.all(r * k ** (r - 1) <= gaps + 1e-12)
            assert np.all(gaps <= r * (k + 1) ** (r - 1) + 1e-12)

    def test_table_based_matrix(self):
        w = wf.omega_table([(1.0, 0.0)] + [(math.exp(u), u ** 2)
                                           for u in np.linspace(0.05, 40, 300)])
        mat = wf.associated_matrix(w, params=[0.5, 1.0, 2.0], K=32)
        assert mat.pointwise_ordered()


class TestAdmissibility:
    def test_omega2_all_hold(self, omega2_matrix):
        adm = wf.check_admissible_matrix(omega2_matrix, check_43=decide.check_43)
        assert all(r.verdict == HOLDS for r in adm.values())

    def test_gevrey2_singleton(self, gevrey2):
        mat = wf.matrix_from_rows([gevrey2], params=[1.0])
        adm = wf.check_admissible_matrix(mat, check_43=decide.check_43)
        assert all(r.verdict == HOLDS for r in adm.values())

    def test_qgevrey_singleton_not_witnessed(self, qgevrey2):
        mat = wf.matrix_from_rows([qgevrey2], params=[1.0])
        adm = wf.check_admissible_matrix(mat, check_43=decide.check_43)
        assert adm["4.6-4"].verdict == NOT_WITNESSED


class TestOmegaNonquasianalytic:
    def test_omega2_converges(self):
        reps = wf.check_omega_nonquasianalytic(wf.omega_s(2))
        assert reps["integral"].verdict == HOLDS
        assert reps["averaged"].verdict == HOLDS
        assert reps["averaged"].details["A"] >= 1.0
        assert np.isfinite(reps["averaged"].details["B"])

    def test_omega3_converges(self):
        reps = wf.check_omega_nonquasianalytic(wf.omega_s(3))
        assert reps["integral"].verdict == HOLDS

    def test_linear_table_diverges(self):
        lin = wf.omega_table([(1.0, 0.0), (2.0, 1.0), (10.0, 9.0), (100.0, 99.0),
                              (1e4, 1e4 - 1), (1e8, 1e8 - 1)])
        reps = wf.check_omega_nonquasianalytic(lin)
        assert reps["integral"].verdict == FAILS

    def test_props_omega_s(self):
        for s in (2.0, 3.0):
            reps = wf.omega_s(s).props()
            assert all(r.verdict == HOLDS for r in reps.values())
