import numpy as np
import pytest
from scipy.special import polygamma
import mpmath

from ultrajet.errors import TailUnreliable
from ultrajet.tails import estimate_tail, log_suffix_sums, tail_sums


def test_powerlaw_exact_families():
    K = 512
    j = np.arange(1, K + 1, dtype=float)
    cases = [
        (1.0 / (j + 1.0) ** 2, float(polygamma(1, K + 2))),
        (1.0 / j ** 2, float(polygamma(1, K + 1))),
        (1.0 / j ** 1.2, float(mpmath.zeta(1.2, K + 1))),
        (1.0 / (j + 3.0) ** 2.5, float(mpmath.zeta(2.5, K + 4))),
    ]
    for vals, true in cases:
        est = estimate_tail(vals)
        assert est.method == "powerlaw"
        assert est.beyond == pytest.approx(true, rel=1e-8)
        assert abs(est.beyond - true) <= est.err_bar

def test_geometric_family():
    K = 256
    j = np.arange(1, K + 1, dtype=float)
    vals = np.exp(-0.5 * j)
    true = np.exp(-0.5 * (K + 1)) / (1 - np.exp(-0.5))
    est = estimate_tail(vals)
    assert est.method == "geometric"
    assert est.beyond == pytest.approx(true, rel=1e-10)


def test_log_corrected_family_covered_by_err_bar():
    K = 512
    j = np.arange(1, K + 1, dtype=float)
    vals = 1.0 / (j ** 2 * (1.0 + np.log(j)))
    true = sum(1.0 / (m ** 2 * (1.0 + np.log(m))) for m in range(K + 1, 300_000))
    est = estimate_tail(vals)
    assert abs(est.beyond - true) <= est.err_bar


def test_suffix_sums_match_prefix():
    j = np.arange(1, 257, dtype=float)
    vals = 1.0 / j ** 2
    suffix, _ = tail_sums(vals, rel_cap=None)
    assert suffix[10] - suffix[200] == pytest.approx(np.sum(vals[10:200]), rel=1e-12)


def test_tail_unreliable_raised():
    j = np.arange(1, 65, dtype=float)
    vals = 1.0 / j ** 1.2  # heavy tail: estimate dwarfs the cap
    with pytest.raises(TailUnreliable):
        tail_sums(vals, rel_cap=1e-6)


def test_log_suffix_deep_underflow():
    # decays e^{-8} per step: values hit e^{-2000}, far below double range
    k = np.arange(1, 257, dtype=float)
    log_vals = -4.0 * (2.0 * k - 1.0)
    log_T, est = log_suffix_sums(log_vals, rel_cap=None)
    # T_k is dominated by its first term: log T_k = log v_k + log(1/(1-q))
    q = np.exp(-8.0)
    expect = log_vals + np.log(1.0 / (1.0 - q))
    assert np.allclose(log_T, expect, atol=1e-10)


def test_log_suffix_matches_linear_when_healthy():
    j = np.arange(1, 257, dtype=float)
    vals = 1.0 / j ** 2
    lt, _ = log_suffix_sums(np.log(vals), rel_cap=None)
    suffix, _ = tail_sums(vals, rel_cap=None)
    assert np.allclose(lt, np.log(suffix), atol=1e-12)
