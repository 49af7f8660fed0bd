import numpy as np
import pytest

from ultrajet import seqcalc as sq
from ultrajet import weightfunc as wf


@pytest.fixture(scope="session")
def gevrey1():
    return sq.gevrey(1, K=512)


@pytest.fixture(scope="session")
def gevrey2():
    return sq.gevrey(2, K=512)


@pytest.fixture(scope="session")
def qgevrey2():
    return sq.qgevrey(2, K=512)


@pytest.fixture(scope="session")
def omega2_matrix():
    return wf.associated_matrix(wf.omega_s(2), K=512)


@pytest.fixture(scope="session")
def kplus1_sq():
    """The table family with quotients nu_k = (k+1)^2."""
    K = 1024
    k = np.arange(1, K + 1, dtype=float)
    log_M = np.concatenate([[0.0], np.cumsum(2.0 * np.log(k + 1.0))])
    return sq.make_sequence({"family": "table",
                             "params": {"log_values": log_M}, "K": K})
