"""The descendant of a non-quasianalytic weight sequence.

Given increasing positive nu with nu_0 = 1 and sum 1/nu_k < infinity, set

    tau_k = k/nu_k + sum_{j >= k} 1/nu_j,      sigma_k = tau_1 k / tau_k.

sigma is the descendant of nu: the largest sequence with sigma <~ nu and
tail sum <~ k/sigma_k.  Its starred quotients sigma*_k = sigma_k / k are
increasing from 1, so s_k = sigma*_1 ... sigma*_k is itself a weight
sequence and carries the h / Gamma / Sigma machinery used by the cutoff and
extension constructions.

Rows derived from weight functions push tau far below double range within a
few dozen indices, so the whole construction runs in the log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonincreasingResult, QuasianalyticInput
from .report import CheckReport, FAILS, HOLDS, report_from_log_witnesses
from .seqcalc import WeightSequence, check_nonquasianalytic, from_log_quotients
from .tails import TailEstimate, log_suffix_sums, tail_sums


@dataclass(frozen=True)
class Descendant:
    """Descendant data for a prefix k = 1..K_eff (index 0 of arrays is k=1)."""

    source_tag: str
    log_tau: np.ndarray        # log tau_k
    tau_err: float             # error bar of the tail estimate entering tau
    log_sigma: np.ndarray      # log sigma_k
    log_sigma_star: np.ndarray
    tail_info: TailEstimate
    K_data: int                # prefix length of the source sequence

    @property
    def K_eff(self) -> int:
        return len(self.log_tau)

    @property
    def tau(self) -> np.ndarray:
        return np.exp(np.maximum(self.log_tau, -745.0))

    @property
    def sigma(self) -> np.ndarray:
        return np.exp(np.minimum(self.log_sigma, 709.0))

    @property
    def sigma_star(self) -> np.ndarray:
        return np.exp(np.minimum(self.log_sigma_star, 709.0))

    @property
    def small_s(self) -> WeightSequence:
        """s with S_k = k! s_k; quotients are sigma*_k (>= 1, increasing)."""
        return from_log_quotients(self.log_sigma_star, f"desc-s({self.source_tag})")

    @property
    def big_S(self) -> WeightSequence:
        """S_k = sigma_1 ... sigma_k as a weight sequence."""
        return from_log_quotients(self.log_sigma, f"desc-S({self.source_tag})")

    def to_rows(self):
        k = np.arange(1, self.K_eff + 1)
        s_small = np.exp(np.minimum(np.cumsum(self.log_sigma_star), 709.0))
        return {"k": k, "tau": self.tau, "sigma": self.sigma,
                "sigma_star": self.sigma_star, "s": s_small}


def descend(N: WeightSequence, K_eff: int | None = None, *,
            tail_rel_cap: float = 0.01) -> Descendant:
    """Descendant of N on the first K_eff indices (default K/2).

    Tail sums run over the stored prefix plus the fitted tail estimate; the
    estimate's error bar is reported alongside.
    """
    nq = check_nonquasianalytic(N)
    if nq.verdict != HOLDS:
        raise QuasianalyticInput(
            f"{N.family_tag}: non-quasianalyticity verdict {nq.verdict}")
    K = N.K
    if K_eff is None:
        K_eff = K // 2
    if K_eff > K:
        raise ValueError("K_eff exceeds the stored prefix")
    log_inv_nu = -N.log_mu
    log_T, est = log_suffix_sums(log_inv_nu, rel_cap=tail_rel_cap)
    k = np.arange(1, K_eff + 1, dtype=float)
    log_k_over_nu = np.log(k) + log_inv_nu[:K_eff]
    log_tau = np.logaddexp(log_k_over_nu, log_T[:K_eff])
    log_sigma = log_tau[0] + np.log(k) - log_tau
    log_sigma_star = log_tau[0] - log_tau
    return Descendant(N.family_tag, log_tau, est.err_bar, log_sigma,
                      log_sigma_star, est, K)


def check_lemma42(N: WeightSequence, D: Descendant,
                  Ndot: WeightSequence | None = None,
                  Ddot: Descendant | None = None) -> dict[str, CheckReport]:
    """Per-item verification of the descendant's properties.

    (1) sigma <~ nu; (2) tail <~ k/sigma_k; (3) sigma* >= 1 increasing;
    (4) sigma_{k+1} <~ sigma_k iff the quotient-regularity inequality, both
    sides evaluated and compared; (5) maximality probed with scaled
    candidates c * sigma; (6) nu_{2k} <~ nudot_k implies
    sigma_{2k} <~ sigmadot_k, when a second sequence is supplied.
    """
    K_eff = D.K_eff
    out: dict[str, CheckReport] = {}
    log_nu = N.log_mu[:K_eff]  # log nu_k (quotients), k=1..K_eff

    out["4.2-1"] = report_from_log_witnesses(D.log_sigma - log_nu, K_eff,
                                             note="sigma_k <= C nu_k")

    log_T, _ = log_suffix_sums(-N.log_mu, rel_cap=None)
    k = np.arange(1, K_eff + 1, dtype=float)
    w2 = log_T[:K_eff] - np.log(k) + D.log_sigma
    out["4.2-2"] = report_from_log_witnesses(w2, K_eff,
                                             note="sum_{j>=k} 1/nu_j <= C k/sigma_k")

    d_star = np.diff(D.log_sigma_star)
    mono = np.all(d_star >= -1e-12) and D.log_sigma_star[0] >= -1e-12
    grows = D.log_sigma_star[-1] - D.log_sigma_star[0] > math.log(4.0)
    out["4.2-3"] = CheckReport(
        HOLDS if (mono and grows) else FAILS, K_eff,
        witness_constant=float(np.exp(min(D.log_sigma_star[-1], 700.0))),
        counterexample_index=None if (mono and grows) else int(np.argmin(d_star)) + 1,
        note="sigma*_k >= 1 increasing (trend to infinity)")

    lhs = report_from_log_witnesses(np.diff(D.log_sigma), K_eff,
                                    note="sigma_{k+1} <= C sigma_k")
    from .decide import check_43  # local import to avoid a cycle
    rhs = check_43(N, K_eff=K_eff)
    agree = lhs.verdict == rhs.verdict
    out["4.2-4"] = CheckReport(
        lhs.verdict if agree else FAILS, K_eff,
        witness_constant=lhs.witness_constant,
        counterexample_index=None if agree else K_eff,
        note=("sigma_{k+1} <~ sigma_k equivalent to quotient regularity; "
              f"direct={lhs.verdict}, via-(4.3)={rhs.verdict}"),
        details={"direct": lhs.to_dict(), "via_43": rhs.to_dict()})

    out["4.2-5"] = maximality_probe(N, D)

    if Ndot is not None:
        if Ddot is None:
            Ddot = descend(Ndot, K_eff=D.K_eff)
        half = K_eff // 2
        kk = np.arange(1, half + 1)
        hyp = report_from_log_witnesses(
            N.log_mu[2 * kk - 1] - Ndot.log_mu[kk - 1], K_eff,
            note="hypothesis nu_{2k} <= C nudot_k")
        con = report_from_log_witnesses(
            D.log_sigma[2 * kk - 1] - Ddot.log_sigma[kk - 1], K_eff,
            note="conclusion sigma_{2k} <= C sigmadot_k")
        ok = (not hyp.holds) or con.holds
        out["4.2-6"] = CheckReport(
            HOLDS if ok else FAILS, K_eff,
            witness_constant=con.witness_constant,
            counterexample_index=None if ok else K_eff,
            note="nu_{2k} <~ nudot_k implies sigma_{2k} <~ sigmadot_k",
            details={"hypothesis": hyp.to_dict(), "conclusion": con.to_dict()})
    return out


def maximality_probe(N: WeightSequence, D: Descendant,
                     factors=(2.0, 4.0, 8.0)) -> CheckReport:
    """Falsification test of maximality.

    Every scaled candidate mu = c sigma must break (1) or (2) at the
    witnesses recorded for sigma itself; a candidate passing both would
    dominate the descendant, contradicting maximality.
    """
    K_eff = D.K_eff
    log_nu = N.log_mu[:K_eff]
    log_T, _ = log_suffix_sums(-N.log_mu, rel_cap=None)
    log_k = np.log(np.arange(1, K_eff + 1, dtype=float))
    logW1 = float(np.max(D.log_sigma - log_nu))
    logW2 = float(np.max(log_T[:K_eff] + D.log_sigma - log_k))
    survivors = []
    for c in factors:
        cond1 = np.all(math.log(c) + D.log_sigma <= logW1 + log_nu + 1e-9)
        cond2 = np.all(log_T[:K_eff] + D.log_sigma - log_k + math.log(c)
                       <= logW2 + 1e-9)
        if cond1 and cond2:
            survivors.append(c)
    if survivors:
        return CheckReport(FAILS, K_eff, witness_constant=float(survivors[0]),
                           counterexample_index=1,
                           note=f"candidates {survivors} pass (1) and (2): maximality broken")
    return CheckReport(HOLDS, K_eff,
                       witness_constant=float(np.exp(min(max(logW1, logW2), 700.0))),
                       note="no scaled candidate dominates the descendant")


def recover_predecessor(sigma: np.ndarray, *, source_tag: str = "recovered") -> WeightSequence:
    """A predecessor nu whose descendant is the given sigma.

    sigma is given for k = 1..P with sigma_1 = 1 and sigma*_k = sigma_k/k
    increasing.  The difference identity tau_k - tau_{k+1} =
    (k+1)(1/nu_k - 1/nu_{k+1}) determines nu up to the value of 1/nu_1;
    anchoring the recursion at infinity (1/nu_k -> 0) makes tau_k =
    k/nu_k + sum_{j>=k} 1/nu_j hold exactly, and the scale T = tau_1 is then
    fixed by requiring sum_{k>=1} 1/nu_k = 1.  Returns nu as a
    WeightSequence table (nu_0 = 1 prepended).

    The construction: with B_k = 1/sigma*_k (decreasing from B_1 = 1) and
    d_m = (B_m - B_{m+1})/(m+1),

        1/nu_k = T sum_{m >= k} d_m,   G = sum_{m>=1} d_m,   T = 1/(1 - G),

    which gives sum 1/nu = T (1 - G) = 1 and descendant exactly sigma.
    """
    sigma = np.asarray(sigma, dtype=float)
    P = len(sigma)
    k = np.arange(1, P + 1, dtype=float)
    if abs(sigma[0] - 1.0) > 1e-9:
        raise NonincreasingResult("sigma_1 must be 1")
    sig_star = sigma / k
    if np.any(np.diff(sig_star) < -1e-12) or sig_star[-1] < 4.0 * sig_star[0]:
        raise NonincreasingResult(
            "sigma*_k must increase without bound (descendant shape)")
    B = 1.0 / sig_star
    d = (B[:-1] - B[1:]) / (k[:-1] + 1.0)
    if np.any(d < -1e-15):
        raise NonincreasingResult("sigma* not increasing: negative recursion steps")
    d = np.maximum(d, 0.0)
    # tail of sum d_m beyond the prefix
    _, est = tail_sums(np.maximum(d, 1e-300), rel_cap=None)
    d_tail = est.beyond if np.isfinite(est.err_bar) else 0.0
    G = float(np.sum(d) + d_tail)
    if not 0.0 < G < 0.5 + 1e-12:
        raise NonincreasingResult(f"recursion mass G = {G:.6f} outside (0, 1/2]")
    T = 1.0 / (1.0 - G)
    inv_nu = T * (np.concatenate([np.cumsum(d[::-1])[::-1], [0.0]]) + d_tail)
    if inv_nu[-1] <= 0 or np.any(np.diff(inv_nu) > 1e-15):
        raise NonincreasingResult("recovered nu not increasing")
    log_nu = -np.log(inv_nu)
    # nu are the quotients of the returned sequence (nu_0 = 1)
    seq_log_M = np.concatenate([[0.0], np.cumsum(log_nu)])
    return WeightSequence(seq_log_M, f"{source_tag}-predecessor")
