"""Decision procedures for the Whitney extension property.

The extension property of a weight matrix reduces to the tail-domination
condition: for each row N there is a row Ndot with

    sum_{l >= k} 1/nudot_l  <=  C k / nu_k.

This module evaluates that condition, its phi_{p,k}-weakening, the paired
single-sequence condition from the classical setting, and the
quotient-regularity condition, all on stored prefixes with the shared tail
machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ExtensionError, QuasianalyticInput
from .report import (CheckReport, FAILS, HOLDS, INCONCLUSIVE, NOT_WITNESSED,
                     report_from_log_witnesses)
from .seqcalc import WeightSequence, check_nonquasianalytic
from .tails import log_suffix_sums
from .weightfunc import WeightMatrix, check_admissible_matrix

P_GRID_DEFAULT = (1, 2, 4, 8, 16)


def _existential_verdict(missing, n_rows: int, K: int, worst, note: str) -> CheckReport:
    """HOLDS when every row is witnessed or the unwitnessed ones are the
    sampling boundary (a suffix of the parameter order)."""
    from .weightfunc import _is_param_suffix
    if worst is None:
        return CheckReport(NOT_WITNESSED, K, note=note + "; no row witnessed")
    if missing and not _is_param_suffix(missing, n_rows):
        return CheckReport(NOT_WITNESSED, K,
                           note=note + f"; rows {missing} not witnessed in sample")
    sfx = (f"; top rows {missing} lack partners (sampling boundary)"
           if missing else "")
    return CheckReport(HOLDS, K, witness_constant=worst.witness_constant,
                       note=note + sfx)


@dataclass(frozen=True)
class ExtensionVerdict:
    condition_id: str
    verdict: CheckReport
    witnessing_row_pairs: tuple = ()
    constants: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "condition_id": self.condition_id,
            "verdict": self.verdict.to_dict(),
            "witnessing_row_pairs": list(self.witnessing_row_pairs),
            "constants": self.constants,
        }


def check_43(N: WeightSequence, K_eff: int | None = None) -> CheckReport:
    """Quotient regularity: nu_{k+1}/nu_k <= (C+1) + C nu*_{k+1} sum_{j>k} 1/nu_j.

    The smallest admissible C per index solves the inequality directly; the
    report carries the prefix max with trend semantics.
    """
    nq = check_nonquasianalytic(N)
    if nq.verdict == FAILS:
        raise QuasianalyticInput(f"{N.family_tag} is quasianalytic (trend)")
    K = N.K
    if K_eff is None:
        K_eff = K // 2
    log_T, _ = log_suffix_sums(-N.log_mu, rel_cap=None)
    k = np.arange(1, K_eff, dtype=float)       # condition at k -> k+1
    log_ratio_m1 = _log_expm1(N.log_mu[1:K_eff] - N.log_mu[:K_eff - 1])
    log_nu_star_next = np.cumsum(N.log_mu)[1:K_eff] - np.log(k + 1.0)
    log_denom = np.logaddexp(0.0, log_nu_star_next + log_T[1:K_eff])
    return report_from_log_witnesses(
        log_ratio_m1 - log_denom, K_eff,
        note="quotient regularity (4.3); witness is the smallest validating C")


def _log_expm1(x: np.ndarray) -> np.ndarray:
    """log(e^x - 1) for x >= 0, stable for both tiny and huge x."""
    x = np.asarray(x, dtype=float)
    out = np.where(x > 30.0, x, np.log(np.maximum(np.expm1(np.minimum(x, 30.0)),
                                                  1e-300)))
    return out


def check_14(M: WeightSequence, N: WeightSequence) -> CheckReport:
    """Classical pair condition: sum_{l>=k} N_{l-1}/N_l <= C k M_{k-1}/M_k."""
    nq = check_nonquasianalytic(N)
    if nq.verdict != HOLDS:
        raise QuasianalyticInput(f"{N.family_tag}: verdict {nq.verdict}")
    K = min(M.K, N.K)
    log_T, _ = log_suffix_sums(-N.log_mu[:K], rel_cap=0.01, what="sum 1/nu")
    k = np.arange(1, K + 1, dtype=float)
    rhs = np.log(k) - M.log_mu[:K]
    return report_from_log_witnesses(log_T - rhs, K,
                                     note="sum_{l>=k} 1/nu_l <= C k/mu_k")


def phi_pk(M: WeightSequence, N: WeightSequence, p: int, k: int) -> float:
    """phi_{p,k} = sup_{0 <= j < k} (M_k / (p^k N_j))^{1/(k-j)}, log-domain."""
    if k < 1:
        raise ValueError("phi_pk needs k >= 1")
    j = np.arange(0, k)
    logs = (M.log_M[k] - k * math.log(p) - N.log_M[j]) / (k - j)
    return float(math.exp(min(np.max(logs), 700.0)))


def log_phi_pk_all(M: WeightSequence, N: WeightSequence, p: int, K_eff: int) -> np.ndarray:
    out = np.empty(K_eff)
    for k in range(1, K_eff + 1):
        j = np.arange(0, k)
        out[k - 1] = np.max((M.log_M[k] - k * math.log(p) - N.log_M[j]) / (k - j))
    return out


def _pair_tail_witness(N: WeightSequence, Ndot: WeightSequence,
                       K_eff: int) -> np.ndarray:
    """Log witnesses of sum_{l>=k} 1/nudot_l <= C k/nu_k on the prefix."""
    log_T, _ = log_suffix_sums(-Ndot.log_mu, rel_cap=None)
    k = np.arange(1, K_eff + 1, dtype=float)
    return log_T[:K_eff] + N.log_mu[:K_eff] - np.log(k)


def check_519(mat: WeightMatrix, K_eff: int | None = None) -> ExtensionVerdict:
    """For each row N, find a sampled row Ndot with tail <~ k/nu_k."""
    K_eff = K_eff or mat.K // 2
    pairs = []
    constants = {}
    worst = None
    missing = []
    for i, n in enumerate(mat.rows):
        best = None
        for j, nd in enumerate(mat.rows):
            rep = report_from_log_witnesses(_pair_tail_witness(n, nd, K_eff), K_eff)
            if rep.holds and (best is None or rep.witness_constant < best[1].witness_constant):
                best = (j, rep)
        if best is None:
            missing.append(i)
        else:
            pairs.append((i, best[0]))
            constants[f"{i}->{best[0]}"] = best[1].witness_constant
            if worst is None or best[1].witness_constant > worst.witness_constant:
                worst = best[1]
    rep = _existential_verdict(missing, len(mat.rows), K_eff, worst,
                               "sum_{l>=k} 1/nudot_l <= C k/nu_k per row")
    return ExtensionVerdict("5.19", rep, tuple(pairs), constants)


def check_518(mat: WeightMatrix, p_grid=P_GRID_DEFAULT,
              K_eff: int | None = None) -> ExtensionVerdict:
    """phi-weakened condition: tail of Ndot dominated by k / phi_{p,k}^{N,Ndot}."""
    K_eff = K_eff or mat.K // 2
    pairs = []
    constants = {}
    worst = None
    missing = []
    for i, n in enumerate(mat.rows):
        best = None
        for j, nd in enumerate(mat.rows):
            log_T, _ = log_suffix_sums(-nd.log_mu, rel_cap=None)
            log_tail = log_T[:K_eff]
            k = np.arange(1, K_eff + 1, dtype=float)
            for p in p_grid:
                log_phi = log_phi_pk_all(n, nd, p, K_eff)
                rep = report_from_log_witnesses(log_tail + log_phi - np.log(k), K_eff)
                if rep.holds and (best is None or rep.witness_constant < best[2].witness_constant):
                    best = (j, p, rep)
        if best is None:
            missing.append(i)
        else:
            pairs.append((i, best[0], best[1]))
            constants[f"{i}->{best[0]},p={best[1]}"] = best[2].witness_constant
            if worst is None or best[2].witness_constant > worst.witness_constant:
                worst = best[2]
    rep = _existential_verdict(missing, len(mat.rows), K_eff, worst,
                               "sum_{l>=k} 1/nudot_l <= C k/phi_{p,k} per row")
    return ExtensionVerdict("5.18", rep, tuple(pairs), constants)


def check_517(mat: WeightMatrix) -> ExtensionVerdict:
    """Root domination: each row N has a sampled Ndot with nu_k <= C Ndot_k^{1/k}."""
    K = mat.K
    pairs = []
    worst = None
    missing = []
    for i, n in enumerate(mat.rows):
        best = None
        for j, nd in enumerate(mat.rows):
            k = np.arange(1, K + 1)
            rep = report_from_log_witnesses(n.log_mu - nd.log_M[1:] / k, K)
            if rep.holds and (best is None or rep.witness_constant < best[1].witness_constant):
                best = (j, rep)
        if best is None:
            missing.append(i)
        else:
            pairs.append((i, best[0]))
            if worst is None or best[1].witness_constant > worst.witness_constant:
                worst = best[1]
    rep = _existential_verdict(missing, len(mat.rows), K,
                               worst if not missing or worst is not None else None,
                               "nu_k <= C Ndot_k^{1/k} per row")
    return ExtensionVerdict("5.17", rep, tuple(pairs))


def lemma_510_coherent(mat: WeightMatrix, p_grid=P_GRID_DEFAULT) -> dict:
    """Equivalence of the phi-weakened and plain tail conditions under root
    domination.  Returns the three verdicts plus an agreement flag; callers
    surface disagreement as a diagnostic."""
    v17 = check_517(mat)
    v18 = check_518(mat, p_grid)
    v19 = check_519(mat)
    agree = (v17.verdict.verdict != HOLDS) or (v18.verdict.verdict == v19.verdict.verdict)
    return {"5.17": v17, "5.18": v18, "5.19": v19, "agree": agree}


def decide_extension_property(mat: WeightMatrix, *, weight_function=None,
                              require_admissible: bool = True) -> dict:
    """Extension-property verdict for a sampled weight matrix.

    The headline verdict is the per-row tail condition (5.19); for matrices
    derived from a weight function the cross-parameter form and the averaged
    integral condition are evaluated alongside.  Admissibility is checked
    first with sampling semantics: conditions (1)-(3) failing is an error,
    existential conditions missing witnesses only for a suffix of rows is
    reported but tolerated (sampling boundary).
    """
    adm = check_admissible_matrix(mat, check_43=check_43)
    hard_bad = [cid for cid in ("4.6-1", "4.6-2", "4.6-3")
                if adm[cid].verdict == FAILS]
    if hard_bad and require_admissible:
        raise ExtensionError(f"matrix not admissible in sample: {hard_bad} fail",
                             code="NOT_ADMISSIBLE_IN_SAMPLE")
    verdicts = {"admissibility": {k: v.to_dict() for k, v in adm.items()}}
    v19 = check_519(mat)
    verdicts["5.19"] = v19.to_dict()
    coher = lemma_510_coherent(mat)
    verdicts["5.18"] = coher["5.18"].to_dict()
    verdicts["lemma_5.10_agree"] = coher["agree"]
    headline = v19.verdict.verdict
    if weight_function is not None:
        from .weightfunc import check_omega_nonquasianalytic
        cor = check_omega_nonquasianalytic(weight_function)
        verdicts["cor5.13-2"] = v19.to_dict()  # same condition, per-parameter form
        verdicts["cor5.13-3"] = {k: v.to_dict() for k, v in cor.items()}
        three = [headline == HOLDS,
                 cor["averaged"].verdict == HOLDS]
        if all(three):
            headline = HOLDS
        elif any(v == FAILS for v in [headline, cor["averaged"].verdict]):
            headline = FAILS if headline == FAILS else headline
    verdicts["extension_property"] = ("YES" if headline == HOLDS else
                                      "NO" if headline == FAILS else
                                      "UNDECIDED_IN_SAMPLE")
    if headline == FAILS:
        verdicts["warning"] = ("prefix verdict only: necessity of the tail "
                               "condition is asymptotic")
    return verdicts
