"""Finite-prefix check reports.

The growth conditions in this package are asymptotic statements; on a
stored prefix we can only report the best witness constant seen so far and
whether it is still growing with the prefix.  A check therefore returns a
:class:`CheckReport` with one of four verdicts:

* ``HOLDS_UP_TO_K`` -- witness stabilized on the prefix and stayed below the
  configured cap,
* ``FAILS`` -- the witness kept growing from the half prefix to the full
  prefix (divergence trend) or blew past the hard cap,
* ``INCONCLUSIVE`` -- neither pattern is clear,
* ``NOT_WITNESSED_IN_SAMPLE`` -- an existential search over a sampled family
  found no witness (never a proof of failure).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

HOLDS = "HOLDS_UP_TO_K"
FAILS = "FAILS"
INCONCLUSIVE = "INCONCLUSIVE"
NOT_WITNESSED = "NOT_WITNESSED_IN_SAMPLE"

# Hard cap on any reported witness constant, in natural log.  Witnesses past
# exp(60) ~ 1e26 are treated as failures even when the trend test is mute.
LOG_WITNESS_CAP = 60.0

# Trend thresholds: growth of the log-witness from the half prefix to the
# full prefix.  Stable witnesses stay below GROW_HOLDS; diverging families
# (q-Gevrey, the omega_s rows) grow by at least ~log 2 per prefix doubling,
# so the FAILS threshold sits safely below that.
GROW_HOLDS = math.log(1.25)
GROW_FAILS = math.log(1.75)


@dataclass(frozen=True)
class CheckReport:
    verdict: str
    prefix_K: int
    witness_constant: float | None = None
    counterexample_index: int | None = None
    note: str = ""
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict == FAILS and self.counterexample_index is None:
            raise ValueError("FAILS verdict requires a counterexample index")

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict,
            "witness_constant": self.witness_constant,
            "counterexample_index": self.counterexample_index,
            "prefix_K": self.prefix_K,
        }
        if self.note:
            out["note"] = self.note
        if self.details:
            out["details"] = self.details
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def report_from_log_witnesses(log_w: np.ndarray, prefix_K: int, note: str = "") -> CheckReport:
    """Verdict for a `lhs <= C * rhs` condition from per-index log witnesses.

    ``log_w[i]`` is the log of the smallest constant validating the condition
    at index ``i`` (ordered by index).  The condition is declared FAILS when
    the running max still grows from the half prefix to the full prefix, or
    exceeds the hard cap.
    """
    log_w = np.asarray(log_w, dtype=float)
    log_w = log_w[np.isfinite(log_w)]
    if log_w.size == 0:
        return CheckReport(INCONCLUSIVE, prefix_K, note=note or "no finite witnesses")
    half = max(1, log_w.size // 2)
    m_half = float(np.max(log_w[:half]))
    m_full = float(np.max(log_w))
    growth = m_full - m_half
    witness = float(math.exp(min(m_full, 700.0)))
    if m_full > LOG_WITNESS_CAP or growth >= GROW_FAILS:
        over = np.nonzero(log_w > max(m_half + GROW_FAILS / 2, min(m_full, LOG_WITNESS_CAP)) - 1e-12)[0]
        idx = int(over[0]) + 1 if over.size else log_w.size
        return CheckReport(
            FAILS, prefix_K, witness_constant=witness, counterexample_index=idx,
            note=note, details={"log_witness_growth": growth},
        )
    if growth <= GROW_HOLDS:
        return CheckReport(HOLDS, prefix_K, witness_constant=witness, note=note,
                           details={"log_witness_growth": growth})
    return CheckReport(INCONCLUSIVE, prefix_K, witness_constant=witness, note=note,
                       details={"log_witness_growth": growth})


def report_from_prefix_witnesses(log_w_half: float, log_w_full: float, prefix_K: int,
                                 counterexample_index: int | None = None,
                                 note: str = "") -> CheckReport:
    """Same trend semantics when only (half-prefix, full-prefix) witnesses exist."""
    growth = log_w_full - log_w_half
    witness = float(math.exp(min(log_w_full, 700.0)))
    if log_w_full > LOG_WITNESS_CAP or growth >= GROW_FAILS:
        return CheckReport(FAILS, prefix_K, witness_constant=witness,
                           counterexample_index=counterexample_index or prefix_K,
                           note=note, details={"log_witness_growth": growth})
    if growth <= GROW_HOLDS:
        return CheckReport(HOLDS, prefix_K, witness_constant=witness, note=note,
                           details={"log_witness_growth": growth})
    return CheckReport(INCONCLUSIVE, prefix_K, witness_constant=witness, note=note,
                       details={"log_witness_growth": growth})


def verdicts_agree(reports) -> bool:
    """True when every report in an equivalence group carries the same verdict."""
    vs = {r.verdict for r in reports}
    return len(vs) == 1
