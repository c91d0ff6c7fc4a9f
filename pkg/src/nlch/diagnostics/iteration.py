"""Geometric-decay lemma for sequences with y_{n+1} <= C b^n y_n^{1+eps}."""
from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class IterLemmaReport:
    C: float
    b: float
    eps: float
    y0: float
    n_max: int
    log_threshold: float
    precondition_holds: bool
    conclusion_holds: bool
    first_violation: int | None
    log_y: list[float] = field(repr=False)
    log_bound: list[float] = field(repr=False)
    slack: list[float] = field(repr=False)

    @property
    def threshold(self) -> float:
        return math.exp(self.log_threshold)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["threshold"] = self.threshold
        return d


def log_threshold(C: float, b: float, eps: float) -> float:
    """``ln(C^(-1/eps) b^(-1/eps^2))``."""
    return -math.log(C) / eps - math.log(b) / eps**2


def iter_lemma_check(
    C: float, b: float, eps: float, y0: float | None = None, n_max: int = 50, log_y0: float | None = None
) -> IterLemmaReport:
    """Run the extremal recursion ``y_{n+1} = C b^n y_n^(1+eps)`` in log space.

    The conclusion ``y_n <= y0 b^(-n/eps)`` is tracked through the slack
    ``s_n = ln y_n - (ln y0 - n ln b / eps)``, which obeys
    ``s_{n+1} = g + (1+eps) s_n`` with ``g = eps (ln y0 - ln threshold)``.
    When the precondition holds ``g <= 0``, and every ``s_n <= 0`` survives
    floating point exactly (sums and positive multiples of non-positive
    numbers stay non-positive).

    ``log_y0`` may replace ``y0`` when the start value is known only in log
    form (e.g. exactly at the threshold, which is not representable linearly).
    """
    if (y0 is None) == (log_y0 is None):
        raise ValueError("give exactly one of y0 and log_y0")
    if log_y0 is not None:
        y0 = math.exp(log_y0)
    if not (C > 0 and b > 1 and eps > 0 and y0 >= 0 and n_max >= 0):
        raise ValueError("need C > 0, b > 1, eps > 0, y0 >= 0, n_max >= 0")
    ln_b = math.log(b)
    ln_thr = log_threshold(C, b, eps)
    if log_y0 is not None:
        ln_y0 = log_y0
    else:
        ln_y0 = math.log(y0) if y0 > 0 else -math.inf
    holds = ln_y0 <= ln_thr

    g = eps * (ln_y0 - ln_thr) if ln_y0 > -math.inf else -math.inf
    slack = [0.0]
    log_y = [ln_y0]
    log_bound = [ln_y0]
    first_violation = None
    for n in range(n_max):
        # g and the slack share a sign-stable form, so no inf - inf can occur
        s = g + (1 + eps) * slack[-1]
        slack.append(s)
        bound = ln_y0 - (n + 1) * ln_b / eps
        log_bound.append(bound)
        log_y.append(bound + s)
        if first_violation is None and s > 0:
            first_violation = n + 1
    return IterLemmaReport(
        C=C,
        b=b,
        eps=eps,
        y0=y0,
        n_max=n_max,
        log_threshold=ln_thr,
        precondition_holds=holds,
        conclusion_holds=first_violation is None,
        first_violation=first_violation,
        log_y=log_y,
        log_bound=log_bound,
        slack=slack,
    )


def direct_log_recursion(C: float, b: float, eps: float, y0: float, n_max: int) -> list[float]:
    """Plain ``ln y_{n+1} = ln C + n ln b + (1+eps) ln y_n``; the unrearranged reference."""
    out = [math.log(y0) if y0 > 0 else -math.inf]
    for n in range(n_max):
        out.append(math.log(C) + n * math.log(b) + (1 + eps) * out[-1])
    return out
