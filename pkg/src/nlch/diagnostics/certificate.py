"""Log-space (delta, tau_tilde) separation certificate."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .degiorgi import DiagnosticError

LN2 = math.log(2.0)


@dataclass(frozen=True)
class CertificateConstants:
    c_f: float
    c_omega: float
    l1_gradJ: float
    energy_constant: float
    eps0: float = 0.5
    eps1: float = 0.25
    c_j: float | None = None

    def __post_init__(self):
        for name in ("c_omega", "l1_gradJ", "energy_constant", "eps0", "eps1"):
            if not getattr(self, name) > 0:
                raise DiagnosticError(f"{name} must be > 0")
        if not self.c_f >= 1:
            raise DiagnosticError("c_f must be >= 1")
        if self.c_j is not None and not self.c_j > 0:
            raise DiagnosticError("c_j must be > 0")

    @property
    def cj(self) -> float:
        """``max(G^(10/3), G^(4/3))`` unless given explicitly."""
        if self.c_j is not None:
            return self.c_j
        g = self.l1_gradJ
        return max(g ** (10 / 3), g ** (4 / 3))


@dataclass
class SeparationCertificate:
    ln_delta: float
    ln_tau_tilde: float
    feasible: bool
    log_K: float
    ln_lower: float
    ln_upper: float
    capped: bool
    constants_used: dict

    @property
    def tau_tilde(self) -> float:
        # underflows to 0.0 for realistic constants; ln_tau_tilde is authoritative
        return math.exp(self.ln_tau_tilde)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tau_tilde"] = self.tau_tilde
        return d


def log_K(c: CertificateConstants) -> float:
    """``ln K`` where feasibility of the sandwich is ``|ln delta| >= K``.

    Equating ``2^4 d / (c_f G^2)`` with ``d |ln d| / (3 2^(77/4) cO^(3/2) c_f^5 cJ^(3/2) E)``
    gives ``K = 3 2^(93/4) cO^(3/2) c_f^4 cJ^(3/2) E / G^2``.
    """
    return (
        math.log(3.0)
        + 93 / 4 * LN2
        + 1.5 * math.log(c.c_omega)
        + 4 * math.log(c.c_f)
        + 1.5 * math.log(c.cj)
        + math.log(c.energy_constant)
        - 2 * math.log(c.l1_gradJ)
    )


def ln_lower(ln_delta: float, c: CertificateConstants) -> float:
    return 4 * LN2 + ln_delta - math.log(c.c_f) - 2 * math.log(c.l1_gradJ)


def ln_upper(ln_delta: float, c: CertificateConstants) -> float:
    if not ln_delta < 0:
        return -math.inf
    return (
        ln_delta
        + math.log(-ln_delta)
        - math.log(3.0)
        - 77 / 4 * LN2
        - 1.5 * math.log(c.c_omega)
        - 5 * math.log(c.c_f)
        - 1.5 * math.log(c.cj)
        - math.log(c.energy_constant)
    )


def sandwich_holds(ln_delta: float, ln_tau: float, c: CertificateConstants, tau: float) -> bool:
    """Re-evaluate both sandwich inequalities and the window cap in log space.

    The upper inequality is tested as ``ln_tau - ln_lower <= ln|ln delta| - ln K``,
    which is the same statement with the two ``O(K)`` terms cancelled
    analytically; comparing ``ln_upper`` directly loses every digit once
    ``K`` exceeds about 1e7.
    """
    if not ln_delta < 0:
        return False
    excess = ln_tau - ln_lower(ln_delta, c)
    return (
        excess >= 0
        and excess <= math.log(-ln_delta) - log_K(c)
        and ln_tau <= math.log(tau / 5)
        and ln_delta <= min(math.log(c.eps0 / 2), math.log(c.eps1))
    )


def delta_certificate(constants: CertificateConstants | dict, tau: float) -> SeparationCertificate:
    c = constants if isinstance(constants, CertificateConstants) else CertificateConstants(**constants)
    if not tau > 0:
        raise DiagnosticError("tau must be > 0")
    lk = log_K(c)
    K = math.exp(lk)  # finite unless the constants are absurd
    ln_delta = min(-K, math.log(c.eps0 / 2), math.log(c.eps1)) - LN2
    ln_tau = ln_lower(ln_delta, c)
    cap = math.log(tau / 5)
    capped = ln_tau > cap
    if capped:
        ln_delta = min(ln_delta, cap - 4 * LN2 + math.log(c.c_f) + 2 * math.log(c.l1_gradJ))
        ln_tau = ln_lower(ln_delta, c)
        while ln_tau > cap:  # one-ulp overshoot from the round trip
            ln_delta = math.nextafter(ln_delta, -math.inf)
            ln_tau = ln_lower(ln_delta, c)
    used = asdict(c)
    used["c_j"] = c.cj
    used["tau"] = tau
    return SeparationCertificate(
        ln_delta=ln_delta,
        ln_tau_tilde=ln_tau,
        feasible=sandwich_holds(ln_delta, ln_tau, c, tau),
        log_K=lk,
        ln_lower=ln_lower(ln_delta, c),
        ln_upper=ln_upper(ln_delta, c),
        capped=capped,
        constants_used=used,
    )
