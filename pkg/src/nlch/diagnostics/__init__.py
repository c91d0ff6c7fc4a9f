"""Runnable checks built on simulated or synthetic trajectories."""
from .attractor import AttractorReport, attractor_probe
from .certificate import CertificateConstants, SeparationCertificate, delta_certificate, log_K, sandwich_holds
from .degiorgi import DeGiorgiParams, DeGiorgiReport, DiagnosticError, degiorgi_sequences
from .holder import HolderEstimate, holder_estimate
from .interpolation import estimate_c_omega, gn_ratio
from .iteration import IterLemmaReport, iter_lemma_check
from .regularity import RegularityReport, admissible, regularity_scaling
from .separation import MuBoundReport, energy_constant_estimate, mu_bound_check, separation_profile

__all__ = [
    "AttractorReport",
    "CertificateConstants",
    "DeGiorgiParams",
    "DeGiorgiReport",
    "DiagnosticError",
    "HolderEstimate",
    "IterLemmaReport",
    "MuBoundReport",
    "RegularityReport",
    "SeparationCertificate",
    "admissible",
    "attractor_probe",
    "degiorgi_sequences",
    "delta_certificate",
    "energy_constant_estimate",
    "estimate_c_omega",
    "gn_ratio",
    "holder_estimate",
    "iter_lemma_check",
    "log_K",
    "mu_bound_check",
    "regularity_scaling",
    "sandwich_holds",
    "separation_profile",
]
