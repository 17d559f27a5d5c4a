"""Controlled vaccine efficacy curves and the full-mediation probe."""

from copsens.cve.efficacy import (
    MediationProbe,
    PlaceboRisk,
    cve_curve,
    cve_frame,
    mediation_probe,
    placebo_marginalized_risk,
    write_cve_csv,
)

__all__ = [
    "MediationProbe",
    "PlaceboRisk",
    "cve_curve",
    "cve_frame",
    "mediation_probe",
    "placebo_marginalized_risk",
    "write_cve_csv",
]
