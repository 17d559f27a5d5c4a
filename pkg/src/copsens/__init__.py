"""
copsens - Controlled-risk correlate-of-protection analysis

This package contains the estimation stack for immune-correlates analyses of
two-phase (case-cohort) vaccine trials:
- dataset: CSV ingestion, sampling weights, tertiles, design diagnostics
- riskreg: weighted logistic and case-cohort Cox risk models
- marginal: g-computation of marginalized risk curves and contrasts
- sensitivity: E-values, bias factors, conservative controlled-risk bounds
- cve: controlled vaccine-efficacy curves and the full-mediation probe
- bootstrap: design-respecting stratified bootstrap
- sim: synthetic trials with counterfactual ground truth
- pipeline: the end-to-end analysis
- cli: batch command-line front end
- platform: cross-cutting concerns (config, logging, errors)
"""

__version__ = "0.1.0"
