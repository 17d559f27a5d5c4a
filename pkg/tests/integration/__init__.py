"""
copsens Integration Tests

Slow end-to-end checks of the estimators against simulated counterfactual truth.
"""
