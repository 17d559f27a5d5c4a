"""
copsens Unit Tests

Tests that run on small hand-built fixtures and simulated trials, without
external services. Monte Carlo studies are marked ``slow``.
"""
