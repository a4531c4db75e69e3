"""Shared pytest configuration for the suite."""

from hypothesis import HealthCheck, settings

# Numeric property tests occasionally cross hypothesis' default per-example
# deadline on loaded CI machines; wall-clock budgets are enforced per test
# module instead.
settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")
