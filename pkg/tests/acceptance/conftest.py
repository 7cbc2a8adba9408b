import math

import pytest

from app.services.presets import load_preset

# 95% two-sided normal quantile
Z95 = 1.96


def _non_decreasing(values, errors, label=""):
    """Fail only when a drop is larger than the combined 95% interval."""
    for i in range(len(values) - 1):
        slack = Z95 * math.hypot(errors[i], errors[i + 1])
        assert values[i + 1] >= values[i] - slack, f"{label} drops at index {i + 1}: {values}"


def _non_increasing(values, errors, label=""):
    _non_decreasing([-v for v in values], errors, label)


@pytest.fixture
def preset_config():
    """Load a shipped preset's config with lighter sampling settings."""

    def load(name, **updates):
        return load_preset(name).config.with_updates(**updates)

    return load


@pytest.fixture
def non_decreasing():
    return _non_decreasing


@pytest.fixture
def non_increasing():
    return _non_increasing
