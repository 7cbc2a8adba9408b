import os
import sys
import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import StaticPool
import logging

# Add the project root to the path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from app.models.config import ExperimentConfig
from app.models.database import Base
from app.models.scenario import (
    EnergyPolicy,
    FadingParams,
    FramePlan,
    NoiseParams,
    Scenario,
    SensingModel,
)

# Disable logging during tests
logging.disable(logging.CRITICAL)

# Use an in-memory SQLite database for testing
TEST_DATABASE_URL = "sqlite:///:memory:"
engine = create_engine(
    TEST_DATABASE_URL, connect_args={"check_same_thread": False}, poolclass=StaticPool
)
TestingSessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)


# Test fixtures
@pytest.fixture
def ledger_session():
    """Session factory bound to a fresh in-memory ledger for each test."""
    Base.metadata.create_all(bind=engine)
    try:
        yield TestingSessionLocal
    finally:
        # Drop all tables after the test is complete
        Base.metadata.drop_all(bind=engine)


@pytest.fixture
def default_scenario():
    """Default parameters: P_d=0.9, P_f=0.2, Pr{H1}=0.2, unit variances, M=10, K=1."""
    return Scenario()


@pytest.fixture
def mse_scenario():
    """MSE sweep parameters with pilot energies pinned to E_t,0=10 and E_t,1=1."""
    return Scenario(
        fading=FadingParams(alpha=0.95, sigma_r2=1.0),
        noise=NoiseParams(sigma_n2=1.0, sigma_s2=1.0),
        sensing=SensingModel(p_d=0.9, p_f=0.2, prior_busy=0.2),
        frame=FramePlan(m=10, l_blocks=10, k_pilots=1),
        energy=EnergyPolicy(pilot_energy_idle=10.0, pilot_energy_busy=1.0),
    )


@pytest.fixture
def scalar_scenario():
    """Two-symbol block with a single pilot at E_t=10 and no interference."""
    return Scenario(
        fading=FadingParams(alpha=0.95, sigma_r2=1.0),
        noise=NoiseParams(sigma_n2=1.0, sigma_s2=0.0),
        frame=FramePlan(m=2, l_blocks=1, k_pilots=1),
        energy=EnergyPolicy(pilot_energy_idle=10.0, pilot_energy_busy=10.0),
    )


@pytest.fixture
def small_rate_config():
    """Cheap rate sweep used by harness and CLI tests."""
    return ExperimentConfig(
        name="small_rate",
        snr_idle_db=10.0,
        sweep={"variable": "m", "from": 4, "to": 6, "step": 2},
        trials=64,
        inner_samples=16,
        seed=7,
    )


@pytest.fixture
def small_mse_config():
    """Cheap MSE sweep used by harness and CLI tests."""
    return ExperimentConfig(
        name="small_mse",
        pilot_energy_idle=10.0,
        pilot_energy_busy=1.0,
        sweep={"variable": "p_f", "from": 0.0, "to": 0.4, "step": 0.2},
        trials=500,
        seed=3,
    )


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    """Keep unit tests in-process regardless of the developer's COGPILOT_WORKERS."""
    monkeypatch.setenv("COGPILOT_WORKERS", "1")
