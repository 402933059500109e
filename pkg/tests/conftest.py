"""
Pytest configuration and shared fixtures.

Provides a throwaway SQLite trace cache, small Fock bases and the pairings most tests
talk about.
"""

from pathlib import Path
from typing import Iterator

import numpy as np
import pytest
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, sessionmaker

from src.models import Base, Basis, EnsembleParams, PairingPartition, Statistics
from src.repositories.trace_repo import TraceCacheRepository
from src.services import fock_service
from src.utils.database import _build_engine


@pytest.fixture
def test_db_path(tmp_path: Path) -> Path:
    """A file-backed cache location; WAL mode needs a real file."""
    return tmp_path / "cache" / "test_ensembles.db"


@pytest.fixture
def test_engine(test_db_path: Path) -> Iterator[Engine]:
    """
    Engine built the way production builds it, so the connect-time pragmas apply.

    Yields:
        Engine with the cache tables created
    """
    test_db_path.parent.mkdir(parents=True, exist_ok=True)
    engine = _build_engine(f"sqlite:///{test_db_path}")
    Base.metadata.create_all(engine)

    yield engine

    engine.dispose()


@pytest.fixture
def test_session(test_engine: Engine) -> Iterator[Session]:
    """Session on the test engine; uncommitted work is rolled back afterwards."""
    session = sessionmaker(bind=test_engine, expire_on_commit=False)()

    yield session

    session.rollback()
    session.close()


@pytest.fixture
def trace_repo(test_session: Session) -> TraceCacheRepository:
    return TraceCacheRepository(test_session)


@pytest.fixture(scope="function")
def seeded_traces(trace_repo: TraceCacheRepository) -> TraceCacheRepository:
    """
    Repository pre-populated with a few known exact traces.

    - fermionic tr(H^2) at (l, m, k) = (4, 2, 1): 36
    - fermionic tr(H^4) at (2, 1, 1): 18
    - one bosonic order-2 entry at (3, 2, 1), so statistics filters have something to skip
    """
    trace_repo.store_trace("fermionic", 2, 4, 2, 1, 2, 36, 1)
    trace_repo.store_trace("fermionic", 2, 2, 1, 1, 4, 18, 3)
    trace_repo.store_trace("bosonic", 2, 3, 2, 1, 2, 81, 1)
    return trace_repo


@pytest.fixture
def fermionic_basis() -> Basis:
    """All 6 two-fermion states on 4 levels."""
    return fock_service.enumerate_basis(4, 2, Statistics.FERMIONIC)


@pytest.fixture
def bosonic_basis() -> Basis:
    """All 6 two-boson states on 3 levels."""
    return fock_service.enumerate_basis(3, 2, Statistics.BOSONIC)


@pytest.fixture
def small_params() -> EnsembleParams:
    return EnsembleParams(beta=2, k=1, m=2, l=5)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def standard_pairing() -> PairingPartition:
    """The crossing fourth-order pairing (13)(24)."""
    return PairingPartition(((1, 3), (2, 4)))


@pytest.fixture
def prism_pairing() -> PairingPartition:
    return PairingPartition(((1, 3), (2, 5), (4, 6)))
