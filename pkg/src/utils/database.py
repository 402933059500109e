"""
Trace cache storage.

One SQLAlchemy engine per process, pointed at DATABASE_URL. File-backed SQLite runs in WAL
mode so a second `verify` process can read while another writes new exact traces.
"""

import os
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator

from sqlalchemy import create_engine, event, text
from sqlalchemy.engine import Engine
from sqlalchemy.engine.url import make_url
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import Session, sessionmaker

from src.utils.config_loader import config
from src.utils.logger import logger

DATABASE_URL = os.getenv("DATABASE_URL") or str(config.get("database.url", "sqlite:///data/ensembles.db"))

_SQLITE_PRAGMAS = ("foreign_keys=ON", "journal_mode=WAL", "synchronous=NORMAL")


def _is_sqlite(url: str) -> bool:
    return make_url(url).get_backend_name() == "sqlite"


def _build_engine(url: str) -> Engine:
    # Oracle workers share the engine across threads.
    connect_args = {"check_same_thread": False} if _is_sqlite(url) else {}
    return create_engine(url, pool_pre_ping=True, connect_args=connect_args)


engine = _build_engine(DATABASE_URL)


@event.listens_for(Engine, "connect")
def set_sqlite_pragma(dbapi_conn, connection_record):
    """Apply the cache pragmas to each new SQLite connection, including test engines."""
    if not type(dbapi_conn).__module__.startswith("sqlite3"):
        return
    cursor = dbapi_conn.cursor()
    for pragma in _SQLITE_PRAGMAS:
        cursor.execute(f"PRAGMA {pragma}")
    cursor.close()


SessionLocal = sessionmaker(bind=engine, autoflush=False)


@contextmanager
def get_db() -> Iterator[Session]:
    """
    Session scope: commit when the block finishes, roll back and re-raise when it fails.

    Example:
        with get_db() as db:
            TraceCacheRepository(db).count()
    """
    session = SessionLocal()
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()


def _ensure_sqlite_directory(url: str) -> None:
    parsed = make_url(url)
    if parsed.get_backend_name() != "sqlite" or parsed.database in (None, "", ":memory:"):
        return
    Path(parsed.database).parent.mkdir(parents=True, exist_ok=True)


def init_db() -> None:
    """Create the cache tables, and the SQLite file's directory, when missing."""
    from src.models import Base

    _ensure_sqlite_directory(DATABASE_URL)
    Base.metadata.create_all(bind=engine)
    logger.debug(f"Trace cache ready at {make_url(DATABASE_URL).render_as_string(hide_password=True)}")


def check_db_connection() -> bool:
    """True when a trivial query succeeds against the configured engine."""
    try:
        with engine.connect() as conn:
            conn.execute(text("SELECT 1"))
    except SQLAlchemyError as e:
        logger.error(f"Trace cache unreachable: {e}")
        return False
    return True
