"""
Trace cache repository.

Data access layer for ExactTraceRecord entities.
"""

from typing import Optional

from sqlalchemy.orm import Session

from src.models.trace_record import ExactTraceRecord
from src.utils.logger import logger
from src.utils.retry import retry_on_database_lock


class TraceCacheRepository:
    """Repository for cached exact oracle traces."""

    def __init__(self, db: Session):
        self.db = db

    def get_record(
        self, statistics: str, beta: int, l: int, m: int, k: int, order: int
    ) -> Optional[ExactTraceRecord]:
        """
        Look up one cached trace record.

        Args:
            statistics: "fermionic" or "bosonic"
            beta: Symmetry class
            l: Number of levels
            m: Particle count
            k: Interaction rank
            order: Trace power n2

        Returns:
            ExactTraceRecord or None
        """
        return (
            self.db.query(ExactTraceRecord)
            .filter(
                ExactTraceRecord.statistics == statistics,
                ExactTraceRecord.beta == beta,
                ExactTraceRecord.l == l,
                ExactTraceRecord.m == m,
                ExactTraceRecord.k == k,
                ExactTraceRecord.order == order,
            )
            .first()
        )

    def get_trace(
        self, statistics: str, beta: int, l: int, m: int, k: int, order: int
    ) -> Optional[int]:
        """Cached exact value, or None on a miss."""
        record = self.get_record(statistics, beta, l, m, k, order)
        return record.exact_value if record else None

    @retry_on_database_lock()
    def store_trace(
        self,
        statistics: str,
        beta: int,
        l: int,
        m: int,
        k: int,
        order: int,
        value: int,
        pairings: int,
    ) -> ExactTraceRecord:
        """
        Store an exact trace, replacing any earlier value for the same point.

        Returns:
            The persisted ExactTraceRecord
        """
        record = self.get_record(statistics, beta, l, m, k, order)
        if record:
            record.value = str(value)
            record.pairings = pairings
        else:
            record = ExactTraceRecord(
                statistics=statistics,
                beta=beta,
                l=l,
                m=m,
                k=k,
                order=order,
                value=str(value),
                pairings=pairings,
            )
            self.db.add(record)
        self.db.commit()
        self.db.refresh(record)
        logger.info(f"Cached exact trace {record!r}")
        return record

    def count(self) -> int:
        return self.db.query(ExactTraceRecord).count()

    @retry_on_database_lock()
    def purge(self, statistics: Optional[str] = None) -> int:
        """
        Delete cached traces.

        Args:
            statistics: Only purge this statistics (all when None)

        Returns:
            Number of deleted rows
        """
        query = self.db.query(ExactTraceRecord)
        if statistics:
            query = query.filter(ExactTraceRecord.statistics == statistics)
        deleted = query.delete()
        self.db.commit()
        logger.info(f"Purged {deleted} cached traces")
        return deleted
