"""
Exact trace cache model.

Stores exact ensemble-averaged traces tr(H^order) keyed by ensemble point.
"""

from datetime import datetime

from sqlalchemy import DateTime, Integer, String, Text, UniqueConstraint
from sqlalchemy.orm import Mapped, mapped_column

from src.models import Base, generate_uuid, utc_now


class ExactTraceRecord(Base):
    """
    One exact oracle value.

    Values are arbitrary-precision integers and are stored as decimal text.
    """

    __tablename__ = "exact_traces"
    __table_args__ = (
        UniqueConstraint("statistics", "beta", "l", "m", "k", "order", name="uq_trace_point"),
    )

    id: Mapped[str] = mapped_column(String(36), primary_key=True, default=generate_uuid)

    statistics: Mapped[str] = mapped_column(String(16), nullable=False)
    beta: Mapped[int] = mapped_column(Integer, nullable=False)
    l: Mapped[int] = mapped_column(Integer, nullable=False)
    m: Mapped[int] = mapped_column(Integer, nullable=False)
    k: Mapped[int] = mapped_column(Integer, nullable=False)
    order: Mapped[int] = mapped_column(Integer, nullable=False)

    value: Mapped[str] = mapped_column(Text, nullable=False)
    pairings: Mapped[int] = mapped_column(Integer, nullable=False)
    created_at: Mapped[datetime] = mapped_column(DateTime, nullable=False, default=utc_now)

    @property
    def exact_value(self) -> int:
        return int(self.value)

    def __repr__(self) -> str:
        return (
            f"<ExactTraceRecord({self.statistics}, beta={self.beta}, l={self.l}, m={self.m}, "
            f"k={self.k}, order={self.order})>"
        )
