"""
Models for the embedded ensembles toolkit.

Domain value types are frozen dataclasses; the persisted exact-trace cache inherits from
the Base declarative base.
"""

import uuid
from datetime import datetime, timezone

from sqlalchemy.orm import DeclarativeBase


class Base(DeclarativeBase):
    """Base class for all database models."""
    pass


def generate_uuid() -> str:
    """Generate a UUID string for use as primary key."""
    return str(uuid.uuid4())


def utc_now() -> datetime:
    """Get current UTC datetime (naive, as stored by SQLite)."""
    return datetime.now(timezone.utc).replace(tzinfo=None)


from src.models.binomial import BinomialFactor, BinomialProduct
from src.models.diagram import (
    ArgumentCertificate,
    Bond,
    BondKind,
    ContractionPattern,
    LeadingTerm,
    Loop,
    LoopSystem,
    ParticleDiagram,
)
from src.models.ensemble import CouplingKernel, EnsembleParams, HermitianMatrix, PairMap
from src.models.fock import (
    KILLED,
    Amplitude,
    Basis,
    IndexTuple,
    Kill,
    OccupationState,
    Statistics,
    StringResult,
)
from src.models.pairing import CycleDecomposition, DyckWord, PairingPartition
from src.models.reports import (
    CheckResult,
    DensityHistogram,
    MomentEstimate,
    MomentFormulaResult,
    MomentReport,
)
from src.models.trace_record import ExactTraceRecord

__all__ = [
    "Base",
    "generate_uuid",
    "utc_now",
    "Amplitude",
    "ArgumentCertificate",
    "Basis",
    "BinomialFactor",
    "BinomialProduct",
    "Bond",
    "BondKind",
    "CheckResult",
    "ContractionPattern",
    "CouplingKernel",
    "CycleDecomposition",
    "DensityHistogram",
    "DyckWord",
    "EnsembleParams",
    "ExactTraceRecord",
    "HermitianMatrix",
    "IndexTuple",
    "KILLED",
    "Kill",
    "LeadingTerm",
    "Loop",
    "LoopSystem",
    "MomentEstimate",
    "MomentFormulaResult",
    "MomentReport",
    "OccupationState",
    "PairMap",
    "PairingPartition",
    "ParticleDiagram",
    "Statistics",
    "StringResult",
]
