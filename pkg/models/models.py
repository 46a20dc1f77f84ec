from datetime import datetime
from typing import List

from sqlalchemy import JSON, DateTime, Float, ForeignKey, Index, Integer, String, func
from sqlalchemy.orm import Mapped, mapped_column, relationship

from .base import Base


class RunRecord(Base):
    """Один запуск стадии пайплайна"""

    __tablename__ = "runs"

    id: Mapped[int] = mapped_column(primary_key=True)
    stage: Mapped[str] = mapped_column(String(50), nullable=False, index=True)
    seed: Mapped[int] = mapped_column(Integer, nullable=False)
    config_digest: Mapped[str] = mapped_column(String(64), nullable=False, index=True)
    status: Mapped[str] = mapped_column(String(20), nullable=False, default="ok")
    wall_time: Mapped[float] = mapped_column(Float, nullable=False, default=0.0)
    # счётчики стадии: число пар, эпох, итоговые лоссы и метрики
    counters: Mapped[dict] = mapped_column(JSON, nullable=False, default=dict)
    created_at: Mapped[datetime] = mapped_column(
        DateTime, nullable=False, server_default=func.now()
    )

    # Связь один-ко-многим с артефактами
    artifacts: Mapped[List["ArtifactRecord"]] = relationship(
        back_populates="run",
        lazy="raise_on_sql",
        cascade="all, delete-orphan",
        passive_deletes=True,
    )

    # Составной индекс: "был ли уже такой запуск этой стадии"
    __table_args__ = (Index("ix_runs_stage_digest", "stage", "config_digest"),)


class ArtifactRecord(Base):
    """Входной или выходной файл запуска с его sha256"""

    __tablename__ = "artifacts"

    id: Mapped[int] = mapped_column(primary_key=True)
    run_id: Mapped[int] = mapped_column(
        ForeignKey("runs.id", ondelete="CASCADE"),
        nullable=False,
        index=True,
    )
    role: Mapped[str] = mapped_column(String(10), nullable=False)
    path: Mapped[str] = mapped_column(String(500), nullable=False)
    digest: Mapped[str] = mapped_column(String(64), nullable=False, index=True)

    run: Mapped["RunRecord"] = relationship(
        back_populates="artifacts",
        lazy="raise_on_sql",
    )
