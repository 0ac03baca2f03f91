"""
SQLAlchemy модели для хранения пакетных прогонов квантования.
"""

from datetime import datetime
from typing import List, Optional
from sqlalchemy import (
    Integer, String, Text, Boolean, DateTime, ForeignKey, Index, JSON, Float
)
from sqlalchemy.orm import relationship, Mapped, mapped_column
from sqlalchemy.sql import func

from .db import Base


class ExperimentRun(Base):
    """Один пакетный прогон (images x spaces x ks)."""

    __tablename__ = "experiment_runs"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)

    # Параметры прогона; сид беззнаковый 64-битный, поэтому строкой
    seed: Mapped[str] = mapped_column(String(20), nullable=False)
    spaces: Mapped[list] = mapped_column(JSON, nullable=False)
    ks: Mapped[list] = mapped_column(JSON, nullable=False)
    output_dir: Mapped[Optional[str]] = mapped_column(Text, nullable=True)

    # Итог
    status: Mapped[str] = mapped_column(String(20), default="running", nullable=False)  # running | finished | failed
    image_count: Mapped[int] = mapped_column(Integer, default=0, nullable=False)
    failed_images: Mapped[list] = mapped_column(JSON, default=list, nullable=False)
    error: Mapped[Optional[str]] = mapped_column(Text, nullable=True)

    created_at: Mapped[datetime] = mapped_column(
        DateTime(timezone=True), server_default=func.now(), nullable=False
    )
    finished_at: Mapped[Optional[datetime]] = mapped_column(DateTime(timezone=True), nullable=True)

    # Relationships
    records: Mapped[List["ExperimentRecord"]] = relationship(
        "ExperimentRecord", back_populates="run", cascade="all, delete-orphan"
    )
    profiles: Mapped[List["ProfileRecord"]] = relationship(
        "ProfileRecord", back_populates="run", cascade="all, delete-orphan"
    )

    def __repr__(self) -> str:
        return f"<ExperimentRun(id={self.id}, status={self.status}, images={self.image_count})>"


class ExperimentRecord(Base):
    """Строка результатов (image, space, k)."""

    __tablename__ = "experiment_records"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    run_id: Mapped[int] = mapped_column(
        Integer, ForeignKey("experiment_runs.id", ondelete="CASCADE"), nullable=False
    )

    image: Mapped[str] = mapped_column(String(255), nullable=False)
    short_edge: Mapped[int] = mapped_column(Integer, nullable=False)
    long_edge: Mapped[int] = mapped_column(Integer, nullable=False)
    space: Mapped[str] = mapped_column(String(10), nullable=False)
    k: Mapped[int] = mapped_column(Integer, nullable=False)
    seed: Mapped[str] = mapped_column(String(20), nullable=False)

    wcss: Mapped[float] = mapped_column(Float, nullable=False)
    vif: Mapped[float] = mapped_column(Float, nullable=False)
    # NULL = +inf (совпадающие изображения)
    psnr: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    logit_vif: Mapped[float] = mapped_column(Float, nullable=False)
    response: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    clamped: Mapped[int] = mapped_column(Integer, default=0, nullable=False)
    ms: Mapped[float] = mapped_column(Float, default=0.0, nullable=False)

    run: Mapped["ExperimentRun"] = relationship("ExperimentRun", back_populates="records")

    __table_args__ = (
        Index("ix_experiment_records_run_id", "run_id"),
        Index("ix_experiment_records_run_id_image", "run_id", "image"),
    )

    def __repr__(self) -> str:
        return f"<ExperimentRecord(run_id={self.run_id}, image={self.image}, space={self.space}, k={self.k})>"


class ProfileRecord(Base):
    """Профиль изображения: тон, насыщенность, светлота."""

    __tablename__ = "image_profiles"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    run_id: Mapped[int] = mapped_column(
        Integer, ForeignKey("experiment_runs.id", ondelete="CASCADE"), nullable=False
    )
    image: Mapped[str] = mapped_column(String(255), nullable=False)
    short_edge: Mapped[int] = mapped_column(Integer, nullable=False)
    long_edge: Mapped[int] = mapped_column(Integer, nullable=False)

    # Тон (круговые статистики); hue_sd NULL = +inf при R = 0
    hue_mean: Mapped[float] = mapped_column(Float, nullable=False)
    hue_resultant: Mapped[float] = mapped_column(Float, nullable=False)
    hue_sd: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    hue_skewness: Mapped[float] = mapped_column(Float, nullable=False)
    hue_kurtosis: Mapped[float] = mapped_column(Float, nullable=False)

    # Насыщенность и светлота
    chroma_mean: Mapped[float] = mapped_column(Float, nullable=False)
    chroma_sd: Mapped[float] = mapped_column(Float, nullable=False)
    chroma_skewness: Mapped[float] = mapped_column(Float, nullable=False)
    chroma_kurtosis: Mapped[float] = mapped_column(Float, nullable=False)
    lum_mean: Mapped[float] = mapped_column(Float, nullable=False)
    lum_sd: Mapped[float] = mapped_column(Float, nullable=False)
    lum_skewness: Mapped[float] = mapped_column(Float, nullable=False)
    lum_kurtosis: Mapped[float] = mapped_column(Float, nullable=False)

    # Флаги вырожденности
    hue_degenerate: Mapped[bool] = mapped_column(Boolean, default=False, nullable=False)
    hue_direction_undefined: Mapped[bool] = mapped_column(Boolean, default=False, nullable=False)
    chroma_degenerate: Mapped[bool] = mapped_column(Boolean, default=False, nullable=False)
    lum_degenerate: Mapped[bool] = mapped_column(Boolean, default=False, nullable=False)

    achromatic: Mapped[int] = mapped_column(Integer, default=0, nullable=False)
    achromatic_excluded: Mapped[bool] = mapped_column(Boolean, default=False, nullable=False)
    pixels: Mapped[int] = mapped_column(Integer, nullable=False)

    run: Mapped["ExperimentRun"] = relationship("ExperimentRun", back_populates="profiles")

    __table_args__ = (
        Index("ix_image_profiles_run_id", "run_id"),
    )

    def __repr__(self) -> str:
        return f"<ProfileRecord(run_id={self.run_id}, image={self.image})>"
