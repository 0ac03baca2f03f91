"""
Сервис хранения прогонов: запись результатов пакетного прогона в базу
и чтение их обратно.
"""

import logging
import math
from datetime import datetime, timezone
from typing import Dict, List, Optional, Sequence

from sqlalchemy import select
from sqlalchemy.ext.asyncio import AsyncSession

from cq.imagestats import PROFILE_COLUMNS
from cq.pipeline import ExperimentOutcome, ExperimentRow, best_space_tally
from .models import ExperimentRun, ExperimentRecord, ProfileRecord

logger = logging.getLogger(__name__)

# ============ КОНСТАНТЫ ============

STATUS_RUNNING = "running"
STATUS_FINISHED = "finished"
STATUS_FAILED = "failed"

# Колонки профиля, которые в таблице называются иначе
PROFILE_RENAMES = {"I": "short_edge", "J": "long_edge"}


def _finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


# ============ ЗАПИСЬ ============

async def create_run(
    session: AsyncSession,
    seed: int,
    spaces: Sequence[str],
    ks: Sequence[int],
    output_dir: Optional[str] = None,
) -> ExperimentRun:
    """Создать прогон в статусе running."""
    run = ExperimentRun(
        seed=str(seed),
        spaces=[str(getattr(s, "value", s)) for s in spaces],
        ks=[int(k) for k in ks],
        output_dir=output_dir,
        status=STATUS_RUNNING,
        failed_images=[],
    )
    session.add(run)
    await session.flush()
    logger.info("Created experiment run %d", run.id)
    return run


def row_to_record(run_id: int, row: ExperimentRow) -> ExperimentRecord:
    return ExperimentRecord(
        run_id=run_id,
        image=row.image,
        short_edge=row.I,
        long_edge=row.J,
        space=row.space,
        k=row.k,
        seed=str(row.seed),
        wcss=row.wcss,
        vif=row.vif,
        psnr=_finite_or_none(row.psnr),
        logit_vif=row.logit_vif,
        response=row.y_xyz_or_luv,
        clamped=row.clamped,
        ms=row.ms,
    )


def record_to_row(record: ExperimentRecord) -> ExperimentRow:
    """Обратно в ExperimentRow; NULL psnr - это +inf."""
    return ExperimentRow(
        image=record.image,
        I=record.short_edge,
        J=record.long_edge,
        space=record.space,
        k=record.k,
        seed=int(record.seed),
        wcss=record.wcss,
        vif=record.vif,
        psnr=math.inf if record.psnr is None else record.psnr,
        logit_vif=record.logit_vif,
        y_xyz_or_luv=record.response,
        clamped=record.clamped,
        ms=record.ms,
    )


async def store_outcome(session: AsyncSession, run: ExperimentRun, outcome: ExperimentOutcome) -> ExperimentRun:
    """Записать строки и профили, выставить итоговый статус."""
    session.add_all(row_to_record(run.id, row) for row in outcome.rows)

    for name, profile in outcome.profiles.items():
        values = profile.to_record()
        values["hue_sd"] = _finite_or_none(values["hue_sd"])
        fields = {PROFILE_RENAMES.get(key, key): values[key] for key in PROFILE_COLUMNS}
        session.add(ProfileRecord(run_id=run.id, image=name, **fields))

    run.image_count = len(outcome.profiles)
    run.failed_images = list(outcome.failed)
    run.status = STATUS_FAILED if outcome.failed and not outcome.profiles else STATUS_FINISHED
    run.finished_at = datetime.now(timezone.utc)
    await session.flush()

    logger.info(
        "Run %d stored: %d rows, %d profiles, %d failed images",
        run.id, len(outcome.rows), len(outcome.profiles), len(outcome.failed),
    )
    return run


async def mark_failed(session: AsyncSession, run_id: int, error: str) -> None:
    run = await session.get(ExperimentRun, run_id)
    if run:
        run.status = STATUS_FAILED
        run.error = error
        run.finished_at = datetime.now(timezone.utc)
        await session.flush()


# ============ ЧТЕНИЕ ============

async def list_runs(session: AsyncSession, limit: int = 50, offset: int = 0) -> List[ExperimentRun]:
    result = await session.execute(
        select(ExperimentRun)
        .order_by(ExperimentRun.created_at.desc(), ExperimentRun.id.desc())
        .limit(limit)
        .offset(offset)
    )
    return list(result.scalars().all())


async def get_run(session: AsyncSession, run_id: int) -> Optional[ExperimentRun]:
    return await session.get(ExperimentRun, run_id)


async def get_rows(session: AsyncSession, run_id: int) -> List[ExperimentRow]:
    result = await session.execute(
        select(ExperimentRecord)
        .where(ExperimentRecord.run_id == run_id)
        .order_by(ExperimentRecord.id)
    )
    return [record_to_row(r) for r in result.scalars().all()]


async def get_profiles(session: AsyncSession, run_id: int) -> List[ProfileRecord]:
    result = await session.execute(
        select(ProfileRecord)
        .where(ProfileRecord.run_id == run_id)
        .order_by(ProfileRecord.id)
    )
    return list(result.scalars().all())


async def get_tally(session: AsyncSession, run: ExperimentRun) -> Dict[str, Dict[int, int]]:
    rows = await get_rows(session, run.id)
    return best_space_tally(rows, run.spaces, run.ks)
