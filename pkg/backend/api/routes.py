"""
API routes: оценка, профиль изображения и пакетные прогоны.
"""

import logging
import math
from pathlib import Path as FilePath
from typing import Any, Dict

from fastapi import APIRouter, BackgroundTasks, Depends, HTTPException, Path, Query
from fastapi.concurrency import run_in_threadpool
from sqlalchemy.ext.asyncio import AsyncSession

from config import settings
from cq.image import decode
from cq.imagestats import characterize_image
from cq.metrics import mse, psnr_from_mse, vif
from cq.pipeline import ExperimentRow, image_id, run_experiment
from database.db import get_session, get_session_context
from database.models import ExperimentRun, ProfileRecord
from database.repository import (
    create_run, get_profiles, get_rows, get_run, get_tally, list_runs, mark_failed, store_outcome,
)
from .models import (
    CharacterizeRequest, EvaluateRequest, EvaluateResponse, ErrorResponse,
    ProfileResponse, ProfilesResponse, RowItem, RowsResponse,
    RunCreatedResponse, RunListResponse, RunRequest, RunSummary, TallyResponse,
)

logger = logging.getLogger(__name__)

router = APIRouter(tags=["Quantization API"])


# ============ HELPER FUNCTIONS ============

def _finite_or_none(value: float):
    return value if math.isfinite(value) else None


def _row_item(row: ExperimentRow) -> RowItem:
    data = row.model_dump()
    data["psnr"] = _finite_or_none(row.psnr)
    return RowItem(**data)


def _profile_response(image: str, record: Dict[str, Any]) -> ProfileResponse:
    data = dict(record)
    data["hue_sd"] = _finite_or_none(data["hue_sd"])
    return ProfileResponse(image=image, **data)


def _profile_from_db(record: ProfileRecord) -> ProfileResponse:
    return ProfileResponse(
        image=record.image,
        I=record.short_edge,
        J=record.long_edge,
        **{
            name: getattr(record, name)
            for name in ProfileResponse.model_fields
            if name not in ("image", "I", "J")
        },
    )


async def _load_run(session: AsyncSession, run_id: int) -> ExperimentRun:
    run = await get_run(session, run_id)
    if not run:
        raise HTTPException(status_code=404, detail=f"Run {run_id} not found")
    return run


async def _execute_run(run_id: int, request: RunRequest, seed: int) -> None:
    """Фоновая задача: прогон в пуле потоков и запись результата."""
    try:
        outcome = await run_in_threadpool(
            run_experiment,
            request.images,
            request.spaces,
            request.ks,
            seed,
            out_dir=request.output_dir,
            restarts=settings.restarts,
            max_iterations=settings.max_iterations,
            scaling=settings.scaling,
            vif_mode=settings.vif_mode,
            exclude_achromatic=settings.exclude_achromatic,
            subsample_threshold=settings.stats_subsample_threshold if settings.stats_subsample else None,
            subsample_size=settings.stats_subsample_size,
            threads=settings.threads,
            record_runtime=settings.record_runtime,
        )
        async with get_session_context() as session:
            run = await _load_run(session, run_id)
            await store_outcome(session, run, outcome)
    except Exception as e:
        logger.error("Run %d failed: %s", run_id, e, exc_info=True)
        async with get_session_context() as session:
            await mark_failed(session, run_id, str(e))


# ============ ENDPOINTS ============

@router.post(
    "/evaluate",
    response_model=EvaluateResponse,
    responses={422: {"model": ErrorResponse}},
    summary="VIF / PSNR / MSE для пары изображений"
)
async def evaluate(request: EvaluateRequest) -> EvaluateResponse:
    def compute() -> EvaluateResponse:
        reference = decode(request.reference)
        distorted = decode(request.distorted)
        error = mse(reference, distorted)
        return EvaluateResponse(
            vif=vif(reference, distorted, request.vif_mode),
            psnr=_finite_or_none(psnr_from_mse(error)),
            mse=error,
        )

    return await run_in_threadpool(compute)


@router.post(
    "/characterize",
    response_model=ProfileResponse,
    responses={422: {"model": ErrorResponse}},
    summary="Профиль тона, насыщенности и светлоты"
)
async def characterize(request: CharacterizeRequest) -> ProfileResponse:
    def compute() -> ProfileResponse:
        profile = characterize_image(
            decode(request.path),
            exclude_achromatic=request.exclude_achromatic,
            subsample_threshold=settings.stats_subsample_threshold if settings.stats_subsample else None,
            subsample_size=settings.stats_subsample_size,
            seed=settings.default_seed,
        )
        return _profile_response(image_id(request.path), profile.to_record())

    return await run_in_threadpool(compute)


@router.post(
    "/runs",
    response_model=RunCreatedResponse,
    status_code=202,
    summary="Запустить пакетный прогон"
)
async def start_run(
    request: RunRequest,
    background_tasks: BackgroundTasks,
    session: AsyncSession = Depends(get_session),
) -> RunCreatedResponse:
    """
    Создаёт прогон и считает его в фоне. Пути к изображениям и
    output_dir - пути на сервере.
    """
    missing = [p for p in request.images if not FilePath(p).is_file()]
    if missing:
        raise HTTPException(status_code=422, detail=f"Images not found: {', '.join(missing)}")

    seed = request.seed if request.seed is not None else settings.default_seed
    run = await create_run(session, seed, request.spaces, request.ks, request.output_dir)
    # фоновая задача открывает свою сессию: прогон должен быть уже записан
    await session.commit()

    background_tasks.add_task(_execute_run, run.id, request, seed)
    return RunCreatedResponse(run_id=run.id, status=run.status)


@router.get("/runs", response_model=RunListResponse, summary="Список прогонов")
async def get_runs(
    limit: int = Query(50, ge=1, le=500, description="Лимит"),
    offset: int = Query(0, ge=0, description="Смещение"),
    session: AsyncSession = Depends(get_session),
) -> RunListResponse:
    runs = await list_runs(session, limit=limit, offset=offset)
    return RunListResponse(
        runs=[RunSummary.model_validate(r, from_attributes=True) for r in runs],
        total=len(runs),
    )


@router.get(
    "/runs/{run_id}",
    response_model=RunSummary,
    responses={404: {"model": ErrorResponse}},
    summary="Прогон по ID"
)
async def get_run_summary(
    run_id: int = Path(..., description="ID прогона"),
    session: AsyncSession = Depends(get_session),
) -> RunSummary:
    run = await _load_run(session, run_id)
    return RunSummary.model_validate(run, from_attributes=True)


@router.get("/runs/{run_id}/rows", response_model=RowsResponse, responses={404: {"model": ErrorResponse}})
async def get_run_rows(
    run_id: int = Path(..., description="ID прогона"),
    session: AsyncSession = Depends(get_session),
) -> RowsResponse:
    await _load_run(session, run_id)
    rows = await get_rows(session, run_id)
    return RowsResponse(run_id=run_id, rows=[_row_item(r) for r in rows])


@router.get("/runs/{run_id}/profiles", response_model=ProfilesResponse, responses={404: {"model": ErrorResponse}})
async def get_run_profiles(
    run_id: int = Path(..., description="ID прогона"),
    session: AsyncSession = Depends(get_session),
) -> ProfilesResponse:
    await _load_run(session, run_id)
    records = await get_profiles(session, run_id)
    return ProfilesResponse(run_id=run_id, profiles=[_profile_from_db(r) for r in records])


@router.get("/runs/{run_id}/tally", response_model=TallyResponse, responses={404: {"model": ErrorResponse}})
async def get_run_tally(
    run_id: int = Path(..., description="ID прогона"),
    session: AsyncSession = Depends(get_session),
) -> TallyResponse:
    run = await _load_run(session, run_id)
    return TallyResponse(run_id=run_id, tally=await get_tally(session, run))
