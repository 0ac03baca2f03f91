"""
FastAPI приложение: оценка квантования и хранимые пакетные прогоны.
"""

import logging
from contextlib import asynccontextmanager
from typing import AsyncGenerator

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from config import settings
from cq import __version__
from cq.errors import QuantizationError
from database.db import init_db, close_db
from .routes import router

# Настройка логирования
logging.basicConfig(
    level=getattr(logging, settings.log_level.upper(), logging.INFO),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI) -> AsyncGenerator[None, None]:
    """Lifecycle events для FastAPI."""
    # Startup
    logger.info("Starting cq API...")
    await init_db()

    yield

    # Shutdown
    logger.info("Shutting down cq API...")
    await close_db()


# Создание приложения
app = FastAPI(
    title="cq API",
    description="k-means квантование цвета в RGB, XYZ и LUV: VIF, PSNR и профили изображений.",
    version=__version__,
    lifespan=lifespan,
    docs_url="/docs",
    redoc_url="/redoc",
    debug=settings.debug,
)


app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.exception_handler(QuantizationError)
async def quantization_exception_handler(request: Request, exc: QuantizationError):
    """Ошибки входных данных квантования / оценки."""
    logger.warning("%s %s rejected: %s", request.method, request.url.path, exc.detail)
    return JSONResponse(
        status_code=422,
        content={
            "detail": exc.detail,
            "error_code": exc.error_code
        }
    )


# Global error handler
@app.exception_handler(Exception)
async def global_exception_handler(request: Request, exc: Exception):
    """Обработка непредвиденных ошибок."""
    logger.error("Unhandled error: %s", str(exc), exc_info=True)
    return JSONResponse(
        status_code=500,
        content={
            "detail": "Internal server error",
            "error_code": "INTERNAL_ERROR"
        }
    )


# Подключение API роутеров
app.include_router(router, prefix="/api")


# ============ SYSTEM ENDPOINTS ============

@app.get("/health", tags=["System"])
async def health_check():
    """Health check endpoint."""
    return {
        "status": "healthy",
        "service": "cq-api",
        "version": __version__,
    }
