"""
Подключение к базе данных результатов.
Использует SQLite по умолчанию (легко переключить на PostgreSQL через DATABASE_URL).
"""

import logging
import urllib.parse
from pathlib import Path
from contextlib import asynccontextmanager
from typing import AsyncGenerator, Dict, Optional, Tuple

from sqlalchemy.ext.asyncio import (
    AsyncSession,
    AsyncEngine,
    create_async_engine,
    async_sessionmaker
)
from sqlalchemy.orm import DeclarativeBase

from config import settings

logger = logging.getLogger(__name__)

# asyncpg не понимает эти параметры в query string
UNSUPPORTED_PARAMS = {'sslmode', 'channel_binding', 'options'}


def default_database_url() -> str:
    """SQLite файл в backend/data (или /tmp на read-only файловых системах)."""
    try:
        db_path = Path(__file__).parent.parent / "data" / "cq.db"
        db_path.parent.mkdir(parents=True, exist_ok=True)
    except OSError:
        db_path = Path("/tmp/cq.db")
    return f"sqlite+aiosqlite:///{db_path}"


def resolve_database_url(url: Optional[str] = None) -> Tuple[str, Dict[str, object]]:
    """
    URL для SQLAlchemy и connect_args.

    postgres:// превращается в postgresql+asyncpg://, sslmode переносится
    в connect_args.
    """
    url = url or settings.database_url or default_database_url()
    connect_args: Dict[str, object] = {}

    if url.startswith("postgres://"):
        url = url.replace("postgres://", "postgresql+asyncpg://", 1)

    try:
        url_parts = urllib.parse.urlparse(url)
        qs = urllib.parse.parse_qs(url_parts.query)
        if 'sslmode' in qs:
            sslmode_val = qs['sslmode'][0]
            if sslmode_val == 'require':
                connect_args['ssl'] = 'require'
            elif sslmode_val == 'disable':
                connect_args['ssl'] = False
        if any(param in qs for param in UNSUPPORTED_PARAMS):
            for param in UNSUPPORTED_PARAMS:
                qs.pop(param, None)
            new_query = urllib.parse.urlencode(qs, doseq=True)
            url = urllib.parse.urlunparse(url_parts._replace(query=new_query))
    except ValueError as e:
        logger.error("Failed to parse or fix DATABASE_URL: %s", e)

    return url, connect_args


# Engine и Session
engine: AsyncEngine | None = None
async_session_factory: async_sessionmaker[AsyncSession] | None = None


class Base(DeclarativeBase):
    """Базовый класс для моделей."""
    pass


async def init_db(url: Optional[str] = None) -> None:
    """Инициализация базы данных и создание таблиц."""
    global engine, async_session_factory

    database_url, connect_args = resolve_database_url(url)
    engine = create_async_engine(
        database_url,
        echo=False,
        connect_args=connect_args,
    )

    async_session_factory = async_sessionmaker(
        engine,
        class_=AsyncSession,
        expire_on_commit=False,
    )

    # Создаём таблицы
    async with engine.begin() as conn:
        from .models import ExperimentRun, ExperimentRecord, ProfileRecord  # noqa: F401
        await conn.run_sync(Base.metadata.create_all)

    logger.info("Database initialized.")


async def close_db() -> None:
    """Закрытие соединения с базой данных."""
    global engine, async_session_factory
    if engine:
        await engine.dispose()
        engine = None
        async_session_factory = None
        logger.info("Database connection closed")


async def get_session() -> AsyncGenerator[AsyncSession, None]:
    """Dependency для FastAPI - получение сессии."""
    if not async_session_factory:
        raise RuntimeError("Database not initialized")

    async with async_session_factory() as session:
        try:
            yield session
            await session.commit()
        except Exception:
            await session.rollback()
            raise


@asynccontextmanager
async def get_session_context() -> AsyncGenerator[AsyncSession, None]:
    """Контекстный менеджер для получения сессии (CLI / фоновые задачи)."""
    if not async_session_factory:
        raise RuntimeError("Database not initialized")

    async with async_session_factory() as session:
        try:
            yield session
            await session.commit()
        except Exception:
            await session.rollback()
            raise
