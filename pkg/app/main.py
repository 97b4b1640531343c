import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app.api.routes.config import router as config_router
from app.api.routes.experiments import router as experiments_router
from app.api.routes.metrics import router as metrics_router
from app.api.routes.oracle import router as oracle_router
from app.exceptions import ConfigError, IsacError
from app.utils.logging import MonitoringMiddleware, setup_logging
from config.settings import settings

logger = logging.getLogger(__name__)


# Lifespan events
@asynccontextmanager
async def lifespan(app: FastAPI):
    setup_logging(level=settings.log_level, use_json=settings.log_json, log_file=settings.log_file)
    logger.info(f"🚀 Starting {settings.app_name}")
    yield
    logger.info("👋 Shutting down gracefully")


app = FastAPI(
    title=settings.app_name,
    version=settings.version,
    description="Evaluation service for cell-free massive MIMO ISAC: metrics, small experiments and oracle checks",
    lifespan=lifespan,
)

app.add_middleware(MonitoringMiddleware)
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(config_router)
app.include_router(metrics_router)
app.include_router(experiments_router)
app.include_router(oracle_router)


@app.exception_handler(ConfigError)
async def config_error_handler(request: Request, exc: ConfigError):
    return JSONResponse(status_code=422, content={"detail": str(exc), "field": exc.field})


@app.exception_handler(IsacError)
async def isac_error_handler(request: Request, exc: IsacError):
    logger.error(f"Request failed: {exc}", extra={"url": str(request.url), "error_type": type(exc).__name__})
    return JSONResponse(status_code=500, content={"detail": str(exc), "error_type": type(exc).__name__})


# --- BASIC ROUTES ---
@app.get("/")
async def root():
    return {
        "message": f"Welcome to {settings.app_name}",
        "version": settings.version,
        "status": "running",
        "features": ["Metrics", "Experiments", "Oracle verification"],
    }


@app.get("/health")
async def health_check():
    return {
        "status": "healthy",
        "version": settings.version,
        "threads": settings.threads,
        "limits": {"drops": settings.max_api_drops, "trials": settings.max_api_trials},
    }
