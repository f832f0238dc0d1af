"""FastAPI application entry point."""

# Load .env before settings are read
# ruff: noqa: E402, I001
from dotenv import load_dotenv

load_dotenv()

from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException

from app import __version__
from app.api.routes import game, health, intent
from app.config import get_settings
from app.core.exceptions import IntentTranslatorError
from app.utils.logger import get_logger, setup_logging

settings = get_settings()


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan manager."""
    # Startup
    setup_logging(settings.log_level)
    logger = get_logger(__name__)
    logger.info(f"Starting {settings.app_name} v{__version__}")
    logger.info(f"Log level: {settings.log_level}")
    if intent.load_model() is None:
        logger.warning("Starting without an extraction model")

    yield

    # Shutdown
    logger.info("Shutting down application")


# Create FastAPI application
app = FastAPI(
    title=settings.app_name,
    description="""
## Strategic Intent Translator API

Translates Risk drafting strategies written in natural language into
machine-checkable goals and constraints.

### Features
- Predict goals and constraints from strategy text and troop selections
- Check an intent for internal conflicts and against a drafted position
- Score predictions (correct goals out of 6, constraints out of 8)
- Encode game states and list legal actions
    """,
    version=__version__,
    docs_url="/docs",
    redoc_url="/redoc",
    openapi_url="/openapi.json",
    lifespan=lifespan,
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
app.include_router(health.router)
app.include_router(intent.router)
app.include_router(game.router)


@app.get("/", tags=["Root"])
async def root():
    return {"name": settings.app_name, "version": __version__, "docs": "/docs"}


@app.exception_handler(HTTPException)
async def http_exception_handler(request: Request, exc: HTTPException):
    return JSONResponse(
        status_code=exc.status_code,
        content={"error": "HTTP Error", "message": str(exc.detail)},
    )


@app.exception_handler(IntentTranslatorError)
async def domain_exception_handler(request: Request, exc: IntentTranslatorError):
    """Domain errors are client errors."""
    logger = get_logger(__name__)
    logger.warning(f"{type(exc).__name__}: {exc}")
    return JSONResponse(
        status_code=400,
        content={"error": type(exc).__name__, "message": str(exc)},
    )


@app.exception_handler(Exception)
async def global_exception_handler(request: Request, exc: Exception):
    """Global exception handler."""
    logger = get_logger(__name__)
    logger.error(f"Unhandled exception: {exc}", exc_info=True)

    return JSONResponse(
        status_code=500,
        content={
            "error": "Internal Server Error",
            "message": str(exc),
        },
    )


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "app.main:app",
        host=settings.api_host,
        port=settings.api_port,
        reload=True,
    )
