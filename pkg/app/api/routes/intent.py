"""Intent extraction, checking and scoring endpoints."""

import time
from functools import lru_cache

from fastapi import APIRouter, HTTPException

from app.api.schemas import (
    CheckRequest,
    CheckResponse,
    ErrorResponse,
    PredictRequest,
    PredictResponse,
    ScoreRequest,
    ScoreResponse,
)
from app.config import get_settings
from app.core.constraint_checker import check_against_selections, check_consistency
from app.core.extractor import ExtractionModel
from app.core.game_engine import drafted_state
from app.core.intent import score_prediction
from app.utils.logger import get_logger

logger = get_logger(__name__)
router = APIRouter(prefix="/intent", tags=["Intent"])


@lru_cache
def load_model() -> ExtractionModel | None:
    """The model at ``MODEL_PATH``, or None when unset or missing."""
    path = get_settings().model_path
    if path is None or not path.exists():
        logger.warning(f"No extraction model at {path}; /intent/predict is unavailable")
        return None
    return ExtractionModel.load(path)


@router.post(
    "/predict",
    response_model=PredictResponse,
    responses={
        400: {"model": ErrorResponse, "description": "Invalid selections or map id"},
        503: {"model": ErrorResponse, "description": "No trained model configured"},
    },
    summary="Translate a strategy",
    description="Predict goals and constraints from strategy text and troop selections.",
)
async def predict(request: PredictRequest) -> PredictResponse:
    model = load_model()
    if model is None:
        raise HTTPException(status_code=503, detail="No trained model is configured")

    logger.info(f"Prediction requested: {request.text[:80]}... (map={request.map_id})")
    start_time = time.time()
    intent = model.predict(request.text, request.selections, request.map_id)
    return PredictResponse(
        intent=intent,
        processing_time_ms=(time.time() - start_time) * 1000,
    )


@router.post(
    "/check",
    response_model=CheckResponse,
    responses={400: {"model": ErrorResponse, "description": "Invalid selections or map id"}},
    summary="Check an intent",
    description="Report internal conflicts and, given a draft, constraints it violates.",
)
async def check(request: CheckRequest) -> CheckResponse:
    consistency = check_consistency(request.intent)
    selections = None
    if request.selections is not None:
        if request.map_id is None:
            raise HTTPException(status_code=400, detail="map_id is required with selections")
        state = drafted_state(request.map_id, request.selections)
        selections = check_against_selections(request.intent, state)
    return CheckResponse(
        consistency=consistency,
        selections=selections,
        clean=consistency.is_clean and (selections is None or selections.is_clean),
    )


@router.post(
    "/score",
    response_model=ScoreResponse,
    summary="Score a prediction",
    description="Correct goals (of 6) and matched constraint slots (of 8).",
)
async def score(request: ScoreRequest) -> ScoreResponse:
    result = score_prediction(request.predicted, request.gold)
    return ScoreResponse(**result.model_dump())
