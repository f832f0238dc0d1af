"""Pydantic schemas for API request/response models."""

from datetime import datetime

from pydantic import BaseModel, Field

from app.core.constraint_checker import ConflictReport
from app.core.encoders import EncoderId
from app.core.game_engine import Action, GameState, Outcome
from app.core.intent import IntentSpec

# ============== Health Schemas ==============


class HealthResponse(BaseModel):
    """Health check response."""

    status: str = Field(..., description="Service status")
    timestamp: datetime = Field(
        default_factory=datetime.utcnow,
        description="Response timestamp",
    )
    version: str = Field(..., description="Application version")


class ReadinessResponse(BaseModel):
    """Readiness check response."""

    status: str = Field(..., description="Service status")
    map_loaded: bool = Field(..., description="Canonical map and initializations load")
    n_initializations: int = Field(..., description="Number of fixed map initializations")
    model_loaded: bool = Field(..., description="Extraction model available for /intent/predict")


# ============== Intent Schemas ==============


class PredictRequest(BaseModel):
    """Strategy text and troop selections to translate."""

    text: str = Field(..., description="Strategy description", min_length=1, max_length=10000)
    selections: dict[str, int] = Field(..., description="Territory -> troops drafted")
    map_id: int | None = Field(default=None, ge=1, description="Map initialization id")

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "text": "I want to take over Purple and keep a large army on Purple_E.",
                    "selections": {"Purple_E": 7, "Purple_C": 5, "Purple_D": 2},
                    "map_id": 1,
                }
            ]
        }
    }


class PredictResponse(BaseModel):
    intent: IntentSpec = Field(..., description="Predicted goals and constraints")
    processing_time_ms: float = Field(..., description="Prediction time in milliseconds")


class CheckRequest(BaseModel):
    """An intent to check, optionally against a draft on a fixed map."""

    intent: IntentSpec
    map_id: int | None = Field(default=None, ge=1)
    selections: dict[str, int] | None = None


class CheckResponse(BaseModel):
    consistency: ConflictReport = Field(..., description="Internal consistency conflicts")
    selections: ConflictReport | None = Field(
        None, description="Constraints the drafted position violates (when selections given)"
    )
    clean: bool = Field(..., description="True when both reports are empty")


class ScoreRequest(BaseModel):
    predicted: IntentSpec
    gold: IntentSpec


class ScoreResponse(BaseModel):
    goals_correct: int = Field(..., description="Correct goal buckets out of 6")
    constraints_correct: int = Field(..., description="Matched constraint slots out of 8")


# ============== Game Schemas ==============


class EncodeRequest(BaseModel):
    state: GameState
    encoder: EncoderId = Field(..., description="One of f54, f54n, f132, f132n, f134n, f298n")


class EncodeResponse(BaseModel):
    encoder: EncoderId
    length: int
    values: list[float]


class LegalActionsRequest(BaseModel):
    state: GameState


class LegalActionsResponse(BaseModel):
    outcome: Outcome = Field(..., description="Terminal status of the state")
    actions: list[Action] = Field(..., description="Legal actions in enumeration order")


# ============== Error Schemas ==============


class ErrorResponse(BaseModel):
    """Error response."""

    error: str = Field(..., description="Error type")
    message: str = Field(..., description="Error message")
    detail: str | None = Field(None, description="Detailed error information")
