"""Game state endpoints: encoders, legal actions and fixed initializations."""

from fastapi import APIRouter, HTTPException

from app.api.schemas import (
    EncodeRequest,
    EncodeResponse,
    ErrorResponse,
    LegalActionsRequest,
    LegalActionsResponse,
)
from app.core.encoders import encode
from app.core.game_engine import (
    GameState,
    get_initializations,
    is_terminal,
    legal_actions,
    load_initialization,
)
from app.utils.logger import get_logger

logger = get_logger(__name__)
router = APIRouter(prefix="/game", tags=["Game"])


@router.post("/encode", response_model=EncodeResponse, summary="Encode a state")
async def encode_state(request: EncodeRequest) -> EncodeResponse:
    encoded = encode(request.state, request.encoder)
    return EncodeResponse(
        encoder=encoded.encoder_id, length=len(encoded.values), values=encoded.values
    )


@router.post("/legal-actions", response_model=LegalActionsResponse, summary="List legal actions")
async def list_legal_actions(request: LegalActionsRequest) -> LegalActionsResponse:
    return LegalActionsResponse(
        outcome=is_terminal(request.state),
        actions=legal_actions(request.state),
    )


@router.get(
    "/initializations/{map_id}",
    response_model=GameState,
    responses={404: {"model": ErrorResponse, "description": "Unknown initialization"}},
    summary="Pre-draft state of a fixed map",
)
async def get_initialization(map_id: int) -> GameState:
    inits = get_initializations()
    if map_id not in inits:
        raise HTTPException(status_code=404, detail=f"Unknown map initialization id: {map_id}")
    return load_initialization(inits[map_id])
