from fastapi import APIRouter, HTTPException

from lamdiff.checking import JacobianReport
from lamdiff.errors import InvariantViolation, LamDiffError

from api.models import EvalRequest, EvalResponse, JacobianRequest, SourceRequest, TransformResponse, TypeResponse
from api.pipeline import evaluate, jacobian, program_type, transform

router = APIRouter()


def _unprocessable(exc: LamDiffError) -> HTTPException:
    return HTTPException(status_code=422, detail=str(exc))


@router.post("/check", response_model=TypeResponse)
def check(body: SourceRequest):
    """Type of the selected program, as `(fun T U)`."""
    try:
        return TypeResponse(type=program_type(body.source, body.index))
    except LamDiffError as exc:
        raise _unprocessable(exc)


@router.post("/forward", response_model=TransformResponse)
def forward(body: SourceRequest):
    return _transform(body, "forward")


@router.post("/reverse", response_model=TransformResponse)
def reverse(body: SourceRequest):
    return _transform(body, "reverse")


def _transform(body: SourceRequest, mode: str) -> TransformResponse:
    try:
        return transform(body.source, mode, body.index)
    except InvariantViolation as exc:
        raise HTTPException(status_code=500, detail=str(exc))
    except LamDiffError as exc:
        raise _unprocessable(exc)


@router.post("/eval", response_model=EvalResponse)
def eval_program(body: EvalRequest):
    """Value at `point`; programs returning linear functions need a `direction`."""
    try:
        return EvalResponse(value=evaluate(body.source, body.point, body.direction, body.index))
    except LamDiffError as exc:
        raise _unprocessable(exc)


@router.post("/jacobian", response_model=JacobianReport)
def jacobian_at(body: JacobianRequest):
    try:
        return jacobian(body.source, body.point, body.h, body.index)
    except InvariantViolation as exc:
        raise HTTPException(status_code=500, detail=str(exc))
    except LamDiffError as exc:
        raise _unprocessable(exc)
