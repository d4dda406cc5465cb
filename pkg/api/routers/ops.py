from fastapi import APIRouter, Query

from api.models import OpInfo
from api.pipeline import list_ops

router = APIRouter()


@router.get("", response_model=list[OpInfo])
def ops(
    linear: bool | None = Query(None, description="Only linear (true) or only smooth (false) operations"),
):
    """Registered primitive operations."""
    result = list_ops()
    if linear is not None:
        result = [op for op in result if op.linear == linear]
    return result
