from pydantic import BaseModel, Field


class SourceRequest(BaseModel):
    source: str = Field(..., description="Program file text, one or more (program ...) forms")
    index: int = Field(-1, description="Which program to use (default: the last one)")


class EvalRequest(SourceRequest):
    point: list[float]
    direction: list[float] | None = None


class JacobianRequest(SourceRequest):
    point: list[float]
    h: float = Field(1e-4, gt=0, description="Central-difference step")


class TypeResponse(BaseModel):
    type: str


class TransformResponse(BaseModel):
    mode: str
    primal: str
    derivative: str
    primal_type: str
    derivative_type: str


class EvalResponse(BaseModel):
    value: list[float]


class OpInfo(BaseModel):
    name: str
    arity: int
    higher_order: bool = False
    linear: bool = False
    description: str | None = None
