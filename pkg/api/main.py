from contextlib import asynccontextmanager
import os
from fastapi import FastAPI

from api.pipeline import load_registry
from api.routers.ops import router as ops_router
from api.routers.programs import router as programs_router

rootpath = os.environ.get("ROOTPATH") or ""


@asynccontextmanager
async def lifespan(app: FastAPI):
    load_registry()
    yield


app = FastAPI(
    title="lamdiff API",
    description="Forward- and reverse-mode AD for a typed lambda calculus over real arrays",
    version="0.1.0",
    lifespan=lifespan,
    root_path=rootpath
)

app.include_router(programs_router, prefix="/api/v1/programs", tags=["programs"])
app.include_router(ops_router, prefix="/api/v1/ops", tags=["ops"])


@app.get("/")
async def root():
    return {"name": "lamdiff", "docs": f"{rootpath}/docs"}
