from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel
import uvicorn
import json
import logging
from typing import Optional
from dotenv import load_dotenv

from app import __version__
from app.cli import Toolkit
from app.data.io import parse_edge_list, serialize_edge_list
from app.services.bounds_service import BoundParams
from app.utils.config import Settings, configure_logging
from app.utils.errors import ArgumentError, GraphToolkitError, PreconditionError

# Load environment variables
load_dotenv()
settings = Settings.from_env()

# Configure logging
configure_logging(settings.log_level)
logger = logging.getLogger(__name__)

# Initialize FastAPI app
app = FastAPI(title="Extremal Matching Graphs", version=__version__)

# Initialize services
toolkit = Toolkit(settings)


class GraphPayload(BaseModel):
    """Graph in the edge-list text format."""

    graph: str
    d: Optional[int] = None
    m: Optional[int] = None


def _http_error(e: GraphToolkitError) -> HTTPException:
    if isinstance(e, ArgumentError):
        status = 400
    elif isinstance(e, PreconditionError):
        status = 422
    else:
        status = 500
    detail = {"error": str(e)}
    if e.details is not None and hasattr(e.details, "to_dict"):
        detail["membership"] = e.details.to_dict()
    return HTTPException(status_code=status, detail=detail)


@app.get("/api/health")
async def health_check():
    """
    Health check endpoint.
    """
    return {"status": "healthy", "version": __version__}


@app.get("/api/bound/{d}/{m}")
async def bound(d: int, m: int):
    """
    Closed-form e(d, m) with its optimal profile.

    Args:
        d (int): Degree cap
        m (int): Matching cap

    Returns:
        JSONResponse: Value, profile, trivial bound and uniqueness flag
    """
    try:
        params = BoundParams(d, m)
        payload = toolkit.bounds.e_bound(params).to_dict()
        payload["unique"] = toolkit.bounds.is_extremal_unique(params)
        return JSONResponse(content=payload)
    except GraphToolkitError as e:
        logger.error(f"Error computing bound for d={d}, m={m}: {str(e)}")
        raise _http_error(e)


@app.get("/api/construct/{d}/{m}")
async def construct(d: int, m: int):
    try:
        graph = toolkit.bounds.construct_extremal(BoundParams(d, m))
        return PlainTextResponse(serialize_edge_list(graph))
    except GraphToolkitError as e:
        logger.error(f"Error constructing extremal graph for d={d}, m={m}: {str(e)}")
        raise _http_error(e)


@app.get("/api/verify/{d}/{m}")
async def verify(d: int, m: int, n_max: Optional[int] = None):
    """
    Verify e(d, m) by exhaustive search or sampling.

    Returns:
        JSONResponse: The verification report
    """
    try:
        report = toolkit.verifier.verify_bound(d, m, n_max=n_max)
        payload = report.to_dict()
        payload["ok"] = report.ok
        payload["violation"] = report.violation
        return JSONResponse(content=payload)
    except GraphToolkitError as e:
        logger.error(f"Error verifying d={d}, m={m}: {str(e)}")
        raise _http_error(e)


@app.get("/api/table")
async def table(d_max: int = 8, m_max: int = 8):
    try:
        df = toolkit.bounds.bound_table(range(2, d_max + 1), range(2, m_max + 1))
        return JSONResponse(content=json.loads(df.to_json(orient="records")))
    except GraphToolkitError as e:
        logger.error(f"Error building bound table: {str(e)}")
        raise _http_error(e)


@app.post("/api/analyze")
async def analyze(payload: GraphPayload):
    """
    Matching and star structure of a posted graph.

    Returns:
        JSONResponse: ν, one maximum matching, Star(G, M) and factor-critical flags
    """
    try:
        graph = parse_edge_list(payload.graph)
        matching = toolkit.matching.maximum_matching(graph)
        stars = toolkit.star.star_set(graph, matching)
        components = []
        for members in graph.components():
            sub, _ = graph.induced_subgraph(members)
            components.append(
                {"vertices": sorted(members), "factor_critical": toolkit.star.is_factor_critical(sub)}
            )
        result = {
            "n": graph.n,
            "edge_count": graph.edge_count,
            "delta": graph.max_degree(),
            "nu": len(matching),
            "matching": [e.as_list() for e in matching.sorted_edges()],
            "star": sorted(stars.vertices),
            "components": components,
        }
        if payload.d is not None and payload.m is not None:
            result["membership"] = toolkit.verifier.is_member_F(graph, payload.d, payload.m).to_dict()
        return JSONResponse(content=result)
    except GraphToolkitError as e:
        logger.error(f"Error analyzing graph: {str(e)}")
        raise _http_error(e)


@app.post("/api/transform")
async def transform(payload: GraphPayload):
    try:
        if payload.d is None or payload.m is None:
            raise ArgumentError("transform needs d and m")
        graph = parse_edge_list(payload.graph)
        result = toolkit.transform.transform(graph, payload.d, payload.m)
        return JSONResponse(
            content={
                "final": serialize_edge_list(result.final),
                "steps": [step.to_dict() for step in result.steps],
                "decomposition": result.decomposition.to_dict(),
            }
        )
    except GraphToolkitError as e:
        logger.error(f"Error transforming graph: {str(e)}")
        raise _http_error(e)


if __name__ == "__main__":
    logger.debug("Starting the application")
    uvicorn.run(
        "app.main:app",
        host=settings.host,
        port=settings.port,
        reload=settings.debug,
        log_level="debug" if settings.debug else "info",
    )
