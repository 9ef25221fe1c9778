"""Local HTTP service exposing the pipeline for interactive sessions.

One mutable session per bundle: mutating requests against the same bundle
are serialized by a non-blocking per-bundle lock (409 on contention); reads
are concurrent. Localhost-only by design; there is no auth.
"""
from __future__ import annotations

import shutil
import threading
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Query
from fastapi.responses import FileResponse, JSONResponse, PlainTextResponse

from .bundle import (
    GRAPH_FILE,
    BundleInvalid,
    ScenarioBundle,
    read_json,
)
from .llm_gateway import (
    FixtureMiss,
    LLMGateway,
    RetriesExhausted,
    TransportError,
)
from .path_gen import InputError
from .pipeline import (
    stage_behaviors,
    stage_edit_paths,
    stage_paths,
    stage_propose,
    stage_run,
)
from .scenario_proposal import ScenarioMetadata
from .scene_graph import ParseError, ValidationError, graph_from_doc
from .sim.engine import SimConfig


class SessionGuard:
    """Per-bundle write lock plus the accepted-paths flag."""

    def __init__(self):
        self._locks: dict[str, threading.Lock] = {}
        self._accepted: set[str] = set()
        self._registry = threading.Lock()

    def lock(self, name: str) -> threading.Lock:
        with self._registry:
            return self._locks.setdefault(name, threading.Lock())

    def accept(self, name: str) -> None:
        self._accepted.add(name)

    def is_accepted(self, name: str) -> bool:
        return name in self._accepted

    def reopen(self, name: str) -> None:
        self._accepted.discard(name)


def create_app(bundle_root: Path, gateway: LLMGateway, maps_dir: Path,
               max_attempts: int = 3, model_id: str = "",
               ui_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="socnavgen", version="0.1.0")
    bundle_root = Path(bundle_root)
    bundle_root.mkdir(parents=True, exist_ok=True)
    guard = SessionGuard()
    app.state.guard = guard

    def get_bundle(name: str, must_exist: bool = True) -> ScenarioBundle:
        if not name or "/" in name or name.startswith("."):
            raise HTTPException(400, detail={"error": "InputError",
                                             "violations": ["bad bundle name"]})
        bundle = ScenarioBundle(bundle_root / name)
        if must_exist and not bundle.root.is_dir():
            raise HTTPException(404, detail={"error": "UnknownBundle",
                                             "violations": [name]})
        return bundle

    def mutation(name: str):
        lock = guard.lock(name)
        if not lock.acquire(blocking=False):
            raise HTTPException(409, detail={"error": "ConcurrentEdit",
                                             "violations": [name]})
        return lock

    def gateway_failure(exc: Exception) -> HTTPException:
        attempts = getattr(exc, "errors", [])
        return HTTPException(502, detail={"error": type(exc).__name__,
                                          "message": str(exc),
                                          "attempts": list(attempts)})

    def bad_request(exc: Exception, violations: list[str] | None = None):
        return HTTPException(400, detail={
            "error": type(exc).__name__,
            "violations": violations if violations is not None else [str(exc)],
        })

    @app.get("/api/bundles")
    def list_bundles():
        return sorted(p.name for p in bundle_root.iterdir() if p.is_dir())

    @app.get("/api/maps")
    def list_maps():
        out = []
        for d in sorted(maps_dir.iterdir()) if maps_dir.is_dir() else []:
            graph_file = d / "scenegraph.json"
            if d.is_dir() and (d / "map.png").exists():
                entry = {"name": d.name, "image": f"/api/maps/{d.name}/image.png"}
                if graph_file.exists():
                    doc = read_json(graph_file)
                    entry["meta"] = doc.get("meta")
                    entry["graph"] = doc
                out.append(entry)
        return out

    @app.get("/api/maps/{name}/image.png")
    def map_image(name: str):
        path = maps_dir / name / "map.png"
        if not path.exists():
            raise HTTPException(404, detail={"error": "UnknownMap",
                                             "violations": [name]})
        return FileResponse(path, media_type="image/png")

    @app.put("/api/scenegraph")
    def put_scenegraph(bundle: str = Query(...), body: dict = Body(...)):
        lock = mutation(bundle)
        try:
            doc = body.get("graph")
            map_name = body.get("map")
            if not isinstance(doc, dict) or not map_name:
                raise HTTPException(400, detail={
                    "error": "InputError",
                    "violations": ["body must carry 'graph' (document) and "
                                   "'map' (source map name)"],
                })
            try:
                g = graph_from_doc(doc)
            except ValidationError as exc:
                raise bad_request(exc, exc.violations) from exc
            except ParseError as exc:
                raise bad_request(exc) from exc
            src = maps_dir / map_name
            image_src = src / g.meta.image_path
            if not image_src.exists():
                raise HTTPException(404, detail={"error": "UnknownMap",
                                                 "violations": [map_name]})
            b = get_bundle(bundle, must_exist=False)
            b.root.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(image_src, b.root / image_src.name)
            annotated = image_src.with_name(image_src.stem + "_annotated.png")
            if annotated.exists():
                shutil.copyfile(annotated, b.root / annotated.name)
            b.write_graph(g)
            if not b.path("simconfig.json").exists():
                b.write_simconfig(SimConfig())
            guard.reopen(bundle)
            return {"nodes": len(g.nodes), "edges": len(g.edges)}
        finally:
            lock.release()

    @app.get("/api/map.png")
    def bundle_map(bundle: str = Query(...)):
        b = get_bundle(bundle)
        if not b.path(GRAPH_FILE).exists():
            raise HTTPException(404, detail={"error": "UnknownBundle",
                                             "violations": [bundle]})
        return FileResponse(b.map_image_path(), media_type="image/png")

    @app.get("/api/bundle/state")
    def bundle_state(bundle: str = Query(...)):
        b = get_bundle(bundle)
        state: dict = {"name": b.name, "accepted": guard.is_accepted(bundle)}
        for key, file in (("graph", "scenegraph.json"),
                          ("scenario", "scenario.json"),
                          ("paths", "paths.json"),
                          ("simconfig", "simconfig.json")):
            state[key] = read_json(b.path(file)) if b.path(file).exists() else None
        state["behaviors"] = {
            p.stem: p.read_text(encoding="utf-8")
            for p in sorted(b.path("bt").glob("*.xml"))
        } if b.path("bt").is_dir() else {}
        state["runs"] = b.list_runs()
        return state

    @app.post("/api/propose")
    def propose(bundle: str = Query(...), body: dict = Body(...)):
        b = get_bundle(bundle)
        lock = mutation(bundle)
        try:
            try:
                meta = ScenarioMetadata(
                    social_context=body.get("context", ""),
                    task=body.get("task", ""),
                    location_description=body.get("location", ""),
                    rough_scenario=body.get("rough") or None,
                )
            except ValueError as exc:
                raise bad_request(exc) from exc
            try:
                spec = stage_propose(b, meta, gateway, max_attempts,
                                     body.get("naive", False), model_id)
            except (RetriesExhausted, FixtureMiss, TransportError) as exc:
                raise gateway_failure(exc) from exc
            guard.reopen(bundle)
            return read_json(b.path("scenario.json")) | {
                "pedestrian_count": len(spec.pedestrians)
            }
        finally:
            lock.release()

    @app.post("/api/paths")
    def gen_paths(bundle: str = Query(...), body: dict = Body(default={})):
        b = get_bundle(bundle)
        lock = mutation(bundle)
        try:
            if not b.path("scenario.json").exists():
                raise HTTPException(400, detail={
                    "error": "BundleInvalid",
                    "violations": ["scenario.json missing; propose first"]})
            if guard.is_accepted(bundle):
                raise HTTPException(409, detail={"error": "PathsAccepted",
                                                 "violations": [bundle]})
            try:
                stage_paths(b, gateway, max_attempts,
                            (body or {}).get("naive", False), model_id)
            except (RetriesExhausted, FixtureMiss, TransportError) as exc:
                raise gateway_failure(exc) from exc
            return read_json(b.path("paths.json"))
        finally:
            lock.release()

    @app.post("/api/paths/edit")
    def edit(bundle: str = Query(...), body: dict = Body(...)):
        b = get_bundle(bundle)
        lock = mutation(bundle)
        try:
            if guard.is_accepted(bundle):
                raise HTTPException(409, detail={"error": "PathsAccepted",
                                                 "violations": [bundle]})
            instruction = (body or {}).get("instruction", "")
            try:
                result = stage_edit_paths(b, instruction, gateway, max_attempts,
                                          model_id)
            except InputError as exc:
                raise bad_request(exc) from exc
            except (FixtureMiss, TransportError) as exc:
                raise gateway_failure(exc) from exc
            if not result.applied:
                raise HTTPException(502, detail={
                    "error": "RetriesExhausted",
                    "message": "edit failed; plan unchanged",
                    "attempts": list(result.errors)})
            return read_json(b.path("paths.json")) | {"attempts": result.attempts}
        finally:
            lock.release()

    @app.post("/api/paths/accept")
    def accept(bundle: str = Query(...)):
        b = get_bundle(bundle)
        if not b.path("paths.json").exists():
            raise HTTPException(400, detail={"error": "BundleInvalid",
                                             "violations": ["paths.json missing"]})
        guard.accept(bundle)
        return {"accepted": True}

    @app.post("/api/behaviors")
    def behaviors(bundle: str = Query(...)):
        b = get_bundle(bundle)
        lock = mutation(bundle)
        try:
            if not b.path("scenario.json").exists():
                raise HTTPException(400, detail={
                    "error": "BundleInvalid",
                    "violations": ["scenario.json missing; propose first"]})
            try:
                trees = stage_behaviors(b, gateway, max_attempts, False, model_id)
            except (RetriesExhausted, FixtureMiss, TransportError) as exc:
                raise gateway_failure(exc) from exc
            return {"pedestrians": sorted(trees)}
        finally:
            lock.release()

    @app.post("/api/simulate")
    def simulate(bundle: str = Query(...), body: dict = Body(default={})):
        b = get_bundle(bundle)
        lock = mutation(bundle)
        try:
            problems = b.validate()
            if problems:
                raise HTTPException(400, detail={"error": "BundleInvalid",
                                                 "violations": problems})
            body = body or {}
            planner = body.get("planner", "baseline")
            seed = int(body.get("seed", 7))
            try:
                trace, report = stage_run(b, planner, seed=seed)
            except (BundleInvalid, ValueError) as exc:
                raise bad_request(exc, getattr(exc, "violations", None)) from exc
            run_id = f"{trace.config['planner']}_seed{seed}"
            return {"run": run_id, "termination": trace.termination_reason,
                    "metrics": report.to_doc()}
        finally:
            lock.release()

    @app.get("/api/trace/{run}")
    def get_trace(run: str, bundle: str = Query(...)):
        b = get_bundle(bundle)
        path = b.path("traces", f"{run}.jsonl")
        if not path.exists():
            raise HTTPException(404, detail={"error": "UnknownRun",
                                             "violations": [run]})
        return PlainTextResponse(path.read_text(encoding="utf-8"),
                                 media_type="application/jsonl")

    @app.get("/api/metrics/{run}")
    def get_metrics(run: str, bundle: str = Query(...)):
        b = get_bundle(bundle)
        path = b.path("metrics", f"{run}.json")
        if not path.exists():
            raise HTTPException(404, detail={"error": "UnknownRun",
                                             "violations": [run]})
        return JSONResponse(read_json(path))

    @app.exception_handler(HTTPException)
    async def detail_handler(request, exc: HTTPException):
        detail = exc.detail if isinstance(exc.detail, dict) else {
            "error": "HTTPError", "message": str(exc.detail)}
        return JSONResponse(status_code=exc.status_code, content=detail)

    if ui_dir is not None and ui_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
