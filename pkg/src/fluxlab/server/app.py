"""HTTP + WebSocket facade for the studio UI.

Endpoints and message schemas are documented in docs/api.md.  Error codes:
400 schema problems, 404 unknown session, 409 illegal state transitions.
"""

from __future__ import annotations

import json
import queue
import tempfile
from pathlib import Path

from fastapi import FastAPI, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from ..classify import export_model, preload_model, ArtifactError, \
    StablePredictor
from ..config import ProjectConfig
from ..geometry import Plane, load_mesh
from ..geometry.mesh import MeshError
from ..structuregen import SegmentSelection, build_fluxio_model, \
    compose_grid, ChannelError
from ..geometry.sdf import extract_isosurface
from ..fea import simulate_actuation, MaterialParams, SmaSpringParams, \
    strain_colormap
from . import sessions as ops
from .sessions import SessionError, SessionStore


def create_app(config: ProjectConfig | None = None) -> FastAPI:
    config = config or ProjectConfig()
    app = FastAPI(title="fluxlab studio service")
    store = SessionStore(config)

    @app.exception_handler(SessionError)
    async def session_error(_, exc: SessionError):
        return JSONResponse(status_code=exc.status,
                            content={"error": exc.message})

    @app.post("/session")
    def create_session():
        session = store.create()
        return {"id": session.id, "state": session.state}

    @app.get("/session/{sid}")
    def session_info(sid: str):
        s = store.get(sid)
        with s.lock:
            return {
                "id": s.id, "state": s.state,
                "collected": {k: len(v) for k, v in s.collected.items()},
                "repetitions": dict(s.repetitions),
                "behavior": s.behavior, "elasticity": s.elasticity,
            }

    @app.post("/session/{sid}/mesh")
    async def upload_mesh(sid: str, request: Request):
        s = store.get(sid)
        body = await request.body()
        if not body:
            raise SessionError(400, "empty mesh upload")
        with tempfile.NamedTemporaryFile(suffix=".stl") as tmp:
            tmp.write(body)
            tmp.flush()
            try:
                mesh = load_mesh(tmp.name)
            except MeshError as exc:
                raise SessionError(400, f"unreadable mesh: {exc}")
        with s.lock:
            s.mesh = mesh
            s.advance("MeshLoaded")
            lo, hi = mesh.bounds
        return {"state": "MeshLoaded", "vertices": len(mesh.vertices),
                "triangles": len(mesh.triangles),
                "watertight": mesh.watertight,
                "bounds": [lo.tolist(), hi.tolist()]}

    def _parse_plane(doc: dict, name: str) -> Plane:
        try:
            return Plane(doc["point"], doc["normal"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SessionError(400, f"bad {name}: {exc}")

    @app.put("/session/{sid}/selection")
    async def set_selection(sid: str, request: Request):
        s = store.get(sid)
        doc = await _json_body(request)
        plane_a = _parse_plane(doc.get("plane_a", {}), "plane_a")
        plane_b = _parse_plane(doc.get("plane_b", {}), "plane_b")
        with s.lock:
            s.require("MeshLoaded", "Configured", "Streaming")
            try:
                s.selection = SegmentSelection(plane_a, plane_b)
            except ValueError as exc:
                raise SessionError(400, str(exc))
            if s.state == "MeshLoaded":
                s.advance("Configured")
        return {"state": s.state}

    @app.put("/session/{sid}/elasticity")
    async def set_elasticity(sid: str, request: Request):
        s = store.get(sid)
        doc = await _json_body(request)
        value = doc.get("value")
        if not isinstance(value, (int, float)) or not 0 <= value <= 1:
            raise SessionError(400, "elasticity value must be in [0, 1]")
        with s.lock:
            s.require("MeshLoaded", "Configured", "Streaming")
            s.elasticity = float(value)
        return {"elasticity": s.elasticity}

    @app.put("/session/{sid}/behavior")
    async def set_behavior(sid: str, request: Request):
        s = store.get(sid)
        doc = await _json_body(request)
        mode = doc.get("mode")
        if mode not in ("compression", "bending"):
            raise SessionError(400, "behavior mode must be compression or "
                                    "bending")
        with s.lock:
            s.require("MeshLoaded", "Configured", "Streaming")
            s.behavior = mode
            s.bend_azimuth = float(doc.get("azimuth", s.bend_azimuth))
            s.anchor_width = float(doc.get("anchor_width", s.anchor_width))
        return {"behavior": mode, "azimuth": s.bend_azimuth,
                "anchor_width": s.anchor_width}

    @app.get("/session/{sid}/preview")
    def preview(sid: str):
        s = store.get(sid)
        with s.lock:
            s.require("Configured", "Streaming", "Collecting", "Trained",
                      "Deployed")
            if s.mesh is None or s.selection is None:
                raise SessionError(409, "mesh and selection required")
            mesh, selection = s.mesh, s.selection
            elasticity, behavior = s.elasticity, s.behavior
            azimuth, width = s.bend_azimuth, s.anchor_width
        try:
            model = build_fluxio_model(
                mesh, selection, elasticity=elasticity, behavior=behavior,
                bend_azimuth_deg=azimuth, anchor_width=width,
                n_slices=config.geometry.n_slices,
                channel_radius=config.channel.radius_mm)
            comp = compose_grid(model, voxel=config.geometry.voxel_mm)
        except (ChannelError, ValueError) as exc:
            raise SessionError(409, f"composition failed: {exc}")
        composite = extract_isosurface(comp.grid)
        mat = MaterialParams(config.fea.youngs_modulus_mpa,
                             config.fea.poisson_ratio)
        sma = SmaSpringParams(
            config.fea.sma_wire_mm, config.fea.sma_coil_mm,
            config.fea.sma_turns, config.fea.sma_shear_modulus_mpa,
            config.fea.sma_recovery_stroke_mm)
        mode = "bending" if model.anchors else "compression"
        result = simulate_actuation(
            comp, mode, phases=config.server.preview_phases, mat=mat,
            sma=sma, fe_voxel=config.server.preview_fe_voxel_mm)
        frames = []
        for frame in result.frames:
            colors = strain_colormap(frame.strain.von_mises)
            frames.append({
                "phase": frame.phase,
                "bend_angle_deg": frame.bend_angle_deg,
                "bend_azimuth_deg": frame.bend_azimuth_deg,
                "axial_compression_mm": frame.axial_compression,
                "element_centers": frame.strain.centers.tolist(),
                "element_colors": colors.tolist(),
                "displacement_scale": 1.0,
            })
        return {
            "mesh": {"vertices": composite.vertices.tolist(),
                     "triangles": composite.triangles.tolist()},
            "channel": comp.model.channel.samples.tolist(),
            "lattice_cell_mm": comp.model.gyroid.cell_size,
            "solidity_target": comp.model.target_solidity,
            "helix": {"pitch": comp.shell.pitch,
                      "starts": comp.shell.starts},
            "anchors": [{"azimuth_deg": a.azimuth_deg, "width": a.width}
                        for a in comp.model.anchors],
            "frames": frames,
        }

    @app.post("/session/{sid}/stream")
    async def stream(sid: str, request: Request):
        s = store.get(sid)
        doc = await _json_body(request, allow_empty=True)
        return ops.attach_stream(
            s, solidity=float(doc.get("solidity", 0.13)),
            seed=int(doc.get("seed", 0)),
            realtime=bool(doc.get("realtime", False)))

    @app.post("/session/{sid}/collect")
    async def collect(sid: str, request: Request):
        s = store.get(sid)
        doc = await _json_body(request)
        label = doc.get("label")
        if not isinstance(label, str):
            raise SessionError(400, "collect needs a string label")
        return ops.collect(s, label)

    @app.delete("/session/{sid}/data")
    def clear(sid: str):
        return ops.clear_data(store.get(sid))

    @app.post("/session/{sid}/train")
    async def train(sid: str, request: Request):
        s = store.get(sid)
        doc = await _json_body(request, allow_empty=True)
        return ops.start_training(s, doc)

    @app.get("/session/{sid}/train/progress")
    def train_progress(sid: str):
        s = store.get(sid)
        with s.lock:
            return dict(s.train_progress) or {"status": "idle"}

    @app.get("/session/{sid}/predict")
    def predict(sid: str):
        return ops.live_predict(store.get(sid))

    @app.post("/session/{sid}/export")
    def export(sid: str):
        s = store.get(sid)
        with s.lock:
            s.require("Trained", "Deployed")
            if s.model is None:
                raise SessionError(409, "no trained model to export")
            model, scaler, wcfg = s.model, s.model_scaler, s.window_cfg
        with tempfile.TemporaryDirectory() as tmp:
            export_model(model, scaler, wcfg, tmp)
            doc = json.loads((Path(tmp) / "model.json").read_text())
            script = (Path(tmp) / "predict.py").read_text()
        return {"artifact": doc, "predict_py": script}

    @app.post("/session/{sid}/preload")
    async def preload(sid: str, request: Request):
        s = store.get(sid)
        doc = await _json_body(request)
        artifact = doc.get("artifact")
        if not isinstance(artifact, dict):
            raise SessionError(400, "preload needs an artifact document")
        with tempfile.TemporaryDirectory() as tmp:
            (Path(tmp) / "model.json").write_text(json.dumps(artifact))
            try:
                model, scaler, wcfg, labels = preload_model(tmp)
            except ArtifactError as exc:
                raise SessionError(400, f"bad artifact: {exc}")
        with s.lock:
            s.require("Streaming", "Collecting", "Trained", "Deployed")
            s.model = model
            s.model_scaler = scaler
            s.window_cfg = wcfg
            s.predictor = StablePredictor(model)
            s.advance("Trained")
        return {"state": s.state, "labels": labels}

    @app.websocket("/session/{sid}/ws")
    async def ws(websocket: WebSocket, sid: str):
        import anyio
        try:
            session = store.get(sid)
        except SessionError:
            await websocket.close(code=4404, reason="no such session")
            return
        await websocket.accept()
        q = session.subscribe()
        try:
            while True:
                try:
                    message = q.get_nowait()
                except queue.Empty:
                    await anyio.sleep(0.01)
                    continue
                await websocket.send_text(json.dumps(message))
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            session.unsubscribe(q)

    async def _json_body(request: Request, allow_empty: bool = False) -> dict:
        body = await request.body()
        if not body:
            if allow_empty:
                return {}
            raise SessionError(400, "request needs a JSON body")
        try:
            doc = json.loads(body)
        except json.JSONDecodeError as exc:
            raise SessionError(400, f"invalid JSON body: {exc}")
        if not isinstance(doc, dict):
            raise SessionError(400, "JSON body must be an object")
        return doc

    return app
