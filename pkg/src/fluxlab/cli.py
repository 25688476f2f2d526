"""Batch command line: the full design -> check -> sense -> learn pipeline.

    fluxlab convert model.stl --elasticity 0.5 --behavior bending -o out/
    fluxlab report out/ --figures
    fluxlab simulate out/ -o sim/
    fluxlab synth-data --solidity 0.11 --per-class 60 -o data/
    fluxlab train data/ --solidity 0.11 -o model/
    fluxlab evaluate model/ data/ --solidity 0.11 -o eval/
    fluxlab predict model/ trace.jsonl
    fluxlab scenario script.json -o trace/
    fluxlab serve --port 8765

Exit codes: 0 success, 1 domain error, 2 usage error.  JSON results go to
stdout with --json; logs go to stderr.  Report paths render figures next
to their CSV/JSON outputs.
"""

from __future__ import annotations

import csv
import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import config as project_config


def _fail(message: str) -> "NoReturn":  # noqa: F821
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def domain_errors(fn):
    """Map domain exceptions to exit code 1 with a readable message."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, RuntimeError, OSError) as exc:
            _fail(str(exc))

    return wrapper


def _emit(payload: dict, as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps(payload, indent=2, default=_jsonable))
    else:
        for key, value in payload.items():
            if isinstance(value, (dict, list)):
                value = json.dumps(value, default=_jsonable)
            click.echo(f"{key}: {value}")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_csv(path: Path, rows: list, fields: list) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k) for k in fields})


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Project config JSON (or set FLUX_CONFIG).")
@click.pass_context
def main(ctx, config_path):
    ctx.ensure_object(dict)
    try:
        ctx.obj["config"] = project_config.load(config_path)
    except project_config.ConfigError as exc:
        _fail(str(exc))


def _selection_for(mesh, span, span_frac):
    from .geometry import Plane
    from .structuregen import SegmentSelection
    lo, hi = mesh.bounds
    if span is not None:
        z0, z1 = span
    else:
        a, b = span_frac
        z0 = lo[2] + a * (hi[2] - lo[2])
        z1 = lo[2] + b * (hi[2] - lo[2])
    if z1 <= z0:
        raise ValueError("selection span is empty")
    return SegmentSelection(Plane((0, 0, z0), (0, 0, 1)),
                            Plane((0, 0, z1), (0, 0, -1)))


@main.command()
@click.argument("mesh_path", type=click.Path(exists=True))
@click.option("--elasticity", type=float, default=0.5,
              help="Elasticity slider in [0, 1]; 1 is most elastic.")
@click.option("--solidity", type=float, default=None,
              help="Explicit lattice solidity (overrides --elasticity).")
@click.option("--behavior", type=click.Choice(["compression", "bending"]),
              default="compression")
@click.option("--bend-azimuth", type=float, default=0.0,
              help="Bending direction in degrees around the axis.")
@click.option("--anchor-width", type=float, default=None)
@click.option("--span", nargs=2, type=float, default=None,
              help="Selection planes at absolute z (mm).")
@click.option("--span-frac", nargs=2, type=float, default=(0.25, 0.75),
              help="Selection planes at bounding-box fractions.")
@click.option("-o", "--out", "outdir", type=click.Path(), required=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
@domain_errors
def convert(ctx, mesh_path, elasticity, solidity, behavior, bend_azimuth,
            anchor_width, span, span_frac, outdir, as_json):
    """Convert a mesh segment into the printable shape-changing package."""
    from .geometry import load_mesh, save_stl
    from .structuregen import build_fluxio_model, compose_fluxio, \
        printability_report
    cfg = ctx.obj["config"]
    mesh = load_mesh(mesh_path)
    selection = _selection_for(mesh, span, span_frac)
    model = build_fluxio_model(
        mesh, selection, elasticity=elasticity, solidity=solidity,
        behavior=behavior, bend_azimuth_deg=bend_azimuth,
        anchor_width=anchor_width or cfg.channel.anchor_width_mm,
        n_slices=cfg.geometry.n_slices,
        channel_radius=cfg.channel.radius_mm)
    comp = compose_fluxio(model, voxel=cfg.geometry.voxel_mm)
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    save_stl(comp.main, out / "main.stl")
    save_stl(comp.bottom, out / "bottom.stl")
    save_stl(mesh, out / "source.stl")  # lets report/simulate recompose
    report = printability_report(comp)
    (out / "report.json").write_text(json.dumps(report, indent=2))
    (out / "params.json").write_text(
        json.dumps(model.to_params(), indent=2))
    _emit({"outdir": str(out), "main": "main.stl", "bottom": "bottom.stl",
           "wall_pass": report["wall_pass"],
           "solidity": report["solidity"]["measured"],
           "warnings": report["warnings"]}, as_json)


@main.command()
@click.argument("target", type=click.Path(exists=True))
@click.option("-o", "--out", "outdir", type=click.Path(), default=None)
@click.option("--figures/--no-figures", default=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
@domain_errors
def report(ctx, target, outdir, figures, as_json):
    """Printability report for a package dir (params.json) or a bare STL."""
    from .geometry import load_mesh
    from .structuregen import printability_report
    from .report import render_printability_figures
    from .structuregen.printability import _wall_thickness_lattice
    cfg = ctx.obj["config"]
    target = Path(target)
    walls = None
    if target.is_dir():
        comp = _recompose(target, cfg)
        rep = printability_report(comp)
        walls = _wall_thickness_lattice(comp)
    else:
        rep = printability_report(load_mesh(target))
    out = Path(outdir) if outdir else (
        target if target.is_dir() else target.parent)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(rep, indent=2))
    rows = [{"check": "min_wall_mm", "value": rep["min_wall_mm"],
             "pass": rep["wall_pass"]},
            {"check": "overhang_fraction", "value": rep["overhang_fraction"],
             "pass": ""},
            {"check": "segment_diameter_mm",
             "value": rep["segment_diameter_mm"],
             "pass": rep["diameter_pass"]}]
    if "solidity" in rep:
        rows.append({"check": "solidity", "value": rep["solidity"]["measured"],
                     "pass": rep["solidity"]["pass"]})
    _write_csv(out / "report.csv", rows, ["check", "value", "pass"])
    if figures:
        render_printability_figures(rep, walls, out)
    _emit(rep, as_json)


def _recompose(package_dir: Path, cfg):
    """Rebuild the composition recorded in a print package directory."""
    from .geometry import load_mesh, Plane
    from .structuregen import (AnchorSpec, ChannelPath, FluxIOModel,
                               GyroidSpec, HelixShellSpec, SegmentSelection,
                               SocketSpec, compose_grid)
    params = json.loads((package_dir / "params.json").read_text())
    stl = package_dir / "source.stl"
    if not stl.exists():
        raise FileNotFoundError(
            f"{package_dir}/source.stl not found; re-run convert with the "
            f"package output or pass the original mesh")
    mesh = load_mesh(stl)
    sel = params["selection"]
    selection = SegmentSelection(
        Plane(sel["plane_a"]["point"], sel["plane_a"]["normal"]),
        Plane(sel["plane_b"]["point"], sel["plane_b"]["normal"]))
    model = FluxIOModel(
        mesh=mesh, selection=selection,
        channel=ChannelPath(np.asarray(params["channel"]["samples"]),
                            params["channel"]["radius"]),
        gyroid=GyroidSpec(params["gyroid"]["cell_size"],
                          params["gyroid"]["wall"]),
        shell=HelixShellSpec(params["shell"]["spacing"],
                             params["shell"]["wire_diameter"],
                             params["shell"]["slope_deg"]),
        anchors=tuple(AnchorSpec(a["azimuth_deg"], a["width"], a["thickness"])
                      for a in params["anchors"]),
        socket=SocketSpec(**params["socket"]),
        split_plane=Plane(params["split_plane"]["point"],
                          params["split_plane"]["normal"]),
        target_solidity=params.get("target_solidity"))
    return compose_grid(model, voxel=cfg.geometry.voxel_mm)


@main.command()
@click.argument("package", type=click.Path(exists=True))
@click.option("--mode", type=click.Choice(["compression", "bending"]),
              default=None, help="Defaults to bending when anchors exist.")
@click.option("--phases", type=str, default="0.25,0.5,0.75,1.0")
@click.option("-o", "--out", "outdir", type=click.Path(), required=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
@domain_errors
def simulate(ctx, package, mode, phases, outdir, as_json):
    """Finite-element actuation preview of a converted package."""
    from .fea import simulate_actuation, MaterialParams, SmaSpringParams, \
        strain_colormap
    from .geometry.mesh import save_obj, TriMesh
    cfg = ctx.obj["config"]
    comp = _recompose(Path(package), cfg)
    if mode is None:
        mode = "bending" if comp.model.anchors else "compression"
    phase_list = [float(p) for p in phases.split(",")]
    mat = MaterialParams(cfg.fea.youngs_modulus_mpa, cfg.fea.poisson_ratio)
    sma = SmaSpringParams(cfg.fea.sma_wire_mm, cfg.fea.sma_coil_mm,
                          cfg.fea.sma_turns, cfg.fea.sma_shear_modulus_mpa,
                          cfg.fea.sma_recovery_stroke_mm)
    result = simulate_actuation(comp, mode, phase_list, mat, sma,
                                fe_voxel=cfg.fea.voxel_mm)
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    frames_doc = []
    for k, frame in enumerate(result.frames):
        frames_doc.append({
            "phase": frame.phase,
            "axial_compression_mm": frame.axial_compression,
            "lateral_tip_mm": frame.lateral_tip,
            "bend_angle_deg": frame.bend_angle_deg,
            "bend_azimuth_deg": frame.bend_azimuth_deg,
        })
        surface, vert_strain = _voxel_surface(result.voxels, frame)
        colors = strain_colormap(vert_strain)
        save_obj(TriMesh(surface[0], surface[1]).with_colors(colors),
                 out / f"frame_{k:02d}.obj")
    doc = {"schema_version": 1, "mode": mode,
           "structure_rate_n_per_mm": result.structure_rate,
           "spring_rate_n_per_mm": result.spring_rate,
           "applied_force_n": result.applied_force,
           "frames": frames_doc}
    (out / "frames.json").write_text(json.dumps(doc, indent=2))
    disp = {"schema_version": 1,
            "nodes": result.voxels.nodes.tolist(),
            "frames": [{"phase": f.phase, "u": f.displacement.u.tolist()}
                       for f in result.frames]}
    (out / "displacements.json").write_text(json.dumps(disp))
    _emit(doc, as_json)


def _voxel_surface(vox, frame):
    """Deformed boundary quads of the voxel model with per-vertex strain."""
    occ = np.zeros(vox.shape, dtype=bool)
    occ[vox.elements[:, 0], vox.elements[:, 1], vox.elements[:, 2]] = True
    elem_of = -np.ones(vox.shape, dtype=int)
    elem_of[vox.elements[:, 0], vox.elements[:, 1],
            vox.elements[:, 2]] = np.arange(len(vox.elements))
    faces = []
    strains = []
    corners = {
        (0, -1): [(0, 0, 0), (0, 0, 1), (0, 1, 1), (0, 1, 0)],
        (0, 1): [(1, 0, 0), (1, 1, 0), (1, 1, 1), (1, 0, 1)],
        (1, -1): [(0, 0, 0), (1, 0, 0), (1, 0, 1), (0, 0, 1)],
        (1, 1): [(0, 1, 0), (0, 1, 1), (1, 1, 1), (1, 1, 0)],
        (2, -1): [(0, 0, 0), (0, 1, 0), (1, 1, 0), (1, 0, 0)],
        (2, 1): [(0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)],
    }
    node_index = {}
    verts = []
    vstrain = []
    deformed = vox.nodes + frame.displacement.u

    def node_id(cell, offset):
        key = (cell[0] + offset[0], cell[1] + offset[1], cell[2] + offset[2])
        if key not in node_index:
            nnx, nny, nnz = (s + 1 for s in vox.shape)
            flat = key[0] * nny * nnz + key[1] * nnz + key[2]
            packed = np.searchsorted(vox.node_ids, flat)
            node_index[key] = len(verts)
            verts.append(deformed[packed])
            vstrain.append([])
        return node_index[key]

    for e, cell in enumerate(vox.elements):
        for (axis, side), quad in corners.items():
            ni, nj, nk = cell
            neighbor = list(cell)
            neighbor[axis] += side
            inside = (0 <= neighbor[axis] < vox.shape[axis]
                      and occ[tuple(neighbor)])
            if inside:
                continue
            ids = [node_id(cell, off) for off in quad]
            faces.append([ids[0], ids[1], ids[2]])
            faces.append([ids[0], ids[2], ids[3]])
            s = frame.strain.von_mises[e]
            for i in ids:
                vstrain[i].append(s)
    verts = np.asarray(verts)
    vert_strain = np.array([np.mean(s) if s else 0.0 for s in vstrain])
    return (verts, np.asarray(faces)), vert_strain


@main.command("synth-data")
@click.option("--solidity", type=float, required=True)
@click.option("--per-class", type=int, default=60)
@click.option("--seed", type=int, default=7)
@click.option("-o", "--out", "outdir", type=click.Path(), required=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
@domain_errors
def synth_data(ctx, solidity, per_class, seed, outdir, as_json):
    """Generate the labeled synthetic gesture dataset for one solidity."""
    from .classify import make_dataset, save_dataset
    traces = make_dataset(solidity, per_class=per_class, seed=seed)
    out = save_dataset(traces, outdir)
    _emit({"outdir": str(out), "n_traces": len(traces),
           "solidity": solidity, "per_class": per_class, "seed": seed},
          as_json)


@main.command()
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--solidity", type=float, default=None,
              help="Level to train on (defaults to the only one present).")
@click.option("--epochs", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("-o", "--out", "outdir", type=click.Path(), required=True)
@click.option("--figures/--no-figures", default=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
@domain_errors
def train(ctx, dataset, solidity, epochs, seed, outdir, figures, as_json):
    """Train the deformation classifier on a dataset directory."""
    from .classify import (load_dataset, rest_calibration, train as
                           train_model, TrainConfig, export_model, evaluate,
                           WindowConfig)
    from .report import render_training_figures
    cfg = ctx.obj["config"]
    traces = load_dataset(dataset, solidity)
    level = solidity if solidity is not None else traces[0].solidity
    tcfg = TrainConfig(
        learning_rate=cfg.train.learning_rate,
        epochs=epochs if epochs is not None else cfg.train.epochs,
        dropout=cfg.train.dropout, l2=cfg.train.l2,
        batch_size=cfg.train.batch_size,
        seed=seed if seed is not None else cfg.train.seed,
        windows_per_trace=cfg.train.windows_per_trace)
    scaler = rest_calibration(level, seed=tcfg.seed)

    def progress(epoch, total, report):
        if epoch % 20 == 0 or epoch == total:
            click.echo(f"epoch {epoch}/{total} "
                       f"train_acc={report.train_acc[-1]:.3f} "
                       f"test_acc={report.test_acc[-1]:.3f}", err=True)

    model, scaler, history, (train_tr, test_tr) = train_model(
        traces, tcfg, scaler=scaler, progress=progress)
    rep = evaluate(model, test_tr, scaler)
    out = Path(outdir)
    export_model(model, scaler, WindowConfig(), out,
                 extra={"solidity": level, "macro_f1": rep.macro_f1})
    (out / "history.json").write_text(json.dumps(history.to_json()))
    rows = [{"epoch": e, "train_loss": tl, "train_acc": ta,
             "test_loss": vl, "test_acc": va}
            for e, tl, ta, vl, va in zip(
                history.epochs, history.train_loss, history.train_acc,
                history.test_loss, history.test_acc)]
    _write_csv(out / "history.csv", rows,
               ["epoch", "train_loss", "train_acc", "test_loss", "test_acc"])
    if figures:
        render_training_figures(history.to_json(), out)
    _emit({"outdir": str(out), "macro_f1": rep.macro_f1,
           "final_test_acc": history.test_acc[-1]}, as_json)


@main.command()
@click.argument("model_dir", type=click.Path(exists=True))
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--solidity", type=float, default=None)
@click.option("-o", "--out", "outdir", type=click.Path(), required=True)
@click.option("--figures/--no-figures", default=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
@domain_errors
def evaluate(ctx, model_dir, dataset, solidity, outdir, figures, as_json):
    """Confusion matrix and macro-F1 of a trained model on a dataset."""
    from .classify import preload_model, load_dataset, evaluate as eval_model
    from .report import render_confusion_figure
    model, scaler, wcfg, labels = preload_model(model_dir)
    traces = load_dataset(dataset, solidity)
    rep = eval_model(model, traces, scaler, wcfg)
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.json").write_text(json.dumps(rep.to_json(), indent=2))
    rows = [{"label": lbl, "accuracy": acc}
            for lbl, acc in rep.per_class_accuracy.items()]
    rows.append({"label": "macro_f1", "accuracy": rep.macro_f1})
    _write_csv(out / "metrics.csv", rows, ["label", "accuracy"])
    if figures:
        render_confusion_figure(rep.confusion, out)
    _emit(rep.to_json(), as_json)


@main.command()
@click.argument("model_dir", type=click.Path(exists=True))
@click.argument("trace_file", type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def predict(model_dir, trace_file, as_json):
    """Classify one recorded trace with a trained model."""
    from .classify import preload_model, predict_trace
    from .signal import trace_from_jsonl, GESTURE_LABELS
    model, scaler, wcfg, labels = preload_model(model_dir)
    trace = trace_from_jsonl(trace_file)
    k = predict_trace(model, trace, scaler, wcfg)
    _emit({"label": labels[k], "true_label": trace.label}, as_json)


@main.command()
@click.argument("script_file", type=click.Path(exists=True))
@click.option("-o", "--out", "outdir", type=click.Path(), required=True)
@click.option("--figures/--no-figures", default=True)
@click.option("--json", "as_json", is_flag=True)
@domain_errors
def scenario(script_file, outdir, figures, as_json):
    """Run a sense/actuate controller script to a trace."""
    from .control import run_scenario
    from .report import render_scenario_figure
    script = json.loads(Path(script_file).read_text())
    trace = run_scenario(script)
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trace.json").write_text(json.dumps(trace))
    _write_csv(out / "trace.csv", trace,
               ["t_ms", "mode", "T", "duty", "sensed", "output_flag",
                "event"])
    if figures:
        render_scenario_figure(trace, out)
    modes = sorted({r["mode"] for r in trace})
    _emit({"outdir": str(out), "rows": len(trace), "modes": modes,
           "max_T": max(r["T"] for r in trace)}, as_json)


@main.command()
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.pass_context
@domain_errors
def serve(ctx, host, port):
    """Start the HTTP/WebSocket studio service."""
    import uvicorn
    from .server.app import create_app
    cfg = ctx.obj["config"]
    uvicorn.run(create_app(cfg), host=host or cfg.server.host,
                port=port or cfg.server.port, log_level="info")


if __name__ == "__main__":
    main()
