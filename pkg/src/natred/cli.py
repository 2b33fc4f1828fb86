"""Command-line front end: ``natred run | sweep | validate``."""
from __future__ import annotations

import argparse
import csv
import itertools
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .errors import DegenerateParameters
from .forms import Tolerance
from .presets import AlgebraError, catalog, center, load_algebra_file, preset
from .report import SCHEMA_VERSION, VerificationReport, dumps
from .sampling import DEFAULT_SEED, sphere_points, stream

PIPELINES = ("tangent", "direct-product-crosscheck", "appendix-gxg", "s7", "spinor-remark21", "validate-algebra")
REQUIRED = {
    "tangent": ("a", "b"),
    "direct-product-crosscheck": ("a", "b"),
    "appendix-gxg": ("a", "b", "c", "d"),
    "s7": ("a", "b"),
    "spinor-remark21": ("a", "b"),
    "validate-algebra": (),
}
PARAMS = ("a", "b", "c", "d", "lambda")


class ConfigError(ValueError):
    pass


def _algebra(cfg: dict):
    if cfg.get("file"):
        return load_algebra_file(cfg["file"])
    name = cfg.get("algebra") or "su2"
    try:
        return preset(name)
    except KeyError:
        raise ConfigError(f"unknown algebra {name!r}; available: {', '.join(catalog())}") from None


def _merge(reports: list[VerificationReport], pipeline: str, inputs: dict) -> VerificationReport:
    """Worst case per check across samples: a failing instance wins, then the largest residual."""
    out = VerificationReport(pipeline, inputs, info=dict(reports[0].info))
    out.info["samples"] = len(reports)
    for name in [c.name for c in reports[0].checks]:
        cands = [r[name] for r in reports]
        worst = max(cands, key=lambda c: (not c.passed, c.residual if c.residual is not None else 0.0))
        out.checks.append(worst)
    return out


def run_config(cfg: dict) -> VerificationReport:
    """Dispatch one configuration to its pipeline."""
    pipeline = cfg.get("pipeline")
    if pipeline not in PIPELINES:
        raise ConfigError(f"unknown pipeline {pipeline!r}; available: {', '.join(PIPELINES)}")
    missing = [k for k in REQUIRED[pipeline] if cfg.get(k) is None]
    if missing:
        raise ConfigError(f"pipeline {pipeline} needs {', '.join('--' + m for m in missing)}")
    tol = cfg.get("tol")
    tol = Tolerance(tol, tol) if tol is not None else None
    seed = cfg.get("seed", DEFAULT_SEED)
    samples = max(1, int(cfg.get("samples") or 1))
    inputs = {k: cfg[k] for k in ("pipeline", "algebra", "file", *PARAMS, "samples", "seed", "tol")
              if cfg.get(k) is not None}

    if pipeline == "validate-algebra":
        return _validate(_algebra(cfg), inputs)
    if pipeline == "appendix-gxg":
        from .product import ProductParams, run_product_family
        lam = cfg.get("lambda")
        try:
            p = ProductParams(cfg["a"], cfg["b"], cfg["c"], cfg["d"], 1.0 if lam is None else lam)
        except ValueError as exc:
            if isinstance(exc, DegenerateParameters):
                raise
            raise ConfigError(str(exc)) from exc
        rep = run_product_family(p, _algebra(cfg), tol)
    else:
        from .tangent import TangentMetricParams
        p = TangentMetricParams(float(cfg["a"]), float(cfg["b"]))
        if pipeline == "tangent":
            from .tangent import run_tangent_family
            rep = run_tangent_family(_algebra(cfg), p, tol)
        elif pipeline == "direct-product-crosscheck":
            from .tangent import run_isometry_crosscheck
            rep = run_isometry_crosscheck(_algebra(cfg), p, tol)
        elif pipeline == "s7":
            from .clifford import build_clifford, ts7_pipeline
            rep7 = build_clifford(7)
            pts = sphere_points(seed, samples)
            reps = [ts7_pipeline(rep7, p, x, cfg.get("convention") or "vector-field") for x in pts]
            rep = _merge(reps, pipeline, inputs) if samples > 1 else reps[0]
        else:
            from .clifford import spinor_structure_check
            rep = spinor_structure_check(p, seed=seed)
    rep.inputs = {**inputs, **{k: v for k, v in rep.inputs.items() if k not in inputs}}
    return rep


def _validate(g, inputs) -> VerificationReport:
    from .lie import validate_structure
    from .tangent import derived_dim
    d = validate_structure(g.table, tol=Tolerance(1e-9, 1e-9))
    rep = VerificationReport("validate-algebra", {**inputs, "name": g.name})
    rep.below("jacobi", d.jacobi, 1e-9)
    rep.below("antisymmetry", d.antisymmetry, 1e-9)
    if d.total_skew is not None:
        rep.below("total_skew", d.total_skew, 1e-9, note="declared compact")
    rep.info.update({"dim": g.dim, "center_dim": int(center(g).shape[0]), "derived_dim": derived_dim(g.C),
                     "provenance": g.provenance})
    return rep


def _timed(cfg: dict) -> VerificationReport:
    t0 = time.perf_counter()
    rep = run_config(cfg)
    rep.wall_time = time.perf_counter() - t0
    return rep


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


# sweeps ----------------------------------------------------------------------

def parse_grid(spec: str) -> list[dict]:
    """``"a=0.5,1,2;b=-1,0,1"`` -> cartesian product in the given order."""
    spec = (spec or "").strip()
    if not spec:
        return []
    axes = []
    for part in spec.split(";"):
        if not part.strip():
            continue
        key, _, vals = part.partition("=")
        key = key.strip()
        if key not in PARAMS:
            raise ConfigError(f"grid parameter {key!r} is not one of {', '.join(PARAMS)}")
        try:
            values = [float(v) for v in vals.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad grid values for {key}: {exc}") from exc
        axes.append((key, values))
    return [dict(zip([k for k, _ in axes], combo)) for combo in itertools.product(*[v for _, v in axes])]


def random_points(pipeline: str, seed: int, count: int) -> list[dict]:
    """Seeded parameter sets; point k depends only on (seed, k)."""
    out = []
    for k in range(count):
        g = stream(seed, k)
        if pipeline == "appendix-gxg":
            from .product import ProductParams
            while True:
                a, b, c, d = (float(v) for v in g.uniform(-3, 3, size=4))
                lam = float(g.uniform(0.5, 2.0))
                if abs(ProductParams(a, b, c, d, lam).delta) > 1e-3:
                    break
            out.append({"a": a, "b": b, "c": c, "d": d, "lambda": lam})
        else:
            a = float(g.uniform(0.25, 3.0) * g.choice([-1.0, 1.0]))
            out.append({"a": a, "b": float(g.uniform(-3.0, 3.0))})
    return out


def _point(cfg: dict) -> dict:
    try:
        rep = _timed(cfg)
        return {"status": 0 if rep.passed else 1, "report": rep.to_dict()}
    except DegenerateParameters as exc:
        return {"status": 3, "error": str(exc)}
    except (ConfigError, AlgebraError) as exc:
        return {"status": 2, "error": str(exc)}


_HEADLINE = ("curvature_scalar", "curvature_vs_sigma_projected", "curvature_coefficient")


def _row(params: dict, res: dict) -> dict:
    row = {k: params.get(k, "") for k in PARAMS}
    row["status"] = res["status"]
    rep = res.get("report")
    if rep is None:
        row.update(curvature="", holonomy_dim="", flat="", max_residual="", failures=res.get("error", ""))
        return row
    checks = {c["name"]: c for c in rep["checks"]}
    row["curvature"] = next((checks[n]["value"] for n in _HEADLINE if n in checks), "")
    row["holonomy_dim"] = checks["holonomy_dim"]["value"] if "holonomy_dim" in checks else ""
    # pipelines add this check exactly on the flat locus
    row["flat"] = "flat_curvature_norm" in checks
    resid = [c["residual"] for c in rep["checks"] if isinstance(c["residual"], (int, float))]
    row["max_residual"] = max(resid) if resid else ""
    row["failures"] = " ".join(c["name"] for c in rep["checks"] if not c["passed"])
    return row


def sweep(base: dict, points: list[dict], jobs: int = 1) -> dict:
    cfgs = [{**base, **pt} for pt in points]
    if jobs > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_point, cfgs))
    else:
        results = [_point(c) for c in cfgs]
    rows = [_row(pt, r) for pt, r in zip(points, results)]
    failed = [i for i, r in enumerate(results) if r["status"] != 0]
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "pipeline": base.get("pipeline"),
        "points": [{"params": pt, **r} for pt, r in zip(points, results)],
        "summary": {"count": len(points), "failed": len(failed), "failed_indices": failed, "rows": rows},
    }


def sweep_status(doc: dict) -> int:
    statuses = {p["status"] for p in doc["points"]}
    for s in (2, 3, 1):
        if s in statuses:
            return s
    return 0


def strip_time(doc):
    if isinstance(doc, dict):
        return {k: strip_time(v) for k, v in doc.items() if k != "wall_time"}
    if isinstance(doc, list):
        return [strip_time(v) for v in doc]
    return doc


def _sweep_text(doc: dict) -> str:
    lines = [f"sweep {doc['pipeline']}: {doc['summary']['count']} points, {doc['summary']['failed']} failed"]
    for row in doc["summary"]["rows"]:
        params = " ".join(f"{k}={row[k]}" for k in PARAMS if row[k] != "")
        flag = {0: "PASS", 1: "FAIL", 2: "CONFIG", 3: "DEGENERATE"}[row["status"]]
        extra = " flat" if row["flat"] is True else ""
        extra += f" failures: {row['failures']}" if row["failures"] else ""
        lines.append(f"[{flag}] {params} curvature={row['curvature']} holonomy_dim={row['holonomy_dim']}{extra}")
    return "\n".join(lines)


def _write_csv(path: str, rows: list[dict]):
    cols = [*PARAMS, "status", "curvature", "holonomy_dim", "flat", "max_residual", "failures"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        w.writerows(rows)


# argument parsing --------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--algebra", help=f"preset name ({', '.join(catalog())})")
    common.add_argument("--file", help="algebra JSON file (1-based entries [i, j, k, value])")
    for k in ("a", "b", "c", "d"):
        common.add_argument(f"--{k}", type=float)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--samples", type=int, default=1)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--tol", type=float)
    common.add_argument("--convention", choices=("vector-field", "commutator"), default="vector-field",
                        help="bracket sign on S^7 (s7 pipeline)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", help="write the report here instead of stdout")

    ap = argparse.ArgumentParser(prog="natred", description="Verify characteristic connections of "
                                 "naturally reductive left-invariant structures.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run one pipeline")
    r.add_argument("--pipeline", required=True, choices=PIPELINES)
    s = sub.add_parser("sweep", parents=[common], help="run a pipeline over a parameter grid")
    s.add_argument("--pipeline", required=True, choices=PIPELINES)
    s.add_argument("--grid", help='cartesian grid, e.g. "a=0.5,1,2;b=-1,0,1"; without it --samples '
                                  "seeded random points are used")
    s.add_argument("--csv", help="write a summary table")
    s.add_argument("--jobs", type=int, default=1)
    sub.add_parser("validate", parents=[common], help="check an algebra's structure constants")
    return ap


def _config(ns) -> dict:
    cfg = {"pipeline": getattr(ns, "pipeline", "validate-algebra"), "algebra": ns.algebra, "file": ns.file,
           "a": ns.a, "b": ns.b, "c": ns.c, "d": ns.d, "lambda": ns.lam, "samples": ns.samples,
           "seed": ns.seed, "tol": ns.tol}
    if cfg["pipeline"] == "s7" and ns.convention != "vector-field":
        cfg["convention"] = ns.convention
    return cfg


def main(argv=None) -> int:
    ns = _parser().parse_args(argv)
    cfg = _config(ns)
    try:
        if ns.command == "sweep":
            if ns.grid is not None:
                points = parse_grid(ns.grid)
            else:
                points = random_points(cfg["pipeline"], cfg["seed"], ns.samples)
            base = {k: v for k, v in cfg.items() if k != "samples"}
            doc = sweep(base, points, ns.jobs)
            if ns.csv:
                _write_csv(ns.csv, doc["summary"]["rows"])
            _emit(dumps(doc) if ns.format == "json" else _sweep_text(doc), ns.out)
            return sweep_status(doc)
        rep = _timed(cfg)
    except DegenerateParameters as exc:
        print(f"natred: degenerate parameters: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, AlgebraError) as exc:
        print(f"natred: {exc}", file=sys.stderr)
        return 2
    _emit(rep.to_json() if ns.format == "json" else rep.to_text(), ns.out)
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
