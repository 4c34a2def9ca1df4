"""Command-line front end: load a manifold description, run computations and checks, emit reports.

A manifold file is UTF-8 JSON::

    {"dim": 2,
     "gamma": {"1,2,2": "x1"},          # Gamma^h_{ij} keyed "h,i,j"
     "metric": {"1,1": "1"},            # optional g_{ij}
     "derive_connection": false,        # take Gamma from the metric instead
     "c": {"1,1": "x2"},                # c_{ij}, default zero
     "J": {"2,1": "1", "1,2": "-1"}}    # optional J^i_j keyed "i,j"

Indices are 1-based and omitted components are zero. Symmetric tables accept
either order of their symmetric pair; two keys naming the same component must agree.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence, TextIO

from . import connection as conn
from .basegeo import BaseGeometry, GeometryError, levi_civita_base
from .geoflow import (GeodesicState, IntegrationPoleError, IntegratorConfig, energy_along_curve,
                      integrate_geodesic, write_trajectory_csv)
from .symexpr import ParseError, RationalFunction, parse_field
from .tensor import DOWN, UP, Frame, TensorField, coordinates, frame_transform
from .verify import (CheckReport, Workbench, all_passed, check_suite, condition_suite, index_labels,
                     kahler_norden_check, random_geometry, remark_suite, ricci_flat_check)

COMMANDS = ("tensor", "check", "conditions", "kahler", "geodesic", "report")
OBJECTS = ("curvature", "ricci", "scalar", "weyl", "projective", "connection", "metric-connection")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_POLE = 3

_KEYS = {"dim", "gamma", "metric", "derive_connection", "c", "J"}


class SpecError(ValueError):
    """The manifold file is malformed or violates a structural rule."""


@dataclass(frozen=True, eq=False)
class ManifoldSpec:
    dim: int
    geometry: BaseGeometry
    source: str = ""


def _parse_key(table: str, key: str, arity: int, n: int) -> tuple[int, ...]:
    parts = key.split(",")
    try:
        idx = tuple(int(s.strip()) for s in parts)
    except ValueError:
        raise SpecError(f"{table}[{key!r}]: index must be comma-separated integers") from None
    if len(idx) != arity:
        raise SpecError(f"{table}[{key!r}]: expected {arity} indices, got {len(idx)}")
    if any(not 1 <= a <= n for a in idx):
        raise SpecError(f"{table}[{key!r}]: indices must lie in 1..{n}")
    return tuple(a - 1 for a in idx)


def _parse_table(data: Mapping, table: str, arity: int, n: int, symmetric_slots: Optional[tuple[int, int]]
                 ) -> dict[tuple[int, ...], RationalFunction]:
    raw = data.get(table) or {}
    if not isinstance(raw, Mapping):
        raise SpecError(f"{table}: expected an object mapping index keys to expressions")
    variables = coordinates(n)
    out: dict[tuple[int, ...], RationalFunction] = {}
    origin: dict[tuple[int, ...], str] = {}
    for key in sorted(raw):
        text = raw[key]
        if isinstance(text, (int, float)) and not isinstance(text, bool):
            text = str(text)
        if not isinstance(text, str):
            raise SpecError(f"{table}[{key!r}]: expression must be a string")
        idx = _parse_key(table, key, arity, n)
        try:
            value = parse_field(text, variables)
        except ParseError as exc:
            raise SpecError(f"{table}[{key!r}]: {exc}") from exc
        fiber = sorted(value.free_variables() - set(variables[:n]))
        if fiber:
            raise SpecError(f"{table}[{key!r}]: base field mentions fiber variable {fiber[0]}")
        images = {idx}
        if symmetric_slots is not None:
            a, b = symmetric_slots
            swapped = list(idx)
            swapped[a], swapped[b] = swapped[b], swapped[a]
            images.add(tuple(swapped))
        for target in images:
            if target in out and out[target] != value:
                raise SpecError(f"{table}: keys {origin[target]!r} and {key!r} give conflicting values "
                                f"for the same component")
            out[target] = value
            origin.setdefault(target, key)
    return out


def parse_spec(data: Mapping[str, Any], source: str = "") -> ManifoldSpec:
    """Validate a decoded manifold description and build its base geometry."""
    if not isinstance(data, Mapping):
        raise SpecError("top level must be a JSON object")
    unknown = sorted(set(data) - _KEYS)
    if unknown:
        raise SpecError(f"unknown key {unknown[0]!r}; allowed keys are {', '.join(sorted(_KEYS))}")
    n = data.get("dim")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise SpecError("dim must be a positive integer")
    derive = data.get("derive_connection", False)
    if not isinstance(derive, bool):
        raise SpecError("derive_connection must be true or false")
    v = coordinates(n)
    gamma = _parse_table(data, "gamma", 3, n, (1, 2))
    metric = _parse_table(data, "metric", 2, n, (0, 1)) if "metric" in data else None
    c = _parse_table(data, "c", 2, n, (0, 1))
    J = _parse_table(data, "J", 2, n, None) if "J" in data else None
    if derive and metric is None:
        raise SpecError("derive_connection needs a metric table")
    if derive and gamma:
        raise SpecError("give either a gamma table or derive_connection, not both")
    try:
        g_field = None if metric is None else TensorField.from_entries(n, (DOWN, DOWN), Frame.BASE, v, metric)
        gamma_field = (levi_civita_base(g_field) if derive
                       else TensorField.from_entries(n, (UP, DOWN, DOWN), Frame.BASE, v, gamma))
        geom = BaseGeometry(
            n, gamma_field,
            TensorField.from_entries(n, (DOWN, DOWN), Frame.BASE, v, c),
            g_field,
            None if J is None else TensorField.from_entries(n, (UP, DOWN), Frame.BASE, v, J),
        )
    except GeometryError as exc:
        raise SpecError(str(exc)) from exc
    return ManifoldSpec(n, geom, source)


def load_spec(path: str | Path) -> ManifoldSpec:
    """Read and validate a manifold file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_spec(data, str(path))


def random_spec(n: int, seed: int) -> ManifoldSpec:
    return ManifoldSpec(n, random_geometry(seed, n), f"random:{n}")


# -- output ------------------------------------------------------------------------------

def _frame_labels(idx: Sequence[int], n: int) -> str:
    return ",".join(index_labels(idx, n, True))


def tensor_object(wb: Workbench, name: str, frame: Frame) -> TensorField:
    """The requested total-space object in the adapted or induced frame."""
    geom = wb.geom
    if name == "scalar":
        return TensorField.scalar(wb.total.scalar, frame, 2 * wb.n, geom.variables)
    if name in ("connection", "metric-connection"):
        table = (wb.total.connection.coefficients if name == "connection"
                 else wb.metric_connection.connection.coefficients)
        if frame is Frame.INDUCED:
            return conn.transform_connection_to_induced(table, wb.frame)
        return table
    tensors = {
        "curvature": lambda: wb.total.curvature.mixed,
        "ricci": lambda: wb.total.ricci,
        "weyl": lambda: wb.weyl,
        "projective": lambda: wb.projective,
    }
    if name not in tensors:
        raise SpecError(f"unknown object {name!r}; expected one of {', '.join(OBJECTS)}")
    t = tensors[name]()
    return t if frame is Frame.ADAPTED else frame_transform(t, Frame.INDUCED, geom.gamma)


def tensor_to_dict(name: str, t: TensorField, n: int) -> dict:
    return {
        "object": name,
        "frame": t.frame.value,
        "valence": list(t.valence),
        "variables": list(t.variables),
        "components": {_frame_labels(idx, n): v.to_text() for idx, v in t.nonzero()},
    }


def tensor_to_text(name: str, t: TensorField, n: int) -> str:
    if t.rank == 0:
        return t.scalar_value().to_text()
    lines = [f"{name}[{_frame_labels(idx, n)}] = {v.to_text()}" for idx, v in t.nonzero()]
    return "\n".join(lines) if lines else "0"


def report_lines(report: CheckReport, depth: int = 0) -> list[str]:
    pad = "  " * depth
    line = f"{pad}[{report.verdict}] {report.name}"
    if report.witness is not None:
        line += f"  witness ({','.join(report.witness.index)}) = {report.witness.value.to_text()}"
    if report.detail:
        line += f"  ({report.detail})"
    out = [line]
    for part in report.parts:
        out.extend(report_lines(part, depth + 1))
    return out


def reports_to_json(reports: Sequence[CheckReport]) -> list[dict]:
    return [r.to_dict() for r in reports]


def reports_from_json(data: Sequence[Mapping]) -> list[CheckReport]:
    return [CheckReport.from_dict(d) for d in data]


# -- commands ------------------------------------------------------------------------------

def _state_from_options(n: int, opts: argparse.Namespace) -> GeodesicState:
    def vec(name):
        values = getattr(opts, name)
        if values is None:
            return (0.0,) * n
        if len(values) != n:
            raise SpecError(f"--{name} needs {n} values, got {len(values)}")
        return tuple(values)

    return GeodesicState(vec("x0"), vec("v0"), vec("p0"), vec("q0"))


def _emit_reports(sections: Mapping[str, Sequence[CheckReport]], opts, out: TextIO) -> int:
    every = [r for reps in sections.values() for r in reps]
    ok = all_passed(every)
    if opts.format == "json":
        payload = {name: reports_to_json(reps) for name, reps in sections.items()}
        payload["all_passed"] = ok
        json.dump(payload, out, indent=2)
        out.write("\n")
    else:
        for name, reps in sections.items():
            if len(sections) > 1:
                out.write(f"== {name} ==\n")
            for r in reps:
                out.write("\n".join(report_lines(r)) + "\n")
        out.write(f"{'all checks passed' if ok else 'some checks failed'}\n")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _geodesic(spec: ManifoldSpec, opts, out: TextIO, err: TextIO) -> int:
    state0 = _state_from_options(spec.dim, opts)
    config = IntegratorConfig(opts.step, opts.steps)
    try:
        trajectory = integrate_geodesic(spec.geometry, state0, config)
    except IntegrationPoleError as exc:
        err.write(f"error: {exc}; last good state x={exc.state.x} p={exc.state.p}\n")
        return EXIT_POLE
    energies = energy_along_curve(spec.geometry, trajectory)
    if opts.out:
        with open(opts.out, "w", encoding="utf-8", newline="") as fh:
            write_trajectory_csv(fh, trajectory, energies)
        drift = max(abs(e - energies[0]) for e in energies)
        err.write(f"wrote {len(trajectory)} samples to {opts.out}; max energy drift {drift:.3e}\n")
    else:
        write_trajectory_csv(out, trajectory, energies)
    return EXIT_OK


def run_command(command: str, spec: ManifoldSpec, opts: argparse.Namespace,
                out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    """Run one command; the return value is the process exit code."""
    out = out or sys.stdout
    err = err or sys.stderr
    wb = Workbench(spec.geometry)
    if command == "tensor":
        frame = Frame.INDUCED if opts.frame == "induced" else Frame.ADAPTED
        t = tensor_object(wb, opts.object, frame)
        if opts.format == "json":
            json.dump(tensor_to_dict(opts.object, t, spec.dim), out, indent=2)
            out.write("\n")
        else:
            out.write(tensor_to_text(opts.object, t, spec.dim) + "\n")
        return EXIT_OK
    if command == "check":
        return _emit_reports({"check": check_suite(wb)}, opts, out)
    if command == "conditions":
        return _emit_reports({"conditions": condition_suite(wb)}, opts, out)
    if command == "kahler":
        if spec.geometry.J is None:
            raise SpecError("the kahler command needs a J table")
        if spec.geometry.metric is None:
            raise SpecError("the kahler command needs a metric table")
        try:
            reports = kahler_norden_check(wb)
        except GeometryError as exc:
            raise SpecError(str(exc)) from exc
        return _emit_reports({"kahler": reports}, opts, out)
    if command == "geodesic":
        return _geodesic(spec, opts, out, err)
    if command == "report":
        sections = {
            "check": check_suite(wb),
            "conditions": condition_suite(wb),
            "ricci-flatness": [ricci_flat_check(wb)],
            "remarks": remark_suite(wb),
        }
        g = spec.geometry
        if g.J is not None and g.metric is not None:
            try:
                sections["kahler"] = kahler_norden_check(wb)
            except GeometryError as exc:
                err.write(f"kahler checks skipped: {exc}\n")
        return _emit_reports(sections, opts, out)
    raise SpecError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrext",
        description="Exact curvature computations and theorem checks for modified Riemannian extensions.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("spec", help="manifold JSON file, or random:N for a random base of dimension N (see --seed)")
    parser.add_argument("--object", choices=OBJECTS, default="curvature", help="object printed by 'tensor'")
    parser.add_argument("--frame", choices=("adapted", "induced"), default="adapted")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    for name, label in (("x0", "base point"), ("v0", "base velocity"), ("p0", "fiber point"),
                        ("q0", "covariant fiber velocity")):
        parser.add_argument(f"--{name}", type=float, nargs="+", help=f"initial {label} (default zeros)")
    parser.add_argument("--step", type=float, default=1e-3)
    parser.add_argument("--steps", type=int, default=1000)
    parser.add_argument("--out", help="CSV destination for 'geodesic' (default stdout)")
    parser.add_argument("--seed", type=int, default=0, help="seed for random:N specs")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    opts = build_parser().parse_args(argv)
    try:
        if opts.spec.startswith("random:"):
            try:
                n = int(opts.spec.split(":", 1)[1])
            except ValueError:
                raise SpecError(f"bad random spec {opts.spec!r}; use random:N") from None
            if n < 1:
                raise SpecError("random:N needs N >= 1")
            spec = random_spec(n, opts.seed)
        else:
            spec = load_spec(opts.spec)
        return run_command(opts.command, spec, opts)
    except (SpecError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())


__all__ = [
    "COMMANDS", "OBJECTS", "ManifoldSpec", "SpecError", "build_parser", "load_spec", "main",
    "parse_spec", "random_spec", "reports_from_json", "reports_to_json", "run_command", "tensor_object",
]
