"""Problem-file ingestion, check-suite orchestration, and report emission.

Problem files are flat JSON objects (see README for the schema).  A metric
problem carries a dimension, a trailing-span size ``r`` (optionally a
``middle`` size for the three-block form) and component expressions keyed
``g_<mu>_<nu>``; an extension problem carries ``r``, ``m``, base-connection
entries ``D_<i>_<j>_<k>``, section entries ``lambda_<mu>_<nu>``, vertical
metric entries ``h_<p>_<q>`` and an optional constant block ``g_ia``.

Verbs:

* ``check <file>``      run the requested residual checks, emit a report
* ``build <file>``      emit the built extension metric's components
* ``transport <file>``  run the transport section of the file

Reports are deterministic for a fixed (file, seed): identical runs produce
identical bytes.  Exit status is 0 exactly when the suite verdict is pass.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .chart import ChartSplit
from .distributions import (
    CheckResult,
    DistributionSpec,
    check_null,
    check_parallel,
    check_projectable,
    check_walker_form,
    curvature_condition,
    restrict_connection,
    walker_projectability,
)
from .expr import ExpressionError, parse_expression
from .extensions import (
    ExtensionSpec,
    build_pullback_extension,
    transformation_rule_residual,
    vertical_metric_fields,
)
from .corpus import random_one_form
from .sampling import sample_points
from .tensor import MetricField, SymbolicConnection, christoffel
from .transport import CurveSpec, parallel_transport, projection_commutes_residual

__all__ = ["ProblemSpec", "Report", "CheckRecord", "SpecFormatError", "load_spec",
           "run_checks", "run_transport", "build_components", "main"]

_METRIC_KEY = re.compile(r"^g_(\d+)_(\d+)$")
_CONN_KEY = re.compile(r"^D_(\d+)_(\d+)_(\d+)$")
_LAMBDA_KEY = re.compile(r"^lambda_(\d+)_(\d+)$")
_H_KEY = re.compile(r"^h_(\d+)_(\d+)$")

_COMMON_KEYS = {"kind", "checks", "samples", "seed", "tolerance", "transport"}
_METRIC_KEYS = _COMMON_KEYS | {"n", "r", "middle"}
_EXTENSION_KEYS = _COMMON_KEYS | {"r", "m", "g_ia"}

_METRIC_CHECKS = ["null", "parallel", "projectable", "curvature_condition"]
_EXTENSION_CHECKS = [
    "null",
    "parallel",
    "projectable",
    "curvature_condition",
    "projected_connection",
    "vertical_metric",
    "transformation_rule",
]


class SpecFormatError(ValueError):
    """A problem file failed to load or validate."""


@dataclass
class TransportSection:
    curve: CurveSpec
    w0: np.ndarray
    tolerance: float = 1e-6


@dataclass
class ProblemSpec:
    """Validated problem file with defaults applied."""

    kind: str
    path: str
    checks: List[str]
    samples: int = 100
    seed: int = 42
    tolerance: float = 1e-8
    metric: Optional[MetricField] = None
    extension: Optional[ExtensionSpec] = None
    transport: Optional[TransportSection] = None


@dataclass
class CheckRecord:
    """One executed check; ``wall_time`` is informational and never serialized."""

    name: str
    residual: Optional[float]
    passed: bool
    worst_point: Optional[List[float]] = None
    error: Optional[str] = None
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "residual": self.residual,
            "pass": self.passed,
            "worst_point": self.worst_point,
        }
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass
class Report:
    spec: str
    seed: int
    tolerance: float
    checks: List[CheckRecord] = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "checks": [c.to_dict() for c in self.checks],
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        lines = [
            f"spec: {self.spec}",
            f"seed: {self.seed}  tolerance: {self.tolerance!r}",
            "",
        ]
        width = max((len(c.name) for c in self.checks), default=10)
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            if c.error is not None:
                lines.append(f"{c.name:<{width}}  {status}  error: {c.error}")
                continue
            worst = ""
            if c.worst_point is not None:
                worst = "  worst: (" + ", ".join(repr(v) for v in c.worst_point) + ")"
            lines.append(f"{c.name:<{width}}  {status}  residual: {c.residual!r}{worst}")
        lines.append("")
        lines.append(f"verdict: {'PASS' if self.verdict else 'FAIL'}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------


def _require(cond: bool, message: str):
    if not cond:
        raise SpecFormatError(message)


def _parse_field(key: str, text, n: int):
    try:
        return parse_expression(str(text), n)
    except ExpressionError as exc:
        raise SpecFormatError(f"bad expression for '{key}': {exc}") from None


def _symmetric_insert(store: dict, key_pair: Tuple[int, int], value, keyname: str):
    pair = key_pair if key_pair[0] <= key_pair[1] else (key_pair[1], key_pair[0])
    if pair in store and not store[pair].same_expression(value):
        raise SpecFormatError(f"asymmetric duplicate entries for '{keyname}'")
    store[pair] = value


def load_spec(path: str) -> ProblemSpec:
    """Load and validate a problem file, applying defaults."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise SpecFormatError(f"cannot read '{path}': {exc}") from None
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"parse error in '{path}': {exc}") from None
    _require(isinstance(raw, dict), "problem file must be a JSON object")

    kind = raw.get("kind")
    _require(kind in ("metric", "extension"), "'kind' must be 'metric' or 'extension'")

    samples = int(raw.get("samples", 100))
    seed = int(raw.get("seed", 42))
    tolerance = float(raw.get("tolerance", 1e-8))
    _require(samples > 0, "'samples' must be positive")
    _require(seed >= 0, "'seed' must be non-negative")
    _require(tolerance > 0, "'tolerance' must be positive")

    if kind == "metric":
        spec = _load_metric(raw, path)
    else:
        spec = _load_extension(raw, path)
    spec.samples, spec.seed, spec.tolerance = samples, seed, tolerance

    checks = raw.get("checks")
    if checks is None:
        checks = list(_METRIC_CHECKS if kind == "metric" else _EXTENSION_CHECKS)
    _require(isinstance(checks, list) and all(isinstance(c, str) for c in checks),
             "'checks' must be a list of names")
    known = set(_EXTENSION_CHECKS) | {"walker_form", "walker_projectability"}
    for c in checks:
        _require(c in known, f"unknown check '{c}'")
        if kind == "metric":
            _require(c in _METRIC_CHECKS + ["walker_form", "walker_projectability"],
                     f"check '{c}' applies to extension problems only")
    spec.checks = checks

    if "transport" in raw:
        n = spec.metric.n if spec.metric is not None else spec.extension.n
        spec.transport = _load_transport(raw["transport"], n)
    return spec


def _load_metric(raw: dict, path: str) -> ProblemSpec:
    comp_keys = [k for k in raw if _METRIC_KEY.match(k)]
    for key in raw:
        _require(key in _METRIC_KEYS or key in comp_keys, f"unknown key '{key}'")
    _require("n" in raw, "metric problem needs 'n'")
    n = int(raw["n"])
    _require(n >= 2, "'n' must be at least 2")
    r = int(raw.get("r", 1))
    _require(0 < r < n, f"'r' must satisfy 0 < r < n={n}")
    if "middle" in raw:
        middle = int(raw["middle"])
        _require(middle == n - 2 * r, f"'middle' must equal n - 2r = {n - 2 * r}")
        chart = ChartSplit.three_block(n, r)
    else:
        chart = ChartSplit.two_block(n, r)
    comps: Dict[Tuple[int, int], object] = {}
    for key in comp_keys:
        mu, nu = (int(v) for v in _METRIC_KEY.match(key).groups())
        _require(1 <= mu <= n and 1 <= nu <= n, f"index out of range in '{key}' (n={n})")
        _symmetric_insert(comps, (mu, nu), _parse_field(key, raw[key], n), key)
    return ProblemSpec(kind="metric", path=path, checks=[], metric=MetricField(chart, comps))


def _load_extension(raw: dict, path: str) -> ProblemSpec:
    entry_keys = [k for k in raw if _CONN_KEY.match(k) or _LAMBDA_KEY.match(k) or _H_KEY.match(k)]
    for key in raw:
        _require(key in _EXTENSION_KEYS or key in entry_keys, f"unknown key '{key}'")
    _require("r" in raw and "m" in raw, "extension problem needs 'r' and 'm'")
    r, m = int(raw["r"]), int(raw["m"])
    _require(r >= 1 and m >= 0, "'r' must be >= 1 and 'm' >= 0")
    q = r + m

    conn: Dict[Tuple[int, int, int], object] = {}
    lam: Dict[Tuple[int, int], object] = {}
    for key in entry_keys:
        if (match := _CONN_KEY.match(key)) is not None:
            i, j, k = (int(v) for v in match.groups())
            _require(all(1 <= v <= r for v in (i, j, k)),
                     f"index out of range in '{key}' (r={r})")
            f = _parse_field(key, raw[key], r)
            pair = (i, j, k) if j <= k else (i, k, j)
            if pair in conn and not conn[pair].same_expression(f):
                raise SpecFormatError(f"asymmetric duplicate entries for '{key}'")
            conn[pair] = f
        elif (match := _LAMBDA_KEY.match(key)) is not None:
            mu, nu = (int(v) for v in match.groups())
            _require(1 <= mu <= q and 1 <= nu <= q, f"index out of range in '{key}' (r+m={q})")
            _require(min(mu, nu) <= r,
                     f"'{key}' lies in the middle-middle block; use h_{mu}_{nu}")
            _symmetric_insert(lam, (mu, nu), _parse_field(key, raw[key], q), key)
        else:
            p, s = (int(v) for v in _H_KEY.match(key).groups())
            _require(r < p <= q and r < s <= q,
                     f"index out of range in '{key}' (middle block is {r + 1}..{q})")
            _symmetric_insert(lam, (p, s), _parse_field(key, raw[key], q), key)

    g_ia = raw.get("g_ia")
    if g_ia is not None:
        g_ia = np.asarray(g_ia, dtype=float)
        _require(g_ia.shape == (r, r), f"'g_ia' must be an {r}x{r} array")
    try:
        ext = ExtensionSpec(r=r, m=m, base_connection=SymbolicConnection(r, conn),
                            lam=lam, g_ia=g_ia)
    except ValueError as exc:
        raise SpecFormatError(str(exc)) from None
    return ProblemSpec(kind="extension", path=path, checks=[], extension=ext)


def _load_transport(raw: dict, n: int) -> TransportSection:
    _require(isinstance(raw, dict), "'transport' must be an object")
    for key in raw:
        _require(key in {"curve", "w0", "t_span", "step", "tolerance"},
                 f"unknown transport key '{key}'")
    _require("curve" in raw and "w0" in raw, "transport section needs 'curve' and 'w0'")
    curve_exprs = raw["curve"]
    _require(isinstance(curve_exprs, list) and len(curve_exprs) == n,
             f"'curve' must list {n} component expressions")
    comps = tuple(_parse_field(f"curve[{k}]", text, 1) for k, text in enumerate(curve_exprs))
    t_span = tuple(float(v) for v in raw.get("t_span", (0.0, 1.0)))
    _require(len(t_span) == 2, "'t_span' must be [t0, t1]")
    step = float(raw.get("step", 1e-3))
    w0 = np.asarray(raw["w0"], dtype=float)
    _require(w0.shape == (n,), f"'w0' must list {n} components")
    return TransportSection(
        curve=CurveSpec(comps, t_span, step),
        w0=w0,
        tolerance=float(raw.get("tolerance", 1e-6)),
    )


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------


def _record(name: str, tolerance: float, fn) -> CheckRecord:
    start = time.perf_counter()
    try:
        result = fn()
    except Exception as exc:  # a failing clause is data, not a crash
        return CheckRecord(name=name, residual=None, passed=False,
                           error=f"{type(exc).__name__}: {exc}",
                           wall_time=time.perf_counter() - start)
    if isinstance(result, CheckResult):
        residual, worst = result.residual, result.worst_point
    else:
        residual, worst = float(result), None
    return CheckRecord(
        name=name,
        residual=residual,
        passed=residual <= tolerance,
        worst_point=None if worst is None else [float(v) for v in worst],
        wall_time=time.perf_counter() - start,
    )


def run_checks(spec: ProblemSpec) -> Report:
    """Execute the requested checks; never aborts on a failing clause."""
    report = Report(spec=spec.path, seed=spec.seed, tolerance=spec.tolerance)
    if spec.kind == "extension":
        g = build_pullback_extension(spec.extension)
    else:
        g = spec.metric
    chart = g.chart
    three_block = chart.mode == "three_block"

    try:
        pts = sample_points(g.n, spec.samples, spec.seed, metric=g)
    except RuntimeError as exc:
        report.checks.append(CheckRecord("sampling", None, False, error=str(exc)))
        return report

    conn = christoffel(g)
    dist = DistributionSpec.null_block(chart)
    ortho = DistributionSpec.orthocomplement(chart) if three_block else None
    tol = spec.tolerance

    for name in spec.checks:
        if name == "null":
            report.checks.append(_record(name, tol, lambda: check_null(g, dist, pts)))
        elif name == "parallel":
            report.checks.append(
                _record(name, tol, lambda: check_parallel(g, dist, pts, conn=conn))
            )
        elif name == "projectable":
            if three_block:
                report.checks.append(
                    _record("projectable:s=r", tol,
                            lambda: check_projectable(conn, dist, pts))
                )
                report.checks.append(
                    _record("projectable:s=n-r", tol,
                            lambda: check_projectable(conn, ortho, pts))
                )
            else:
                report.checks.append(
                    _record(name, tol, lambda: check_projectable(conn, dist, pts))
                )
        elif name == "curvature_condition":
            d = ortho if three_block else dist
            report.checks.append(
                _record(name, tol, lambda: curvature_condition(g, d, pts, conn=conn))
            )
        elif name == "walker_form":
            def _walker_rows():
                sub = check_walker_form(g, pts, tolerance=tol)
                return sub.results
            try:
                for res in _walker_rows():
                    report.checks.append(_record(f"walker_form:{res.name}", tol, lambda r=res: r))
            except Exception as exc:
                report.checks.append(CheckRecord(name, None, False,
                                                 error=f"{type(exc).__name__}: {exc}"))
        elif name == "walker_projectability":
            report.checks.append(_record(name, tol, lambda: walker_projectability(g, pts)))
        elif name == "projected_connection":
            def _proj_residual():
                projected = restrict_connection(conn, ortho)
                base_pts = pts[:, : chart.r]
                diff = projected.gamma(base_pts) - spec.extension.base_connection.gamma(base_pts)
                flat = np.max(np.abs(diff), axis=(-1, -2, -3))
                worst = int(np.argmax(flat))
                return CheckResult(name, float(flat[worst]), pts[worst])
            report.checks.append(_record(name, tol, _proj_residual))
        elif name == "vertical_metric":
            def _vertical_residual():
                fields = vertical_metric_fields(g)
                m = spec.extension.m
                r = spec.extension.r
                identical = all(
                    fields[p][q].same_expression(spec.extension.h_component(r + p + 1, r + q + 1))
                    for p in range(m)
                    for q in range(p, m)
                )
                if identical:
                    return CheckResult(name, 0.0, None)
                from .extensions import recover_vertical_metric

                hv = np.empty(pts.shape[:-1] + (m, m))
                for p in range(m):
                    for q in range(m):
                        hv[..., p, q] = spec.extension.h_component(
                            r + p + 1, r + q + 1
                        ).evaluate(pts[:, : r + m], checked=False)
                diff = np.abs(recover_vertical_metric(g, pts) - hv)
                flat = diff.reshape(len(pts), -1)
                per = flat.max(axis=1) if flat.shape[1] else np.zeros(len(pts))
                worst = int(np.argmax(per))
                return CheckResult(name, float(per[worst]), pts[worst])
            report.checks.append(_record(name, tol, _vertical_residual))
        elif name == "transformation_rule":
            def _transformation_residual():
                rng = np.random.default_rng(spec.seed)
                sub = pts[: min(20, len(pts))]
                best = CheckResult(name, 0.0, None)
                for _ in range(3):
                    omega = random_one_form(rng, spec.extension.r, spec.extension.m)
                    res = transformation_rule_residual(g, spec.extension, omega, sub)
                    if res.residual >= best.residual:
                        best = res
                return best
            report.checks.append(_record(name, tol, _transformation_residual))
        else:  # unreachable after validation
            report.checks.append(CheckRecord(name, None, False, error="unknown check"))
    return report


def run_transport(spec: ProblemSpec) -> Report:
    """Run the transport section: norm preservation, plus the projection
    comparison against the base connection for extension problems."""
    if spec.transport is None:
        raise SpecFormatError("problem file has no transport section")
    report = Report(spec=spec.path, seed=spec.seed, tolerance=spec.transport.tolerance)
    if spec.kind == "extension":
        g = build_pullback_extension(spec.extension)
    else:
        g = spec.metric
    conn = christoffel(g)
    section = spec.transport
    tol = section.tolerance

    def _norm_residual():
        res = parallel_transport(conn, section.curve, section.w0)
        gs = g.value(section.curve.positions(res.times))
        norms = np.einsum("...ij,...i,...j->...", gs, res.vectors, res.vectors)
        return float(np.max(np.abs(norms - norms[0])))

    report.checks.append(_record("transport_norm_preservation", tol, _norm_residual))

    if spec.kind == "extension":
        def _commute_residual():
            ortho = DistributionSpec.orthocomplement(g.chart)
            return projection_commutes_residual(
                g, spec.extension.base_connection, ortho, section.curve, section.w0, conn=conn
            )
        report.checks.append(_record("transport_projection_commutes", tol, _commute_residual))
    return report


def build_components(spec: ProblemSpec) -> dict:
    """Component expressions of the built extension, as a metric problem dict."""
    if spec.kind != "extension":
        raise SpecFormatError("'build' applies to extension problems only")
    g = build_pullback_extension(spec.extension)
    out = {
        "kind": "metric",
        "n": g.n,
        "r": spec.extension.r,
        "middle": spec.extension.m,
    }
    for mu in range(1, g.n + 1):
        for nu in range(mu, g.n + 1):
            comp = g.component(mu, nu)
            if not comp.is_zero:
                out[f"g_{mu}_{nu}"] = comp.to_text()
    return out


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _emit(text: str, output: Optional[str]):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="walkergeom",
        description="Residual checks for adapted-form metrics and extension builders.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, helptext in [
        ("check", "run the check suite of a problem file"),
        ("build", "emit the built extension metric's component expressions"),
        ("transport", "run the transport section of a problem file"),
    ]:
        p = sub.add_parser(verb, help=helptext)
        p.add_argument("spec", help="path to the problem file (JSON)")
        p.add_argument("--samples", type=int, default=None, help="sample-point count override")
        p.add_argument("--seed", type=int, default=None, help="sampling seed override")
        p.add_argument("--tol", type=float, default=None, help="tolerance override")
        p.add_argument("--output", default=None, help="write the report to this path")
        p.add_argument(
            "--format",
            choices=["report-text", "report-structured"],
            default="report-text",
            dest="fmt",
        )
    args = parser.parse_args(argv)

    try:
        spec = load_spec(args.spec)
        if args.samples is not None:
            _require(args.samples > 0, "--samples must be positive")
            spec.samples = args.samples
        if args.seed is not None:
            _require(args.seed >= 0, "--seed must be non-negative")
            spec.seed = args.seed
        if args.tol is not None:
            _require(args.tol > 0, "--tol must be positive")
            spec.tolerance = args.tol
            if spec.transport is not None:
                spec.transport.tolerance = args.tol

        if args.verb == "build":
            payload = build_components(spec)
            if args.fmt == "report-structured":
                _emit(json.dumps(payload, indent=2) + "\n", args.output)
            else:
                lines = [f"{k} = {v}" if k.startswith("g_") else f"{k}: {v}"
                         for k, v in payload.items()]
                _emit("\n".join(lines) + "\n", args.output)
            return 0

        report = run_checks(spec) if args.verb == "check" else run_transport(spec)
        text = report.to_json() if args.fmt == "report-structured" else report.to_text()
        _emit(text, args.output)
        return 0 if report.verdict else 1
    except SpecFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
