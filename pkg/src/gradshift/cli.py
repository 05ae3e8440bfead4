"""Command-line front end: analyze, rule, diff, variance-map, verify.

All numeric output is emitted with 17 significant digits so that reruns with
the same configuration and seed are byte-identical and round-trip exactly.

Exit codes: 0 success, 2 input error, 3 singular/numerical failure,
4 verification failures.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    EmptyGapSet,
    GapMismatchWarning,
    GradshiftError,
    InsufficientStencils,
    InternalConsistencyError,
    InvalidPauliCharacter,
    NonHermitianInput,
    NonUnitaryInput,
    ShiftSelectionFailure,
    SingularSystem,
)
from .gates import resolve_generator
from .rules import (
    ShiftRule,
    closed_s1,
    closed_s2,
    closed_s3,
    default_shifts,
    real_symmetric_rule,
    symmetric_rule,
    triangulation_general,
    triangulation_s1,
)
from .sampling import estimate_derivative, figure_preset, variance_grid
from .sim import circuit_from_dict, evaluate_rule, exact_derivative, fd_derivative
from .spectral import HermitianOperator, diagonalize, unique_gaps
from .verify import run_checks

INPUT_ERRORS = (
    OSError,
    json.JSONDecodeError,
    KeyError,
    ValueError,
    InvalidPauliCharacter,
    NonHermitianInput,
    DimensionMismatch,
    NonUnitaryInput,
    InsufficientStencils,
)
NUMERICAL_ERRORS = (
    SingularSystem,
    ShiftSelectionFailure,
    ConvergenceFailure,
    EmptyGapSet,
    InternalConsistencyError,
)

_PI_RE = re.compile(r"^([+-]?[0-9.eE]*)\s*pi\s*(?:/\s*([0-9.eE+-]+))?$", re.IGNORECASE)


def parse_shift(text: str) -> float:
    """Parse a float with optional pi literal: '0.8pi', 'pi/2', '-pi', '1.5'."""
    t = str(text).strip()
    m = _PI_RE.match(t)
    if m:
        coeff = m.group(1)
        if coeff in ("", "+"):
            num = 1.0
        elif coeff == "-":
            num = -1.0
        else:
            num = float(coeff)
        val = num * math.pi
        if m.group(2):
            val /= float(m.group(2))
        return val
    return float(t)


def parse_float_list(text: str) -> list[float]:
    return [parse_shift(v) for v in str(text).split(",") if v.strip() != ""]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return format(f, ".17g") if math.isfinite(f) else json.dumps(f)
    raise TypeError(f"unexpected scalar {type(v)}")


def dumps17(obj, indent: int = 0) -> str:
    """JSON text with every float rendered at 17 significant digits."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{inner}{json.dumps(str(k))}: {dumps17(v, indent + 1)}"
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            return "[]"
        items = [f"{inner}{dumps17(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    return _fmt(obj)


@dataclass
class RunConfig:
    """Validated invocation parameters for one CLI run."""

    command: str
    generator: str | None = None
    gaps: list | None = None
    method: str | None = None
    shifts: list | None = None
    circuit: str | None = None
    rule: str | None = None
    x: float = 0.0
    shots: int | None = None
    seed: int = 0
    oracle: bool = False
    grid: str | None = None
    preset: str | None = None
    out: str | None = None
    name_filter: str | None = None
    gap_tolerance: float | None = None

    def validate(self) -> "RunConfig":
        for path in (self.circuit, self.rule):
            if path is not None and not os.access(path, os.R_OK):
                raise OSError(f"cannot read {path!r}")
        if self.out is not None:
            parent = os.path.dirname(os.path.abspath(self.out))
            if not os.access(parent, os.W_OK):
                raise OSError(f"cannot write into {parent!r}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        return self


def _resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    return int(os.environ.get("GRADSHIFT_SEED", "0"))


def _load_generator(source: str) -> HermitianOperator:
    if ":" in source and not os.path.exists(source):
        return resolve_generator(source)
    with open(source) as fh:
        return HermitianOperator.from_dict(json.load(fh))


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def cmd_analyze(cfg: RunConfig) -> int:
    generator = _load_generator(cfg.generator)
    spectrum = diagonalize(generator)
    d = generator.dim
    try:
        gapset = unique_gaps(spectrum, cfg.gap_tolerance)
        gaps = [float(g) for g in gapset.gaps]
        mult = [int(m) for m in gapset.multiplicities]
    except EmptyGapSet:
        gaps, mult = [], []
    report = {
        "eigenvalues": [float(v) for v in spectrum.eigenvalues],
        "gaps": gaps,
        "multiplicities": mult,
        "S": len(gaps),
        "S_max": d * (d - 1) // 2,
    }
    _emit(dumps17(report), cfg.out)
    return 0


def build_rule(gaps, method: str, shifts=None, x: float = 0.0) -> ShiftRule:
    """Construct a rule by method name (the CLI/JSON dispatch table)."""
    method = method.lower()
    g = np.sort(np.atleast_1d(np.asarray(gaps, dtype=float)))
    if method in ("symmetric", "symmetric-general"):
        return symmetric_rule(g, shifts)
    if method == "closed-s1":
        if g.size != 1:
            raise ValueError("closed-s1 needs exactly one gap")
        d = shifts[0] if shifts else float(default_shifts(g)[0])
        return closed_s1(g[0], d)
    if method == "triangulation-s1":
        if g.size != 1:
            raise ValueError("triangulation-s1 needs exactly one gap")
        if shifts is None:
            d = float(default_shifts(g)[0])
            shifts = (d, -d, 0.0)
        if len(shifts) != 3:
            raise ValueError("triangulation-s1 needs exactly three shifts")
        return triangulation_s1(g[0], shifts)
    if method == "closed-s2":
        if g.size != 2:
            raise ValueError("closed-s2 needs exactly two gaps")
        return closed_s2(g, shifts if shifts is not None else default_shifts(g))
    if method == "closed-s3":
        if g.size != 3:
            raise ValueError("closed-s3 needs exactly three gaps")
        return closed_s3(g, shifts if shifts is not None else default_shifts(g))
    if method == "triangulation-general":
        return triangulation_general(g, shifts, x=x)
    if method == "real-symmetric":
        return real_symmetric_rule(g, shifts, x=x)
    raise ValueError(f"unknown rule method {method!r}")


def _gaps_for_rule(cfg: RunConfig):
    if cfg.gaps is not None:
        return np.asarray(cfg.gaps, dtype=float)
    if cfg.generator is not None:
        generator = _load_generator(cfg.generator)
        return unique_gaps(diagonalize(generator), cfg.gap_tolerance).gaps
    raise ValueError("need --gaps or --generator to build a rule")


def cmd_rule(cfg: RunConfig) -> int:
    gaps = _gaps_for_rule(cfg)
    rule = build_rule(gaps, cfg.method or "symmetric-general", cfg.shifts, x=cfg.x)
    _emit(dumps17(rule.to_dict()), cfg.out)
    return 0


def cmd_diff(cfg: RunConfig) -> int:
    with open(cfg.circuit) as fh:
        circuit = circuit_from_dict(json.load(fh))
    if cfg.rule is not None:
        with open(cfg.rule) as fh:
            rule = ShiftRule.from_dict(json.load(fh))
    else:
        try:
            gaps = unique_gaps(diagonalize(circuit.generator), cfg.gap_tolerance).gaps
        except EmptyGapSet:
            gaps = None
        if gaps is None:
            report = {"x": cfg.x, "value": 0.0, "warnings": ["constant generator"]}
            _emit(dumps17(report), cfg.out)
            return 0
        rule = build_rule(gaps, cfg.method or "symmetric-general", cfg.shifts, x=cfg.x)
    caught: list[str] = []
    with warnings.catch_warnings(record=True) as wlist:
        warnings.simplefilter("always")
        value = evaluate_rule(circuit, cfg.x, rule)
        caught = [str(w.message) for w in wlist if issubclass(w.category, GapMismatchWarning)]
    report = {
        "x": cfg.x,
        "method": rule.method,
        "value": value,
        "rule": rule.to_dict(),
        "warnings": caught,
    }
    if cfg.oracle:
        exact = exact_derivative(circuit, cfg.x)
        fd = fd_derivative(circuit, cfg.x)
        report["oracle"] = {
            "exact": exact,
            "fd": fd,
            "abs_error_exact": abs(value - exact),
            "abs_error_fd": abs(value - fd),
            "agrees": abs(value - exact) <= 1e-8,
        }
    if cfg.shots is not None:
        est = estimate_derivative(circuit, cfg.x, rule, cfg.shots, cfg.seed)
        report["estimate"] = est.to_dict()
    _emit(dumps17(report), cfg.out)
    return 0


def _parse_axis(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"axis spec must be start:stop:count, got {spec!r}")
    start, stop = parse_shift(parts[0]), parse_shift(parts[1])
    count = int(parts[2])
    if count < 2:
        raise ValueError("axis needs at least 2 points")
    return np.linspace(start, stop, count)


def cmd_variance_map(cfg: RunConfig) -> int:
    if cfg.preset is not None:
        grid = figure_preset(cfg.preset)
    else:
        if cfg.gaps is None or cfg.grid is None:
            raise ValueError("need --preset, or --gaps with --grid")
        axes = [_parse_axis(a) for a in cfg.grid.split(",")]
        family = {"triangulation-s1": "triangulation"}.get(
            cfg.method or "symmetric", cfg.method or "symmetric"
        )
        grid = variance_grid(
            cfg.gaps,
            axes[0],
            axes[1] if len(axes) > 1 else None,
            family=family,
        )
    meta = dumps17(grid.metadata())
    if cfg.out is None:
        sys.stdout.write(grid.csv_text())
        sys.stderr.write(meta + "\n")
    else:
        grid.to_csv(cfg.out)
        with open(cfg.out + ".meta.json", "w") as fh:
            fh.write(meta + "\n")
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    results = run_checks(cfg.name_filter)
    if not results:
        sys.stderr.write(f"no checks match filter {cfg.name_filter!r}\n")
        return 2
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        sys.stdout.write(f"[{status}] {r.name}: {r.detail} ({r.seconds:.1f}s)\n")
    summary = {
        "passed": sum(r.passed for r in results),
        "failed": sum(not r.passed for r in results),
        "checks": [r.to_dict() for r in results],
    }
    if cfg.out is not None:
        _emit(dumps17(summary), cfg.out)
    return 0 if summary["failed"] == 0 else 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradshift",
        description="Derivative rules for parameterized unitaries with "
        "arbitrary Hermitian generators, from spectral-gap analysis.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="spectrum and gap report of a generator")
    p.add_argument("--generator", required=True, help="catalog token or JSON file")
    p.add_argument("--gap-tolerance", type=float, default=None)
    p.add_argument("--out")

    p = sub.add_parser("rule", help="construct a shift rule")
    p.add_argument("--gaps", help="comma-separated gap values")
    p.add_argument("--generator", help="catalog token or JSON file")
    p.add_argument("--method", default="symmetric-general")
    p.add_argument("--shifts", help="comma-separated shifts; pi literals allowed")
    p.add_argument("--x", default="0", help="evaluation point for point-built rules")
    p.add_argument("--gap-tolerance", type=float, default=None)
    p.add_argument("--out")

    p = sub.add_parser("diff", help="differentiate a circuit at a point")
    p.add_argument("--circuit", required=True, help="CircuitSpec JSON file")
    p.add_argument("--x", required=True, help="evaluation point; pi literals allowed")
    p.add_argument("--method", default="symmetric-general")
    p.add_argument("--shifts")
    p.add_argument("--rule", help="ShiftRule JSON file (overrides --method)")
    p.add_argument("--oracle", action="store_true", help="also report exact and fd values")
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--gap-tolerance", type=float, default=None)
    p.add_argument("--out")

    p = sub.add_parser("variance-map", help="shot-noise variance landscape CSV")
    p.add_argument("--preset", choices=("fig2a", "fig2b", "fig3"))
    p.add_argument("--gaps")
    p.add_argument("--method", default="symmetric", help="symmetric or triangulation")
    p.add_argument("--grid", help="axis specs start:stop:count[,start:stop:count]")
    p.add_argument("--out")

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--filter", dest="name_filter", default=None)
    p.add_argument("--out")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    get = lambda k, d=None: getattr(args, k, d)
    return RunConfig(
        command=args.command,
        generator=get("generator"),
        gaps=parse_float_list(get("gaps")) if get("gaps") else None,
        method=get("method"),
        shifts=parse_float_list(get("shifts")) if get("shifts") else None,
        circuit=get("circuit"),
        rule=get("rule"),
        x=parse_shift(get("x", "0") or "0"),
        shots=get("shots"),
        seed=_resolve_seed(get("seed")),
        oracle=bool(get("oracle", False)),
        grid=get("grid"),
        preset=get("preset"),
        out=get("out"),
        name_filter=get("name_filter"),
        gap_tolerance=get("gap_tolerance"),
    ).validate()


HANDLERS = {
    "analyze": cmd_analyze,
    "rule": cmd_rule,
    "diff": cmd_diff,
    "variance-map": cmd_variance_map,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return HANDLERS[cfg.command](cfg)
    except NUMERICAL_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3
    except INPUT_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except GradshiftError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
