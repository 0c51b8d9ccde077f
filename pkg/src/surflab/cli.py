"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 configuration
or I/O error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import warnings
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np

from . import classify as cl
from . import exprlang, verify
from .families import (
    FAMILIES,
    ClippedDomainWarning,
    FamilyConfig,
    build_family,
    family_ids,
)
from .immersion import adapted_frame, analyze, generator_coefficients
from .numkit import NumericError
from .spaceforms import GeometryError
from .spacetime import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["classification_report", "load_config", "main", "mesh_csv"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CONFIG = 0, 1, 2, 3


class CliError(Exception):
    """Configuration or I/O problem (exit code 3)."""


def _fmt(x: float) -> str:
    return repr(float(x))


def _clean(obj):
    """JSON-safe copy: numpy scalars to floats and non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def _dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=1, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# configuration


def read_mapping(path: Path) -> dict:
    """Parse a TOML (``.toml``) or JSON (``.json``) file."""
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CliError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        if path.suffix == ".toml":
            return tomllib.loads(raw.decode("utf-8"))
        if path.suffix == ".json":
            data = json.loads(raw)
            if not isinstance(data, dict):
                raise CliError(f"{path}: top level must be an object")
            return data
    except (tomllib.TOMLDecodeError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CliError(f"{path}: parse error: {exc}") from None
    raise CliError(f"{path}: unsupported extension {path.suffix!r} (use .toml or .json)")


def load_config(path: str | Path) -> FamilyConfig:
    path = Path(path)
    data = read_mapping(path)
    try:
        return FamilyConfig.from_mapping(data)
    except ConfigError as exc:
        raise CliError(f"{path}: {exc}") from None


def load_config_dir(path: str | Path) -> dict[str, FamilyConfig]:
    """All configurations in a directory, keyed by family id (file stem on collisions)."""
    path = Path(path)
    if not path.is_dir():
        raise CliError(f"{path}: not a directory")
    files = sorted(p for p in path.iterdir() if p.suffix in (".toml", ".json"))
    if not files:
        raise CliError(f"{path}: no .toml or .json configurations")
    out: dict[str, FamilyConfig] = {}
    for f in files:
        cfg = load_config(f)
        key = cfg.family_id if cfg.family_id not in out else f"{cfg.family_id}:{f.stem}"
        out[key] = cfg
    return out


# ---------------------------------------------------------------------------
# outputs


def mesh_csv(cfg: FamilyConfig) -> str:
    """Mesh of a configuration as CSV text (v-major rows, shortest round-trip floats)."""
    chart = build_family(cfg)
    U, V = chart.grid(cfg.grid.nu, cfg.grid.nv)
    pts = chart(U, V)
    gc = generator_coefficients(chart, U, V)
    n = pts.shape[-1] - 1
    header = ["u", "v", *(f"x{i + 1}" for i in range(n)), "z", "E", "h1", "h2", "h3"]
    cols = [U, V, *(pts[..., i] for i in range(n + 1)), gc.E, gc.h1, gc.h2, gc.h3]
    table = np.stack([np.ravel(c) for c in cols], -1)
    buf = io.StringIO()
    buf.write(f"# family={cfg.family_id} c={cfg.c} f={exprlang.to_string(cfg.warping.f)}\n")
    buf.write(",".join(header) + "\n")
    for row in table:
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    return buf.getvalue()


def _sample_indices(nv: int, nu: int) -> list[tuple[int, int]]:
    """Centre and the four quarter points of the grid."""
    q = [(nv // 4, nu // 4), (nv // 4, (3 * nu) // 4), ((3 * nv) // 4, nu // 4), ((3 * nv) // 4, (3 * nu) // 4)]
    return [(nv // 2, nu // 2), *q]


def classification_report(cfg: FamilyConfig) -> dict[str, Any]:
    """Property flags, residual maxima, frame invariants and shape-operator samples."""
    chart = build_family(cfg)
    flags = cl.classify(chart)
    report: dict[str, Any] = {
        "family": cfg.family_id,
        "c": cfg.c,
        "warping": exprlang.to_string(cfg.warping.f),
        "params": dict(sorted(cfg.params.items())),
        "domain": [list(chart.domain[0]), list(chart.domain[1])],
        "flags": {k: f.to_dict() for k, f in flags.items()},
    }
    if flags["lightlike_T"].verdict == cl.FAIL:
        return report
    U, V = chart.grid(cfg.grid.nu, cfg.grid.nv)
    z = chart(U, V)[..., -1]
    inv = adapted_frame(chart, U, V).invariants(z, chart.warping, chart.model)
    report["frame_invariants"] = {k: float(np.max(val)) for k, val in sorted(inv.items())}
    report["structure_residuals"] = verify.check_structure_equations(chart)
    samples = []
    for i, j in _sample_indices(*U.shape):
        u, v = U[i, j], V[i, j]
        _, _, sh = analyze(chart, np.array([u]), np.array([v]))
        samples.append(
            {"u": float(u), "v": float(v), "A_e3": sh.A_e3[0], "A_e4": sh.A_e4[0], "A_H": sh.A_H[0]}
        )
    report["shape_samples"] = samples
    return report


def families_schema() -> dict[str, Any]:
    out = {}
    for fid in family_ids():
        spec = FAMILIES[fid]
        out[fid] = {
            "c": spec.c if spec.c is not None else [-1, 0, 1],
            "description": spec.description,
            "params": dict(spec.params),
            "profiles": {k: {"variable": var, "default": d} for k, (var, d) in spec.profiles.items()},
        }
    return out


# ---------------------------------------------------------------------------
# commands


def _write(text: str, dest: str | None, stdout) -> None:
    if dest is None or dest == "-":
        stdout.write(text)
        return
    try:
        Path(dest).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise CliError(f"{dest}: cannot write ({exc.strerror})") from None


def _cmd_families(args, out, err) -> int:
    schema = families_schema()
    if args.json:
        out.write(_dumps(schema))
    else:
        width = max(map(len, schema))
        for fid, s in schema.items():
            params = ", ".join(f"{k}={v:g}" for k, v in s["params"].items())
            out.write(f"{fid:<{width}}  c={s['c']}  {s['description']}" + (f"  [{params}]" if params else "") + "\n")
    return EXIT_OK


def _cmd_construct(args, out, err) -> int:
    cfg = load_config(args.config)
    _write(mesh_csv(cfg), args.out, out)
    return EXIT_OK


def _cmd_classify(args, out, err) -> int:
    cfg = load_config(args.config)
    report = classification_report(cfg)
    _write(_dumps(report), args.report, out)
    if args.report not in (None, "-"):
        for name, flag in report["flags"].items():
            out.write(f"{name}: {flag['verdict']}\n")
    return EXIT_OK


def _cmd_verify(args, out, err) -> int:
    configs = load_config_dir(args.config_dir) if args.config_dir else None
    records = verify.run_suite(args.suite, configs)
    _write(verify.report_json(records), args.report, out)
    failing = [r for r in records if r.verdict == verify.FAIL]
    for r in failing:
        err.write(f"FAIL {r.suite} {r.case}: {r.quantity} (residual {r.residual}, tolerance {r.tolerance})\n")
    counts = {v: sum(r.verdict == v for r in records) for v in ("pass", "fail", "indeterminate", "informative")}
    err.write(" ".join(f"{k}={v}" for k, v in counts.items()) + "\n")
    return EXIT_FAIL if failing else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="surflab", description="Surfaces with light-like base projection in static space-times.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("families", help="list catalog families")
    s.add_argument("--json", action="store_true", help="machine-readable parameter schema")
    s.set_defaults(func=_cmd_families)

    s = sub.add_parser("construct", help="write the mesh of a configured family as CSV")
    s.add_argument("--config", required=True, help="TOML or JSON configuration")
    s.add_argument("--out", default=None, help="CSV destination (default stdout)")
    s.set_defaults(func=_cmd_construct)

    for name in ("analyze", "classify"):
        s = sub.add_parser(name, help="property flags and residual report as JSON")
        s.add_argument("--config", required=True, help="TOML or JSON configuration")
        s.add_argument("--report", default=None, help="JSON destination (default stdout)")
        s.set_defaults(func=_cmd_classify)

    s = sub.add_parser("verify", help="run a residual suite; exit 1 if any check fails")
    s.add_argument("--suite", required=True, choices=["all", *verify.SUITES])
    s.add_argument("--config-dir", default=None, help="directory of configurations overriding the catalog defaults")
    s.add_argument("--report", default=None, help="JSON destination (default stdout)")
    s.set_defaults(func=_cmd_verify)
    return p


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ClippedDomainWarning)
            try:
                return args.func(args, out, err)
            finally:
                for w in caught:
                    if issubclass(w.category, ClippedDomainWarning):
                        err.write(f"warning: {w.message}\n")
                    else:
                        warnings.showwarning(w.message, w.category, w.filename, w.lineno)
    except (CliError, ConfigError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except (GeometryError, NumericError) as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
