"""``magweyl`` command line: run verification suites and export objects.

Exit codes: 0 all checks pass, 1 a check failed or the numerics raised,
2 the configuration or the command line is invalid.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

SUITE_NAMES = ["roundtrip", "gauge", "commutators", "product", "expansion", "parametrix",
               "resolvent", "funcalc", "trace", "zak", "equivariant", "all"]


class ConfigError(Exception):
    pass


def _cap_threads():
    n = os.environ.get("MAGWEYL_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = n


def _line_of(text: str, path) -> int | None:
    """Best-effort line of the innermost key of ``path`` in the JSON text."""
    keys = [p for p in path if isinstance(p, str)]
    if not keys:
        return None
    pos = 0
    for key in keys:
        i = text.find(f'"{key}"', pos)
        if i < 0:
            return None
        pos = i
    return text.count("\n", 0, pos) + 1


def load_config(path) -> dict:
    """Parse and validate; raises ConfigError with line and field diagnostics."""
    import jsonschema

    from .verify import CONFIG_SCHEMA, merged_config

    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    errors = sorted(jsonschema.Draft7Validator(CONFIG_SCHEMA).iter_errors(raw),
                    key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        msgs = []
        for e in errors:
            field = ".".join(map(str, e.absolute_path)) or "<root>"
            line = _line_of(text, list(e.absolute_path))
            where = f"{path}:{line}" if line else str(path)
            msgs.append(f"{where}: field {field}: {e.message}")
        raise ConfigError("\n".join(msgs))
    cfg = merged_config(raw)
    if cfg["magnetic"].get("kind", "zero") != "zero" and cfg["grid"].get("d", 1) != 2:
        raise ConfigError(f"{path}: field magnetic.kind: a non-zero field needs grid.d = 2")
    return cfg


def _apply_overrides(cfg: dict, args) -> dict:
    if args.eps is not None:
        cfg["params"]["eps"] = args.eps
    if args.lam is not None:
        cfg["params"]["lambda"] = args.lam
    if args.grid is not None:
        cfg["grid"]["n"] = args.grid
    return cfg


def _write_tables(out: Path, results):
    for res in results:
        for stem, (header, rows) in res.tables.items():
            with open(out / f"{stem}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                for row in rows:
                    w.writerow([repr(float(v)) if not isinstance(v, int) else v for v in row])


def report_dict(cfg: dict, suite: str, results) -> dict:
    from .verify import PRNG

    return {
        "suite": suite,
        "prng": PRNG,
        "seed": int(cfg["params"].get("seed", 0)),
        "config": cfg,
        "passed": all(r.passed for r in results),
        "suites": [r.to_dict() for r in results],
    }


def cmd_run(args) -> int:
    out = Path(args.out)
    if not out.is_dir():
        try:
            out.mkdir(parents=True)
        except OSError as exc:
            print(f"error: cannot create output directory {out}: {exc.strerror}", file=sys.stderr)
            return 2
    cfg = _apply_overrides(load_config(args.config), args)
    import numpy as np

    from .errors import MagWeylError
    from .verify import run_suite

    try:
        results = run_suite(cfg, args.suite, args.tol)
    except (MagWeylError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure in suite {args.suite}: {exc}", file=sys.stderr)
        return 1
    report = report_dict(cfg, args.suite, results)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _write_tables(out, results)
    failed = [f"{r.name}.{c.name}" for r in results for c in r.checks if not c.passed]
    total = sum(len(r.checks) for r in results)
    for r in results:
        for c in r.checks:
            print(f"{'PASS' if c.passed else 'FAIL'} {r.name}.{c.name}: defect {c.defect:.3e} "
                  f"(tol {c.tolerance:.1e})")
    if failed:
        print(f"{len(failed)} of {total} checks failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    print(f"all {total} checks passed")
    return 0


def cmd_export(args) -> int:
    out = Path(args.out)
    if not out.parent.is_dir():
        print(f"error: output directory {out.parent} does not exist", file=sys.stderr)
        return 2
    cfg = _apply_overrides(load_config(args.config), args)
    from . import io
    from .verify import export_operator, export_symbol, run_suite

    as_csv = out.suffix.lower() == ".csv"
    if args.object == "symbol":
        f = export_symbol(cfg)
        (io.symbol_to_csv if as_csv else io.write_symbol)(f, out)
    elif args.object == "operator":
        F = export_operator(cfg)
        (io.operator_to_csv if as_csv else io.write_operator)(F, out)
    else:
        results = run_suite(cfg, args.suite, args.tol)
        report = report_dict(cfg, args.suite, results)
        out.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="magweyl", description="Magnetic Weyl calculus verification")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="JSON configuration file")
        sp.add_argument("--eps", type=float, help="override params.eps")
        sp.add_argument("--lambda", dest="lam", type=float, help="override params.lambda")
        sp.add_argument("--grid", type=int, help="override grid.n")
        sp.add_argument("--tol", type=float, help="override every defect tolerance")

    r = sub.add_parser("run", help="run a verification suite")
    common(r)
    r.add_argument("--suite", required=True, choices=SUITE_NAMES)
    r.add_argument("--out", required=True, help="directory for report.json and CSV tables")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("export", help="write a symbol, operator or report")
    common(e)
    e.add_argument("--object", required=True, choices=["symbol", "operator", "report"])
    e.add_argument("--out", required=True, help="output file (.csv for CSV, else MGWL binary)")
    e.add_argument("--suite", default="roundtrip", choices=SUITE_NAMES,
                   help="suite whose report is exported")
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    _cap_threads()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
