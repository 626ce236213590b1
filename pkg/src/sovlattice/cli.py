"""Command line entry point: ``sov-lattice run`` and ``sov-lattice report``.

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
3 separate-variable basis could not be built after the configured retries.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys
from pathlib import Path

from .algebra_core import NonGenericError, Phase
from .suites import MODES, SUITES, RunSettings, run

SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RETRY = 0, 1, 2, 3
REPORT_JSON = "report.json"
REPORT_CSV = "formfactors.csv"
CSV_COLUMNS = ["left_index", "right_index", "k", "k'", "operator", "det_value_re", "det_value_im",
               "oracle_re", "oracle_im", "rel_err"]


class ConfigError(ValueError):
    pass


def load_config(path):
    """INI file -> (RunSettings, suite, output dir)."""
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    except configparser.Error as err:
        raise ConfigError(f"malformed config: {err}") from err
    try:
        m = cp["model"] if cp.has_section("model") else {}
        p = int(m.get("p", 3))
        pp = int(m.get("p_prime", 2))
        s = RunSettings(p=p, p_prime=pp, n_sites=int(m.get("n_sites", 2)),
                        mode=m.get("mode", "generic").strip(), seed=int(m.get("seed", 0)))
        if cp.has_section("run"):
            s.retries = cp["run"].getint("retries", 5)
        if cp.has_section("tolerances"):
            s.tolerances = {k: float(v) for k, v in cp["tolerances"].items()}
        suite = cp.get("run", "suite", fallback="all").strip()
        out = cp.get("output", "dir", fallback="reports").strip()
    except (ValueError, KeyError) as err:
        raise ConfigError(f"bad config value: {err}") from err
    validate(s, suite)
    return s, suite, out


def validate(s: RunSettings, suite: str):
    try:
        Phase(s.p, s.p_prime)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    if s.mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}; got {s.mode!r}")
    if s.n_sites < 2:
        raise ConfigError("n_sites must be at least 2")
    if s.p ** s.n_sites > 2000:
        raise ConfigError(f"p^N = {s.p ** s.n_sites} exceeds the dense cap 2000")
    if suite != "all" and suite not in SUITES:
        raise ConfigError(f"suite must be one of {', '.join(SUITES + ('all',))}; got {suite!r}")
    if s.retries < 0:
        raise ConfigError("retries must be >= 0")


def build_report(settings: RunSettings, suite: str, results) -> dict:
    checks, rows, info = [], [], {}
    for r in results:
        for c in r.checks:
            checks.append(dict(suite=r.suite, **c.as_dict()))
        rows.extend(r.tables)
        if r.info:
            info[r.suite] = r.info
    return {
        "schema": SCHEMA,
        "config": {"p": settings.p, "p_prime": settings.p_prime, "n_sites": settings.n_sites,
                   "mode": settings.mode, "seed": settings.seed, "suite": suite,
                   "tolerances": dict(sorted(settings.tolerances.items())),
                   "tol_override": settings.tol_override},
        "passed": all(c["pass"] for c in checks),
        "checks": checks,
        "formfactors": [_csv_row(r) for r in rows],
        "info": info,
    }


def _csv_row(row: dict) -> dict:
    out = {}
    for col in CSV_COLUMNS:
        key = "k_prime" if col == "k'" else col
        v = row[key]
        out[col] = float(f"{v:.10e}") if isinstance(v, float) else v
    return out


def dumps_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def dumps_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def empty_report() -> dict:
    return {"schema": SCHEMA, "checks": []}


def cmd_run(args) -> int:
    try:
        settings, suite, out = load_config(args.config)
        if args.suite:
            suite = args.suite
        if args.tol is not None:
            if not args.tol > 0:
                raise ConfigError("--tol must be positive")
            settings.tol_override = args.tol
        validate(settings, suite)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or out)
    try:
        results = run(settings, suite)
    except NonGenericError as err:
        print(f"retry exhaustion: {err}", file=sys.stderr)
        return EXIT_RETRY
    report = build_report(settings, suite, results)
    out.mkdir(parents=True, exist_ok=True)
    (out / REPORT_JSON).write_text(dumps_json(report))
    if report["formfactors"]:
        (out / REPORT_CSV).write_text(dumps_csv(report["formfactors"]))
    for c in report["checks"]:
        flag = "PASS" if c["pass"] else "FAIL"
        cmp = "<" if c["bound"] == "upper" else ">"
        print(f"{flag} {c['suite']}/{c['name']}: {c['residual']:.3e} {cmp} {c['tolerance']:g}")
    n_fail = sum(not c["pass"] for c in report["checks"])
    print(f"{len(report['checks']) - n_fail}/{len(report['checks'])} checks passed; report in {out}")
    return EXIT_OK if n_fail == 0 else EXIT_FAIL


def cmd_report(args) -> int:
    path = Path(args.out) / REPORT_JSON
    if path.exists():
        try:
            report = json.loads(path.read_text())
        except json.JSONDecodeError as err:
            print(f"config error: unreadable report {path}: {err}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        report = empty_report()
    if args.format == "json":
        sys.stdout.write(dumps_json(report))
    else:
        sys.stdout.write(dumps_csv(report.get("formfactors", [])))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sov-lattice", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run verification suites")
    r.add_argument("--config", required=True, help="INI configuration file")
    r.add_argument("--suite", choices=SUITES + ("all",), default=None,
                   help="suite to run (overrides [run] suite)")
    r.add_argument("--out", default=None, help="output directory (overrides [output] dir)")
    r.add_argument("--tol", type=float, default=None, help="replace every upper-bound tolerance")
    r.set_defaults(func=cmd_run)
    rp = sub.add_parser("report", help="print the last report as json or csv")
    rp.add_argument("--format", choices=("json", "csv"), default="json")
    rp.add_argument("--out", default="reports", help="directory written by `run`")
    rp.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, which matches the config-error code
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
