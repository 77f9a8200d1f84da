"""Command-line front end: ``hnoma-sim run | show | construct-polar | validate``.

Exit codes: 0 success, 2 usage error or unreadable scenario file, 3 scenario
schema error, 4 configuration invariant or runtime failure, 5 validation
suite failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from pathlib import Path

import yaml

from . import __version__, _backend, polar, sim, validate
from .errors import ConfigurationError, HnomaError, SchemaError, UsageError

EXIT_OK, EXIT_USAGE, EXIT_SCHEMA, EXIT_RUNTIME, EXIT_VALIDATION = 0, 2, 3, 4, 5
SCHEMA_VERSION = 1

log = logging.getLogger("hnoma_sim")

# key -> (required, kind)
TOP_KEYS = {
    "version": (False, "int"),
    "mode": (True, "str"),
    "groups": (True, "list"),
    "resources": (True, "int"),
    "modulation_order": (True, "int"),
    "snr_db": (True, "numlist"),
    "trials": (True, "int"),
    "seed": (True, "int"),
    "name": (False, "str"),
    "degree": (False, "int"),
    "mpa_iterations": (False, "int"),
    "power_ratio_db": (False, "num"),
    "rho": (False, "rho"),
    "sigma_h2": (False, "num"),
    "fading": (False, "str"),
    "polar": (False, "dict"),
}
GROUP_KEYS = {"users": (True, "int")}
POLAR_KEYS = {
    "n": (False, "int"),
    "rate": (False, "num"),
    "list_size": (False, "int"),
    "design_snr_db": (False, "num"),
    "construction_trials": (False, "int"),
    "construction_seed": (False, "int"),
    "construction": (False, "str"),
}


def _as_rho(value):
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    raise TypeError


def _type_ok(value, kind) -> bool:
    if kind == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == "num":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind == "str":
        return isinstance(value, str)
    if kind == "list":
        return isinstance(value, list)
    if kind == "dict":
        return isinstance(value, dict)
    if kind == "numlist":
        return isinstance(value, list) and all(_type_ok(v, "num") for v in value)
    if kind == "rho":
        values = value if isinstance(value, list) else [value]
        try:
            [_as_rho(v) for v in values]
        except TypeError:
            return False
        return True
    return False


_KIND_TEXT = {
    "int": "an integer",
    "num": "a number",
    "str": "a string",
    "list": "a list",
    "dict": "a mapping",
    "numlist": "a list of numbers",
    "rho": 'a positive number, "inf", or one such value per group',
}


def _check_mapping(doc, schema, prefix, problems):
    for key in doc:
        if key not in schema:
            problems.append(f"{prefix}{key}: unknown key (allowed: {', '.join(schema)})")
    for key, (required, kind) in schema.items():
        if key not in doc:
            if required:
                problems.append(f"{prefix}{key}: required key missing")
        elif not _type_ok(doc[key], kind):
            problems.append(f"{prefix}{key}: expected {_KIND_TEXT[kind]}, got {doc[key]!r}")


def load_scenario_document(path) -> dict:
    """Read the YAML document; a missing or unparsable file is a usage error."""
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"scenario file not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise SchemaError([f"{path}: not valid YAML ({exc})"]) from None
    if not isinstance(doc, dict):
        raise SchemaError([f"{path}: top level must be a mapping"])
    return doc


def check_schema(doc: dict) -> None:
    """Collect every structural problem and raise them together."""
    problems = []
    _check_mapping(doc, TOP_KEYS, "", problems)
    if "version" in doc and doc["version"] != SCHEMA_VERSION:
        problems.append(f"version: unsupported schema version {doc['version']!r} (expected {SCHEMA_VERSION})")
    groups = doc.get("groups")
    if isinstance(groups, list):
        if not groups:
            problems.append("groups: at least one group is required")
        for i, g in enumerate(groups):
            if not isinstance(g, dict):
                problems.append(f"groups[{i}]: expected a mapping with key 'users'")
                continue
            _check_mapping(g, GROUP_KEYS, f"groups[{i}].", problems)
    if isinstance(doc.get("polar"), dict):
        _check_mapping(doc["polar"], POLAR_KEYS, "polar.", problems)
    if problems:
        raise SchemaError(problems)


def config_from_document(doc: dict) -> sim.ScenarioConfig:
    check_schema(doc)
    rho = doc.get("rho", math.inf)
    rho = tuple(_as_rho(r) for r in (rho if isinstance(rho, list) else [rho]))
    polar_doc = doc.get("polar")
    coded = str(doc["mode"]).startswith("coded")
    params = None
    if polar_doc is not None or coded:
        params = sim.PolarParams(**(polar_doc or {}))
    return sim.ScenarioConfig(
        mode=doc["mode"],
        users=tuple(g["users"] for g in doc["groups"]),
        resources=doc["resources"],
        modulation_order=doc["modulation_order"],
        snr_db=tuple(doc["snr_db"]),
        trials=doc["trials"],
        seed=doc["seed"],
        degree=doc.get("degree", 2),
        mpa_iterations=doc.get("mpa_iterations", 10),
        power_ratio_db=doc.get("power_ratio_db", 6.0),
        rho=rho,
        sigma_h2=doc.get("sigma_h2", 1.0),
        polar=params,
        fading=doc.get("fading", "symbol"),
        name=doc.get("name", ""),
    )


def parse_scenario(path) -> sim.ScenarioConfig:
    """Load, schema-check and validate a scenario file."""
    return config_from_document(load_scenario_document(path))


def effective_document(config: sim.ScenarioConfig) -> dict:
    """The scenario with every default filled in, plus derived quantities."""
    doc = {
        "version": SCHEMA_VERSION,
        "name": config.scenario_id,
        "mode": config.mode,
        "groups": [{"users": u} for u in config.users],
        "resources": config.resources,
        "modulation_order": config.modulation_order,
        "degree": config.degree,
        "snr_db": list(config.snr_db),
        "trials": config.trials,
        "seed": config.seed,
        "mpa_iterations": config.mpa_iterations,
        "power_ratio_db": config.power_ratio_db,
        "rho": ["inf" if math.isinf(r) else r for r in config.rho],
        "sigma_h2": config.sigma_h2,
    }
    if config.coded:
        doc["fading"] = config.fading
        doc["polar"] = dict(vars(config.polar))
    doc["derived"] = {
        "overloading": config.overloading,
        "group_powers": list(config.group_powers()),
        "fingerprint": config.fingerprint(),
    }
    return doc


def _parse_snr_list(text: str) -> tuple:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"--snr-list: expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise UsageError("--snr-list: at least one value is required")
    return values


def _point_line(point: sim.PointResult, metrics) -> str:
    parts = [f"snr={point.snr_db:g} dB"]
    for g in point.groups:
        rates = " ".join(f"{m.upper()}={sim.format_number(g.rate(m))}" for m in metrics)
        parts.append(f"group {g.group_id}: {rates}")
    return "  ".join(parts)


def cmd_run(args) -> int:
    config = parse_scenario(args.scenario)
    snr = _parse_snr_list(args.snr_list) if args.snr_list else None
    config = sim.with_overrides(config, seed=args.seed, trials=args.trials, snr_db=snr)
    metrics = ("ber", "fer", "ser") if config.coded else ("ber", "ser")
    log.info("scenario %s: mode=%s lambda=%.2f backend=%s", config.scenario_id, config.mode,
             config.overloading, _backend.name)
    progress = None if args.quiet else (lambda p: print(_point_line(p, metrics), flush=True))
    result = sim.run_scenario(config, workers=args.workers, progress=progress)
    for w in result.warnings:
        log.warning(w)
    sim.write_csv(sim.summarize(result), args.output)
    if not args.quiet:
        print(f"wrote {args.output} ({len(result.points)} points, {result.duration_s:.1f} s)")
    return EXIT_OK


def cmd_show(args) -> int:
    config = parse_scenario(args.scenario)
    yaml.safe_dump(effective_document(config), sys.stdout, sort_keys=False)
    return EXIT_OK


def cmd_construct_polar(args) -> int:
    try:
        k = polar.message_length(args.n, args.rate)
    except ConfigurationError as exc:
        raise UsageError(f"--n/--rate: {exc}") from None
    if args.trials < polar.MIN_CONSTRUCTION_TRIALS:
        raise UsageError(f"--trials: must be >= {polar.MIN_CONSTRUCTION_TRIALS}, got {args.trials}")
    cons = polar.polar_construct_montecarlo(args.n, k + polar.CRC16_CCITT.length, args.design_snr, args.trials, args.seed)
    polar.write_frozen_set(args.output, args.n, cons.frozen_set)
    print(f"n={args.n} k={k} info={len(cons.info_set)} frozen={len(cons.frozen_set)} -> {args.output}")
    return EXIT_OK


def cmd_validate(args) -> int:
    start = time.perf_counter()
    results = validate.run_checks(args.frozen_set)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<20} {r.detail} ({r.seconds:.2f} s)")
    elapsed = time.perf_counter() - start
    if elapsed > validate.SOFT_BUDGET_S:
        log.warning("validation took %.0f s (budget %.0f s)", elapsed, validate.SOFT_BUDGET_S)
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_VALIDATION if failed else EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hnoma-sim", description="Monte-Carlo simulator for uplink hybrid NOMA with SCMA and polar codes")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="simulate a scenario file and write a CSV")
    r.add_argument("scenario", help="YAML scenario file")
    r.add_argument("-o", "--output", required=True, help="CSV output path")
    r.add_argument("--seed", type=int, help="override the master seed")
    r.add_argument("--trials", type=int, help="override trials per SNR point")
    r.add_argument("--snr-list", help="override the SNR grid, e.g. 0,5,10")
    r.add_argument("--workers", type=int, help=f"worker processes (default: ${sim.WORKERS_ENV} or CPU count)")
    r.add_argument("-q", "--quiet", action="store_true")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("show", help="print the effective scenario with defaults filled in")
    s.add_argument("scenario")
    s.set_defaults(func=cmd_show)

    c = sub.add_parser("construct-polar", help="Monte-Carlo polar construction to a frozen-set file")
    c.add_argument("--n", type=int, required=True, help="block length (power of 2)")
    c.add_argument("--rate", type=float, default=0.5)
    c.add_argument("--design-snr", type=float, default=2.0, help="BI-AWGN design Es/N0 in dB")
    c.add_argument("--trials", type=int, default=100_000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_construct_polar)

    v = sub.add_parser("validate", help="run the built-in reference checks")
    v.add_argument("--frozen-set", help="frozen-set file to use for the polar round-trip check")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except HnomaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:
        log.debug("unhandled failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
