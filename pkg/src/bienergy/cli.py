"""Command-line front end: ``bienergy list | run | sample``.

Exit codes for ``run``: 0 when every non-borderline row agrees with its
prediction, 1 on a disagreement, 2 on a configuration error, 3 on a numerical
failure in a required cell.
"""
from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import domains as dm
from . import experiments as ex
from .diffgeo import distortion_sample
from .errors import BiEnergyError, ConfigError, DomainViolation, FDUnstable, MaxDepthExceeded, NonFiniteIntegrand
from .mapzoo import catalog, pair, parse_map_id
from .points import PointN
from .serialize import csv_text, dumps

log = logging.getLogger("bienergy")

EXIT_OK, EXIT_DISAGREE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
FORMATS = ("json", "csv")
TOP_LEVEL = ("experiment", "output_dir", "formats", "seed")


# --------------------------------------------------------------------------
# parameter coercion


def _int(name, v, lo=None):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ConfigError(f"{name} must be an integer, got {v!r}")
    v = int(v)
    if lo is not None and v < lo:
        raise ConfigError(f"{name} must be at least {lo}, got {v}")
    return v


def _float(name, v, positive=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{name} must be a number, got {v!r}")
    v = float(v)
    if positive and not v > 0:
        raise ConfigError(f"{name} must be positive, got {v}")
    return v


def _floats(name, v, positive=False):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        v = [v]
    if not isinstance(v, (list, tuple)) or not v:
        raise ConfigError(f"{name} must be a non-empty list of numbers")
    return [_float(name, x, positive) for x in v]


def _str(name, v):
    if not isinstance(v, str) or not v.strip():
        raise ConfigError(f"{name} must be a non-empty string")
    return v.strip()


def _strs(name, v):
    if isinstance(v, str):
        v = [s for s in v.split(";") if s.strip()]
    if not isinstance(v, (list, tuple)) or not v:
        raise ConfigError(f"{name} must be a non-empty list of strings")
    return [_str(name, x) for x in v]


def _choice(options):
    def check(name, v):
        if v not in options:
            raise ConfigError(f"{name} must be one of {list(options)}, got {v!r}")
        return v

    return check


COERCE = {
    "n": lambda k, v: _int(k, v, 2),
    "map": _str,
    "maps": _strs,
    "region": _str,
    "domain": _str,
    "alpha": lambda k, v: _float(k, v, True),
    "alphas": lambda k, v: _floats(k, v, True),
    "p_grid": _floats,
    "tol": lambda k, v: _float(k, v, True),
    "quad_tol": lambda k, v: _float(k, v, True),
    "tols": lambda k, v: _floats(k, v, True),
    "shell_depth": lambda k, v: _int(k, v, 13),
    "max_depth": lambda k, v: _int(k, v, 1),
    "sample_budget": lambda k, v: _int(k, v, 12),
    "threshold": _float,
    "base": _floats,
    "scales": lambda k, v: _floats(k, v, True),
    "variant": _choice(("auto", "interior", "boundary")),
}


# --------------------------------------------------------------------------
# experiment schemas


def _map(params):
    return parse_map_id(params["map"], params.get("n"))


def _region(text: str, map, n: int):
    """``domain`` (the map's own), ``truncated:rho_min=r``, or ``Kind:key=value,...``."""
    kind, _, rest = text.partition(":")
    opts = {}
    for tok in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = tok.partition("=")
        if not eq:
            raise ConfigError(f"cannot parse region option {tok!r}")
        try:
            opts[key.strip()] = float(val)
        except ValueError:
            raise ConfigError(f"region option {key} needs a number") from None
    if kind == "domain":
        return ex.bounded_domain(map)
    if kind == "truncated":
        if "rho_min" not in opts:
            raise ConfigError("truncated region needs rho_min")
        return ex.bounded_domain(map).truncated(opts["rho_min"])
    try:
        return dm.make_domain(kind, n, **opts)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad region {text!r}: {exc}") from None


def _run_identity(p, seed):
    h, f = pair(_map(p))
    region = _region(p.get("region", "domain"), h, h.n)
    return ex.energy_identity(h, f, region, tol=p.get("tol", 1e-6), quad_tol=p.get("quad_tol", 1e-10),
                              shell_depth=p.get("shell_depth", 40), max_depth=p.get("max_depth", 24))


def _run_sweep(p, seed):
    m = _map(p)
    domain = _region(p.get("domain", "domain"), m, m.n)
    return ex.exponent_sweep(m, domain, p["p_grid"], tol=p.get("tol", 1e-10), shell_depth=p.get("shell_depth", 40),
                             threshold=p.get("threshold"), max_depth=p.get("max_depth", 24))


def _run_cusp(p, seed):
    alphas = p.get("alphas") or [p["alpha"]]
    return ex.cusp_threshold(alphas, p.get("n", 3), tol=p.get("tol", 1e-10), shell_depth=p.get("shell_depth", 40),
                             sample_budget=p.get("sample_budget", 4096), seed=seed, threshold=p.get("threshold"),
                             max_depth=p.get("max_depth", 24))


def _run_qc(p, seed):
    return ex.qc_report(_map(p), p.get("sample_budget", 10_000), seed)


def _run_lipschitz(p, seed):
    return ex.lipschitz_report(_map(p), p.get("sample_budget", 4096), seed)


def _zoo(n: int):
    ids = ["identity", "radial:a=2", "radial:a=0.5", "slit", "slit:f", "cut", "cut:f", "cusp:alpha=2",
           "cusp:alpha=2,f"]
    return ids if n >= 3 else ids[:3]


def _run_pointwise(p, seed):
    n = p.get("n", 3)
    maps = [parse_map_id(s, n) for s in p.get("maps", _zoo(n))]
    return ex.pointwise_identities(maps, p.get("sample_budget", 10_000), seed)


def _run_cov(p, seed):
    m = _map(p)
    region = _region(p.get("region", "domain"), m, m.n)
    return ex.change_of_variables_experiment(m, region, p.get("tols", [1e-4, 1e-6, 1e-8]),
                                             threshold=p.get("tol", 1e-3))


def _run_modulus(p, seed):
    m = _map(p)
    base = PointN.from_array(p["base"]) if "base" in p else None
    return ex.modulus_report(m, base, p.get("scales"), p.get("variant", "auto"), tol=p.get("tol", 1e-8), seed=seed)


@dataclass(frozen=True)
class Schema:
    runner: object
    required: tuple[str, ...]
    optional: tuple[str, ...]
    one_of: tuple[str, ...] = ()


SCHEMAS = {
    "energy-identity": Schema(_run_identity, ("map",), ("n", "region", "tol", "quad_tol", "shell_depth", "max_depth")),
    "exponent-sweep": Schema(_run_sweep, ("map", "p_grid"),
                             ("n", "domain", "tol", "shell_depth", "threshold", "max_depth")),
    "cusp-threshold": Schema(_run_cusp, (), ("n", "tol", "shell_depth", "sample_budget", "threshold", "max_depth"),
                             one_of=("alphas", "alpha")),
    "qc-witness": Schema(_run_qc, ("map",), ("n", "sample_budget")),
    "lipschitz-check": Schema(_run_lipschitz, ("map",), ("n", "sample_budget")),
    "pointwise-identities": Schema(_run_pointwise, (), ("n", "maps", "sample_budget")),
    "change-of-variables": Schema(_run_cov, ("map",), ("n", "region", "tols", "tol")),
    "modulus-profile": Schema(_run_modulus, ("map",), ("n", "base", "scales", "variant", "tol")),
}


# --------------------------------------------------------------------------
# run configuration


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    output_dir: str = "results"
    formats: tuple[str, ...] = FORMATS
    seed: int = 0

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        name = data.get("experiment")
        if name is None:
            raise ConfigError(f"missing required key 'experiment'; known experiments: {', '.join(SCHEMAS)}")
        if name not in SCHEMAS:
            raise ConfigError(f"unknown experiment {name!r}; known experiments: {', '.join(SCHEMAS)}")
        schema = SCHEMAS[name]
        allowed = set(TOP_LEVEL) | set(schema.required) | set(schema.optional) | set(schema.one_of)
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise ConfigError(f"unknown key(s) for {name}: {unknown}; allowed: {sorted(allowed)}")
        missing = [k for k in schema.required if k not in data]
        if schema.one_of and not any(k in data for k in schema.one_of):
            missing.append(" or ".join(schema.one_of))
        if missing:
            need = list(schema.required) + ([" or ".join(schema.one_of)] if schema.one_of else [])
            raise ConfigError(f"missing required key(s) for {name}: {missing}; required: {need}")
        params = {k: COERCE[k](k, v) for k, v in data.items() if k not in TOP_LEVEL}
        formats = data.get("formats", list(FORMATS))
        if isinstance(formats, str):
            formats = [s.strip() for s in formats.split(",") if s.strip()]
        if not isinstance(formats, list) or not formats or any(f not in FORMATS for f in formats):
            raise ConfigError(f"formats must be a non-empty subset of {list(FORMATS)}")
        seed = _int("seed", data.get("seed", 0), 0)
        out = _str("output_dir", data.get("output_dir", "results"))
        return cls(name, params, out, tuple(dict.fromkeys(formats)), seed)

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "params": dict(sorted(self.params.items())),
                "output_dir": self.output_dir, "formats": list(self.formats), "seed": self.seed}


def execute(config: RunConfig):
    """Run the configured experiment and return its report (no files written)."""
    schema = SCHEMAS[config.experiment]
    try:
        return schema.runner(config.params, config.seed)
    except (ConfigError, BiEnergyError):
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def report_document(config: RunConfig, report) -> dict:
    doc = report.to_dict()
    doc["config"] = {k: v for k, v in config.to_dict().items() if k != "output_dir"}
    return doc


def write_outputs(config: RunConfig, report) -> list[Path]:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if "json" in config.formats:
        path = out / f"{config.experiment}.json"
        path.write_text(dumps(report_document(config, report)), encoding="utf-8")
        paths.append(path)
    if "csv" in config.formats:
        path = out / f"{config.experiment}.csv"
        path.write_text(csv_text(ex.ROW_COLUMNS, report.csv_rows()), encoding="utf-8")
        paths.append(path)
    return paths


def exit_code(report) -> int:
    if report.numerical_failure:
        return EXIT_NUMERIC
    return EXIT_OK if report.passed else EXIT_DISAGREE


# --------------------------------------------------------------------------
# subcommands


def cmd_list(as_json: bool = False, out=None) -> int:
    out = out or sys.stdout
    maps = catalog()
    exps = [{"name": k, "claim": v} for k, v in ex.EXPERIMENTS.items()]
    if as_json:
        out.write(dumps({"maps": maps, "experiments": exps}))
        return EXIT_OK
    out.write("maps:\n")
    for m in maps:
        out.write(f"  {m['id']:<20} [{'/'.join(m['members'])}]  {m['domain']:<28} {m['description']}\n")
    out.write("experiments:\n")
    for e in exps:
        out.write(f"  {e['name']} → {e['claim']}\n")
    return EXIT_OK


def cmd_run(config: RunConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        report = execute(config)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except DomainViolation as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (MaxDepthExceeded, NonFiniteIntegrand, FDUnstable) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    paths = write_outputs(config, report)
    for r in report.rows:
        flag = "ok" if r.agree else ("borderline" if r.borderline else "FAIL")
        if r.borderline and r.agree:
            flag = "ok (borderline)"
        out.write(f"{r.cell:<32} predicted={r.predicted:<14} computed={r.computed:<14} {flag}\n")
    s = report.summary
    out.write(f"{config.experiment}: {s['agree']}/{s['rows']} agree, {s['borderline']} borderline, "
              f"{s['failed']} failed\n")
    for p in paths:
        out.write(f"wrote {p}\n")
    for r in report.rows:
        if r.failure and not r.borderline:
            log.error("numerical failure in %s: %s", r.cell, r.failure)
    return exit_code(report)


_NUMBER = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")


def parse_point(text: str) -> list[float]:
    vals = [float(v) for v in _NUMBER.findall(text)]
    if len(vals) < 2:
        raise ConfigError(f"cannot parse a point from {text!r}")
    return vals


def cmd_sample(map_id: str, point: str, method: str = "auto", as_json: bool = False, out=None) -> int:
    out = out or sys.stdout
    try:
        coords = parse_point(point)
        n = None if "n=" in map_id else len(coords)
        m = parse_map_id(map_id, n)
        s = distortion_sample(m, PointN.from_array(coords), method=method)
    except (ConfigError, DomainViolation, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except BiEnergyError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    rec = {"map": m.id, **s.to_record()}
    if as_json:
        out.write(dumps(rec))
    else:
        out.write(f"map      {m.id}\npoint    {coords}\n")
        for key, label in (("J", "J"), ("opnorm", "|Dh|"), ("adj_opnorm", "|D#h|"), ("K_O", "K_O"), ("K_I", "K_I")):
            out.write(f"{label:<8} {rec[key]:.17g}\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing


def _list_arg(text: str):
    text = text.strip()
    if text.startswith("["):
        return json.loads(text)
    return [float(s) for s in text.split(",") if s.strip()]


INLINE = {
    "n": int, "map": str, "maps": str, "region": str, "domain": str, "alpha": float, "alphas": _list_arg,
    "p_grid": _list_arg, "tol": float, "quad_tol": float, "tols": _list_arg, "shell_depth": int,
    "max_depth": int, "sample_budget": int, "threshold": float, "base": _list_arg, "scales": _list_arg,
    "variant": str,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bienergy", description="Bi-conformal energy experiments.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="list maps and experiments")
    p_list.add_argument("--json", action="store_true")

    p_run = sub.add_parser("run", help="run an experiment")
    p_run.add_argument("--config", help="JSON configuration file")
    p_run.add_argument("--experiment")
    p_run.add_argument("--output-dir")
    p_run.add_argument("--format", dest="formats", help="comma list from json,csv")
    p_run.add_argument("--seed", type=int)
    for key, typ in INLINE.items():
        p_run.add_argument("--" + key.replace("_", "-"), dest=key, type=typ)

    p_s = sub.add_parser("sample", help="distortion quantities of a map at a point")
    p_s.add_argument("map_id")
    p_s.add_argument("point", help='e.g. "0,0.5,0" or "(0,(0.5,0))"')
    p_s.add_argument("--method", choices=("auto", "analytic", "fd"), default="auto")
    p_s.add_argument("--json", action="store_true")
    return ap


def _config_from_args(args) -> RunConfig:
    data: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
    for key in ("experiment", "output_dir", "formats", "seed", *INLINE):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    return RunConfig.from_mapping(data)


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:1] == ["sample"]:
        # a point such as -0.5,0.2,0 is data, not an option
        argv = [" " + a if re.match(r"^-[\d.]", a) else a for a in argv]
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s",
                        stream=sys.stderr)
    if args.command == "list":
        return cmd_list(args.json)
    if args.command == "sample":
        return cmd_sample(args.map_id, args.point, args.method, args.json)
    try:
        config = _config_from_args(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except ValueError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    return cmd_run(config)


if __name__ == "__main__":
    sys.exit(main())
