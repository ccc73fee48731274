"""Command-line entry point.

Exit codes: 0 success, 1 an inequality or verification failed, 2 bad
configuration, 3 plugin contract error.

Every command accepts ``--config FILE.json`` whose keys mirror the long
flag names (kebab-case); explicit flags override the file, the file
overrides built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ContractError, InvalidInputError, PluginContractError, ResourceError
from .extensions import builtin_candidate, load_plugin_extension
from .mazur import holder_bound_suite, scalar_bound_suite
from .modulus import EuclideanDomain, default_scales, estimate_gamma, estimate_modulus
from .nets import (
    ProductNet,
    build_greedy_net,
    build_lattice_net,
    lattice_slack,
    save_net,
    verify_net_covering,
)
from .spaces import ProductShape
from .symmetrize import SymmetrizeConfig, extract_alpha, symmetrize, indicator, verify_equivariance
from .verifier import (
    CONTRADICTION_T_MAX,
    VerifierConfig,
    contradiction_pipeline,
    reports_to_csv,
    to_json,
)

log = logging.getLogger("netext")

BUILTINS = ("natural", "nearest", "zero")

DEFAULTS = {
    "verify-mazur": {"trials": 100_000, "p-max": 64, "dim-max": 64, "seed": 0, "out": None},
    "build-net": {"dim": None, "radius": None, "seed": 0, "out": None, "queries": 10_000},
    "symmetrize": {"extension": "natural", "n": 4, "p": 3, "k": 1, "t": 1.0, "mode": "exact",
                   "samples": 100_000, "seed": 0, "net-radius": 3.0, "net-kind": "greedy",
                   "trials": 3, "plugin-timeout": 10.0, "out": None},
    "estimate-modulus": {"extension": "natural", "n": 4, "p0": 2, "p-max": 12, "component": None,
                         "scales": None, "samples": 2000, "radius": 3.0, "seed": 0,
                         "net-radius": 3.0, "net-kind": "greedy", "plugin-timeout": 10.0,
                         "out": None},
    "estimate-gamma": {"extension": "natural", "n": 4, "p0": 2, "p-max": 12, "samples": 2000,
                       "seed": 0, "net-radius": 3.0, "net-kind": "greedy",
                       "plugin-timeout": 10.0, "out": None},
    "run-contradiction": {"extension": "natural", "t-grid": "0.05", "n": 6, "p0": 2, "p-max": 24,
                          "mode": "exact", "samples": 100_000, "seed": 0, "net-radius": 3.0,
                          "net-kind": "greedy", "slack": 1.1, "plugin-timeout": 10.0,
                          "out": None},
    "report": {"in": None, "out": None},
}


class ConfigError(Exception):
    pass


def _add(p: argparse.ArgumentParser, flag: str, type_=None, help_=None, choices=None):
    p.add_argument(f"--{flag}", dest=flag.replace("-", "_"), type=type_, default=None,
                   choices=choices, help=help_)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netext", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        _add(p, "config", str, "JSON file with default flag values")
        return p

    p = cmd("verify-mazur", "randomized scalar and vector Mazur-map bound suites")
    _add(p, "trials", int)
    _add(p, "p-max", int)
    _add(p, "dim-max", int)
    _add(p, "seed", int)
    _add(p, "out", str, "CSV output path (stdout if omitted)")

    p = cmd("build-net", "greedy 1-net of a ball, verified and written as CSV + JSON")
    _add(p, "dim", int)
    _add(p, "radius", float)
    _add(p, "seed", int)
    _add(p, "queries", int, "covering-check queries")
    _add(p, "out", str, "CSV path; the sidecar gets the .json suffix")

    def extension_flags(p, net=True):
        _add(p, "extension", str, f"one of {', '.join(BUILTINS)} or a plugin command")
        _add(p, "plugin-timeout", float)
        if net:
            _add(p, "net-radius", float)
            _add(p, "net-kind", str, choices=("greedy", "lattice"))

    p = cmd("symmetrize", "group average at t * 1_{1..k} with alpha extraction")
    extension_flags(p)
    for f, t in (("n", int), ("p", int), ("k", int), ("t", float), ("samples", int),
                 ("seed", int), ("trials", int)):
        _add(p, f, t)
    _add(p, "mode", str, choices=("exact", "sampled"))
    _add(p, "out", str)

    p = cmd("estimate-modulus", "sampled modulus of continuity table (CSV)")
    extension_flags(p)
    for f, t in (("n", int), ("p0", int), ("p-max", int), ("component", int), ("samples", int),
                 ("radius", float), ("seed", int)):
        _add(p, f, t)
    _add(p, "scales", str, "comma-separated scales")
    _add(p, "out", str)

    p = cmd("estimate-gamma", "sup-distance to f over sampled product net points (JSON)")
    extension_flags(p)
    for f, t in (("n", int), ("p0", int), ("p-max", int), ("samples", int), ("seed", int)):
        _add(p, f, t)
    _add(p, "out", str)

    p = cmd("run-contradiction", "choice-of-parameters pipeline over a t grid")
    extension_flags(p)
    _add(p, "t-grid", str, "comma-separated t values in (0, 1/(sqrt2 e^2))")
    for f, t in (("n", int), ("p0", int), ("p-max", int), ("samples", int), ("seed", int),
                 ("slack", float)):
        _add(p, f, t)
    _add(p, "mode", str, choices=("exact", "sampled"))
    _add(p, "out", str, "output stem: writes STEM.json and STEM.csv (stdout JSON if omitted)")

    p = cmd("report", "summarize a run-contradiction JSON report")
    _add(p, "in", str)
    _add(p, "out", str, "CSV summary path")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags over the config file over defaults."""
    defaults = DEFAULTS[args.command]
    conf = {}
    if args.config:
        try:
            conf = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(conf, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(conf) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown config keys for {args.command}: {sorted(unknown)}")
    out = {}
    for key, default in defaults.items():
        flag = getattr(args, key.replace("-", "_"), None)
        out[key] = flag if flag is not None else conf.get(key, default)
    return out


def _write(text: str, path, stdout) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8", newline="")
    else:
        stdout.write(text)


def _component_net(o: dict):
    if o["net-kind"] == "lattice":
        return build_lattice_net(o["n"], o["net-radius"])
    return build_greedy_net(o["n"], o["net-radius"], o.get("seed", 0))


def _candidate(o: dict, shape: ProductShape):
    name = o["extension"]
    net = None
    if name in BUILTINS:
        if name == "nearest":
            net = ProductNet(_component_net(o), shape)
        return builtin_candidate(name, shape, net)
    return load_plugin_extension(name, shape, timeout=o["plugin-timeout"])


def _close(cand):
    plugin = getattr(cand, "plugin", None)
    if plugin is not None:
        plugin.close()


def cmd_verify_mazur(o, stdout) -> int:
    if o["p-max"] < 2:
        raise ConfigError("--p-max must be >= 2")
    if o["dim-max"] < 1:
        raise ConfigError("--dim-max must be >= 1")
    if o["trials"] < 0:
        raise ConfigError("--trials must be >= 0")
    header = "suite,trials,violations,max_ratio\r\n"
    if o["trials"] == 0:
        log.warning("--trials 0: nothing to check, reporting a vacuous pass")
        _write(header, o["out"], stdout)
        return 0
    scalar = scalar_bound_suite(o["trials"], o["p-max"], o["seed"])
    holder, ident = holder_bound_suite(o["trials"], o["p-max"], o["dim-max"], o["seed"])
    rows = [header]
    for r in (scalar, holder, ident):
        rows.append(f"{r.name},{r.trials},{r.violations},{r.max_ratio!r}\r\n")
    _write("".join(rows), o["out"], stdout)
    return 0 if all(r.violations == 0 for r in (scalar, holder, ident)) else 1


def cmd_build_net(o, stdout) -> int:
    if o["dim"] is None or o["radius"] is None or not o["out"]:
        raise ConfigError("build-net needs --dim, --radius and --out")
    if o["dim"] < 1 or o["radius"] < 0:
        raise ConfigError("--dim must be >= 1 and --radius >= 0")
    net = build_greedy_net(o["dim"], o["radius"], o["seed"])
    cover = verify_net_covering(net, o["queries"], o["seed"])
    csv_path, json_path = save_net(net, o["out"])
    ok = net.separation >= 1.0 and cover <= 1.0 + lattice_slack(net.dim)
    stdout.write(
        f"points={len(net)} separation={net.separation!r} covering={cover!r} "
        f"bound={1.0 + lattice_slack(net.dim)!r} csv={csv_path} json={json_path}\n"
    )
    return 0 if ok else 1


def cmd_symmetrize(o, stdout) -> int:
    n, p = o["n"], o["p"]
    shape = ProductShape(2, max(2, p), n)
    cand = _candidate(o, shape)
    try:
        F = cand.component(p)
        cfg = SymmetrizeConfig(n=n, p=p, mode=o["mode"], sample_count=o["samples"], seed=o["seed"])
        x = indicator(n, range(1, o["k"] + 1), o["t"])
        G, err = symmetrize(F, x, cfg, return_stderr=True)
        alpha = extract_alpha(F, n, p, o["k"], o["t"], cfg)
        eq = verify_equivariance(F, cfg, o["trials"]) if o["trials"] > 0 else None
    finally:
        _close(cand)
    out = {
        "extension": cand.name, "n": n, "p": p, "k": o["k"], "t": o["t"], "mode": o["mode"],
        "seed": o["seed"], "x": x, "G": G, "stderr": err,
        "alpha": alpha.alpha, "alpha_other": alpha.alpha_other,
        "off_support_residual": alpha.off_support_residual,
        "support_variation": alpha.support_variation, "set_disagreement": alpha.set_disagreement,
        "equivariance": None if eq is None else {"max_deviation": eq.max_deviation,
                                                 "max_relative": eq.max_relative,
                                                 "trials": eq.trials},
    }
    _write(to_json(out), o["out"], stdout)
    return 0


def _parse_floats(text, flag) -> list[float]:
    if isinstance(text, (list, tuple)):
        vals = [float(v) for v in text]
    else:
        try:
            vals = [float(v) for v in str(text).split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"{flag}: {exc}") from exc
    if not vals:
        raise ConfigError(f"{flag} is empty")
    return vals


def cmd_estimate_modulus(o, stdout) -> int:
    shape = ProductShape(o["p0"], o["p-max"], o["n"])
    scales = (np.asarray(sorted(set(_parse_floats(o["scales"], "--scales"))))
              if o["scales"] is not None else default_scales())
    cand = _candidate(o, shape)
    try:
        if o["component"] is not None:
            p = o["component"]
            table = estimate_modulus(cand.component(p), EuclideanDomain(o["n"], float(p)), scales,
                                     o["samples"], o["seed"], radius=o["radius"])
        else:
            table = estimate_modulus(cand, shape, scales, o["samples"], o["seed"], radius=o["radius"])
    finally:
        _close(cand)
    _write(table.to_csv(), o["out"], stdout)
    return 0


def cmd_estimate_gamma(o, stdout) -> int:
    shape = ProductShape(o["p0"], o["p-max"], o["n"])
    net = ProductNet(_component_net(o), shape)
    cand = _candidate(o, shape) if o["extension"] != "nearest" else builtin_candidate("nearest", shape, net)
    try:
        g = estimate_gamma(cand, net, o["samples"], o["seed"], radius=o["net-radius"])
    finally:
        _close(cand)
    out = {"extension": cand.name, "gamma": g.value, "infinite": g.infinite, "samples": g.samples,
           "net_radius": o["net-radius"], "p0": o["p0"], "P": o["p-max"], "n": o["n"],
           "argmax_point": None if g.argmax_point is None else g.argmax_point.components}
    _write(to_json(out), o["out"], stdout)
    return 0


def cmd_run_contradiction(o, stdout) -> int:
    ts = _parse_floats(o["t-grid"], "--t-grid")
    bad = [t for t in ts if not 0 < t < CONTRADICTION_T_MAX]
    if bad:
        raise ConfigError(f"t values {bad} outside (0, 1/(sqrt2 e^2)) = (0, {CONTRADICTION_T_MAX!r})")
    cfg = VerifierConfig(n=o["n"], p0=o["p0"], P=o["p-max"], slack=o["slack"], mode=o["mode"],
                         sample_count=o["samples"], seed=o["seed"], net_radius=o["net-radius"])
    shape = cfg.shape
    net = ProductNet(_component_net(o), shape)
    if o["extension"] == "nearest":
        cand = builtin_candidate("nearest", shape, net)
    else:
        cand = _candidate(o, shape)
    try:
        runs = [contradiction_pipeline(cand, t, cfg, net) for t in ts]
    finally:
        _close(cand)
    doc = {"extension": cand.name, "runs": runs,
           "consistent": all(r["consistent"] for r in runs)}
    if o["out"]:
        stem = Path(o["out"])
        stem.with_suffix(".json").write_text(to_json(doc), encoding="utf-8", newline="")
        rows = [r for run in runs for r in run["feasible"]["reports"]]
        stem.with_suffix(".csv").write_text(reports_to_csv(rows), encoding="utf-8", newline="")
    else:
        stdout.write(to_json(doc))
    for run in runs:
        for flag in run["flags"]:
            log.info("t=%r: %s", run["t"], flag)
    return 0 if doc["consistent"] else 1


def cmd_report(o, stdout) -> int:
    if not o["in"]:
        raise ConfigError("report needs --in")
    try:
        doc = json.loads(Path(o["in"]).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read report {o['in']}: {exc}") from exc
    rows = [r for run in doc.get("runs", []) for r in run["feasible"]["reports"]]
    for run in doc.get("runs", []):
        a = run["analytic"]
        stdout.write(f"t={run['t']!r} p={a['p']} floor={a['floor']!r} "
                     f"omega_hat={a['omega_sqrt2t']!r} gamma={a['gamma']!r} "
                     f"consistent={run['consistent']}\n")
    for r in rows:
        stdout.write(f"  {'PASS' if r['holds'] else 'FAIL'} {r['name']}: "
                     f"lhs={r['lhs']!r} rhs={r['rhs']!r}\n")
    if o["out"]:
        Path(o["out"]).write_text(reports_to_csv(rows), encoding="utf-8", newline="")
    ok = all(r["holds"] for r in rows) and all(run["consistent"] for run in doc.get("runs", []))
    return 0 if ok else 1


COMMANDS = {
    "verify-mazur": cmd_verify_mazur,
    "build-net": cmd_build_net,
    "symmetrize": cmd_symmetrize,
    "estimate-modulus": cmd_estimate_modulus,
    "estimate-gamma": cmd_estimate_gamma,
    "run-contradiction": cmd_run_contradiction,
    "report": cmd_report,
}


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        opts = resolve(args)
        return COMMANDS[args.command](opts, stdout)
    except PluginContractError as exc:
        log.error("plugin contract error: %s", exc)
        if exc.exchange:
            log.error("offending exchange: %s", json.dumps(exc.exchange, sort_keys=True))
        return 3
    except (ConfigError, InvalidInputError, ResourceError) as exc:
        log.error("%s", exc)
        return 2
    except ContractError as exc:
        log.error("map contract error: %s", exc)
        return 1


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
