"""Batch front end.

Subcommands
-----------
energy    one functional (idelta / jdelta / gradient) for a family instance
klimit    small-threshold convergence study: delta, I_delta, K*grad, ratio
verify    one inequality case over a delta grid
sweep     a case over family instances x delta grid, with a JSON summary
constant  supremum of ratios over a sweep (or the HOLDER constant)
profile   dyadic annulus profile CSV

Every command requires an explicit --seed; outputs are byte-identical for
identical configuration, independent of --workers.  Each CSV embeds its
resolved configuration in a leading comment line, so a run can be
reproduced from its own output (``--config`` accepts a JSON file with the
same keys as the flags).  Exit codes: 0 success, 1 suspect verdict or
failed --check assertion, 2 configuration error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import dyadic as dyadic_mod
from . import energy as energy_mod
from .errors import ConfigError, NlhardyError, NumericalError
from .fields import make_family
from .quad import QuadConfig
from .verify import (
    CASE_IDS,
    COMPONENT_KEYS,
    SweepSpec,
    estimate_constant,
    evaluate_case,
    make_case,
    summarize,
    sweep,
)

SCHEMA_VERSION = "nlhardy/1"

_FAMILY_KEYS = ("R", "r", "s", "smoothing", "c", "support", "allow_unbounded")
_CASE_KEYS = ("p", "q", "tau", "a", "alpha", "beta", "sigma", "geom_r", "geom_R", "m", "n")

_CONFIG_KEYS = {
    "schema", "command", "case", "functional", "family", "dim", "delta", "delta_grid",
    "family_grid", "quad", "check", "tau", "lam",
} | set(_FAMILY_KEYS) | set(_CASE_KEYS)
_QUAD_KEYS = {"samples", "seed", "shells", "method", "rho_min_policy", "rho_min",
              "far_field_cut", "target_rel_err", "workers", "grid"}


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return "" if x is None else str(x)


def _write_csv(path: str, header: list[str], rows: list[list], config: dict) -> None:
    buf = io.StringIO()
    buf.write("# config " + json.dumps(config, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    Path(path).write_text(buf.getvalue())


def read_embedded_config(path: str) -> dict:
    """Parse the resolved configuration embedded in an output CSV."""
    first = Path(path).read_text().splitlines()[0]
    if not first.startswith("# config "):
        raise ConfigError(f"{path} carries no embedded configuration")
    return json.loads(first[len("# config "):])


# ---------------------------------------------------------------------------
# Configuration assembly
# ---------------------------------------------------------------------------


def _parse_delta_grid(text: str) -> tuple:
    try:
        grid = tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad delta grid {text!r}") from exc
    if not grid or any(x <= 0 for x in grid):
        raise ConfigError("delta grid entries must be positive")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("delta grid must be strictly decreasing")
    return grid


def _quad_config(cfg: dict) -> QuadConfig:
    unknown = set(cfg) - _QUAD_KEYS
    if unknown:
        raise ConfigError(f"unknown quad settings {sorted(unknown)}")
    if "seed" not in cfg or cfg["seed"] is None:
        raise ConfigError("seed is mandatory (no wall-clock default)")
    return QuadConfig(**cfg)


def _family_params(cfg: dict) -> dict:
    out = {}
    for k in ("R", "r", "s", "smoothing", "c"):
        if cfg.get(k) is not None:
            out[k] = float(cfg[k])
    if cfg.get("support") is not None:
        out["support"] = cfg["support"]
    if cfg.get("allow_unbounded"):
        out["allow_unbounded"] = True
    return out


def _case_params(cfg: dict) -> dict:
    out = {}
    for k in ("p", "q", "tau", "a", "alpha", "beta", "sigma"):
        if cfg.get(k) is not None:
            out[k] = float(cfg[k])
    if cfg.get("geom_r") is not None:
        out["r"] = float(cfg["geom_r"])
    if cfg.get("geom_R") is not None:
        out["R"] = float(cfg["geom_R"])
    for k in ("m", "n"):
        if cfg.get(k) is not None:
            out[k] = int(cfg[k])
    return out


def _resolved(cfg: dict) -> dict:
    """The canonical embedded config: schema + non-null settings."""
    out = {"schema": SCHEMA_VERSION}
    for k, v in sorted(cfg.items()):
        if v is not None and k not in ("out", "summary", "config"):
            out[k] = v
    return out


def _report_rows(reports) -> tuple[list[str], list[list]]:
    header = (
        ["case_id", "family", "delta", "lhs"]
        + list(COMPONENT_KEYS)
        + ["rhs", "ratio", "std_err_lhs", "std_err_rhs_max", "verdict"]
    )
    rows = []
    for rep in reports:
        comp = [rep.components.get(k) for k in COMPONENT_KEYS]
        rhs_errs = [v for k, v in rep.std_errs.items() if k != "lhs"]
        rows.append(
            [rep.case_id, rep.family, rep.delta, rep.lhs]
            + comp
            + [rep.rhs, rep.ratio, rep.std_errs.get("lhs", 0.0),
               max(rhs_errs) if rhs_errs else 0.0, rep.verdict]
        )
    return header, rows


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_energy(cfg: dict) -> int:
    u = make_family(cfg["family"], int(cfg["dim"]), **_family_params(cfg))
    qcfg = _quad_config(cfg["quad"])
    delta = float(cfg["delta"])
    p = float(cfg.get("p") or 2.0)
    alpha = float(cfg.get("alpha") or 0.0)
    functional = cfg.get("functional", "idelta")
    from .fields import Region

    if functional == "idelta":
        est = energy_mod.i_delta(u, Region.whole_space(), energy_mod.EnergyParams(p, delta, alpha), qcfg)
    elif functional == "jdelta":
        est = energy_mod.j_delta(u, p, delta, qcfg)
    elif functional == "gradient":
        est = energy_mod.gradient_energy(u, alpha, p, qcfg)
    else:
        raise ConfigError(f"unknown functional {functional!r}")
    header = ["functional", "family", "p", "alpha", "delta", "value", "std_err", "tail_analytic", "diverged"]
    rows = [[functional, u.label, p, alpha, delta, est.value, est.std_err, est.tail_analytic, est.diverged]]
    _write_csv(cfg["out"], header, rows, _resolved(cfg))
    return 1 if est.diverged else 0


def _cmd_klimit(cfg: dict) -> int:
    u = make_family(cfg["family"], int(cfg["dim"]), **_family_params(cfg))
    qcfg = _quad_config(cfg["quad"])
    p = float(cfg.get("p") or 2.0)
    grid = tuple(cfg["delta_grid"])
    from .fields import Region

    k = energy_mod.k_constant(u.dim, p)
    grad = energy_mod.gradient_energy(u, 0.0, p, qcfg)
    rows = []
    suspect = False
    for delta in grid:
        est = energy_mod.i_delta(u, Region.whole_space(), energy_mod.EnergyParams(p, float(delta), 0.0), qcfg)
        denom = k * grad.value
        ratio = est.value / denom if denom > 0 else math.inf
        suspect |= est.diverged or grad.diverged
        rows.append([u.label, p, delta, est.value, est.std_err, denom, ratio])
    header = ["family", "p", "delta", "i_delta", "i_delta_std", "k_gradient", "ratio"]
    _write_csv(cfg["out"], header, rows, _resolved(cfg))
    return 1 if suspect else 0


def _cmd_verify(cfg: dict) -> int:
    u = make_family(cfg["family"], int(cfg["dim"]), **_family_params(cfg))
    case = make_case(cfg["case"], u, **_case_params(cfg))
    qcfg = _quad_config(cfg["quad"])
    reports = [evaluate_case(case, u, float(d), qcfg) for d in cfg["delta_grid"]]
    header, rows = _report_rows(reports)
    _write_csv(cfg["out"], header, rows, _resolved(cfg))
    bad = any(r.verdict == "suspect" for r in reports)
    if cfg.get("check"):
        ratios = [r.ratio for r in reports if r.ratio > 0]
        if ratios and max(ratios) / min(ratios) > 10.0:
            bad = True
        if any(not math.isfinite(r.ratio) for r in reports):
            bad = True
    return 1 if bad else 0


def _sweep_spec(cfg: dict) -> SweepSpec:
    fam_grid = cfg.get("family_grid")
    if fam_grid is None:
        fam_grid = [_family_params(cfg)]
    return SweepSpec(
        case_id=cfg["case"],
        dim=int(cfg["dim"]),
        family=cfg["family"],
        family_grid=tuple(dict(g) for g in fam_grid),
        delta_grid=tuple(cfg["delta_grid"]),
        case_params=_case_params(cfg),
    )


def _cmd_sweep(cfg: dict) -> int:
    qcfg = _quad_config(cfg["quad"])
    reports = sweep(_sweep_spec(cfg), qcfg)
    header, rows = _report_rows(reports)
    _write_csv(cfg["out"], header, rows, _resolved(cfg))
    summary = summarize(reports)
    if cfg.get("summary_path"):
        Path(cfg["summary_path"]).write_text(
            json.dumps({"schema": SCHEMA_VERSION, "config": _resolved(cfg), "summary": summary},
                       sort_keys=True, indent=1)
            + "\n"
        )
    bad = summary["any_suspect"]
    if cfg.get("check"):
        for inst in summary["instances"].values():
            if inst["spread"] > 10.0 or not math.isfinite(inst["max_ratio"]):
                bad = True
    return 1 if bad else 0


def _cmd_constant(cfg: dict) -> int:
    qcfg = _quad_config(cfg["quad"])
    if cfg["case"] == "HOLDER":
        res = estimate_constant("HOLDER", {"lam": cfg.get("lam", 2.0), "tau": cfg.get("tau", 2.0)}, qcfg)
        rows = [["HOLDER", "", res["sup_ratio"], json.dumps(res["argmax"], sort_keys=True)]]
    else:
        res = estimate_constant(cfg["case"], _sweep_spec(cfg), qcfg)
        rows = [[cfg["case"], res["argmax"]["family"], res["sup_ratio"],
                 json.dumps({"delta": res["argmax"]["delta"]}, sort_keys=True)]]
    _write_csv(cfg["out"], ["case_id", "family", "sup_ratio", "argmax"], rows, _resolved(cfg))
    return 0


def _cmd_profile(cfg: dict) -> int:
    u = make_family(cfg["family"], int(cfg["dim"]), **_family_params(cfg))
    qcfg = _quad_config(cfg["quad"])
    cp = _case_params(cfg)
    ck = dyadic_mod.CKNParams.balanced(
        d=u.dim,
        p=float(cp.get("p", 2.0)),
        q=float(cp.get("q", 2.0)),
        a=float(cp.get("a", 0.5)),
        alpha=float(cp.get("alpha", 0.25)),
        beta=float(cp.get("beta", 0.0)),
        sigma=float(cp.get("sigma", cp.get("alpha", 0.25))),
        tau=cp.get("tau"),
    )
    prof = dyadic_mod.dyadic_profile(
        u, ck, float(cfg["delta"]), qcfg, m=cp.get("m"), n=cp.get("n")
    )
    text = "# config " + json.dumps(_resolved(cfg), sort_keys=True) + "\n" + prof.to_csv()
    Path(cfg["out"]).write_text(text)
    return 1 if prof.any_diverged() else 0


_COMMANDS = {
    "energy": _cmd_energy,
    "klimit": _cmd_klimit,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
    "constant": _cmd_constant,
    "profile": _cmd_profile,
}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlhardy", description="nonlocal energy and inequality harness")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, delta_grid=False, delta=False, case=False):
        sp.add_argument("--config", help="JSON config file (replaces all other flags)")
        sp.add_argument("--seed", type=int, help="RNG seed (mandatory)")
        sp.add_argument("--samples", type=int, default=None)
        sp.add_argument("--shells", type=int, default=None)
        sp.add_argument("--workers", type=int, default=None)
        sp.add_argument("--method", default=None)
        sp.add_argument("--far-field-cut", type=float, default=None)
        sp.add_argument("--quad-grid", type=int, default=None)
        sp.add_argument("--out", default=None, help="output CSV path")
        sp.add_argument("--check", action="store_true")
        sp.add_argument("--family", default=None)
        sp.add_argument("--d", "--dim", dest="dim", type=int, default=None)
        for k in ("R", "r", "s", "smoothing", "c"):
            sp.add_argument(f"--{k}", type=float, default=None)
        sp.add_argument("--support", default=None)
        sp.add_argument("--allow-unbounded", action="store_true")
        for k in ("p", "q", "tau", "a", "alpha", "beta", "sigma"):
            sp.add_argument(f"--{k}", type=float, default=None)
        sp.add_argument("--geom-r", type=float, default=None)
        sp.add_argument("--geom-R", type=float, default=None)
        sp.add_argument("--m", type=int, default=None)
        sp.add_argument("--n", type=int, default=None)
        if delta_grid:
            sp.add_argument("--delta-grid", default=None, help="comma-separated, strictly decreasing")
        if delta:
            sp.add_argument("--delta", type=float, default=None)
        if case:
            sp.add_argument("--case", default=None, choices=list(CASE_IDS) + ["HOLDER"])

    sp = sub.add_parser("energy", help="one energy value")
    common(sp, delta=True)
    sp.add_argument("--functional", default="idelta", choices=["idelta", "jdelta", "gradient"])

    sp = sub.add_parser("klimit", help="delta -> 0 limit study")
    common(sp, delta_grid=True)

    sp = sub.add_parser("verify", help="one case over a delta grid")
    common(sp, delta_grid=True, case=True)

    sp = sub.add_parser("sweep", help="a case over family instances x delta grid")
    common(sp, delta_grid=True, case=True)
    sp.add_argument("--R-list", default=None, help="comma-separated support radii")
    sp.add_argument("--summary", default=None, help="JSON summary path")

    sp = sub.add_parser("constant", help="empirical constant estimation")
    common(sp, delta_grid=True, case=True)
    sp.add_argument("--R-list", default=None)
    sp.add_argument("--lam", type=float, default=None)

    sp = sub.add_parser("profile", help="dyadic annulus profile CSV")
    common(sp, delta=True)
    return ap


def _config_from_args(args: argparse.Namespace) -> dict:
    if args.config:
        raw = json.loads(Path(args.config).read_text())
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        if raw.get("command") not in _COMMANDS:
            raise ConfigError("config must name a valid command")
        if "quad" not in raw or raw["quad"].get("seed") is None:
            raise ConfigError("seed is mandatory (no wall-clock default)")
        cfg = dict(raw)
        cfg["out"] = args.out or "out.csv"
        cfg["summary_path"] = getattr(args, "summary", None)
        if args.check:
            cfg["check"] = True
        return cfg

    cfg: dict = {"command": args.command}
    if args.seed is None:
        raise ConfigError("seed is mandatory (no wall-clock default)")
    quad = {"seed": int(args.seed)}
    for flag, key in (("samples", "samples"), ("shells", "shells"), ("workers", "workers"),
                      ("method", "method"), ("far_field_cut", "far_field_cut"),
                      ("quad_grid", "grid")):
        v = getattr(args, flag, None)
        if v is not None:
            quad[key] = v
    cfg["quad"] = quad
    cfg["family"] = args.family or "bump"
    cfg["dim"] = args.dim if args.dim is not None else 1
    for k in ("R", "r", "s", "smoothing", "c", "support"):
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    if getattr(args, "allow_unbounded", False):
        cfg["allow_unbounded"] = True
    for k in ("p", "q", "tau", "a", "alpha", "beta", "sigma", "m", "n"):
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    for k in ("geom_r", "geom_R"):
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    if getattr(args, "case", None):
        cfg["case"] = args.case
    if getattr(args, "functional", None):
        cfg["functional"] = args.functional
    if getattr(args, "delta", None) is not None:
        cfg["delta"] = args.delta
    if getattr(args, "delta_grid", None):
        cfg["delta_grid"] = list(_parse_delta_grid(args.delta_grid))
    if getattr(args, "lam", None) is not None:
        cfg["lam"] = args.lam
    if getattr(args, "R_list", None):
        radii = [float(x) for x in args.R_list.split(",")]
        cfg["family_grid"] = [{"R": r} for r in radii]
    cfg["check"] = bool(args.check)
    cfg["out"] = args.out or "out.csv"
    cfg["summary_path"] = getattr(args, "summary", None)
    return cfg


def run(config: dict) -> int:
    """Execute a resolved configuration; returns the exit status."""
    command = config.get("command")
    if command not in _COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    if command in ("klimit", "verify", "sweep", "constant") and config.get("case") != "HOLDER":
        if command != "klimit" and not config.get("case"):
            raise ConfigError("a case id is required")
        if not config.get("delta_grid"):
            raise ConfigError("a delta grid is required")
    if command in ("energy", "profile") and config.get("delta") is None:
        raise ConfigError("a delta value is required")
    return _COMMANDS[command](config)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        status = run(cfg)
    except ConfigError as exc:  # includes hypothesis/parameter violations
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except NlhardyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return status


if __name__ == "__main__":
    sys.exit(main())
