"""Command-line front end: ``central-mpo <subcommand> ...``.

Exit codes: 0 accept/pass, 1 reject/fail, 2 usage, input or resource error.
Reports are JSON (sorted keys) on stdout unless ``-o`` is given.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from .operators import DENSE_CAP, EIGEN_CAP, LocalOperator, ResourceError

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class InputError(ValueError):
    """Malformed input file; the message names the offending location."""


@dataclass
class RunConfig:
    subcommand: str
    action: str | None = None
    inputs: dict = field(default_factory=dict)
    output: str | None = None
    tol: float | None = None
    cap: int = DENSE_CAP
    seed: int = 0
    fmt: str = "json"
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.cap <= 0:
            raise InputError("caps must be positive")


# io -------------------------------------------------------------------------

def _read_json(path: str, what: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{what} {path}: {exc.strerror}") from exc
    if not text.strip():
        return None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} {path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _parse(path: str, what: str, loader):
    data = _read_json(path, what)
    if data is None:
        raise InputError(f"{what} {path}: empty file")
    try:
        return loader(data)
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        key = f"missing key {exc}" if isinstance(exc, KeyError) else str(exc)
        raise InputError(f"{what} {path}: {key}") from exc


def _load_model(path: str):
    from .lattice import LatticeModel
    return _parse(path, "model", LatticeModel.from_dict)


def _load_mpo(path: str):
    from .mpo import MPO
    return _parse(path, "mpo", MPO.from_dict)


def _load_table(name: str):
    from .levin_wen import FSymbolTable, fibonacci_table, z2_table
    builtin = {"fibonacci": fibonacci_table, "fib": fibonacci_table, "z2": z2_table}
    if name in builtin:
        return builtin[name]()
    return _parse(name, "ftable", FSymbolTable.from_dict)


def _sites(data, where: str) -> list:
    try:
        return [tuple(int(c) for c in s) for s in data]
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: expected a list of [x, y] pairs") from exc


def _clean(v):
    """Convert numpy scalars and tuples so the report is plain JSON."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    return v


def _text(report: dict, indent: str = "") -> str:
    lines = []
    for k in sorted(report):
        v = report[k]
        if isinstance(v, dict):
            lines.append(f"{indent}{k}:")
            lines.append(_text(v, indent + "  "))
        else:
            lines.append(f"{indent}{k}: {json.dumps(v)}")
    return "\n".join(lines)


def emit(report: dict, cfg: RunConfig, out=None) -> None:
    report = _clean({**report, "seed": cfg.seed})
    body = json.dumps(report, sort_keys=True, indent=2) if cfg.fmt == "json" else _text(report)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(body + "\n")
    else:
        (out or sys.stdout).write(body + "\n")


# subcommands ------------------------------------------------------------------

def _flip(text: str):
    try:
        parts = [tuple(int(c) for c in p.split(",")) for p in text.split(":")]
    except ValueError as exc:
        raise InputError(f"--flip {text!r}: expected x,y or x1,y1:x2,y2") from exc
    if len(parts) == 1 and len(parts[0]) == 2:
        return parts[0]
    if len(parts) == 2 and all(len(p) == 2 for p in parts):
        return tuple(parts)
    raise InputError(f"--flip {text!r}: expected x,y or x1,y1:x2,y2")


def cmd_model(cfg: RunConfig):
    from .lattice import build_toric_code, validate
    if cfg.action == "build":
        o = cfg.options
        flips = [_flip(f) for f in o["flip"] or []]
        model = build_toric_code(o["L"], o["Ly"], o["edges"], flips, require_even=not o["odd"])
        # the model itself is the output; the seed rides along in meta
        model.meta["seed"] = cfg.seed
        return EXIT_PASS, model.to_dict()
    model = _load_model(cfg.inputs["model"])
    rep = validate(model, cfg.tol if cfg.tol is not None else 1e-9)
    return (EXIT_PASS if rep["passed"] else EXIT_FAIL), rep


def cmd_mpo(cfg: RunConfig):
    from .mpo import multiply
    a = _load_mpo(cfg.inputs["mpo"][0])
    if cfg.action == "info":
        return EXIT_PASS, {"length": a.length, "phys_dims": a.phys_dims, "bond_dims": a.bond_dims,
                           "max_bond": a.max_bond, "norm": a.norm(), "trace": complex(a.trace())}
    if cfg.action == "dense":
        m = a.to_dense(cfg.cap)
        return EXIT_PASS, {"dim": m.shape[0], "matrix": [[[z.real, z.imag] for z in row] for row in m]}
    if cfg.action == "multiply":
        if len(cfg.inputs["mpo"]) != 2:
            raise InputError("mpo multiply takes exactly two files")
        out = multiply(a, _load_mpo(cfg.inputs["mpo"][1]))
    else:
        out = a.compress(cfg.tol if cfg.tol is not None else 1e-12)
    return EXIT_PASS, out.to_dict()


def cmd_verify(cfg: RunConfig):
    from .verifier import Witness, verify_witness
    model = _load_model(cfg.inputs["model"])
    w = _parse(cfg.inputs["witness"], "witness", Witness.from_dict)
    widest = max(model.total_dim(model.column(C)) for C in range(model.Lx))
    if widest > cfg.cap:
        return EXIT_ERROR, {"verdict": "unable", "reason": f"unable to verify: column dimension {widest} exceeds cap {cfg.cap}"}
    rep = verify_witness(model, w, cfg.tol if cfg.tol is not None else 1e-8)
    code = {"accept": EXIT_PASS, "reject": EXIT_FAIL}.get(rep.verdict, EXIT_ERROR)
    return code, {**rep.to_dict(), "bond_dims": {str(C): b for C, b in w.bond_dims.items()}}


def _region(path: str, model):
    from .breakability import boundary_of
    data = _read_json(path, "region")
    if not isinstance(data, dict) or "S" not in data:
        raise InputError(f"region {path}: expected an object with key 'S'")
    parts = {k: _sites(data.get(k, []), f"region {path}: {k}") for k in ("S", "A", "X", "Y")}
    return boundary_of(model, parts["S"], parts["A"], parts["X"], parts["Y"])


def cmd_break(cfg: RunConfig):
    from .breakability import HypothesisFailure, break_three, break_two
    model = _load_model(cfg.inputs["model"])
    op = _parse(cfg.inputs["op"], "op", LocalOperator.from_dict)
    region = _region(cfg.inputs["region"], model)
    tol = cfg.tol if cfg.tol is not None else 1e-8
    if region.X or region.Y:
        out = break_three(op, region, model, seed=cfg.seed, tol=tol)
        kind = "three"
    else:
        out = break_two(op, region, model, seed=cfg.seed, tol=tol)
        kind = "two"
    if isinstance(out, HypothesisFailure):
        return EXIT_FAIL, {"split": kind, "region": region.to_dict(), **out.to_dict()}
    ok = out.reconstruction_residual <= tol and out.all_commuting()
    return (EXIT_PASS if ok else EXIT_FAIL), {"split": kind, "region": region.to_dict(), **out.to_dict()}


def cmd_holes(cfg: RunConfig):
    from .breakability import holes_split
    model = _load_model(cfg.inputs["model"])
    data = _read_json(cfg.inputs["holes"], "holes")
    holes = data.get("holes") if isinstance(data, dict) else data
    if not isinstance(holes, list):
        raise InputError(f"holes {cfg.inputs['holes']}: expected a list of site lists")
    holes = [_sites(h, f"holes {cfg.inputs['holes']}: hole {k}") for k, h in enumerate(holes)]
    rep = holes_split(model, holes, cfg.seed)
    return (EXIT_PASS if rep.verdict == "zero state" else EXIT_FAIL), rep.to_dict()


def cmd_foursite(cfg: RunConfig):
    from . import four_site as fs
    o = cfg.options
    if cfg.action == "analyze":
        model = _load_model(cfg.inputs["model"])
        p = fs.four_site_from_column(model, o["column"], o["center"], o["grouping"], cfg.seed)
        r = fs.boundary_algebra(p, cfg.seed)
        rep = {"problem": p.to_dict(), "boundary_algebra": r.to_dict(), "effective": fs.effective_iso_check(r)}
        rep["bounds"] = {v: fs._jsonable(fs.bound_check(p, v, cfg.seed)) for v in o["variants"]}
        return EXIT_PASS, rep
    if cfg.action == "bounds":
        seeds = range(cfg.seed, cfg.seed + o["count"])
        camp = fs.bound_campaign(seeds, tuple(o["variants"]))
        bad = sum(len(v["violations"]) for v in camp.values())
        return (EXIT_FAIL if bad else EXIT_PASS), {"seeds": [seeds.start, seeds.stop], "variants": camp}
    model = _load_model(cfg.inputs["model"])
    res = fs.theorem3_witness(model, cfg.seed)
    rep = {"verdict": res.verdict, "reason": res.reason, "report": fs._jsonable(res.report)}
    if res.witness is not None:
        rep["witness"] = res.witness.to_dict()
    return (EXIT_PASS if res.verdict == "witness" else EXIT_FAIL), rep


def cmd_lw(cfg: RunConfig):
    from .levin_wen import b_loop_mpo, pentagon_check, trim_bonds
    table = _load_table(cfg.inputs["ftable"])
    if cfg.action == "pentagon":
        rep = pentagon_check(table)
        tol = cfg.tol if cfg.tol is not None else 1e-8
        ok = rep["residual"] <= tol and rep["inadmissible_nonzero"] == 0
        return (EXIT_PASS if ok else EXIT_FAIL), {**rep, "tol": tol}
    o = cfg.options
    try:
        m = b_loop_mpo(table, o["s"], o["n"])
    except ValueError as exc:
        raise InputError(f"lw mpo: {exc}") from exc
    if o["trim"]:
        m = trim_bonds(m)
    return EXIT_PASS, m.to_dict()


# campaigns ------------------------------------------------------------------------

def _case_seeds(section: dict, where: str) -> list:
    if "seeds" in section:
        return [int(s) for s in section["seeds"]]
    if "count" in section:
        start = int(section.get("start", 0))
        return list(range(start, start + int(section["count"])))
    raise InputError(f"{where}: give 'seeds' or 'count'")


def _bounds_cases(section: dict) -> tuple:
    from .four_site import bound_campaign
    seeds = _case_seeds(section, "campaign bounds")
    camp = bound_campaign(seeds, tuple(section.get("variants", ("base", "proj", "coro", "coro2"))))
    fails = [{"variant": v, **f} for v, slot in camp.items() for f in slot["violations"]]
    return len(seeds), fails, camp


def _propagation_cases(section: dict) -> tuple:
    from .lattice import random_commuting_model
    from .verifier import propagation_equivalence
    tol = float(section.get("tol", 1e-9))
    Lx, Ly = int(section.get("Lx", 2)), int(section.get("Ly", 4))
    seeds = _case_seeds(section, "campaign propagation")
    fails, worst = [], 0.0
    for s in seeds:
        model = random_commuting_model(Lx, Ly, s)
        dev = max(propagation_equivalence(model, s), default=0.0)
        worst = max(worst, dev)
        if dev > tol:
            fails.append({"seed": s, "instance": model.to_dict(), "deviation": dev})
    return len(seeds), fails, {"max_deviation": worst, "tol": tol}


def _mask_cases(section: dict) -> tuple:
    from .lattice import column_decomposition, random_commuting_model
    from .verifier import is_mask
    tol = float(section.get("tol", 1e-9))
    Lx, Ly = int(section.get("Lx", 3)), int(section.get("Ly", 2))
    seeds = _case_seeds(section, "campaign masks")
    fails, worst = [], 0.0
    for s in seeds:
        model = random_commuting_model(Lx, Ly, s)
        for C in range(1, Lx - 1):
            for p in column_decomposition(model, C, "left", s).projectors:
                rep = is_mask(p, model, C, seed=s, tol=tol)
                worst = max(worst, rep.max_deviation)
                if not rep.is_mask:
                    fails.append({"seed": s, "column": C, "instance": model.to_dict(), "deviation": rep.max_deviation})
    return len(seeds), fails, {"max_deviation": worst, "tol": tol}


SUITES = {"bounds": _bounds_cases, "propagation": _propagation_cases, "masks": _mask_cases}


def cmd_campaign(cfg: RunConfig):
    spec = _read_json(cfg.inputs["spec"], "campaign")
    if spec is None:
        spec = {}
    if not isinstance(spec, dict):
        raise InputError(f"campaign {cfg.inputs['spec']}: expected an object")
    unknown = sorted(set(spec) - set(SUITES) - {"seed"})
    if unknown:
        raise InputError(f"campaign {cfg.inputs['spec']}: unknown suites {unknown}")
    suites = {}
    ok = True
    for name in sorted(set(spec) & set(SUITES)):
        cases, fails, detail = SUITES[name](spec[name])
        suites[name] = {"cases": cases, "failures": fails, "pass_rate": 1.0 if not cases else 1 - len(fails) / cases,
                        "detail": detail}
        ok = ok and not fails
    return (EXIT_PASS if ok else EXIT_FAIL), {"suites": suites, "passed": ok}


COMMANDS = {"model": cmd_model, "mpo": cmd_mpo, "verify": cmd_verify, "break": cmd_break, "holes": cmd_holes,
            "foursite": cmd_foursite, "lw": cmd_lw, "campaign": cmd_campaign}


def dispatch(cfg: RunConfig, out=None) -> int:
    """Run one configured command; the report goes to ``cfg.output`` or ``out``."""
    try:
        code, report = COMMANDS[cfg.subcommand](cfg)
    except InputError as exc:
        code, report = EXIT_ERROR, {"error": "input", "reason": str(exc)}
    except ResourceError as exc:
        code, report = EXIT_ERROR, {"error": "resource", "reason": str(exc)}
    emit(report, cfg, out)
    return code


# argument parsing ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, help="override the default tolerance")
    common.add_argument("--cap", type=int, help="dimension cap (verify: column cap, default EIGEN_CAP)")
    common.add_argument("--format", choices=("json", "text"), default="json")

    ap = argparse.ArgumentParser(prog="central-mpo", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="subcommand", required=True)

    model = sub.add_parser("model", help="build or validate lattice models").add_subparsers(dest="action", required=True)
    b = model.add_parser("build", parents=[common])
    b.add_argument("kind", choices=("toric",))
    b.add_argument("--L", type=int, required=True)
    b.add_argument("--Ly", type=int)
    b.add_argument("--edges", default="tb", choices=("", "tb", "lr", "tblr"))
    b.add_argument("--flip", action="append", help="plaquette x,y or edge x1,y1:x2,y2 (repeatable)")
    b.add_argument("--odd", action="store_true", help="allow odd side lengths")
    v = model.add_parser("validate", parents=[common])
    v.add_argument("model")

    mpo = sub.add_parser("mpo", help="inspect and combine MPO files").add_subparsers(dest="action", required=True)
    for name in ("info", "dense", "compress"):
        mpo.add_parser(name, parents=[common]).add_argument("mpo", nargs=1)
    mpo.choices["compress"].add_argument("--threshold", type=float, dest="tol")
    mpo.add_parser("multiply", parents=[common]).add_argument("mpo", nargs=2)

    ver = sub.add_parser("verify", parents=[common], help="check a column-projector witness")
    ver.add_argument("--model", required=True)
    ver.add_argument("--witness", required=True)

    br = sub.add_parser("break", parents=[common], help="split a central operator across a region boundary")
    br.add_argument("--model", required=True)
    br.add_argument("--op", required=True)
    br.add_argument("--region", required=True)

    ho = sub.add_parser("holes", parents=[common], help="split a model into exterior and hole interiors")
    ho.add_argument("--model", required=True)
    ho.add_argument("--holes", required=True)

    fs = sub.add_parser("foursite", help="boundary-algebra analysis").add_subparsers(dest="action", required=True)
    an = fs.add_parser("analyze", parents=[common])
    an.add_argument("--model", required=True)
    an.add_argument("--column", type=int, required=True)
    an.add_argument("--center", type=int, required=True)
    an.add_argument("--grouping", default="left_only", choices=("left_only", "both"))
    an.add_argument("--variant", action="append", dest="variants", choices=("base", "proj", "coro", "coro2"))
    bd = fs.add_parser("bounds", parents=[common])
    bd.add_argument("--variant", action="append", dest="variants", choices=("base", "proj", "coro", "coro2"))
    bd.add_argument("--count", type=int, default=100, help="number of seeds, starting at --seed")
    wi = fs.add_parser("witness", parents=[common])
    wi.add_argument("--model", required=True)

    lw = sub.add_parser("lw", help="string-net loop operators").add_subparsers(dest="action", required=True)
    lm = lw.add_parser("mpo", parents=[common])
    lm.add_argument("--ftable", required=True, help="F-table JSON, or 'fibonacci' / 'z2'")
    lm.add_argument("--s", required=True, help="loop label")
    lm.add_argument("--n", type=int, required=True, help="loop length")
    lm.add_argument("--trim", action="store_true", help="drop unused bond values")
    lw.add_parser("pentagon", parents=[common]).add_argument("--ftable", required=True)

    ca = sub.add_parser("campaign", parents=[common], help="randomized property suites")
    ca.add_argument("spec")
    return ap


INPUT_KEYS = ("model", "witness", "op", "region", "holes", "ftable", "spec", "mpo")
OPTION_KEYS = ("kind", "L", "Ly", "edges", "flip", "odd", "column", "center", "grouping", "variants", "count",
               "s", "n", "trim")


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    d = vars(ns)
    opts = {k: d[k] for k in OPTION_KEYS if k in d}
    if "variants" in opts and not opts["variants"]:
        opts["variants"] = ["base", "proj", "coro", "coro2"]
    cap = ns.cap if ns.cap is not None else (EIGEN_CAP if ns.subcommand == "verify" else DENSE_CAP)
    return RunConfig(ns.subcommand, d.get("action"), {k: d[k] for k in INPUT_KEYS if d.get(k) is not None},
                     ns.output, ns.tol, cap, ns.seed, ns.format, opts)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except InputError as exc:
        print(f"central-mpo: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
