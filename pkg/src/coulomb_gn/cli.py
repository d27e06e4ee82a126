"""Command-line front end.

Every command except ``check-params`` and ``hardy-const`` writes a run
directory ``<command>-<timestamp>-<confighash>`` under ``--out`` (default:
``$COULOMB_GN_OUT`` or ``./runs``) holding ``result.json``, ``result.csv`` and
``record.json``; each file carries the echoed config and the tool version.

Exit codes: 0 success, 2 domain or admissibility rejection, 1 anything else
(including unparseable arguments).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime as dt
import hashlib
import io
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__, acceptance, constants, inequality, manybody, params, profiles
from .errors import DomainError, LabError
from .quad import Method, QuadratureSpec

OUT_ENV = "COULOMB_GN_OUT"
DEFAULT_OUT = "runs"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad input; that code is reserved for domain rejections."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- argument types

def number(text: str):
    try:
        return params.parse_number(text)
    except (LabError, ValueError, TypeError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def float_list(text: str) -> list[float]:
    try:
        return [float(params.parse_number(t)) for t in text.replace(";", ",").split(",") if t.strip()]
    except (LabError, ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number list: {text!r}") from exc


def int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from exc


def tuple_list(text: str) -> list[tuple[float, ...]]:
    """'3,1,2;1,0.25,2' -> [(3, 1, 2), (1, 0.25, 2)]"""
    return [tuple(float_list(chunk)) for chunk in text.split(";") if chunk.strip()]


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else x.numerator
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, float) and x != x:
        return None
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "value") and hasattr(x, "name"):  # enums
        return x.value
    return x


# ---------------------------------------------------------------- run records

@dataclass
class RunConfig:
    command: str
    options: dict
    seed: int = 0
    out: str = DEFAULT_OUT
    formats: tuple = ("json", "csv")

    def to_json(self) -> dict:
        return {"command": self.command, "options": _jsonable(self.options), "seed": self.seed,
                "formats": list(self.formats)}

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:10]


@dataclass
class RunRecord:
    run_id: str
    inputs: dict
    outputs: list = field(default_factory=list)
    version: str = __version__
    wall_time_s: float = 0.0


def _run_dir(cfg: RunConfig) -> tuple[str, Path]:
    stamp = dt.datetime.now().strftime("%Y%m%dT%H%M%S")
    base = f"{cfg.command}-{stamp}-{cfg.digest()}"
    root = Path(cfg.out)
    root.mkdir(parents=True, exist_ok=True)
    for k in range(1000):
        run_id = base if k == 0 else f"{base}-{k}"
        path = root / run_id
        try:
            path.mkdir()
            return run_id, path
        except FileExistsError:
            continue
    raise LabError("RUN_DIR", f"could not create a fresh run directory under {root}")


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def persist(cfg: RunConfig, result: dict, rows: list[dict] | str | None, seconds: float) -> Path:
    run_id, path = _run_dir(cfg)
    echo = cfg.to_json()
    record = RunRecord(run_id, echo, wall_time_s=seconds)
    if "json" in cfg.formats:
        doc = {"run_id": run_id, "version": __version__, "config": echo, "wall_time_s": seconds,
               "result": _jsonable(result)}
        (path / "result.json").write_text(json.dumps(doc, indent=2) + "\n")
        record.outputs.append("result.json")
    if "csv" in cfg.formats and rows is not None:
        body = rows if isinstance(rows, str) else _csv_text(_jsonable(rows))
        head = f"# version: {__version__}\n# run_id: {run_id}\n# config: {json.dumps(echo, sort_keys=True)}\n"
        (path / "result.csv").write_text(head + body)
        record.outputs.append("result.csv")
    record.outputs.append("record.json")
    (path / "record.json").write_text(json.dumps(asdict(record), indent=2) + "\n")
    return path


# ---------------------------------------------------------------- shared builders

GN_PRESETS: dict[str, Callable[[], params.ParamSet]] = {
    "lions": params.lions_params,
    "inadmissible-d3": acceptance.inadmissible_preset,
}

STATE_PRESETS = {
    "product-bump-d1": lambda: profiles.parametric("bump", (0.5, 0.8), 1),
    "product-gaussian-d1": lambda: profiles.parametric("gaussian", (0.7,), 1),
    "product-two-bump-d1": lambda: profiles.parametric("shell_bump", (1.5, 0.5), 1),
    "product-gaussian-d3": lambda: profiles.parametric("gaussian", (1.0,), 3),
}


def _add_param_flags(p: argparse.ArgumentParser, with_betas: bool = True) -> None:
    g = p.add_argument_group("parameter tuple")
    for name in ("d", "s", "p", "q", "alpha", "gamma"):
        g.add_argument(f"--{name}", type=number)
    if with_betas:
        g.add_argument("--beta1", type=number, help="explicit beta1 (degenerate tuples)")
        g.add_argument("--beta2", type=number)


def _add_quad_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("quadrature")
    g.add_argument("--method", choices=[m.value for m in Method],
                   default="RADIAL_REDUCED")
    g.add_argument("--target-rel-err", type=float, default=1e-6)
    g.add_argument("--radial-nodes", type=int, default=12)
    g.add_argument("--mc-samples", type=int, default=200_000)
    g.add_argument("--grid-cells", type=int, default=32)


def _add_function_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("trial function")
    g.add_argument("--function", default="gaussian", help=f"family: {', '.join(sorted(profiles.FAMILIES))}")
    g.add_argument("--function-params", type=float_list, default=[1.0])
    g.add_argument("--descriptor", help="JSON trial-function descriptor (overrides --function)")


def _spec(a) -> QuadratureSpec:
    return QuadratureSpec(method=a.method, radial_nodes=a.radial_nodes, mc_samples=a.mc_samples,
                          seed=a.seed, target_rel_err=a.target_rel_err, grid_cells=a.grid_cells)


def _gn_params(a) -> params.ParamSet:
    if getattr(a, "preset", None) in GN_PRESETS:
        return GN_PRESETS[a.preset]()
    missing = [n for n in ("d", "s", "p", "q", "alpha", "gamma") if getattr(a, n) is None]
    if missing:
        raise UsageError(f"missing parameters: {', '.join('--' + m for m in missing)}")
    if getattr(a, "beta1", None) is not None or getattr(a, "beta2", None) is not None:
        if a.beta1 is None or a.beta2 is None:
            raise UsageError("--beta1 and --beta2 go together")
        return params.ParamSet(a.d, a.s, a.p, a.q, a.alpha, a.beta1, a.beta2, a.gamma)
    return params.ParamSet.from_gamma(a.d, a.s, a.p, a.q, a.alpha, a.gamma)


def _trial(a, d: int) -> profiles.TrialFunction:
    if a.descriptor:
        path = Path(a.descriptor)
        g = profiles.from_descriptor(json.loads(path.read_text()), base_dir=path.parent)
    else:
        g = profiles.parametric(a.function, a.function_params, d)
    if g.d != d:
        raise DomainError("DIMENSION_MISMATCH", f"function has d={g.d}, parameters have d={d}")
    return g


# ---------------------------------------------------------------- commands

def cmd_check_params(a) -> tuple[int, dict]:
    ps = _gn_params(a)
    rep = params.check_gn_admissible(ps)
    out = {"params": ps.to_json(), "gn": rep.to_json()}
    code = 0 if rep.admissible else 2
    if a.gamma_prime is not None:
        ckn = params.CknParamSet(ps, a.gamma_prime, a.tau_prime or 0, a.a11 or 0, a.a12 or 0,
                                 a.a21 or 0, a.a22 or 0)
        crep = params.ckn_report(ckn)
        out["ckn"] = crep.to_json()
        code = 0 if crep.conclusive else 2
    return code, out


def cmd_hardy_const(a) -> tuple[int, dict]:
    h = constants.hardy_constant(a.d, a.s, a.p)
    return 0, {"d": a.d, "s": a.s, "p": a.p, **h.to_json()}


def cmd_constants(a) -> tuple[int, dict, list]:
    rows = constants.constants_rows(
        [(int(d), s, p) for d, s, p in a.hardy],
        a.remainder,
        [(int(d), g) for d, g in a.fdl],
    )
    return 0, {"rows": rows}, constants.constants_csv(rows)


def cmd_evaluate(a) -> tuple[int, dict, list]:
    spec = _spec(a)
    if a.preset == "hardy-ckn-d3":
        ckn = params.hardy_ckn_params(3, Fraction(1, 2), 2)
        g = profiles.power_weighted(_trial(a, 3), 1.0)  # |x|^{(d-sp)/p} g
        rep = inequality.ckn_ratio(g, ckn, spec)
        ptxt = ckn.to_json()
    else:
        ps = _gn_params(a)
        rep = inequality.gn_ratio(_trial(a, ps.d), ps, spec, allow_inadmissible=a.allow_inadmissible)
        ptxt = ps.to_json()
    out = {"params": ptxt, "report": rep.to_json()}
    row = {"lhs": rep.lhs, "ratio": rep.ratio, "est_rel_err": rep.est_rel_err, "flags": "|".join(rep.flags)}
    return 0, out, [row]


def cmd_estimate_constant(a) -> tuple[int, dict, list]:
    spec = _spec(a)
    ps = _gn_params(a)
    if a.family == "mixture":
        fam = inequality.mixture_family(ps.d)
    else:
        fam = inequality.dilation_family(_trial(a, ps.d))
    res = inequality.estimate_best_constant(ps, fam, budget=a.budget, spec=spec, seed=a.seed, starts=a.starts)
    rows = [{"index": t.index, "start": t.start, "ratio": t.ratio, "error": t.error or "",
             "params": " ".join(f"{x:.6g}" for x in t.params)} for t in res.trace]
    return 0, {"params": ps.to_json(), "family": fam.name, "search": res.to_json()}, rows


def cmd_counterexample(a) -> tuple[int, dict, str]:
    ps = _gn_params(a)
    res = inequality.counterexample_scan(ps, a.m, _spec(a))
    return 0, {"params": ps.to_json(), "scan": res.to_json()}, res.to_csv()


def _state(a) -> manybody.WavefunctionN:
    if a.grid:
        return manybody.WavefunctionN.from_grid_file(a.grid, a.p)
    if a.preset == "grid-random-d1":
        rng = np.random.default_rng(a.seed)
        return acceptance.random_grid_state(rng, a.N, a.n, p=a.p)
    return manybody.WavefunctionN.product(STATE_PRESETS[a.preset](), a.N, a.p)


def cmd_manybody(a) -> tuple[int, dict, list]:
    if a.check == "fdl":
        if len(a.x) != len(a.y):
            raise UsageError("--x and --y need the same dimension")
        r = manybody.fdl_reconstruct(a.x, a.y, a.gamma)
        row = asdict(r)
        return 0, {"x": a.x, "y": a.y, "gamma": a.gamma, **row}, [row]
    psi = _state(a)
    if a.check == "hoffman-ostenhof":
        rep = manybody.hoffman_ostenhof_report(psi, a.s)
        extra = {"holds": rep.holds}
    elif a.check == "lieb-oxford":
        rep = manybody.lieb_oxford_report(psi, a.gamma, a.cells)
        extra = {"holds": rep.holds, "abs_err": rep.abs_err}
    else:
        rep = manybody.hlt_report(psi, a.s)
        extra = {"slot_identity_error": rep.slot_identity_error}
    doc = {**rep.to_json(), **extra}
    row = {k: v for k, v in doc.items() if not isinstance(v, (dict, list))}
    return 0, {"state": {"N": psi.N, "d": psi.d, "kind": psi.kind.value, "p": psi.p}, "report": doc}, [row]


def cmd_verify(a) -> tuple[int, dict, list]:
    res = acceptance.run_suite(a.suite, log=lambda line: print(line, flush=True))
    rows = [{"criterion": c.number, "title": c.title, "passed": c.passed, "seconds": round(c.seconds, 3)}
            for c in res.criteria]
    return (0 if res.passed else 1), res.to_json(), rows


# ---------------------------------------------------------------- parser

def _common(p: argparse.ArgumentParser, saves: bool) -> None:
    p.add_argument("--config", help="INI file; keys under [run] and [<command>] set flag defaults")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None,
                   help=f"output root (default ${OUT_ENV} or ./{DEFAULT_OUT})" + ("" if saves else
                                                                                 "; printing only unless given"))
    p.add_argument("--format", type=lambda t: tuple(x.strip() for x in t.split(",")), default=("json", "csv"),
                   help="comma list from {json, csv}")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    top = _Parser(prog="coulomb-gn", description="Coulomb-Sobolev inequality laboratory")
    top.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)
    by_name = {}

    p = sub.add_parser("check-params", help="admissibility of a parameter tuple")
    _common(p, False)
    _add_param_flags(p)
    p.add_argument("--preset", choices=sorted(GN_PRESETS))
    for name in ("gamma-prime", "tau-prime", "a11", "a12", "a21", "a22"):
        p.add_argument(f"--{name}", type=number)
    by_name["check-params"] = p

    p = sub.add_parser("hardy-const", help="sharp Hardy constant")
    _common(p, False)
    for name in ("d", "s", "p"):
        p.add_argument(f"--{name}", type=float, required=True)
    by_name["hardy-const"] = p

    p = sub.add_parser("constants", help="table of constants (CSV)")
    _common(p, True)
    p.add_argument("--hardy", type=tuple_list, default=[(3, 1, 2), (3, 0.5, 2), (1, 0.25, 2)],
                   help="'d,s,p;d,s,p;...'")
    p.add_argument("--remainder", type=float_list, default=[2.0, 3.0, 4.0])
    p.add_argument("--fdl", type=tuple_list, default=[(1, 0.5), (2, 1.0), (3, 1.0)], help="'d,gamma;...'")
    by_name["constants"] = p

    p = sub.add_parser("evaluate", help="ratio for one trial function")
    _common(p, True)
    _add_param_flags(p)
    p.add_argument("--preset", choices=sorted(GN_PRESETS) + ["hardy-ckn-d3"])
    p.add_argument("--allow-inadmissible", action="store_true")
    _add_function_flags(p)
    _add_quad_flags(p)
    by_name["evaluate"] = p

    p = sub.add_parser("estimate-constant", help="derivative-free search for the best constant")
    _common(p, True)
    _add_param_flags(p)
    p.add_argument("--preset", choices=sorted(GN_PRESETS))
    p.add_argument("--family", choices=["mixture", "dilation"], default="mixture")
    p.add_argument("--budget", type=int, default=400)
    p.add_argument("--starts", type=int, default=8)
    _add_function_flags(p)
    _add_quad_flags(p)
    by_name["estimate-constant"] = p

    p = sub.add_parser("counterexample", help="bump-train growth scan")
    _common(p, True)
    _add_param_flags(p)
    p.add_argument("--preset", choices=sorted(GN_PRESETS))
    p.add_argument("--m", type=int_list, default=[2, 4, 8, 16, 32])
    _add_quad_flags(p)
    by_name["counterexample"] = p

    p = sub.add_parser("manybody", help="many-body checks")
    _common(p, True)
    p.add_argument("check", choices=["hoffman-ostenhof", "lieb-oxford", "hlt", "fdl"])
    p.add_argument("--preset", choices=sorted(STATE_PRESETS) + ["grid-random-d1"], default="product-bump-d1")
    p.add_argument("--grid", help="grid header file for a d=1 N-particle state")
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--n", type=int, default=32, help="cells per axis for grid-random-d1")
    p.add_argument("--s", type=float, default=0.25)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--cells", type=int, default=None)
    p.add_argument("--x", type=float_list, default=[0.0])
    p.add_argument("--y", type=float_list, default=[1.0])
    by_name["manybody"] = p

    p = sub.add_parser("verify", help="acceptance battery")
    _common(p, True)
    p.add_argument("--suite", choices=list(acceptance.SUITES), default="quick")
    by_name["verify"] = p
    return top, by_name


def _apply_config(path: str, command: str, parser: argparse.ArgumentParser) -> None:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise UsageError(f"cannot read config file {path!r}")
    actions = {a.dest: a for a in parser._actions}
    defaults = {}
    for section in ("run", command):
        if not cp.has_section(section):
            continue
        for key, raw in cp.items(section):
            dest = key.replace("-", "_")
            if dest not in actions:
                raise UsageError(f"unknown config key {key!r} in [{section}]")
            act = actions[dest]
            if act.const is True and act.nargs == 0:  # store_true
                defaults[dest] = cp.getboolean(section, key)
            else:
                try:
                    defaults[dest] = act.type(raw) if act.type else raw
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    raise UsageError(f"config key {key!r}: {exc}") from exc
    parser.set_defaults(**defaults)


HANDLERS = {
    "check-params": cmd_check_params,
    "hardy-const": cmd_hardy_const,
    "constants": cmd_constants,
    "evaluate": cmd_evaluate,
    "estimate-constant": cmd_estimate_constant,
    "counterexample": cmd_counterexample,
    "manybody": cmd_manybody,
    "verify": cmd_verify,
}
PRINT_ONLY = {"check-params", "hardy-const"}


def run(argv: list[str]) -> int:
    top, by_name = build_parser()
    args = top.parse_args(argv)
    if args.config:
        _apply_config(args.config, args.command, by_name[args.command])
        args = top.parse_args(argv)
    bad = set(args.format) - {"json", "csv"}
    if bad:
        raise UsageError(f"unknown formats: {sorted(bad)}")

    t0 = time.perf_counter()
    out = HANDLERS[args.command](args)
    seconds = time.perf_counter() - t0
    code, result = out[0], out[1]
    rows = out[2] if len(out) > 2 else None

    options = {k: v for k, v in vars(args).items() if k not in ("command", "config", "out", "seed", "format")}
    root = args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT
    cfg = RunConfig(args.command, options, args.seed, root, tuple(args.format))
    if args.command not in PRINT_ONLY or args.out:
        path = persist(cfg, result, rows, seconds)
        print(f"run directory: {path}", file=sys.stderr)
    if args.command != "verify":
        print(json.dumps(_jsonable(result), indent=2))
    return code


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        return run(argv)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except LabError as exc:
        print(json.dumps({"error": exc.code, "message": exc.message, "payload": _jsonable(exc.payload)}))
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
