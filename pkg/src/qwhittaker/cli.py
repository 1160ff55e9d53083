"""Command-line front end.

Subcommands ``qpsi``, ``eigen``, ``givental``, ``limit``, ``asymptotics`` and
``hamlimit`` each emit a report as JSON (default) or CSV.  Exit status is 0
on success, 1 on a malformed configuration and 2 when a verification fails
(an exact check is violated or the quadrature does not converge).

Defaults can be overridden by ``--config file.json`` (keys are option names
with dashes replaced by underscores) and by the environment variables
``QWHITTAKER_TRUNCATION`` and ``QWHITTAKER_NODES``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from fractions import Fraction
from typing import Any, Sequence

from . import givental, qpsi, qtoda, scaling
from .qarith import GaussianRational, LaurentPoly, QSeries

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2
MAX_RANK = 5
SCHEMA_NAME = "report.schema.json"


class ConfigError(ValueError):
    """Malformed command line or configuration file."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# value parsing and formatting
# ---------------------------------------------------------------------------


def _split(text) -> list[str]:
    if isinstance(text, (list, tuple)):
        return [str(t) for t in text]
    parts = [t.strip() for t in str(text).split(",")]
    if not parts or any(t == "" for t in parts):
        raise ConfigError(f"malformed list {text!r}")
    return parts


def parse_ints(text) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in _split(text))
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


def parse_rational(text) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"expected a rational like 1/2, got {text!r}") from None


def parse_floats(text) -> tuple[float, ...]:
    try:
        out = tuple(float(t) for t in _split(text))
    except ValueError:
        raise ConfigError(f"expected comma-separated reals, got {text!r}") from None
    if not all(math.isfinite(v) for v in out):
        raise ConfigError(f"non-finite value in {text!r}")
    return out


def fmt_float(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


class _Raw(str):
    """A pre-formatted JSON number."""


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return _Raw(fmt_float(obj)) if math.isfinite(obj) else fmt_float(obj)
    if isinstance(obj, complex):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    if isinstance(obj, (Fraction, GaussianRational, LaurentPoly, QSeries)):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dump_json(obj: Any, indent: int = 0) -> str:
    """JSON text with floats written to 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, _Raw):
        return str(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {dump_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(inner + dump_json(v, indent + 1) for v in obj) + "\n" + pad + "]"
    return json.dumps(obj)


def _csv_cell(v: Any) -> str:
    if isinstance(v, float):
        return fmt_float(v)
    if isinstance(v, (list, tuple)):
        return " ".join(_csv_cell(x) for x in v)
    return str(v)


def _csv_table(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(rows[0]))
    for r in rows:
        w.writerow([_csv_cell(v) for v in r.values()])
    return buf.getvalue()


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return dump_json(_jsonable(report)) + "\n"
    parts = [_csv_table(t) for t in (report["results"], report["residuals"]) if t]
    return "\n".join(parts)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"environment variable {name} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qwhittaker", description="Evaluate q-Whittaker functions and study their q -> 1 limit.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        p.add_argument("--config", help="JSON file with option defaults")

    def quadrature(p):
        p.add_argument("--half-width", type=float, default=12.0)
        p.add_argument("--nodes", type=int, default=None, help="nodes per axis (default depends on rank)")
        p.add_argument("--tolerance", type=float, default=1e-6)

    p = sub.add_parser("qpsi", help="evaluate Psi at one weight")
    p.add_argument("--rank", type=int)
    p.add_argument("--weight")
    p.add_argument("--z", help="comma-separated rationals; omit for formal z")
    p.add_argument("--q", default="formal", help="rational such as 1/2, or 'formal'")
    p.add_argument("--method", choices=("direct", "recursive", "character"), default="direct")
    p.add_argument("--truncation", type=int, default=None)
    common(p)

    p = sub.add_parser("eigen", help="exact q-Toda eigen-residuals")
    p.add_argument("--rank", type=int)
    p.add_argument("--weight")
    p.add_argument("--q")
    common(p)

    p = sub.add_parser("givental", help="classical Whittaker function by quadrature")
    p.add_argument("--rank", type=int)
    p.add_argument("--x")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--h", type=float, default=0.05, help="finite-difference step for the eigen check")
    p.add_argument("--skip-eigencheck", action="store_true")
    quadrature(p)
    common(p)

    p = sub.add_parser("limit", help="q -> 1 convergence scan")
    p.add_argument("--rank", type=int)
    p.add_argument("--x")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--eps")
    p.add_argument("--convention", choices=scaling.M_CONVENTIONS, default="floor")
    quadrature(p)
    common(p)

    p = sub.add_parser("asymptotics", help="q-factorial asymptotics and eta modularity")
    p.add_argument("--y", default="-1,0,1")
    p.add_argument("--eps", default="0.1,0.05,0.025")
    p.add_argument("--alpha", default="1,2")
    p.add_argument("--eta-eps", default="1,2,6.283185307179586,8")
    p.add_argument("--convention", choices=scaling.M_CONVENTIONS, default="floor")
    common(p)

    p = sub.add_parser("hamlimit", help="q-Toda Hamiltonians against their classical limits")
    p.add_argument("--rank", type=int)
    p.add_argument("--x")
    p.add_argument("--eps", default="0.1,0.05,0.025")
    p.add_argument("--test", choices=sorted(scaling.TEST_FUNCTIONS), default="gaussian")
    p.add_argument("--convention", choices=scaling.M_CONVENTIONS, default="floor")
    common(p)
    return parser


# "-1,0,1" or "-0.5" after an option is a value, never a flag
_NEGATIVE_VALUE = re.compile(r"^-[\d.][\d.,/eE+-]*$")


def _attach_negative_values(argv: Sequence[str]) -> list[str]:
    out: list[str] = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE_VALUE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    argv = _attach_negative_values(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise ConfigError("a subcommand is required")
    if args.config:
        try:
            with open(args.config) as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(overrides, dict):
            raise ConfigError("config file must hold a JSON object")
        overrides = {("lam" if k == "lambda" else k.replace("-", "_")): v for k, v in overrides.items()}
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        sub.set_defaults(**overrides)
        args = parser.parse_args(argv)
    return args


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise ConfigError(f"{args.command}: missing --{', --'.join(m.replace('_', '-') for m in missing)}")


def _rank_vector(args, name: str, parse) -> tuple:
    vec = parse(getattr(args, name))
    rank = args.rank if args.rank is not None else len(vec)
    if not 1 <= rank <= MAX_RANK:
        raise ConfigError(f"rank must be in 1..{MAX_RANK}, got {rank}")
    if len(vec) != rank:
        raise ConfigError(f"--{name} has {len(vec)} entries, rank is {rank}")
    return vec


def _quad_config(args) -> givental.QuadratureConfig:
    nodes = args.nodes if args.nodes is not None else _env_int("QWHITTAKER_NODES", 0) or None
    try:
        return givental.QuadratureConfig(args.half_width, nodes, args.tolerance)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _report(args, config: dict, results: list, residuals: list, ok: bool = True) -> dict:
    return {
        "subcommand": args.command,
        "config": config,
        "results": results,
        "residuals": residuals,
        "status": "ok" if ok else "failed",
    }


def cmd_qpsi(args) -> dict:
    _need(args, "weight")
    p = _rank_vector(args, "weight", parse_ints)
    T = args.truncation if args.truncation is not None else _env_int("QWHITTAKER_TRUNCATION", qpsi.DEFAULT_TRUNCATION)
    if T < 0:
        raise ConfigError("truncation order must be nonnegative")
    formal_q = str(args.q).strip().lower() == "formal"
    config = {"rank": len(p), "weight": list(p), "z": "formal", "q": "formal",
              "method": args.method, "truncation": T}
    if args.method == "character":
        if args.z is not None or not formal_q:
            raise ConfigError("the character method uses formal z and formal q")
        try:
            value = qpsi.psi_character(p, T, threads=args.threads)
        except qpsi.PositivityError as exc:
            return _report(args, config, [], [{"monomial": list(exc.monomial), "series": str(exc.series)}], ok=False)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return _report(args, config, [{"value": str(value)}], [])
    if args.z is not None:
        z = tuple(parse_rational(t) for t in _split(args.z))
        if len(z) != len(p):
            raise ConfigError(f"--z has {len(z)} entries, rank is {len(p)}")
        if any(v == 0 for v in z):
            raise ConfigError("z entries must be nonzero")
        spec = qpsi.SpectralParams.exact(z)
        config["z"] = [str(v) for v in z]
    else:
        spec = qpsi.SpectralParams.formal(len(p))
    if formal_q:
        q = qpsi.FormalQ(T)
    else:
        q = parse_rational(args.q)
        config["q"] = str(q)
    fn = qpsi.psi_direct if args.method == "direct" else qpsi.psi_recursive
    try:
        value = fn(p, spec, q, threads=args.threads)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc)) from None
    return _report(args, config, [{"value": str(value)}], [])


def cmd_eigen(args) -> dict:
    _need(args, "weight", "q")
    p = _rank_vector(args, "weight", parse_ints)
    q = parse_rational(args.q)
    try:
        rep = qtoda.verify_eigen(p, q, threads=args.threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    d = rep.to_dict()
    config = {"rank": len(p), "weight": list(p), "q": str(q), "z": "formal"}
    results = [{"weight": d["weight"], "q": d["q"]}]
    return _report(args, config, results, d["residuals"], ok=rep.ok)


def cmd_givental(args) -> dict:
    _need(args, "x", "lam")
    x = _rank_vector(args, "x", parse_floats)
    lam = parse_floats(args.lam)
    if len(lam) != len(x):
        raise ConfigError("--x and --lambda must have the same length")
    if len(x) > givental.MAX_RANK:
        raise ConfigError(f"classical quadrature supports rank <= {givental.MAX_RANK}")
    cfg = _quad_config(args)
    config = {"rank": len(x), "x": list(x), "lambda": list(lam), "half_width": cfg.half_width,
              "nodes": cfg.nodes_for(len(x)), "tolerance": cfg.tolerance}
    try:
        val = givental.whittaker_classical(x, lam, cfg)
    except givental.NonConvergenceError as exc:
        return _report(args, config, [], [{"operator": "quadrature", "h": 0.0, "residual": str(exc)}], ok=False)
    results = [{"re": val.value.real, "im": val.value.imag, "error_estimate": val.error}]
    residuals = []
    if not args.skip_eigencheck:
        config["h"] = args.h
        try:
            chk = givental.classical_eigencheck(x, lam, cfg, args.h)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        residuals = [
            {"operator": "H1", "h": chk.h, "residual": chk.h1_residual},
            {"operator": "H2", "h": chk.h, "residual": chk.h2_residual},
        ]
    return _report(args, config, results, residuals)


def cmd_limit(args) -> dict:
    _need(args, "x", "lam", "eps")
    x = _rank_vector(args, "x", parse_floats)
    lam = parse_floats(args.lam)
    eps = parse_floats(args.eps)
    if len(lam) != len(x):
        raise ConfigError("--x and --lambda must have the same length")
    if len(x) > givental.MAX_RANK:
        raise ConfigError(f"the scan supports rank <= {givental.MAX_RANK}")
    cfg = _quad_config(args)
    config = {"rank": len(x), "x": list(x), "lambda": list(lam), "eps": list(eps),
              "convention": args.convention, "half_width": cfg.half_width, "tolerance": cfg.tolerance}
    try:
        rows = scaling.limit_scan(x, lam, eps, cfg, threads=args.threads, convention=args.convention)
    except givental.NonConvergenceError as exc:
        return _report(args, config, [], [{"row": "quadrature", "message": str(exc)}], ok=False)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    results = [
        {"epsilon": r.eps, "m_eps": r.m, "re_q": r.q_value.real, "im_q": r.q_value.imag,
         "re_cl": r.classical.real, "im_cl": r.classical.imag, "abs_err": r.abs_err, "rel_err": r.rel_err}
        for r in rows
    ]
    return _report(args, config, results, [])


def cmd_asymptotics(args) -> dict:
    ys, eps, etas = parse_floats(args.y), parse_floats(args.eps), parse_floats(args.eta_eps)
    alphas = parse_ints(args.alpha)
    if any(a not in (1, 2) for a in alphas):
        raise ConfigError("alpha must be 1 or 2")
    config = {"y": list(ys), "eps": list(eps), "alpha": list(alphas), "eta_eps": list(etas),
              "convention": args.convention}
    results = []
    try:
        for a in alphas:
            for y in ys:
                for e in eps:
                    results.append({
                        "alpha": a, "y": y, "epsilon": e, "m_eps": scaling.m_epsilon(e, args.convention),
                        "log_f": scaling.f_alpha(y, e, a, args.convention),
                        "A_eps": scaling.A_epsilon(e),
                        "residual": scaling.f_alpha_residual(y, e, a, args.convention),
                    })
        residuals = [{"epsilon": e, "eta_residual": scaling.eta_modular_residual(e)} for e in etas]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return _report(args, config, results, residuals)


def cmd_hamlimit(args) -> dict:
    _need(args, "x")
    x = _rank_vector(args, "x", parse_floats)
    eps = parse_floats(args.eps)
    config = {"rank": len(x), "x": list(x), "eps": list(eps), "test": args.test, "convention": args.convention}
    results = []
    try:
        for e in eps:
            r = scaling.hamiltonian_limit_residual(e, x, args.test, args.convention)
            results.append({
                "epsilon": e, "m_eps": scaling.m_epsilon(e, args.convention),
                "effective_x": list(r.effective_x), "residual1": r.residual1,
                "residual2": r.residual2 if r.residual2 is not None else "",
            })
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return _report(args, config, results, [])


COMMANDS = {
    "qpsi": cmd_qpsi,
    "eigen": cmd_eigen,
    "givental": cmd_givental,
    "limit": cmd_limit,
    "asymptotics": cmd_asymptotics,
    "hamlimit": cmd_hamlimit,
}


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = parse_args(list(sys.argv[1:] if argv is None else argv))
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        report = COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INVALID
    text = render(report, args.format)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK if report["status"] == "ok" else EXIT_FAILED


def main() -> None:
    sys.exit(run())
