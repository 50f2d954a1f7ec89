"""Command line front end.

Usage: ``polyaproc <subcommand> <fixture-or-spec.json> [--param value ...] [options]``.
Fixture parameters are passed as extra ``--name value`` pairs, e.g.
``polyaproc classify cyclic --s 7``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import warnings
from fractions import Fraction

from . import __version__
from .cones import a_alpha, cone_generators, dual_generators, sigma_contains, sigma_contains_by_generators
from .errors import PolyaError, SpecError
from .fixtures import FIXTURES, get_fixture
from .moments import asymptotic_moment, expected_vector_asymptote, limit_w_moment, moment_report
from .operator import ReducedTable, nilpotence_index
from .process import FloatTenabilityUnknown, load_spec_file, validate_process
from .scalars import format_scalar, parse_scalar
from .simulate import Estimand, SimConfig, estimate_moments
from .spectral import DEFAULT_TOL, analyze, classify_power, classify_process
from .upoly import UPolynomial, parse_multi_index
from .verify import run_invariant_suite

SCHEMA_VERSION = 1
SUBCOMMANDS = ("analyze", "classify", "reduce", "cone", "moment", "asymptotics", "simulate", "verify")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("source", help="fixture name or path to a JSON process spec")
    common.add_argument("--mode", choices=("auto", "exact", "numeric"), default="auto")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--waive-tenability", action="store_true")
    common.add_argument("--pin-form", action="append", default=[], metavar="K:C1,...,CS")
    common.add_argument("--pin-basis", metavar="FILE", help="analyze output or JSON list of form rows")
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = argparse.ArgumentParser(prog="polyaproc", allow_abbrev=False,
                                description="Balanced Pólya processes: spectra, reduced polynomials, moments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("analyze", parents=[common], allow_abbrev=False)
    c = sub.add_parser("classify", parents=[common], allow_abbrev=False)
    c.add_argument("--alpha", help="also classify this multi-index")
    r = sub.add_parser("reduce", parents=[common], allow_abbrev=False)
    r.add_argument("--alpha", required=True)
    k = sub.add_parser("cone", parents=[common], allow_abbrev=False)
    k.add_argument("--test", action="append", default=[], metavar="X1,...,XS")
    k.add_argument("--a-alpha", dest="a_alpha", metavar="A1,...,AS")
    m = sub.add_parser("moment", parents=[common], allow_abbrev=False)
    m.add_argument("--alpha", required=True)
    m.add_argument("--n", required=True, help="comma-separated horizons")
    m.add_argument("--arithmetic", choices=("auto", "exact", "float"), default="auto")
    a = sub.add_parser("asymptotics", parents=[common], allow_abbrev=False)
    a.add_argument("--alpha", action="append", default=[])
    s = sub.add_parser("simulate", parents=[common], allow_abbrev=False)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--estimate", action="append", default=[], metavar="u:A1,...|w:K")
    s.add_argument("--workers", type=int, default=1, help="threads; does not change results")
    v = sub.add_parser("verify", parents=[common], allow_abbrev=False)
    v.add_argument("--degree", type=int, default=3)
    v.add_argument("--seed", type=int, default=20240601)
    v.add_argument("--workers", type=int, default=1, help="threads; does not change results")
    return p


def _fixture_params(extra: list) -> dict:
    params = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or i + 1 >= len(extra):
            raise SpecError(f"unexpected argument {tok!r}")
        params[tok[2:].replace("-", "_")] = extra[i + 1]
        i += 2
    return params


def _parse_pins(items: list) -> dict:
    pins = {}
    for it in items:
        k, sep, body = it.partition(":")
        if not sep:
            raise SpecError(f"--pin-form expects K:C1,...,CS, got {it!r}")
        pins[int(k)] = [parse_scalar(x) for x in body.split(",")]
    return pins


def _load_basis(path: str):
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data.get("result", data)
        data = data.get("spectral", data)
        data = data.get("jordan_forms", data)
    if not isinstance(data, list):
        raise SpecError(f"{path}: no list of Jordan forms found")
    return data


class Context:
    def __init__(self, args, params: dict):
        self.args = args
        self.params = params
        if os.path.exists(args.source) or args.source.endswith(".json"):
            if params:
                raise SpecError("fixture parameters only apply to built-in fixtures")
            self.spec = load_spec_file(args.source)
            pins = {}
        else:
            fx = get_fixture(args.source, **params)
            self.spec = fx.spec
            pins = dict(fx.pins)
        if args.waive_tenability:
            self.spec = self.spec.with_waiver(True)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", FloatTenabilityUnknown)
            self.report = validate_process(self.spec)
        self.warnings = [str(w.message) for w in caught]
        self.report.raise_for_status()
        pins.update(_parse_pins(args.pin_form))
        basis = _load_basis(args.pin_basis) if args.pin_basis else None
        self.pins = pins
        self.spectral = analyze(self.spec, tol=args.tol, mode=args.mode,
                                pin_forms=None if basis is not None else pins, pin_basis=basis)
        if args.mode == "exact" and not self.spectral.exact:
            warnings.warn("exact mode requested but eigenvalues are irrational; using numeric mode")
        self._table = None

    @property
    def table(self) -> ReducedTable:
        if self._table is None:
            self._table = ReducedTable(self.spec, self.spectral)
        return self._table

    def alpha(self, text: str) -> tuple:
        try:
            return parse_multi_index(text, self.spectral.dimension)
        except ValueError as exc:
            raise SpecError(str(exc)) from None

    def manifest(self, extra: dict) -> dict:
        args = self.args
        return {
            "subcommand": args.command,
            "source": args.source,
            "fixture_parameters": {k: v for k, v in self.params.items()},
            "parameters": {"mode": args.mode, "tol": args.tol, "waive_tenability": args.waive_tenability,
                           "pin_form": list(args.pin_form), "pin_basis": args.pin_basis, **extra},
            "format": args.format,
            "tool_version": __version__,
            "arithmetic_mode": self.spectral.mode,
        }


def _cell(value) -> str:
    """Scalar rendered for a CSV cell: p/q, a float repr, or a JSON pair for complex values."""
    if value is None or isinstance(value, str):
        return value or ""
    out = format_scalar(value) if not isinstance(value, list) else value
    return out if isinstance(out, str) else json.dumps(out)


def _poly(f: UPolynomial) -> dict:
    return {"text": f.to_text(), "terms": f.to_dict()}


def cmd_analyze(ctx: Context) -> tuple[dict, dict, list | None]:
    cls = classify_process(ctx.spectral)
    res = {"spec": ctx.spec.to_dict(), "validation": ctx.report.to_dict(), "warnings": ctx.warnings,
           "spectral": ctx.spectral.to_dict(), "classification": cls.to_dict()}
    rows = [{"k": k + 1, "eigenvalue": _cell(lam), "eps": ctx.spectral.eps[k],
             "form": json.dumps([format_scalar(x) for x in ctx.spectral.forms[k]])}
            for k, lam in enumerate(ctx.spectral.eigenvalues)]
    return res, {}, rows


def cmd_classify(ctx: Context):
    cls = classify_process(ctx.spectral)
    res = {"classification": cls.to_dict(),
           "eigenvalues": [format_scalar(x) for x in ctx.spectral.eigenvalues]}
    extra = {}
    if ctx.args.alpha:
        alpha = ctx.alpha(ctx.args.alpha)
        res["power"] = {"alpha": list(alpha), **classify_power(alpha, ctx.spectral).to_dict()}
        extra["alpha"] = ctx.args.alpha
    rows = [{"size_class": cls.size_class, "sigma2": _cell(res["classification"]["sigma2"]),
             "principally_semisimple": cls.principally_semisimple, "semisimple": cls.semisimple, "nu": cls.nu}]
    return res, extra, rows


def cmd_reduce(ctx: Context):
    alpha = ctx.alpha(ctx.args.alpha)
    t = ctx.table
    Q = t.reduced(alpha)
    nu = nilpotence_index(alpha, t)
    res = {
        "alpha": list(alpha),
        "pairing": format_scalar(ctx.spectral.pairing(alpha)),
        "reduced_polynomial": _poly(Q),
        "q": [{"beta": list(b), "value": format_scalar(v)} for b, v in sorted(t.q[alpha].items())],
        "p": [{"beta": list(b), "value": format_scalar(v)} for b, v in sorted(t.p[alpha].items())],
        "nu": nu,
        "power_class": classify_power(alpha, ctx.spectral).to_dict(),
    }
    rows = [{"exponent": ",".join(map(str, a)), "coefficient": _cell(c)}
            for a, c in Q.sorted_terms()]
    return res, {"alpha": ctx.args.alpha}, rows


def cmd_cone(ctx: Context):
    s = ctx.spectral.dimension
    res = {"dimension": s, "generators": [list(g) for g in cone_generators(s)],
           "faces": [list(f) for f in dual_generators(s)], "tests": []}
    rows = []
    for text in ctx.args.test:
        x = [parse_scalar(v) for v in text.split(",")]
        if len(x) != s:
            raise SpecError(f"--test point needs {s} coordinates")
        a, b = sigma_contains(x), sigma_contains_by_generators(x)
        res["tests"].append({"point": [format_scalar(v) for v in x], "in_sigma": a, "by_generators": b})
        rows.append({"point": text, "in_sigma": a, "by_generators": b})
    extra = {"test": list(ctx.args.test)}
    if ctx.args.a_alpha:
        alpha = ctx.alpha(ctx.args.a_alpha)
        pts = a_alpha(alpha, ctx.spectral)
        res["a_alpha"] = {"alpha": list(alpha), "points": [list(p) for p in pts]}
        extra["a_alpha"] = ctx.args.a_alpha
        rows.extend({"point": ",".join(map(str, p)), "in_sigma": "", "by_generators": ""} for p in pts)
    return res, extra, rows


def cmd_moment(ctx: Context):
    alpha = ctx.alpha(ctx.args.alpha)
    try:
        ns = [int(x) for x in ctx.args.n.split(",")]
    except ValueError:
        raise SpecError(f"--n expects comma-separated integers, got {ctx.args.n!r}") from None
    rep = moment_report(alpha, ns, ctx.table, ctx.args.arithmetic)
    rows = []
    for n, v in zip(rep.ns, rep.values):
        z = complex(v)
        rows.append({"n": n, "value": _cell(v), "value_re": repr(z.real), "value_im": repr(z.imag)})
    return {"moment": rep.to_dict()}, {"alpha": ctx.args.alpha, "n": ctx.args.n,
                                       "arithmetic": ctx.args.arithmetic}, rows


def cmd_asymptotics(ctx: Context):
    vec, tau = expected_vector_asymptote(ctx.spec, ctx.spectral)
    res = {"classification": classify_process(ctx.spectral).to_dict(),
           "expected_vector": {"drift": [format_scalar(x) for x in vec], "remainder_exponent": format_scalar(tau)},
           "terms": []}
    rows = []
    for text in ctx.args.alpha:
        alpha = ctx.alpha(text)
        entry = {"alpha": list(alpha)}
        try:
            entry["asymptotic"] = asymptotic_moment(alpha, ctx.table).to_dict()
        except PolyaError as exc:
            entry["asymptotic"] = {"error": type(exc).__name__, "message": str(exc)}
        try:
            entry["limit_w_moment"] = format_scalar(limit_w_moment(alpha, ctx.table))
        except PolyaError as exc:
            entry["limit_w_moment"] = None
            entry["limit_w_note"] = str(exc)
        res["terms"].append(entry)
        a = entry["asymptotic"]
        rows.append({"alpha": text, "exponent": _cell(a.get("exponent")), "log_power": a.get("log_power"),
                     "constant": _cell(a.get("constant")), "regime": a.get("regime")})
    return res, {"alpha": list(ctx.args.alpha)}, rows


def cmd_simulate(ctx: Context):
    s = ctx.spectral.dimension
    try:
        ests = tuple(Estimand.parse(e, s) for e in ctx.args.estimate) or (Estimand("u", tuple([1] + [0] * (s - 1))),)
        cfg = SimConfig(ctx.args.n, ctx.args.trials, ctx.args.seed, ests, max(1, ctx.args.workers))
    except ValueError as exc:
        raise SpecError(str(exc)) from None
    stats = estimate_moments(ctx.spec, cfg, ctx.spectral)
    res = {"simulation": stats.to_dict()}
    res["simulation"].pop("workers")
    extra = {"n": cfg.horizon, "trials": cfg.trials, "seed": cfg.seed, "estimate": [e.label for e in ests]}
    return res, extra, [st.row() for st in stats.stats]


def cmd_verify(ctx: Context):
    checks = run_invariant_suite(ctx.spec, ctx.spectral, ctx.args.degree, ctx.args.seed, max(1, ctx.args.workers))
    res = {"all_passed": all(c.passed for c in checks), "checks": [c.to_dict() for c in checks]}
    rows = [{"invariant": c.name, "passed": c.passed, "detail": c.detail} for c in checks]
    return res, {"degree": ctx.args.degree, "seed": ctx.args.seed}, rows


COMMANDS = {
    "analyze": cmd_analyze,
    "classify": cmd_classify,
    "reduce": cmd_reduce,
    "cone": cmd_cone,
    "moment": cmd_moment,
    "asymptotics": cmd_asymptotics,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def _render(fmt: str, manifest: dict, result: dict, rows: list | None) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        buf.write("# manifest: " + json.dumps(manifest, sort_keys=True, ensure_ascii=False) + "\n")
        rows = rows or []
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        return buf.getvalue()
    doc = {"schema_version": SCHEMA_VERSION, "manifest": manifest, "result": result}
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv: list | None = None) -> int:
    parser = _parser()
    args, extra = parser.parse_known_args(argv)
    out = getattr(args, "out", None)
    try:
        params = _fixture_params(extra)
        ctx = Context(args, params)
        result, extra_params, rows = COMMANDS[args.command](ctx)
        text = _render(args.format, ctx.manifest(extra_params), result, rows)
        _emit(text, out)
        if args.command == "verify" and not result["all_passed"]:
            return 1
        return 0
    except PolyaError as exc:
        _emit(json.dumps({"schema_version": SCHEMA_VERSION, **exc.to_dict(),
                          "violations": [v.__dict__ for v in getattr(exc, "violations", ())]}, indent=2) + "\n",
              None)
        return exc.exit_code
    except (ValueError, ZeroDivisionError, OSError) as exc:
        _emit(json.dumps({"schema_version": SCHEMA_VERSION, "error": type(exc).__name__, "kind": "input",
                          "message": str(exc)}, indent=2) + "\n", None)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
