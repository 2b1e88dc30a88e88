"""Command line entry point `nct`.

Global options may be given before the subcommand or after it.  With --json
every command prints one JSON document; reports carry no timing unless
--timing is set, so output is byte-identical for fixed seed and flags.
Modular-function points are always given in the exponential coordinates
(s, t), with u = e^s and v = e^t.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, replace

import click
import mpmath
import numpy as np

from . import __version__, logform, modfun, parametrix, reduce, suites
from .parametrix import HALVES

STAGES = ("symbols", "parametrix", "angular", "radial", "grouped", "logbasis", "curvature")


@dataclass(frozen=True)
class Globals:
    as_json: bool = False
    seed: int = 0
    precision: int = 33
    grid: int = 1024
    timing: bool = False

    def suite_config(self) -> suites.SuiteConfig:
        return suites.SuiteConfig(seed=self.seed, precision=self.precision, grid=self.grid)

    def eval_config(self) -> modfun.EvalConfig:
        return modfun.EvalConfig(precision=self.precision)


def _common(f, grid: bool = True):
    """Accept the global flags after the subcommand as well."""
    f = click.option("--timing", is_flag=True, default=None, help="Include wall-clock seconds.")(f)
    if grid:
        f = click.option("--grid", type=int, default=None, help="Torus grid size G (power of two).")(f)
    f = click.option("--precision", type=int, default=None, help="Working decimal digits (>= 33).")(f)
    f = click.option("--seed", type=int, default=None, help="Seed for random draws.")(f)
    f = click.option("--json", "as_json", is_flag=True, default=None, help="Emit JSON.")(f)
    return f


def _globals(ctx: click.Context, **over) -> Globals:
    g = ctx.obj or Globals()
    return replace(g, **{k: v for k, v in over.items() if v is not None})


def _emit(g: Globals, payload, text: str) -> None:
    if g.as_json:
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
    else:
        click.echo(text)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="nct")
@_common
@click.pass_context
def main(ctx, as_json, seed, precision, grid, timing):
    """Scalar curvature of the noncommutative two-torus, symbolically and numerically."""
    ctx.obj = None
    ctx.obj = _globals(ctx, as_json=as_json, seed=seed, precision=precision, grid=grid, timing=timing)


half_option = click.option("--half", type=click.Choice(HALVES), default="functions", show_default=True)


# ---------------------------------------------------------------- symbolic stages

@main.command()
@half_option
@_common
@click.pass_context
def symbols(ctx, half, **kw):
    """Print the symbol a2 + a1 + a0 of the chosen Laplacian."""
    g = _globals(ctx, **kw)
    op = parametrix.operator_symbol(half)
    parts = {"a2": op.a2, "a1": op.a1, "a0": op.a0}
    _emit(g, {k: v.records() for k, v in parts.items()},
          "\n".join(f"{k} = {v.text()}" for k, v in parts.items()))


@main.command(name="parametrix")
@half_option
@click.option("--emit", type=click.Choice(("b0", "b1", "b2")), default="b2", show_default=True)
@click.option("--grouped-k2", is_flag=True, help="Regroup k d(k) + d(k) k as d(k^2).")
@click.option("--spot-check", is_flag=True, help="Compare b2 with the transcribed golden terms.")
@_common
@click.pass_context
def parametrix_cmd(ctx, half, emit, grouped_k2, spot_check, **kw):
    """Print b0, b1 or b2 in the expression grammar."""
    g = _globals(ctx, **kw)
    x = getattr(parametrix.parametrix_for(half), emit)
    if spot_check:
        recs = parametrix.spot_check(half)
        _emit(g, recs, "\n".join(f"{'ok  ' if r['match'] else 'FAIL'} {r['term']}" for r in recs))
        sys.exit(0 if all(r["match"] for r in recs) else 1)
    if g.as_json:
        _emit(g, x.records(), "")
    else:
        click.echo(parametrix.group_k2(x) if grouped_k2 else x.text())


def _stage_value(half: str, stage: str):
    b2 = parametrix.parametrix_for(half).b2
    if stage == "angular":
        return reduce.angular_stage(b2)
    if stage == "radial":
        return reduce.radial_stage(b2)
    return reduce.grouped_stage(b2, half)


@main.command()
@half_option
@click.option("--stage", type=click.Choice(("angular", "radial", "grouped")), default="radial", show_default=True)
@_common
@click.pass_context
def integrate(ctx, half, stage, **kw):
    """Integrate b2 over the cotangent fibre up to the chosen stage."""
    g = _globals(ctx, **kw)
    x = _stage_value(half, stage)
    _emit(g, x.records(), _lines(x))


def _lines(x) -> str:
    """One term per line."""
    if isinstance(x, reduce.ModularExpr):
        return "\n".join(f"[{c.text()}]*{a.text()}" for a, c in x.items()) or "0"
    return "\n".join(r["coeff"] + (f"*{r['monomial']}" if r["monomial"] != "1" else "")
                     + (f"*{r['word']}" if r["word"] else "") for r in x.records()) or "0"


@main.command()
@click.option("--graded/--ungraded", default=False, help="Chiral (graded) or plain curvature.")
@click.option("--emit", type=click.Choice(("coefficients", "closedforms")), default="closedforms",
              show_default=True)
@_common
@click.pass_context
def curvature(ctx, graded, emit, **kw):
    """Assemble the curvature from both halves and print its slot functions."""
    g = _globals(ctx, **kw)
    slots = logform.pipeline_curvature(register=True)
    group = "graded" if graded else "ungraded"
    if emit == "coefficients":
        lb = logform.assemble_curvature(logform.half_log_basis("functions"),
                                        logform.half_log_basis("forms"), graded)
        recs = lb.records()
        _emit(g, {"prefactor": lb.prefactor, "terms": recs},
              f"prefactor {lb.prefactor}\n" + "\n".join(
                  f"[{r['coeff']}] {r['target']}: {r['function']}" for r in recs))
        return
    # the forms half enters the graded assembly with a minus sign, and only it carries W
    names = {"linear": ("R1g" if graded else "R1", 1), "bilinear": ("R2g" if graded else "R2", 1),
             "antisym": ("W", -1 if graded else 1)}
    rows = []
    for slot, (name, sign) in names.items():
        f = slots[group][slot]
        rows.append({"slot": slot, "name": name if sign > 0 else f"-{name}", "function": f.text(),
                     "equals_closed_form": modfun.normal_equal(f, modfun.closed_form(name) * sign)})
    _emit(g, {"graded": graded, "prefactor": torus_prefactor(), "slots": rows},
          "\n".join(f"{r['name']} ({r['slot']}, matches closed form: {r['equals_closed_form']}):\n  {r['function']}"
                    for r in rows))


def torus_prefactor() -> str:
    return logform.LogBasisExpr().prefactor


# ---------------------------------------------------------------- modular functions

def _point(text: str, arity: int):
    vals = [float(x) for x in text.split(",") if x.strip()]
    if len(vals) != arity:
        raise click.BadParameter(f"expected {arity} comma-separated value(s), got {len(vals)}")
    return vals


def _native(e: modfun.Entry, st):
    return [float(np.exp(x)) for x in st] if e.view == modfun.UV else st


def _grid(spec: str) -> np.ndarray:
    """'lo:hi:n' -> n equally spaced points."""
    try:
        lo, hi, n = spec.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    except ValueError:
        raise click.BadParameter(f"grid spec must look like lo:hi:n, got {spec!r}") from None


@main.command(name="modfun")
@click.option("--list", "do_list", is_flag=True, help="List registered functions.")
@click.option("--eval", "eval_name", metavar="NAME", help="Evaluate NAME at --at.")
@click.option("--at", "at", metavar="s[,t]", help="Point in exponential coordinates.")
@click.option("--verify", "verify_name", metavar="NAME", help="Compare assembled and closed forms exactly.")
@click.option("--table", "table_name", metavar="NAME", help="Tabulate NAME on --grid.")
@click.option("--grid", "grid_spec", default="-2:2:5", show_default=True, metavar="lo:hi:n",
              help="Table axis in s (and t); here --grid is a range, not the torus size.")
@lambda f: _common(f, grid=False)
@click.pass_context
def modfun_cmd(ctx, do_list, eval_name, at, verify_name, table_name, grid_spec, **kw):
    """Inspect the modular-function registry."""
    g = _globals(ctx, **kw)
    try:
        cfg = g.eval_config()
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--precision") from None
    if do_list:
        rows = [{"name": e.name, "arity": e.arity, "view": e.view, "doc": e.doc}
                for e in modfun.registry().values()]
        _emit(g, rows, "\n".join(f"{r['name']:4s} {r['arity']}  {r['view']}  {r['doc']}" for r in rows))
    elif eval_name:
        e = modfun.entry(eval_name)
        if at is None:
            raise click.UsageError("--eval needs --at")
        st = _point(at, e.arity)
        val = modfun.evaluate(modfun.assembled(eval_name), _native(e, st), cfg)
        text = mpmath.nstr(val, g.precision)
        _emit(g, {"name": eval_name, "at": st, "value": text}, text)
    elif verify_name:
        logform.pipeline_curvature(register=True)
        out = modfun.verify(verify_name)
        _emit(g, out, "\n".join(f"{k}: {v}" for k, v in out.items()))
        sys.exit(0 if all(v for k, v in out.items() if k != "name") else 1)
    elif table_name:
        e = modfun.entry(table_name)
        fun = modfun.assembled(table_name)
        xs = _grid(grid_spec)
        pts = [(s,) for s in xs] if e.arity == 1 else [(s, t) for s in xs for t in xs]
        rows = [{"at": list(map(float, p)),
                 "value": float(modfun.evaluate(fun, _native(e, p), cfg))} for p in pts]
        _emit(g, {"name": table_name, "grid": grid_spec, "rows": rows},
              "\n".join(" ".join(f"{x:+.6f}" for x in r["at"]) + f"  {r['value']:+.15e}" for r in rows))
    else:
        raise click.UsageError("choose one of --list, --eval, --verify, --table")


# ---------------------------------------------------------------- verification

def report(results: list, g: Globals) -> dict:
    return {
        "version": __version__,
        "seed": g.seed,
        "suites": [r.as_dict(timing=g.timing) for r in results],
        "pass": all(r.passed for r in results),
    }


def exit_code(results: list) -> int:
    """0 when everything passed, else the 1-based index of the first failing suite."""
    for i, r in enumerate(results, 1):
        if not r.passed:
            return i
    return 0


def _report_text(results: list, g: Globals) -> str:
    lines = []
    for r in results:
        head = f"{'PASS' if r.passed else 'FAIL'} {r.suite}"
        if g.timing:
            head += f" ({r.seconds:.1f}s)"
        lines.append(head)
        for x in r.residuals:
            if not x.ok:
                lines.append(f"    {x.name}: {x.value:.3e} > {x.tolerance:.1e}")
    return "\n".join(lines)


@main.command()
@click.option("--suite", "names", multiple=True, type=click.Choice(suites.SUITES),
              help="Suite to run (repeatable).  Default: every gating suite.")
@click.option("--all", "run_all", is_flag=True, help="Also run the non-gating heat suite.")
@_common
@click.pass_context
def verify(ctx, names, run_all, **kw):
    """Run verification suites; the exit code names the first failure."""
    g = _globals(ctx, **kw)
    selected = list(names) or list(suites.GATING)
    if run_all:
        selected = list(suites.SUITES)
    results = suites.verify_all(g.suite_config(), selected)
    _emit(g, report(results, g), _report_text(results, g))
    sys.exit(exit_code(results))


def run_pipeline(half: str, through: str, spot: bool = False) -> dict:
    """Run the stages up to `through`; every emitted stage carries text and a term count."""
    stop = STAGES.index(through)
    stages = []

    def put(name, x, text=None):
        if text is None:
            text = _lines(x)
            n = len([ln for ln in text.splitlines() if ln.strip()])
        else:
            n = len(x)
        stages.append({"stage": name, "terms": n, "text": text})

    op = parametrix.operator_symbol(half)
    put("symbols", op.a2 + op.a1 + op.a0)
    p = parametrix.parametrix_for(half)
    if stop >= 1:
        put("parametrix", p.b2)
    if stop >= 2:
        put("angular", reduce.angular_stage(p.b2))
    if stop >= 3:
        rad = reduce.radial_stage(p.b2)
        put("radial", rad)
    if stop >= 4:
        grouped = reduce.collect_to_basis(rad, half)
        reduce.assemble_basis_functions(rad, half)
        put("grouped", grouped)
    if stop >= 5:
        lb = logform.half_log_basis(half)
        slots = lb.decompose()
        put("logbasis", lb, "; ".join(f"{k}: {f.text()}" for k, f in slots.items()))
    if stop >= 6:
        cur = logform.pipeline_curvature(register=True)["ungraded"]
        put("curvature", cur, "; ".join(f"{k}: {f.text()}" for k, f in cur.items()))
    out = {"version": __version__, "half": half, "through": through, "stages": stages}
    if spot:
        recs = parametrix.spot_check(half)
        out["spot_check"] = recs
        out["pass"] = all(r["match"] for r in recs)
    return out


@main.command()
@half_option
@click.option("--through", type=click.Choice(STAGES), default="grouped", show_default=True)
@click.option("--spot-check", "spot", type=click.Choice(("appendixA", "appendixB")), default=None,
              help="Also compare b2 with the transcribed golden terms of this half.")
@_common
@click.pass_context
def pipeline(ctx, half, through, spot, **kw):
    """Run the computation end to end and report each stage."""
    g = _globals(ctx, **kw)
    if spot is not None and spot != {"functions": "appendixA", "forms": "appendixB"}[half]:
        raise click.BadParameter(f"{spot} holds terms of the other half", param_hint="--spot-check")
    if spot is not None and STAGES.index(through) < 1:
        raise click.BadParameter("the spot check needs --through parametrix or later", param_hint="--through")
    rep = run_pipeline(half, through, spot is not None)
    rep["seed"] = g.seed
    lines = []
    for s in rep["stages"]:
        lines.append(f"== {s['stage']} ({s['terms']} terms)")
        lines.append(s["text"])
    if spot is not None:
        ok = sum(r["match"] for r in rep["spot_check"])
        lines.append(f"== spot check: {ok}/{len(rep['spot_check'])} golden terms match")
    _emit(g, rep, "\n".join(lines))
    sys.exit(0 if rep.get("pass", True) else 1)


if __name__ == "__main__":
    main()
