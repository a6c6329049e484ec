"""Command-line front end: ``cquant solve|sweep|asymptotics|oracle|figure|single-side``.

Exit codes: 0 success, 2 invalid arguments, 3 solver non-convergence,
4 internal invariant violation.
"""
from __future__ import annotations

import csv
import io
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import click

from . import __version__
from . import asymptotics as asy
from . import closed_form as cf
from .closed_form import Allocation, InfeasibleProgression, ProgressionParams
from .geometry import Side, TriangleConfig
from .numeric_solver import NoConvergence, Provenance, SolveResult, solve, solve_allocation
from .oracle import GridSpec, grid_search, restricted_grid_search, worker_count
from .quantizer_core import DegeneratePartition

EXIT_USAGE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_INVARIANT = 4

CSV_HEADER = ("n", "ell", "m", "u", "v", "vn", "gap", "n2gap")


class InvariantViolation(RuntimeError):
    """A computed table or result breaks a property that must always hold."""


@dataclass
class RunRecord:
    command: list[str]
    config: dict
    payload: dict
    wall_time: float
    version: str = __version__

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, allow_nan=False)


@dataclass
class _Ctx:
    argv: list[str] = field(default_factory=list)
    t0: float = field(default_factory=time.perf_counter)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _limit(cfg: TriangleConfig) -> float:
    return asy.v_infinity(cfg, method="distance")


def _gap(result: SolveResult, cfg: TriangleConfig) -> float:
    if cfg.is_canonical and result.allocation.two_sided:
        return cf.vn_gap(result.allocation)
    return result.distortion - _limit(cfg)


def _uv(result: SolveResult) -> tuple[float | None, float | None]:
    p = result.params
    if not isinstance(p, ProgressionParams):
        return None, None
    a = result.allocation
    return (float(p.u) if a.ell else None), (float(p.v) if a.m else None)


def result_payload(result: SolveResult, cfg: TriangleConfig) -> dict:
    """The stable JSON schema of one solve."""
    n = len(result.codebook)
    gap = _gap(result, cfg)
    u, v = _uv(result)
    return {
        "n": n,
        "ell": result.allocation.ell,
        "m": result.allocation.m,
        "u": u,
        "v": v,
        "codebook": [
            {"side": p.side.name, "param": p.param, "x": p.x, "y": p.y} for p in result.codebook.points
        ],
        "vn": result.distortion,
        "gap": gap,
        "n2gap": n * n * gap,
        "provenance": result.provenance.value,
        "residual": result.residual,
        "mirror": bool(result.mirror),
    }


def sweep(n_from: int, n_to: int, cfg: TriangleConfig | None = None, workers: int | None = None) -> list[dict]:
    """One row per ``n``: ``n, ell, m, u, v, vn, gap, n2gap``; ``vn`` must strictly decrease."""
    cfg = cfg or TriangleConfig.canonical()
    if not 1 <= n_from <= n_to:
        raise click.BadParameter(f"need 1 <= from <= to, got {n_from}..{n_to}")

    def row(n):
        r = solve(n, cfg, cross_check=False)
        d = result_payload(r, cfg)
        return {k: d[k] for k in CSV_HEADER}

    ns = range(n_from, n_to + 1)
    workers = workers or worker_count()
    if workers > 1 and len(ns) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, ns))
    else:
        rows = [row(n) for n in ns]
    for a, b in zip(rows, rows[1:]):
        if not b["vn"] < a["vn"]:
            raise InvariantViolation(f"V_n not decreasing at n={b['n']}: {a['vn']!r} -> {b['vn']!r}")
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([_fmt(r[k]) for k in CSV_HEADER])
    return buf.getvalue()


def _table(rows: list[dict], cols) -> str:
    cells = [[str(c) for c in cols]] + [[_fmt(r[c]) for c in cols] for r in rows]
    widths = [max(len(line[i]) for line in cells) for i in range(len(cols))]
    return "\n".join("  ".join(s.rjust(w) for s, w in zip(line, widths)) for line in cells)


SVG_WIDTH = 600.0
SVG_MARGIN = 40.0


def render_figure(result: SolveResult, cfg: TriangleConfig | None = None) -> str:
    """Triangle, dashed apex altitude and one dot per code point, as SVG text.

    Coordinates are printed with fixed precision so identical inputs give
    byte-identical documents.
    """
    if result.codebook is None or not len(result.codebook):
        raise ValueError("nothing to draw: empty codebook")
    cfg = cfg or result.codebook.cfg
    L = cfg.base_length
    ax, ay = cfg.apex
    x_lo, x_hi = min(0.0, ax), max(L, ax)
    scale = SVG_WIDTH / (x_hi - x_lo)
    width = SVG_WIDTH + 2 * SVG_MARGIN
    height = ay * scale + 2 * SVG_MARGIN

    def px(x, y):
        return f"{SVG_MARGIN + (x - x_lo) * scale:.3f},{height - SVG_MARGIN - y * scale:.3f}"

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<polygon points="{px(0, 0)} {px(L, 0)} {px(ax, ay)}" fill="none" stroke="black" stroke-width="1.5"/>',
        f'<line x1="{px(ax, ay).split(",")[0]}" y1="{px(ax, ay).split(",")[1]}" '
        f'x2="{px(ax, 0).split(",")[0]}" y2="{px(ax, 0).split(",")[1]}" '
        'stroke="gray" stroke-width="1" stroke-dasharray="6,4"/>',
    ]
    for p in result.codebook.points:
        cx, cy = px(p.x, p.y).split(",")
        lines.append(f'<circle cx="{cx}" cy="{cy}" r="4" fill="black"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _config_options(f):
    f = click.option("--base", "base", type=float, default=None, help="Base length (default 2).")(f)
    f = click.option("--apex-y", type=float, default=None, help="Apex height (default sqrt 3).")(f)
    f = click.option("--apex-x", type=float, default=None, help="Apex abscissa (default 1).")(f)
    return f


def _make_cfg(apex_x, apex_y, base) -> TriangleConfig:
    c = TriangleConfig.canonical()
    try:
        return TriangleConfig(
            c.base_length if base is None else base,
            (c.apex[0] if apex_x is None else apex_x, c.apex[1] if apex_y is None else apex_y),
        )
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from None


def _record(ctx: click.Context, cfg: TriangleConfig, payload: dict) -> RunRecord:
    obj: _Ctx = ctx.obj
    return RunRecord(obj.argv, cfg.to_dict(), payload, time.perf_counter() - obj.t0)


@click.group()
@click.version_option(__version__, prog_name="cquant")
@click.pass_context
def cli(ctx: click.Context):
    """Optimal quantizers of the uniform law on a triangle's base, constrained to the other two sides."""
    if not isinstance(ctx.obj, _Ctx):
        ctx.obj = _Ctx(argv=sys.argv[1:])


@cli.command("solve")
@click.option("--n", "n", type=click.IntRange(min=1), required=True)
@_config_options
@click.option("--json", "as_json", is_flag=True, help="Emit the result as JSON.")
@click.option("--csv", "as_csv", is_flag=True, help="Emit one CSV row.")
@click.pass_context
def solve_cmd(ctx, n, apex_x, apex_y, base, as_json, as_csv):
    """Optimal n-point codebook."""
    cfg = _make_cfg(apex_x, apex_y, base)
    payload = result_payload(solve(n, cfg), cfg)
    if as_json:
        rec = _record(ctx, cfg, payload)
        out = dict(payload, run={"command": rec.command, "config": rec.config, "wall_time": rec.wall_time, "version": rec.version})
        click.echo(json.dumps(out, indent=2, allow_nan=False))
    elif as_csv:
        click.echo(rows_to_csv([{k: payload[k] for k in CSV_HEADER}]), nl=False)
    else:
        click.echo(f"n = {n}  allocation (ell, m) = ({payload['ell']}, {payload['m']})  provenance = {payload['provenance']}")
        click.echo(f"V_n = {payload['vn']:.12g}   gap = {payload['gap']:.12g}   n^2 gap = {payload['n2gap']:.12g}")
        if payload["mirror"]:
            click.echo("mirror: the reflected codebook is also optimal")
        click.echo(_table(payload["codebook"], ("side", "param", "x", "y")))


@cli.command("sweep")
@click.option("--from", "n_from", type=click.IntRange(min=1), required=True)
@click.option("--to", "n_to", type=click.IntRange(min=1), required=True)
@_config_options
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False, allow_dash=True), default=None,
              help="Write the table as CSV to PATH ('-' for stdout).")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def sweep_cmd(ctx, n_from, n_to, apex_x, apex_y, base, csv_path, as_json):
    """Table of V_n, gaps and coefficients for a range of n."""
    cfg = _make_cfg(apex_x, apex_y, base)
    rows = sweep(n_from, n_to, cfg)
    if csv_path:
        text = rows_to_csv(rows)
        if csv_path == "-":
            click.echo(text, nl=False)
        else:
            with open(csv_path, "w", newline="") as fh:
                fh.write(text)
    if as_json:
        click.echo(_record(ctx, cfg, {"rows": rows}).to_json())
    elif csv_path != "-":
        click.echo(_table(rows, CSV_HEADER))


def _n_list(max_n: int, odd: bool) -> list[int]:
    start = 3 if odd else 2
    out, n = [], start
    while n <= max_n:
        out.append(n)
        n = 2 * n - 1 if odd else 2 * n
    if max_n >= start and (max_n % 2 == 1) == odd and out[-1] != max_n:
        out.append(max_n)
    return out


@cli.command("asymptotics")
@click.option("--max-n", type=click.IntRange(min=2), required=True)
@click.option("--odd", is_flag=True, help="Use odd n (3, 5, 9, ...) instead of even n (2, 4, 8, ...).")
@_config_options
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def asymptotics_cmd(ctx, max_n, odd, apex_x, apex_y, base, as_json):
    """Gap sequence, dimension estimate and coefficient sequence."""
    cfg = _make_cfg(apex_x, apex_y, base)
    ns = _n_list(max_n, odd)
    if len(ns) < 2:
        raise click.BadParameter(f"--max-n {max_n} leaves fewer than two {'odd' if odd else 'even'} n")
    rep = asy.asymptotics_report(ns, cfg, v_inf=_limit(cfg))
    raw = dict(rep.raw_ratios)
    rows = [{"n": n, "vn": v, "gap": g, "n2gap": c, "raw_dimension": raw.get(n)} for n, v, g, c in rep.entries]
    payload = {
        "v_infinity": rep.v_infinity,
        "v_infinity_estimated": rep.v_infinity_estimated,
        "dimension_estimate": rep.dimension_estimate,
        "coefficient_estimate": rep.coefficient_estimate,
        "rows": rows,
    }
    if as_json:
        click.echo(_record(ctx, cfg, payload).to_json())
        return
    click.echo(_table(rows, ("n", "vn", "gap", "n2gap", "raw_dimension")))
    click.echo(f"V_inf = {rep.v_infinity:.12g}   dimension (two-point) = {rep.dimension_estimate:.12g}"
               f"   coefficient = {rep.coefficient_estimate:.12g}")


@cli.command("oracle")
@click.option("--n", "n", type=click.IntRange(1, 4), required=True)
@click.option("--grid", "resolution", type=click.IntRange(min=10), default=2001, show_default=True)
@click.option("--refine", "rounds", type=click.IntRange(min=0), default=3, show_default=True)
@click.option("--shrink", type=click.FloatRange(0, 1, min_open=True, max_open=True), default=0.05, show_default=True)
@click.option("--side", type=click.Choice(["s1", "s2"]), default=None, help="Restrict every point to one side.")
@_config_options
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def oracle_cmd(ctx, n, resolution, rounds, shrink, side, apex_x, apex_y, base, as_json):
    """Brute-force grid search (n <= 3, or n <= 4 with --side)."""
    cfg = _make_cfg(apex_x, apex_y, base)
    spec = GridSpec(resolution, rounds, shrink)
    if side is None:
        if n > 3:
            raise click.BadParameter("unrestricted oracle supports n <= 3")
        r = grid_search(n, cfg, spec)
    else:
        r = restricted_grid_search(n, Side[side.upper()], cfg, spec)
    payload = result_payload(r, cfg)
    payload["alternatives"] = [{"ell": a.ell, "m": a.m, "vn": v} for a, v in r.alternatives.items()]
    if cfg.is_canonical:
        ref = cf.single_side_vn(n) if side else cf.best_allocation(n)[1]
        payload["closed_form"] = ref
        payload["excess"] = r.distortion - ref
    if as_json:
        click.echo(_record(ctx, cfg, payload).to_json())
        return
    click.echo(f"oracle n = {n}: V = {r.distortion:.12g}  allocation ({r.allocation.ell}, {r.allocation.m})")
    if "closed_form" in payload:
        click.echo(f"closed form {payload['closed_form']:.12g}   excess {payload['excess']:.3g}")
    click.echo(_table(payload["alternatives"], ("ell", "m", "vn")))
    click.echo(_table(payload["codebook"], ("side", "param", "x", "y")))


@cli.command("figure")
@click.option("--n", "n", type=click.IntRange(min=1), required=True)
@click.option("--out", "out", type=click.Path(dir_okay=False, allow_dash=True), required=True)
@_config_options
def figure_cmd(n, out, apex_x, apex_y, base):
    """SVG picture of the optimal n-point codebook."""
    cfg = _make_cfg(apex_x, apex_y, base)
    svg = render_figure(solve(n, cfg, cross_check=False), cfg)
    if out == "-":
        click.echo(svg, nl=False)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(svg)


@cli.command("single-side")
@click.option("--n", "n", type=click.IntRange(min=1), required=True)
@click.option("--side", type=click.Choice(["s1", "s2"]), default="s1", show_default=True)
@_config_options
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def single_side_cmd(ctx, n, side, apex_x, apex_y, base, as_json):
    """Best codebook with all n points on one side."""
    cfg = _make_cfg(apex_x, apex_y, base)
    s = Side[side.upper()]
    if cfg.is_canonical:
        cb = cf.single_side_codebook(n, s, cfg)
        g = cf.single_side_gap(n)
        r = SolveResult(Allocation(cb.ell, cb.m), ProgressionParams(g, g), cb, cf.single_side_vn(n), Provenance.CLOSED_FORM)
    else:
        r = solve_allocation(Allocation(n, 0) if s is Side.S1 else Allocation(0, n), cfg)
    payload = result_payload(r, cfg)
    if as_json:
        click.echo(_record(ctx, cfg, payload).to_json())
        return
    click.echo(f"single side {s.name}, n = {n}: V = {payload['vn']:.12g}")
    click.echo(_table(payload["codebook"], ("side", "param", "x", "y")))


def main(argv: list[str] | None = None) -> int:
    try:
        args = list(sys.argv[1:] if argv is None else argv)
        cli.main(args=args, prog_name="cquant", standalone_mode=False, obj=_Ctx(argv=args))
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except (NoConvergence, InfeasibleProgression) as exc:
        click.echo(f"error: solver did not converge: {exc}", err=True)
        return EXIT_NO_CONVERGENCE
    except (InvariantViolation, DegeneratePartition, AssertionError) as exc:
        click.echo(f"error: invariant violated: {exc}", err=True)
        return EXIT_INVARIANT
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
