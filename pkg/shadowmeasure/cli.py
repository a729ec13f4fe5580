"""Command-line front end.

Results go to stdout as JSON or CSV, diagnostics to stderr. Exit codes: 0 success,
1 relation does not hold, 2 input error, 3 numeric failure.
"""
import csv
import functools
import io
import json
import logging
import math
import sys
from typing import Callable, Dict, Optional, Sequence

import click
import numpy as np
from pydantic import ValidationError

from . import coupling as C
from .config import settings, tolerance
from .envelope import affine_gaps, contact_intervals
from .errors import InvalidGrid, ShadowError
from .measure import Measure, support
from .orders import RELATIONS
from .piecewise import PiecewisePoly, sample_grid
from .potential import call_potential, classify, put_potential, u_potential
from .schemas import (
    CostResponse,
    CouplingSchema,
    HullResponse,
    MeasureSchema,
    PiecewiseSchema,
    PotentialClassSchema,
    PotentialResponse,
)
from .shadow import (
    counter_shadow,
    counter_shadow_potential_pair,
    counter_shadow_quantile,
    shadow,
    shadow_potential_pair,
)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class InputFailure(Exception):
    """Unreadable or invalid input file."""


# --- I/O helpers ---

def _load_json(path: str):
    try:
        with click.open_file(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InputFailure(f"{path}: {e.strerror or e}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputFailure(f"{path}:{e.lineno}:{e.colno}: malformed JSON: {e.msg}")


def _validate(model, path: str):
    data = _load_json(path)
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"])
        raise InputFailure(f"{path}: {where}: {first['msg']}")


def read_measure(path: str) -> Measure:
    return _validate(MeasureSchema, path).to_measure()


def read_coupling(path: str) -> C.Coupling:
    return _validate(CouplingSchema, path).to_coupling()


def emit_json(payload) -> None:
    if hasattr(payload, "model_dump"):
        payload = payload.model_dump()
    click.echo(json.dumps(payload, indent=2))


def _interval(pair) -> list:
    return [None if math.isinf(v) else v for v in pair]


def parse_grid(text: str) -> np.ndarray:
    """'a:b:step' -> the points a, a+step, ..., up to b."""
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise InvalidGrid(f"grid {text!r} is not of the form a:b:step")
    if not (math.isfinite(lo) and math.isfinite(hi) and math.isfinite(step)) or step <= 0 or hi < lo:
        raise InvalidGrid(f"grid {text!r} needs a <= b and step > 0")
    return sample_grid(lo, hi, step)


def default_grid(*measures: Measure, points: int = 401) -> np.ndarray:
    spans = [support(m) for m in measures if not m.is_zero]
    if not spans:
        return np.linspace(-1.0, 1.0, points)
    lo = min(s[0] for s in spans)
    hi = max(s[1] for s in spans)
    pad = 0.1 * (hi - lo) + 0.5
    return np.linspace(lo - pad, hi + pad, points)


def write_curves(out, grid: np.ndarray, curves: Dict[str, PiecewisePoly], tagged: bool) -> None:
    writer = csv.writer(out, lineterminator="\n")
    for name, f in curves.items():
        values = f.sample(grid)
        for k, v in zip(grid, values):
            row = [repr(float(k)), repr(float(v))]
            writer.writerow(row + [name] if tagged else row)


def _echo_curves(grid: np.ndarray, curves: Dict[str, PiecewisePoly], tagged: bool) -> None:
    buf = io.StringIO()
    write_curves(buf, grid, curves, tagged)
    click.echo(buf.getvalue(), nl=False)


def _guard(command: Callable) -> Callable:
    """Map domain and input failures to exit codes."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return command(*args, **kwargs)
        except InputFailure as e:
            click.echo(f"error: {e}", err=True)
            ctx.exit(EXIT_INPUT)
        except ShadowError as e:
            suffix = f" (at {e.witness!r})" if e.witness is not None else ""
            click.echo(f"error: {type(e).__name__}: {e}{suffix}", err=True)
            ctx.exit(e.exit_code)
    return wrapper


# --- commands ---

@click.group()
@click.option("--tol", type=float, default=None, help="Override every comparison tolerance.")
@click.option("-v", "--verbose", is_flag=True, help="Debug logging on stderr.")
@click.pass_context
def cli(ctx: click.Context, tol: Optional[float], verbose: bool) -> None:
    """Shadow measures, potentials and shadow couplings on the real line."""
    level = logging.DEBUG if verbose else getattr(logging, settings.log_level.upper(), logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("shadowmeasure").setLevel(level)
    if tol is not None:
        if not tol > 0:
            raise click.BadParameter("must be positive", param_hint="--tol")
        ctx.with_resource(tolerance(tol))


POTENTIALS = {"put": put_potential, "call": call_potential, "u": u_potential}


@cli.command()
@click.option("--kind", type=click.Choice(sorted(POTENTIALS)), default="put")
@click.option("--csv", "as_csv", is_flag=True, help="Sample on --grid instead of printing coefficients.")
@click.option("--grid", default=None, help="a:b:step sampling grid.")
@click.argument("measure")
@_guard
def potential(kind: str, as_csv: bool, grid: Optional[str], measure: str) -> None:
    """Potential of MEASURE as piecewise coefficients."""
    m = read_measure(measure)
    f = POTENTIALS[kind](m)
    if as_csv:
        ks = parse_grid(grid) if grid else default_grid(m)
        _echo_curves(ks, {kind: f}, tagged=False)
        return
    emit_json(PotentialResponse(
        kind=kind,
        potential=PiecewiseSchema.from_poly(f),
        potential_class=PotentialClassSchema(alpha=m.mass, beta=m.mean),
    ))


@cli.command()
@click.option("--csv", "as_csv", is_flag=True, help="Sample f and its hull on --grid.")
@click.option("--grid", default=None, help="a:b:step sampling grid.")
@click.argument("mu")
@click.argument("nu")
@_guard
def hull(as_csv: bool, grid: Optional[str], mu: str, nu: str) -> None:
    """Convex hull of P_NU - P_MU with its contact set."""
    m, n = read_measure(mu), read_measure(nu)
    diff, h = shadow_potential_pair(m, n)
    if as_csv:
        ks = parse_grid(grid) if grid else default_grid(m, n)
        _echo_curves(ks, {"diff": diff, "hull": h}, tagged=True)
        return
    cls = classify(h)
    emit_json(HullResponse(
        hull=PiecewiseSchema.from_poly(h),
        potential_class=PotentialClassSchema(alpha=cls.alpha, beta=cls.beta),
        contact=[_interval(p) for p in contact_intervals(diff, h)],
        gaps=[_interval(p) for p in affine_gaps(diff, h)],
    ))


@cli.command()
@click.option("--relation", type=click.Choice(sorted(RELATIONS)), default="cx")
@click.argument("a")
@click.argument("b")
@click.pass_context
@_guard
def order(ctx: click.Context, relation: str, a: str, b: str) -> None:
    """Decide A <= B in the chosen order; exit 1 when it fails."""
    report = RELATIONS[relation](read_measure(a), read_measure(b))
    emit_json(report)
    ctx.exit(EXIT_OK if report.holds else EXIT_FALSE)


def _emit_potentials(path: Optional[str], grid: Optional[str], curves: Dict[str, PiecewisePoly],
                     *measures: Measure) -> None:
    if not path:
        return
    ks = parse_grid(grid) if grid else default_grid(*measures)
    with click.open_file(path, "w", encoding="utf-8") as fh:
        write_curves(fh, ks, curves, tagged=True)


@cli.command("shadow")
@click.option("--emit-potentials", "emit", default=None, help="CSV file for P_nu - P_mu and its hull.")
@click.option("--grid", default=None, help="a:b:step grid for --emit-potentials.")
@click.argument("mu")
@click.argument("nu")
@_guard
def shadow_cmd(emit: Optional[str], grid: Optional[str], mu: str, nu: str) -> None:
    """Shadow of MU in NU."""
    m, n = read_measure(mu), read_measure(nu)
    result = shadow(m, n)
    if emit:
        diff, h = shadow_potential_pair(m, n)
        _emit_potentials(emit, grid, {"diff": diff, "hull": h}, m, n)
    emit_json(MeasureSchema.from_measure(result))


@cli.command("countershadow")
@click.option("--method", type=click.Choice(["hull", "quantile"]), default="hull")
@click.option("--emit-potentials", "emit", default=None, help="CSV file for the capped potential and its hull.")
@click.option("--grid", default=None, help="a:b:step grid for --emit-potentials.")
@click.argument("mu")
@click.argument("nu")
@_guard
def countershadow_cmd(method: str, emit: Optional[str], grid: Optional[str], mu: str, nu: str) -> None:
    """Counter-shadow of MU in NU."""
    m, n = read_measure(mu), read_measure(nu)
    result = counter_shadow(m, n) if method == "hull" else counter_shadow_quantile(m, n)
    if emit:
        low, h = counter_shadow_potential_pair(m, n)
        _emit_potentials(emit, grid, {"min": low, "hull": h}, m, n)
    emit_json(MeasureSchema.from_measure(result))


@cli.command()
@click.option("--scheme", default="left-curtain", help="left-curtain, sunset:<n> or middle:<n>.")
@click.option("--discretize", "n_cells", type=click.IntRange(min=1), default=None,
              help="Cells used to discretize a continuous mu.")
@click.argument("mu")
@click.argument("nu")
@_guard
def couple(scheme: str, n_cells: Optional[int], mu: str, nu: str) -> None:
    """Shadow coupling of MU and NU."""
    c = C.build(scheme, read_measure(mu), read_measure(nu), n_cells)
    emit_json(CouplingSchema.from_coupling(c))


@cli.command()
@click.argument("coupling")
@click.argument("mu")
@click.argument("nu")
@click.pass_context
@_guard
def verify(ctx: click.Context, coupling: str, mu: str, nu: str) -> None:
    """Check marginals and the martingale property of COUPLING."""
    report = C.verify_coupling(read_coupling(coupling), read_measure(mu), read_measure(nu))
    emit_json(report)
    ctx.exit(EXIT_OK if report.holds else EXIT_FALSE)


@cli.command()
@click.option("--h", "cost", default="square", help="abs, square, cube, quartic or exp:<lambda>.")
@click.argument("coupling")
@_guard
def cost(cost: str, coupling: str) -> None:
    """Expected cost E[h(Y - X)] under COUPLING."""
    value = C.expected_cost(read_coupling(coupling), cost)
    emit_json(CostResponse(h=cost, value=value))


def curve_table(m: Measure, n: Measure) -> Dict[str, Callable[[], PiecewisePoly]]:
    return {
        "put_mu": lambda: put_potential(m),
        "put_nu": lambda: put_potential(n),
        "call_mu": lambda: call_potential(m),
        "call_nu": lambda: call_potential(n),
        "diff": lambda: shadow_potential_pair(m, n)[0],
        "hull": lambda: shadow_potential_pair(m, n)[1],
        "shadow": lambda: put_potential(n) - shadow_potential_pair(m, n)[1],
        "min": lambda: counter_shadow_potential_pair(m, n)[0],
        "counter": lambda: counter_shadow_potential_pair(m, n)[1],
    }


@cli.command()
@click.option("--grid", required=True, help="a:b:step sampling grid.")
@click.option("--curves", default="diff,hull", help="Comma-separated: " + ",".join(
    ["put_mu", "put_nu", "call_mu", "call_nu", "diff", "hull", "shadow", "min", "counter"]))
@click.argument("mu")
@click.argument("nu")
@_guard
def sample(grid: str, curves: str, mu: str, nu: str) -> None:
    """CSV rows k,value,curve for potentials built from MU and NU."""
    m, n = read_measure(mu), read_measure(nu)
    table = curve_table(m, n)
    names = [c.strip() for c in curves.split(",") if c.strip()]
    unknown = [c for c in names if c not in table]
    if unknown:
        raise InputFailure(f"unknown curve(s): {', '.join(unknown)}")
    ks = parse_grid(grid)
    _echo_curves(ks, {c: table[c]() for c in names}, tagged=True)


@cli.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host: str, port: int) -> None:
    """Run the HTTP API."""
    import uvicorn

    uvicorn.run("shadowmeasure.main:app", host=host, port=port)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code."""
    try:
        code = cli.main(args=list(argv) if argv is not None else None,
                        prog_name="shadowmeasure", standalone_mode=False)
    except click.exceptions.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        return EXIT_INPUT
    return code if isinstance(code, int) else EXIT_OK
