"""Martingale couplings induced by shadows of an ordered decomposition of mu.

Each part is shadowed, atom by atom and left to right, into what is left of
nu; the row target is that shadow.
"""
import logging
import math
import re
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linprog

from .config import problem_scale, settings
from .errors import NoConvergence, NotAtomic, NotConvexOrder, OutOfRange, UnknownScheme, UnsupportedCost
from .measure import (
    Atom,
    Measure,
    atomic,
    barycentre,
    discretize,
    scale,
    subtract,
    total,
)
from .orders import leq_convex, leq_setwise
from .potential import potential_gap
from .schemas import OrderReport
from .shadow import shadow

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CouplingRow:
    x: float
    m: float
    target: Measure
    part: int = 0


@dataclass(frozen=True)
class Coupling:
    rows: Tuple[CouplingRow, ...] = ()

    def sources(self) -> Measure:
        return atomic([(r.x, r.m) for r in self.rows]) if self.rows else Measure()

    def total_target(self) -> Measure:
        return total(r.target for r in self.rows)

    def kernel(self, i: int) -> Measure:
        """Probability kernel pi_x of row i."""
        row = self.rows[i]
        return scale(row.target, 1.0 / row.m)

    def cumulative_target(self, parts: int) -> Measure:
        """Total target of the rows built from the first `parts` parts."""
        return total(r.target for r in self.rows if r.part < parts)

    def cumulative_source(self, parts: int) -> Measure:
        rows = [(r.x, r.m) for r in self.rows if r.part < parts]
        return atomic(rows) if rows else Measure()


def shadow_coupling(parts: Sequence[Measure], nu: Measure) -> Coupling:
    """Shadow each part of an ordered atomic decomposition into the rest of nu."""
    rows: List[CouplingRow] = []
    remaining = nu
    for index, part in enumerate(parts):
        if not part.is_atomic:
            raise NotAtomic(f"part {index} has a continuous component; discretize it first",
                            witness=part.segments[0].a)
        for atom in part.atoms:
            target = shadow(Measure(atoms=(Atom(atom.x, atom.w),)), remaining)
            rows.append(CouplingRow(atom.x, atom.w, target, index))
            remaining = subtract(remaining, target)
        logger.debug("coupling: part %d done, %d rows, %.6g mass left", index, len(rows), remaining.mass)
    return Coupling(tuple(rows))


def _require_convex_order(mu: Measure, nu: Measure) -> None:
    report = leq_convex(mu, nu)
    if not report.holds:
        raise NotConvexOrder(f"first measure is not below the second in convex order ({report.detail})",
                             witness=report.witness)


def _atomic(m: Measure, n: Optional[int]) -> Measure:
    if m.is_atomic:
        return m
    return discretize(m, n or settings.discretize_cells)


def left_curtain(mu: Measure, nu: Measure, n: Optional[int] = None) -> Coupling:
    """Left-curtain coupling: atoms of mu shadowed in increasing position, one part each."""
    _require_convex_order(mu, nu)
    source = _atomic(mu, n)
    return shadow_coupling([Measure(atoms=(a,)) for a in source.atoms], nu)


def sunset(mu: Measure, nu: Measure, n: int, n_discretize: Optional[int] = None) -> Coupling:
    """Sunset coupling sliced vertically: n copies of mu / n."""
    if n < 1:
        raise OutOfRange(f"sunset needs at least one slice, got {n}")
    _require_convex_order(mu, nu)
    slice_ = scale(_atomic(mu, n_discretize), 1.0 / n)
    return shadow_coupling([slice_] * n, nu)


def middle_curtain(mu: Measure, nu: Measure, n: int, n_discretize: Optional[int] = None) -> Coupling:
    """Middle-curtain coupling sliced along S^mu(u * mass * delta_barycentre)."""
    if n < 1:
        raise OutOfRange(f"middle-curtain needs at least one slice, got {n}")
    _require_convex_order(mu, nu)
    if mu.is_zero:
        return Coupling()
    centre = barycentre(mu)
    cells = math.ceil((n_discretize or settings.discretize_cells) / n)
    parts = []
    previous = Measure()
    for i in range(1, n + 1):
        level = mu.mass * i / n
        current = mu if i == n else shadow(Measure(atoms=(Atom(centre, level),)), mu)
        piece = subtract(current, previous)
        parts.append(_atomic(piece, cells))
        previous = current
    return shadow_coupling(parts, nu)


def parse_scheme(scheme: str) -> Tuple[str, Optional[int]]:
    """'left-curtain', 'sunset:<n>' or 'middle:<n>'."""
    name, _, count = scheme.partition(":")
    if name == "left-curtain" and not count:
        return name, None
    if name in ("sunset", "middle") and count.isdigit() and int(count) >= 1:
        return name, int(count)
    raise UnknownScheme(f"unknown coupling scheme {scheme!r}; use left-curtain, sunset:<n> or middle:<n>")


def build(scheme: str, mu: Measure, nu: Measure, n_discretize: Optional[int] = None) -> Coupling:
    name, count = parse_scheme(scheme)
    if name == "left-curtain":
        return left_curtain(mu, nu, n_discretize)
    if name == "sunset":
        return sunset(mu, nu, count, n_discretize)
    return middle_curtain(mu, nu, count, n_discretize)


def verify_coupling(c: Coupling, mu: Measure, nu: Measure, tol: Optional[float] = None) -> OrderReport:
    """Source marginal, target domination and per-row barycentres; failures are reported."""
    if tol is None:
        tol = settings.tol_mart * problem_scale(max(mu.mass, nu.mass), max(mu.reach, nu.reach))
    sources = c.sources()
    if mu.is_atomic:
        gap, where = potential_gap(sources, mu)
        if not gap <= tol:
            return OrderReport(holds=False, witness=where, detail="source-marginal",
                               margin=tol - gap if math.isfinite(gap) else None)
    else:
        if abs(sources.mass - mu.mass) > tol or abs(sources.mean - mu.mean) > tol:
            return OrderReport(holds=False, witness=mu.reach + 1.0, detail="source-moments")
        order = leq_convex(sources, mu, tol=tol)
        if not order.holds:
            return OrderReport(holds=False, witness=order.witness, detail="source-order",
                               margin=order.margin)

    for row in c.rows:
        slack = tol * (1.0 + abs(row.x) * row.m)
        if abs(row.target.mass - row.m) > slack:
            return OrderReport(holds=False, witness=row.x, detail="row-mass")
        if abs(row.target.mean - row.m * row.x) > slack:
            return OrderReport(holds=False, witness=row.x, detail="row-barycentre")

    targets = leq_setwise(c.total_target(), nu, tol=tol)
    if not targets.holds:
        return OrderReport(holds=False, witness=targets.witness, detail="target-domination",
                           margin=targets.margin)
    return OrderReport(holds=True, margin=targets.margin)


# --- costs ---

CostLike = Union[str, Callable[[np.ndarray], np.ndarray]]

_EXP = re.compile(r"^exp[:(]\s*([-+0-9.eE]+)\s*\)?$")


def _antiderivative(cost: str) -> Tuple[Callable, Callable]:
    """(h, H) with H' = h for a built-in cost name."""
    if cost == "abs":
        return np.abs, lambda t: 0.5 * t * np.abs(t)
    if cost == "square":
        return np.square, lambda t: t ** 3 / 3.0
    if cost == "cube":
        return lambda t: t ** 3, lambda t: t ** 4 / 4.0
    if cost == "quartic":
        return lambda t: t ** 4, lambda t: t ** 5 / 5.0
    match = _EXP.match(cost)
    if match:
        lam = float(match.group(1))
        if lam == 0.0:
            return np.ones_like, lambda t: t
        return lambda t: np.exp(lam * t), lambda t: np.exp(lam * t) / lam
    raise UnsupportedCost(f"unknown cost {cost!r}; use abs, square, cube, quartic or exp:<lambda>")


def _row_cost(row: CouplingRow, h: Callable, primitive: Optional[Callable],
              nodes: np.ndarray, weights: np.ndarray) -> float:
    parts = [a.w * float(h(np.float64(a.x - row.x))) for a in row.target.atoms]
    for s in row.target.segments:
        lo, hi = s.a - row.x, s.b - row.x
        if primitive is not None:
            parts.append(s.density * float(primitive(np.float64(hi)) - primitive(np.float64(lo))))
        else:
            t = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
            parts.append(s.density * 0.5 * (hi - lo) * float(np.dot(weights, h(t))))
    return math.fsum(parts)


def expected_cost(c: Coupling, cost: CostLike) -> float:
    """Sum over rows of the integral of h(y - x) against the row target."""
    if cost is None:
        raise UnsupportedCost("no cost given")
    if callable(cost):
        h, primitive = cost, None
    else:
        h, primitive = _antiderivative(str(cost).strip().lower())
    nodes, weights = np.polynomial.legendre.leggauss(settings.quad_nodes)
    return math.fsum(_row_cost(r, h, primitive, nodes, weights) for r in c.rows)


def lp_cost_bound(mu: Measure, nu: Measure, cost: CostLike) -> float:
    """Minimum of E[h(Y - X)] over martingale couplings of atomic mu and nu, by linear programming."""
    if not (mu.is_atomic and nu.is_atomic):
        raise NotAtomic("the linear-programming bound needs atomic measures")
    h = cost if callable(cost) else _antiderivative(str(cost).strip().lower())[0]
    xs = np.array([a.x for a in mu.atoms])
    ps = np.array([a.w for a in mu.atoms])
    ys = np.array([a.x for a in nu.atoms])
    qs = np.array([a.w for a in nu.atoms])
    n, k = xs.size, ys.size
    costs = np.asarray(h(ys[None, :] - xs[:, None]), dtype=float).reshape(-1)

    eq_rows, eq_rhs = [], []
    for i in range(n):
        row = np.zeros(n * k)
        row[i * k:(i + 1) * k] = 1.0
        eq_rows.append(row)
        eq_rhs.append(ps[i])
        row = np.zeros(n * k)
        row[i * k:(i + 1) * k] = ys
        eq_rows.append(row)
        eq_rhs.append(ps[i] * xs[i])
    col = np.zeros((k, n * k))
    for j in range(k):
        col[j, j::k] = 1.0
    full = abs(mu.mass - nu.mass) <= settings.tol_order * max(1.0, nu.mass)
    if full:
        a_eq = np.vstack(eq_rows + list(col))
        b_eq = np.array(eq_rhs + list(qs))
        a_ub, b_ub = None, None
    else:
        a_eq, b_eq = np.vstack(eq_rows), np.array(eq_rhs)
        a_ub, b_ub = col, qs
    result = linprog(costs, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                     bounds=(0, None), method="highs")
    if result.status != 0:
        raise NoConvergence(f"linear program failed: {result.message}")
    return float(result.fun)
