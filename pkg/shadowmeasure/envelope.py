"""Convex envelopes of continuous piecewise quadratics.

The hull is found by a left-to-right stack sweep over the exposed elements of
the graph: arcs of convex pieces and the vertices of everything else. Two
neighbouring elements are joined by their lower common tangent, computed in
closed form from the elements' support functions ``m -> min(f(x) - m*x)``.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .config import settings
from .errors import HullFailure, InvalidGrid, OutOfChord, UnboundedBelow
from .piecewise import Coeffs, PiecewisePoly, align, real_roots

logger = logging.getLogger(__name__)

Interval = Tuple[float, float]


@dataclass(frozen=True)
class _Element:
    lo: float
    hi: float
    coeffs: Coeffs
    y: float = 0.0

    @property
    def is_arc(self) -> bool:
        return self.hi > self.lo

    def value(self, x: float) -> float:
        if not self.is_arc:
            return self.y
        a, b, c = self.coeffs
        return (a * x + b) * x + c

    def slope_cuts(self) -> List[float]:
        if not self.is_arc:
            return []
        a, b, _ = self.coeffs
        return [2.0 * a * self.lo + b, 2.0 * a * self.hi + b]

    def contact(self, m: float) -> float:
        if not self.is_arc:
            return self.lo
        a, b, _ = self.coeffs
        # snap in slope space: on a flat arc a tiny slope error moves x a long way
        s_lo, s_hi = 2.0 * a * self.lo + b, 2.0 * a * self.hi + b
        slack = settings.eps_struct * (1.0 + abs(m))
        if m <= s_lo + slack:
            return self.lo
        if m >= s_hi - slack:
            return self.hi
        x = (m - b) / (2.0 * a)
        snap = settings.eps_struct * (1.0 + abs(x))
        if x <= self.lo + snap:
            return self.lo
        if x >= self.hi - snap:
            return self.hi
        return x

    def support(self, m: float) -> float:
        x = self.contact(m)
        return self.value(x) - m * x

    def support_coeffs(self, m: float) -> Tuple[float, float, float]:
        """Support function as A*m**2 + B*m + C on the regime containing m."""
        x = self.contact(m)
        if not self.is_arc or x in (self.lo, self.hi):
            return 0.0, -x, self.value(x)
        a, b, c = self.coeffs
        return -1.0 / (4.0 * a), b / (2.0 * a), c - b * b / (4.0 * a)


@dataclass
class _Node:
    element: _Element
    m_in: float


def _interior(lo: float, hi: float) -> float:
    if math.isinf(lo) and math.isinf(hi):
        return 0.0
    if math.isinf(lo):
        return hi - 1.0 - abs(hi)
    if math.isinf(hi):
        return lo + 1.0 + abs(lo)
    return 0.5 * (lo + hi)


def _bridge(left: _Element, right: _Element) -> float:
    """Slope of the lower common tangent of two elements, left before right.

    phi(m) = support_left(m) - support_right(m) is nondecreasing; the bridge
    slope is sup{m : phi(m) <= 0}.
    """
    def phi(m: float) -> float:
        return left.support(m) - right.support(m)

    cuts = sorted(set(left.slope_cuts() + right.slope_cuts()))
    idx = next((i for i, s in enumerate(cuts) if phi(s) > 0.0), len(cuts))
    bounds = [-math.inf] + cuts + [math.inf]
    lo, hi = bounds[idx], bounds[idx + 1]

    mid = _interior(lo, hi)
    la, lb, lc = left.support_coeffs(mid)
    ra, rb, rc = right.support_coeffs(mid)
    A, B, C = la - ra, lb - rb, lc - rc
    if A == 0.0:
        candidates = [-C / B] if B != 0.0 else []
    else:
        candidates = real_roots(A, B, C)
        if not candidates:
            # tangential root of the quadratic
            candidates = [-B / (2.0 * A)]
    slack = 1e-9 * (1.0 + abs(mid))
    inside = [m for m in candidates if lo - slack <= m <= hi + slack]
    if inside:
        m = min(max(max(inside), lo), hi)
        scale = 1.0 + abs(left.support(m)) + abs(right.support(m))
        if abs(phi(m)) <= 1e-9 * scale:
            return m
    return _bracketed_root(phi, lo, hi)


def _bracketed_root(phi, lo: float, hi: float) -> float:
    step = 1.0
    if math.isinf(lo):
        lo = (hi if not math.isinf(hi) else 0.0) - step
        while phi(lo) > 0.0:
            step *= 2.0
            lo -= step
            if step > 1e300:
                raise HullFailure("no lower bracket for tangent slope")
    step = 1.0
    if math.isinf(hi):
        hi = lo + step
        while phi(hi) <= 0.0:
            step *= 2.0
            hi += step
            if step > 1e300:
                raise HullFailure("no upper bracket for tangent slope")
    if phi(hi) <= 0.0:
        return hi
    if phi(lo) > 0.0:
        return lo
    logger.debug("tangent slope by bracketing on [%g, %g]", lo, hi)
    return brentq(phi, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _elements(f: PiecewisePoly) -> List[_Element]:
    xs = f.breakpoints
    n = len(xs)

    def arc(i: int) -> bool:
        # piece i is finite for 1 <= i <= n - 1
        if i < 1 or i > n - 1:
            return False
        a, b, c = f.pieces[i]
        lo, hi = xs[i - 1], xs[i]
        noise = settings.eps_struct * (1.0 + abs(f(lo)) + abs(f(hi)))
        return a > 0.0 and a * (hi - lo) ** 2 > noise

    out: List[_Element] = []
    for i, x in enumerate(xs):
        if not arc(i) and not arc(i + 1):
            out.append(_Element(x, x, f.pieces[i + 1], float(f(x))))
        if arc(i + 1):
            out.append(_Element(x, xs[i + 1], f.pieces[i + 1]))
    return out


def _line_through(x: float, y: float, slope: float) -> Coeffs:
    return 0.0, slope, y - slope * x


# below this relative width a chord slope is mostly rounding; use the bridge slope
_CHORD_GAP = 1e-3


def _redundant(stack: List[_Node], m: float, e: _Element, value_tol: float) -> bool:
    """The top of the stack adds nothing to the hull once e is joined at slope m.

    A vertex whose kink times its distance to a neighbouring contact is below
    `value_tol` moves the hull by at most that much, so it is dropped too.
    """
    top = stack[-1]
    rise = m - top.m_in
    if rise <= 1e-12 * (1.0 + abs(m) + abs(top.m_in)):
        return True
    if top.element.is_arc:
        return False
    t = top.element.lo
    p = stack[-2].element.contact(top.m_in) if len(stack) > 1 else -math.inf
    q = e.contact(m)
    return rise * min(t - p, q - t) <= value_tol


def convex_hull(f: PiecewisePoly) -> PiecewisePoly:
    """Largest convex minorant of f."""
    if not f.breakpoints:
        return f
    s_left = f.left_tail[1]
    s_right = f.right_tail[1]
    if f.left_tail[0] != 0.0 or f.right_tail[0] != 0.0:
        raise HullFailure("tails must be affine")
    reach = max(abs(f.breakpoints[0]), abs(f.breakpoints[-1]))
    tol = settings.tol_order * max(1.0, abs(s_left) + abs(s_right)) * (1.0 + reach)
    if s_left > s_right + tol:
        raise UnboundedBelow(
            f"left tail slope {s_left} exceeds right tail slope {s_right}",
            witness=f.breakpoints[0],
        )
    s_right = max(s_right, s_left)
    height = max(abs(f(x)) for x in f.breakpoints)
    value_tol = settings.eps_struct * (1.0 + height + (abs(s_left) + abs(s_right)) * (1.0 + reach))

    elements = _elements(f)
    stack: List[_Node] = []
    pops = 0
    for e in elements:
        m = s_left
        while stack:
            m = _bridge(stack[-1].element, e)
            if _redundant(stack, m, e, value_tol):
                stack.pop()
                pops += 1
                continue
            break
        stack.append(_Node(e, m if stack else s_left))
    while len(stack) > 1 and s_right <= stack[-1].m_in + 1e-12 * (1.0 + abs(s_right)):
        stack.pop()
        pops += 1
    logger.debug("hull sweep: %d elements, %d pops, %d nodes", len(elements), pops, len(stack))

    starts: List[float] = [-math.inf]
    pieces: List[Coeffs] = []

    def emit(x: float, coeffs: Coeffs) -> None:
        if len(starts) > 1 and x <= starts[-1] + settings.eps_struct * (1.0 + abs(x)):
            pieces[-1] = coeffs
            return
        starts.append(x)
        pieces.append(coeffs)

    first = stack[0].element
    x0 = first.contact(s_left)
    pieces.append(_line_through(x0, first.value(x0), s_left))
    for j, node in enumerate(stack):
        e = node.element
        m_out = stack[j + 1].m_in if j + 1 < len(stack) else s_right
        enter, leave = e.contact(node.m_in), e.contact(m_out)
        if e.is_arc and leave > enter:
            emit(enter, e.coeffs)
        y_leave = e.value(leave)
        if j + 1 < len(stack):
            nxt = stack[j + 1].element
            x_next = nxt.contact(m_out)
            y_next = nxt.value(x_next)
            gap = x_next - leave
            slope = (y_next - y_leave) / gap if gap > _CHORD_GAP * (1.0 + abs(leave)) else m_out
            emit(leave, _line_through(leave, y_leave, slope))
        else:
            emit(leave, _line_through(leave, y_leave, s_right))
    return PiecewisePoly(tuple(starts[1:]), tuple(pieces)).simplify()


def chord(f: PiecewisePoly, x: float, z: float, y: float) -> float:
    """Linear interpolation of f between x and z, evaluated at y."""
    if not x <= y <= z:
        raise OutOfChord(f"{y} is not in [{x}, {z}]", witness=y)
    fx = f(x)
    if z == x:
        return fx
    return fx + (f(z) - fx) * (y - x) / (z - x)


def _check_grid(grid: np.ndarray) -> None:
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidGrid("grid must be a non-empty list of reals")
    if not np.all(np.isfinite(grid)):
        raise InvalidGrid("grid contains non-finite values")
    if np.any(np.diff(grid) <= 0):
        raise InvalidGrid("grid must be strictly increasing")


def convex_hull_oracle(f: PiecewisePoly, grid: Sequence[float], method: str = "chain") -> np.ndarray:
    """Hull of f sampled on `grid`: min over grid pairs x <= y <= z of chord(f, x, z, y).

    ``method="pairs"`` evaluates every pair directly (cubic cost, small grids);
    ``method="chain"`` gets the same minimum from the lower hull of the sampled points.
    """
    xs = np.asarray(grid, dtype=float)
    _check_grid(xs)
    ys = np.asarray(f(xs), dtype=float).reshape(-1)
    if method == "pairs":
        out = ys.copy()
        for j, y in enumerate(xs):
            xl, yl = xs[: j + 1, None], ys[: j + 1, None]
            xr, yr = xs[None, j:], ys[None, j:]
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = yl + (yr - yl) * (y - xl) / (xr - xl)
            vals = np.where(xr == xl, yl, vals)
            out[j] = vals.min()
        return out
    if method != "chain":
        raise InvalidGrid(f"unknown oracle method {method!r}")

    def cross(o: int, p: int, q: int) -> float:
        return (xs[p] - xs[o]) * (ys[q] - ys[o]) - (ys[p] - ys[o]) * (xs[q] - xs[o])

    lower: List[int] = []
    for i in range(xs.size):
        while len(lower) >= 2 and cross(lower[-2], lower[-1], i) <= 0:
            lower.pop()
        lower.append(i)
    return np.interp(xs, xs[lower], ys[lower])


# --- contact set ---

def _piece_is_zero(coeffs: Coeffs, lo: float, hi: float, tol: float) -> bool:
    a, b, c = coeffs
    if math.isinf(lo) or math.isinf(hi):
        if a != 0.0:
            return False
        x = hi if math.isinf(lo) else lo
        if math.isinf(x):
            return abs(b) <= tol and abs(c) <= tol
        return abs(b) <= tol and abs(b * x + c) <= tol
    samples = [lo, hi, 0.5 * (lo + hi)]
    if a != 0.0:
        vx = -b / (2.0 * a)
        if lo < vx < hi:
            samples.append(vx)
    return all(abs((a * k + b) * k + c) <= tol for k in samples)


def affine_gaps(f: PiecewisePoly, hull: PiecewisePoly, tol: Optional[float] = None) -> List[Interval]:
    """Maximal open intervals on which hull < f."""
    if tol is None:
        reach = max((abs(x) for x in f.breakpoints), default=0.0)
        tol = settings.eps_clean * (1.0 + abs(f.right_tail[1]) + abs(f.left_tail[1])) * (1.0 + reach)
    xs, p, q = align(f, hull)
    bounds = [-math.inf] + list(xs) + [math.inf]
    gaps: List[Interval] = []
    start = None
    for i, (lo, hi) in enumerate(zip(bounds, bounds[1:])):
        d = tuple(u - v for u, v in zip(p[i], q[i]))
        zero = _piece_is_zero(d, lo, hi, tol)
        if start is not None and (zero or abs(f(lo) - hull(lo)) <= tol):
            gaps.append((start, lo))
            start = None
        if not zero and start is None:
            start = lo
    if start is not None:
        gaps.append((start, math.inf))
    return gaps


def contact_intervals(f: PiecewisePoly, hull: PiecewisePoly, tol: Optional[float] = None) -> List[Interval]:
    """Closed intervals (possibly single points) on which hull = f."""
    gaps = affine_gaps(f, hull, tol)
    out: List[Interval] = []
    left = -math.inf
    for lo, hi in gaps:
        if not math.isinf(lo):
            out.append((left, lo))
        left = hi
    if not math.isinf(left) or not gaps:
        out.append((left, math.inf))
    return out
