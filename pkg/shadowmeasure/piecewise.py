"""Continuous piecewise quadratics with affine tails.

Piece ``i`` covers ``[x_{i-1}, x_i)`` with ``x_0 = -inf`` and ``x_{n+1} = +inf``
and holds global coefficients ``(a, b, c)`` of ``a*k**2 + b*k + c``.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .config import settings

logger = logging.getLogger(__name__)

Coeffs = Tuple[float, float, float]


@dataclass(frozen=True)
class PiecewisePoly:
    breakpoints: Tuple[float, ...]
    pieces: Tuple[Coeffs, ...]

    def __post_init__(self):
        if len(self.pieces) != len(self.breakpoints) + 1:
            raise ValueError(
                f"{len(self.breakpoints)} breakpoints need {len(self.breakpoints) + 1} pieces, "
                f"got {len(self.pieces)}"
            )

    # --- evaluation ---

    @cached_property
    def _xs(self) -> np.ndarray:
        return np.asarray(self.breakpoints, dtype=float)

    @cached_property
    def _coeffs(self) -> np.ndarray:
        return np.asarray(self.pieces, dtype=float).reshape(-1, 3)

    def piece_index(self, k):
        # right piece at a breakpoint
        return np.searchsorted(self._xs, k, side="right")

    def __call__(self, k):
        arr = np.asarray(k, dtype=float)
        co = self._coeffs[self.piece_index(arr)]
        out = (co[..., 0] * arr + co[..., 1]) * arr + co[..., 2]
        return float(out) if out.ndim == 0 else out

    def sample(self, ks: Iterable[float]) -> np.ndarray:
        return np.asarray(self(np.asarray(list(ks), dtype=float)))

    def interval(self, i: int) -> Tuple[float, float]:
        lo = self.breakpoints[i - 1] if i > 0 else -math.inf
        hi = self.breakpoints[i] if i < len(self.breakpoints) else math.inf
        return lo, hi

    def slopes_at(self, i: int) -> Tuple[float, float]:
        """Left and right derivative at breakpoint i."""
        x = self.breakpoints[i]
        a0, b0, _ = self.pieces[i]
        a1, b1, _ = self.pieces[i + 1]
        return 2.0 * a0 * x + b0, 2.0 * a1 * x + b1

    @property
    def left_tail(self) -> Coeffs:
        return self.pieces[0]

    @property
    def right_tail(self) -> Coeffs:
        return self.pieces[-1]

    def to_dict(self) -> dict:
        return {
            "breakpoints": list(self.breakpoints),
            "pieces": [list(p) for p in self.pieces],
        }

    # --- arithmetic ---

    def _combine(self, other: "PiecewisePoly", sign: float) -> "PiecewisePoly":
        xs, p, q = align(self, other)
        return PiecewisePoly(
            xs, tuple((a + sign * d, b + sign * e, c + sign * f) for (a, b, c), (d, e, f) in zip(p, q))
        )

    def __add__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        return self._combine(other, 1.0)

    def __sub__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        return self._combine(other, -1.0)

    def __neg__(self) -> "PiecewisePoly":
        return self.scale(-1.0)

    def scale(self, u: float) -> "PiecewisePoly":
        return PiecewisePoly(self.breakpoints, tuple((u * a, u * b, u * c) for a, b, c in self.pieces))

    def add_affine(self, slope: float, intercept: float) -> "PiecewisePoly":
        return PiecewisePoly(
            self.breakpoints, tuple((a, b + slope, c + intercept) for a, b, c in self.pieces)
        )

    def simplify(self, tol: Optional[float] = None) -> "PiecewisePoly":
        """Drop breakpoints where neighbouring pieces agree in value, slope and curvature."""
        if tol is None:
            tol = settings.eps_struct
        xs: List[float] = []
        pieces: List[Coeffs] = [self.pieces[0]]
        for i, x in enumerate(self.breakpoints):
            nxt = self.pieces[i + 1]
            a0, b0, c0 = pieces[-1]
            a1, b1, c1 = nxt
            v0, v1 = (a0 * x + b0) * x + c0, (a1 * x + b1) * x + c1
            s0, s1 = 2 * a0 * x + b0, 2 * a1 * x + b1
            scale = 1.0 + abs(v0) + abs(s0) * (1.0 + abs(x))
            same = (
                abs(a0 - a1) * (1.0 + x * x) <= tol * scale
                and abs(s0 - s1) * (1.0 + abs(x)) <= tol * scale
                and abs(v0 - v1) <= tol * scale
            )
            if same:
                continue
            xs.append(x)
            pieces.append(nxt)
        return PiecewisePoly(tuple(xs), tuple(pieces))

    # --- analysis ---

    def is_convex(self, tol: float = 0.0) -> Tuple[bool, Optional[float], float]:
        """Convexity test on curvatures and slope jumps.

        Returns (holds, first failing point, worst margin).
        """
        margin = math.inf
        witness = None
        for i in range(len(self.pieces)):
            lo, hi = self.interval(i)
            a = self.pieces[i][0]
            margin = min(margin, a)
            if a < -tol and witness is None:
                if math.isinf(lo) and math.isinf(hi):
                    witness = 0.0
                elif math.isinf(lo):
                    witness = hi - 1.0
                elif math.isinf(hi):
                    witness = lo + 1.0
                else:
                    witness = 0.5 * (lo + hi)
            if i < len(self.breakpoints):
                left, right = self.slopes_at(i)
                jump = right - left
                margin = min(margin, jump)
                if jump < -tol and witness is None:
                    witness = self.breakpoints[i]
        return witness is None, witness, margin

    def infimum(self, slope_tol: float = 0.0) -> Tuple[float, float]:
        """Infimum and a point attaining it (±inf when unbounded through a tail).

        A tail whose slope is within `slope_tol` of zero counts as flat.
        """
        best, where = math.inf, math.nan
        for x in self.breakpoints:
            v = self(x)
            if v < best:
                best, where = v, x
        for i, (a, b, c) in enumerate(self.pieces):
            lo, hi = self.interval(i)
            if a > 0:
                vx = -b / (2.0 * a)
                if lo < vx < hi:
                    v = (a * vx + b) * vx + c
                    if v < best:
                        best, where = v, vx
            elif a < 0 and (math.isinf(lo) or math.isinf(hi)):
                return -math.inf, (-math.inf if math.isinf(lo) else math.inf)
        if not self.breakpoints:
            a, b, c = self.pieces[0]
            if a == 0 and abs(b) <= slope_tol:
                return c, 0.0
        if self.pieces[0][0] == 0 and self.pieces[0][1] > slope_tol:
            return -math.inf, -math.inf
        if self.pieces[-1][0] == 0 and self.pieces[-1][1] < -slope_tol:
            return -math.inf, math.inf
        return best, where

    def argmax_abs(self, slope_tol: float = 0.0) -> Tuple[float, float]:
        """sup |f| and where it is reached; infinite (at a tail) when a tail is not flat."""
        a, b, _ = self.pieces[0]
        if a != 0 or abs(b) > slope_tol:
            return math.inf, -math.inf
        a, b, _ = self.pieces[-1]
        if a != 0 or abs(b) > slope_tol:
            return math.inf, math.inf
        if not self.breakpoints:
            return abs(self.pieces[0][2]), 0.0
        best, where = -1.0, math.nan
        for x in self.breakpoints:
            v = abs(self(x))
            if v > best:
                best, where = v, x
        for i, (a, b, c) in enumerate(self.pieces):
            lo, hi = self.interval(i)
            if a != 0:
                vx = -b / (2.0 * a)
                if lo < vx < hi:
                    v = abs((a * vx + b) * vx + c)
                    if v > best:
                        best, where = v, vx
        return best, where

    def sup_abs(self, slope_tol: float = 0.0) -> float:
        return self.argmax_abs(slope_tol)[0]


def zero() -> PiecewisePoly:
    return PiecewisePoly((), ((0.0, 0.0, 0.0),))


def affine(slope: float, intercept: float) -> PiecewisePoly:
    return PiecewisePoly((), ((0.0, slope, intercept),))


def from_dict(data: dict) -> PiecewisePoly:
    return PiecewisePoly(
        tuple(float(x) for x in data["breakpoints"]),
        tuple(tuple(float(v) for v in p) for p in data["pieces"]),
    )


def _piece_at(f: PiecewisePoly, lo: float, hi: float) -> Coeffs:
    if math.isinf(lo):
        return f.pieces[0]
    if math.isinf(hi):
        return f.pieces[-1]
    return f.pieces[int(f.piece_index(0.5 * (lo + hi)))]


def merge_points(points: Iterable[float]) -> List[float]:
    """Sorted points with near-duplicates collapsed onto the first one."""
    out: List[float] = []
    for x in sorted(points):
        if out and x - out[-1] <= settings.eps_struct * (1.0 + abs(x)):
            continue
        out.append(x)
    return out


def align(f: PiecewisePoly, g: PiecewisePoly) -> Tuple[Tuple[float, ...], List[Coeffs], List[Coeffs]]:
    """Common breakpoints of f and g with the pieces of each on every interval."""
    xs = merge_points(list(f.breakpoints) + list(g.breakpoints))
    bounds = [-math.inf] + xs + [math.inf]
    p, q = [], []
    for lo, hi in zip(bounds, bounds[1:]):
        p.append(_piece_at(f, lo, hi))
        q.append(_piece_at(g, lo, hi))
    return tuple(xs), p, q


def real_roots(a: float, b: float, c: float) -> List[float]:
    """Simple real roots of a*k**2 + b*k + c; tangential double roots are skipped."""
    if a == 0.0:
        if b == 0.0:
            return []
        return [-c / b]
    disc = b * b - 4.0 * a * c
    if disc <= 1e-24 * max(b * b, abs(4.0 * a * c), 1e-300):
        return []
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    roots = [q / a]
    if q != 0.0:
        roots.append(c / q)
    return sorted(roots)


def _interior_points(lo: float, hi: float) -> Tuple[float, float]:
    # two interior points; a tangential touch can hide at most one of them
    if math.isinf(lo) and math.isinf(hi):
        return -1.0, 1.0
    if math.isinf(lo):
        return hi - 1.0 - abs(hi), hi - 2.0 - 2.0 * abs(hi)
    if math.isinf(hi):
        return lo + 1.0 + abs(lo), lo + 2.0 + 2.0 * abs(lo)
    third = (hi - lo) / 3.0
    return lo + third, hi - third


def _crossings(d: Coeffs, fp: Coeffs, lo: float, hi: float) -> List[float]:
    """Roots of d inside (lo, hi), less those that sit on a bound up to rounding.

    Moving a root r onto its nearest bound changes the minimum by at most
    |d'(r)| * distance; below structural noise the extra breakpoint is dropped.
    """
    out = []
    for r in real_roots(*d):
        if not lo < r < hi:
            continue
        slope = abs(2.0 * d[0] * r + d[1])
        height = abs((fp[0] * r + fp[1]) * r + fp[2])
        if slope * min(r - lo, hi - r) <= settings.eps_struct * (1.0 + height + abs(r)):
            continue
        out.append(r)
    return out


def minimum(f: PiecewisePoly, g: PiecewisePoly) -> PiecewisePoly:
    """Pointwise minimum, split at the crossings of f and g."""
    xs, p, q = align(f, g)
    bounds = [-math.inf] + list(xs) + [math.inf]
    out_x: List[float] = []
    out_p: List[Coeffs] = []
    for i, (lo, hi) in enumerate(zip(bounds, bounds[1:])):
        fp, gp = p[i], q[i]
        d = (fp[0] - gp[0], fp[1] - gp[1], fp[2] - gp[2])
        cuts = _crossings(d, fp, lo, hi)
        sub = [lo] + cuts + [hi]
        for j, (s, t) in enumerate(zip(sub, sub[1:])):
            dv = max(((d[0] * k + d[1]) * k + d[2] for k in _interior_points(s, t)), key=abs)
            if not (i == 0 and j == 0):
                out_x.append(s)
            out_p.append(fp if dv <= 0 else gp)
    return PiecewisePoly(tuple(out_x), tuple(out_p)).simplify()


def sample_grid(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(n + 1)


def breakpoint_union(functions: Sequence[PiecewisePoly]) -> List[float]:
    return merge_points(x for f in functions for x in f.breakpoints)
