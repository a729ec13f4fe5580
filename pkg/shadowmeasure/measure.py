"""Finite measures on the real line made of weighted atoms and uniform segments.

Every value is immutable; operations return new canonical measures.
"""
import bisect
import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

from .config import settings
from .errors import (
    EmptyInterval,
    InvalidSegment,
    InvalidWeight,
    NonFinite,
    NotDominated,
    OutOfRange,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Atom:
    x: float
    w: float


@dataclass(frozen=True)
class Segment:
    a: float
    b: float
    w: float

    @property
    def density(self) -> float:
        return self.w / (self.b - self.a)

    @property
    def moment(self) -> float:
        return self.w * (self.a + self.b) / 2.0


@dataclass(frozen=True)
class Measure:
    atoms: Tuple[Atom, ...] = ()
    segments: Tuple[Segment, ...] = ()

    @property
    def mass(self) -> float:
        return math.fsum([a.w for a in self.atoms] + [s.w for s in self.segments])

    @property
    def mean(self) -> float:
        # first moment, not the barycentre
        return math.fsum([a.w * a.x for a in self.atoms] + [s.moment for s in self.segments])

    @property
    def is_zero(self) -> bool:
        return not self.atoms and not self.segments

    @property
    def is_atomic(self) -> bool:
        return not self.segments

    @property
    def reach(self) -> float:
        """Largest |x| in the support (0 for the zero measure)."""
        xs = [abs(a.x) for a in self.atoms]
        xs += [max(abs(s.a), abs(s.b)) for s in self.segments]
        return max(xs, default=0.0)

    def positions(self) -> List[float]:
        pts = {a.x for a in self.atoms}
        for s in self.segments:
            pts.add(s.a)
            pts.add(s.b)
        return sorted(pts)


# --- CONSTRUCTION ---

def _check_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise NonFinite(f"non-finite value {v!r}")


def _build(atoms: Iterable[Tuple[float, float]], segments: Iterable[Tuple[float, float, float]],
           dust: Optional[float] = None) -> Measure:
    """Canonicalise raw (x, w) atoms and (a, b, w) segments.

    Coincident atoms are merged at their joint barycentre, overlapping segments
    are split into elementary intervals with summed density, abutting intervals
    of equal density are merged and entries at or below `dust` are dropped.
    """
    raw_atoms = sorted((float(x), float(w)) for x, w in atoms if w > 0)
    merged: List[List[float]] = []
    for x, w in raw_atoms:
        if merged and abs(x - merged[-1][0]) <= settings.eps_struct * (1.0 + abs(x)):
            px, pw = merged[-1]
            tw = pw + w
            merged[-1] = [(px * pw + x * w) / tw, tw]
        else:
            merged.append([x, w])

    events = {}
    for a, b, w in segments:
        if w <= 0 or not b > a:
            continue
        d = w / (b - a)
        da, ca = events.get(a, (0.0, 0))
        events[a] = (da + d, ca + 1)
        db, cb = events.get(b, (0.0, 0))
        events[b] = (db - d, cb - 1)

    pieces: List[List[float]] = []
    density, active = 0.0, 0
    points = sorted(events)
    for p, q in zip(points, points[1:]):
        dd, dc = events[p]
        active += dc
        density = density + dd if active > 0 else 0.0
        if density <= 0.0:
            continue
        if pieces and pieces[-1][1] == p:
            prev_d = pieces[-1][2] / (pieces[-1][1] - pieces[-1][0])
            if abs(prev_d - density) <= settings.eps_clean * max(prev_d, density):
                pieces[-1][1] = q
                pieces[-1][2] += density * (q - p)
                continue
        pieces.append([p, q, density * (q - p)])

    if dust is None:
        total = sum(w for _, w in merged) + sum(w for _, _, w in pieces)
        dust = settings.eps_struct * max(1.0, total)
    return Measure(
        atoms=tuple(Atom(x, w) for x, w in merged if w > dust),
        segments=tuple(Segment(a, b, w) for a, b, w in pieces if w > dust),
    )


def make_measure(atoms: Iterable = (), segments: Iterable = ()) -> Measure:
    """Validate user input and return the canonical measure."""
    clean_atoms, clean_segments = [], []
    for x, w in atoms:
        x, w = float(x), float(w)
        _check_finite(x, w)
        if w <= 0:
            raise InvalidWeight(f"atom at {x} has weight {w}", witness=x)
        clean_atoms.append((x, w))
    for a, b, w in segments:
        a, b, w = float(a), float(b), float(w)
        _check_finite(a, b, w)
        if not a < b:
            raise InvalidSegment(f"segment [{a}, {b}] is empty", witness=a)
        if w <= 0:
            raise InvalidWeight(f"segment [{a}, {b}] has weight {w}", witness=a)
        clean_segments.append((a, b, w))
    return _build(clean_atoms, clean_segments, dust=0.0)


def decompose(m: Measure) -> Tuple[List[Tuple[float, float]], List[Tuple[float, float, float]]]:
    return [(a.x, a.w) for a in m.atoms], [(s.a, s.b, s.w) for s in m.segments]


def atomic(points: Iterable[Tuple[float, float]]) -> Measure:
    return make_measure(points, ())


def uniform(a: float, b: float, w: float = 1.0) -> Measure:
    return make_measure((), [(a, b, w)])


# --- SUMMARIES ---

def mass(m: Measure) -> float:
    return m.mass


def mean(m: Measure) -> float:
    return m.mean


def barycentre(m: Measure) -> Optional[float]:
    total = m.mass
    if total <= 0:
        return None
    return m.mean / total


def support(m: Measure) -> Optional[Tuple[float, float]]:
    """Endpoints (ℓ, r) of the smallest interval containing the support."""
    if m.is_zero:
        return None
    lo = [a.x for a in m.atoms] + [s.a for s in m.segments]
    hi = [a.x for a in m.atoms] + [s.b for s in m.segments]
    return min(lo), max(hi)


def cdf(m: Measure, k: float, strict: bool = False) -> float:
    """m((-inf, k]) or, with strict, m((-inf, k))."""
    parts = [a.w for a in m.atoms if (a.x < k if strict else a.x <= k)]
    for s in m.segments:
        if k >= s.b:
            parts.append(s.w)
        elif k > s.a:
            parts.append(s.density * (k - s.a))
    return math.fsum(parts)


def density_at(m: Measure, k: float) -> float:
    starts = [s.a for s in m.segments]
    i = bisect.bisect_right(starts, k) - 1
    if i >= 0 and m.segments[i].a <= k < m.segments[i].b:
        return m.segments[i].density
    return 0.0


# --- STRUCTURAL OPERATIONS ---

def restrict(m: Measure, a: float, b: float, left_closed: bool = True,
             right_closed: bool = True) -> Measure:
    """Restriction of m to the interval between a and b (closed by default)."""
    if math.isnan(a) or math.isnan(b):
        raise NonFinite("restriction bounds must not be NaN")
    if a > b:
        raise EmptyInterval(f"empty interval [{a}, {b}]", witness=a)

    def inside(x: float) -> bool:
        above = x > a or (left_closed and x == a)
        below = x < b or (right_closed and x == b)
        return above and below

    atoms = [(p.x, p.w) for p in m.atoms if inside(p.x)]
    segments = []
    for s in m.segments:
        lo, hi = max(s.a, a), min(s.b, b)
        if hi > lo:
            segments.append((lo, hi, s.density * (hi - lo)))
    return _build(atoms, segments, dust=0.0)


def add(m1: Measure, m2: Measure) -> Measure:
    a1, s1 = decompose(m1)
    a2, s2 = decompose(m2)
    return _build(a1 + a2, s1 + s2, dust=0.0)


def total(measures: Iterable[Measure]) -> Measure:
    atoms, segments = [], []
    for m in measures:
        a, s = decompose(m)
        atoms += a
        segments += s
    return _build(atoms, segments, dust=0.0)


def scale(m: Measure, u: float) -> Measure:
    _check_finite(u)
    if u < 0:
        raise InvalidWeight(f"scale factor {u} is negative")
    if u == 0:
        return Measure()
    return Measure(
        atoms=tuple(Atom(a.x, a.w * u) for a in m.atoms),
        segments=tuple(Segment(s.a, s.b, s.w * u) for s in m.segments),
    )


def subtract(m1: Measure, m2: Measure, tol: Optional[float] = None) -> Measure:
    """m1 - m2, provided m2 <= m1 setwise up to `tol` (mass units)."""
    if tol is None:
        tol = settings.tol_order * max(1.0, m1.mass)

    remaining = [[a.x, a.w] for a in m1.atoms]
    xs = [a.x for a in m1.atoms]
    for atom in m2.atoms:
        i = bisect.bisect_left(xs, atom.x)
        hit = None
        for j in (i - 1, i):
            if 0 <= j < len(xs) and abs(xs[j] - atom.x) <= settings.eps_struct * (1.0 + abs(atom.x)):
                hit = j
        if hit is None:
            if atom.w > tol:
                raise NotDominated(f"atom at {atom.x} not present in the larger measure",
                                   witness=atom.x)
            continue
        remaining[hit][1] -= atom.w
        if remaining[hit][1] < -tol:
            raise NotDominated(f"atom at {atom.x} exceeds the larger measure", witness=atom.x)

    points = sorted({p for s in m1.segments + m2.segments for p in (s.a, s.b)})
    segments = []
    for p, q in zip(points, points[1:]):
        mid = 0.5 * (p + q)
        d1, d2 = density_at(m1, mid), density_at(m2, mid)
        diff = d1 - d2
        if abs(diff) <= settings.eps_clean * max(d1, d2):
            continue
        if diff < 0:
            if -diff * (q - p) > tol:
                raise NotDominated(f"density exceeds the larger measure near {mid}", witness=mid)
            continue
        segments.append((p, q, diff * (q - p)))

    dust = 10.0 * settings.eps_struct * max(1.0, m1.mass)
    return _build([(x, w) for x, w in remaining], segments, dust=dust)


# --- QUANTILES ---

def _ordered_pieces(m: Measure) -> List[tuple]:
    """Atoms and segment pieces in increasing position.

    Segments are split at interior atoms; an atom sitting on a segment
    endpoint comes after the mass to its left.
    """
    out: List[tuple] = []
    atoms = m.atoms
    i = 0
    for s in m.segments:
        while i < len(atoms) and atoms[i].x <= s.a:
            out.append(("atom", atoms[i].x, atoms[i].w))
            i += 1
        d, start = s.density, s.a
        while i < len(atoms) and atoms[i].x < s.b:
            x = atoms[i].x
            if x > start:
                out.append(("seg", start, x, d * (x - start)))
            out.append(("atom", x, atoms[i].w))
            start = x
            i += 1
        if s.b > start:
            out.append(("seg", start, s.b, d * (s.b - start)))
    for atom in atoms[i:]:
        out.append(("atom", atom.x, atom.w))
    return out


def _check_level(m: Measure, zeta: float) -> Tuple[float, float]:
    total = m.mass
    if total <= 0:
        raise OutOfRange("quantile of the zero measure")
    _check_finite(zeta)
    slack = settings.eps_struct * max(1.0, total)
    if zeta < -slack or zeta > total + slack:
        raise OutOfRange(f"level {zeta} outside [0, {total}]", witness=zeta)
    return min(max(zeta, 0.0), total), total


def quantile(m: Measure, zeta: float) -> float:
    """Left-continuous inverse of the CDF: inf{k : m((-inf, k]) >= zeta}."""
    zeta, _ = _check_level(m, zeta)
    cum = 0.0
    last = None
    for piece in _ordered_pieces(m):
        if piece[0] == "atom":
            _, x, w = piece
            cum += w
            last = x
            if cum >= zeta:
                return x
        else:
            _, a, b, w = piece
            last = b
            if cum + w >= zeta:
                return min(max(a + (zeta - cum) * (b - a) / w, a), b)
            cum += w
    return last


def quantile_slice(m: Measure, z0: float, z1: float) -> Measure:
    """The part of m lying between quantile levels z0 <= z1."""
    z0, _ = _check_level(m, z0)
    z1, _ = _check_level(m, z1)
    if z1 < z0:
        raise OutOfRange(f"levels out of order: {z0} > {z1}", witness=z1)
    atoms, segments = [], []
    cum = 0.0
    for piece in _ordered_pieces(m):
        w = piece[-1]
        lo, hi = max(z0, cum), min(z1, cum + w)
        if hi > lo:
            if piece[0] == "atom":
                atoms.append((piece[1], hi - lo))
            else:
                _, a, b, _ = piece
                left = a + (lo - cum) * (b - a) / w
                right = a + (hi - cum) * (b - a) / w
                left, right = max(left, a), min(right, b)
                if right > left:
                    segments.append((left, right, hi - lo))
        cum += w
        if cum >= z1:
            break
    return _build(atoms, segments, dust=0.0)


def discretize(m: Measure, n: int) -> Measure:
    """Replace each of n equal-mass quantile cells by an atom at its barycentre."""
    if n < 1:
        raise OutOfRange(f"need at least one cell, got {n}")
    total = m.mass
    if total <= 0:
        return Measure()
    step = total / n
    atoms = []
    for k in range(n):
        z1 = total if k == n - 1 else (k + 1) * step
        cell = quantile_slice(m, k * step, z1)
        w = cell.mass
        if w > 0:
            atoms.append((cell.mean / w, w))
    return _build(atoms, (), dust=0.0)
