"""Put, call and U potentials of measures, and the inverse map."""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .config import problem_scale, settings
from .errors import NotConvex, NotPotential
from .measure import Measure, _build
from .piecewise import PiecewisePoly

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PotentialClass:
    """Membership (alpha, beta) of a function in D(alpha, beta): f(k) ~ alpha*k - beta at +inf."""
    alpha: float
    beta: float


def put_potential(m: Measure) -> PiecewisePoly:
    """P(k) = integral of (k - x)^+ dm(x), built from coefficient increments."""
    events: Dict[float, List[float]] = {}

    def bump(x: float, da: float, db: float, dc: float, dn: int = 0) -> None:
        e = events.setdefault(x, [0.0, 0.0, 0.0, 0])
        e[0] += da
        e[1] += db
        e[2] += dc
        e[3] += dn

    for atom in m.atoms:
        bump(atom.x, 0.0, atom.w, -atom.w * atom.x)
    for s in m.segments:
        d = s.density
        # on [a, b]: d/2 (k - a)^2 ; past b: w (k - (a+b)/2)
        bump(s.a, 0.5 * d, -d * s.a, 0.5 * d * s.a * s.a, 1)
        bump(s.b, -0.5 * d, d * s.a + s.w, -0.5 * d * s.a * s.a - 0.5 * s.w * (s.a + s.b), -1)

    xs = sorted(events)
    pieces = [(0.0, 0.0, 0.0)]
    a = b = c = 0.0
    active = 0
    for x in xs:
        da, db, dc, dn = events[x]
        active += dn
        a = a + da if active > 0 else 0.0
        b += db
        c += dc
        pieces.append((a, b, c))
    return PiecewisePoly(tuple(xs), tuple(pieces))


def call_potential(m: Measure) -> PiecewisePoly:
    """C(k) = integral of (x - k)^+ dm(x) = P(k) + mean - mass*k."""
    return put_potential(m).add_affine(-m.mass, m.mean)


def u_potential(m: Measure) -> PiecewisePoly:
    """U = -(C + P); concave."""
    return -(put_potential(m).scale(2.0).add_affine(-m.mass, m.mean))


def _scale_of(f: PiecewisePoly) -> float:
    alpha = abs(f.right_tail[1])
    reach = max((abs(x) for x in f.breakpoints), default=0.0)
    return problem_scale(alpha, reach)


def classify(f: PiecewisePoly, tol: Optional[float] = None) -> PotentialClass:
    """Read (alpha, beta) off the tails; the left tail must vanish."""
    if tol is None:
        tol = settings.tol_order * _scale_of(f)
    la, lb, lc = f.left_tail
    if abs(la) > tol or abs(lb) > tol or abs(lc) > tol:
        raise NotPotential(
            f"left tail {f.left_tail} is not identically zero",
            witness=f.breakpoints[0] if f.breakpoints else 0.0,
        )
    ra, rb, rc = f.right_tail
    if abs(ra) > tol:
        raise NotPotential(f"right tail {f.right_tail} is not affine",
                           witness=f.breakpoints[-1] if f.breakpoints else 0.0)
    if rb < -tol:
        raise NotPotential(f"asymptotic slope {rb} is negative",
                           witness=f.breakpoints[-1] if f.breakpoints else 0.0)
    alpha = max(rb, 0.0)
    beta = -rc
    if alpha == 0.0:
        beta = 0.0
    return PotentialClass(alpha, beta)


def measure_from_potential(f: PiecewisePoly, tol: Optional[float] = None) -> Measure:
    """The unique measure whose put potential is f (second distributional derivative)."""
    scale = _scale_of(f)
    if tol is None:
        tol = settings.eps_struct * scale
    classify(f, tol=max(tol, settings.tol_order * scale))
    ok, witness, margin = f.is_convex(tol)
    if not ok:
        raise NotConvex(f"potential is not convex (margin {margin:.3g})", witness=witness)

    atoms: List[Tuple[float, float]] = []
    segments: List[Tuple[float, float, float]] = []
    for i, x in enumerate(f.breakpoints):
        left, right = f.slopes_at(i)
        jump = right - left
        if jump > tol:
            atoms.append((x, jump))
    for i in range(1, len(f.breakpoints)):
        lo, hi = f.interval(i)
        density = 2.0 * f.pieces[i][0]
        if density * (hi - lo) > tol:
            segments.append((lo, hi, density * (hi - lo)))
    return _build(atoms, segments, dust=tol)


def potential_gap(m1: Measure, m2: Measure) -> Tuple[float, float]:
    """sup_k |P_m1(k) - P_m2(k)| and a point where it is reached."""
    diff = put_potential(m1) - put_potential(m2)
    scale = problem_scale(max(m1.mass, m2.mass), max(m1.reach, m2.reach))
    gap, where = diff.argmax_abs(slope_tol=settings.eps_struct * scale)
    if math.isinf(where):
        reach = max(m1.reach, m2.reach)
        where = math.copysign(reach + 1.0, where)
    return gap, where


def potential_distance(m1: Measure, m2: Measure) -> float:
    """sup_k |P_m1(k) - P_m2(k)|; infinite if the masses differ."""
    return potential_gap(m1, m2)[0]


def sup_distance(f: PiecewisePoly, g: PiecewisePoly, slope_tol: float = 0.0) -> float:
    return (f - g).sup_abs(slope_tol=slope_tol)
