"""Setwise, convex and extended convex order between measures.

All three are decided on put/call potentials: a quadratic piece's sign is
fixed by its endpoints and vertex, so finitely many checks suffice.
"""
import logging
import math
from typing import Optional

from .config import problem_scale, settings
from .measure import Measure
from .potential import call_potential, put_potential
from .schemas import OrderReport

logger = logging.getLogger(__name__)


def _scale(m1: Measure, m2: Measure) -> float:
    return problem_scale(max(m1.mass, m2.mass), max(m1.reach, m2.reach))


def _finite(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def _finite_witness(where: float, m1: Measure, m2: Measure) -> float:
    if math.isfinite(where):
        return where
    reach = max(m1.reach, m2.reach)
    return math.copysign(reach + 1.0, where) if not math.isnan(where) else reach + 1.0


def leq_setwise(m1: Measure, m2: Measure, tol: Optional[float] = None) -> OrderReport:
    """m1 <= m2 setwise, i.e. P_m2 - P_m1 is convex."""
    if tol is None:
        tol = settings.tol_order * max(1.0, m1.mass, m2.mass)
    diff = put_potential(m2) - put_potential(m1)
    ok, witness, margin = diff.is_convex(tol)
    if ok:
        return OrderReport(holds=True, detail="ok", margin=margin)
    return OrderReport(holds=False, witness=witness, detail="not-dominated", margin=margin)


def leq_convex(m1: Measure, m2: Measure, tol: Optional[float] = None) -> OrderReport:
    """m1 <=_cx m2: equal mass and mean, P_m1 <= P_m2 everywhere."""
    if tol is None:
        tol = settings.tol_order * _scale(m1, m2)
    far = max(m1.reach, m2.reach) + 1.0
    dmass = m2.mass - m1.mass
    if abs(dmass) > tol:
        return OrderReport(holds=False, witness=far, detail="mass", margin=-abs(dmass))
    dmean = m2.mean - m1.mean
    if abs(dmean) > tol:
        return OrderReport(holds=False, witness=far, detail="mean", margin=-abs(dmean))
    diff = put_potential(m2) - put_potential(m1)
    low, where = diff.infimum(slope_tol=tol)
    if low < -tol:
        return OrderReport(holds=False, witness=_finite_witness(where, m1, m2),
                           detail="put-potential", margin=_finite(low))
    return OrderReport(holds=True, detail="ok", margin=_finite(low))


def leq_extended(m1: Measure, m2: Measure, tol: Optional[float] = None) -> OrderReport:
    """m1 <=_E m2: P_m1 <= P_m2 and C_m1 <= C_m2 everywhere."""
    if tol is None:
        tol = settings.tol_order * _scale(m1, m2)
    put_low, put_at = (put_potential(m2) - put_potential(m1)).infimum(slope_tol=tol)
    if put_low < -tol:
        return OrderReport(holds=False, witness=_finite_witness(put_at, m1, m2),
                           detail="put-potential", margin=_finite(put_low))
    call_low, call_at = (call_potential(m2) - call_potential(m1)).infimum(slope_tol=tol)
    if call_low < -tol:
        return OrderReport(holds=False, witness=_finite_witness(call_at, m1, m2),
                           detail="call-potential", margin=_finite(call_low))
    return OrderReport(holds=True, detail="ok", margin=_finite(min(put_low, call_low)))


RELATIONS = {
    "setwise": leq_setwise,
    "cx": leq_convex,
    "e": leq_extended,
}
