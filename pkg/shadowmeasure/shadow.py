"""Shadow and counter-shadow of mu in nu.

The shadow is the most concentrated measure eta with mu <=_cx eta <= nu, the
counter-shadow the most dispersed one. Both come out of a convex hull of
potentials; the counter-shadow also has a quantile construction.
"""
import bisect
import logging
import math
from typing import Optional, Tuple

from .config import problem_scale, settings
from .envelope import convex_hull
from .errors import NoConvergence, NotExtendedOrder, PreconditionFailed
from .measure import (
    Measure,
    add,
    atomic,
    cdf,
    quantile,
    restrict,
    scale,
    subtract,
    total,
    _build,
)
from .orders import leq_convex, leq_extended, leq_setwise
from .piecewise import PiecewisePoly, minimum
from .potential import call_potential, measure_from_potential, potential_gap, put_potential
from .schemas import OrderReport

logger = logging.getLogger(__name__)


def _scale(mu: Measure, nu: Measure) -> float:
    return problem_scale(max(mu.mass, nu.mass), max(mu.reach, nu.reach))


def _require_extended(mu: Measure, nu: Measure) -> None:
    report = leq_extended(mu, nu)
    if not report.holds:
        raise NotExtendedOrder(
            f"first measure is not below the second in extended convex order ({report.detail})",
            witness=report.witness,
        )


def _equal_mass(mu: Measure, nu: Measure) -> bool:
    return abs(nu.mass - mu.mass) <= settings.tol_order * max(1.0, nu.mass)


def _on_atom(nu: Measure, x: float) -> bool:
    xs = [a.x for a in nu.atoms]
    i = bisect.bisect_left(xs, x)
    near = 10.0 * settings.eps_struct * (1.0 + abs(x))
    return any(0 <= j < len(xs) and abs(xs[j] - x) <= near for j in (i - 1, i))


def _clean(eta: Measure, mu: Measure, nu: Measure) -> Measure:
    """Drop hull jitter and restore the mass of mu.

    eta lies below nu, so an atom where nu has none is jitter whatever its size.
    """
    dust = settings.eps_clean * max(mu.mass, 1e-300)
    stray = [a for a in eta.atoms if not _on_atom(nu, a.x)]
    if stray:
        heaviest = max(stray, key=lambda a: a.w)
        log = logger.warning if heaviest.w > settings.tol_mart * _scale(mu, nu) else logger.debug
        log("dropped %d atoms off the support atoms of nu, heaviest %.3g at %.17g",
            len(stray), heaviest.w, heaviest.x)
    atoms = [(a.x, a.w) for a in eta.atoms if a.w > dust and _on_atom(nu, a.x)]
    segments = [(s.a, s.b, s.w) for s in eta.segments if s.w > dust]
    dropped = eta.mass - math.fsum([w for _, w in atoms] + [w for _, _, w in segments])
    if dropped > 0:
        logger.debug("dropped %.3g of dust mass from a shadow", dropped)
    out = _build(atoms, segments, dust=0.0)
    if out.mass > 0:
        ratio = mu.mass / out.mass
        if abs(ratio - 1.0) <= 1e-8:
            out = scale(out, ratio)
        else:
            logger.warning("shadow mass %.17g differs from %.17g; left unnormalised", out.mass, mu.mass)
    return out


def shadow_potential_pair(mu: Measure, nu: Measure) -> Tuple[PiecewisePoly, PiecewisePoly]:
    """P_nu - P_mu and its convex hull."""
    diff = put_potential(nu) - put_potential(mu)
    return diff, convex_hull(diff)


def shadow(mu: Measure, nu: Measure) -> Measure:
    """S^nu(mu), from P_S = P_nu - (P_nu - P_mu)^c."""
    if mu.is_zero:
        return Measure()
    _require_extended(mu, nu)
    if _equal_mass(mu, nu):
        return nu
    _, hull = shadow_potential_pair(mu, nu)
    eta = measure_from_potential(put_potential(nu) - hull, tol=settings.tol_order * _scale(mu, nu))
    logger.debug("shadow: mass %.6g of %.6g, %d atoms, %d segments",
                 eta.mass, nu.mass, len(eta.atoms), len(eta.segments))
    return _clean(eta, mu, nu)


def counter_shadow_potential_pair(mu: Measure, nu: Measure) -> Tuple[PiecewisePoly, PiecewisePoly]:
    """min(P_nu, C_nu + mass(mu)*k - mean(mu)) and its convex hull."""
    capped = call_potential(nu).add_affine(mu.mass, -mu.mean)
    low = minimum(put_potential(nu), capped)
    return low, convex_hull(low)


def counter_shadow(mu: Measure, nu: Measure) -> Measure:
    """T^nu(mu), from the hull of min(P_nu, C_nu + mass(mu)*k - mean(mu))."""
    if mu.is_zero:
        return Measure()
    _require_extended(mu, nu)
    if _equal_mass(mu, nu):
        return nu
    _, hull = counter_shadow_potential_pair(mu, nu)
    return _clean(measure_from_potential(hull, tol=settings.tol_order * _scale(mu, nu)), mu, nu)


def theta(mu: Measure, nu: Measure, zeta: float) -> Measure:
    """Lowest zeta of nu's mass plus its top mass(mu) - zeta, split by quantiles."""
    delta = nu.mass - mu.mass
    upper_level = min(zeta + delta, nu.mass)
    g_lo = quantile(nu, zeta)
    g_hi = quantile(nu, upper_level)
    left = restrict(nu, -math.inf, g_lo, right_closed=False)
    right = restrict(nu, g_hi, math.inf, left_closed=False)
    alpha = max(zeta - cdf(nu, g_lo, strict=True), 0.0)
    beta = max(cdf(nu, g_hi) - upper_level, 0.0)
    ends = [(x, w) for x, w in ((g_lo, alpha), (g_hi, beta)) if w > 0.0]
    return add(add(left, right), atomic(ends))


def counter_shadow_quantile(mu: Measure, nu: Measure, tol: Optional[float] = None) -> Measure:
    """T^nu(mu) as theta(zeta*), where mean(theta(zeta*)) = mean(mu), found by bisection."""
    if mu.is_zero:
        return Measure()
    _require_extended(mu, nu)
    if _equal_mass(mu, nu):
        return nu
    if tol is None:
        tol = settings.tol_bisect
    tol *= _scale(mu, nu)

    def gap(z: float) -> float:
        return theta(mu, nu, z).mean - mu.mean

    lo, hi = 0.0, mu.mass
    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo < -tol or g_hi > tol:
        raise NoConvergence(
            f"mean gap is not decreasing through zero on [0, {hi}] ({g_lo:.3g}, {g_hi:.3g})"
        )
    if abs(g_lo) <= tol:
        return _clean(theta(mu, nu, lo), mu, nu)
    if abs(g_hi) <= tol:
        return _clean(theta(mu, nu, hi), mu, nu)
    zeta, g = lo, g_lo
    it = 0
    for it in range(settings.max_bisect_iter):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        zeta, g = mid, gap(mid)
        if abs(g) <= tol:
            break
        if g > 0:
            lo = zeta
        else:
            hi = zeta
    logger.debug("quantile construction: zeta* = %.17g after %d steps, gap %.3g", zeta, it + 1, g)
    if abs(g) > tol:
        raise NoConvergence(f"mean gap {g:.3g} above {tol:.3g}", witness=zeta)
    return _clean(theta(mu, nu, zeta), mu, nu)


def is_feasible(eta: Measure, mu: Measure, nu: Measure) -> OrderReport:
    """eta lies in the feasible set {mu <=_cx eta <= nu}."""
    lower = leq_convex(mu, eta)
    if not lower.holds:
        return OrderReport(holds=False, witness=lower.witness,
                           detail=f"lower-{lower.detail}", margin=lower.margin)
    upper = leq_setwise(eta, nu)
    if not upper.holds:
        return OrderReport(holds=False, witness=upper.witness,
                           detail=f"upper-{upper.detail}", margin=upper.margin)
    margins = [m for m in (lower.margin, upper.margin) if m is not None]
    return OrderReport(holds=True, margin=min(margins) if margins else None)


def _gap_report(lhs: Measure, rhs: Measure, tol: float, detail: str) -> OrderReport:
    gap, where = potential_gap(lhs, rhs)
    margin = tol - gap if math.isfinite(gap) else None
    if gap <= tol:
        return OrderReport(holds=True, margin=margin)
    return OrderReport(holds=False, witness=where, detail=detail, margin=margin)


def check_associativity(mu1: Measure, mu2: Measure, nu: Measure,
                        tol: Optional[float] = None) -> OrderReport:
    """S^nu(mu1 + mu2) against S^nu(mu1) + S^(nu - S^nu(mu1))(mu2)."""
    if tol is None:
        tol = settings.tol_mart * _scale(add(mu1, mu2), nu)
    first = shadow(mu1, nu)
    remainder = subtract(nu, first)
    order = leq_extended(mu2, remainder)
    if not order.holds:
        return OrderReport(holds=False, witness=order.witness, detail="remainder-order",
                           margin=order.margin)
    second = shadow(mu2, remainder)
    return _gap_report(shadow(add(mu1, mu2), nu), add(first, second), tol, "associativity")


def check_shadow_of_shadow(xi: Measure, mu: Measure, nu: Measure, tol: Optional[float] = None,
                           enforce_precondition: bool = True) -> OrderReport:
    """S^(S^nu(mu))(xi) against S^nu(xi), valid when xi <= mu <=_E nu."""
    if tol is None:
        tol = settings.tol_mart * _scale(mu, nu)
    if enforce_precondition:
        below = leq_setwise(xi, mu)
        if not below.holds:
            raise PreconditionFailed("xi is not below mu setwise", witness=below.witness)
        _require_extended(mu, nu)
    inner = shadow(mu, nu)
    return _gap_report(shadow(xi, inner), shadow(xi, nu), tol, "shadow-of-shadow")


def lemma_order_witnesses(mu: Measure, nu: Measure) -> Tuple[Measure, Measure]:
    """(eta, chi) with mu <=_cx eta <= nu and mu <= chi <=_cx nu, for mu <=_E nu."""
    eta = shadow(mu, nu)
    chi = total([subtract(nu, eta), mu])
    return eta, chi
