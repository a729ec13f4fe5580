import math

from fastapi import APIRouter

from .. import schemas
from ..envelope import affine_gaps, contact_intervals
from ..orders import RELATIONS
from ..potential import call_potential, classify, put_potential, u_potential
from ..shadow import shadow_potential_pair
from . import domain_errors

router = APIRouter(tags=["Measures"])

POTENTIALS = {"put": put_potential, "call": call_potential, "u": u_potential}


def _interval(pair):
    return tuple(None if math.isinf(v) else v for v in pair)


@router.post("/potential", response_model=schemas.PotentialResponse)
def potential(body: schemas.PotentialRequest):
    with domain_errors():
        m = body.measure.to_measure()
        f = POTENTIALS[body.kind](m)
    return schemas.PotentialResponse(
        kind=body.kind,
        potential=schemas.PiecewiseSchema.from_poly(f),
        potential_class=schemas.PotentialClassSchema(alpha=m.mass, beta=m.mean),
    )


@router.post("/order", response_model=schemas.OrderReport)
def order(body: schemas.OrderRequest):
    with domain_errors():
        return RELATIONS[body.relation](body.mu.to_measure(), body.nu.to_measure())


@router.post("/hull", response_model=schemas.HullResponse)
def hull(body: schemas.PairRequest):
    with domain_errors():
        diff, h = shadow_potential_pair(body.mu.to_measure(), body.nu.to_measure())
        cls = classify(h)
        return schemas.HullResponse(
            hull=schemas.PiecewiseSchema.from_poly(h),
            potential_class=schemas.PotentialClassSchema(alpha=cls.alpha, beta=cls.beta),
            contact=[_interval(p) for p in contact_intervals(diff, h)],
            gaps=[_interval(p) for p in affine_gaps(diff, h)],
        )
