from fastapi import APIRouter

from .. import schemas
from ..shadow import counter_shadow, counter_shadow_quantile, shadow
from . import domain_errors

router = APIRouter(tags=["Shadows"])


@router.post("/shadow", response_model=schemas.MeasureSchema)
def shadow_route(body: schemas.PairRequest):
    with domain_errors():
        result = shadow(body.mu.to_measure(), body.nu.to_measure())
    return schemas.MeasureSchema.from_measure(result)


@router.post("/countershadow", response_model=schemas.MeasureSchema)
def countershadow_route(body: schemas.ShadowRequest):
    build = counter_shadow if body.method == "hull" else counter_shadow_quantile
    with domain_errors():
        result = build(body.mu.to_measure(), body.nu.to_measure())
    return schemas.MeasureSchema.from_measure(result)
