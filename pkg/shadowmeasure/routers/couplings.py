from fastapi import APIRouter

from .. import coupling, schemas
from . import domain_errors

router = APIRouter(tags=["Couplings"])


@router.post("/couple", response_model=schemas.CouplingSchema)
def couple(body: schemas.CoupleRequest):
    with domain_errors():
        c = coupling.build(body.scheme, body.mu.to_measure(), body.nu.to_measure(), body.discretize)
    return schemas.CouplingSchema.from_coupling(c)


@router.post("/verify", response_model=schemas.OrderReport)
def verify(body: schemas.VerifyRequest):
    with domain_errors():
        return coupling.verify_coupling(
            body.coupling.to_coupling(), body.mu.to_measure(), body.nu.to_measure()
        )


@router.post("/cost", response_model=schemas.CostResponse)
def cost(body: schemas.CostRequest):
    with domain_errors():
        value = coupling.expected_cost(body.coupling.to_coupling(), body.h)
    return schemas.CostResponse(h=body.h, value=value)
