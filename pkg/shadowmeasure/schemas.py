from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, field_validator, model_validator

from . import measure as M
from .piecewise import PiecewisePoly

# --- Measure ---
def _number(v):
    # no coercion from strings or booleans
    if isinstance(v, (str, bool)):
        raise ValueError(f"expected a number, got {v!r}")
    return v

class AtomSchema(BaseModel):
    x: float
    w: float
    class Config:
        extra = "forbid"

    check_numbers = field_validator("x", "w", mode="before")(_number)

class SegmentSchema(BaseModel):
    a: float
    b: float
    w: float
    class Config:
        extra = "forbid"

    check_numbers = field_validator("a", "b", "w", mode="before")(_number)

class MeasureSchema(BaseModel):
    atoms: List[AtomSchema] = []
    segments: List[SegmentSchema] = []
    class Config:
        extra = "forbid"

    def to_measure(self) -> M.Measure:
        return M.make_measure(
            [(p.x, p.w) for p in self.atoms],
            [(s.a, s.b, s.w) for s in self.segments],
        )

    @classmethod
    def from_measure(cls, m: M.Measure) -> "MeasureSchema":
        return cls(
            atoms=[AtomSchema(x=p.x, w=p.w) for p in m.atoms],
            segments=[SegmentSchema(a=s.a, b=s.b, w=s.w) for s in m.segments],
        )

# --- Potentials ---
class PiecewiseSchema(BaseModel):
    breakpoints: List[float]
    pieces: List[Tuple[float, float, float]]

    @classmethod
    def from_poly(cls, f: PiecewisePoly) -> "PiecewiseSchema":
        return cls(breakpoints=list(f.breakpoints), pieces=[tuple(p) for p in f.pieces])

    def to_poly(self) -> PiecewisePoly:
        return PiecewisePoly(tuple(self.breakpoints), tuple(tuple(p) for p in self.pieces))

class PotentialClassSchema(BaseModel):
    alpha: float
    beta: float

class PotentialResponse(BaseModel):
    kind: str
    potential: PiecewiseSchema
    potential_class: PotentialClassSchema

# open ends of an interval are reported as null
Interval = Tuple[Optional[float], Optional[float]]

class HullResponse(BaseModel):
    hull: PiecewiseSchema
    potential_class: PotentialClassSchema
    contact: List[Interval]
    gaps: List[Interval]

# --- Orders ---
class OrderReport(BaseModel):
    holds: bool
    witness: Optional[float] = None
    detail: str = "ok"
    margin: Optional[float] = None

    @model_validator(mode="after")
    def _witness_iff_failure(self):
        if self.holds and self.witness is not None:
            raise ValueError("a report that holds carries no witness")
        if not self.holds and self.witness is None:
            raise ValueError("a failed report needs a witness")
        return self

    def __bool__(self) -> bool:
        return self.holds

# --- Couplings ---
class CouplingRowSchema(BaseModel):
    x: float
    m: float
    target: MeasureSchema
    part: int = 0
    class Config:
        extra = "forbid"

    check_numbers = field_validator("x", "m", mode="before")(_number)

class CouplingSchema(BaseModel):
    rows: List[CouplingRowSchema] = []
    class Config:
        extra = "forbid"

    def to_coupling(self):
        from .coupling import Coupling, CouplingRow

        return Coupling(tuple(
            CouplingRow(r.x, r.m, r.target.to_measure(), r.part) for r in self.rows
        ))

    @classmethod
    def from_coupling(cls, c) -> "CouplingSchema":
        return cls(rows=[
            CouplingRowSchema(x=r.x, m=r.m, target=MeasureSchema.from_measure(r.target), part=r.part)
            for r in c.rows
        ])

# --- Requests ---
class PotentialRequest(BaseModel):
    measure: MeasureSchema
    kind: Literal["put", "call", "u"] = "put"

class PairRequest(BaseModel):
    mu: MeasureSchema
    nu: MeasureSchema

class OrderRequest(PairRequest):
    relation: Literal["cx", "e", "setwise"] = "cx"

class ShadowRequest(PairRequest):
    method: Literal["hull", "quantile"] = "hull"

class CoupleRequest(PairRequest):
    scheme: str = "left-curtain"
    discretize: Optional[int] = None

class VerifyRequest(PairRequest):
    coupling: CouplingSchema

class CostRequest(BaseModel):
    coupling: CouplingSchema
    h: str = "square"

class CostResponse(BaseModel):
    h: str
    value: float
