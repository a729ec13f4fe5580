from typing import Optional


class ShadowError(Exception):
    exit_code = 3
    http_status = 500

    def __init__(self, message: str, witness: Optional[float] = None):
        super().__init__(message)
        self.witness = witness


# --- input ---
class InputError(ShadowError):
    exit_code = 2
    http_status = 422


class InvalidWeight(InputError):
    pass


class InvalidSegment(InputError):
    pass


class NonFinite(InputError):
    pass


class EmptyInterval(InputError):
    pass


class OutOfRange(InputError):
    pass


class OutOfChord(InputError):
    pass


class NotAtomic(InputError):
    pass


class UnsupportedCost(InputError):
    pass


class InvalidGrid(InputError):
    pass


class UnknownScheme(InputError):
    pass


# --- relation ---
class RelationError(ShadowError):
    exit_code = 1
    http_status = 409


class NotDominated(RelationError):
    pass


class NotExtendedOrder(RelationError):
    pass


class NotConvexOrder(RelationError):
    pass


class PreconditionFailed(RelationError):
    pass


# --- numeric ---
class NumericError(ShadowError):
    pass


class NotConvex(NumericError):
    pass


class NotPotential(NumericError):
    pass


class UnboundedBelow(NumericError):
    pass


class HullFailure(NumericError):
    pass


class NoConvergence(NumericError):
    pass
