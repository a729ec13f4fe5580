"""Shadow measures, potentials and shadow couplings of finite measures on the real line."""
from .measure import Measure, make_measure
from .potential import call_potential, put_potential, u_potential
from .shadow import counter_shadow, shadow

__all__ = [
    "Measure",
    "make_measure",
    "put_potential",
    "call_potential",
    "u_potential",
    "shadow",
    "counter_shadow",
]
