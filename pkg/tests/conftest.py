
import numpy as np
import pytest

from shadowmeasure.measure import Measure, add, atomic, discretize, make_measure, restrict, scale, uniform

THIRD = 1.0 / 3.0


@pytest.fixture
def mu_hat() -> Measure:
    """(U[-1,-0.5] + U[0.5,1]) / 2."""
    return make_measure([], [(-1.0, -0.5, 0.5), (0.5, 1.0, 0.5)])


@pytest.fixture
def nu_uniform() -> Measure:
    return uniform(-2.0, 2.0)


@pytest.fixture
def three_atoms() -> Measure:
    return atomic([(-2.0, THIRD), (0.0, THIRD), (2.0, THIRD)])


@pytest.fixture
def two_atoms() -> Measure:
    return atomic([(-1.0, 0.5), (1.0, 0.5)])


def random_measure(rng: np.random.Generator, reach: float = 5.0, max_atoms: int = 3,
                   max_segments: int = 3) -> Measure:
    n_atoms = int(rng.integers(0, max_atoms + 1))
    n_segments = int(rng.integers(1 if n_atoms == 0 else 0, max_segments + 1))
    atoms = [(float(rng.uniform(-reach, reach)), float(rng.uniform(0.05, 1.0))) for _ in range(n_atoms)]
    segments = []
    for _ in range(n_segments):
        a, b = sorted(rng.uniform(-reach, reach, size=2))
        if b - a < 0.05:
            b = a + 0.05
        segments.append((float(a), float(b), float(rng.uniform(0.05, 1.0))))
    return make_measure(atoms, segments)


def contract(m: Measure, lam: float) -> Measure:
    """Push m forward under x -> c + lam * (x - c), c its barycentre."""
    c = m.mean / m.mass
    atoms = [(c + lam * (p.x - c), p.w) for p in m.atoms]
    segments = []
    for s in m.segments:
        lo, hi = c + lam * (s.a - c), c + lam * (s.b - c)
        if hi - lo > 1e-9:
            segments.append((lo, hi, s.w))
        else:
            atoms.append((0.5 * (lo + hi), s.w))
    return make_measure(atoms, segments)


def random_pair(rng: np.random.Generator, atomic_only: bool = False, reach: float = 5.0,
                mass: float = 1.0):
    """Random (mu, nu) with mu <=_E nu: mu is a contraction of chi <= nu."""
    if atomic_only:
        nu = atomic([(float(x), float(w)) for x, w in zip(
            rng.uniform(-reach, reach, size=int(rng.integers(2, 7))), rng.uniform(0.1, 1.0, size=6))])
    else:
        nu = random_measure(rng, reach=reach)
    nu = scale(nu, mass)
    lo, hi = sorted(rng.uniform(-1.2 * reach, 1.2 * reach, size=2))
    chi = scale(restrict(nu, float(lo), float(hi)), float(rng.uniform(0.3, 1.0)))
    if chi.mass < 1e-3:
        chi = scale(nu, float(rng.uniform(0.3, 1.0)))
    mode = int(rng.integers(0, 3))
    if atomic_only or mode == 1:
        mu = discretize(chi, int(rng.integers(1, 5)))
    elif mode == 0:
        mu = contract(chi, float(rng.uniform(0.0, 1.0)))
    else:
        mu = contract(discretize(chi, int(rng.integers(1, 5))), float(rng.uniform(0.2, 1.0)))
    return mu, nu


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def oracle_grid(f, lo: float, hi: float, step: float) -> np.ndarray:
    """Uniform grid with the breakpoints of f added, so every kink is sampled."""
    return np.union1d(np.arange(lo, hi + step / 2, step), np.asarray(f.breakpoints, dtype=float))


def oracle_bound(f, step: float) -> float:
    """Largest gap between the sampled hull and the exact one on an oracle_grid.

    A sample point within step/2 of a tangency sits at most
    curvature * step**2 / 8 above the tangent line.
    """
    curvature = max(2.0 * a for a, _, _ in f.pieces)
    return max(1e-6, curvature * step * step / 8.0)
