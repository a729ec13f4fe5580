import numpy as np
import pytest

from shadowmeasure.errors import NotExtendedOrder, PreconditionFailed
from shadowmeasure.measure import Measure, add, atomic, restrict, scale, subtract, support
from shadowmeasure.orders import leq_convex, leq_setwise
from shadowmeasure.potential import potential_distance, put_potential
from shadowmeasure.shadow import (
    check_associativity,
    check_shadow_of_shadow,
    counter_shadow,
    counter_shadow_potential_pair,
    counter_shadow_quantile,
    is_feasible,
    lemma_order_witnesses,
    shadow,
    shadow_potential_pair,
    theta,
)

from conftest import THIRD, random_pair

TOL_ENDPOINT = 1e-8
TOL_POTENTIAL = 1e-8
TOL_ATOM = 1e-12
GRID = np.linspace(-7.0, 7.0, 281)


def pieces_of(nu, *intervals):
    out = Measure()
    for lo, hi in intervals:
        out = add(out, restrict(nu, lo, hi))
    return out


@pytest.fixture
def three_atom_pair(three_atoms):
    return atomic([(-1.0, THIRD), (1.0, THIRD)]), three_atoms


class TestShadow:
    def test_curtain_slice(self, mu_hat, nu_uniform):
        eta = shadow(restrict(mu_hat, -1.0, 0.6), nu_uniform)
        assert eta.mass == pytest.approx(0.6, abs=1e-12)
        assert not eta.atoms
        assert len(eta.segments) == 2
        assert (eta.segments[0].a, eta.segments[0].b) == pytest.approx((-1.75, 0.25), abs=TOL_ENDPOINT)
        assert (eta.segments[1].a, eta.segments[1].b) == pytest.approx((0.35, 0.75), abs=TOL_ENDPOINT)
        expected = pieces_of(nu_uniform, (-1.75, 0.25), (0.35, 0.75))
        assert potential_distance(eta, expected) <= TOL_POTENTIAL

    def test_middle_slice(self, mu_hat, nu_uniform):
        eta = shadow(restrict(mu_hat, -0.9, 0.9), nu_uniform)
        assert support(eta) == pytest.approx((-1.6, 1.6), abs=TOL_ENDPOINT)
        assert potential_distance(eta, restrict(nu_uniform, -1.6, 1.6)) <= TOL_POTENTIAL

    def test_middle_source_is_a_shadow(self, mu_hat):
        prefix = shadow(atomic([(0.0, 0.8)]), mu_hat)
        assert potential_distance(prefix, restrict(mu_hat, -0.9, 0.9)) <= TOL_POTENTIAL

    def test_small_sunset_slice_is_fixed(self, mu_hat, nu_uniform):
        slice_ = scale(mu_hat, 0.25)
        eta = shadow(slice_, nu_uniform)
        assert leq_setwise(eta, slice_).holds and leq_setwise(slice_, eta).holds

    def test_half_sunset_slice(self, mu_hat, nu_uniform):
        eta = shadow(scale(mu_hat, 0.5), nu_uniform)
        assert len(eta.segments) == 2
        assert (eta.segments[0].a, eta.segments[0].b) == pytest.approx((-1.25, -0.25), abs=TOL_ENDPOINT)
        assert (eta.segments[1].a, eta.segments[1].b) == pytest.approx((0.25, 1.25), abs=TOL_ENDPOINT)

    def test_point_into_spread(self):
        eta = shadow(atomic([(0.0, THIRD)]), atomic([(-2.0, THIRD), (2.0, THIRD)]))
        assert [a.x for a in eta.atoms] == pytest.approx([-2.0, 2.0], abs=TOL_ATOM)
        assert [a.w for a in eta.atoms] == pytest.approx([THIRD / 2, THIRD / 2], abs=TOL_ATOM)

    def test_zero(self, nu_uniform):
        assert shadow(Measure(), nu_uniform).is_zero

    def test_equal_mass_gives_target(self, two_atoms, three_atoms):
        assert shadow(two_atoms, three_atoms) == three_atoms

    def test_not_extended(self, mu_hat, nu_uniform):
        with pytest.raises(NotExtendedOrder):
            shadow(nu_uniform, scale(mu_hat, 0.5))

    def test_potential_pair(self, mu_hat, nu_uniform):
        diff, hull = shadow_potential_pair(restrict(mu_hat, -1.0, 0.6), nu_uniform)
        assert np.all(hull.sample(GRID) <= diff.sample(GRID) + 1e-10)

    def test_random_feasible(self, rng):
        for _ in range(30):
            mu, nu = random_pair(rng)
            eta = shadow(mu, nu)
            assert eta.mass == pytest.approx(mu.mass, abs=1e-10)
            assert is_feasible(eta, mu, nu).holds

    def test_setwise_below_is_fixed(self, rng):
        for _ in range(10):
            _, nu = random_pair(rng)
            part = scale(nu, float(rng.uniform(0.1, 0.9)))
            assert potential_distance(shadow(part, nu), part) <= TOL_POTENTIAL


class TestCounterShadow:
    def test_three_atoms(self, three_atom_pair):
        t = counter_shadow(*three_atom_pair)
        assert not t.segments
        assert [a.x for a in t.atoms] == pytest.approx([-2.0, 2.0], abs=TOL_ATOM)
        assert [a.w for a in t.atoms] == pytest.approx([THIRD, THIRD], abs=TOL_ATOM)

    def test_three_atoms_quantile(self, three_atom_pair):
        t = counter_shadow_quantile(*three_atom_pair)
        assert [a.x for a in t.atoms] == [-2.0, 2.0]
        assert [a.w for a in t.atoms] == pytest.approx([THIRD, THIRD], abs=TOL_ATOM)

    def test_theta_at_solution(self, three_atom_pair):
        mu, nu = three_atom_pair
        t = theta(mu, nu, THIRD)
        assert t.mean == pytest.approx(0.0, abs=TOL_ATOM)
        assert t.mass == pytest.approx(2 * THIRD)

    def test_leftover_is_not_enough(self, two_atoms, three_atom_pair):
        mu1, nu = three_atom_pair
        leftover = subtract(nu, counter_shadow(mu1, nu))
        rest = subtract(two_atoms, mu1)
        assert not leq_convex(rest, leftover).holds
        assert leq_convex(leftover, rest).holds

    def test_equal_mass_gives_target(self, two_atoms, three_atoms):
        assert counter_shadow(two_atoms, three_atoms) == three_atoms
        assert counter_shadow_quantile(two_atoms, three_atoms) == three_atoms

    def test_half_uniform(self, nu_uniform):
        mu = scale(nu_uniform, 0.5)
        assert potential_distance(counter_shadow(mu, nu_uniform),
                                  counter_shadow_quantile(mu, nu_uniform)) <= TOL_POTENTIAL

    def test_potential_pair(self, three_atom_pair):
        low, hull = counter_shadow_potential_pair(*three_atom_pair)
        assert np.all(hull.sample(GRID) <= low.sample(GRID) + 1e-10)

    @pytest.mark.parametrize("atomic_only", [True, False])
    def test_constructions_agree(self, rng, atomic_only):
        for _ in range(20):
            mu, nu = random_pair(rng, atomic_only=atomic_only)
            by_hull = counter_shadow(mu, nu)
            by_quantile = counter_shadow_quantile(mu, nu)
            assert potential_distance(by_hull, by_quantile) <= TOL_POTENTIAL

    def test_random_feasible(self, rng):
        for _ in range(30):
            mu, nu = random_pair(rng)
            assert is_feasible(counter_shadow(mu, nu), mu, nu).holds

    def test_sandwich(self, rng):
        for _ in range(20):
            mu, nu = random_pair(rng)
            s, t = shadow(mu, nu), counter_shadow(mu, nu)
            ps, pt = put_potential(s).sample(GRID), put_potential(t).sample(GRID)
            assert np.all(ps <= pt + 1e-10)
            for lam in (0.25, 0.5, 0.75):
                eta = add(scale(s, lam), scale(t, 1.0 - lam))
                pe = put_potential(eta).sample(GRID)
                assert np.all(ps <= pe + 1e-10) and np.all(pe <= pt + 1e-10)
                assert is_feasible(eta, mu, nu).holds


class TestTargetAtoms:
    """Atoms of a shadow sit on atoms of the target."""

    @staticmethod
    def assert_on_target_atoms(eta, nu):
        xs = np.array([a.x for a in nu.atoms])
        for a in eta.atoms:
            assert xs.size and np.abs(xs - a.x).min() <= 1e-9, (a, nu.atoms)

    def test_random_pairs(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            mu, nu = random_pair(rng)
            for eta in (shadow(mu, nu), counter_shadow(mu, nu)):
                self.assert_on_target_atoms(eta, nu)
                report = is_feasible(eta, mu, nu)
                assert report.holds, report

    def test_diffuse_target_gives_no_atoms(self, rng):
        for _ in range(30):
            mu, nu = random_pair(rng)
            if nu.atoms:
                continue
            assert not shadow(mu, nu).atoms
            assert not counter_shadow(mu, nu).atoms


class TestFeasibility:
    def test_target_too_small(self, mu_hat, nu_uniform):
        report = is_feasible(scale(nu_uniform, 0.5), mu_hat, nu_uniform)
        assert not report.holds
        assert report.detail.startswith("lower-")

    def test_above_target(self, two_atoms):
        nu = atomic([(-1.0, 0.5), (1.0, 0.25)])
        report = is_feasible(two_atoms, two_atoms, nu)
        assert not report.holds
        assert report.detail.startswith("upper-")

    def test_order_witnesses(self, rng):
        for _ in range(20):
            mu, nu = random_pair(rng)
            eta, chi = lemma_order_witnesses(mu, nu)
            assert leq_convex(mu, eta).holds and leq_setwise(eta, nu).holds
            assert leq_setwise(mu, chi).holds and leq_convex(chi, nu).holds


class TestAssociativity:
    def test_curtain_split(self, mu_hat, nu_uniform):
        report = check_associativity(restrict(mu_hat, -1.0, -0.5), restrict(mu_hat, 0.5, 0.6), nu_uniform,
                                     tol=1e-9)
        assert report.holds, report

    def test_empty_second(self, mu_hat, nu_uniform):
        assert check_associativity(restrict(mu_hat, -1.0, 0.6), Measure(), nu_uniform).holds

    def test_random_triples(self, rng):
        for _ in range(20):
            mu, nu = random_pair(rng, atomic_only=True)
            if len(mu.atoms) < 2:
                continue
            cut = len(mu.atoms) // 2
            first, second = Measure(atoms=mu.atoms[:cut]), Measure(atoms=mu.atoms[cut:])
            assert check_associativity(first, second, nu, tol=1e-9).holds
            assert check_associativity(second, first, nu, tol=1e-9).holds


class TestShadowOfShadow:
    def test_self(self, rng):
        for _ in range(10):
            mu, nu = random_pair(rng)
            assert check_shadow_of_shadow(mu, mu, nu).holds

    def test_half(self, rng):
        for _ in range(10):
            mu, nu = random_pair(rng, atomic_only=True)
            assert check_shadow_of_shadow(scale(mu, 0.5), mu, nu).holds

    def test_counterexample(self, three_atoms):
        xi = atomic([(0.0, THIRD)])
        mu = atomic([(-2.0, THIRD), (2.0, THIRD)])
        with pytest.raises(PreconditionFailed):
            check_shadow_of_shadow(xi, mu, three_atoms)
        report = check_shadow_of_shadow(xi, mu, three_atoms, enforce_precondition=False)
        assert not report.holds
        assert report.detail == "shadow-of-shadow"
        assert report.margin < -1e-3
