import random

import pytest
from gmpy2 import mpq

from modelsets.cps import generate_pattern
from modelsets.errors import ValidationError
from modelsets.hull import (
    HullPoint,
    act,
    cut_type,
    fiber,
    net_limit_oracle,
    selector,
)
from modelsets.qfield import QF, qv_add, qv_sub

D = 2


def q(a, b=0):
    return QF(a, b, D)


def zero2():
    return (q(0), q(0))


def random_qf(rng, denom=6):
    return QF(
        mpq(rng.randint(-12, 12), rng.randint(1, denom)),
        mpq(rng.randint(-6, 6), rng.randint(1, denom)),
        D,
    )


def nonsingular_w(system, rng):
    while True:
        w = (random_qf(rng), random_qf(rng))
        if not cut_type(system, w):
            return w


@pytest.fixture(scope="module")
def zero_fiber(octagon):
    return fiber(octagon, octagon.torus_zero())


class TestCutType:
    def test_origin_hits_everything(self, octagon):
        assert cut_type(octagon, zero2()) == (0, 1, 2, 3)

    def test_preset_shift_nonsingular(self, octagon):
        assert cut_type(octagon, octagon.shift) == ()

    def test_gamma_star_invariance(self, octagon):
        rng = random.Random(8)
        for _ in range(10):
            w = (random_qf(rng), random_qf(rng))
            m = tuple(rng.randint(-4, 4) for _ in range(4))
            moved = qv_add(w, octagon.scheme.star(m))
            assert cut_type(octagon, w) == cut_type(octagon, moved)

    def test_single_hyperplane_cut(self, octagon):
        # on the x-axis at an irrational height only H1 is hit
        w = (q("1/3"), q(0))
        assert cut_type(octagon, w) == (0,)


class TestFiber:
    def test_nonsingular_single_point(self, octagon):
        z = octagon.torus_from_parts(octagon.shift, zero2())
        points = fiber(octagon, z)
        assert len(points) == 1
        assert points[0].is_nonsingular()

    def test_zero_fiber_eight_points(self, zero_fiber):
        assert len(zero_fiber) == 8
        for p in zero_fiber:
            assert set(p.c) <= {-1, 1}

    def test_fiber_size_matches_subarrangement_chambers(self, octagon):
        # over a point on one singular line the fiber has the two sides
        z = octagon.torus_from_parts((q("1/3"), q(0)), zero2())
        points = fiber(octagon, z)
        assert len(points) == 2
        signs = {p.c[0] for p in points}
        assert signs == {-1, 1}
        assert all(p.c[1:] == (None, None, None) for p in points)

    def test_fibonacci_singular_fiber_two_points(self, fibonacci):
        z = fibonacci.torus_zero()
        points = fiber(fibonacci, z)
        assert len(points) == 2

    def test_fiber_size_equals_restricted_chamber_count(self, octagon):
        from modelsets.arrangement import FaceSemigroup

        rng = random.Random(23)
        samples = [zero2(), (q("1/3"), q(0)), (q("1/2"), q("1/2"))]
        for _ in range(4):
            m = tuple(rng.randint(-3, 3) for _ in range(4))
            samples.append(
                qv_add(octagon.scheme.star(m), (q(0), q(mpq(1, 7))))
            )
        for w in samples:
            z = octagon.torus_from_parts(w, zero2())
            dom = cut_type(octagon, w)
            expected = 1
            if dom:
                sub = FaceSemigroup(
                    [octagon.face_data.normals[i] for i in dom], D
                )
                expected = len(sub.chambers())
            assert len(fiber(octagon, z)) == expected

    def test_invalid_hull_point_rejected(self, octagon):
        z = octagon.torus_from_parts(octagon.shift, zero2())
        with pytest.raises(ValidationError):
            HullPoint(octagon, z, (1, None, None, None))


class TestSelector:
    def test_nonsingular_equals_both_closures(self, octagon):
        rng = random.Random(31)
        for _ in range(3):
            w = nonsingular_w(octagon, rng)
            (p,) = fiber(octagon, octagon.torus_from_parts(w, zero2()))
            sel = selector(p, zero2(), q(4)).positions()
            closed = generate_pattern(
                octagon.scheme, octagon.window, w, zero2(), q(4)
            ).positions()
            opened = generate_pattern(
                octagon.scheme, octagon.window, w, zero2(), q(4), "open"
            ).positions()
            assert sel == closed == opened

    def test_sandwich_property(self, octagon, zero_fiber):
        rng = random.Random(17)
        radius = q(6)
        for p in zero_fiber[:3]:
            sel = selector(p, zero2(), radius).positions()
            opened = generate_pattern(
                octagon.scheme, octagon.window, zero2(), zero2(), radius, "open"
            ).positions()
            closed = generate_pattern(
                octagon.scheme, octagon.window, zero2(), zero2(), radius
            ).positions()
            assert opened <= sel <= closed

    def test_zero_fiber_patterns_distinct_radius_5(self, octagon, zero_fiber):
        seen = set()
        for p in zero_fiber:
            seen.add(selector(p, zero2(), q(5)).positions())
        assert len(seen) == 8

    def test_equivariance_under_lattice_translations(self, octagon, zero_fiber):
        rng = random.Random(2)
        p = zero_fiber[4]
        radius = q(10)
        base = selector(p, zero2(), radius)
        for _ in range(20):
            m = tuple(rng.randint(-2, 2) for _ in range(4))
            g = octagon.lattice_translation(m)
            moved = act(p, g)
            got = selector(moved, zero2(), radius).positions()
            # translating the pattern by -phys(m), restricted to the ball
            shifted = {
                qv_sub(pos, octagon.scheme.phys(m))
                for pos in selector(p, octagon.scheme.phys(m), radius).positions()
            }
            assert got == shifted


class TestAction:
    def test_identity_fixes_everything(self, octagon, zero_fiber):
        e = octagon.identity_element()
        for p in zero_fiber:
            assert act(p, e) == p

    def test_chamber_collapse(self, octagon, zero_fiber):
        for t in octagon.minimal_ideal_types():
            g = octagon.element(octagon.torus_zero(), t)
            images = {act(p, g) for p in zero_fiber}
            assert len(images) == 1
            (img,) = images
            assert img.c == t

    def test_halfline_range_two(self, octagon, zero_fiber):
        halves = [t for t in octagon.semigroup.cones if t.count(0) == 1]
        assert len(halves) == 8
        for t in halves:
            g = octagon.element(octagon.torus_zero(), t)
            images = {act(p, g) for p in zero_fiber}
            assert len(images) == 2
            # the two images sit on opposite sides of the vanished hyperplane
            i = t.index(0)
            assert {img.c[i] for img in images} == {-1, 1}

    def test_action_compatibility_idempotents(self, octagon, zero_fiber):
        # compose applies its right argument first, so acting by h then g is
        # acting by g.compose(h)
        idems = octagon.idempotents_over_zero()
        for p in zero_fiber[:2]:
            for g in idems:
                for h in idems:
                    assert act(act(p, h), g) == act(p, g.compose(h))

    def test_action_compatibility_shifted(self, octagon, zero_fiber):
        rng = random.Random(14)
        idems = octagon.idempotents_over_zero()
        for _ in range(6):
            m = tuple(rng.randint(-3, 3) for _ in range(4))
            s = (q(rng.randint(-2, 2)), q(mpq(rng.randint(-3, 3), 2)))
            z = octagon.torus_from_parts(octagon.scheme.star(m), s)
            g = octagon.element(z, octagon.semigroup.identity)
            h = idems[rng.randrange(len(idems))]
            p = zero_fiber[rng.randrange(8)]
            assert act(act(p, h), g) == act(p, g.compose(h))
            assert act(act(p, g), h) == act(p, h.compose(g))

    def test_pi_equivariance(self, octagon, zero_fiber):
        rng = random.Random(6)
        for _ in range(10):
            m = tuple(rng.randint(-3, 3) for _ in range(4))
            z = octagon.torus_from_parts(
                octagon.scheme.star(m), (q(rng.randint(-2, 2)), q(0))
            )
            g = octagon.element(z, octagon.semigroup.identity)
            p = zero_fiber[rng.randrange(8)]
            assert act(p, g).z == p.z.add(g.z)

    def test_fibonacci_halfline_idempotents_swap_fiber(self, fibonacci):
        z0 = fibonacci.torus_zero()
        left, right = fiber(fibonacci, z0)
        for t, expected in [((1,), 1), ((-1,), -1)]:
            g = fibonacci.element(z0, t)
            images = {act(left, g), act(right, g)}
            assert len(images) == 1
            (img,) = images
            assert img.c == (expected,)


class TestNetLimitOracle:
    def test_identity_returns_selector(self, octagon, zero_fiber):
        e = octagon.identity_element()
        p = zero_fiber[0]
        patch = net_limit_oracle(p, e, q(5))
        assert patch.positions() == selector(p, zero2(), q(5)).positions()

    def test_matches_action_on_samples(self, octagon, zero_fiber):
        idems = octagon.idempotents_over_zero()
        rng = random.Random(10)
        for _ in range(6):
            p = zero_fiber[rng.randrange(8)]
            g = idems[rng.randrange(len(idems))]
            patch = net_limit_oracle(p, g, q(5))
            target = selector(act(p, g), zero2(), q(5))
            assert patch.positions() == target.positions()

    def test_fibonacci_oracle(self, fibonacci):
        z0 = fibonacci.torus_zero()
        pts = fiber(fibonacci, z0)
        D5 = fibonacci.D
        r = QF(8, 0, D5)
        c0 = (QF(0, 0, D5),)
        for t in [(-1,), (1,)]:
            g = fibonacci.element(z0, t)
            for p in pts:
                patch = net_limit_oracle(p, g, r)
                target = selector(act(p, g), c0, r)
                assert patch.positions() == target.positions()

    def test_translation_by_gamma(self, octagon, zero_fiber):
        p = zero_fiber[3]
        g = octagon.lattice_translation((1, 0, -1, 2))
        patch = net_limit_oracle(p, g, q(5))
        target = selector(act(p, g), zero2(), q(5))
        assert patch.positions() == target.positions()
