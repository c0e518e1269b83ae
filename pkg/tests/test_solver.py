import math

import numpy as np
import pytest

from lensfix.algebra import BiPoly, RationalFn
from lensfix.errors import EliminationDegenerate
from lensfix.lens import filament, point_mass, point_mass_ensemble, raw_model
from lensfix.oracle import match_images, multistart_newton_real
from lensfix.solver import (
    SolveOptions,
    backward_residual,
    count_real_images,
    fixed_point_system,
    solve,
    solve_fixed_points,
)

from conftest import builtin_models, identity_model

z1, z2 = BiPoly.z1(), BiPoly.z2()
BINARY = point_mass_ensemble([0.5, 0.5], [-0.5, 0.5])


# -- the polynomial system ---------------------------------------------------------


def test_system_point_mass():
    p1, p2 = fixed_point_system(point_mass(1.0), 0.5)
    assert p1.allclose((z1 - 0.5) * z2 - 1)
    assert p2.allclose((z2 - 0.5) * z1 - 1)


def test_system_filament():
    p1, p2 = fixed_point_system(filament(0.125), 2.0)
    assert p1.allclose((z1 - 2) * (z1 + z2) + 0.5)
    assert p2.allclose((z2 - 2) * (z1 + z2) + 0.5)


def test_system_identity():
    p1, p2 = fixed_point_system(identity_model(), 0.3 + 0.4j)
    assert p1.allclose(z1 - (0.3 + 0.4j))
    pts = solve_fixed_points(identity_model(), 0.3 + 0.4j)
    assert len(pts) == 1
    assert pts[0].z1 == pytest.approx(0.3 + 0.4j)
    assert pts[0].z2 == pytest.approx(0.3 - 0.4j)
    assert pts[0].is_real


# -- worked examples -----------------------------------------------------------------


def test_point_mass_example():
    pts = solve_fixed_points(point_mass(1.0), 0.5)
    assert len(pts) == 2
    assert all(p.is_real and p.converged and not p.degenerate for p in pts)
    xs = [p.z1 for p in pts]
    assert xs[0] == pytest.approx((0.5 - math.sqrt(4.25)) / 2, abs=1e-12)
    assert xs[1] == pytest.approx((0.5 + math.sqrt(4.25)) / 2, abs=1e-12)
    for p in pts:
        assert p.z2 == pytest.approx(p.z1, abs=1e-12)


def test_filament_example():
    pts = solve_fixed_points(filament(0.125), 2.0)
    assert [p.is_real for p in pts] == [True, True]
    assert pts[0].z1.real == pytest.approx(0.1339745962, abs=1e-10)
    assert pts[1].z1.real == pytest.approx(1.8660254038, abs=1e-10)
    assert count_real_images(filament(0.125), 2.0) == 2


def test_filament_inside_strip():
    pts = solve_fixed_points(filament(0.125), 0.5)
    assert count_real_images(filament(0.125), 0.5) == 0
    assert len(pts) == 2
    assert not any(p.is_real for p in pts)


def test_binary_inside_caustic():
    pts = solve_fixed_points(BINARY, 0.05)
    assert len(pts) == 5
    assert all(p.is_real for p in pts)
    assert count_real_images(BINARY, 0.05) == 5


def test_binary_outside_caustic():
    pts = solve_fixed_points(BINARY, 2.0)
    assert len(pts) == 5
    real = [p for p in pts if p.is_real]
    spurious = [p for p in pts if not p.is_real]
    assert len(real) == 3 and len(spurious) == 2
    a, b = spurious
    # the spurious pair is swapped by (z1, z2) -> (conj z2, conj z1)
    assert (a.z1, a.z2) == pytest.approx((b.z2.conjugate(), b.z1.conjugate()), abs=1e-10)


# -- invariants -------------------------------------------------------------------------


def _sources(n, seed=3):
    rng = np.random.default_rng(seed)
    return [complex(*rng.uniform(-1.5, 1.5, 2)) for _ in range(n)]


def test_residuals_and_pole_exclusion(model):
    opts = SolveOptions()
    for zeta in _sources(20):
        for p in solve_fixed_points(model, zeta, opts):
            assert p.converged and p.residual <= opts.residual_tol
            assert backward_residual(model.alpha1.den, p.z1, p.z2) >= opts.pole_tol
            assert backward_residual(model.alpha2.den, p.z1, p.z2) >= opts.pole_tol


def test_conjugation_closure(model):
    for zeta in _sources(20):
        pts = solve_fixed_points(model, zeta)
        for p in pts:
            img = (p.z2.conjugate(), p.z1.conjugate())
            gap = min(max(abs(img[0] - q.z1), abs(img[1] - q.z2)) for q in pts)
            assert gap < 1e-8 * (1 + abs(p.z1) + abs(p.z2))
            if p.is_real:
                assert abs(img[0] - p.z1) < 1e-8 * (1 + abs(p.z1))


def test_total_count_stable(model):
    """No fixed point escapes to infinity: the count is constant over generic sources."""
    counts = {len(solve_fixed_points(model, z)) for z in _sources(30)}
    assert len(counts) == 1
    for zeta in _sources(10):
        assert solve(model, zeta).leading_ratio > 1e-8


def test_sorted_and_deterministic(model):
    for zeta in _sources(5):
        a = solve_fixed_points(model, zeta)
        b = solve_fixed_points(model, zeta)
        assert a == b
        keys = [(p.z1.real, p.z1.imag) for p in a]
        assert keys == sorted(keys)


def test_completeness_against_multistart(model):
    for zeta in _sources(20, seed=11):
        real = [p.z1 for p in solve_fixed_points(model, zeta) if p.is_real]
        orc = multistart_newton_real(model, zeta, n_starts=1024)
        assert match_images(real, orc.images, 1e-6) is not None, zeta


def test_point_mass_centered_source_degenerate():
    with pytest.raises(EliminationDegenerate):
        solve_fixed_points(point_mass(1.0), 0.0)


def test_caustic_points_flagged():
    # x1 = 0.5 is critical for the filament; its source y1 = 0.5 + 0.25/0.5 = 1 lies on the caustic
    pts = solve_fixed_points(filament(0.125), 1.0)
    assert pts and all(p.degenerate for p in pts)


def test_swap_path():
    """A z2-resultant that vanishes identically triggers one retry with the variables swapped."""
    from lensfix.solver import solve_system

    common = z2 - 1
    groups, r, swapped, _ = solve_system(common * (z1 - 2), common * (z1 + z2))
    assert swapped
    assert r.degree >= 1
    with pytest.raises(EliminationDegenerate):
        solve_system(common * (z1 - 2), common * (z1 + z2) * (z1 - 2))


def test_decoupled_system():
    # alpha1 depends on z1 only while alpha2 depends on z2 only
    a1 = RationalFn(BiPoly.constant(1.0), z1 * z1 + 4)
    a2 = RationalFn(BiPoly.constant(1.0), z2 * z2 + 4)
    model = raw_model(a1, a2)
    sol = solve(model, 0.3 + 0.1j)
    for p in sol.points:
        assert abs(p.z1 - (0.3 + 0.1j) - a1(p.z1, p.z2)) < 1e-10
    assert len(sol.points) == 9


def test_options_validation():
    with pytest.raises(ValueError):
        SolveOptions(residual_tol=0)
    with pytest.raises(ValueError):
        SolveOptions(max_newton_iter=0)
