import math

import numpy as np
import pytest

from lensfix.algebra import BiPoly, RationalFn
from lensfix.errors import CenteredSource
from lensfix.lens import filament, lens_map_real, plummer, point_mass, point_mass_ensemble, raw_model
from lensfix.oracle import (
    fermat_gradient,
    filament_closed_form,
    generic_sources,
    match_images,
    multistart_newton_real,
    point_mass_closed_form,
    verify_model,
)

BINARY = point_mass_ensemble([0.5, 0.5], [-0.5, 0.5])


def test_point_mass_closed_form_examples():
    r = point_mass_closed_form(1.0, 0.5)
    assert sorted(z.real for z in r.images) == pytest.approx([-0.7807764064, 1.2807764064], abs=1e-10)
    assert sum(r.mus) == pytest.approx(1.0, abs=1e-12)
    far = point_mass_closed_form(1.0, 1e4)
    assert far.mus[0] == pytest.approx(1.0, abs=1e-12)
    assert far.mus[1] == pytest.approx(0.0, abs=1e-12)
    rot = point_mass_closed_form(1.0, 0.5j)
    assert [z / 1j for z in rot.images] == pytest.approx(r.images, abs=1e-14)
    with pytest.raises(CenteredSource):
        point_mass_closed_form(1.0, 0.0)


def test_filament_closed_form_examples():
    r = filament_closed_form(0.125, 2.0)
    assert [z.real for z in r.images] == pytest.approx([0.1339745962, 1.8660254038], abs=1e-10)
    assert r.mus == pytest.approx([-0.0773502692, 1.0773502692], abs=1e-10)
    assert sum(r.mus) == pytest.approx(1.0, abs=1e-12)
    assert filament_closed_form(0.125, 0.5).images == []
    assert all(z.imag == 0.7 for z in filament_closed_form(0.125, 1 + 0.7j).images)


def test_closed_forms_solve_the_lens_equation(rng):
    pm, fil = point_mass(1.0), filament(0.125)
    for _ in range(100):
        zeta = complex(*rng.uniform(-3, 3, 2))
        for z in point_mass_closed_form(1.0, zeta).images:
            assert abs(lens_map_real(pm, z) - zeta) < 1e-12 * (1 + abs(zeta))
        for z in filament_closed_form(0.125, zeta).images:
            assert abs(lens_map_real(fil, z) - zeta) < 1e-12 * (1 + abs(zeta))


def test_closed_form_sum_identity(rng):
    n = 0
    while n < 1000:
        zeta = complex(*rng.uniform(-3, 3, 2))
        f = filament_closed_form(0.125, zeta)
        if f.images:
            assert abs(sum(f.mus) - 1) < 1e-12
        assert abs(sum(point_mass_closed_form(1.0, zeta).mus) - 1) < 1e-12
        n += 1


def test_multistart_examples():
    r = multistart_newton_real(point_mass(1.0), 0.5)
    assert sorted(z.real for z in r.images) == pytest.approx([-0.7807764064, 1.2807764064], abs=1e-10)
    r = multistart_newton_real(filament(0.125), 2.0)
    assert sorted(z.real for z in r.images) == pytest.approx([0.1339745962, 1.8660254038], abs=1e-10)
    a = multistart_newton_real(BINARY, 0.05, n_starts=4096)
    b = multistart_newton_real(BINARY, 0.05, n_starts=8192)
    assert len(a.images) == len(b.images) == 5
    assert match_images(a.images, b.images, 1e-9) is not None


def test_multistart_needs_enough_starts():
    with pytest.raises(ValueError):
        multistart_newton_real(point_mass(1.0), 0.5, n_starts=10)


def test_fermat_stationarity_at_oracle_images():
    for model, zeta in ((point_mass(1.0), 0.5), (BINARY, 0.05 + 0.02j), (plummer(1.0, 0.5), 0.2), (filament(0.125), 2 + 0.3j)):
        for z in multistart_newton_real(model, zeta).images:
            assert abs(fermat_gradient(model, z, zeta)) < 1e-6


def test_match_images():
    assert match_images([1, 2], [2.0000001, 1], 1e-6) == [(0, 1), (1, 0)]
    assert match_images([1, 2], [1], 1e-6) is None
    assert match_images([1, 2], [1, 3], 1e-6) is None
    assert match_images([], [], 1e-6) == []


def test_generic_sources_deterministic():
    a = [z for z, _ in generic_sources(BINARY, 5, seed=1)]
    b = [z for z, _ in generic_sources(BINARY, 5, seed=1)]
    assert a == b and len(a) == 5


@pytest.mark.parametrize(
    "model",
    [filament(0.125), point_mass(1.0), plummer(1.0, 0.5), BINARY],
    ids=["filament", "point", "plummer", "binary"],
)
def test_verify_builtins_pass(model):
    checks = verify_model(model, n_sources=5, n_starts=1024)
    assert all(c.passed for c in checks), [c.line() for c in checks]
    names = {c.name for c in checks}
    assert {"lefschetz_sum", "oracle_images", "jacobian_identity", "poisson"} <= names


def test_verify_corrupted_model_fails():
    z1, z2 = BiPoly.z1(), BiPoly.z2()
    broken = raw_model(RationalFn(BiPoly.constant(1.0), z2), RationalFn(BiPoly.constant(1.1), z1))
    checks = verify_model(broken)
    assert not checks[-1].passed
    assert checks[-1].name == "conjugate_symmetry"
    assert checks[-1].line().startswith("FAIL conjugate_symmetry")
