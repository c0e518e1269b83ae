"""Independent cross-checks for the fixed-point solver.

Nothing here goes through the resultant pipeline: images are found by Newton
iteration on the real lens equation from many starting points, or from closed
forms, and the potential-based checks use plain finite differences.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .caustics import Window
from .errors import CenteredSource, LensfixError
from .lefschetz import jacobian_identity_residual, summarize
from .lens import (
    DeflectionModel,
    SourcePos,
    _as_zeta,
    det_real_jacobian,
    deflection_potential,
    fermat_potential,
    lens_map_real,
    surface_density,
    validate,
)
from .solver import SolveOptions, solve_fixed_points

#: fixed seed so oracle runs are reproducible
ORACLE_SEED = 20070516
ORACLE_DEDUP = 1e-7
ORACLE_RESIDUAL = 1e-10


@dataclass
class OracleResult:
    images: list
    mus: list
    source: SourcePos
    method: str


def default_search_window(zeta: complex) -> Window:
    half = max(5.0, abs(zeta) + 3.0)
    return Window(0j, half, half, 64, 64)


def multistart_newton_real(
    model: DeflectionModel,
    zeta,
    search_window: Window | None = None,
    n_starts: int = 1024,
    seed: int = ORACLE_SEED,
    max_iter: int = 80,
) -> OracleResult:
    """Images from damped Newton on ``eta(z) = zeta`` over a jittered grid of starts.

    Jacobians are central differences of the lens map. Starts that diverge or
    land on poles are discarded, so images can be missed but never invented.
    """
    if n_starts < 64:
        raise ValueError("need at least 64 starts")
    zeta = _as_zeta(zeta)
    w = search_window or default_search_window(zeta)
    side = int(math.ceil(math.sqrt(n_starts)))
    rng = np.random.default_rng(seed)
    gx = (np.arange(side) + 0.5) / side
    u, v = np.meshgrid(gx, gx)
    u = (u + rng.uniform(-0.5, 0.5, u.shape) / side).ravel()
    v = (v + rng.uniform(-0.5, 0.5, v.shape) / side).ravel()
    z = (w.center.real + (2 * u - 1) * w.half_width) + 1j * (w.center.imag + (2 * v - 1) * w.half_height)

    def eta(p):
        return lens_map_real(model, p, on_pole="nan")

    with np.errstate(all="ignore"):
        for _ in range(max_iter):
            f = eta(z) - zeta
            h = 1e-7 * (1.0 + np.abs(z))
            d1 = (eta(z + h) - eta(z - h)) / (2 * h)
            d2 = (eta(z + 1j * h) - eta(z - 1j * h)) / (2 * h)
            a, b, c, d = d1.real, d2.real, d1.imag, d2.imag
            det = a * d - b * c
            sx = (d * f.real - b * f.imag) / det
            sy = (a * f.imag - c * f.real) / det
            step = sx + 1j * sy
            big = np.abs(step) > 1.0
            step[big] = step[big] / np.abs(step[big])
            z = z - step
            keep = np.isfinite(z)
            z = z[keep]
        res = np.abs(eta(z) - zeta)
    good = z[np.isfinite(res) & (res < ORACLE_RESIDUAL * (1.0 + np.abs(z)))]
    good = good[np.lexsort((good.imag, good.real))]
    images: list[complex] = []
    for p in good:
        if all(abs(p - q) > ORACLE_DEDUP * (1.0 + abs(q)) for q in images):
            images.append(complex(p))
    mus = [1.0 / det_real_jacobian(model, p) for p in images]
    return OracleResult(images, mus, SourcePos(zeta), "multistart_newton")


def filament_closed_form(sigma0: float, zeta) -> OracleResult:
    """Images ``x1 = (y1 +- sqrt(y1**2 - 8 sigma0)) / 2``, ``x2 = y2``."""
    zeta = _as_zeta(zeta)
    y1, y2 = zeta.real, zeta.imag
    disc = y1 * y1 - 8.0 * sigma0
    if disc <= 0:
        return OracleResult([], [], SourcePos(zeta), "filament_closed_form")
    big = 0.5 * (y1 + math.copysign(math.sqrt(disc), y1))
    small = 2.0 * sigma0 / big  # product of the roots is 2 sigma0
    xs = sorted([big, small])
    images = [complex(x, y2) for x in xs]
    mus = [x * x / (x * x - 2.0 * sigma0) for x in xs]
    return OracleResult(images, mus, SourcePos(zeta), "filament_closed_form")


def point_mass_closed_form(m: float, zeta) -> OracleResult:
    """Images ``z = zeta (1 +- sqrt(1 + 4m/|zeta|**2)) / 2`` of a point mass at the origin."""
    zeta = _as_zeta(zeta)
    if zeta == 0:
        raise CenteredSource("source behind a point mass forms an Einstein ring")
    r2 = abs(zeta) ** 2
    plus = 0.5 * zeta * (1.0 + math.sqrt(1.0 + 4.0 * m / r2))
    minus = -m * zeta / (zeta.conjugate() * plus)  # z+ z- = -m zeta / conj(zeta)
    images = [plus, minus]
    mus = [1.0 / (1.0 - m * m / abs(z) ** 4) for z in images]
    return OracleResult(images, mus, SourcePos(zeta), "point_mass_closed_form")


# -- finite-difference physics checks --------------------------------------


def fermat_gradient(model: DeflectionModel, x: complex, y, h: float = 1e-5) -> complex:
    """Central-difference gradient of the Fermat potential as ``d/dx1 + i d/dx2``."""
    g1 = (fermat_potential(model, x + h, y) - fermat_potential(model, x - h, y)) / (2 * h)
    g2 = (fermat_potential(model, x + 1j * h, y) - fermat_potential(model, x - 1j * h, y)) / (2 * h)
    return complex(g1, g2)


def laplacian_psi(model: DeflectionModel, x: complex, h: float = 1e-4) -> float:
    """Five-point Laplacian of the deflection potential."""
    c = deflection_potential(model, x)
    s = sum(deflection_potential(model, x + d) for d in (h, -h, 1j * h, -1j * h))
    return float((s - 4 * c) / (h * h))


def poisson_residual(model: DeflectionModel, x: complex, h: float = 1e-4) -> tuple[float, float]:
    """``(-laplacian(psi), -2 sigma)`` at ``x``; the two should agree."""
    return -laplacian_psi(model, x, h), -2.0 * float(surface_density(model, x))


def match_images(a, b, tol: float):
    """Bijective nearest matching of two image lists; ``None`` if impossible within ``tol``."""
    a = list(a)
    b = list(b)
    if len(a) != len(b):
        return None
    pairs = []
    left = list(range(len(b)))
    for i, p in enumerate(a):
        if not left:
            return None
        j = min(left, key=lambda k: abs(b[k] - p))
        if abs(b[j] - p) > tol * (1.0 + abs(p)):
            return None
        pairs.append((i, j))
        left.remove(j)
    return pairs


# -- verification driver ----------------------------------------------------

GENERIC_DET_FLOOR = 1e-6


def generic_sources(model, n: int, seed: int, box: Window | None = None, opts=None, max_tries: int = 1000):
    """``n`` seeded random sources whose fixed points all have ``|det| >= 1e-6``.

    Yields ``(zeta, points)``.
    """
    opts = opts or SolveOptions()
    box = box or Window(0j, 1.5, 1.5, 8, 8)
    rng = np.random.default_rng(seed)
    found = 0
    for _ in range(max_tries):
        if found == n:
            return
        zeta = complex(
            box.center.real + rng.uniform(-box.half_width, box.half_width),
            box.center.imag + rng.uniform(-box.half_height, box.half_height),
        )
        try:
            points = solve_fixed_points(model, zeta, opts)
        except LensfixError:
            continue
        if not points or any(p.degenerate or abs(p.transversal_det) < GENERIC_DET_FLOOR for p in points):
            continue
        found += 1
        yield zeta, points
    if found < n:
        raise RuntimeError(f"could not draw {n} generic sources in {max_tries} tries")


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def verify_model(
    model: DeflectionModel,
    opts=None,
    n_sources: int = 20,
    seed: int = ORACLE_SEED,
    n_starts: int = 4096,
    tol: float = 1e-8,
) -> list[Check]:
    """Run the oracle cross-checks; the list ends at the first failure."""
    opts = opts or SolveOptions()
    checks: list[Check] = []

    def add(name, passed, detail):
        checks.append(Check(name, bool(passed), detail))
        return passed

    report = validate(model)
    for name, ok in (
        ("degree_condition", report.degree_ok),
        ("conjugate_symmetry", report.symmetry_ok),
        ("decay", report.decay_ok),
    ):
        if not add(name, ok, "; ".join(report.diagnostics) or "ok"):
            return checks

    worst_sum = worst_pos = worst_mu = worst_jac = worst_grad = 0.0
    for zeta, points in generic_sources(model, n_sources, seed, opts=opts):
        rep = summarize(model.name, zeta, points, opts)
        worst_sum = max(worst_sum, abs(rep.complex_sum - 1.0))
        if worst_sum >= tol:
            add("lefschetz_sum", False, f"|sum mu - 1| = {worst_sum:.3g} at zeta = {zeta:.6g}")
            return checks
        real = [(fp, mu) for fp, mu in rep.points if fp.is_real]
        orc = multistart_newton_real(model, zeta, n_starts=n_starts)
        pairs = match_images([fp.z1 for fp, _ in real], orc.images, 1e-6)
        if pairs is None:
            add(
                "oracle_images",
                False,
                f"solver found {len(real)} real images, multistart found {len(orc.images)} at zeta = {zeta:.6g}",
            )
            return checks
        for i, j in pairs:
            fp, mu = real[i]
            worst_pos = max(worst_pos, abs(fp.z1 - orc.images[j]))
            worst_mu = max(worst_mu, abs(mu.real - orc.mus[j]) / abs(orc.mus[j]))
            worst_jac = max(worst_jac, jacobian_identity_residual(model, fp) / (1.0 + abs(fp.transversal_det)))
            if model.psi_form is not None:
                worst_grad = max(worst_grad, abs(fermat_gradient(model, fp.z1, zeta)))
        if worst_mu >= 1e-8:
            add("oracle_magnifications", False, f"relative mu gap {worst_mu:.3g} at zeta = {zeta:.6g}")
            return checks
        if worst_jac >= 1e-10:
            add("jacobian_identity", False, f"relative det gap {worst_jac:.3g} at zeta = {zeta:.6g}")
            return checks
        if worst_grad >= 1e-6:
            add("fermat_stationarity", False, f"|grad Phi| = {worst_grad:.3g} at zeta = {zeta:.6g}")
            return checks
    add("lefschetz_sum", True, f"max |sum mu - 1| = {worst_sum:.3g} over {n_sources} sources")
    add("oracle_images", True, f"max position gap {worst_pos:.3g}")
    add("oracle_magnifications", True, f"max relative mu gap {worst_mu:.3g}")
    add("jacobian_identity", True, f"max relative det gap {worst_jac:.3g}")
    if model.psi_form is not None:
        add("fermat_stationarity", True, f"max |grad Phi| = {worst_grad:.3g}")
        rng = np.random.default_rng(seed)
        worst_poisson = 0.0
        for _ in range(50):
            x = complex(*rng.uniform(-2.0, 2.0, 2))
            if abs(x.real) < 0.05 or any(abs(x - c) < 0.05 for c in model.params.get("positions", [])):
                continue
            lhs, rhs = poisson_residual(model, x)
            worst_poisson = max(worst_poisson, abs(lhs - rhs) / max(abs(rhs), 1.0))
        if not add("poisson", worst_poisson < 1e-3, f"max relative residual {worst_poisson:.3g}"):
            return checks

    closed = None
    if model.psi_form == "filament":
        closed = lambda z: filament_closed_form(model.params["sigma0"], z)
    elif model.psi_form == "point_ensemble" and len(model.params["masses"]) == 1:
        m, c = model.params["masses"][0], model.params["positions"][0]

        def closed(z):
            r = point_mass_closed_form(m, z - c)
            return OracleResult([p + c for p in r.images], r.mus, SourcePos(z), r.method)

    if closed is not None:
        worst = 0.0
        for zeta, points in generic_sources(model, n_sources, seed + 1, opts=opts):
            cf = closed(zeta)
            real = [fp.z1 for fp in points if fp.is_real]
            pairs = match_images(real, cf.images, 1e-9)
            if pairs is None:
                add("closed_form", False, f"image mismatch at zeta = {zeta:.6g}")
                return checks
            worst = max(worst, max((abs(real[i] - cf.images[j]) for i, j in pairs), default=0.0))
        add("closed_form", True, f"max position gap {worst:.3g}")
    return checks
