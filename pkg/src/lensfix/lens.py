"""Lens models as complexified rational deflection maps.

A model stores the deflection angle ``alpha`` twice: ``alpha1(z1, z2)`` is the
complexified ``alpha(z, conj z)`` with ``z1 = z`` and ``z2 = conj z`` promoted to
independent variables, and ``alpha2`` plays the role of ``conj(alpha)``. The
lens equation reads ``zeta = z - alpha(z, conj z)``.

Built-in models::

    point ensemble  alpha = sum_i m_i / (conj z - conj c_i)    psi = sum_i m_i ln|x - c_i|
    Plummer         alpha = theta_E**2 z / (|z|**2 + a**2)      psi = theta_E**2/2 ln(a**2 + |x|**2)
    filament        alpha = -4 sigma0 / (z + conj z)            psi = -2 sigma0 ln|x1|

The surface density follows from ``laplacian(psi) = 2 sigma``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebra import BiPoly, RationalFn, UniPoly
from .errors import (
    DuplicatePosition,
    NonpositiveMass,
    NonpositiveParameter,
    NoPotentialForm,
    PoleEvaluation,
    PotentialSingularity,
    SymmetryViolation,
)

#: relative size of a denominator, against its absolute-value scale, below which a point is a pole
POLE_RTOL = 1e-12
#: allowed imaginary part of det(J) on the real plane, relative to 1 + |det|
DET_IMAG_RTOL = 1e-10

PSI_FORMS = ("point_ensemble", "plummer", "filament")


@dataclass(frozen=True, eq=False)
class DeflectionModel:
    alpha1: RationalFn
    alpha2: RationalFn
    name: str = "raw"
    psi_form: Optional[str] = None
    params: dict = field(default_factory=dict)

    @property
    def conjugate_symmetric_by_construction(self) -> bool:
        return self.psi_form is not None


@dataclass(frozen=True)
class SourcePos:
    zeta: complex

    def __post_init__(self):
        z = complex(self.zeta)
        if not (np.isfinite(z.real) and np.isfinite(z.imag)):
            raise ValueError("source position must be finite")
        object.__setattr__(self, "zeta", z)


@dataclass
class ValidationReport:
    degree_ok: bool
    symmetry_ok: bool
    decay_ok: bool
    diagnostics: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.degree_ok and self.symmetry_ok and self.decay_ok

    def failing(self) -> list[str]:
        names = []
        if not self.degree_ok:
            names.append("degree_condition")
        if not self.symmetry_ok:
            names.append("conjugate_symmetry")
        if not self.decay_ok:
            names.append("decay")
        return names

    def text(self) -> str:
        def flag(b):
            return "PASS" if b else "FAIL"

        lines = [
            f"degree_condition   {flag(self.degree_ok)}",
            f"conjugate_symmetry {flag(self.symmetry_ok)}",
            f"decay              {flag(self.decay_ok)}",
        ]
        lines += [f"  {d}" for d in self.diagnostics]
        return "\n".join(lines)


def _as_zeta(zeta) -> complex:
    if isinstance(zeta, SourcePos):
        return zeta.zeta
    return SourcePos(zeta).zeta


def _symmetric_model(alpha1: RationalFn, name, psi_form, params) -> DeflectionModel:
    return DeflectionModel(alpha1, alpha1.conj_swap(), name, psi_form, params)


# -- constructors -----------------------------------------------------------


def point_mass_ensemble(masses, positions) -> DeflectionModel:
    masses = [float(m) for m in masses]
    positions = [complex(c) for c in positions]
    if not masses or len(masses) != len(positions):
        raise ValueError("need matching, non-empty mass and position lists")
    if any(not m > 0 for m in masses):
        raise NonpositiveMass("point masses must be positive")
    for i, a in enumerate(positions):
        for b in positions[i + 1 :]:
            if a == b:
                raise DuplicatePosition(f"two point masses at {a}")
    # alpha1 = sum m_i / (z2 - conj c_i) over a common denominator
    factors = [UniPoly([-np.conj(c), 1.0]) for c in positions]
    den = UniPoly([1.0])
    for f in factors:
        den = den * f
    num = UniPoly.zero()
    for i, m in enumerate(masses):
        term = UniPoly([m])
        for j, f in enumerate(factors):
            if j != i:
                term = term * f
        num = num + term
    alpha1 = RationalFn(BiPoly.from_z2(num), BiPoly.from_z2(den))
    params = {"masses": masses, "positions": positions}
    return _symmetric_model(alpha1, "point_ensemble", "point_ensemble", params)


def point_mass(m: float = 1.0, position: complex = 0j) -> DeflectionModel:
    return point_mass_ensemble([m], [position])


def plummer(theta_e: float, a: float) -> DeflectionModel:
    if not (theta_e > 0 and a > 0):
        raise NonpositiveParameter("Plummer model needs theta_e > 0 and a > 0")
    t2 = float(theta_e) ** 2
    num = BiPoly.from_terms({(1, 0): t2})
    den = BiPoly.from_terms({(1, 1): 1.0, (0, 0): float(a) ** 2})
    params = {"theta_e": float(theta_e), "a": float(a)}
    return _symmetric_model(RationalFn(num, den), "plummer", "plummer", params)


def filament(sigma0: float) -> DeflectionModel:
    if not sigma0 > 0:
        raise NonpositiveParameter("filament model needs sigma0 > 0")
    num = BiPoly.constant(-4.0 * float(sigma0))
    den = BiPoly.from_terms({(1, 0): 1.0, (0, 1): 1.0})
    return _symmetric_model(RationalFn(num, den), "filament", "filament", {"sigma0": float(sigma0)})


def raw_model(alpha1: RationalFn, alpha2: RationalFn, name: str = "raw") -> DeflectionModel:
    """Model from explicit deflection components; invariants are checked by :func:`validate`."""
    return DeflectionModel(RationalFn(alpha1.num, alpha1.den), RationalFn(alpha2.num, alpha2.den), name)


# -- validation -------------------------------------------------------------


def _not_pole(model, z1, z2):
    ok = np.ones(np.shape(z1), dtype=bool)
    for alpha in (model.alpha1, model.alpha2):
        v = np.abs(alpha.den(z1, z2))
        ok &= v > 1e-6 * alpha.den.abs_eval(z1, z2)
    return ok


def validate(model: DeflectionModel) -> ValidationReport:
    diag = []
    degree_ok = True
    for k, alpha in ((1, model.alpha1), (2, model.alpha2)):
        du, dv = alpha.num.total_degree, alpha.den.total_degree
        if not du < dv:
            degree_ok = False
            diag.append(f"alpha{k}: deg U = {du} is not below deg V = {dv}")

    theta = 2 * np.pi * (np.arange(32) + 0.37) / 32
    z = np.concatenate([0.75 * np.exp(1j * theta), 2.5 * np.exp(1j * theta)])
    zc = np.conj(z)
    keep = _not_pole(model, z, zc)
    z, zc = z[keep], zc[keep]
    a1 = model.alpha1(z, zc)
    a2 = model.alpha2(z, zc)
    err = np.abs(a2 - np.conj(a1))
    bound = 1e-12 * (np.abs(a1) + np.abs(a2)) + 1e-300
    symmetry_ok = bool(np.all(err <= bound))
    if not symmetry_ok:
        worst = int(np.argmax(err - bound))
        diag.append(f"alpha2 != conj(alpha1) at z = {z[worst]:.6g} (|diff| = {err[worst]:.3g})")

    theta = 2 * np.pi * (np.arange(16) + 0.5) / 16
    z = 1e6 * np.exp(1j * theta)
    zc = np.conj(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        mags = np.concatenate([np.abs(model.alpha1(z, zc)), np.abs(model.alpha2(z, zc))])
    decay_ok = bool(np.all(np.isfinite(mags)) and mags.max() < 1e-5)
    if not decay_ok:
        diag.append(f"|alpha| = {np.nanmax(mags):.3g} at radius 1e6")
    return ValidationReport(degree_ok, symmetry_ok, decay_ok, diag)


# -- lens map and Jacobians -------------------------------------------------


def _check_poles(alpha: RationalFn, z1, z2, on_pole: str):
    v = alpha.den(z1, z2)
    pole = np.abs(v) <= POLE_RTOL * alpha.den.abs_eval(z1, z2)
    if np.any(pole) and on_pole == "raise":
        raise PoleEvaluation(f"deflection has a pole at ({z1}, {z2})" if np.ndim(pole) == 0 else "pole in input")
    return pole


def lens_map_real(model: DeflectionModel, z, on_pole: str = "raise"):
    """``eta(z) = z - alpha(z, conj z)``; ``on_pole='nan'`` masks poles instead of raising."""
    z = np.asarray(z, dtype=complex) if np.ndim(z) else complex(z)
    zc = np.conj(z)
    pole = _check_poles(model.alpha1, z, zc, on_pole)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = z - model.alpha1(z, zc)
    if np.ndim(out):
        out = np.where(pole, np.nan, out)
    elif pole:
        out = complex(np.nan, np.nan)
    return out


def complex_jacobian(model: DeflectionModel, z1, z2, on_pole: str = "raise") -> np.ndarray:
    """``I - J_f`` with rows (alpha1, alpha2) and columns (z1, z2); shape ``(..., 2, 2)``."""
    scalar = np.ndim(z1) == 0 and np.ndim(z2) == 0
    if scalar:
        z1, z2 = complex(z1), complex(z2)
    else:
        z1, z2 = np.broadcast_arrays(np.asarray(z1, dtype=complex), np.asarray(z2, dtype=complex))
    pole = _check_poles(model.alpha1, z1, z2, on_pole) | _check_poles(model.alpha2, z1, z2, on_pole)
    with np.errstate(divide="ignore", invalid="ignore"):
        j = np.empty(np.shape(z1) + (2, 2), dtype=complex)
        j[..., 0, 0] = 1.0 - model.alpha1.partial_eval(1, z1, z2)
        j[..., 0, 1] = -model.alpha1.partial_eval(2, z1, z2)
        j[..., 1, 0] = -model.alpha2.partial_eval(1, z1, z2)
        j[..., 1, 1] = 1.0 - model.alpha2.partial_eval(2, z1, z2)
    if np.any(pole):
        j[pole] = np.nan
    return j


def complex_det(model: DeflectionModel, z1, z2, on_pole: str = "raise"):
    j = complex_jacobian(model, z1, z2, on_pole)
    d = j[..., 0, 0] * j[..., 1, 1] - j[..., 0, 1] * j[..., 1, 0]
    return d if np.ndim(d) else complex(d)


def det_real_jacobian(model: DeflectionModel, z, on_pole: str = "raise"):
    """Determinant of the real lens-map Jacobian at the lens-plane point ``z``."""
    z = np.asarray(z, dtype=complex) if np.ndim(z) else complex(z)
    d = complex_det(model, z, np.conj(z), on_pole)
    bad = np.abs(np.imag(d)) > DET_IMAG_RTOL * (1.0 + np.abs(d))
    if np.any(bad & np.isfinite(d)):
        raise SymmetryViolation("det J has an imaginary part on the real plane")
    out = np.real(d)
    return out if np.ndim(out) else float(out)


def real_jacobian(model: DeflectionModel, z) -> np.ndarray:
    """2x2 real Jacobian of ``eta`` in the coordinates (x1, x2)."""
    z = complex(z)
    zc = z.conjugate()
    # d/dx1 = d/dz1 + d/dz2, d/dx2 = i (d/dz1 - d/dz2) on the real plane
    a1_z1 = model.alpha1.partial_eval(1, z, zc)
    a1_z2 = model.alpha1.partial_eval(2, z, zc)
    da_dx1 = a1_z1 + a1_z2
    da_dx2 = 1j * (a1_z1 - a1_z2)
    return np.array(
        [
            [1.0 - da_dx1.real, -da_dx2.real],
            [-da_dx1.imag, 1.0 - da_dx2.imag],
        ]
    )


# -- potential and density --------------------------------------------------


def deflection_potential(model: DeflectionModel, x):
    form = model.psi_form
    x = np.asarray(x, dtype=complex) if np.ndim(x) else complex(x)
    p = model.params
    if form == "point_ensemble":
        out = 0.0
        for m, c in zip(p["masses"], p["positions"]):
            r = np.abs(x - c)
            if np.any(r == 0):
                raise PotentialSingularity(f"potential is singular at the lens position {c}")
            out = out + m * np.log(r)
        return out
    if form == "plummer":
        return 0.5 * p["theta_e"] ** 2 * np.log(p["a"] ** 2 + np.abs(x) ** 2)
    if form == "filament":
        x1 = np.real(x)
        if np.any(x1 == 0):
            raise PotentialSingularity("filament potential is singular on x1 = 0")
        return -2.0 * p["sigma0"] * np.log(np.abs(x1))
    raise NoPotentialForm(f"model {model.name!r} has no closed-form potential")


def fermat_potential(model: DeflectionModel, x, y) -> float:
    """Fermat potential ``|x - y|**2 / 2 - psi(x)``."""
    y = _as_zeta(y)
    return 0.5 * np.abs(x - y) ** 2 - deflection_potential(model, x)


def surface_density(model: DeflectionModel, x):
    form = model.psi_form
    x = np.asarray(x, dtype=complex) if np.ndim(x) else complex(x)
    p = model.params
    if form == "point_ensemble":
        for c in p["positions"]:
            if np.any(x == c):
                raise PotentialSingularity(f"point mass at {c}")
        return np.zeros(np.shape(x)) if np.ndim(x) else 0.0
    if form == "plummer":
        t2, a2 = p["theta_e"] ** 2, p["a"] ** 2
        return t2 * a2 / (a2 + np.abs(x) ** 2) ** 2
    if form == "filament":
        x1 = np.real(x)
        if np.any(x1 == 0):
            raise PotentialSingularity("filament density is singular on x1 = 0")
        return p["sigma0"] / x1**2
    raise NoPotentialForm(f"model {model.name!r} has no closed-form potential")


def pole_distance(model: DeflectionModel, z):
    """First-order distance from lens-plane points to the nearest pole of alpha."""
    z = np.asarray(z, dtype=complex)
    zc = np.conj(z)
    out = np.full(z.shape, np.inf)
    for alpha in (model.alpha1, model.alpha2):
        v = alpha.den(z, zc)
        # |grad_x V| on the real plane via the Wirtinger derivatives
        g1 = alpha.den.partial(1)(z, zc)
        g2 = alpha.den.partial(2)(z, zc)
        grad = np.abs(g1) + np.abs(g2)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.where(grad > 0, np.abs(v) / grad, np.where(v == 0, 0.0, np.inf))
        out = np.minimum(out, d)
    return out
