"""All complex fixed points of a rational lensing map for one source.

The fixed-point equations ``z1 = zeta + alpha1``, ``z2 = conj(zeta) + alpha2`` are
cleared of denominators into two bivariate polynomials, z2 is eliminated with a
resultant, and the eliminated roots are back-substituted and polished with 2D
Newton. Fixed points with ``z2 == conj(z1)`` are the physical images; the others
are spurious.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .algebra import BiPoly, UniPoly, newton_polish_2d, resultant_z2, roots
from .errors import EliminationDegenerate, NoConvergenceWarning, SingularJacobian
from .lens import DeflectionModel, _as_zeta, complex_det

#: candidates are screened at this backward residual before polishing
SCREEN_TOL = 1e-5
#: a candidate must stay within this relative distance of its starting point while polishing
POLISH_DRIFT = 1e-3
#: resultant coefficients below this fraction of the Sylvester scale count as zero
RESULTANT_ZERO_RTOL = 1e-10


@dataclass(frozen=True)
class SolveOptions:
    residual_tol: float = 1e-10
    realness_tol: float = 1e-8
    dedup_tol: float = 1e-8
    caustic_det_floor: float = 1e-9
    max_newton_iter: int = 50
    pole_tol: float = 1e-8

    def __post_init__(self):
        for name in ("residual_tol", "realness_tol", "dedup_tol", "caustic_det_floor", "pole_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_newton_iter < 1:
            raise ValueError("max_newton_iter must be positive")


@dataclass(frozen=True)
class FixedPoint:
    z1: complex
    z2: complex
    residual: float
    is_real: bool
    transversal_det: complex
    converged: bool = True
    multiplicity: int = 1
    on_caustic: bool = False

    @property
    def degenerate(self) -> bool:
        return self.on_caustic or self.multiplicity > 1 or not self.converged


@dataclass
class Solution:
    """Fixed points plus elimination diagnostics."""

    points: list[FixedPoint]
    resultant: UniPoly
    swapped: bool
    leading_ratio: float
    notes: list = field(default_factory=list)

    @property
    def on_caustic(self) -> bool:
        return any(p.on_caustic for p in self.points)


def fixed_point_system(model: DeflectionModel, zeta) -> tuple[BiPoly, BiPoly]:
    """``P1 = (z1 - zeta) V1 - U1`` and ``P2 = (z2 - conj zeta) V2 - U2``."""
    zeta = _as_zeta(zeta)
    a1, a2 = model.alpha1, model.alpha2
    p1 = (BiPoly.z1() - zeta) * a1.den - a1.num
    p2 = (BiPoly.z2() - zeta.conjugate()) * a2.den - a2.num
    return p1, p2


def backward_residual(p: BiPoly, z1, z2) -> float:
    scale = p.abs_eval(z1, z2)
    if scale == 0:
        return 0.0
    return float(abs(p(z1, z2)) / scale)


def _residual(p1, p2, z1, z2):
    return max(backward_residual(p1, z1, z2), backward_residual(p2, z1, z2))


def _rel_dist(a, b) -> float:
    return max(
        abs(a[0] - b[0]) / max(1.0, abs(a[0]), abs(b[0])),
        abs(a[1] - b[1]) / max(1.0, abs(a[1]), abs(b[1])),
    )


def _sylvester_scale(p: BiPoly, q: BiPoly) -> float:
    sp = float(np.abs(p.coeffs).sum())
    sq = float(np.abs(q.coeffs).sum())
    return sp ** max(q.deg2, 0) * sq ** max(p.deg2, 0)


def _roots_quiet(poly: UniPoly) -> np.ndarray:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NoConvergenceWarning)
        return roots(poly)


def _univariate_candidates(p1: BiPoly, p2: BiPoly):
    """Direct solve when one equation does not involve one of the variables."""
    groups = []
    for a, b, flip in ((p1, p2, False), (p2, p1, False), (p1.swap(), p2.swap(), True), (p2.swap(), p1.swap(), True)):
        if a.deg2 == 0 and a.deg1 >= 1:
            # a depends on the first variable only
            u = UniPoly(a.coeffs[:, 0])
            for r in _roots_quiet(u):
                cands = []
                g = b.at_z1(r)
                if g.degree >= 1:
                    cands = [(r, s) for s in _roots_quiet(g)]
                if flip:
                    cands = [(s, r) for r, s in cands]
                groups.append(cands)
            return groups
    return None


def _eliminate(p1: BiPoly, p2: BiPoly):
    """Eliminate z2, swapping variables once if needed; returns ``(R, swapped, a, b)``."""
    for swapped in (False, True):
        a, b = (p1.swap(), p2.swap()) if swapped else (p1, p2)
        if a.deg2 < 1 or b.deg2 < 1:
            continue
        r = resultant_z2(a, b)
        if r.is_zero() or r.norm() <= RESULTANT_ZERO_RTOL * _sylvester_scale(a, b):
            continue
        return r, swapped, a, b
    raise EliminationDegenerate("resultant vanishes identically in both variable orders")


def solve_system(p1: BiPoly, p2: BiPoly, opts: SolveOptions = SolveOptions()):
    """Candidate groups for the polynomial system, one group per eliminated root.

    Returns ``(groups, resultant, swapped, leading_ratio)``.
    """
    if p1.is_zero() or p2.is_zero():
        raise EliminationDegenerate("an equation of the fixed-point system vanishes identically")
    if p1.total_degree == 0 or p2.total_degree == 0:
        return [], UniPoly([1.0]), False, 1.0
    direct = _univariate_candidates(p1, p2)
    if direct is not None:
        return direct, UniPoly([1.0]), False, 1.0
    r, swapped, a, b = _eliminate(p1, p2)
    leading_ratio = abs(r.leading) / r.norm()
    groups = []
    if r.degree >= 1:
        for x in _roots_quiet(r):
            cands = []
            for poly in (a, b):
                g = poly.at_z1(x)
                if g.degree >= 1:
                    cands.extend((x, s) for s in _roots_quiet(g))
            if swapped:
                cands = [(s, x) for x, s in cands]
            groups.append(cands)
    return groups, r, swapped, leading_ratio


class _Polisher:
    def __init__(self, p1: BiPoly, p2: BiPoly, opts: SolveOptions):
        # normalised so that the Newton residual is comparable across systems
        self.p1 = p1 * (1.0 / p1.norm())
        self.p2 = p2 * (1.0 / p2.norm())
        self.partials = (self.p1.partial(1), self.p1.partial(2), self.p2.partial(1), self.p2.partial(2))
        self.max_iter = opts.max_newton_iter

    def __call__(self, cand):
        try:
            z1, z2, _ = newton_polish_2d(
                self.p1, self.p2, cand, tol=0.0, max_iter=self.max_iter, partials=self.partials
            )
        except SingularJacobian:
            z1, z2 = cand
        return complex(z1), complex(z2)


def solve(model: DeflectionModel, zeta, opts: SolveOptions = SolveOptions()) -> Solution:
    """Full fixed-point solve with diagnostics; see :func:`solve_fixed_points`."""
    zeta = _as_zeta(zeta)
    p1, p2 = fixed_point_system(model, zeta)
    groups, r, swapped, leading_ratio = solve_system(p1, p2, opts)
    v1, v2 = model.alpha1.den, model.alpha2.den
    polish = _Polisher(p1, p2, opts)

    merged: list[list] = []  # [z1, z2, weight, residual]
    for cands in groups:
        local = []
        for cand in cands:
            if not (np.isfinite(cand[0]) and np.isfinite(cand[1])):
                continue
            if _residual(p1, p2, *cand) > SCREEN_TOL:
                continue
            z = polish(cand)
            if _rel_dist(z, cand) > POLISH_DRIFT:
                continue
            res = _residual(p1, p2, *z)
            if res > SCREEN_TOL:
                continue
            if (
                backward_residual(v1, *z) < opts.pole_tol
                or backward_residual(v2, *z) < opts.pole_tol
            ):
                continue
            if any(_rel_dist(z, w[:2]) <= opts.dedup_tol for w in local):
                continue
            local.append([z[0], z[1], res])
        for z1, z2, res in local:
            w = 1.0 / len(local)
            for m in merged:
                if _rel_dist((z1, z2), m[:2]) <= opts.dedup_tol:
                    m[2] += w
                    if res < m[3]:
                        m[0], m[1], m[3] = z1, z2, res
                    break
            else:
                merged.append([z1, z2, w, res])

    points = []
    for z1, z2, w, res in merged:
        det = complex_det(model, z1, z2, on_pole="nan")
        points.append(
            FixedPoint(
                z1=z1,
                z2=z2,
                residual=res,
                is_real=abs(z2 - z1.conjugate()) <= opts.realness_tol * (1.0 + abs(z1)),
                transversal_det=det,
                converged=res <= opts.residual_tol,
                multiplicity=max(1, int(round(w))),
                on_caustic=not abs(det) >= opts.caustic_det_floor,
            )
        )
    points.sort(key=lambda p: (p.z1.real, p.z1.imag, p.z2.real, p.z2.imag))
    notes = []
    if leading_ratio < 1e-8:
        notes.append(f"resultant leading coefficient is small ({leading_ratio:.2e}); roots near infinity possible")
    return Solution(points, r, swapped, leading_ratio, notes)


def solve_fixed_points(model: DeflectionModel, zeta, opts: SolveOptions = SolveOptions()) -> list[FixedPoint]:
    """Every complex fixed point, sorted by ``(re z1, im z1)``.

    Points on a caustic are returned with ``on_caustic`` set rather than raised,
    so callers can inspect them.
    """
    return solve(model, zeta, opts).points


def count_real_images(model: DeflectionModel, zeta, opts: SolveOptions = SolveOptions()) -> int:
    return sum(p.is_real for p in solve_fixed_points(model, zeta, opts))
