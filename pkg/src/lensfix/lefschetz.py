"""Magnifications of complex images and the sum rule they obey.

Each transversal fixed point ``q`` of the complexified map contributes
``mu(q) = 1 / det(I - J_f)(q)``; summed over all complex fixed points this is
the holomorphic Lefschetz number of the compactified map, which equals 1.
At physical images ``det(I - J_f)`` coincides with ``det J_eta``, so ``mu`` is
the ordinary signed magnification there.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePoint, NotRealImage
from .lens import DeflectionModel, SourcePos, _as_zeta, det_real_jacobian
from .solver import FixedPoint, SolveOptions, solve_fixed_points

DEFAULT_MOMENTS = (0, 1, 2, 3)
#: imaginary part allowed on a real image's magnification, relative to 1 + |mu|
REAL_MU_IMAG_RTOL = 1e-8


@dataclass
class InvariantReport:
    source: SourcePos
    points: list  # of (FixedPoint, mu); mu is nan for degenerate points
    complex_sum: complex
    real_sum: float
    moments: list  # of (k, value)
    valid: bool
    model_name: str
    notes: list = field(default_factory=list)

    @property
    def n_fixed(self) -> int:
        return len(self.points)

    @property
    def n_real(self) -> int:
        return sum(fp.is_real for fp, _ in self.points)

    @property
    def all_real(self) -> bool:
        return self.n_real == self.n_fixed


def magnification(fp: FixedPoint, det_floor: float = SolveOptions.caustic_det_floor) -> complex:
    """``1 / det(I - J_f)`` at a fixed point."""
    det = fp.transversal_det
    if not abs(det) >= det_floor:
        raise DegeneratePoint(f"|det(I - J_f)| = {abs(det):.3g} at ({fp.z1}, {fp.z2}) is below {det_floor:g}")
    return 1.0 / det


def summarize(model_name: str, zeta, points, opts: SolveOptions = SolveOptions(), moments=DEFAULT_MOMENTS):
    """Build an :class:`InvariantReport` from already solved fixed points."""
    zeta = _as_zeta(zeta)
    valid = True
    notes = []
    pairs = []
    for fp in points:
        if fp.degenerate:
            valid = False
            notes.append(f"degenerate fixed point at z1 = {fp.z1:.6g}")
            pairs.append((fp, complex(np.nan, np.nan)))
            continue
        pairs.append((fp, magnification(fp, opts.caustic_det_floor)))
    good = [(fp, mu) for fp, mu in pairs if not fp.degenerate]
    complex_sum = complex(sum(mu for _, mu in good))
    real_sum = 0.0
    for fp, mu in good:
        if fp.is_real:
            if abs(mu.imag) > REAL_MU_IMAG_RTOL * (1.0 + abs(mu)):
                valid = False
                notes.append(f"real image at z = {fp.z1:.6g} has complex magnification {mu:.6g}")
            real_sum += mu.real
    mom = [(k, complex(sum(mu * fp.z1**k for fp, mu in good))) for k in moments]
    return InvariantReport(SourcePos(zeta), pairs, complex_sum, float(real_sum), mom, valid, model_name, notes)


def lefschetz_sum(
    model: DeflectionModel, zeta, opts: SolveOptions = SolveOptions(), moments=DEFAULT_MOMENTS
) -> InvariantReport:
    """Solve for every complex image and sum their magnifications."""
    points = solve_fixed_points(model, zeta, opts)
    return summarize(model.name, zeta, points, opts, moments)


def real_invariant(model: DeflectionModel, zeta, opts: SolveOptions = SolveOptions()) -> float:
    """Sum of signed magnifications over the physical images only."""
    return lefschetz_sum(model, zeta, opts, moments=()).real_sum


def moment_sum(model: DeflectionModel, zeta, k: int, opts: SolveOptions = SolveOptions()) -> complex:
    """``sum_q mu(q) * z1(q)**k`` over all complex fixed points."""
    if k < 0:
        raise ValueError("moment order must be non-negative")
    return lefschetz_sum(model, zeta, opts, moments=(k,)).moments[0][1]


def jacobian_identity_residual(model: DeflectionModel, fp: FixedPoint) -> float:
    """Gap between ``det(I - J_f)`` at a real image and ``det J_eta`` there."""
    if not fp.is_real:
        raise NotRealImage(f"fixed point ({fp.z1}, {fp.z2}) is spurious")
    return abs(fp.transversal_det - det_real_jacobian(model, fp.z1))


# -- serialization ----------------------------------------------------------


def _num(x: float):
    x = float(x)
    if not np.isfinite(x):
        return None
    return float(f"{x:.10g}")


def point_record(fp: FixedPoint, mu: complex) -> dict:
    return {
        "record": "fixed_point",
        "z1_re": _num(fp.z1.real),
        "z1_im": _num(fp.z1.imag),
        "z2_re": _num(fp.z2.real),
        "z2_im": _num(fp.z2.imag),
        "is_real": bool(fp.is_real),
        "mu_re": _num(mu.real),
        "mu_im": _num(mu.imag),
        "det_re": _num(fp.transversal_det.real),
        "det_im": _num(fp.transversal_det.imag),
        "residual": _num(fp.residual),
        "multiplicity": fp.multiplicity,
        "degenerate": bool(fp.degenerate),
    }


def summary_record(report: InvariantReport) -> dict:
    return {
        "record": "summary",
        "model": report.model_name,
        "zeta_re": _num(report.source.zeta.real),
        "zeta_im": _num(report.source.zeta.imag),
        "n_fixed": report.n_fixed,
        "n_real": report.n_real,
        "complex_sum_re": _num(report.complex_sum.real),
        "complex_sum_im": _num(report.complex_sum.imag),
        "real_sum": _num(report.real_sum),
        "valid": bool(report.valid),
    }


def report_jsonl(report: InvariantReport) -> str:
    """Per-point records followed by the summary record, one JSON object per line."""
    lines = [json.dumps(point_record(fp, mu)) for fp, mu in report.points]
    lines.append(json.dumps(summary_record(report)))
    return "\n".join(lines) + "\n"
