"""Polynomial and rational-function arithmetic over the complex numbers.

Univariate polynomials carry the eliminated resultant, bivariate polynomials
carry the numerators and denominators of complexified deflection angles.
Coefficients are stored in ascending order of degree.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateElimination,
    NoConvergenceWarning,
    SingularJacobian,
    ZeroDenominator,
)

#: coefficients below this fraction of the largest magnitude are treated as zero
ZERO_RTOL = 1e-14

ABERTH_MAX_ITER = 200
ABERTH_STEP_RTOL = 1e-13
_EPS = np.finfo(float).eps


def _trim_1d(c: np.ndarray) -> np.ndarray:
    if c.size == 0:
        return np.zeros(1, dtype=complex)
    mag = np.abs(c)
    top = mag.max()
    if top == 0.0 or not np.isfinite(top):
        if not np.isfinite(top):
            raise ValueError("non-finite polynomial coefficient")
        return np.zeros(1, dtype=complex)
    keep = np.nonzero(mag > ZERO_RTOL * top)[0]
    return c[: keep[-1] + 1].copy()


class UniPoly:
    """Univariate complex polynomial, ``coeffs[k]`` multiplies ``z**k``."""

    __slots__ = ("coeffs", "_list")

    def __init__(self, coeffs, trim: bool = True):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        if c.ndim != 1:
            raise ValueError("UniPoly coefficients must be one-dimensional")
        if trim:
            c = _trim_1d(c)
        elif c.size == 0:
            c = np.zeros(1, dtype=complex)
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite polynomial coefficient")
        self.coeffs = c
        self._list = [complex(v) for v in c]

    @classmethod
    def zero(cls) -> "UniPoly":
        return cls([0.0])

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        if len(self._list) == 1 and self._list[0] == 0:
            return -1
        return len(self._list) - 1

    def is_zero(self) -> bool:
        return self.degree < 0

    @property
    def leading(self) -> complex:
        return self._list[-1]

    def norm(self) -> float:
        return float(np.abs(self.coeffs).max())

    def __call__(self, z):
        acc = 0j
        for c in reversed(self._list):
            acc = acc * z + c
        return acc

    def abs_eval(self, z):
        """Sum of ``|c_k| |z|**k``; the scale used for backward errors."""
        r = np.abs(z)
        acc = 0.0
        for c in reversed(self._list):
            acc = acc * r + abs(c)
        return acc

    def deriv(self) -> "UniPoly":
        if len(self._list) <= 1:
            return UniPoly.zero()
        k = np.arange(1, len(self._list))
        return UniPoly(self.coeffs[1:] * k)

    def __neg__(self):
        return UniPoly(-self.coeffs, trim=False)

    def __add__(self, other):
        if not isinstance(other, UniPoly):
            other = UniPoly([other])
        n = max(len(self.coeffs), len(other.coeffs))
        out = np.zeros(n, dtype=complex)
        out[: len(self.coeffs)] += self.coeffs
        out[: len(other.coeffs)] += other.coeffs
        return UniPoly(out)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, UniPoly):
            other = UniPoly([other])
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, UniPoly):
            if self.is_zero() or other.is_zero():
                return UniPoly.zero()
            return UniPoly(np.convolve(self.coeffs, other.coeffs))
        return UniPoly(self.coeffs * complex(other))

    __rmul__ = __mul__

    def exact_div(self, other: "UniPoly") -> "UniPoly":
        """Quotient of a division known to be exact; the remainder is dropped.

        Solved as a least-squares problem on the convolution matrix rather than
        by long division, which amplifies rounding in the numerator's top
        coefficients whenever the divisor's leading coefficient is small.
        """
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        if self.is_zero() or self.degree < other.degree:
            return UniPoly.zero()
        den = other.coeffs
        dn = other.degree
        nq = self.degree - dn + 1
        if dn == 0:
            return UniPoly(self.coeffs / den[0])
        conv = np.zeros((nq + dn, nq), dtype=complex)
        for k in range(nq):
            conv[k : k + dn + 1, k] = den
        q = np.linalg.lstsq(conv, self.coeffs, rcond=None)[0]
        return UniPoly(q)

    def __repr__(self):
        return f"UniPoly({np.array2string(self.coeffs, precision=6)})"


class BiPoly:
    """Bivariate complex polynomial, ``coeffs[i, j]`` multiplies ``z1**i * z2**j``."""

    __slots__ = ("coeffs", "_rows")

    def __init__(self, coeffs):
        c = np.asarray(coeffs, dtype=complex)
        if c.ndim == 0:
            c = c.reshape(1, 1)
        if c.ndim != 2:
            raise ValueError("BiPoly coefficients must be a matrix")
        if c.size == 0:
            c = np.zeros((1, 1), dtype=complex)
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite polynomial coefficient")
        mag = np.abs(c)
        top = mag.max()
        nz = mag > ZERO_RTOL * top if top > 0 else np.zeros_like(mag, dtype=bool)
        if not nz.any():
            c = np.zeros((1, 1), dtype=complex)
        else:
            rows = np.nonzero(nz.any(axis=1))[0]
            cols = np.nonzero(nz.any(axis=0))[0]
            c = np.where(nz, c, 0)[: rows[-1] + 1, : cols[-1] + 1].copy()
        self.coeffs = c
        self._rows = [[complex(v) for v in row] for row in c]

    @classmethod
    def from_terms(cls, terms: dict) -> "BiPoly":
        """Build from ``{(i, j): coefficient}``."""
        if not terms:
            return cls.zero()
        d1 = max(i for i, _ in terms) + 1
        d2 = max(j for _, j in terms) + 1
        c = np.zeros((d1, d2), dtype=complex)
        for (i, j), v in terms.items():
            if i < 0 or j < 0:
                raise ValueError("negative exponent")
            c[i, j] += v
        return cls(c)

    @classmethod
    def zero(cls) -> "BiPoly":
        return cls([[0.0]])

    @classmethod
    def constant(cls, value) -> "BiPoly":
        return cls([[value]])

    @classmethod
    def z1(cls) -> "BiPoly":
        return cls([[0.0], [1.0]])

    @classmethod
    def z2(cls) -> "BiPoly":
        return cls([[0.0, 1.0]])

    @classmethod
    def from_z1(cls, p: UniPoly) -> "BiPoly":
        return cls(p.coeffs.reshape(-1, 1))

    @classmethod
    def from_z2(cls, p: UniPoly) -> "BiPoly":
        return cls(p.coeffs.reshape(1, -1))

    def is_zero(self) -> bool:
        return self.coeffs.shape == (1, 1) and self.coeffs[0, 0] == 0

    @property
    def deg1(self) -> int:
        return -1 if self.is_zero() else self.coeffs.shape[0] - 1

    @property
    def deg2(self) -> int:
        return -1 if self.is_zero() else self.coeffs.shape[1] - 1

    @property
    def total_degree(self) -> int:
        if self.is_zero():
            return -1
        i, j = np.nonzero(self.coeffs)
        return int((i + j).max())

    def norm(self) -> float:
        return float(np.abs(self.coeffs).max())

    def __call__(self, z1, z2):
        # Horner in z2 for each row, then in z1
        acc = 0j
        for row in reversed(self._rows):
            inner = 0j
            for c in reversed(row):
                inner = inner * z2 + c
            acc = acc * z1 + inner
        return acc

    def abs_eval(self, z1, z2):
        r1, r2 = np.abs(z1), np.abs(z2)
        acc = 0.0
        for row in reversed(self._rows):
            inner = 0.0
            for c in reversed(row):
                inner = inner * r2 + abs(c)
            acc = acc * r1 + inner
        return acc

    def partial(self, var: int) -> "BiPoly":
        """Formal partial derivative in ``z1`` (var=1) or ``z2`` (var=2)."""
        c = self.coeffs
        if var == 1:
            if c.shape[0] == 1:
                return BiPoly.zero()
            return BiPoly(c[1:, :] * np.arange(1, c.shape[0])[:, None])
        if var == 2:
            if c.shape[1] == 1:
                return BiPoly.zero()
            return BiPoly(c[:, 1:] * np.arange(1, c.shape[1])[None, :])
        raise ValueError("var must be 1 or 2")

    def swap(self) -> "BiPoly":
        """Exchange the roles of z1 and z2."""
        return BiPoly(self.coeffs.T)

    def conj_swap(self) -> "BiPoly":
        """Polynomial ``q`` with ``q(z1, z2) = conj(p(conj z2, conj z1))``."""
        return BiPoly(np.conj(self.coeffs.T))

    def in_z2(self) -> list[UniPoly]:
        """Coefficients of ``z2**j`` as polynomials in z1."""
        return [UniPoly(self.coeffs[:, j]) for j in range(self.coeffs.shape[1])]

    def at_z1(self, z1: complex) -> UniPoly:
        """Univariate polynomial in z2 obtained by fixing z1."""
        acc = np.zeros(self.coeffs.shape[1], dtype=complex)
        for row in self.coeffs[::-1]:
            acc = acc * z1 + row
        return UniPoly(acc)

    def at_z2(self, z2: complex) -> UniPoly:
        return self.swap().at_z1(z2)

    def _binary(self, other, sign):
        if not isinstance(other, BiPoly):
            other = BiPoly.constant(other)
        a, b = self.coeffs, other.coeffs
        out = np.zeros((max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1])), dtype=complex)
        out[: a.shape[0], : a.shape[1]] += a
        out[: b.shape[0], : b.shape[1]] += sign * b
        return BiPoly(out)

    def __add__(self, other):
        return self._binary(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, -1)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return BiPoly(-self.coeffs)

    def __mul__(self, other):
        if not isinstance(other, BiPoly):
            return BiPoly(self.coeffs * complex(other))
        a, b = self.coeffs, other.coeffs
        out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1), dtype=complex)
        for i, j in zip(*np.nonzero(a)):
            out[i : i + b.shape[0], j : j + b.shape[1]] += a[i, j] * b
        return BiPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "BiPoly":
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        out = BiPoly.constant(1.0)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, BiPoly):
            return NotImplemented
        return self.coeffs.shape == other.coeffs.shape and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash((self.coeffs.shape, self.coeffs.tobytes()))

    def allclose(self, other: "BiPoly", rtol=1e-12, atol=1e-14) -> bool:
        a, b = self.coeffs, other.coeffs
        shape = (max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1]))
        pa = np.zeros(shape, dtype=complex)
        pb = np.zeros(shape, dtype=complex)
        pa[: a.shape[0], : a.shape[1]] = a
        pb[: b.shape[0], : b.shape[1]] = b
        return bool(np.allclose(pa, pb, rtol=rtol, atol=atol))

    def __repr__(self):
        return f"BiPoly({np.array2string(self.coeffs, precision=6)})"


@dataclass(frozen=True, eq=False)
class RationalFn:
    num: BiPoly
    den: BiPoly

    def __post_init__(self):
        if self.den.is_zero():
            raise ZeroDenominator("rational function with zero denominator")

    @cached_property
    def _partials(self):
        return {
            1: (self.num.partial(1), self.den.partial(1)),
            2: (self.num.partial(2), self.den.partial(2)),
        }

    def __call__(self, z1, z2):
        return self.num(z1, z2) / self.den(z1, z2)

    def partial_eval(self, var: int, z1, z2):
        """Value of the partial derivative by the quotient rule."""
        dn, dd = self._partials[var]
        n = self.num(z1, z2)
        d = self.den(z1, z2)
        return (dn(z1, z2) * d - n * dd(z1, z2)) / (d * d)

    def partial(self, var: int) -> "RationalFn":
        dn, dd = self._partials[var]
        return RationalFn(dn * self.den - self.num * dd, self.den * self.den)

    def conj_swap(self) -> "RationalFn":
        return RationalFn(self.num.conj_swap(), self.den.conj_swap())


def bipoly_eval(p: BiPoly, z1, z2):
    return p(z1, z2)


def bipoly_partial(p: BiPoly, var) -> BiPoly:
    if isinstance(var, str):
        var = {"z1": 1, "z2": 2}[var]
    return p.partial(var)


# -- resultants ------------------------------------------------------------


def sylvester_matrix(p: BiPoly, q: BiPoly) -> list[list[UniPoly]]:
    """Sylvester matrix of ``p`` and ``q`` viewed as polynomials in z2."""
    a = p.in_z2()
    b = q.in_z2()
    m, n = len(a) - 1, len(b) - 1
    size = m + n
    zero = UniPoly.zero()
    rows = []
    for r in range(n):
        row = [zero] * size
        for k in range(m + 1):
            row[r + k] = a[m - k]
        rows.append(row)
    for r in range(m):
        row = [zero] * size
        for k in range(n + 1):
            row[r + k] = b[n - k]
        rows.append(row)
    return rows


def bareiss_det(matrix: Sequence[Sequence[UniPoly]]) -> UniPoly:
    """Fraction-free determinant of a square matrix with polynomial entries."""
    m = [list(row) for row in matrix]
    size = len(m)
    if size == 0:
        return UniPoly([1.0])
    sign = 1.0
    prev = UniPoly([1.0])
    for k in range(size - 1):
        candidates = [i for i in range(k, size) if not m[i][k].is_zero()]
        if not candidates:
            return UniPoly.zero()
        piv = max(candidates, key=lambda i: m[i][k].norm())
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            sign = -sign
        pk = m[k][k]
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                m[i][j] = (m[i][j] * pk - m[i][k] * m[k][j]).exact_div(prev)
        prev = pk
    return m[size - 1][size - 1] * sign


def resultant_z2(p: BiPoly, q: BiPoly) -> UniPoly:
    """Resultant of ``p`` and ``q`` with respect to z2, a polynomial in z1."""
    if p.deg2 < 1 or q.deg2 < 1:
        raise DegenerateElimination("both polynomials need positive degree in z2")
    return bareiss_det(sylvester_matrix(p, q))


# -- univariate roots -------------------------------------------------------


def cauchy_radius(coeffs) -> float:
    """Unique positive root of ``|c_n| x**n - sum_{k<n} |c_k| x**k``."""
    a = [abs(complex(c)) for c in coeffs]
    lead = a[-1]
    a = [v / lead for v in a[:-1]]
    n = len(a)
    if not any(a):
        return 0.0

    def g(x):
        acc = 1.0
        for v in reversed(a):
            acc = acc * x - v
        return acc

    def dg(x):
        acc = float(n)
        for k in range(n - 1, 0, -1):
            acc = acc * x - k * a[k]
        return acc

    # Newton from the upper bound 1 + max|a_k| decreases monotonically onto the root
    x = 1.0 + max(a)
    for _ in range(100):
        step = g(x) / dg(x)
        x -= step
        if step <= 1e-15 * x:
            break
    return x


def aberth(coeffs, max_iter: int = ABERTH_MAX_ITER, step_rtol: float = ABERTH_STEP_RTOL):
    """Aberth-Ehrlich simultaneous iteration.

    Parameters
    ----------
    coeffs : array_like
        Ascending coefficients with a nonzero last entry.

    Returns
    -------
    roots : ndarray
        All roots, repeated by multiplicity.
    converged : bool
        False when ``max_iter`` was exhausted with some root still moving.
    """
    c = [complex(v) for v in coeffs]
    if len(c) < 2:
        raise ValueError("need degree >= 1")
    if c[-1] == 0:
        raise ValueError("leading coefficient is zero")
    nzero = 0
    while c[nzero] == 0:
        nzero += 1
    c = c[nzero:]
    n = len(c) - 1
    zeros = [0j] * nzero
    if n == 0:
        return np.array(zeros, dtype=complex), True
    lead = c[-1]
    a = [v / lead for v in c]
    if n == 1:
        return np.array([-a[0]] + zeros, dtype=complex), True
    da = [k * a[k] for k in range(1, n + 1)]
    absa = [abs(v) for v in a]
    rho = cauchy_radius(a)
    z = [
        rho * (1.0 + 1e-3 * math.cos(k + 1.0)) * cmath.exp(1j * (2 * math.pi * k / n + 0.4))
        for k in range(n)
    ]
    active = [True] * n
    step_tol = step_rtol * rho
    backward = 4 * n * _EPS
    converged = False
    for _ in range(max_iter):
        for k in range(n):
            if not active[k]:
                continue
            zk = z[k]
            pz = 0j
            for v in reversed(a):
                pz = pz * zk + v
            if pz == 0:
                active[k] = False
                continue
            dpz = 0j
            for v in reversed(da):
                dpz = dpz * zk + v
            rk = abs(zk)
            scale = 0.0
            for v in reversed(absa):
                scale = scale * rk + v
            s = 0j
            for j in range(n):
                if j != k:
                    d = zk - z[j]
                    if d != 0:
                        s += 1.0 / d
            if dpz == 0:
                # derivative vanished: nudge off the critical point
                w = 1e-8 * (1.0 + rk) * cmath.exp(1j * (k + 1.0))
            else:
                ratio = pz / dpz
                denom = 1.0 - ratio * s
                w = ratio / denom if denom != 0 else ratio
            z[k] = zk - w
            if abs(w) <= step_tol or abs(pz) <= backward * scale:
                active[k] = False
        if not any(active):
            converged = True
            break
    return np.array(z + zeros, dtype=complex), converged


def roots(p: UniPoly, tol: float = 1e-10, max_iter: int = ABERTH_MAX_ITER) -> np.ndarray:
    """All complex roots of ``p`` with multiplicity, by Aberth-Ehrlich iteration.

    Warns with :class:`NoConvergenceWarning` and returns the best iterates when
    the iteration stalls or a root misses the normwise backward-error bound
    ``|p(r)| <= tol * sum |c_k| max(1, |r|)**k``.
    """
    if not isinstance(p, UniPoly):
        p = UniPoly(p)
    if p.degree < 1:
        raise ValueError("root finding needs a polynomial of degree >= 1")
    r, converged = aberth(p.coeffs, max_iter=max_iter)
    order = np.lexsort((r.imag, r.real))
    r = r[order]
    resid = np.abs(p(r))
    ok = resid <= tol * p.abs_eval(np.maximum(np.abs(r), 1.0))
    if not converged or not ok.all():
        warnings.warn(
            f"root finder did not converge for degree {p.degree} polynomial",
            NoConvergenceWarning,
            stacklevel=2,
        )
    return r


# -- 2D Newton -------------------------------------------------------------


NEWTON_DET_RTOL = 1e-14


def newton_polish_2d(
    p: BiPoly,
    q: BiPoly,
    guess,
    tol: float = 1e-14,
    max_iter: int = 50,
    trace: list | None = None,
    partials: tuple | None = None,
):
    """Newton iteration on the holomorphic system ``p = q = 0``.

    Steps that would increase ``max(|p|, |q|)`` are halved up to eight times;
    if none is accepted the iteration stops at the best point so far.
    ``partials`` may carry precomputed ``(dp/dz1, dp/dz2, dq/dz1, dq/dz2)``.
    Returns ``(z1, z2, residual)``.
    """
    if partials is None:
        partials = (p.partial(1), p.partial(2), q.partial(1), q.partial(2))
    p1, p2, q1, q2 = partials
    z1, z2 = complex(guess[0]), complex(guess[1])
    fp, fq = p(z1, z2), q(z1, z2)
    res = max(abs(fp), abs(fq))
    if trace is not None:
        trace.append(res)
    for _ in range(max_iter):
        if res <= tol:
            break
        a, b = p1(z1, z2), p2(z1, z2)
        c, d = q1(z1, z2), q2(z1, z2)
        det = a * d - b * c
        if abs(det) <= NEWTON_DET_RTOL * (abs(a * d) + abs(b * c)) or det == 0:
            raise SingularJacobian(f"singular Jacobian at ({z1}, {z2})")
        s1 = (d * fp - b * fq) / det
        s2 = (a * fq - c * fp) / det
        t = 1.0
        for _ in range(8):
            n1, n2 = z1 - t * s1, z2 - t * s2
            gp, gq = p(n1, n2), q(n1, n2)
            r = max(abs(gp), abs(gq))
            if r < res:
                break
            t *= 0.5
        else:
            break
        z1, z2, fp, fq, res = n1, n2, gp, gq, r
        if trace is not None:
            trace.append(res)
    return z1, z2, res
