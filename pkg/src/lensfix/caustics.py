"""Critical curves, caustics and source-plane image-count maps."""
from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyWindow, LensfixError
from .lens import DeflectionModel, det_real_jacobian, lens_map_real, pole_distance
from .solver import SolveOptions, solve_fixed_points

#: grid nodes closer than this to a pole of the deflection are masked
POLE_MASK_DIST = 1e-6


@dataclass(frozen=True)
class Window:
    center: complex
    half_width: float
    half_height: float
    nx: int
    ny: int

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not (self.half_width > 0 and self.half_height > 0):
            raise ValueError("window extents must be positive")
        if self.nx < 8 or self.ny < 8:
            raise ValueError("window needs at least 8 nodes per axis")

    @classmethod
    def from_bounds(cls, x0, x1, y0, y1, nx, ny) -> "Window":
        return cls(complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)), 0.5 * (x1 - x0), 0.5 * (y1 - y0), nx, ny)

    @property
    def xs(self) -> np.ndarray:
        c = self.center.real
        return np.linspace(c - self.half_width, c + self.half_width, self.nx)

    @property
    def ys(self) -> np.ndarray:
        c = self.center.imag
        return np.linspace(c - self.half_height, c + self.half_height, self.ny)

    @property
    def dx(self) -> float:
        return 2 * self.half_width / (self.nx - 1)

    @property
    def dy(self) -> float:
        return 2 * self.half_height / (self.ny - 1)

    def nodes(self) -> np.ndarray:
        """Complex node positions, shape ``(ny, nx)``."""
        x, y = np.meshgrid(self.xs, self.ys)
        return x + 1j * y


@dataclass
class MultiplicityGrid:
    """Real-image counts on a source-plane grid.

    ``counts[iy, ix]`` belongs to the source ``xs[ix] + 1j * ys[iy]``; masked
    nodes (source on a caustic, solver failure) hold -1.
    """

    window: Window
    counts: np.ndarray
    max_count: int
    caustic_polylines: list = field(default_factory=list)
    critical_polylines: list = field(default_factory=list)


# -- marching squares -------------------------------------------------------


def _edge_point(key, xs, ys, f):
    kind, iy, ix = key
    if kind == "h":
        fa, fb = f[iy, ix], f[iy, ix + 1]
        t = fa / (fa - fb)
        return complex(xs[ix] + t * (xs[ix + 1] - xs[ix]), ys[iy])
    fa, fb = f[iy, ix], f[iy + 1, ix]
    t = fa / (fa - fb)
    return complex(xs[ix], ys[iy] + t * (ys[iy + 1] - ys[iy]))


def marching_squares(f: np.ndarray, xs: np.ndarray, ys: np.ndarray, center=None) -> list[np.ndarray]:
    """Zero contours of ``f[iy, ix]`` sampled at ``(xs[ix], ys[iy])``.

    NaN nodes are masked: cells touching them produce no segments. Saddle
    cells are resolved by the sign at the cell centre, taken from ``center``
    (shape ``(ny-1, nx-1)``) when given and from the corner mean otherwise.
    Returns polylines as complex arrays; closed ones repeat their first vertex.
    """
    f = np.asarray(f, dtype=float)
    ny, nx = f.shape
    pos = f > 0
    finite = np.isfinite(f)
    segments = []
    for iy in range(ny - 1):
        for ix in range(nx - 1):
            if not (finite[iy, ix] and finite[iy, ix + 1] and finite[iy + 1, ix + 1] and finite[iy + 1, ix]):
                continue
            s0, s1, s2, s3 = pos[iy, ix], pos[iy, ix + 1], pos[iy + 1, ix + 1], pos[iy + 1, ix]
            if s0 == s1 == s2 == s3:
                continue
            bottom = ("h", iy, ix)
            right = ("v", iy, ix + 1)
            top = ("h", iy + 1, ix)
            left = ("v", iy, ix)
            crossed = [e for e, c in ((bottom, s0 != s1), (right, s1 != s2), (top, s3 != s2), (left, s0 != s3)) if c]
            if len(crossed) == 2:
                segments.append((crossed[0], crossed[1]))
                continue
            # saddle: opposite corners share a sign
            if center is not None and np.isfinite(center[iy, ix]):
                cv = center[iy, ix]
            else:
                cv = 0.25 * (f[iy, ix] + f[iy, ix + 1] + f[iy + 1, ix + 1] + f[iy + 1, ix])
            if (cv > 0) == s0:
                # the s0-s2 diagonal is connected through the centre
                segments.append((bottom, right))
                segments.append((top, left))
            else:
                segments.append((bottom, left))
                segments.append((right, top))

    by_edge: dict = {}
    for k, (a, b) in enumerate(segments):
        by_edge.setdefault(a, []).append(k)
        by_edge.setdefault(b, []).append(k)
    used = [False] * len(segments)

    def walk(start_edge, seg):
        chain = [start_edge]
        edge = start_edge
        while seg is not None and not used[seg]:
            used[seg] = True
            a, b = segments[seg]
            edge = b if a == edge else a
            chain.append(edge)
            nxt = [s for s in by_edge[edge] if not used[s]]
            seg = nxt[0] if nxt else None
        return chain

    chains = []
    for k, (a, b) in enumerate(segments):
        if used[k]:
            continue
        ends = [e for e in (a, b) if len(by_edge[e]) == 1]
        if not ends:
            continue
        chains.append(walk(ends[0], k))
    for k, (a, _) in enumerate(segments):
        if not used[k]:
            chains.append(walk(a, k))

    cache: dict = {}
    out = []
    for chain in chains:
        pts = []
        for key in chain:
            if key not in cache:
                cache[key] = _edge_point(key, xs, ys, f)
            pts.append(cache[key])
        out.append(np.array(pts, dtype=complex))
    return out


# -- critical curves and caustics ------------------------------------------


def _det_field(model: DeflectionModel, z: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        det = np.asarray(det_real_jacobian(model, z, on_pole="nan"), dtype=float)
        det = np.where(pole_distance(model, z) < POLE_MASK_DIST, np.nan, det)
    return np.where(np.isfinite(det), det, np.nan)


def critical_curves(model: DeflectionModel, window: Window) -> list[np.ndarray]:
    """Zero set of ``det J_eta`` over a lens-plane window, as polylines."""
    z = window.nodes()
    det = _det_field(model, z)
    if not np.isfinite(det).any():
        raise EmptyWindow("every grid node is masked")
    centers = z[:-1, :-1] + 0.5 * (window.dx + 1j * window.dy)
    center_det = _det_field(model, centers)
    return marching_squares(det, window.xs, window.ys, center=center_det)


def map_to_caustics(model: DeflectionModel, critical: list) -> list[np.ndarray]:
    """Image of critical polylines under the lens map; pole vertices are dropped."""
    out = []
    for line in critical:
        line = np.asarray(line, dtype=complex)
        with np.errstate(all="ignore"):
            img = lens_map_real(model, line, on_pole="nan")
        bad = ~np.isfinite(img)
        if bad.any():
            warnings.warn(f"dropped {int(bad.sum())} caustic vertices at poles", RuntimeWarning, stacklevel=2)
            img = img[~bad]
        if img.size:
            out.append(img)
    return out


# -- multiplicity scans -----------------------------------------------------


def node_count(model: DeflectionModel, zeta: complex, opts: SolveOptions) -> int:
    """Real-image count at one source, -1 on a caustic or when the solve fails."""
    try:
        points = solve_fixed_points(model, zeta, opts)
    except LensfixError:
        return -1
    if any(p.degenerate for p in points):
        return -1
    return sum(p.is_real for p in points)


def _count_rows(args):
    model, zs, opts = args
    return [[node_count(model, complex(z), opts) for z in row] for row in zs]


def default_lens_window(source_window: Window) -> Window:
    """Lens-plane window for critical curves: the source window grown by half, 201x201 nodes."""
    return Window(source_window.center, 1.5 * source_window.half_width, 1.5 * source_window.half_height, 201, 201)


def multiplicity_scan(
    model: DeflectionModel,
    source_window: Window,
    opts: SolveOptions = SolveOptions(),
    jobs: int = 1,
    lens_window: Window | None = None,
) -> MultiplicityGrid:
    zs = source_window.nodes()
    if jobs > 1:
        chunks = np.array_split(np.arange(zs.shape[0]), min(jobs * 4, zs.shape[0]))
        tasks = [(model, zs[idx], opts) for idx in chunks if idx.size]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = [r for part in pool.map(_count_rows, tasks) for r in part]
    else:
        rows = _count_rows((model, zs, opts))
    counts = np.array(rows, dtype=int)
    valid = counts[counts >= 0]
    max_count = int(valid.max()) if valid.size else 0
    lw = lens_window or default_lens_window(source_window)
    try:
        crit = critical_curves(model, lw)
    except EmptyWindow:
        crit = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        caus = map_to_caustics(model, crit)
    return MultiplicityGrid(source_window, counts, max_count, caus, crit)


def boundary_crossings(grid: MultiplicityGrid, row: int, low: int, high: int) -> list[tuple[float, float]]:
    """Brackets ``(x_a, x_b)`` along one grid row where the count steps between ``low`` and ``high``.

    Masked nodes are skipped, so a bracket spans from the last node with one
    count to the next unmasked node with the other.
    """
    xs = grid.window.xs
    c = grid.counts[row]
    idx = [i for i in range(len(c)) if c[i] >= 0]
    out = []
    for a, b in zip(idx, idx[1:]):
        if {c[a], c[b]} == {low, high}:
            out.append((float(xs[a]), float(xs[b])))
    return out


# -- CSV output -------------------------------------------------------------


def fmt(x: float) -> str:
    return f"{float(x) + 0.0:.10g}"


def grid_csv(grid: MultiplicityGrid) -> str:
    lines = ["y1,y2,count"]
    xs, ys = grid.window.xs, grid.window.ys
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            lines.append(f"{fmt(x)},{fmt(y)},{int(grid.counts[iy, ix])}")
    return "\n".join(lines) + "\n"


def polylines_csv(groups: dict) -> str:
    """``{kind: polylines}`` as rows ``kind,polyline,vertex,x,y``."""
    lines = ["kind,polyline,vertex,x,y"]
    for kind, polylines in groups.items():
        for pid, line in enumerate(polylines):
            for vid, p in enumerate(line):
                lines.append(f"{kind},{pid},{vid},{fmt(p.real)},{fmt(p.imag)}")
    return "\n".join(lines) + "\n"
