"""Locating the operator spectrum through the discriminant.

A point z belongs to the spectrum exactly when the discriminant is real with
modulus at most one, so the spectrum is traced as the zero level set of
Im(delta) over a rectangular window, filtered by Re(delta) in [-1, 1], and
sharpened by a complex Newton iteration that drives Im(delta) to zero along
the direction leaving Re(delta) stationary.

The real axis needs a separate scan: for several symmetry classes Im(delta)
vanishes identically there, which level-set extraction cannot resolve, so
axis intervals are detected by 1-D membership scanning instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import (DefectiveMonodromy, NotOnSpectrum, WindowDegenerate)
from .potentials import PeriodicPotential
from .transfer import (DEFAULT_CONFIG, IntegratorConfig, batch_monodromy,
                       fundamental_samples, integrate_monodromy)

Window = tuple[float, float, float, float]


@dataclass
class DiscriminantField:
    """Discriminant values on a rectangular grid; values[i, j] corresponds
    to z = re_nodes[i] + 1j * im_nodes[j]."""

    window: Window
    nx: int
    ny: int
    h: float
    values: np.ndarray
    failures: list[tuple[int, int]]
    re_nodes: np.ndarray
    im_nodes: np.ndarray
    pot: PeriodicPotential
    cfg: IntegratorConfig

    @property
    def cell(self) -> tuple[float, float]:
        return (float(self.re_nodes[1] - self.re_nodes[0]),
                float(self.im_nodes[1] - self.im_nodes[0]))


@dataclass
class SpectrumArcs:
    """Polyline approximation of the spectrum inside one window.

    Each arc vertex is (z, Re delta at z); axis_bands lists real intervals
    found by the direct axis scan (populated only when the scan triggers).
    """

    arcs: list[list[tuple[complex, float]]]
    h: float
    axis_bands: list[tuple[float, float]]
    cell_size: tuple[float, float]
    refine_failures: int = 0
    axis_band_deltas: list[tuple[float, float]] = dc_field(default_factory=list)

    def arc_vertices(self) -> np.ndarray:
        if not self.arcs:
            return np.zeros(0, dtype=np.complex128)
        return np.concatenate([[v for v, _ in arc] for arc in self.arcs])

    def axis_points(self, spacing: float | None = None) -> np.ndarray:
        """Deterministic sampling of the axis bands at roughly one point per
        grid cell."""
        if not self.axis_bands:
            return np.zeros(0, dtype=np.complex128)
        dx = self.cell_size[0] if spacing is None else spacing
        pts = []
        for a, b in self.axis_bands:
            n = max(2, int(np.ceil((b - a) / dx)) + 1)
            pts.append(np.linspace(a, b, n).astype(np.complex128))
        return np.concatenate(pts)

    def all_points(self) -> np.ndarray:
        return np.concatenate([self.arc_vertices(), self.axis_points()])


@dataclass(frozen=True)
class BlochEigenvalue:
    z: complex
    xi: float
    residual: float


@dataclass(frozen=True)
class BlochWave:
    """A bounded solution sampled over one period, unit L2 norm."""

    xi: float
    x: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray


@dataclass(frozen=True)
class ImagIdentityCheck:
    """Both eigenfunction inner-product expressions for Im z."""

    lhs: float
    rhs1: float
    rhs2: float
    max_rel_err: float


def _delta_batch(pot, zs, h, cfg, rtol=None):
    """Discriminant at a batch of points; failed integrations yield NaN."""
    zs = np.asarray(zs, dtype=np.complex128).ravel()
    M, _, _, status = batch_monodromy(pot, zs, h, cfg, rtol=rtol)
    delta = 0.5 * (M[:, 0, 0] + M[:, 1, 1])
    delta[status != 0] = np.nan
    return delta


def discriminant_field(pot: PeriodicPotential, h: float, window: Window,
                       nx: int, ny: int,
                       cfg: IntegratorConfig = DEFAULT_CONFIG) -> DiscriminantField:
    """Evaluate the discriminant on an nx-by-ny grid over the window."""
    re_min, re_max, im_min, im_max = map(float, window)
    if not (re_min < re_max and im_min < im_max):
        raise WindowDegenerate(f"window {window} has empty extent")
    if nx < 8 or ny < 8:
        raise ValueError("grid must be at least 8x8")
    re_nodes = np.linspace(re_min, re_max, nx)
    im_nodes = np.linspace(im_min, im_max, ny)
    Z = (re_nodes[:, None] + 1j * im_nodes[None, :]).ravel()
    M, _, _, status = batch_monodromy(pot, Z, h, cfg)
    delta = (0.5 * (M[:, 0, 0] + M[:, 1, 1])).reshape(nx, ny)
    bad = np.nonzero(status.reshape(nx, ny))
    failures = [(int(i), int(j)) for i, j in zip(*bad)]
    for i, j in failures:
        delta[i, j] = np.nan
    return DiscriminantField(window=(re_min, re_max, im_min, im_max),
                             nx=nx, ny=ny, h=float(h), values=delta,
                             failures=failures, re_nodes=re_nodes,
                             im_nodes=im_nodes, pot=pot, cfg=cfg)


# ---------------------------------------------------------------------------
# marching squares on Im(delta)

# Segment table indexed by the corner sign pattern b0 | b1<<1 | b2<<2 | b3<<3
# (corners counterclockwise from bottom-left).  Entries pair the crossed cell
# edges B, R, T, L; the two ambiguous saddles are resolved at runtime.
_SEG_TABLE = {
    1: [("B", "L")], 2: [("B", "R")], 3: [("L", "R")], 4: [("R", "T")],
    6: [("B", "T")], 7: [("L", "T")], 8: [("L", "T")], 9: [("B", "T")],
    11: [("R", "T")], 12: [("L", "R")], 13: [("B", "R")], 14: [("B", "L")],
}


def _edge_keys(i, j):
    return {"B": ("h", i, j), "T": ("h", i, j + 1),
            "L": ("v", i, j), "R": ("v", i + 1, j)}


def _marching_segments(field: DiscriminantField):
    """Zero level-set segments of Im(delta) as pairs of crossed-edge keys,
    plus interpolated position and Re(delta) for every crossed edge."""
    F = field.values.imag
    R = field.values.real
    s = F >= 0.0
    re, im = field.re_nodes, field.im_nodes
    cross_h = s[:-1, :] != s[1:, :]
    cross_v = s[:, :-1] != s[:, 1:]

    verts: dict[tuple, tuple[complex, float]] = {}
    for i, j in zip(*np.nonzero(cross_h)):
        f0, f1 = F[i, j], F[i + 1, j]
        t = f0 / (f0 - f1)
        z = re[i] + t * (re[i + 1] - re[i]) + 1j * im[j]
        verts[("h", int(i), int(j))] = (complex(z),
                                        float(R[i, j] + t * (R[i + 1, j] - R[i, j])))
    for i, j in zip(*np.nonzero(cross_v)):
        f0, f1 = F[i, j], F[i, j + 1]
        t = f0 / (f0 - f1)
        z = re[i] + 1j * (im[j] + t * (im[j + 1] - im[j]))
        verts[("v", int(i), int(j))] = (complex(z),
                                        float(R[i, j] + t * (R[i, j + 1] - R[i, j])))

    any_cross = (cross_h[:, :-1] | cross_h[:, 1:]
                 | cross_v[:-1, :] | cross_v[1:, :])
    segments = []
    for i, j in np.argwhere(any_cross):
        i, j = int(i), int(j)
        idx = (int(s[i, j]) | int(s[i + 1, j]) << 1
               | int(s[i + 1, j + 1]) << 2 | int(s[i, j + 1]) << 3)
        if idx in (0, 15):
            continue
        if idx in (5, 10):
            center = 0.25 * (F[i, j] + F[i + 1, j] + F[i + 1, j + 1] + F[i, j + 1])
            if idx == 5:
                pairs = [("B", "R"), ("T", "L")] if center >= 0 else [("B", "L"), ("R", "T")]
            else:
                pairs = [("B", "L"), ("R", "T")] if center >= 0 else [("B", "R"), ("T", "L")]
        else:
            pairs = _SEG_TABLE[idx]
        keys = _edge_keys(i, j)
        for a, b in pairs:
            segments.append((keys[a], keys[b]))
    return verts, segments


def _chain_segments(segments):
    """Join edge-key segments into polylines (open paths, then cycles)."""
    adj: dict[tuple, list[tuple[int, tuple]]] = {}
    for n, (a, b) in enumerate(segments):
        adj.setdefault(a, []).append((n, b))
        adj.setdefault(b, []).append((n, a))
    used = [False] * len(segments)

    def walk(start):
        path = [start]
        cur = start
        while True:
            step = next(((n, o) for n, o in adj[cur] if not used[n]), None)
            if step is None:
                return path
            used[step[0]] = True
            cur = step[1]
            path.append(cur)

    paths = []
    for key in sorted(k for k, lst in adj.items() if len(lst) == 1):
        if any(not used[n] for n, _ in adj[key]):
            paths.append(walk(key))
    for key in sorted(adj):
        if any(not used[n] for n, _ in adj[key]):
            paths.append(walk(key))
    return paths


def im_zero_contours(field: DiscriminantField) -> list[np.ndarray]:
    """All Im(delta) = 0 polylines in the window, unfiltered and unrefined
    (display material, not the spectrum)."""
    verts, segments = _marching_segments(field)
    return [np.array([verts[k][0] for k in path])
            for path in _chain_segments(segments)]


# ---------------------------------------------------------------------------
# axis scan

def _axis_scan(field: DiscriminantField, trace_tol: float):
    """Detect the degenerate situation Im(delta) == 0 along the real axis and
    return the spectral intervals found there, or None."""
    re_min, re_max, im_min, im_max = field.window
    if not (im_min <= 0.0 <= im_max):
        return None
    exact = np.nonzero(np.abs(field.im_nodes) < 1e-14)[0]
    if exact.size:
        axis_vals = field.values[:, exact[0]]
    else:
        axis_vals = _delta_batch(field.pot, field.re_nodes.astype(np.complex128),
                                 field.h, field.cfg)
    axis_im = float(np.nanmax(np.abs(axis_vals.imag)))
    neigh_im = 0.0
    above = np.nonzero(field.im_nodes > 1e-14)[0]
    below = np.nonzero(field.im_nodes < -1e-14)[0]
    for j in ([above[0]] if above.size else []) + ([below[-1]] if below.size else []):
        neigh_im = max(neigh_im, float(np.nanmax(np.abs(field.values[:, j].imag))))
    if not (axis_im < trace_tol <= neigh_im):
        return None

    member = np.abs(axis_vals.real) <= 1.0 + trace_tol
    xs = field.re_nodes
    bands = []
    deltas = []
    i = 0
    while i < xs.size:
        if not member[i]:
            i += 1
            continue
        j = i
        while j + 1 < xs.size and member[j + 1]:
            j += 1
        a, da = xs[i], axis_vals[i].real
        b, db = xs[j], axis_vals[j].real
        if i > 0:
            a, da = _bisect_band_edge(field, xs[i - 1], xs[i])
        if j + 1 < xs.size:
            b, db = _bisect_band_edge(field, xs[j + 1], xs[j])
        bands.append((float(a), float(b)))
        deltas.append((float(da), float(db)))
        i = j + 1
    return bands, deltas


def _bisect_band_edge(field, x_out, x_in, iters=50):
    """Bisection for the axis point where |Re delta| crosses 1."""
    lo, hi = float(x_out), float(x_in)  # lo outside the band, hi inside
    val = None
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        val = _delta_batch(field.pot, [mid], field.h, field.cfg)[0]
        if abs(val.real) <= 1.0:
            hi = mid
        else:
            lo = mid
    d = _delta_batch(field.pot, [hi], field.h, field.cfg)[0]
    return hi, d.real


# ---------------------------------------------------------------------------
# Newton refinement of traced vertices

def _refine_vertices(field: DiscriminantField, zs: np.ndarray, trace_tol: float,
                     max_iter: int = 20):
    """Drive Im(delta) to zero at each vertex.

    The discriminant is analytic, so the steepest direction for Im(delta) is
    automatically tangent to the Re(delta) level line; the Newton update is
    dz = -i Im(delta) / delta'(z) with a central finite-difference
    derivative.  Steps are capped at half a cell and rejected unless they
    reduce |Im(delta)|.
    """
    pot, h, cfg = field.pot, field.h, field.cfg
    dre, dim = field.cell
    fd = min(dre, dim) / 100.0
    cap = 0.5 * max(dre, dim)
    max_travel = 1.5 * max(dre, dim)

    z = zs.astype(np.complex128).copy()
    start = z.copy()
    val = _delta_batch(pot, z, h, cfg)
    active = np.abs(val.imag) > 1e-13
    for _ in range(max_iter):
        if not active.any():
            break
        za = z[active]
        dplus = _delta_batch(pot, za + fd, h, cfg)
        dminus = _delta_batch(pot, za - fd, h, cfg)
        dprime = (dplus - dminus) / (2.0 * fd)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = -1j * val[active].imag / dprime
        bad = ~np.isfinite(step)
        step[bad] = 0.0
        mag = np.abs(step)
        shrink = mag > cap
        step[shrink] *= cap / mag[shrink]

        improved = np.zeros(za.size, dtype=bool)
        cur = val[active].copy()
        znew = za.copy()
        for _ in range(3):
            trial = np.where(improved, znew, za + step)
            tval = _delta_batch(pot, trial, h, cfg)
            better = ~improved & (np.abs(tval.imag) < np.abs(cur.imag))
            znew[better] = trial[better]
            cur[better] = tval[better]
            improved |= better
            if improved.all():
                break
            step = 0.5 * step
        idx = np.nonzero(active)[0]
        z[idx] = znew
        val[idx] = cur
        still = improved & (np.abs(cur.imag) > 1e-13)
        still &= np.abs(znew - start[idx]) < max_travel
        nxt = np.zeros_like(active)
        nxt[idx[still]] = True
        active = nxt
    return z, val


def trace_spectrum(field: DiscriminantField, trace_tol: float = 1e-6) -> SpectrumArcs:
    """Extract the spectrum inside the field window as refined polylines.

    Segments are kept only where interpolated Re(delta) lies in [-1, 1];
    after Newton refinement, vertices must satisfy |Im delta| <= trace_tol
    (else they are kept but counted as refinement failures) and
    |Re delta| <= 1 + trace_tol (else they are dropped, splitting the arc).
    When the axis scan triggers, intervals of the real axis are reported in
    axis_bands and axis-hugging contour fragments are suppressed.
    """
    if field.failures:
        raise ValueError(f"field has {len(field.failures)} integration failures")
    dre, dim = field.cell
    verts, segments = _marching_segments(field)
    kept = [(a, b) for a, b in segments
            if abs(verts[a][1]) <= 1.0 and abs(verts[b][1]) <= 1.0]

    scan = _axis_scan(field, trace_tol)
    axis_bands: list[tuple[float, float]] = []
    axis_deltas: list[tuple[float, float]] = []
    if scan is not None:
        # The axis carries the degenerate Im(delta) == 0 line; its content is
        # reported in axis_bands, so contour fragments pinned to the axis are
        # duplicates and get cut before chaining (this also detaches genuine
        # transversal arcs from the axis zigzag at junction cells).
        axis_bands, axis_deltas = scan
        kept = [(a, b) for a, b in kept
                if max(abs(verts[a][0].imag), abs(verts[b][0].imag)) >= 0.75 * dim]
    paths = _chain_segments(kept)

    unique_keys = sorted({k for p in paths for k in p})
    key_pos = {k: n for n, k in enumerate(unique_keys)}
    if unique_keys:
        z0 = np.array([verts[k][0] for k in unique_keys])
        z_ref, d_ref = _refine_vertices(field, z0, trace_tol)
    else:
        z_ref = np.zeros(0, dtype=np.complex128)
        d_ref = np.zeros(0, dtype=np.complex128)

    arcs = []
    refine_failures = 0
    for p in paths:
        run: list[tuple[complex, float]] = []
        for k in p:
            n = key_pos[k]
            d = d_ref[n]
            if not np.isfinite(d) or abs(d.real) > 1.0 + trace_tol:
                if len(run) >= 2:
                    arcs.append(run)
                run = []
                continue
            if abs(d.imag) > trace_tol:
                refine_failures += 1
            run.append((complex(z_ref[n]), float(np.clip(d.real, -1.0, 1.0))))
        if len(run) >= 2:
            arcs.append(run)
    return SpectrumArcs(arcs=arcs, h=field.h, axis_bands=axis_bands,
                        cell_size=(dre, dim), refine_failures=refine_failures,
                        axis_band_deltas=axis_deltas)


# ---------------------------------------------------------------------------
# scalar root finding on the discriminant

def _newton_on_delta(pot, h, seeds, g_and_slope, cfg, newton_tol,
                     max_iter=60):
    """Vectorized complex Newton for scalar conditions g(delta(z)) = 0.

    g_and_slope maps a delta array to (g, dg/ddelta); the z-derivative of
    delta comes from a central finite difference.  Returns (roots, residuals,
    converged).
    """
    z = np.asarray(seeds, dtype=np.complex128).copy()
    rtol = min(cfg.richardson_tol, newton_tol * 0.05)
    fd = 1e-6 * (1.0 + np.abs(z))
    val = _delta_batch(pot, z, h, cfg, rtol=rtol)
    g, slope = g_and_slope(val)
    res = np.abs(g)
    conv = res <= newton_tol
    for _ in range(max_iter):
        active = ~conv & np.isfinite(res)
        if not active.any():
            break
        za = z[active]
        fda = fd[active]
        dplus = _delta_batch(pot, za + fda, h, cfg, rtol=rtol)
        dminus = _delta_batch(pot, za - fda, h, cfg, rtol=rtol)
        dprime = (dplus - dminus) / (2.0 * fda)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = -g[active] / (slope[active] * dprime)
        step[~np.isfinite(step)] = np.nan
        cap = 0.5 * (1.0 + np.abs(za))
        mag = np.abs(step)
        over = mag > cap
        step[over] *= cap[over] / mag[over]
        znew = za + step
        vnew = _delta_batch(pot, znew, h, cfg, rtol=rtol)
        gnew, snew = g_and_slope(vnew)
        z[active] = znew
        g[active] = gnew
        slope[active] = snew
        res[active] = np.abs(gnew)
        conv = res <= newton_tol
    return z, res, conv


def band_edges(pot: PeriodicPotential, h: float, seeds, newton_tol: float = 1e-10,
               cfg: IntegratorConfig = DEFAULT_CONFIG,
               dedup_tol: float = 1e-6) -> list[complex]:
    """Points with delta^2 = 1 (double Floquet multiplier), from Newton on
    each seed; converged roots are deduplicated within dedup_tol."""
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.complex128))
    if seeds.size == 0:
        raise ValueError("seeds must be nonempty")
    roots, _, conv = _newton_on_delta(
        pot, h, seeds, lambda d: (d * d - 1.0, 2.0 * d), cfg, newton_tol)
    out: list[complex] = []
    for r in roots[conv]:
        if all(abs(r - u) > dedup_tol for u in out):
            out.append(complex(r))
    return out


def bloch_eigenvalues(pot: PeriodicPotential, h: float, xi: float, seeds,
                      newton_tol: float = 1e-10,
                      cfg: IntegratorConfig = DEFAULT_CONFIG,
                      dedup_tol: float = 1e-6) -> list[BlochEigenvalue]:
    """Eigenvalues of the periodized operator at Bloch frequency xi, i.e.
    roots of delta(z) = cos(xi)."""
    if not (-np.pi < xi <= np.pi):
        raise ValueError("xi must lie in (-pi, pi]")
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.complex128))
    target = np.cos(xi)
    roots, res, conv = _newton_on_delta(
        pot, h, seeds, lambda d: (d - target, np.ones_like(d)), cfg, newton_tol)
    out: list[BlochEigenvalue] = []
    for r, e in zip(roots[conv], res[conv]):
        if all(abs(r - u.z) > dedup_tol for u in out):
            out.append(BlochEigenvalue(z=complex(r), xi=float(xi), residual=float(e)))
    return out


def bloch_eigenfunction(pot: PeriodicPotential, h: float, z: complex,
                        cfg: IntegratorConfig = DEFAULT_CONFIG,
                        n_samples: int = 256, tol: float = 1e-6) -> BlochWave:
    """Bounded solution at a spectral point, sampled over one period.

    The period-map eigenvector for the unimodular multiplier e^{i xi} seeds
    the integration; the result is normalized to unit L2(0,1) norm.  Band
    edges (coincident multipliers) are rejected as defective.
    """
    res = integrate_monodromy(pot, z, h, cfg)
    if abs(res.delta) > 1.0 + tol:
        raise NotOnSpectrum(f"delta({z}) = {res.delta} is outside [-1, 1]")
    r1, r2 = res.multipliers
    if abs(r1 - r2) < 1e-8:
        raise DefectiveMonodromy(f"multipliers coincide at z={z}")
    xi = float(np.angle(r1))
    M = res.M
    v_a = np.array([M[0, 1], r1 - M[0, 0]], dtype=np.complex128)
    v_b = np.array([r1 - M[1, 1], M[1, 0]], dtype=np.complex128)
    v = v_a if np.linalg.norm(v_a) >= np.linalg.norm(v_b) else v_b
    v = v / np.linalg.norm(v)
    Y = fundamental_samples(pot, z, h, res.steps_used, n_samples)
    psi = Y @ v
    xs = np.arange(n_samples + 1) / n_samples
    nrm = np.sqrt(np.trapezoid(np.abs(psi[:, 0]) ** 2 + np.abs(psi[:, 1]) ** 2, xs))
    psi = psi / nrm
    return BlochWave(xi=xi, x=xs, psi1=psi[:, 0], psi2=psi[:, 1])


def verify_imag_identity(pot: PeriodicPotential, h: float, z: complex,
                         cfg: IntegratorConfig = DEFAULT_CONFIG,
                         n_samples: int = 256, tol: float = 1e-6) -> ImagIdentityCheck:
    """Check Im z against both eigenfunction inner-product expressions,
    -Re<psi1, q psi2>/<psi1, psi1> and Re<p psi1, psi2>/<psi2, psi2>.

    The integrands are periodic, so the trapezoid rule over the stored
    samples converges spectrally.
    """
    wave = bloch_eigenfunction(pot, h, z, cfg, n_samples, tol)
    p, q = pot.eval_pq(wave.x)

    def inner(f, g):
        return np.trapezoid(np.conj(f) * g, wave.x)

    rhs1 = float(-inner(wave.psi1, q * wave.psi2).real
                 / inner(wave.psi1, wave.psi1).real)
    rhs2 = float(inner(p * wave.psi1, wave.psi2).real
                 / inner(wave.psi2, wave.psi2).real)
    lhs = float(np.imag(z))
    err = max(abs(lhs - rhs1), abs(lhs - rhs2)) / max(1.0, abs(lhs))
    return ImagIdentityCheck(lhs=lhs, rhs1=rhs1, rhs2=rhs2, max_rel_err=float(err))
