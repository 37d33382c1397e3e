"""Enclosure constants for the spectrum and certification of traced arcs.

Two bounds constrain every spectral point z: a horizontal strip
|Im z| <= sqrt(sup|p| sup|q|), and a hyperbolic region
|Re z| |Im z| <= (h/2)(sup|p'| + sup|q'|) + sup|conj(pq) - pq| / 4.
When the product pq is real the hyperbolic constant sharpens to
h * sqrt(sup|p'| sup|q'|) / 2 = h * rate, which shrinks linearly in h and
forces the spectrum into any neighborhood of the cross
(real axis union the strip's imaginary segment) once h < delta^2 / (2 rate).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MismatchedH
from .potentials import PotentialNorms, SymmetryFlags
from .spectrum import SpectrumArcs


@dataclass(frozen=True)
class EnclosureParams:
    """All bound constants for one potential at one h."""

    strip_height: float
    hyperbola_bound: float
    hyperbola_bound_sharp: float | None
    confinement_rate: float
    h: float
    pq_real: bool

    @property
    def active_hyperbola_bound(self) -> float:
        """The sharp constant when pq is real, the generic one otherwise."""
        if self.pq_real and self.hyperbola_bound_sharp is not None:
            return self.hyperbola_bound_sharp
        return self.hyperbola_bound


@dataclass(frozen=True)
class ConfinementReport:
    """Aggregate violations of the enclosure bounds over traced points."""

    n_points: int
    max_strip_violation: float
    max_hyperbola_violation: float
    max_cross_distance: float
    h0_for_delta: float
    strip_ok: bool
    hyperbola_ok: bool
    h: float
    delta: float
    report_tol: float

    @property
    def passed(self) -> bool:
        return self.strip_ok and self.hyperbola_ok

    def to_dict(self) -> dict:
        return {
            "n_points": self.n_points,
            "max_strip_violation": self.max_strip_violation,
            "max_hyperbola_violation": self.max_hyperbola_violation,
            "max_cross_distance": self.max_cross_distance,
            "h0_for_delta": self.h0_for_delta,
            "strip_ok": self.strip_ok,
            "hyperbola_ok": self.hyperbola_ok,
            "h": self.h,
            "delta": self.delta,
            "report_tol": self.report_tol,
            "passed": self.passed,
        }


def enclosure_params(norms: PotentialNorms, flags: SymmetryFlags,
                     h: float) -> EnclosureParams:
    """Assemble every enclosure constant from the potential norms."""
    if h <= 0:
        raise ValueError("h must be positive")
    strip = float(np.sqrt(norms.sup_p * norms.sup_q))
    hyper = 0.5 * h * (norms.sup_dp + norms.sup_dq) + 0.25 * norms.sup_pq_defect
    rate = 0.5 * float(np.sqrt(norms.sup_dp * norms.sup_dq))
    sharp = h * rate if flags.pq_real else None
    return EnclosureParams(strip_height=strip, hyperbola_bound=float(hyper),
                           hyperbola_bound_sharp=sharp, confinement_rate=rate,
                           h=float(h), pq_real=flags.pq_real)


def in_enclosure(z: complex, params: EnclosureParams) -> bool:
    """Membership in the strip-and-hyperbola enclosure region (the sharp
    variant whenever pq is real)."""
    x, y = np.real(z), np.imag(z)
    return bool(abs(y) <= params.strip_height
                and abs(x) * abs(y) <= params.active_hyperbola_bound)


def cross_distance(z, strip_height: float):
    """Euclidean distance to the cross: real axis union the imaginary
    segment i[-strip_height, strip_height]."""
    z = np.asarray(z, dtype=np.complex128)
    to_axis = np.abs(z.imag)
    to_segment = np.hypot(z.real, np.maximum(np.abs(z.imag) - strip_height, 0.0))
    out = np.minimum(to_axis, to_segment)
    return float(out) if out.ndim == 0 else out


def h_threshold(delta: float, rate: float) -> float:
    """Largest h guaranteeing confinement to the delta-neighborhood of the
    cross: delta^2 / (2 rate).  A zero rate (constant p or q with real pq)
    means confinement at every h, returned as +inf."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if rate < 0:
        raise ValueError("rate must be nonnegative")
    if rate == 0.0:
        return float("inf")
    return delta * delta / (2.0 * rate)


def certify(arcs: SpectrumArcs, params: EnclosureParams, delta: float,
            report_tol: float = 1e-6) -> ConfinementReport:
    """Evaluate the enclosure bounds on every traced point.

    A bound passes when each pointwise violation stays below
    report_tol * (1 + |z|^2); the quadratic scale absorbs tracing error
    amplified by the hyperbola product, which is first order in the vertex
    error times |z|.
    """
    if arcs.h != params.h:
        raise MismatchedH(f"arcs at h={arcs.h}, params at h={params.h}")
    pts = arcs.all_points()
    h0 = h_threshold(delta, params.confinement_rate)
    if pts.size == 0:
        return ConfinementReport(0, 0.0, 0.0, 0.0, h0, True, True,
                                 params.h, float(delta), report_tol)
    ax, ay = np.abs(pts.real), np.abs(pts.imag)
    tol_scale = report_tol * (1.0 + np.abs(pts) ** 2)
    strip_viol = np.maximum(ay - params.strip_height, 0.0)
    hyper_viol = np.maximum(ax * ay - params.active_hyperbola_bound, 0.0)
    return ConfinementReport(
        n_points=int(pts.size),
        max_strip_violation=float(strip_viol.max()),
        max_hyperbola_violation=float(hyper_viol.max()),
        max_cross_distance=float(cross_distance(pts, params.strip_height).max()),
        h0_for_delta=h0,
        strip_ok=bool((strip_viol <= tol_scale).all()),
        hyperbola_ok=bool((hyper_viol <= tol_scale).all()),
        h=params.h,
        delta=float(delta),
        report_tol=report_tol,
    )


def enclosure_boundary(params: EnclosureParams, window, n: int = 256):
    """Boundary curves of the enclosure region clipped to a window, as
    (label, polyline) pairs for plotting."""
    re_min, re_max, im_min, im_max = window
    curves: list[tuple[str, np.ndarray]] = []
    s = params.strip_height
    for sign in (1.0, -1.0):
        y = sign * s
        if im_min <= y <= im_max:
            xs = np.linspace(re_min, re_max, 2)
            curves.append(("strip", xs + 1j * y))
    b = params.active_hyperbola_bound
    if b > 0:
        ymax = min(im_max, s) if s > 0 else im_max
        for sx in (1.0, -1.0):
            for sy in (1.0, -1.0):
                x_lo = b / max(abs(ymax), 1e-12)
                x_hi = max(abs(re_min), abs(re_max))
                if x_lo >= x_hi:
                    continue
                xs = np.geomspace(x_lo, x_hi, n)
                zs = sx * xs + 1j * sy * (b / xs)
                keep = ((zs.real >= re_min) & (zs.real <= re_max)
                        & (zs.imag >= im_min) & (zs.imag <= im_max))
                if keep.any():
                    curves.append(("hyperbola", zs[keep]))
    if im_min <= 0 <= im_max:
        curves.append(("cross", np.linspace(re_min, re_max, 2).astype(complex)))
    if re_min <= 0 <= re_max:
        lo, hi = max(im_min, -s), min(im_max, s)
        if lo < hi:
            curves.append(("cross", 1j * np.linspace(lo, hi, 2)))
    return curves
