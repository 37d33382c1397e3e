"""Structural symmetry checks for period maps and traced spectra.

Real potentials force M(z) = conj(M(-conj z)); even potentials force
M(z) = s3 M(-z)^{-1} s3 and odd ones M(z) = M(-z)^{-1}.  At the spectrum
level those become reflection symmetries across the imaginary axis
(z -> -conj z) and through the origin (z -> -z).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyArcs
from .potentials import PeriodicPotential, SymmetryFlags
from .spectrum import SpectrumArcs
from .transfer import DEFAULT_CONFIG, IntegratorConfig, batch_monodromy


class SymmetryRelation(Enum):
    REAL_CONJ = "real_conj"
    EVEN_CONJ = "even_conj"
    ODD_CONJ = "odd_conj"
    SPECTRUM_REFLECT_REAL = "spectrum_reflect_real"
    SPECTRUM_REFLECT_IMAG = "spectrum_reflect_imag"


@dataclass(frozen=True)
class SymmetryCheckResult:
    relation: SymmetryRelation
    max_defect: float
    n_samples: int


def _monodromies(pot, zs, h, cfg):
    M, _, _, status = batch_monodromy(pot, zs, h, cfg)
    if (status != 0).any():
        bad = zs[status != 0][0]
        raise RuntimeError(f"monodromy integration failed at z={bad}")
    return M


def _inverse(M):
    det = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
    inv = np.empty_like(M)
    inv[:, 0, 0] = M[:, 1, 1]
    inv[:, 1, 1] = M[:, 0, 0]
    inv[:, 0, 1] = -M[:, 0, 1]
    inv[:, 1, 0] = -M[:, 1, 0]
    return inv / det[:, None, None]


def _rel_defect(A, B):
    diff = np.linalg.norm((A - B).reshape(A.shape[0], -1), axis=1)
    base = np.linalg.norm(A.reshape(A.shape[0], -1), axis=1)
    return float((diff / base).max())


def check_monodromy_symmetry(pot: PeriodicPotential, flags: SymmetryFlags,
                             h: float, z_samples,
                             cfg: IntegratorConfig = DEFAULT_CONFIG
                             ) -> list[SymmetryCheckResult]:
    """Measure the period-map relations implied by the detected symmetries
    at the given sample points (relative Frobenius defect)."""
    if not (flags.is_real or flags.is_even or flags.is_odd):
        raise ValueError("no symmetry applies to this potential")
    zs = np.asarray(z_samples, dtype=np.complex128).ravel()
    if zs.size == 0:
        raise ValueError("z_samples must be nonempty")
    out = []
    M_here = _monodromies(pot, zs, h, cfg)
    if flags.is_real:
        M_ref = _monodromies(pot, -np.conj(zs), h, cfg)
        out.append(SymmetryCheckResult(SymmetryRelation.REAL_CONJ,
                                       _rel_defect(M_here, np.conj(M_ref)),
                                       zs.size))
    if flags.is_even or flags.is_odd:
        M_neg_inv = _inverse(_monodromies(pot, -zs, h, cfg))
        if flags.is_even:
            flipped = M_neg_inv.copy()
            flipped[:, 0, 1] = -M_neg_inv[:, 0, 1]
            flipped[:, 1, 0] = -M_neg_inv[:, 1, 0]
            out.append(SymmetryCheckResult(SymmetryRelation.EVEN_CONJ,
                                           _rel_defect(M_here, flipped),
                                           zs.size))
        if flags.is_odd:
            out.append(SymmetryCheckResult(SymmetryRelation.ODD_CONJ,
                                           _rel_defect(M_here, M_neg_inv),
                                           zs.size))
    return out


def _one_sided_hausdorff(pts: np.ndarray, reflected: np.ndarray) -> float:
    tree = cKDTree(np.column_stack([reflected.real, reflected.imag]))
    d, _ = tree.query(np.column_stack([pts.real, pts.imag]))
    return float(d.max())


def check_spectrum_symmetry(arcs: SpectrumArcs, flags: SymmetryFlags
                            ) -> list[SymmetryCheckResult]:
    """One-sided Hausdorff distance between traced points and their expected
    reflections; the natural pass threshold is a couple of grid cells."""
    pts = arcs.all_points()
    if pts.size == 0:
        raise EmptyArcs("no traced points to check")
    out = []
    if flags.is_real:
        out.append(SymmetryCheckResult(
            SymmetryRelation.SPECTRUM_REFLECT_REAL,
            _one_sided_hausdorff(pts, -np.conj(pts)), pts.size))
    if flags.is_even or flags.is_odd:
        out.append(SymmetryCheckResult(
            SymmetryRelation.SPECTRUM_REFLECT_IMAG,
            _one_sided_hausdorff(pts, -pts), pts.size))
    return out
