"""Closed-form reference solution for constant potentials.

For p, q constant the first-order system has constant coefficients, so the
fundamental matrix, monodromy, and discriminant are elementary functions of
the characteristic root r(z) = sqrt(z^2 - p0*q0).  Exported quantities are
branch-free: they depend on r only through even functions (cos, sin(r)/r).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrame


@dataclass(frozen=True)
class ConstantModel:
    """Constant potential pair with its scaling parameter h."""

    p0: complex
    q0: complex
    h: float

    @property
    def pq_product(self) -> complex:
        return self.p0 * self.q0


def from_potential(pot, h: float) -> ConstantModel:
    if pot.kind != "constant":
        raise ValueError("closed forms exist only for constant potentials")
    return ConstantModel(pot.p0, pot.q0, float(h))


def char_root(model: ConstantModel, z):
    """Principal branch of sqrt(z^2 - p0*q0); the system eigenvalues are
    +-i*r/h."""
    z = np.asarray(z, dtype=np.complex128)
    return np.sqrt(z * z - model.pq_product)


def discriminant(model: ConstantModel, z):
    """Half-trace of the monodromy: cos(r(z)/h).  Even in r, so the square
    root branch is immaterial."""
    return np.cos(char_root(model, z) / model.h)


def _sin_over(u):
    """sin(u)/u with a series fallback near u = 0."""
    u = np.asarray(u, dtype=np.complex128)
    small = np.abs(u) < 1e-6
    safe = np.where(small, 1.0, u)
    u2 = u * u
    return np.where(small, 1.0 - u2 / 6.0 + u2 * u2 / 120.0, np.sin(safe) / safe)


def monodromy_diag(model: ConstantModel, z: complex) -> np.ndarray:
    """Monodromy in the eigenvector frame: diag(e^{ir/h}, e^{-ir/h})."""
    r = complex(char_root(model, z))
    e = np.exp(1j * r / model.h)
    return np.array([[e, 0.0], [0.0, 1.0 / e]], dtype=np.complex128)


def monodromy(model: ConstantModel, z: complex) -> np.ndarray:
    """Canonical monodromy (value at x=1 of the solution starting from the
    identity): cos(r/h) I + sin(r/h)/r * A0, with A0 the constant coefficient
    matrix.  Valid for every p0, q0, z including the degenerate r = 0."""
    r = complex(char_root(model, z))
    u = r / model.h
    c = complex(np.cos(u))
    s = complex(_sin_over(u)) / model.h  # sin(r/h)/r
    return np.array(
        [[c - 1j * z * s, model.q0 * s],
         [model.p0 * s, c + 1j * z * s]], dtype=np.complex128)


def eigenvector_frame(model: ConstantModel, z: complex) -> np.ndarray:
    """Eigenvector matrix of the constant coefficient matrix.

    The off-diagonal entries are i(z + r)/q0 and -i(z + r)/p0; when z + r
    cancels catastrophically they are rewritten through the opposite branch
    via (z + r)(z - r) = p0*q0.
    """
    if model.p0 == 0 or model.q0 == 0:
        raise DegenerateFrame(z, "eigenvector frame undefined for a vanishing entry")
    r = complex(char_root(model, z))
    plus, minus = z + r, z - r
    if max(abs(plus), abs(minus)) == 0.0:
        raise DegenerateFrame(z, "both branch combinations vanish")
    if abs(plus) >= abs(minus):
        top = -1j * plus / model.p0
        bot = 1j * plus / model.q0
    else:
        top = -1j * model.q0 / minus
        bot = 1j * model.p0 / minus
    return np.array([[1.0, top], [bot, 1.0]], dtype=np.complex128)


def fundamental(model: ConstantModel, x: float, z: complex) -> np.ndarray:
    """A fundamental matrix solution at position x.

    For p0, q0 both nonzero this is the eigenvector frame times the diagonal
    exponential; for a vanishing entry the system is triangular and the
    canonical (identity at x=0) solution is returned instead.
    """
    if model.p0 == 0 or model.q0 == 0:
        ph = np.exp(-1j * z * x / model.h)
        off = x / model.h * complex(_sin_over(z * x / model.h))
        if model.q0 == 0 and model.p0 == 0:
            return np.array([[ph, 0.0], [0.0, 1.0 / ph]], dtype=np.complex128)
        if model.q0 == 0:
            return np.array([[ph, 0.0], [model.p0 * off, 1.0 / ph]],
                            dtype=np.complex128)
        return np.array([[ph, model.q0 * off], [0.0, 1.0 / ph]],
                        dtype=np.complex128)
    r = complex(char_root(model, z))
    e = np.exp(1j * r * x / model.h)
    frame = eigenvector_frame(model, z)
    return frame @ np.array([[e, 0.0], [0.0, 1.0 / e]], dtype=np.complex128)


def spectrum_membership(model: ConstantModel, z, tol: float = 1e-9):
    """Whether cos(r(z)/h) lies in [-1, 1] up to tol (the closed-form
    description of the spectrum)."""
    d = discriminant(model, z)
    return (np.abs(d.imag) <= tol) & (np.abs(d.real) <= 1.0 + tol)
