"""One-periodic potential pairs (p, q) and their norm/symmetry services.

Potentials are restricted to representations with exactly computable
derivatives and sup-norms: constants, trigonometric polynomials, and
band-limited interpolants of uniform samples.  All three evaluate through a
common finite Fourier-mode form, so 1-periodicity is exact by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TWO_PI = 2.0 * np.pi


def _golden_max(f, a: float, b: float, iters: int = 60) -> float:
    """Golden-section maximum of a scalar function on [a, b]."""
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = b - inv_phi * (b - a)
    x2 = a + inv_phi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv_phi * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv_phi * (b - a)
            f1 = f(x1)
    return max(f1, f2)


class _ModeSum:
    """Finite Fourier series sum_k c_k e^{2 pi i k x} plus an optional
    Nyquist cosine term c_ny * cos(pi N x) (needed so an even-N sample grid
    is reproduced exactly by its band-limited interpolant)."""

    __slots__ = ("ks", "cs", "ny_order", "ny_coef")

    def __init__(self, ks, cs, ny_order=0, ny_coef=0.0 + 0.0j):
        self.ks = np.asarray(ks, dtype=np.int64)
        self.cs = np.asarray(cs, dtype=np.complex128)
        self.ny_order = int(ny_order)
        self.ny_coef = complex(ny_coef)

    def eval(self, x):
        x = np.asarray(x, dtype=np.float64)
        phase = np.exp(2j * np.pi * np.multiply.outer(x, self.ks))
        out = phase @ self.cs
        if self.ny_order:
            out = out + self.ny_coef * np.cos(np.pi * self.ny_order * x)
        return out

    def eval_deriv(self, x):
        x = np.asarray(x, dtype=np.float64)
        phase = np.exp(2j * np.pi * np.multiply.outer(x, self.ks))
        out = phase @ (2j * np.pi * self.ks * self.cs)
        if self.ny_order:
            w = np.pi * self.ny_order
            out = out - self.ny_coef * w * np.sin(w * x)
        return out

    @staticmethod
    def from_samples(samples) -> "_ModeSum":
        samples = np.asarray(samples, dtype=np.complex128)
        n = samples.size
        coef = np.fft.fft(samples) / n
        if n % 2 == 0:
            half = n // 2
            ks = np.concatenate([np.arange(half), np.arange(-half + 1, 0)])
            cs = np.concatenate([coef[:half], coef[half + 1:]])
            return _ModeSum(ks, cs, ny_order=n, ny_coef=coef[half])
        half = (n - 1) // 2
        ks = np.concatenate([np.arange(half + 1), np.arange(-half, 0)])
        return _ModeSum(ks, coef)


class PeriodicPotential:
    """A one-periodic complex pair (p, q) on the unit period.

    Construct with :meth:`constant`, :meth:`fourier`, or :meth:`from_samples`.
    Instances are immutable; evaluation is pure and thread-safe.
    """

    KINDS = ("constant", "fourier", "grid")

    def __init__(self, kind: str, p_modes: _ModeSum, q_modes: _ModeSum):
        if kind not in self.KINDS:
            raise ValueError(f"unknown potential kind {kind!r}")
        self.kind = kind
        self._p = p_modes
        self._q = q_modes
        self._norm_cache: dict[int, PotentialNorms] = {}

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, p0: complex, q0: complex) -> "PeriodicPotential":
        pot = cls("constant", _ModeSum([0], [p0]), _ModeSum([0], [q0]))
        pot.p0 = complex(p0)
        pot.q0 = complex(q0)
        return pot

    @classmethod
    def fourier(cls, p_modes, q_modes) -> "PeriodicPotential":
        """Trigonometric polynomials from {wavenumber: coefficient} maps or
        iterables of (k, c) pairs."""
        return cls("fourier", cls._build_modes(p_modes), cls._build_modes(q_modes))

    @classmethod
    def from_samples(cls, p_samples, q_samples) -> "PeriodicPotential":
        """Band-limited interpolants of uniform samples on [0, 1)."""
        p_samples = np.asarray(p_samples, dtype=np.complex128)
        q_samples = np.asarray(q_samples, dtype=np.complex128)
        if p_samples.size == 0 or q_samples.size == 0:
            raise ValueError("sample grid is empty")
        return cls("grid", _ModeSum.from_samples(p_samples), _ModeSum.from_samples(q_samples))

    @staticmethod
    def _build_modes(modes) -> _ModeSum:
        if isinstance(modes, dict):
            items = sorted(modes.items())
        else:
            items = sorted((int(k), complex(c)) for k, c in modes)
        if not items:
            return _ModeSum([0], [0.0])
        ks = [k for k, _ in items]
        cs = [c for _, c in items]
        return _ModeSum(ks, cs)

    # -- evaluation --------------------------------------------------------

    def eval_pq(self, x):
        """Values (p(x), q(x)); x may be a scalar or array, reduced mod 1
        implicitly by the trigonometric form."""
        return self._p.eval(x), self._q.eval(x)

    def eval_dpq(self, x):
        """Derivatives (p'(x), q'(x)), exact for the mode representation."""
        return self._p.eval_deriv(x), self._q.eval_deriv(x)

    def eval_A(self, x: float, z: complex) -> np.ndarray:
        """Coefficient matrix [[-iz, q(x)], [p(x), iz]] of the first-order
        system; trace is exactly zero."""
        p, q = self.eval_pq(x)
        return np.array([[-1j * z, q], [p, 1j * z]], dtype=np.complex128)

    # -- norms and symmetry flags -------------------------------------------

    def sup_norms(self, n_samples: int = 4096) -> "PotentialNorms":
        if n_samples < 16:
            raise ValueError("n_samples must be at least 16")
        cached = self._norm_cache.get(n_samples)
        if cached is None:
            cached = _compute_norms(self, n_samples)
            self._norm_cache[n_samples] = cached
        return cached


@dataclass(frozen=True)
class PotentialNorms:
    """Sup-norms of p, q, their derivatives, and the determinant-reality
    defect sup|conj(pq) - pq| = 2 sup|Im(pq)|."""

    sup_p: float
    sup_q: float
    sup_dp: float
    sup_dq: float
    sup_pq_defect: float
    n_samples: int


@dataclass(frozen=True)
class SymmetryFlags:
    """Structural properties the symmetry and bounds checks branch on."""

    is_real: bool
    is_even: bool
    is_odd: bool
    pq_real: bool
    tol: float


def _refined_sup(fun, xs, vals) -> float:
    """Dense-sample maximum of |fun| followed by one golden-section pass
    around the winning sample."""
    i = int(np.argmax(vals))
    width = xs[1] - xs[0] if xs.size > 1 else 1.0
    lo, hi = xs[i] - width, xs[i] + width
    return max(float(vals[i]), _golden_max(fun, lo, hi))


def _compute_norms(pot: PeriodicPotential, n_samples: int) -> PotentialNorms:
    if pot.kind == "constant":
        pq = pot.p0 * pot.q0
        return PotentialNorms(abs(pot.p0), abs(pot.q0), 0.0, 0.0,
                              2.0 * abs(pq.imag), n_samples)
    xs = np.arange(n_samples) / n_samples
    pv, qv = pot.eval_pq(xs)
    dpv, dqv = pot.eval_dpq(xs)
    sup_p = _refined_sup(lambda x: abs(pot.eval_pq(x)[0]), xs, np.abs(pv))
    sup_q = _refined_sup(lambda x: abs(pot.eval_pq(x)[1]), xs, np.abs(qv))
    sup_dp = _refined_sup(lambda x: abs(pot.eval_dpq(x)[0]), xs, np.abs(dpv))
    sup_dq = _refined_sup(lambda x: abs(pot.eval_dpq(x)[1]), xs, np.abs(dqv))
    def im_pq(x):
        p, q = pot.eval_pq(x)
        return abs((p * q).imag)
    defect = 2.0 * _refined_sup(im_pq, xs, np.abs((pv * qv).imag))
    return PotentialNorms(sup_p, sup_q, sup_dp, sup_dq, defect, n_samples)


def detect_symmetries(pot: PeriodicPotential, norms: PotentialNorms,
                      tol: float = 1e-10) -> SymmetryFlags:
    """Detect realness, parity, and reality of the product pq by sampling.

    All comparisons are relative to scale = 1 + sup_p * sup_q.  False
    negatives only disable optional checks; the tolerance is kept tight so
    false positives (which would assert wrong symmetries) cannot occur for
    generic potentials.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    scale = 1.0 + norms.sup_p * norms.sup_q
    xs = np.arange(norms.n_samples) / norms.n_samples
    pv, qv = pot.eval_pq(xs)
    pr, qr = pot.eval_pq(-xs)
    is_real = max(np.abs(pv.imag).max(), np.abs(qv.imag).max()) <= tol * scale
    is_even = max(np.abs(pv - pr).max(), np.abs(qv - qr).max()) <= tol * scale
    is_odd = max(np.abs(pv + pr).max(), np.abs(qv + qr).max()) <= tol * scale
    pq_real = norms.sup_pq_defect <= tol * scale
    return SymmetryFlags(bool(is_real), bool(is_even), bool(is_odd),
                         bool(pq_real), tol)


def eval_pq(pot: PeriodicPotential, x):
    return pot.eval_pq(x)


def eval_A(pot: PeriodicPotential, x: float, z: complex) -> np.ndarray:
    return pot.eval_A(x, z)


def sup_norms(pot: PeriodicPotential, n_samples: int = 4096) -> PotentialNorms:
    return pot.sup_norms(n_samples)
