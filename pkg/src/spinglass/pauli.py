"""Exact Pauli-string algebra with matrix-free application to state vectors.

An n-site Pauli string is encoded as

    i^phase_exp * (P_1 x P_2 x ... x P_n),        P_j in {I, sx, sy, sz},

where the per-site factor is stored as an axis in {0, 1, 2, 3} (0 = identity,
1..3 = the x/y/z Pauli matrices) and the global phase as an exponent of i
modulo 4.  This keeps products, traces and Hermiticity checks exact integer
arithmetic; no floating point enters until a string is applied to a vector.

Basis convention: site 1 is the most significant bit of the computational
basis index, i.e. index b = sum_j b_j * 2^(n-j).  Dense materialisation via
repeated Kronecker products I x ... x sigma x ... x I then matches this
ordering factor for factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PauliString",
    "identity",
    "single_site",
    "from_axes",
    "multiply",
    "trace",
    "apply",
    "exp_apply",
    "dense",
]

# sa*sb = delta_ab I + i eps_abc sc, tabulated as (result axis, phase_exp increment)
_PRODUCT = {
    (1, 2): (3, 1),
    (2, 3): (1, 1),
    (3, 1): (2, 1),
    (2, 1): (3, 3),
    (3, 2): (1, 3),
    (1, 3): (2, 3),
}

_SIGMA = {
    0: np.eye(2, dtype=np.complex128),
    1: np.array([[0, 1], [1, 0]], dtype=np.complex128),
    2: np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    3: np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


@dataclass(frozen=True)
class PauliString:
    """Immutable Pauli string: i^phase_exp times a tensor product of factors.

    Attributes:
        n_sites: number of tensor factors (>= 1)
        axes: length-n tuple with entries in {0,1,2,3}
        phase_exp: exponent of i, reduced mod 4
    """

    n_sites: int
    axes: tuple[int, ...]
    phase_exp: int = 0

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError(f"n_sites must be >= 1, got {self.n_sites}")
        if len(self.axes) != self.n_sites:
            raise ValueError("axes length must equal n_sites")
        if any(a not in (0, 1, 2, 3) for a in self.axes):
            raise ValueError(f"axes entries must be in 0..3, got {self.axes}")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    @property
    def is_hermitian(self) -> bool:
        # each factor is Hermitian, so only the phase can spoil it
        return self.phase_exp in (0, 2)

    @property
    def is_identity_axes(self) -> bool:
        return all(a == 0 for a in self.axes)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __repr__(self):
        letters = "".join("IXYZ"[a] for a in self.axes)
        pre = {0: "+", 1: "+i*", 2: "-", 3: "-i*"}[self.phase_exp]
        return f"PauliString({pre}{letters})"


def identity(n_sites: int) -> PauliString:
    return PauliString(n_sites, (0,) * n_sites, 0)


def single_site(n_sites: int, site: int, axis: int) -> PauliString:
    """Pauli sigma^(axis) acting on `site` (1-based), identity elsewhere."""
    if not 1 <= site <= n_sites:
        raise ValueError(f"site {site} out of range 1..{n_sites}")
    axes = [0] * n_sites
    axes[site - 1] = axis
    return PauliString(n_sites, tuple(axes), 0)


def from_axes(axes, phase_exp: int = 0) -> PauliString:
    axes = tuple(int(a) for a in axes)
    return PauliString(len(axes), axes, phase_exp)


def multiply(p: PauliString, q: PauliString) -> PauliString:
    """Exact product p*q with accumulated i^k phase."""
    if p.n_sites != q.n_sites:
        raise ValueError(
            f"site-count mismatch: {p.n_sites} vs {q.n_sites}"
        )
    phase = p.phase_exp + q.phase_exp
    axes = []
    for a, b in zip(p.axes, q.axes):
        if a == 0:
            axes.append(b)
        elif b == 0:
            axes.append(a)
        elif a == b:
            axes.append(0)
        else:
            c, dk = _PRODUCT[(a, b)]
            axes.append(c)
            phase += dk
    return PauliString(p.n_sites, tuple(axes), phase % 4)


def trace(p: PauliString) -> complex:
    """Exact trace: i^phase_exp * 2^n if all factors are identity, else 0.

    Computed in integer arithmetic; the returned complex is exact for
    n_sites <= 52.
    """
    if not p.is_identity_axes:
        return complex(0, 0)
    mag = 2**p.n_sites
    re, im = ((mag, 0), (0, mag), (-mag, 0), (0, -mag))[p.phase_exp]
    return complex(re, im)


def _masks(p: PauliString) -> tuple[int, int, int]:
    """(flip, y, z) bit masks under the site-1-is-MSB convention."""
    flip = y = z = 0
    n = p.n_sites
    for j, a in enumerate(p.axes, start=1):
        bit = 1 << (n - j)
        if a in (1, 2):
            flip |= bit
        if a == 2:
            y |= bit
        elif a == 3:
            z |= bit
    return flip, y, z


def phase_vector(p: PauliString) -> tuple[int, np.ndarray]:
    """Decompose p's matrix as M[b, b^flip] = coeff(b).

    Returns (flip, coeff) where coeff is the length-2^n complex vector of
    the single nonzero entry in each row.
    """
    flip, ymask, zmask = _masks(p)
    n_y = bin(ymask).count("1")
    g = 1j ** ((p.phase_exp + 3 * n_y) % 4)
    idx = np.arange(2**p.n_sites, dtype=np.uint64)
    par = np.bitwise_count(idx & np.uint64(ymask | zmask)) & 1
    coeff = np.where(par == 0, g, -g).astype(np.complex128)
    return flip, coeff


def apply(p: PauliString, v: np.ndarray) -> np.ndarray:
    """Matrix-free product (p as a 2^n x 2^n matrix) times state vector v."""
    dim = 2**p.n_sites
    v = np.asarray(v)
    if v.shape != (dim,):
        raise ValueError(f"state vector must have shape ({dim},), got {v.shape}")
    flip, coeff = phase_vector(p)
    idx = np.arange(dim, dtype=np.intp)
    return coeff * v[idx ^ flip]


def exp_apply(theta: float, p: PauliString, v: np.ndarray) -> np.ndarray:
    """e^{i theta p} v = cos(theta) v + i sin(theta) p v.

    Requires p Hermitian (phase_exp in {0, 2}), which forces p^2 = I and
    makes the two-term expansion of the exponential exact.
    """
    if not p.is_hermitian:
        raise ValueError(f"exp_apply requires a Hermitian string, got phase i^{p.phase_exp}")
    v = np.asarray(v, dtype=np.complex128)
    return np.cos(theta) * v + 1j * np.sin(theta) * apply(p, v)


def dense(p: PauliString) -> np.ndarray:
    """Dense 2^n x 2^n matrix of p. Guarded to n_sites <= 14."""
    if p.n_sites > 14:
        raise ValueError(f"dense materialisation limited to n <= 14, got {p.n_sites}")
    dim = 2**p.n_sites
    flip, coeff = phase_vector(p)
    m = np.zeros((dim, dim), dtype=np.complex128)
    idx = np.arange(dim, dtype=np.intp)
    m[idx, idx ^ flip] = coeff
    return m


def dense_kron(p: PauliString) -> np.ndarray:
    """Dense matrix by literal Kronecker products; slow reference path."""
    m = np.array([[1]], dtype=np.complex128)
    for a in p.axes:
        m = np.kron(m, _SIGMA[a])
    return (1j**p.phase_exp) * m
