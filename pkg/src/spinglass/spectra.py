"""Eigenvalue computation and exact moment oracles for the random operators.

Two dense routes are provided: `eig_dense` defaults to LAPACK's Hermitian
solver, while method="ql" runs the in-repo Householder tridiagonalization
followed by implicit-shift QL on the real-symmetric embedding
[[Re, -Im], [Im, Re]] (eigenvalues doubled, deduplicated by pairing the
sorted output).  The two routes cross-check each other in the test suite;
the QL kernel also keeps the laboratory honest about what the fast path
must reproduce.

`moment_exact` is a ground-truth oracle: it evaluates 2^{-n} E tr H^k for
Gaussian coefficients by enumerating Wick pairings and taking exact traces
in the string algebra, entirely in rational arithmetic.  Monte Carlo and
Hutchinson estimates are validated against it, never the other way round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import pauli
from .ensembles import derive_seed
from .hamiltonian import CouplingGeometry, HamiltonianOperator, term_strings

__all__ = [
    "SpectralMeasure",
    "eig_dense",
    "lanczos_extremal",
    "LanczosResult",
    "moment_exact",
    "cf_empirical",
    "stochastic_moments",
    "write_spectra_csv",
    "householder_tridiagonal",
    "tridiagonal_ql",
    "hermitian_eigenvalues_ql",
]


@dataclass(frozen=True)
class SpectralMeasure:
    """Sorted eigenvalues carrying uniform weight 2^{-n} each."""

    eigenvalues: np.ndarray
    n_sites: int

    def __post_init__(self):
        w = np.asarray(self.eigenvalues, dtype=np.float64)
        if w.ndim != 1 or w.shape[0] != 2**self.n_sites:
            raise ValueError(f"expected 2^{self.n_sites} eigenvalues, got shape {w.shape}")
        if np.any(np.isnan(w)):
            raise ValueError("eigenvalues contain NaN")
        object.__setattr__(self, "eigenvalues", np.sort(w))

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.eigenvalues.shape[0], 2.0**-self.n_sites)

    def moment(self, k: int) -> float:
        return float(np.mean(self.eigenvalues**k))

    def tail_mass(self, t: float) -> float:
        return float(np.mean(np.abs(self.eigenvalues) > t))

    def sum_rule_residuals(self, h: HamiltonianOperator) -> tuple[float, float]:
        """(|sum lambda| / max(1, ||lambda||), relative tr H^2 mismatch)."""
        lam = self.eigenvalues
        r1 = abs(lam.sum()) / max(1.0, float(np.linalg.norm(lam)))
        hs2 = h.hs_norm_sq()
        r2 = abs(float(np.sum(lam**2)) - hs2) / max(hs2, 1e-300)
        return r1, r2


def _check_hermitian(h: HamiltonianOperator):
    rng = np.random.default_rng(0xC0FFEE)
    u = rng.standard_normal(h.dim) + 1j * rng.standard_normal(h.dim)
    v = rng.standard_normal(h.dim) + 1j * rng.standard_normal(h.dim)
    lhs = np.vdot(u, h.matvec(v))
    rhs = np.conj(np.vdot(v, h.matvec(u)))
    scale = max(h.hs_norm(), 1e-300)
    if abs(lhs - rhs) > 1e-10 * scale:
        raise ValueError("operator is not Hermitian: <u,Hv> != conj(<v,Hu>)")


def eig_dense(h: HamiltonianOperator, method: str = "lapack") -> SpectralMeasure:
    """All 2^n eigenvalues of the dense Hermitian matrix (n <= 14 guard)."""
    if h.n_sites > 14:
        raise ValueError(f"dense eigensolve limited to n <= 14, got {h.n_sites}")
    _check_hermitian(h)
    m = h.dense()
    if method == "lapack":
        w = np.linalg.eigvalsh(m)
    elif method == "ql":
        w = hermitian_eigenvalues_ql(m)
    else:
        raise ValueError(f"unknown method {method!r}")
    return SpectralMeasure(w, h.n_sites)


# ---------------------------------------------------------------------------
# in-repo tridiagonalization + implicit-shift QL
# ---------------------------------------------------------------------------

def householder_tridiagonal(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reduce a real symmetric matrix to tridiagonal (d, e) without vectors."""
    a = np.array(a, dtype=np.float64, copy=True)
    d0 = a.shape[0]
    if a.shape != (d0, d0):
        raise ValueError("matrix must be square")
    e = np.zeros(d0)
    for k in range(d0 - 2):
        x = a[k + 1 :, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            e[k] = 0.0
            continue
        if x[0] > 0:
            alpha = -alpha
        v = x.copy()
        v[0] -= alpha
        vnorm2 = v @ v
        if vnorm2 == 0.0:
            e[k] = alpha
            continue
        beta = 2.0 / vnorm2
        sub = a[k + 1 :, k + 1 :]
        p = beta * (sub @ v)
        w = p - (0.5 * beta * (v @ p)) * v
        sub -= np.outer(v, w) + np.outer(w, v)
        a[k + 1 :, k] = 0.0
        a[k + 1, k] = alpha
        e[k] = alpha
    e[d0 - 2 : d0 - 1] = a[d0 - 1, d0 - 2] if d0 >= 2 else 0.0
    d = np.diag(a).copy()
    return d, e[: d0 - 1]


def tridiagonal_ql(
    d: np.ndarray, e: np.ndarray, rel_tol: float = 1e-14, max_sweeps: int = 30
) -> np.ndarray:
    """Eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL.

    Off-diagonals are declared negligible below rel_tol*(|d_i| + |d_{i+1}|);
    each eigenvalue gets at most max_sweeps implicit sweeps, so the total
    rotation count stays O(max_sweeps * dim).
    """
    d = np.array(d, dtype=np.float64, copy=True)
    n = d.shape[0]
    if n == 1:
        return d
    ee = np.zeros(n)
    ee[: n - 1] = e
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(ee[m]) <= rel_tol * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                raise RuntimeError(f"QL failed to converge at index {l}")
            g = (d[l + 1] - d[l]) / (2.0 * ee[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + ee[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            for i in range(m - 1, l - 1, -1):
                f = s * ee[i]
                b = c * ee[i]
                r = math.hypot(f, g)
                ee[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    ee[m] = 0.0
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            else:
                d[l] -= p
                ee[l] = g
                ee[m] = 0.0
    return np.sort(d)


def hermitian_eigenvalues_ql(m: np.ndarray) -> np.ndarray:
    """Eigenvalues of a complex Hermitian matrix via its real embedding.

    [[Re, -Im], [Im, Re]] is real symmetric with every eigenvalue of the
    original matrix doubled; sorted pairs are averaged to deduplicate.
    """
    m = np.asarray(m)
    d0 = m.shape[0]
    re, im = m.real, m.imag
    big = np.block([[re, -im], [im, re]])
    big = 0.5 * (big + big.T)  # scrub roundoff asymmetry
    d, e = householder_tridiagonal(big)
    w = tridiagonal_ql(d, e)
    return 0.5 * (w[0::2] + w[1::2])


# ---------------------------------------------------------------------------
# Lanczos
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LanczosResult:
    value: float
    converged: bool
    iterations: int


def lanczos_extremal(
    h: HamiltonianOperator,
    max_iters: int = 200,
    tol: float = 1e-12,
    seed: int = 0,
) -> LanczosResult:
    """Largest |eigenvalue| by Lanczos with full reorthogonalization.

    The returned Ritz value never exceeds ||H||_op (it is a lower bound up
    to roundoff); convergence is declared when successive extremal Ritz
    values differ by less than tol, and breakdown of the Krylov basis is
    reported as converged (the subspace is then exactly invariant).
    """
    if max_iters < 2:
        raise ValueError("max_iters must be >= 2")
    dim = h.dim
    gen = np.random.Generator(np.random.Philox(key=derive_seed(seed, 0x1A2C)))
    v = gen.standard_normal(dim) + 1j * gen.standard_normal(dim)
    v /= np.linalg.norm(v)
    basis = [v]
    alphas: list[float] = []
    betas: list[float] = []
    prev = np.inf
    w = h.matvec(v)
    scale = max(h.hs_norm(), 1e-300)
    for it in range(max_iters):
        a = float(np.real(np.vdot(basis[-1], w)))
        alphas.append(a)
        w = w - a * basis[-1]
        if len(basis) > 1:
            w = w - betas[-1] * basis[-2]
        # full reorthogonalization, twice for good measure
        for _ in range(2):
            for q in basis:
                w = w - np.vdot(q, w) * q
        est = _extremal_ritz(alphas, betas)
        if abs(est - prev) < tol and it >= 1:
            return LanczosResult(est, True, it + 1)
        prev = est
        b = float(np.linalg.norm(w))
        if b <= 1e-14 * scale:
            return LanczosResult(est, True, it + 1)  # lucky breakdown
        if it == max_iters - 1 or len(alphas) == dim:
            return LanczosResult(est, len(alphas) == dim, it + 1)
        v = w / b
        betas.append(b)
        basis.append(v)
        w = h.matvec(v)
    return LanczosResult(prev, False, max_iters)


def _extremal_ritz(alphas, betas) -> float:
    k = len(alphas)
    t = np.diag(np.asarray(alphas, dtype=np.float64))
    if k > 1:
        off = np.asarray(betas[: k - 1], dtype=np.float64)
        t += np.diag(off, 1) + np.diag(off, -1)
    w = np.linalg.eigvalsh(t)
    return float(np.max(np.abs(w)))


# ---------------------------------------------------------------------------
# exact Gaussian moments by Wick pairing
# ---------------------------------------------------------------------------

def _norm_sq_fraction(geometry: CouplingGeometry) -> Fraction:
    """The exact rational nu^2 for the geometry's i.i.d. normalization."""
    if geometry.model == "chain":
        return Fraction(1, 9 * geometry.n)
    if geometry.model == "graph":
        return Fraction(1, 9 * geometry.edge_count)
    return Fraction(1, 3**geometry.p * math.comb(geometry.n, geometry.p))


def moment_exact(geometry: CouplingGeometry, k: int, law: str = "gaussian_iid") -> Fraction:
    """2^{-n} E tr H^k for i.i.d. standard Gaussian coefficients, exact.

    Enumerates the Wick pairings of the k coefficient slots; each pairing's
    contribution is an exact integer trace of the corresponding string
    product.  Odd k vanish.  Supported for k <= 4.
    """
    if law != "gaussian_iid":
        raise ValueError(f"moment oracle defined for gaussian_iid law, got {law!r}")
    if not 1 <= k <= 4:
        raise ValueError(f"k must be in 1..4, got {k}")
    if k % 2 == 1:
        return Fraction(0)
    strings = term_strings(geometry)
    t = len(strings)
    dim = 2**geometry.n
    nu2 = _norm_sq_fraction(geometry)
    if k == 2:
        total = 0
        for s in strings:
            tr = pauli.trace(pauli.multiply(s, s))
            total += int(tr.real)
        return nu2 * Fraction(total, dim)
    # k = 4: pairings (01)(23), (02)(13), (03)(12) over slot assignments
    total = 0
    for pattern in ((0, 0, 1, 1), (0, 1, 0, 1), (0, 1, 1, 0)):
        for i in range(t):
            for j in range(t):
                pair = (strings[i], strings[j])
                prod = pair[pattern[0]]
                for slot in pattern[1:]:
                    prod = pauli.multiply(prod, pair[slot])
                tr = pauli.trace(prod)
                total += int(tr.real)
    return nu2 * nu2 * Fraction(total, dim)


# ---------------------------------------------------------------------------
# empirical statistics
# ---------------------------------------------------------------------------

def cf_empirical(measure: SpectralMeasure, t: float) -> complex:
    """2^{-n} sum_j e^{i t lambda_j}; replica averages estimate the DOS CF."""
    return complex(np.mean(np.exp(1j * t * measure.eigenvalues)))


def stochastic_moments(
    h: HamiltonianOperator, k_max: int, n_probes: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Hutchinson estimates of 2^{-n} tr H^k for k = 1..k_max.

    Rademacher probes drawn from per-probe derived seeds; the probe mean is
    accumulated in probe-index order, so results are independent of any
    parallel execution of the surrounding code.  Returns (means, standard
    errors), each of shape (k_max,).
    """
    if k_max < 1 or n_probes < 1:
        raise ValueError("k_max and n_probes must be >= 1")
    dim = h.dim
    samples = np.empty((n_probes, k_max))
    for i in range(n_probes):
        gen = np.random.Generator(np.random.Philox(key=derive_seed(seed, i)))
        z = gen.integers(0, 2, size=dim).astype(np.float64) * 2.0 - 1.0
        zc = z.astype(np.complex128)
        w = zc
        for k in range(k_max):
            w = h.matvec(w)
            samples[i, k] = float(np.real(z @ w)) / dim
    means = samples.mean(axis=0)
    if n_probes > 1:
        ses = samples.std(axis=0, ddof=1) / math.sqrt(n_probes)
    else:
        ses = np.zeros(k_max)
    return means, ses


def write_spectra_csv(path, measures) -> None:
    """CSV export `replica,index,eigenvalue` at 17 significant digits."""
    with open(path, "w", newline="") as fh:
        fh.write("replica,index,eigenvalue\n")
        for replica, measure in measures:
            for idx, lam in enumerate(measure.eigenvalues):
                fh.write(f"{replica},{idx},{lam:.17g}\n")
