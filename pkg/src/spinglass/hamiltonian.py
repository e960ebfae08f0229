"""Random spin-glass Hamiltonians for chain, graph and p-spin geometries.

Builders produce a normalized term list (coefficient, PauliString) from a
drawn coefficient vector:

    chain   n sites, cyclic:  x_{a,b,j} s_j^(a) s_{j+1}^(b),  j = n wraps to 1;
            coefficients scaled by 1/(3 sqrt(n)) for i.i.d. laws, and used
            as-is for sphere draws (the unit-norm constraint sets the scale)
    graph   x_{a,b,(ij)} s_i^(a) s_j^(b) per edge, scaled by 1/(3 sqrt(e))
    pspin   one term per (size-p site subset, axis assignment), scaled by
            3^(-p/2) C(n,p)^(-1/2)

Coefficient indexing is lexicographic with the axis indices slowest and the
site/edge/subset index fastest, so a fixed seed reproduces the same operator
everywhere.  The cyclic n = 2 chain deliberately keeps both the (1,2) and
(2,1) terms, which couple the same pair of sites; distinct terms are then no
longer trace-orthogonal, a documented quirk of that degenerate size.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from . import pauli
from .ensembles import CoefficientSample

__all__ = [
    "CouplingGeometry",
    "HamiltonianOperator",
    "chain",
    "graph",
    "pspin",
    "load_geometry",
    "term_strings",
    "build",
    "build_chain",
    "build_graph",
    "build_pspin",
    "hs_distance",
]

DENSE_LIMIT = 14  # 2^14 complex128 rows; beyond this only matvec paths


@dataclass(frozen=True)
class CouplingGeometry:
    """Which sites interact: cyclic chain, explicit edge list, or p-subsets."""

    model: str  # chain | graph | pspin
    n: int
    edges: tuple[tuple[int, int], ...] = ()
    p: int = 0

    def __post_init__(self):
        if self.model == "chain":
            if self.n < 2:
                raise ValueError("chain needs n >= 2")
        elif self.model == "graph":
            if self.n < 2 or not self.edges:
                raise ValueError("graph needs n >= 2 and at least one edge")
            seen = set()
            for i, j in self.edges:
                if not (1 <= i <= self.n and 1 <= j <= self.n):
                    raise ValueError(f"edge ({i},{j}) out of range 1..{self.n}")
                if i == j:
                    raise ValueError(f"self-loop ({i},{j}) not allowed")
                key = frozenset((i, j))
                if key in seen:
                    raise ValueError(f"duplicate edge ({i},{j})")
                seen.add(key)
        elif self.model == "pspin":
            if not 1 <= self.p <= self.n:
                raise ValueError(f"pspin needs 1 <= p <= n, got p={self.p}, n={self.n}")
        else:
            raise ValueError(f"unknown model {self.model!r}")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def coefficient_dim(self) -> int:
        if self.model == "chain":
            return 9 * self.n
        if self.model == "graph":
            return 9 * self.edge_count
        return 3**self.p * math.comb(self.n, self.p)

    def normalization(self, law: str) -> float:
        if self.model == "chain":
            return 1.0 if law == "sphere" else 1.0 / (3.0 * math.sqrt(self.n))
        if self.model == "graph":
            return 1.0 if law == "sphere" else 1.0 / (3.0 * math.sqrt(self.edge_count))
        return 3.0 ** (-self.p / 2.0) / math.sqrt(math.comb(self.n, self.p))

    def to_spec(self) -> dict:
        d = {"model": self.model, "n": self.n}
        if self.model == "graph":
            d["edges"] = [list(e) for e in self.edges]
        if self.model == "pspin":
            d["p"] = self.p
        return d


def chain(n: int) -> CouplingGeometry:
    return CouplingGeometry("chain", n)


def graph(n: int, edges) -> CouplingGeometry:
    return CouplingGeometry("graph", n, tuple((int(i), int(j)) for i, j in edges))


def pspin(n: int, p: int) -> CouplingGeometry:
    return CouplingGeometry("pspin", n, p=p)


def load_geometry(source) -> CouplingGeometry:
    """Geometry from a JSON file path or an already-parsed dict (1-indexed edges)."""
    if isinstance(source, dict):
        d = source
    else:
        with open(source) as fh:
            d = json.load(fh)
    model = d["model"]
    if model == "chain":
        return chain(int(d["n"]))
    if model == "graph":
        return graph(int(d["n"]), d["edges"])
    if model == "pspin":
        return pspin(int(d["n"]), int(d["p"]))
    raise ValueError(f"unknown model {model!r}")


def term_strings(geometry: CouplingGeometry) -> tuple[pauli.PauliString, ...]:
    """Pauli strings in coefficient order (axes slowest, site index fastest)."""
    n = geometry.n
    out = []
    if geometry.model == "chain":
        for a in (1, 2, 3):
            for b in (1, 2, 3):
                for j in range(1, n + 1):
                    k = j % n + 1  # cyclic neighbor
                    s = pauli.multiply(
                        pauli.single_site(n, j, a), pauli.single_site(n, k, b)
                    )
                    out.append(s)
    elif geometry.model == "graph":
        for a in (1, 2, 3):
            for b in (1, 2, 3):
                for i, j in geometry.edges:
                    s = pauli.multiply(
                        pauli.single_site(n, i, a), pauli.single_site(n, j, b)
                    )
                    out.append(s)
    else:
        subsets = list(combinations(range(1, n + 1), geometry.p))
        for axes in product((1, 2, 3), repeat=geometry.p):
            for sites in subsets:
                s = pauli.identity(n)
                for site, axis in zip(sites, axes):
                    s = pauli.multiply(s, pauli.single_site(n, site, axis))
                out.append(s)
    return tuple(out)


@dataclass
class HamiltonianOperator:
    """Normalized term list with matrix-free matvec and dense materialisation.

    `coeffs` already include the geometry normalization.  Instances are
    immutable by convention; matvec caches per-term bit masks on first use
    and is safe to call concurrently afterwards.
    """

    n_sites: int
    geometry: CouplingGeometry
    law: str
    coeffs: np.ndarray
    strings: tuple[pauli.PauliString, ...]
    seed: int | None = None
    _term_cache: list | None = field(default=None, repr=False, compare=False)
    _hs_sq: float | None = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return 2**self.n_sites

    @property
    def terms(self):
        return list(zip(self.coeffs, self.strings))

    def _term_data(self):
        if self._term_cache is None:
            data = []
            for s in self.strings:
                flip, phase_vec = pauli.phase_vector(s)
                data.append((flip, phase_vec))
            self._term_cache = data
        return self._term_cache

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        if v.shape != (self.dim,):
            raise ValueError(f"vector must have shape ({self.dim},), got {v.shape}")
        idx = np.arange(self.dim, dtype=np.intp)
        out = np.zeros(self.dim, dtype=np.complex128)
        for c, (flip, phase_vec) in zip(self.coeffs, self._term_data()):
            if c != 0.0:
                out += (c * phase_vec) * v[idx ^ flip]
        return out

    def dense(self) -> np.ndarray:
        if self.n_sites > DENSE_LIMIT:
            raise ValueError(
                f"dense materialisation limited to n <= {DENSE_LIMIT}, got {self.n_sites}"
            )
        idx = np.arange(self.dim, dtype=np.intp)
        m = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for c, (flip, phase_vec) in zip(self.coeffs, self._term_data()):
            m[idx, idx ^ flip] += c * phase_vec
        return m

    def hs_norm_sq(self) -> float:
        """tr(H^2), exact in the term algebra (valid even when terms collide)."""
        if self._hs_sq is None:
            self._hs_sq = _pairwise_quadratic(self.strings, self.coeffs, self.coeffs)
        return self._hs_sq

    def hs_norm(self) -> float:
        return math.sqrt(max(self.hs_norm_sq(), 0.0))


def _pairwise_quadratic(strings, ca, cb) -> float:
    """sum_{alpha,beta} ca_alpha cb_beta tr(P_alpha P_beta) / 1, via exact traces."""
    # group identical (axes) to keep the double loop at distinct strings
    total = 0.0
    t = len(strings)
    dim = 2**strings[0].n_sites if t else 1
    for i in range(t):
        si = strings[i]
        for j in range(t):
            prod = pauli.multiply(si, strings[j])
            if prod.is_identity_axes:
                tr = pauli.trace(prod)
                total += ca[i] * cb[j] * tr.real
    return total


def _check_sample(geometry: CouplingGeometry, x: CoefficientSample):
    want = geometry.coefficient_dim
    if x.dimension != want:
        raise ValueError(
            f"{geometry.model} at n={geometry.n} needs {want} coefficients, got {x.dimension}"
        )


def build(geometry: CouplingGeometry, x: CoefficientSample) -> HamiltonianOperator:
    """Assemble the operator for any geometry from a drawn coefficient vector."""
    _check_sample(geometry, x)
    strings = term_strings(geometry)
    norm = geometry.normalization(x.law)
    coeffs = np.asarray(x.values, dtype=np.float64) * norm
    return HamiltonianOperator(
        n_sites=geometry.n,
        geometry=geometry,
        law=x.law,
        coeffs=coeffs,
        strings=strings,
        seed=x.seed,
    )


def build_chain(n: int, x: CoefficientSample) -> HamiltonianOperator:
    return build(chain(n), x)


def build_graph(geometry: CouplingGeometry, x: CoefficientSample) -> HamiltonianOperator:
    if geometry.model != "graph":
        raise ValueError("build_graph needs a graph geometry")
    return build(geometry, x)


def build_pspin(n: int, p: int, x: CoefficientSample) -> HamiltonianOperator:
    return build(pspin(n, p), x)


def hs_distance(
    h1: HamiltonianOperator, h2: HamiltonianOperator, method: str = "coeff"
) -> float:
    """Hilbert-Schmidt distance ||H - H'||_HS.

    method="coeff" uses the orthogonal-term identity
    sqrt(2^n) * ||c - c'|| on the folded coefficients (for the Gaussian
    chain this is 2^(n/2)/(3 sqrt(n)) * ||x - x'||); it assumes distinct
    terms are trace-orthogonal, which holds for every geometry except the
    cyclic n = 2 chain.  method="trace" evaluates tr[(H-H')^2] exactly in
    the string algebra; method="dense" is the brute-force Frobenius norm.
    """
    if (h1.geometry, h1.law, h1.n_sites) != (h2.geometry, h2.law, h2.n_sites):
        raise ValueError("operators come from different builds")
    delta = h1.coeffs - h2.coeffs
    if method == "coeff":
        return math.sqrt(2**h1.n_sites) * float(np.linalg.norm(delta))
    if method == "trace":
        return math.sqrt(max(_pairwise_quadratic(h1.strings, delta, delta), 0.0))
    if method == "dense":
        return float(np.linalg.norm(h1.dense() - h2.dense()))
    raise ValueError(f"unknown method {method!r}")
