import math

import numpy as np
import pytest

from spinglass import ensembles as ens
from spinglass import hamiltonian as ham
from spinglass import pauli


def gaussian_for(geom, seed=0):
    return ens.sample_gaussian(geom.coefficient_dim, seed)


def unit_sample(dim, index, law="gaussian_iid"):
    v = np.zeros(dim)
    v[index] = 1.0
    return ens.CoefficientSample(v, law, seed=0)


def test_chain_term_count_and_zero_operator():
    h = ham.build_chain(4, gaussian_for(ham.chain(4)))
    assert len(h.strings) == 36

    z = ham.build_chain(4, ens.CoefficientSample(np.zeros(36), "gaussian_iid", 0))
    v = np.arange(16, dtype=complex)
    assert np.array_equal(z.matvec(v), np.zeros(16, dtype=complex))


def test_chain_single_term_eigenvalues():
    # x_{1,1,1} = 1 at n=3: H = s_1^(1) s_2^(1) / (3 sqrt 3)
    h = ham.build_chain(3, unit_sample(27, 0))
    w = np.linalg.eigvalsh(h.dense())
    lam = 1.0 / (3.0 * math.sqrt(3.0))
    assert np.allclose(np.sort(w), [-lam] * 4 + [lam] * 4, atol=1e-14)


def test_graph_single_edge():
    g = ham.graph(2, [(1, 2)])
    h = ham.build_graph(g, unit_sample(9, 0))
    w = np.linalg.eigvalsh(h.dense())
    assert np.allclose(np.sort(w), [-1 / 3] * 2 + [1 / 3] * 2, atol=1e-14)


def test_chain_as_graph_equivalence():
    n = 5
    edges = [(j, j + 1) for j in range(1, n)] + [(n, 1)]
    x = gaussian_for(ham.chain(n), seed=3)
    hc = ham.build_chain(n, x)
    hg = ham.build_graph(ham.graph(n, edges), x)
    assert hc.strings == hg.strings
    assert np.array_equal(hc.coeffs, hg.coeffs)


def test_complete_graph_and_pspin_coincide():
    n = 4
    k4 = ham.graph(n, [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)])
    assert k4.coefficient_dim == 54
    x = gaussian_for(k4, seed=5)
    hg = ham.build_graph(k4, x)
    hp = ham.build_pspin(n, 2, x)
    assert hg.strings == hp.strings
    np.testing.assert_allclose(hg.coeffs, hp.coeffs, rtol=1e-15)

    assert ham.pspin(2, 2).coefficient_dim == 9


def test_pspin_single_axis_term():
    # p=1, n=2, coefficient on (axis 3, site 1):
    # H = 3^(-1/2) C(2,1)^(-1/2) s_1^(3) = s_1^(3) / sqrt(6)
    h = ham.build_pspin(2, 1, unit_sample(6, 4))
    w = np.linalg.eigvalsh(h.dense())
    lam = 1.0 / math.sqrt(6.0)
    assert np.allclose(np.sort(w), [-lam] * 2 + [lam] * 2, atol=1e-14)


def test_matvec_against_dense():
    rng = np.random.default_rng(1)
    geoms = [
        ham.chain(4),
        ham.chain(8),
        ham.graph(5, [(1, 2), (2, 4), (3, 5), (1, 5)]),
        ham.pspin(5, 3),
    ]
    for geom in geoms:
        h = ham.build(geom, gaussian_for(geom, seed=7))
        v = rng.standard_normal(h.dim) + 1j * rng.standard_normal(h.dim)
        ref = h.dense() @ v
        got = h.matvec(v)
        assert np.max(np.abs(got - ref)) <= 1e-12 * np.linalg.norm(v)


def test_matvec_simple_case():
    h = ham.build_graph(ham.graph(2, [(1, 2)]), unit_sample(9, 0))
    v = np.zeros(4, dtype=complex)
    v[0] = 1.0  # e_00
    out = h.matvec(v)
    expect = np.zeros(4, dtype=complex)
    expect[3] = 1.0 / 3.0  # e_11
    assert np.allclose(out, expect, atol=1e-15)


def test_hermiticity_inner_product():
    rng = np.random.default_rng(2)
    for geom in (ham.chain(6), ham.pspin(4, 3)):
        h = ham.build(geom, gaussian_for(geom, seed=11))
        u = rng.standard_normal(h.dim) + 1j * rng.standard_normal(h.dim)
        v = rng.standard_normal(h.dim) + 1j * rng.standard_normal(h.dim)
        lhs = np.vdot(u, h.matvec(v))
        rhs = np.conj(np.vdot(v, h.matvec(u)))
        assert abs(lhs - rhs) <= 1e-12 * h.hs_norm()


def test_terms_hermitian_and_traceless():
    for geom in (ham.chain(3), ham.graph(4, [(1, 2), (3, 4)]), ham.pspin(4, 3)):
        for s in ham.term_strings(geom):
            assert s.is_hermitian
            assert pauli.trace(s) == 0


def test_term_orthogonality():
    rng = np.random.default_rng(3)
    for geom in (ham.chain(3), ham.chain(5), ham.graph(5, [(1, 2), (2, 3), (4, 5), (1, 5)]), ham.pspin(5, 2)):
        strings = ham.term_strings(geom)
        t = len(strings)
        dim = 2**geom.n
        for _ in range(200):
            i, j = rng.integers(0, t, size=2)
            tr = pauli.trace(pauli.multiply(strings[i], strings[j]))
            if strings[i] == strings[j]:
                assert tr == complex(dim, 0)
            else:
                assert tr == 0
        # identical strings occur only at identical indices for n >= 3 chains
        assert len(set(strings)) == t


def test_n2_chain_collision_is_the_known_quirk():
    # the cyclic n=2 chain repeats each coupled pair: term (a,b,j=1) equals
    # term (b,a,j=2), so distinct indices need not be orthogonal
    strings = ham.term_strings(ham.chain(2))
    assert len(strings) == 18
    assert len(set(strings)) == 9
    s_ab1 = strings[1 * 2 + 0]  # a=1, b=2, j=1 -> index (a-1)*6 + (b-1)*2 + (j-1)
    s_ba2 = strings[3 * 2 + 0 * 2 + 1]  # a=2, b=1, j=2
    assert s_ab1 == s_ba2
    assert pauli.trace(pauli.multiply(s_ab1, s_ba2)) == complex(4, 0)


def test_hs_distance_roundtrip():
    n = 4
    geom = ham.chain(n)
    x1 = gaussian_for(geom, seed=21)
    x2 = gaussian_for(geom, seed=22)
    h1, h2 = ham.build(geom, x1), ham.build(geom, x2)

    assert ham.hs_distance(h1, h1) == 0.0

    want = 2 ** (n / 2) / (3 * math.sqrt(n)) * np.linalg.norm(x1.values - x2.values)
    got = ham.hs_distance(h1, h2)
    assert abs(got - want) <= 1e-10 * want
    brute = ham.hs_distance(h1, h2, method="dense")
    assert abs(got - brute) <= 1e-10 * brute
    exact = ham.hs_distance(h1, h2, method="trace")
    assert abs(got - exact) <= 1e-10 * exact


def test_hs_distance_single_coefficient_graph():
    g = ham.graph(4, [(1, 2), (2, 3), (3, 4)])
    base = np.zeros(27)
    x1 = ens.CoefficientSample(base.copy(), "gaussian_iid", 0)
    delta = 0.37
    bumped = base.copy()
    bumped[13] += delta
    x2 = ens.CoefficientSample(bumped, "gaussian_iid", 0)
    h1, h2 = ham.build(g, x1), ham.build(g, x2)
    want = 2 ** (4 / 2) * delta / (3 * math.sqrt(3))
    assert abs(ham.hs_distance(h1, h2) - want) <= 1e-12
    assert abs(ham.hs_distance(h1, h2, method="dense") - want) <= 1e-10


def test_hs_norm_matches_dense():
    for geom in (ham.chain(2), ham.chain(5), ham.pspin(4, 2)):
        h = ham.build(geom, gaussian_for(geom, seed=9))
        dense_sq = float(np.linalg.norm(h.dense()) ** 2)
        assert abs(h.hs_norm_sq() - dense_sq) <= 1e-9 * dense_sq


def test_sphere_law_has_no_prefactor():
    n = 4
    x = ens.sample_sphere(36, seed=2)
    h = ham.build_chain(n, x)
    assert np.array_equal(h.coeffs, x.values)
    # HS norm then equals 2^(n/2) exactly (unit coefficient norm)
    assert abs(h.hs_norm() - 2 ** (n / 2)) <= 1e-9


def test_geometry_json_roundtrip(tmp_path):
    g = ham.graph(4, [(1, 2), (2, 3)])
    path = tmp_path / "geom.json"
    path.write_text(__import__("json").dumps(g.to_spec()))
    assert ham.load_geometry(str(path)) == g
    assert ham.load_geometry({"model": "chain", "n": 6}) == ham.chain(6)
    assert ham.load_geometry({"model": "pspin", "n": 5, "p": 2}) == ham.pspin(5, 2)


def test_validation_errors():
    with pytest.raises(ValueError):
        ham.chain(1)
    with pytest.raises(ValueError):
        ham.graph(3, [(1, 1)])
    with pytest.raises(ValueError):
        ham.graph(3, [(1, 2), (2, 1)])
    with pytest.raises(ValueError):
        ham.pspin(3, 4)
    with pytest.raises(ValueError):
        ham.build_chain(4, ens.sample_gaussian(35, 0))
    h = ham.build_chain(4, ens.sample_gaussian(36, 0))
    with pytest.raises(ValueError):
        h.matvec(np.zeros(8))
