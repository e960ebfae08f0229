import numpy as np
import pytest

from spinglass import pauli


def random_string(rng, n):
    axes = tuple(int(a) for a in rng.integers(0, 4, size=n))
    return pauli.PauliString(n, axes, int(rng.integers(0, 4)))


def test_single_site_products():
    # sx*sy = i sz, involutions, and a two-site product
    p = pauli.single_site(1, 1, 1)
    q = pauli.single_site(1, 1, 2)
    r = pauli.multiply(p, q)
    assert r.axes == (3,) and r.phase_exp == 1

    assert pauli.multiply(p, p) == pauli.identity(1)

    a = pauli.multiply(pauli.single_site(2, 1, 1), pauli.single_site(2, 2, 2))
    b = pauli.multiply(pauli.single_site(2, 1, 1), pauli.single_site(2, 2, 3))
    ab = pauli.multiply(a, b)
    assert ab.axes == (0, 1) and ab.phase_exp == 1


def test_multiply_requires_matching_sites():
    with pytest.raises(ValueError):
        pauli.multiply(pauli.identity(2), pauli.identity(3))


def test_trace_values():
    assert pauli.trace(pauli.identity(3)) == complex(8, 0)
    assert pauli.trace(pauli.single_site(3, 1, 1)) == 0
    # tr[(s_j^a s_{j+1}^b)^2] = 2^n
    for n in (2, 3, 4):
        s = pauli.multiply(pauli.single_site(n, 1, 2), pauli.single_site(n, 2, 3))
        assert pauli.trace(pauli.multiply(s, s)) == complex(2**n, 0)


def test_trace_matches_dense_exactly():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(1, 5))
        p = random_string(rng, n)
        sym = pauli.trace(p)
        dens = np.trace(pauli.dense_kron(p))
        assert sym == complex(dens)


def test_product_homomorphism_dense():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.integers(1, 5))
        p = random_string(rng, n)
        q = random_string(rng, n)
        lhs = pauli.dense_kron(pauli.multiply(p, q))
        rhs = pauli.dense_kron(p) @ pauli.dense_kron(q)
        assert np.array_equal(lhs, rhs)


def test_multiply_associative():
    rng = np.random.default_rng(13)
    for _ in range(100):
        n = int(rng.integers(1, 4))
        p, q, r = (random_string(rng, n) for _ in range(3))
        assert pauli.multiply(pauli.multiply(p, q), r) == pauli.multiply(p, pauli.multiply(q, r))


def test_hermitian_square_is_identity():
    rng = np.random.default_rng(17)
    for _ in range(100):
        n = int(rng.integers(1, 5))
        p = random_string(rng, n)
        if not p.is_hermitian:
            p = pauli.PauliString(n, p.axes, p.phase_exp - 1)
        assert pauli.multiply(p, p) == pauli.identity(n)


def test_apply_basis_conventions():
    # site 1 is the MSB: sx on site 1 maps index 0 -> index 2 at n=2
    v = np.zeros(4, dtype=complex)
    v[0] = 1.0
    out = pauli.apply(pauli.single_site(2, 1, 1), v)
    assert out[2] == 1.0 and np.count_nonzero(out) == 1

    assert np.array_equal(pauli.apply(pauli.identity(2), v), v)

    # sz diagonal (1, -1): on e_{10} (index 2) site 1 holds bit value 1
    w = np.zeros(4, dtype=complex)
    w[2] = 1.0
    out = pauli.apply(pauli.single_site(2, 1, 3), w)
    assert out[2] == -1.0


def test_apply_matches_dense():
    rng = np.random.default_rng(19)
    for n in (1, 2, 3, 5, 8, 10):
        p = random_string(rng, n)
        v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
        direct = pauli.apply(p, v)
        ref = pauli.dense(p) @ v
        assert np.max(np.abs(direct - ref)) <= 1e-14 * max(1.0, np.max(np.abs(v)))


def test_dense_matches_kron():
    rng = np.random.default_rng(23)
    for _ in range(50):
        n = int(rng.integers(1, 5))
        p = random_string(rng, n)
        assert np.array_equal(pauli.dense(p), pauli.dense_kron(p))


def test_exp_apply_against_eigendecomposition():
    rng = np.random.default_rng(29)
    for n in (1, 2, 4, 6):
        p = random_string(rng, n)
        if not p.is_hermitian:
            p = pauli.PauliString(n, p.axes, p.phase_exp + 1)
        v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
        for theta in (0.0, 0.3, np.pi / 2, 2.0):
            got = pauli.exp_apply(theta, p, v)
            w, u = np.linalg.eigh(pauli.dense(p))
            ref = (u * np.exp(1j * theta * w)) @ (u.conj().T @ v)
            assert np.max(np.abs(got - ref)) <= 1e-12 * np.linalg.norm(v)
            # unitarity
            assert abs(np.linalg.norm(got) - np.linalg.norm(v)) <= 1e-13 * np.linalg.norm(v)


def test_exp_apply_special_cases():
    v = np.array([1.0, 0.0], dtype=complex)
    p = pauli.single_site(1, 1, 1)
    out = pauli.exp_apply(np.pi / 2, p, v)
    assert np.allclose(out, np.array([0.0, 1j]), atol=1e-15)

    z = pauli.single_site(1, 1, 3)
    for theta in (0.0, 0.7, -1.2):
        out = pauli.exp_apply(theta, z, v)
        assert np.allclose(out, np.exp(1j * theta) * v, atol=1e-15)


def test_exp_apply_rejects_non_hermitian():
    p = pauli.PauliString(1, (1,), 1)  # i*sx
    with pytest.raises(ValueError):
        pauli.exp_apply(0.5, p, np.array([1.0, 0.0], dtype=complex))


def test_apply_dimension_error():
    with pytest.raises(ValueError):
        pauli.apply(pauli.identity(2), np.zeros(3, dtype=complex))
