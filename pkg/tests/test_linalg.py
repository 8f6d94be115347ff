import numpy as np
import pytest

from renyi_reach.errors import (
    DimensionMismatch,
    InvalidPovm,
    InvalidSpectrum,
    NotHermitian,
    NotPositive,
    TraceNotOne,
)
from renyi_reach.linalg import (
    Spectrum,
    hermitian_eig,
    make_povm,
    matrix_power_psd,
    partial_trace_env,
    swap_operator,
    tensor_product,
    validate_density,
)
from renyi_reach.sampling import RngSeed, ginibre, random_density

X = np.array([[0, 1], [1, 0]], dtype=complex)


def test_validate_density_accepts_probability_diagonal():
    rho = validate_density(np.diag([0.6, 0.4]))
    np.testing.assert_allclose(rho, np.diag([0.6, 0.4]))
    assert not rho.flags.writeable


@pytest.mark.parametrize(
    "matrix, error, residual",
    [
        (np.diag([0.6, 0.5]), TraceNotOne, "1.000e-01"),
        (np.diag([1.2, -0.2]), NotPositive, "-2.000e-01"),
        (np.array([[0.5, 0.1], [0.3, 0.5]]), NotHermitian, "2.000e-01"),
    ],
)
def test_validate_density_rejects(matrix, error, residual):
    with pytest.raises(error, match=residual):
        validate_density(matrix)


def test_validate_density_symmetrizes_roundoff():
    m = np.array([[0.5, 0.2 + 1e-12j], [0.2, 0.5]])
    rho = validate_density(m)
    np.testing.assert_array_equal(rho, rho.conj().T)


@pytest.mark.parametrize(
    "matrix, expected",
    [
        (np.eye(3), [1, 1, 1]),
        (np.diag([0.1, 0.9]), [0.9, 0.1]),
        # closed form for [[a, b], [b, a]]: a +/- b
        (np.array([[0.5, 0.5], [0.5, 0.5]]), [1.0, 0.0]),
    ],
)
def test_hermitian_eig_examples(matrix, expected):
    w, v = hermitian_eig(matrix)
    np.testing.assert_allclose(w, expected, atol=1e-14)
    np.testing.assert_allclose(v @ np.diag(w) @ v.conj().T, matrix, atol=1e-14)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_hermitian_eig_reconstruction_sweep():
    for t in range(200):
        gen = RngSeed(11, t).generator()
        d = int(gen.integers(1, 9))
        g = ginibre(d, gen)
        m = g + g.conj().T
        w, v = hermitian_eig(m)
        assert np.all(np.diff(w) <= 0)
        assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - m)) <= 1e-10 * d


def test_hermitian_eig_ties_are_stable():
    w, v = hermitian_eig(np.eye(3))
    np.testing.assert_allclose(np.abs(v), np.eye(3))


def test_tensor_product_examples():
    np.testing.assert_array_equal(tensor_product(np.eye(2), np.eye(2)), np.eye(4))
    np.testing.assert_allclose(
        tensor_product(np.diag([0.6, 0.4]), np.diag([0.9, 0.1])),
        np.diag([0.54, 0.06, 0.36, 0.04]),
    )
    out = tensor_product(X, np.diag([1, 0]))
    expected = np.zeros((4, 4))
    # joint index (i_S, i_E) -> 2 * i_S + i_E
    expected[0 * 2 + 0, 1 * 2 + 0] = 1
    expected[1 * 2 + 0, 0 * 2 + 0] = 1
    np.testing.assert_array_equal(out, expected)


def test_partial_trace_examples():
    rs, re = np.diag([0.6, 0.4]), np.diag([0.9, 0.1])
    np.testing.assert_allclose(partial_trace_env(np.kron(rs, re), 2, 2), rs)
    np.testing.assert_allclose(partial_trace_env(np.eye(4) / 4, 2, 2), np.eye(2) / 2)
    np.testing.assert_allclose(
        partial_trace_env(np.diag([0.54, 0.36, 0.06, 0.04]), 2, 2), np.diag([0.90, 0.10])
    )


def test_partial_trace_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        partial_trace_env(np.eye(4), 3, 2)


def _partial_trace_loop(m, d_s, d_e):
    out = np.zeros((d_s, d_s), dtype=complex)
    for i in range(d_s):
        for j in range(d_s):
            for k in range(d_e):
                out[i, j] += m[i * d_e + k, j * d_e + k]
    return out


@pytest.mark.parametrize("d_s, d_e", [(2, 2), (2, 3), (3, 2), (4, 4)])
def test_partial_trace_properties(d_s, d_e):
    for t in range(20):
        gen = RngSeed(5, t).generator()
        m = ginibre(d_s * d_e, gen)
        a = ginibre(d_s, gen)
        pt = partial_trace_env(m, d_s, d_e)
        np.testing.assert_allclose(pt, _partial_trace_loop(m, d_s, d_e), atol=1e-13)
        assert abs(np.trace(pt) - np.trace(m)) <= 1e-12
        lhs = np.trace(np.kron(a, np.eye(d_e)) @ m)
        rhs = np.trace(a @ pt)
        assert abs(lhs - rhs) <= 1e-10


def test_product_spectrum_is_pairwise_products():
    for t in range(20):
        gen = RngSeed(2, t).generator()
        rs, re = random_density(3, gen), random_density(2, gen)
        joint = np.sort(np.linalg.eigvalsh(np.kron(rs, re)))
        prods = np.sort(np.outer(np.linalg.eigvalsh(rs), np.linalg.eigvalsh(re)).ravel())
        np.testing.assert_allclose(joint, prods, atol=1e-10)


def test_matrix_power_examples():
    np.testing.assert_allclose(matrix_power_psd(np.diag([0.25, 1.0]), 0.5), np.diag([0.5, 1.0]))
    rho = random_density(3, RngSeed(1))
    np.testing.assert_allclose(matrix_power_psd(rho, 1.0), rho, atol=1e-14)
    np.testing.assert_allclose(
        matrix_power_psd(np.diag([0.9, 0.1]), -1.0), np.diag([1 / 0.9, 10.0]), rtol=1e-12
    )


def test_matrix_power_support_convention():
    out = matrix_power_psd(np.diag([1.0, 0.0]), -0.5)
    np.testing.assert_allclose(out, np.diag([1.0, 0.0]))
    with pytest.raises(NotPositive):
        matrix_power_psd(np.diag([1.0, -0.1]), 0.5)


def test_matrix_power_clips_roundoff_negatives():
    out = matrix_power_psd(np.diag([1.0, -1e-12]), 0.5)
    np.testing.assert_allclose(out, np.diag([1.0, 0.0]))


def test_spectrum_views_and_validation():
    s = Spectrum([0.2, 0.5, 0.3])
    np.testing.assert_array_equal(s.descending, [0.5, 0.3, 0.2])
    np.testing.assert_array_equal(s.ascending, [0.2, 0.3, 0.5])
    assert Spectrum([1 + 1e-11, -1e-11]).values.min() == 0.0
    with pytest.raises(InvalidSpectrum):
        Spectrum([0.6, 0.5])
    with pytest.raises(InvalidSpectrum):
        Spectrum([1.5, -0.5])


def test_povm_validation():
    povm = make_povm([np.diag([1, 0]), np.diag([0, 1])])
    assert povm.outcomes == (0.0, 1.0)
    with pytest.raises(InvalidPovm):
        make_povm([np.diag([1, 0]), np.diag([0, 0.5])])
    with pytest.raises(NotPositive):
        make_povm([np.diag([1.5, 0.5]), np.diag([-0.5, 0.5])])
    with pytest.raises(InvalidPovm):
        make_povm([np.eye(2) / 2, np.eye(2) / 2], outcomes=[1, 1])


def test_swap_exchanges_factors():
    a, b = ginibre(3, RngSeed(0).generator()), ginibre(3, RngSeed(1).generator())
    s = swap_operator(3)
    np.testing.assert_allclose(s @ np.kron(a, b) @ s, np.kron(b, a), atol=1e-13)
    np.testing.assert_array_equal(s @ s, np.eye(9))
