import numpy as np
import pytest

from arqec import gf2
from arqec.errors import InconsistentSystemError, LengthMismatchError


def bits(*rows):
    return np.array(rows, dtype=np.uint8)


# ---------------------------------------------------------------------------
# gaussian_eliminate
# ---------------------------------------------------------------------------

def test_eliminate_2x2():
    red, pivots = gf2.gaussian_eliminate(bits([1, 1], [0, 1]))
    assert np.array_equal(red, bits([1, 0], [0, 1]))
    assert pivots == [0, 1]


def test_eliminate_identity():
    red, pivots = gf2.gaussian_eliminate(np.eye(3, dtype=np.uint8))
    assert np.array_equal(red, np.eye(3, dtype=np.uint8))
    assert pivots == [0, 1, 2]


def test_eliminate_dependent_rows():
    red, pivots = gf2.gaussian_eliminate(bits([1, 1, 0], [1, 1, 1]))
    assert np.array_equal(red, bits([1, 1, 0], [0, 0, 1]))
    assert pivots == [0, 2]


def test_eliminate_zero_matrix():
    red, pivots = gf2.gaussian_eliminate(np.zeros((2, 3), dtype=np.uint8))
    assert not red.any()
    assert pivots == []


def test_eliminate_row_equivalence():
    # Every input row must be reachable from the echelon rows and vice versa,
    # i.e. the two row spaces coincide.
    rng = np.random.default_rng(7)
    for _ in range(50):
        rows = rng.integers(1, 9)
        cols = rng.integers(1, 17)
        mat = rng.integers(0, 2, size=(rows, cols)).astype(np.uint8)
        red, pivots = gf2.gaussian_eliminate(mat)
        assert gf2.rank(mat) == len(pivots)
        # echelon shape: pivot columns strictly increase, rows below are zero
        for i, c in enumerate(pivots):
            assert red[i, c] == 1
            assert not red[i, :c].any()
        assert not red[len(pivots):].any()
        span_a = {r.tobytes() for r in _row_space(mat)}
        span_b = {r.tobytes() for r in _row_space(red)}
        assert span_a == span_b


def _row_space(mat):
    rows = [r for r in mat if r.any()]
    if not rows:
        return [np.zeros(mat.shape[1], dtype=np.uint8)]
    combos = []
    for mask in range(1 << len(rows)):
        acc = np.zeros(mat.shape[1], dtype=np.uint8)
        for i in range(len(rows)):
            if (mask >> i) & 1:
                acc ^= rows[i]
        combos.append(acc)
    return combos


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def test_solve_identity():
    x = gf2.solve(bits([1, 0], [0, 1]), np.array([1, 0], dtype=np.uint8))
    assert np.array_equal(x, np.array([1, 0], dtype=np.uint8))


def test_solve_free_variable_zero():
    x = gf2.solve(bits([1, 1]), np.array([1], dtype=np.uint8))
    assert np.array_equal(x, np.array([1, 0], dtype=np.uint8))


def test_solve_back_substitution():
    x = gf2.solve(bits([1, 1, 0], [0, 0, 1]), np.array([1, 1], dtype=np.uint8))
    assert np.array_equal(x, np.array([1, 0, 1], dtype=np.uint8))


def test_solve_inconsistent():
    # b has support on a zero row
    with pytest.raises(InconsistentSystemError):
        gf2.solve(bits([1, 1], [0, 0]), np.array([1, 1], dtype=np.uint8))


def test_solve_random_consistent_systems():
    # eliminate [A|b] jointly, then solve against the echelon A part
    rng = np.random.default_rng(11)
    for _ in range(60):
        rows = rng.integers(1, 8)
        cols = rng.integers(1, 13)
        mat = rng.integers(0, 2, size=(rows, cols)).astype(np.uint8)
        x_true = rng.integers(0, 2, size=cols).astype(np.uint8)
        b = (mat @ x_true) & 1
        aug = np.concatenate([mat, b[:, None]], axis=1)
        red_aug, pivots = gf2.gaussian_eliminate(aug)
        assert cols not in pivots, "system built consistent"
        x = gf2.solve(red_aug[:, :cols], red_aug[:, cols])
        assert np.array_equal((mat @ x) & 1, b)
        free = [j for j in range(cols) if j not in pivots]
        assert not x[free].any(), "free variables must stay zero"


# ---------------------------------------------------------------------------
# kernel_basis
# ---------------------------------------------------------------------------

def test_kernel_parity():
    kernel = gf2.kernel_basis(bits([1, 1]))
    assert kernel.shape == (1, 2)
    assert np.array_equal(kernel[0], np.array([1, 1], dtype=np.uint8))


def test_kernel_trivial():
    kernel = gf2.kernel_basis(np.eye(2, dtype=np.uint8))
    assert kernel.shape == (0, 2)


def test_kernel_single_vector():
    kernel = gf2.kernel_basis(bits([1, 0, 1], [0, 1, 1]))
    assert kernel.shape == (1, 3)
    assert np.array_equal(kernel[0], np.array([1, 1, 1], dtype=np.uint8))


def test_kernel_properties_random():
    rng = np.random.default_rng(23)
    for _ in range(50):
        rows = rng.integers(1, 9)
        cols = rng.integers(1, 15)
        mat = rng.integers(0, 2, size=(rows, cols)).astype(np.uint8)
        kernel = gf2.kernel_basis(mat)
        assert kernel.shape[0] == cols - gf2.rank(mat)
        if kernel.shape[0]:
            assert not ((mat @ kernel.T) & 1).any()
            assert gf2.rank(kernel) == kernel.shape[0]


# ---------------------------------------------------------------------------
# symplectic product
# ---------------------------------------------------------------------------

def test_symplectic_x_vs_z():
    x_op = np.array([0, 1], dtype=np.uint8)  # (z|x) single qubit X
    z_op = np.array([1, 0], dtype=np.uint8)
    assert gf2.symplectic_product(x_op, z_op) == 1


def test_symplectic_self():
    x_op = np.array([0, 1], dtype=np.uint8)
    assert gf2.symplectic_product(x_op, x_op) == 0


def test_symplectic_y_vs_z():
    y_op = np.array([1, 1], dtype=np.uint8)
    z_op = np.array([1, 0], dtype=np.uint8)
    assert gf2.symplectic_product(y_op, z_op) == 1


def test_symplectic_length_checks():
    with pytest.raises(LengthMismatchError):
        gf2.symplectic_product(np.array([1, 0, 1], dtype=np.uint8),
                               np.array([1, 0, 1], dtype=np.uint8))
    with pytest.raises(LengthMismatchError):
        gf2.symplectic_product(np.array([1, 0], dtype=np.uint8),
                               np.array([1, 0, 1, 1], dtype=np.uint8))


def test_symplectic_properties_random():
    rng = np.random.default_rng(31)
    for _ in range(100):
        n = rng.integers(1, 9)
        a = rng.integers(0, 2, size=2 * n).astype(np.uint8)
        b = rng.integers(0, 2, size=2 * n).astype(np.uint8)
        c = rng.integers(0, 2, size=2 * n).astype(np.uint8)
        assert gf2.symplectic_product(a, b) == gf2.symplectic_product(b, a)
        assert gf2.symplectic_product(a, a) == 0
        assert (gf2.symplectic_product(a ^ c, b)
                == gf2.symplectic_product(a, b) ^ gf2.symplectic_product(c, b))


def test_symplectic_gram_matches_scalar():
    rng = np.random.default_rng(5)
    a = rng.integers(0, 2, size=(6, 8)).astype(np.uint8)
    b = rng.integers(0, 2, size=(4, 8)).astype(np.uint8)
    gram = gf2.symplectic_gram(a, b)
    for i in range(6):
        for j in range(4):
            assert gram[i, j] == gf2.symplectic_product(a[i], b[j])


def test_swap_halves():
    v = np.array([[1, 0, 1, 1, 0, 0]], dtype=np.uint8)
    swapped = gf2.swap_halves(v)
    assert np.array_equal(swapped, np.array([[1, 0, 0, 1, 0, 1]], dtype=np.uint8))
    assert np.array_equal(gf2.swap_halves(swapped), v)
