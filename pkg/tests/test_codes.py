import numpy as np
import pytest

from arqec import codes, gf2
from arqec.errors import BadFileError, RankDeficientError


BUILDERS = {
    "repetition3": lambda: codes.repetition_code(3),
    "repetition5": lambda: codes.repetition_code(5),
    "repetition7": lambda: codes.repetition_code(7),
    "surface3": lambda: codes.surface_code(3),
    "rotated3": lambda: codes.rotated_surface_code(3),
    "rotated5": lambda: codes.rotated_surface_code(5),
    "toric2": lambda: codes.toric_code(2),
    "toric3": lambda: codes.toric_code(3),
}


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_identities_hold(name):
    code = BUILDERS[name]()
    failed = [check for check, ok in codes.check_tables(code).items() if not ok]
    assert not failed, f"{name}: {failed}"


def test_expected_parameters():
    assert (codes.surface_code(3).n, codes.surface_code(3).k) == (13, 1)
    assert (codes.surface_code(5).n, codes.surface_code(5).k) == (41, 1)
    assert (codes.rotated_surface_code(3).n, codes.rotated_surface_code(3).k) == (9, 1)
    assert (codes.rotated_surface_code(5).n, codes.rotated_surface_code(5).k) == (25, 1)
    assert (codes.toric_code(3).n, codes.toric_code(3).k) == (18, 2)
    for n in range(2, 8):
        code = codes.repetition_code(n)
        assert (code.n, code.k, code.m) == (n, 1, n - 1)


def test_surface_code_distance():
    """Minimum logical operator weight equals the advertised distance d=3."""
    code = codes.surface_code(3)
    # brute force over the logical coset: logicals + all stabilizer products
    group = _stabilizer_group(code)
    best = code.n
    for logical in code.logicals:
        ops = logical ^ group
        weights = _pauli_weights(ops, code.n)
        best = min(best, int(weights.min()))
    assert best == 3


def _stabilizer_group(code):
    m = code.m
    group = np.zeros((1 << m, 2 * code.n), dtype=np.uint8)
    for i in range(m):
        half = 1 << i
        group[half:2 * half] = group[:half] ^ code.h[i]
    return group


def _pauli_weights(ops, n):
    return ((ops[:, :n] | ops[:, n:]) != 0).sum(axis=1)


def test_pure_errors_map_syndromes():
    """Pure error e_j must trigger exactly check j."""
    for name in ("repetition4", "surface3", "toric2"):
        code = codes.build_code_from_spec(name) if name != "repetition4" \
            else codes.repetition_code(4)
        for j in range(code.m):
            syn = codes.syndrome(code, code.pure_errors[j])
            expected = np.zeros(code.m, dtype=np.uint8)
            expected[j] = 1
            assert np.array_equal(syn, expected)


def test_syndrome_linearity():
    code = codes.surface_code(3)
    rng = np.random.default_rng(2)
    for _ in range(50):
        a = rng.integers(0, 2, size=2 * code.n).astype(np.uint8)
        b = rng.integers(0, 2, size=2 * code.n).astype(np.uint8)
        assert np.array_equal(codes.syndrome(code, a ^ b),
                              codes.syndrome(code, a) ^ codes.syndrome(code, b))


def test_syndrome_batch_matches_single():
    code = codes.rotated_surface_code(3)
    rng = np.random.default_rng(3)
    errors = rng.integers(0, 2, size=(20, 2 * code.n)).astype(np.uint8)
    batch = codes.syndrome(code, errors)
    for i in range(20):
        assert np.array_equal(batch[i], codes.syndrome(code, errors[i]))


def test_logical_pairing():
    """Rows come ordered lx1, lz1, ... and pair symplectically."""
    for code in (codes.surface_code(3), codes.toric_code(3)):
        gram = gf2.symplectic_gram(code.logicals, code.logicals)
        expected = np.zeros((2 * code.k, 2 * code.k), dtype=np.uint8)
        for i in range(code.k):
            expected[2 * i, 2 * i + 1] = 1
            expected[2 * i + 1, 2 * i] = 1
        assert np.array_equal(gram, expected)


# ---------------------------------------------------------------------------
# ELS decomposition
# ---------------------------------------------------------------------------

def test_els_roundtrip_exhaustive_small():
    """Every Pauli on n <= 5 qubits decomposes and reconstructs exactly."""
    for code in (codes.repetition_code(3), codes.repetition_code(5)):
        two_n = 2 * code.n
        all_paulis = ((np.arange(1 << two_n)[:, None]
                       >> np.arange(two_n - 1, -1, -1)) & 1).astype(np.uint8)
        seq = codes.els_bits(code, all_paulis)
        back = codes.els_sequence_to_pauli(code, seq)
        assert np.array_equal(back, all_paulis)


def test_els_roundtrip_random_large():
    rng = np.random.default_rng(9)
    for code in (codes.surface_code(3), codes.toric_code(3),
                 codes.rotated_surface_code(5)):
        errors = rng.integers(0, 2, size=(1000, 2 * code.n)).astype(np.uint8)
        seq = codes.els_bits(code, errors)
        assert seq.shape == (1000, code.seq_len)
        back = codes.els_sequence_to_pauli(code, seq)
        assert np.array_equal(back, errors)


def test_els_config_split():
    code = codes.toric_code(2)  # k=2 exercises multi-logical splits
    rng = np.random.default_rng(4)
    error = rng.integers(0, 2, size=2 * code.n).astype(np.uint8)
    cfg = codes.pauli_to_els(code, error)
    assert cfg.gamma.shape == (code.m,)
    assert cfg.beta.shape == (2 * code.k,)
    assert cfg.alpha.shape == (code.m,)
    assert np.array_equal(cfg.sequence(),
                          np.concatenate([cfg.gamma, cfg.beta, cfg.alpha]))
    rebuilt = codes.els_to_pauli(code, cfg)
    assert np.array_equal(rebuilt, error)
    # and the config components really are the symplectic probes
    assert np.array_equal(cfg.gamma, codes.syndrome(code, error))


def test_els_component_meaning():
    """gamma of a stabilizer row is 0; beta of a logical is its own label."""
    code = codes.surface_code(3)
    for row in code.h:
        cfg = codes.pauli_to_els(code, row)
        assert not cfg.gamma.any()
        assert not cfg.beta.any()
    for j, logical in enumerate(code.logicals):
        cfg = codes.pauli_to_els(code, logical)
        assert not cfg.gamma.any()
        expected = np.zeros(2 * code.k, dtype=np.uint8)
        expected[j] = 1
        assert np.array_equal(cfg.beta, expected)


# ---------------------------------------------------------------------------
# Puncturing
# ---------------------------------------------------------------------------

def test_puncture_parameters_and_identities():
    base = codes.surface_code(3)
    for remove in (1, 2, 3):
        code = codes.puncture(base, remove, seed=17)
        assert code.n == base.n
        assert code.k == base.k + remove
        assert code.m == base.m - remove
        failed = [c for c, ok in codes.check_tables(code).items() if not ok]
        assert not failed, failed


def test_puncture_seeded_determinism():
    base = codes.surface_code(3)
    a = codes.puncture(base, 2, seed=5)
    b = codes.puncture(base, 2, seed=5)
    c = codes.puncture(base, 2, seed=6)
    assert np.array_equal(a.h, b.h)
    assert not np.array_equal(a.h, c.h)  # different rows dropped


def test_puncture_random_codes_identity_sweep():
    rng = np.random.default_rng(31)
    base = codes.surface_code(3)
    for _ in range(5):
        remove = int(rng.integers(1, 4))
        seed = int(rng.integers(0, 1 << 16))
        code = codes.puncture(base, remove, seed=seed)
        failed = [c for c, ok in codes.check_tables(code).items() if not ok]
        assert not failed


def test_puncture_bounds():
    base = codes.repetition_code(3)
    with pytest.raises(ValueError):
        codes.puncture(base, base.m, seed=0)


# ---------------------------------------------------------------------------
# Check-matrix file format
# ---------------------------------------------------------------------------

def test_format_parse_roundtrip():
    for code in (codes.repetition_code(4), codes.surface_code(3)):
        text = codes.format_check_matrix(code)
        parsed = codes.parse_check_matrix(text)
        assert parsed.n == code.n and parsed.k == code.k
        assert np.array_equal(parsed.h, code.h)


def test_parse_ignores_comments_and_blanks():
    text = "# a comment\n\n3 1\n# another\n110110\n011011\n"
    code = codes.parse_check_matrix(text)
    assert (code.n, code.k, code.m) == (3, 1, 2)


def test_save_load_roundtrip(tmp_path):
    code = codes.rotated_surface_code(3)
    path = tmp_path / "rot3.code"
    codes.save_check_matrix(code, str(path))
    loaded = codes.load_check_matrix(str(path))
    assert np.array_equal(loaded.h, code.h)


def test_build_code_from_spec_path(tmp_path):
    code = codes.repetition_code(5)
    path = tmp_path / "rep5.code"
    codes.save_check_matrix(code, str(path))
    loaded = codes.build_code_from_spec(str(path))
    assert np.array_equal(loaded.h, code.h)


def test_build_code_from_spec_names():
    assert np.array_equal(codes.build_code_from_spec("surface3").h,
                          codes.build_code("surface", 3).h)
    assert np.array_equal(codes.build_code_from_spec("repetition4").h,
                          codes.repetition_code(4).h)
    with pytest.raises(ValueError):
        codes.build_code("unknown_kind", 3)


@pytest.mark.parametrize("text, error", [
    ("", BadFileError),
    ("3\n110110\n", BadFileError),                 # header needs two fields
    ("x y\n110110\n", BadFileError),               # non-integer header
    ("3 3\n", BadFileError),                        # k = n leaves no checks
    ("3 1\n110110\n", BadFileError),                # wrong row count
    ("3 1\n110110\n01201\n", BadFileError),        # bad characters
    ("3 1\n1101\n0110\n", BadFileError),           # wrong row length
    ("3 1\n110110\n110110\n", RankDeficientError),  # dependent rows
])
def test_parse_rejects_bad_files(text, error):
    with pytest.raises(error):
        codes.parse_check_matrix(text)


def test_parse_rejects_anticommuting_checks():
    # X1 and Z1 anticommute: not a stabilizer group
    text = "2 0\n0010\n1000\n"
    with pytest.raises(BadFileError, match="commute"):
        codes.parse_check_matrix(text)
