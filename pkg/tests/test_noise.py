import numpy as np
import pytest

from arqec import codes, noise
from arqec.errors import LengthMismatchError, UnevaluableModelError


# ---------------------------------------------------------------------------
# Depolarizing channel
# ---------------------------------------------------------------------------

def test_depolarizing_validates_rate():
    with pytest.raises(ValueError):
        noise.DepolarizingModel(3, -0.1)
    with pytest.raises(ValueError):
        noise.DepolarizingModel(3, 1.0)
    noise.DepolarizingModel(3, 0.0)  # p = 0 is a legal degenerate channel


def test_depolarizing_single_site_frequencies():
    """Empirical I/X/Y/Z rates on one qubit match (1-p, p/3, p/3, p/3)."""
    p = 0.3
    model = noise.DepolarizingModel(1, p)
    rng = np.random.default_rng(0)
    samples = model.sample_batch(rng, 60000)
    z, x = samples[:, 0], samples[:, 1]
    counts = {
        "I": int(((z == 0) & (x == 0)).sum()),
        "X": int(((z == 0) & (x == 1)).sum()),
        "Y": int(((z == 1) & (x == 1)).sum()),
        "Z": int(((z == 1) & (x == 0)).sum()),
    }
    total = sum(counts.values())
    for name, expected in [("I", 1 - p), ("X", p / 3), ("Y", p / 3), ("Z", p / 3)]:
        freq = counts[name] / total
        se = np.sqrt(expected * (1 - expected) / total)
        assert abs(freq - expected) < 5 * se, (name, freq, expected)


def test_depolarizing_logprob_values():
    model = noise.DepolarizingModel(4, 0.12)
    identity = np.zeros(8, dtype=np.uint8)
    assert model.logprob(identity) == pytest.approx(4 * np.log(1 - 0.12))
    single_x = identity.copy()
    single_x[4] = 1  # x-half of qubit 0
    assert model.logprob(single_x) == pytest.approx(
        np.log(0.12 / 3) + 3 * np.log(1 - 0.12))
    single_y = identity.copy()
    single_y[0] = single_y[4] = 1  # both halves: Y counts once
    assert model.logprob(single_y) == pytest.approx(
        np.log(0.12 / 3) + 3 * np.log(1 - 0.12))


def test_depolarizing_logprob_normalizes():
    """Sum over all 4^n Paulis is exactly 1 (n = 3 enumeration)."""
    model = noise.DepolarizingModel(3, 0.23)
    two_n = 6
    all_paulis = ((np.arange(1 << two_n)[:, None]
                   >> np.arange(two_n - 1, -1, -1)) & 1).astype(np.uint8)
    total = np.exp(model.logprob(all_paulis)).sum()
    assert total == pytest.approx(1.0, abs=1e-12)


def test_depolarizing_logprob_vectorizes():
    model = noise.DepolarizingModel(3, 0.1)
    rng = np.random.default_rng(1)
    batch = rng.integers(0, 2, size=(10, 6)).astype(np.uint8)
    vec = model.logprob(batch)
    assert vec.shape == (10,)
    for i in range(10):
        assert vec[i] == pytest.approx(model.logprob(batch[i]))
    with pytest.raises(LengthMismatchError):
        model.logprob(np.zeros(4, dtype=np.uint8))


def test_depolarizing_p_zero():
    model = noise.DepolarizingModel(2, 0.0)
    rng = np.random.default_rng(2)
    assert not model.sample_batch(rng, 100).any()
    assert model.logprob(np.zeros(4, dtype=np.uint8)) == 0.0
    assert model.logprob(np.array([0, 0, 1, 0], dtype=np.uint8)) == -np.inf


# ---------------------------------------------------------------------------
# Ising noise
# ---------------------------------------------------------------------------

def test_regular_graph_structure():
    rng = np.random.default_rng(3)
    edges = noise._random_regular_edges(10, 4, rng)
    assert edges.shape == (20, 2)
    degree = np.zeros(10, dtype=int)
    seen = set()
    for a, b in edges:
        assert a != b
        assert (a, b) not in seen
        seen.add((a, b))
        degree[a] += 1
        degree[b] += 1
    assert (degree == 4).all()


def test_build_is_seeded():
    a = noise.IsingNoiseModel.build(8, beta=0.5, seed=9)
    b = noise.IsingNoiseModel.build(8, beta=0.5, seed=9)
    c = noise.IsingNoiseModel.build(8, beta=0.5, seed=10)
    assert np.array_equal(a.edges, b.edges)
    assert np.allclose(a.couplings, b.couplings)
    assert not (np.array_equal(a.edges, c.edges)
                and np.allclose(a.couplings, c.couplings))


def test_ising_energy_by_hand():
    # triangle graph, unit couplings: H = -beta*(s0s1 + s1s2 + s0s2) - h*sum(s)
    model = noise.IsingNoiseModel(
        n=3, beta=0.7, edges=np.array([[0, 1], [1, 2], [0, 2]]),
        couplings=np.ones(3), h=0.3)
    s = np.array([1.0, -1.0, 1.0])
    expected = -0.7 * (-1 - 1 + 1) - 0.3 * 1
    assert model.energy(s) == pytest.approx(expected)
    batch = np.stack([s, -s])
    assert model.energy(batch).shape == (2,)


def test_exact_spin_distribution_normalizes():
    model = noise.IsingNoiseModel.build(8, beta=0.4, seed=1)
    states, probs = model.exact_distribution() if hasattr(model, "exact_distribution") \
        else noise.exact_spin_distribution(model)
    assert probs.sum() == pytest.approx(1.0)
    assert states.shape == (256, 8)
    # Boltzmann ratio check between two states
    e = model.energy(states[:2])
    assert probs[0] / probs[1] == pytest.approx(np.exp(-(e[0] - e[1])))


def test_mh_matches_boltzmann():
    """Empirical MH distribution within total variation 0.05 of exact.

    Note the finite-sample floor: even a perfect sampler shows TV of about
    sqrt(K/N) here, so N must be large enough for 0.05 to be meaningful.
    """
    model = noise.IsingNoiseModel.build(8, beta=0.4, seed=2)
    states, probs = noise.exact_spin_distribution(model)
    rng = np.random.default_rng(4)
    samples = model.sample_spins(rng, 60000)
    # index each sample as a bit pattern (s=-1 -> 1)
    bits = (samples < 0).astype(np.int64)
    idx = bits @ (1 << np.arange(8))
    counts = np.bincount(idx, minlength=256)
    empirical = counts / counts.sum()
    tv = 0.5 * np.abs(empirical - probs).sum()
    assert tv < 0.05, tv


def test_beta_zero_marginal():
    """At beta=0 sites decouple: P(s=+1) = e^h / (e^h + e^-h)."""
    model = noise.IsingNoiseModel.build(10, beta=0.0, seed=5, h=0.3)
    rng = np.random.default_rng(6)
    spins = model.sample_spins(rng, 4000)
    p_plus = float((spins > 0).mean())
    expected = 0.6456563062257954
    se = np.sqrt(expected * (1 - expected) / spins.size)
    assert abs(p_plus - expected) < 5 * se, (p_plus, expected)


def test_spins_to_pauli_mapping():
    model = noise.IsingNoiseModel.build(6, beta=0.4, seed=7)
    rng = np.random.default_rng(8)
    spins = np.where(rng.random((4000, 6)) < 0.5, -1.0, 1.0)
    paulis = model.spins_to_pauli(spins, rng)
    z, x = paulis[:, :6], paulis[:, 6:]
    support = (z | x).astype(bool)
    assert np.array_equal(support, spins < 0)
    # conditioned on a flip, X/Y/Z come out 1/3 each
    flipped = spins < 0
    kinds = z[flipped] * 2 + x[flipped]  # X=1, Y=3, Z=2 under (z,x) encoding
    for code_val in (1, 2, 3):
        freq = float((kinds == code_val).mean())
        assert abs(freq - 1 / 3) < 0.02, (code_val, freq)


def test_ising_exposes_no_pointwise_probability():
    model = noise.IsingNoiseModel.build(8, beta=0.4, seed=1)
    assert not hasattr(model, "logprob")


def test_sample_ising_wrapper():
    model = noise.IsingNoiseModel.build(6, beta=0.3, seed=3)
    rng = np.random.default_rng(9)
    pauli = noise.sample_ising(model, rng, sweeps=80, burn_in=60, thin=1)
    assert pauli.shape == (12,)
    with pytest.raises(ValueError):
        noise.sample_ising(model, rng, sweeps=5, burn_in=60)
    # default burn-in is 10n sweeps
    with pytest.raises(ValueError):
        noise.sample_ising(model, rng, sweeps=10 * model.n - 1)


def test_exact_distribution_guard():
    model = noise.IsingNoiseModel.build(18, beta=0.2, seed=11)
    with pytest.raises(UnevaluableModelError):
        noise.exact_spin_distribution(model)


# ---------------------------------------------------------------------------
# Training batches
# ---------------------------------------------------------------------------

def test_sample_training_batch_shapes():
    code = codes.surface_code(3)
    model = noise.DepolarizingModel(code.n, 0.1)
    rng = np.random.default_rng(10)
    batch = noise.sample_training_batch(code, model, 64, rng)
    assert batch.shape == (64, code.seq_len)
    assert set(np.unique(batch)) <= {0, 1}


def test_sample_training_batch_is_els_of_errors():
    code = codes.repetition_code(4)
    model = noise.DepolarizingModel(code.n, 0.2)
    seqs = noise.sample_training_batch(code, model, 500, np.random.default_rng(11))
    errors = codes.els_sequence_to_pauli(code, seqs)
    assert np.array_equal(codes.els_bits(code, errors), seqs)
    # syndrome stats: at p=0.2 some syndromes fire
    assert seqs[:, :code.m].any()


def test_sample_training_batch_size_mismatch():
    code = codes.repetition_code(3)
    model = noise.DepolarizingModel(5, 0.1)
    with pytest.raises(LengthMismatchError):
        noise.sample_training_batch(code, model, 8, np.random.default_rng(0))
