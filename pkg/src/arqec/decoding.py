"""Decoders: learned sequential argmax, importance-sampled refinement, and
exhaustive oracles.

All decoding is syndrome-only: given gamma, pick the logical class beta.
The learned decoder reads beta bits one at a time from the model's
conditionals.  Refinement estimates each coset probability

    p(beta, gamma) ~= (1/N) sum_{alpha ~ q} p(alpha, beta, gamma)
                                            / q(alpha | beta, gamma) / q-prefix

by importance reweighting and picks the argmax.  The exact oracles enumerate
all 2^m stabilizer elements per coset (maximum likelihood sums them, minimum
weight keeps the single best) and are the ground truth for small codes.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import gf2
from . import model as armodel
from .codes import CodeTables, els_bits, els_sequence_to_pauli
from .errors import (
    LengthMismatchError,
    TooLargeError,
    UnevaluableModelError,
    UnpairedDataError,
)

MAX_ENUM_BITS = 26       # exact oracles refuse when 2k + m exceeds this
REFINE_MAX_K = 8         # refinement enumerates 4^k logical classes
REFINE_DEFAULT_SAMPLES = 128
_SYNDROME_CHUNK = 256    # refinement batches this many syndromes at a time

METHODS = ("pretrained", "refined", "exact_mld", "exact_minweight")


@dataclass
class DecodeResult:
    beta_hat: np.ndarray
    method: str
    bit_logprobs: np.ndarray | None = None
    coset_logprobs: np.ndarray | None = None


@dataclass
class LerResult:
    rate: float
    stderr: float
    trials: int
    failures: int


def beta_int_to_bits(values, k: int) -> np.ndarray:
    """Map coset indices to (.., 2k) bit rows, most significant bit first."""
    v = np.atleast_1d(np.asarray(values, dtype=np.int64))
    shifts = np.arange(2 * k - 1, -1, -1, dtype=np.int64)
    return ((v[:, None] >> shifts) & 1).astype(np.uint8)


def beta_bits_to_int(bits) -> np.ndarray:
    b = np.atleast_2d(np.asarray(bits, dtype=np.int64))
    shifts = np.arange(b.shape[1] - 1, -1, -1, dtype=np.int64)
    return (b << shifts).sum(axis=1)


def _require_logprob(noise_model):
    if not hasattr(noise_model, "logprob"):
        raise UnevaluableModelError(
            "this decoder needs normalized pointwise error probabilities, "
            "which the given noise model cannot evaluate")


# ---------------------------------------------------------------------------
# Learned sequential decoder
# ---------------------------------------------------------------------------

def decode_pretrained_batch(params, code: CodeTables, gammas,
                            with_logprobs: bool = False):
    """Sequential-argmax decode of a whole syndrome batch (2k model passes)."""
    gammas = np.atleast_2d(np.asarray(gammas, dtype=np.uint8))
    if gammas.shape[1] != code.m:
        raise LengthMismatchError(f"syndrome length {gammas.shape[1]} != m = {code.m}")
    return armodel.generate_beta(
        params, gammas, mode="argmax", with_logprobs=with_logprobs)


def decode_pretrained(params, code: CodeTables, gamma) -> DecodeResult:
    """Decode one syndrome with the learned conditionals."""
    beta, logprobs = decode_pretrained_batch(
        params, code, np.atleast_2d(gamma), with_logprobs=True)
    return DecodeResult(beta_hat=beta[0], method="pretrained",
                        bit_logprobs=logprobs[0])


# ---------------------------------------------------------------------------
# Exact coset enumeration (oracles)
# ---------------------------------------------------------------------------

def _pack_paulis(bits, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Pack (.., 2n) bit rows into per-qubit z and x integer masks."""
    b = np.atleast_2d(np.asarray(bits, dtype=np.uint64))
    weights = (np.uint64(1) << np.arange(n, dtype=np.uint64))
    return b[:, :n] @ weights, b[:, n:] @ weights


def _stabilizer_group_packed(code: CodeTables):
    alphas = ((np.arange(1 << code.m, dtype=np.int64)[:, None]
               >> np.arange(code.m - 1, -1, -1)) & 1).astype(np.uint8)
    group = (alphas @ code.h) & 1
    return _pack_paulis(group, code.n)


def _weight_logprob_table(n: int, p: float) -> np.ndarray:
    """log P(E) for a depolarizing channel as a function of Pauli weight."""
    w = np.arange(n + 1, dtype=np.float64)
    if p == 0.0:
        out = np.full(n + 1, -np.inf)
        out[0] = 0.0
        return out
    return w * np.log(p / 3.0) + (n - w) * np.log1p(-p)


def coset_logprob_table(code: CodeTables, noise_model, gammas,
                        reduce: str = "logsumexp") -> np.ndarray:
    """Exact per-coset log-probabilities for a batch of syndromes.

    Returns (B, 4^k): entry [i, b] is log sum_alpha P(E(gamma_i, beta_b, alpha))
    (or the max over alpha for ``reduce="max"``).  Enumerates all 2^m
    stabilizer elements; guarded by MAX_ENUM_BITS.  Only weight-dependent
    channels (depolarizing) are supported, which covers every noise model
    that exposes pointwise probabilities here.
    """
    _require_logprob(noise_model)
    m, k, n = code.m, code.k, code.n
    if 2 * k + m > MAX_ENUM_BITS:
        raise TooLargeError(
            f"2k + m = {2 * k + m} exceeds enumeration guard {MAX_ENUM_BITS}")
    gammas = np.atleast_2d(np.asarray(gammas, dtype=np.uint8))
    if gammas.shape[1] != m:
        raise LengthMismatchError(f"syndrome length {gammas.shape[1]} != m = {m}")

    lut = _weight_logprob_table(n, noise_model.p)
    stab_z, stab_x = _stabilizer_group_packed(code)
    uniq, inverse = np.unique(gammas, axis=0, return_inverse=True)
    base_z, base_x = _pack_paulis((uniq @ code.pure_errors) & 1, n)
    betas = beta_int_to_bits(np.arange(1 << (2 * k)), k)
    logical_z, logical_x = _pack_paulis((betas @ code.logicals) & 1, n)

    n_beta = 1 << (2 * k)
    out = np.empty((uniq.shape[0], n_beta), dtype=np.float64)
    for i in range(uniq.shape[0]):
        ez = base_z[i] ^ logical_z[:, None] ^ stab_z[None, :]
        ex = base_x[i] ^ logical_x[:, None] ^ stab_x[None, :]
        w = np.bitwise_count(ez | ex).astype(np.int64)
        flat = (w + np.arange(n_beta)[:, None] * (n + 1)).ravel()
        counts = np.bincount(flat, minlength=n_beta * (n + 1)).reshape(
            n_beta, n + 1)
        if reduce == "logsumexp":
            out[i] = logsumexp(np.broadcast_to(lut, counts.shape),
                               b=counts, axis=1)
        elif reduce == "max":
            out[i] = np.where(counts > 0, lut[None, :], -np.inf).max(axis=1)
        else:
            raise ValueError(f"unknown reduce {reduce!r}")
    return out[inverse]


def _marginal_bit_logprobs(coset_logprobs: np.ndarray, beta_bits: np.ndarray,
                           k: int) -> np.ndarray:
    """Per-bit posterior log-marginals of the chosen beta bits."""
    total = logsumexp(coset_logprobs, axis=-1)
    all_bits = beta_int_to_bits(np.arange(coset_logprobs.shape[-1]), k)
    out = np.empty_like(beta_bits, dtype=np.float64)
    for j in range(2 * k):
        mass1 = logsumexp(coset_logprobs[:, all_bits[:, j] == 1], axis=-1)
        mass0 = logsumexp(coset_logprobs[:, all_bits[:, j] == 0], axis=-1)
        out[:, j] = np.where(beta_bits[:, j] == 1, mass1, mass0) - total
    return out


def exact_mld_batch(code: CodeTables, noise_model, gammas) -> tuple[np.ndarray, np.ndarray]:
    """Exact maximum-likelihood decode: argmax_beta of the coset sums."""
    table = coset_logprob_table(code, noise_model, gammas, reduce="logsumexp")
    best = table.argmax(axis=1)  # first max = lexicographically smallest beta
    return beta_int_to_bits(best, code.k), table


def exact_minweight_batch(code: CodeTables, noise_model, gammas) -> tuple[np.ndarray, np.ndarray]:
    """Most-probable-single-error decode (ignores coset degeneracy)."""
    table = coset_logprob_table(code, noise_model, gammas, reduce="max")
    best = table.argmax(axis=1)
    return beta_int_to_bits(best, code.k), table


def exact_mld(code: CodeTables, noise_model, gamma) -> DecodeResult:
    beta, table = exact_mld_batch(code, noise_model, np.atleast_2d(gamma))
    return DecodeResult(
        beta_hat=beta[0], method="exact_mld",
        bit_logprobs=_marginal_bit_logprobs(table, beta, code.k)[0],
        coset_logprobs=table[0])


def exact_minweight(code: CodeTables, noise_model, gamma) -> DecodeResult:
    beta, table = exact_minweight_batch(code, noise_model, np.atleast_2d(gamma))
    return DecodeResult(beta_hat=beta[0], method="exact_minweight",
                        coset_logprobs=table[0])


# ---------------------------------------------------------------------------
# Importance-sampled refinement
# ---------------------------------------------------------------------------

def refine_batch(params, code: CodeTables, noise_model, gammas,
                 n_samples: int, rng: np.random.Generator,
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Refined decode of a syndrome batch.

    For every logical class the coset probability is estimated from
    ``n_samples`` ancestral alpha draws.  Identical partial samples are kept
    merged: at each alpha position a node carrying c samples splits by a
    Binomial(c, q) draw, which is distributed exactly as c independent
    ancestral samples.  Estimates accumulate in the log domain.

    Returns (beta_hat (B, 2k), estimates (B, 4^k)).
    """
    _require_logprob(noise_model)
    if code.k > REFINE_MAX_K:
        raise TooLargeError(
            f"refinement enumerates 4^k classes; k = {code.k} > {REFINE_MAX_K}")
    gammas = np.atleast_2d(np.asarray(gammas, dtype=np.uint8))
    if gammas.shape[1] != code.m:
        raise LengthMismatchError(f"syndrome length {gammas.shape[1]} != m = {code.m}")
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")

    uniq, inverse = np.unique(gammas, axis=0, return_inverse=True)
    n_beta = 1 << (2 * code.k)
    estimates = np.empty((uniq.shape[0], n_beta), dtype=np.float64)
    for lo in range(0, uniq.shape[0], _SYNDROME_CHUNK):
        chunk = uniq[lo:lo + _SYNDROME_CHUNK]
        estimates[lo:lo + _SYNDROME_CHUNK] = _refine_unique_chunk(
            params, code, noise_model, chunk, n_samples, rng)
    best = estimates.argmax(axis=1)
    return beta_int_to_bits(best, code.k)[inverse], estimates[inverse]


def _refine_unique_chunk(params, code, noise_model, gammas, n_samples, rng):
    """Estimate log p(beta, gamma) for every (syndrome, beta) of one chunk."""
    m, k = code.m, code.k
    n_beta = 1 << (2 * k)
    n_gamma = gammas.shape[0]
    betas = beta_int_to_bits(np.arange(n_beta), k)
    seq_len = code.seq_len

    # One tree node per (gamma, beta) owner: a shared alpha prefix.
    seqs = np.zeros((n_gamma * n_beta, seq_len), dtype=np.uint8)
    seqs[:, :m] = np.repeat(gammas, n_beta, axis=0)
    seqs[:, m:m + 2 * k] = np.tile(betas, (n_gamma, 1))
    owner = np.arange(n_gamma * n_beta)
    counts = np.full(n_gamma * n_beta, n_samples, dtype=np.int64)
    logq = np.zeros(n_gamma * n_beta, dtype=np.float64)

    for j in range(m + 2 * k, seq_len):
        # the proposal is the model's *clipped* conditional: sample from it
        # and weight by it so the importance ratio stays exactly consistent
        probs = armodel._clip_probs(
            _forward_rows(params, seqs)[:, j].astype(np.float64))
        ones = rng.binomial(counts, probs)
        zeros = counts - ones
        lp1 = np.log(probs)
        lp0 = np.log1p(-probs)
        keep_one = ones > 0
        keep_zero = zeros > 0
        one_rows = seqs[keep_one]
        one_rows[:, j] = 1
        zero_rows = seqs[keep_zero]
        seqs = np.concatenate([zero_rows, one_rows])
        owner = np.concatenate([owner[keep_zero], owner[keep_one]])
        counts = np.concatenate([zeros[keep_zero], ones[keep_one]])
        logq = np.concatenate([logq[keep_zero] + lp0[keep_zero],
                               logq[keep_one] + lp1[keep_one]])

    paulis = els_sequence_to_pauli(code, seqs)
    logp = np.asarray(noise_model.logprob(paulis), dtype=np.float64)
    vals = np.log(counts.astype(np.float64)) + logp - logq

    flat_max = np.full(n_gamma * n_beta, -np.inf)
    np.maximum.at(flat_max, owner, vals)
    sums = np.zeros(n_gamma * n_beta, dtype=np.float64)
    finite = np.isfinite(vals)
    with np.errstate(under="ignore"):
        np.add.at(sums, owner[finite], np.exp(vals[finite] - flat_max[owner[finite]]))
    with np.errstate(divide="ignore"):
        est = flat_max + np.log(sums) - np.log(n_samples)
    return est.reshape(n_gamma, n_beta)


_FORWARD_ROW_CHUNK = 16384


def _forward_rows(params, seqs):
    """Forward pass chunked over rows to bound attention memory."""
    if seqs.shape[0] <= _FORWARD_ROW_CHUNK:
        return np.atleast_2d(armodel.forward(params, seqs))
    parts = [np.atleast_2d(armodel.forward(params, seqs[lo:lo + _FORWARD_ROW_CHUNK]))
             for lo in range(0, seqs.shape[0], _FORWARD_ROW_CHUNK)]
    return np.concatenate(parts, axis=0)


def refine(params, code: CodeTables, noise_model, gamma,
           n_samples: int = REFINE_DEFAULT_SAMPLES,
           rng: np.random.Generator | None = None) -> DecodeResult:
    """Refined decode of one syndrome (see refine_batch)."""
    if rng is None:
        rng = np.random.default_rng(0)
    beta, estimates = refine_batch(
        params, code, noise_model, np.atleast_2d(gamma), n_samples, rng)
    return DecodeResult(
        beta_hat=beta[0], method="refined",
        bit_logprobs=_marginal_bit_logprobs(estimates, beta, code.k)[0],
        coset_logprobs=estimates[0])


# ---------------------------------------------------------------------------
# Logical error rate and paired comparisons
# ---------------------------------------------------------------------------

def logical_error_rate_from_masks(beta_hat, beta_true) -> LerResult:
    """Rate of decoded classes differing from the truth, with binomial stderr."""
    hat = np.atleast_2d(np.asarray(beta_hat, dtype=np.uint8))
    true = np.atleast_2d(np.asarray(beta_true, dtype=np.uint8))
    if hat.shape != true.shape:
        raise UnpairedDataError(f"shape mismatch {hat.shape} vs {true.shape}")
    trials = hat.shape[0]
    failures = int((hat != true).any(axis=1).sum())
    rate = failures / trials
    return LerResult(rate=rate, stderr=float(np.sqrt(rate * (1 - rate) / trials)),
                     trials=trials, failures=failures)


def decode_batch(code: CodeTables, method: str, gammas, *, params=None,
                 noise_model=None, refine_samples: int = REFINE_DEFAULT_SAMPLES,
                 rng: np.random.Generator | None = None) -> tuple[np.ndarray, np.ndarray | None]:
    """Dispatch a syndrome batch to one decoding method.

    Returns (beta_hat (B, 2k), bit_logprobs (B, 2k) or None).
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; have {METHODS}")
    if method != "pretrained" and noise_model is None:
        raise ValueError(f"{method} decoding needs a noise model")
    if method == "pretrained":
        if params is None:
            raise ValueError("pretrained decoding needs model params")
        beta, logprobs = decode_pretrained_batch(params, code, gammas,
                                                 with_logprobs=True)
        return beta, logprobs
    if method == "refined":
        if params is None:
            raise ValueError("refined decoding needs model params")
        if rng is None:
            rng = np.random.default_rng(0)
        beta, estimates = refine_batch(params, code, noise_model, gammas,
                                       refine_samples, rng)
        return beta, _marginal_bit_logprobs(estimates, beta, code.k)
    if method == "exact_mld":
        beta, table = exact_mld_batch(code, noise_model, gammas)
        return beta, _marginal_bit_logprobs(table, beta, code.k)
    beta, _ = exact_minweight_batch(code, noise_model, gammas)
    return beta, None


def decode_multi(code: CodeTables, noise_model, methods, trials: int,
                 rng: np.random.Generator, *, params=None,
                 refine_samples: int = REFINE_DEFAULT_SAMPLES) -> dict:
    """Sample one shared error stream and decode it with several methods.

    Returns a dict with the per-method success masks, per-method wall times,
    the stream hash that certifies pairing, and the sampled truth.
    """
    import time as _time
    errors = noise_model.sample_batch(rng, trials)
    stream_hash = hashlib.sha256(np.ascontiguousarray(errors).tobytes()).hexdigest()[:16]
    seqs = els_bits(code, errors)
    gammas = seqs[:, :code.m]
    truth = seqs[:, code.m:code.m + 2 * code.k]
    success = {}
    wall_ms = {}
    for method in methods:
        start = _time.perf_counter()
        digest = hashlib.sha256(f"{stream_hash}:{method}".encode()).digest()
        decode_rng = np.random.default_rng(
            np.random.SeedSequence(int.from_bytes(digest[:8], "little")))
        beta, _ = decode_batch(
            code, method, gammas, params=params, noise_model=noise_model,
            refine_samples=refine_samples, rng=decode_rng)
        wall_ms[method] = (_time.perf_counter() - start) * 1e3
        success[method] = ~(np.atleast_2d(beta) != truth).any(axis=1)
    return dict(success=success, wall_ms=wall_ms, error_stream_hash=stream_hash,
                gammas=gammas, beta_true=truth, trials=trials)


def logical_error_rate(code: CodeTables, noise_model, method: str, trials: int,
                       rng: np.random.Generator, *, params=None,
                       refine_samples: int = REFINE_DEFAULT_SAMPLES) -> LerResult:
    """Monte Carlo logical error rate of one method."""
    result = decode_multi(code, noise_model, [method], trials, rng,
                          params=params, refine_samples=refine_samples)
    mask = result["success"][method]
    failures = int((~mask).sum())
    rate = failures / trials
    return LerResult(rate=rate, stderr=float(np.sqrt(rate * (1 - rate) / trials)),
                     trials=trials, failures=failures)
