"""Causal transformer over binary [gamma, beta, alpha] sequences.

The network reads the bit sequence shifted right by one position (a constant
virtual bit 1 occupies position 0) so that output i is the conditional
q(x_i = 1 | x_{<i}).  Multiplying the per-position Bernoulli factors along
the sequence gives an exactly normalized joint distribution, evaluable and
sampleable in sequence order.

Architecture: learned token + position embeddings, pre-norm residual blocks
(masked multi-head self-attention, then a GELU feed-forward), and a
per-position scalar head through a sigmoid.  Forward and backward passes are
written out by hand in numpy; gradients are validated against central finite
differences in the test suite.

Checkpoints are a one-line JSON header (version tag, dimensions, activation
name, seed, step, array inventory) followed by the raw little-endian float32
parameter arrays in inventory order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import BadFileError, NonFiniteError, ShapeMismatchError

CHECKPOINT_VERSION = "qecgpt-ckpt-1"
ACTIVATION_NAME = "gelu"
PROB_FLOOR = 1e-7
LN_EPS = 1e-5
_GELU_C = float(np.sqrt(2.0 / np.pi))  # plain float: must not promote f32 activations

_forward_calls = 0


def forward_call_count() -> int:
    """Number of forward passes executed so far (process-wide)."""
    return _forward_calls


@dataclass(frozen=True)
class ModelConfig:
    """Network dimensions; seq_len must equal 2n of the target code."""

    seq_len: int
    d_model: int = 64
    n_heads: int = 4
    n_layers: int = 2
    d_ff: int = 64

    def __post_init__(self):
        if min(self.seq_len, self.d_model, self.n_heads,
               self.n_layers, self.d_ff) <= 0:
            raise ValueError("all dimensions must be positive")
        if self.d_model % self.n_heads:
            raise ValueError(
                f"d_model={self.d_model} not divisible by n_heads={self.n_heads}")


def array_specs(config: ModelConfig) -> list[tuple[str, tuple[int, ...]]]:
    """Canonical (name, shape) inventory defining parameter and file order."""
    s, d, f = config.seq_len, config.d_model, config.d_ff
    specs = [("tok_emb", (2, d)), ("pos_emb", (s, d))]
    for i in range(config.n_layers):
        prefix = f"layer{i}."
        specs += [
            (prefix + "ln1_scale", (d,)), (prefix + "ln1_shift", (d,)),
            (prefix + "wq", (d, d)), (prefix + "bq", (d,)),
            (prefix + "wk", (d, d)), (prefix + "bk", (d,)),
            (prefix + "wv", (d, d)), (prefix + "bv", (d,)),
            (prefix + "wo", (d, d)), (prefix + "bo", (d,)),
            (prefix + "ln2_scale", (d,)), (prefix + "ln2_shift", (d,)),
            (prefix + "w1", (d, f)), (prefix + "b1", (f,)),
            (prefix + "w2", (f, d)), (prefix + "b2", (d,)),
        ]
    specs += [("head_w", (d,)), ("head_b", (1,))]
    return specs


@dataclass
class ModelParams:
    """All weights, addressed by the canonical array names."""

    config: ModelConfig
    arrays: dict[str, np.ndarray]

    def astype(self, dtype) -> "ModelParams":
        return ModelParams(self.config, {
            k: v.astype(dtype) for k, v in self.arrays.items()})

    def copy(self) -> "ModelParams":
        return ModelParams(self.config, {k: v.copy() for k, v in self.arrays.items()})


def init_params(config: ModelConfig, seed=0, dtype=np.float32) -> ModelParams:
    """Gaussian init, std 1/sqrt(d_model); biases/shifts 0, norm scales 1."""
    rng = np.random.default_rng(seed)
    std = config.d_model ** -0.5
    arrays = {}
    for name, shape in array_specs(config):
        base = name.split(".")[-1]
        if base.endswith("_scale"):
            arrays[name] = np.ones(shape, dtype=dtype)
        elif base.endswith("_shift") or base.startswith("b") or base == "head_b":
            arrays[name] = np.zeros(shape, dtype=dtype)
        else:
            arrays[name] = rng.normal(0.0, std, size=shape).astype(dtype)
    return ModelParams(config, arrays)


def _layer_norm(x, scale, shift):
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    rstd = 1.0 / np.sqrt(var + LN_EPS)
    xhat = (x - mu) * rstd
    return xhat * scale + shift, xhat, rstd


def _layer_norm_backward(dy, xhat, rstd, scale):
    dscale = (dy * xhat).sum(axis=(0, 1))
    dshift = dy.sum(axis=(0, 1))
    dxhat = dy * scale
    dx = rstd * (dxhat - dxhat.mean(axis=-1, keepdims=True)
                 - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True))
    return dx, dscale, dshift


def _gelu(u):
    # u*u*u, not u**3: integer-power ufunc falls off numpy's SIMD path
    inner = _GELU_C * (u + 0.044715 * (u * u * u))
    t = np.tanh(inner)
    return 0.5 * u * (1.0 + t), t


def _gelu_backward(du_out, u, t):
    dinner = _GELU_C * (1.0 + 3 * 0.044715 * (u * u))
    return du_out * (0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * dinner)


def _split_heads(x, n_heads):
    b, s, d = x.shape
    return x.reshape(b, s, n_heads, d // n_heads).transpose(0, 2, 1, 3)


def _merge_heads(x):
    b, h, s, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, s, h * dh)


def _causal_bias(seq_len, dtype):
    """Additive attention bias: 0 on/below the diagonal, large negative above."""
    bias = np.zeros((seq_len, seq_len), dtype=dtype)
    bias[np.triu_indices(seq_len, k=1)] = -1e9
    return bias


def forward(params: ModelParams, bits, want_cache: bool = False):
    """Per-position conditionals q(x_i = 1 | x_{<i}) for bit sequences.

    Args:
        params: model weights, or any object providing ``forward_probs``
            (used by exact reference models in tests and refinement checks).
        bits: (seq_len,) or (batch, seq_len) array of 0/1.
        want_cache: also return the intermediates needed by ``backward``.

    Returns:
        probs with the same leading shape as ``bits`` (float in (0, 1)),
        and the cache when requested.
    """
    global _forward_calls
    _forward_calls += 1
    if hasattr(params, "forward_probs"):
        if want_cache:
            raise ValueError("reference models do not support gradient caches")
        return params.forward_probs(bits)

    cfg = params.config
    a = params.arrays
    x = np.asarray(bits)
    single = x.ndim == 1
    x2 = np.atleast_2d(x).astype(np.int64)
    if x2.shape[1] != cfg.seq_len:
        raise ShapeMismatchError(
            f"sequence length {x2.shape[1]} != seq_len {cfg.seq_len}")
    dtype = a["tok_emb"].dtype

    tokens = np.empty_like(x2)
    tokens[:, 0] = 1
    tokens[:, 1:] = x2[:, :-1]
    tok_f = tokens[..., None].astype(dtype)
    e0, e1 = a["tok_emb"][0], a["tok_emb"][1]
    h = e0 + tok_f * (e1 - e0) + a["pos_emb"]

    bias = _causal_bias(cfg.seq_len, dtype)
    scale = (cfg.d_model // cfg.n_heads) ** -0.5
    layer_caches = []
    for i in range(cfg.n_layers):
        p = f"layer{i}."
        h_in = h
        normed, xhat1, rstd1 = _layer_norm(h, a[p + "ln1_scale"], a[p + "ln1_shift"])
        q = normed @ a[p + "wq"] + a[p + "bq"]
        kk = normed @ a[p + "wk"] + a[p + "bk"]
        v = normed @ a[p + "wv"] + a[p + "bv"]
        qh = _split_heads(q, cfg.n_heads)
        kh = _split_heads(kk, cfg.n_heads)
        vh = _split_heads(v, cfg.n_heads)
        scores = np.matmul(qh, kh.transpose(0, 1, 3, 2)) * dtype.type(scale) + bias
        scores -= scores.max(axis=-1, keepdims=True)
        att = np.exp(scores)
        att /= att.sum(axis=-1, keepdims=True)
        ctx = _merge_heads(np.matmul(att, vh))
        h = h + ctx @ a[p + "wo"] + a[p + "bo"]

        mid = h
        normed2, xhat2, rstd2 = _layer_norm(h, a[p + "ln2_scale"], a[p + "ln2_shift"])
        u = normed2 @ a[p + "w1"] + a[p + "b1"]
        act, tanh_w = _gelu(u)
        h = h + act @ a[p + "w2"] + a[p + "b2"]
        if want_cache:
            layer_caches.append(dict(
                h_in=h_in, xhat1=xhat1, rstd1=rstd1, normed=normed,
                qh=qh, kh=kh, vh=vh, att=att, ctx=ctx,
                mid=mid, xhat2=xhat2, rstd2=rstd2, normed2=normed2,
                u=u, tanh_w=tanh_w, act=act))

    logits = h @ a["head_w"] + a["head_b"][0]
    probs = expit(logits)
    out = probs[0] if single else probs
    if want_cache:
        cache = dict(tokens=tokens, h_final=h, probs=probs, layers=layer_caches,
                     scale=scale)
        return out, cache
    return out


def nll_and_grad(params: ModelParams, batch_bits) -> tuple[float, dict[str, np.ndarray]]:
    """Mean negative log-likelihood of a batch and its exact gradient.

    The per-bit probabilities are clamped to [PROB_FLOOR, 1 - PROB_FLOOR]
    inside the logs; the clamp region contributes zero gradient.  Raises
    NonFiniteError if the loss or any gradient entry is non-finite.
    """
    x = np.atleast_2d(np.asarray(batch_bits))
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    probs, cache = forward(params, x, want_cache=True)
    cfg = params.config
    a = params.arrays
    batch = x.shape[0]
    xf = x.astype(probs.dtype)

    pc = np.clip(probs, PROB_FLOOR, 1.0 - PROB_FLOOR)
    ll = xf * np.log(pc) + (1.0 - xf) * np.log1p(-pc)
    loss = float(-ll.sum() / batch)

    inside = (probs > PROB_FLOOR) & (probs < 1.0 - PROB_FLOOR)
    dlogits = np.where(inside, probs - xf, 0.0) / batch

    grads = {}
    h = cache["h_final"]
    grads["head_w"] = np.einsum("bsd,bs->d", h, dlogits)
    grads["head_b"] = np.array([dlogits.sum()], dtype=h.dtype)
    dh = dlogits[..., None] * a["head_w"]

    for i in reversed(range(cfg.n_layers)):
        p = f"layer{i}."
        c = cache["layers"][i]
        flat = lambda t: t.reshape(-1, t.shape[-1])

        # feed-forward block
        dr = dh
        grads[p + "w2"] = flat(c["act"]).T @ flat(dr)
        grads[p + "b2"] = dr.sum(axis=(0, 1))
        dact = dr @ a[p + "w2"].T
        du = _gelu_backward(dact, c["u"], c["tanh_w"])
        grads[p + "w1"] = flat(c["normed2"]).T @ flat(du)
        grads[p + "b1"] = du.sum(axis=(0, 1))
        dnormed2 = du @ a[p + "w1"].T
        dmid_ln, grads[p + "ln2_scale"], grads[p + "ln2_shift"] = \
            _layer_norm_backward(dnormed2, c["xhat2"], c["rstd2"], a[p + "ln2_scale"])
        dh = dh + dmid_ln

        # attention block
        do = dh
        grads[p + "wo"] = flat(c["ctx"]).T @ flat(do)
        grads[p + "bo"] = do.sum(axis=(0, 1))
        dctx = _split_heads(do @ a[p + "wo"].T, cfg.n_heads)
        datt = np.matmul(dctx, c["vh"].transpose(0, 1, 3, 2))
        dvh = np.matmul(c["att"].transpose(0, 1, 3, 2), dctx)
        att = c["att"]
        dscores = att * (datt - (datt * att).sum(axis=-1, keepdims=True))
        dqh = np.matmul(dscores, c["kh"]) * cache["scale"]
        dkh = np.matmul(dscores.transpose(0, 1, 3, 2), c["qh"]) * cache["scale"]
        dq, dk, dv = _merge_heads(dqh), _merge_heads(dkh), _merge_heads(dvh)
        grads[p + "wq"] = flat(c["normed"]).T @ flat(dq)
        grads[p + "bq"] = dq.sum(axis=(0, 1))
        grads[p + "wk"] = flat(c["normed"]).T @ flat(dk)
        grads[p + "bk"] = dk.sum(axis=(0, 1))
        grads[p + "wv"] = flat(c["normed"]).T @ flat(dv)
        grads[p + "bv"] = dv.sum(axis=(0, 1))
        dnormed = dq @ a[p + "wq"].T + dk @ a[p + "wk"].T + dv @ a[p + "wv"].T
        dh_ln, grads[p + "ln1_scale"], grads[p + "ln1_shift"] = \
            _layer_norm_backward(dnormed, c["xhat1"], c["rstd1"], a[p + "ln1_scale"])
        dh = dh + dh_ln

    tok_f = cache["tokens"][..., None].astype(dh.dtype)
    grads["pos_emb"] = dh.sum(axis=0)
    d_e1 = (tok_f * dh).sum(axis=(0, 1))
    d_e0 = dh.sum(axis=(0, 1)) - d_e1
    grads["tok_emb"] = np.stack([d_e0, d_e1])

    if not np.isfinite(loss) or any(
            not np.all(np.isfinite(g)) for g in grads.values()):
        raise NonFiniteError("non-finite loss or gradient", step=None)
    return loss, grads


def grad_nll(params: ModelParams, batch_bits) -> dict[str, np.ndarray]:
    """Gradient of the mean batch NLL with respect to every parameter."""
    return nll_and_grad(params, batch_bits)[1]


# ---------------------------------------------------------------------------
# Probability queries and generation
# ---------------------------------------------------------------------------

def _clip_probs(probs):
    return np.clip(probs, PROB_FLOOR, 1.0 - PROB_FLOOR)


def _bit_logprobs(probs, bits):
    pc = _clip_probs(np.asarray(probs, dtype=np.float64))
    b = np.asarray(bits, dtype=np.float64)
    return b * np.log(pc) + (1.0 - b) * np.log1p(-pc)


def log_joint(params, seqs) -> np.ndarray | float:
    """log q(x) for full [gamma, beta, alpha] sequences (vector or batch)."""
    seqs = np.asarray(seqs)
    probs = forward(params, seqs)
    ll = _bit_logprobs(np.atleast_2d(probs), np.atleast_2d(seqs)).sum(axis=1)
    return ll if seqs.ndim > 1 else float(ll[0])


def log_conditional_beta(params, beta, gamma) -> float:
    """log q(beta | gamma): the beta-position factors of the chain rule.

    Positions after the prefix never influence earlier conditionals, so the
    alpha block is fed as zeros and only beta positions are summed — the
    conditional exactly ignores the stabilizer configuration.
    """
    beta = np.asarray(beta, dtype=np.uint8).ravel()
    gamma = np.asarray(gamma, dtype=np.uint8).ravel()
    out = log_conditional_beta_batch(params, beta[None, :], gamma[None, :])
    return float(out[0])


def log_conditional_beta_batch(params, betas, gammas) -> np.ndarray:
    """Vectorized log q(beta | gamma) over aligned (B, 2k), (B, m) rows."""
    betas = np.atleast_2d(np.asarray(betas, dtype=np.uint8))
    gammas = np.atleast_2d(np.asarray(gammas, dtype=np.uint8))
    if betas.shape[0] != gammas.shape[0]:
        raise ShapeMismatchError("beta and gamma batches differ in length")
    seq_len = _params_seq_len(params)
    m, k2 = gammas.shape[1], betas.shape[1]
    if m + k2 > seq_len:
        raise ShapeMismatchError(
            f"gamma+beta length {m + k2} exceeds seq_len {seq_len}")
    seqs = np.zeros((betas.shape[0], seq_len), dtype=np.uint8)
    seqs[:, :m] = gammas
    seqs[:, m:m + k2] = betas
    probs = np.atleast_2d(forward(params, seqs))
    return _bit_logprobs(probs[:, m:m + k2], betas).sum(axis=1)


def _params_seq_len(params) -> int:
    if hasattr(params, "forward_probs"):
        return params.seq_len
    return params.config.seq_len


def generate_beta(params, gamma, mode: str = "argmax",
                  rng: np.random.Generator | None = None,
                  with_logprobs: bool = False):
    """Decode beta bit-by-bit from the learned conditionals.

    Runs exactly 2k forward passes whether ``gamma`` is one syndrome (m,) or
    a batch (B, m); a whole batch shares each pass.  ``argmax`` takes the
    per-bit MAP with ties at exactly 0.5 resolved to 0; ``sample`` draws
    each bit from its conditional.
    """
    gamma = np.asarray(gamma, dtype=np.uint8)
    single = gamma.ndim == 1
    gammas = np.atleast_2d(gamma)
    seq_len = _params_seq_len(params)
    m = gammas.shape[1]
    k2 = seq_len - 2 * m
    if k2 < 0:
        raise ShapeMismatchError(f"syndrome length {m} too long for seq_len {seq_len}")
    if mode not in ("argmax", "sample"):
        raise ValueError(f"mode must be argmax or sample, got {mode!r}")
    if mode == "sample" and rng is None:
        raise ValueError("sample mode needs an rng")
    seqs = np.zeros((gammas.shape[0], seq_len), dtype=np.uint8)
    seqs[:, :m] = gammas
    chosen_logprobs = np.zeros((gammas.shape[0], k2), dtype=np.float64)
    for j in range(m, m + k2):
        probs = _clip_probs(
            np.atleast_2d(forward(params, seqs))[:, j].astype(np.float64))
        if mode == "argmax":
            bits = (probs > 0.5).astype(np.uint8)
        else:
            bits = (rng.random(probs.shape[0]) < probs).astype(np.uint8)
        seqs[:, j] = bits
        chosen_logprobs[:, j - m] = _bit_logprobs(probs, bits)
    betas = seqs[:, m:m + k2]
    if single:
        betas, chosen_logprobs = betas[0], chosen_logprobs[0]
    return (betas, chosen_logprobs) if with_logprobs else betas


def sample_alpha(params, beta, gamma, rng: np.random.Generator,
                 n_samples: int) -> tuple[np.ndarray, np.ndarray]:
    """Ancestral samples of alpha given a fixed [gamma, beta] prefix.

    Returns (samples, logq) where samples is (n_samples, m_alpha) and logq
    holds each sample's proposal log-probability log q(alpha | beta, gamma).
    """
    beta = np.asarray(beta, dtype=np.uint8).ravel()
    gamma = np.asarray(gamma, dtype=np.uint8).ravel()
    seq_len = _params_seq_len(params)
    start = gamma.shape[0] + beta.shape[0]
    m_alpha = seq_len - start
    seqs = np.zeros((n_samples, seq_len), dtype=np.uint8)
    seqs[:, :gamma.shape[0]] = gamma
    seqs[:, gamma.shape[0]:start] = beta
    logq = np.zeros(n_samples, dtype=np.float64)
    for j in range(start, seq_len):
        probs = _clip_probs(
            np.atleast_2d(forward(params, seqs))[:, j].astype(np.float64))
        bits = (rng.random(n_samples) < probs).astype(np.uint8)
        seqs[:, j] = bits
        logq += _bit_logprobs(probs, bits)
    return seqs[:, start:], logq


class ExactSequenceModel:
    """Reference model: exact conditionals of an enumerated joint table.

    Drop-in replacement for ModelParams in every probability query (it
    provides ``forward_probs``).  Used to validate the generative pipeline
    against ground truth on small codes, including the q = p zero-variance
    case of importance reweighting.
    """

    def __init__(self, seq_len: int, joint_probs: np.ndarray):
        if joint_probs.shape != (1 << seq_len,):
            raise ShapeMismatchError(
                f"need 2^{seq_len} probabilities, got {joint_probs.shape}")
        total = joint_probs.sum()
        if not np.isclose(total, 1.0, atol=1e-9):
            raise ValueError(f"joint table sums to {total}, expected 1")
        self.seq_len = seq_len
        self.joint = joint_probs.astype(np.float64)
        # index bit j of a config is sequence position j, most significant first
        self._weights = 1 << np.arange(seq_len - 1, -1, -1, dtype=np.int64)

    @classmethod
    def from_noise(cls, code, noise_model) -> "ExactSequenceModel":
        """Enumerate the exact pushforward of a noise model onto sequences."""
        from .codes import els_sequence_to_pauli
        seq_len = code.seq_len
        if seq_len > 20:
            raise ValueError(f"2^{seq_len} configurations is too many to enumerate")
        count = 1 << seq_len
        idx = np.arange(count, dtype=np.int64)
        seqs = ((idx[:, None] >> np.arange(seq_len - 1, -1, -1)) & 1).astype(np.uint8)
        paulis = els_sequence_to_pauli(code, seqs)
        logp = noise_model.logprob(paulis)
        with np.errstate(under="ignore"):
            probs = np.exp(logp)
        return cls(seq_len, probs / probs.sum())

    def forward_probs(self, bits) -> np.ndarray:
        """q(x_j = 1 | x_{<j}) per position, by marginalizing the table."""
        x = np.asarray(bits, dtype=np.int64)
        single = x.ndim == 1
        x2 = np.atleast_2d(x)
        if x2.shape[1] != self.seq_len:
            raise ShapeMismatchError(
                f"sequence length {x2.shape[1]} != seq_len {self.seq_len}")
        out = np.empty(x2.shape, dtype=np.float64)
        idx = np.arange(self.joint.shape[0], dtype=np.int64)
        for j in range(self.seq_len):
            shift = self.seq_len - j
            # group joint indices by their first j bits
            prefix_of_configs = idx >> shift
            prefix_mass = np.bincount(
                prefix_of_configs, weights=self.joint, minlength=1 << j)
            ones_mask = ((idx >> (shift - 1)) & 1).astype(bool)
            ones_mass = np.bincount(
                prefix_of_configs[ones_mask], weights=self.joint[ones_mask],
                minlength=1 << j)
            if j:
                row_prefix = x2[:, :j] @ (1 << np.arange(j - 1, -1, -1, dtype=np.int64))
            else:
                row_prefix = np.zeros(x2.shape[0], dtype=np.int64)
            denom = prefix_mass[row_prefix]
            num = ones_mass[row_prefix]
            with np.errstate(invalid="ignore", divide="ignore"):
                p = np.where(denom > 0, num / np.maximum(denom, 1e-300), 0.5)
            out[:, j] = p
        return out[0] if single else out


# ---------------------------------------------------------------------------
# Checkpoint I/O
# ---------------------------------------------------------------------------

def checkpoint_bytes(params: ModelParams, *, seed: int = 0,
                     step: int = 0) -> bytes:
    """Serialize params: header line + flat little-endian float32 arrays."""
    specs = array_specs(params.config)
    header = {
        "version": CHECKPOINT_VERSION,
        "config": {
            "seq_len": params.config.seq_len,
            "d_model": params.config.d_model,
            "n_heads": params.config.n_heads,
            "n_layers": params.config.n_layers,
            "d_ff": params.config.d_ff,
        },
        "activation": ACTIVATION_NAME,
        "seed": int(seed),
        "step": int(step),
        "arrays": [[name, list(shape)] for name, shape in specs],
    }
    parts = [(json.dumps(header) + "\n").encode("utf-8")]
    for name, shape in specs:
        arr = params.arrays[name]
        if arr.shape != shape:
            raise ShapeMismatchError(f"{name} has shape {arr.shape}, expected {shape}")
        parts.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    return b"".join(parts)


def save_checkpoint(params: ModelParams, path: str, *, seed: int = 0,
                    step: int = 0) -> None:
    """Write header line + flat little-endian float32 arrays in order."""
    with open(path, "wb") as fh:
        fh.write(checkpoint_bytes(params, seed=seed, step=step))


def params_from_checkpoint_bytes(data: bytes) -> tuple[ModelParams, dict]:
    """Deserialize checkpoint bytes; returns (params, header)."""
    newline = data.find(b"\n")
    if newline < 0:
        raise BadFileError("checkpoint header is not a JSON line")
    header_line, blob = data[:newline], data[newline + 1:]
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise BadFileError("checkpoint header is not a JSON line")
    if not isinstance(header, dict):
        raise BadFileError("checkpoint header is not a JSON object")
    if header.get("version") != CHECKPOINT_VERSION:
        raise BadFileError(
            f"unsupported checkpoint version {header.get('version')!r}")
    try:
        config = ModelConfig(**header["config"])
    except (KeyError, TypeError, ValueError) as exc:
        raise BadFileError(f"bad checkpoint config: {exc}")
    specs = array_specs(config)
    declared = [[name, list(shape)] for name, shape in specs]
    if header.get("arrays") != declared:
        raise BadFileError("checkpoint array inventory does not match config")
    expected = sum(int(np.prod(shape)) for _, shape in specs) * 4
    if len(blob) != expected:
        raise BadFileError(
            f"checkpoint payload is {len(blob)} bytes, expected {expected}")
    arrays = {}
    offset = 0
    for name, shape in specs:
        count = int(np.prod(shape))
        arrays[name] = np.frombuffer(
            blob, dtype="<f4", count=count, offset=offset).reshape(shape).copy()
        offset += count * 4
    return ModelParams(config, arrays), header


def load_checkpoint(path: str) -> tuple[ModelParams, dict]:
    """Read a checkpoint file; returns (params, header)."""
    with open(path, "rb") as fh:
        return params_from_checkpoint_bytes(fh.read())
