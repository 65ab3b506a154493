"""Pre-training: minimize the forward KL to the error distribution by NLL.

Every optimizer step draws a fresh batch of (gamma, beta, alpha) sequences
from the noise model (infinite-data regime) and applies an adaptive-moment
update.  Validation is exact when the configuration space is enumerable.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, asdict

import numpy as np

from . import model as armodel
from .codes import CodeTables, els_sequence_to_pauli
from .errors import NonFiniteError, UnevaluableModelError
from .noise import DepolarizingModel, sample_training_batch

# Model-size/training profiles.  "desk" targets minutes-scale runs on one
# workstation core; "reference" mirrors the published research-scale budget
# and is far beyond interactive use.
PROFILES = {
    "desk": dict(d_model=64, n_heads=4, n_layers=2, d_ff=64,
                 batch=512, steps=12000, lr=1e-3),
    "reference": dict(d_model=256, n_heads=4, n_layers=2, d_ff=256,
                      batch=10000, steps=100000, lr=1e-3),
}

ENUM_SEQ_LIMIT = 14  # exact KL evaluation guard: 2n <= 14


@dataclass
class TrainConfig:
    batch: int = 512
    steps: int = 12000
    lr: float = 1e-3
    seed: int = 0
    eval_every: int = 500
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.batch <= 0 or self.steps <= 0 or self.eval_every <= 0:
            raise ValueError("batch, steps, and eval_every must be positive")
        if self.lr <= 0:
            raise ValueError("lr must be positive")


@dataclass
class TrainReport:
    step: int
    nll: float
    wall_ms: float


def resolve_profile(profile: str, seq_len: int, *, overrides: dict | None = None,
                    seed: int = 0) -> tuple[armodel.ModelConfig, TrainConfig]:
    """Expand a named profile plus overrides into model and train configs."""
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}; have {sorted(PROFILES)}")
    merged = dict(PROFILES[profile])
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    allowed = set(PROFILES[profile]) | {"seed", "eval_every"}
    unknown = set(merged) - allowed
    if unknown:
        raise ValueError(f"unknown profile overrides {sorted(unknown)}")
    mcfg = armodel.ModelConfig(
        seq_len=seq_len, d_model=int(merged["d_model"]),
        n_heads=int(merged["n_heads"]), n_layers=int(merged["n_layers"]),
        d_ff=int(merged["d_ff"]))
    tcfg = TrainConfig(
        batch=int(merged["batch"]), steps=int(merged["steps"]),
        lr=float(merged["lr"]), seed=int(merged.get("seed", seed)),
        eval_every=int(merged.get("eval_every", 500)))
    return mcfg, tcfg


class _AdamState:
    def __init__(self, params: armodel.ModelParams):
        self.m = {k: np.zeros_like(v) for k, v in params.arrays.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.arrays.items()}
        self.t = 0

    def update(self, params: armodel.ModelParams, grads: dict, cfg: TrainConfig):
        self.t += 1
        b1, b2 = cfg.beta1, cfg.beta2
        bias1 = 1.0 - b1 ** self.t
        bias2 = 1.0 - b2 ** self.t
        for name, g in grads.items():
            m = self.m[name]
            v = self.v[name]
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            params.arrays[name] -= (cfg.lr * (m / bias1)
                                    / (np.sqrt(v / bias2) + cfg.eps)).astype(
                                        params.arrays[name].dtype)


def pretrain(code: CodeTables, noise_model, model_config: armodel.ModelConfig,
             train_config: TrainConfig, *, metrics_cb=None,
             checkpoint_path: str | None = None,
             ) -> tuple[armodel.ModelParams, list[TrainReport]]:
    """Train a model on fresh noise samples; returns params and NLL reports.

    Reports are emitted every ``eval_every`` steps and at the final step;
    ``metrics_cb`` (if given) receives each TrainReport as it is produced.
    When the loss or a gradient turns non-finite the last reported
    parameters are attached to the raised NonFiniteError and, if a
    checkpoint path is set, remain saved there.
    """
    if model_config.seq_len != code.seq_len:
        raise ValueError(
            f"model seq_len {model_config.seq_len} != code 2n {code.seq_len}")
    root = np.random.SeedSequence(train_config.seed)
    init_ss, data_ss = root.spawn(2)
    params = armodel.init_params(model_config, seed=init_ss)
    data_rng = np.random.default_rng(data_ss)
    adam = _AdamState(params)
    reports: list[TrainReport] = []
    last_good = params.copy()
    start = time.perf_counter()

    for step in range(1, train_config.steps + 1):
        batch = sample_training_batch(code, noise_model, train_config.batch, data_rng)
        try:
            loss, grads = armodel.nll_and_grad(params, batch)
        except NonFiniteError as exc:
            exc.step = step
            exc.last_params = last_good
            raise
        adam.update(params, grads, train_config)
        if step % train_config.eval_every == 0 or step == train_config.steps:
            report = TrainReport(
                step=step, nll=loss,
                wall_ms=(time.perf_counter() - start) * 1e3)
            reports.append(report)
            if metrics_cb is not None:
                metrics_cb(report)
            if checkpoint_path is not None:
                armodel.save_checkpoint(
                    params, checkpoint_path, seed=train_config.seed, step=step)
            last_good = params.copy()
    return params, reports


def enumerate_configs(seq_len: int) -> np.ndarray:
    """All 2^seq_len bit sequences, most significant bit first."""
    idx = np.arange(1 << seq_len, dtype=np.int64)
    return ((idx[:, None] >> np.arange(seq_len - 1, -1, -1)) & 1).astype(np.uint8)


def exact_config_logprobs(code: CodeTables, noise_model) -> np.ndarray:
    """Exact log P over all configurations (enumeration-guarded)."""
    if code.seq_len > ENUM_SEQ_LIMIT:
        raise UnevaluableModelError(
            f"2n = {code.seq_len} exceeds enumeration limit {ENUM_SEQ_LIMIT}")
    if not hasattr(noise_model, "logprob"):
        raise UnevaluableModelError(
            "noise model has no pointwise probability; cannot enumerate")
    seqs = enumerate_configs(code.seq_len)
    return noise_model.logprob(els_sequence_to_pauli(code, seqs))


def evaluate_kl(params, code: CodeTables, noise_model, *,
                rng: np.random.Generator | None = None,
                mc_samples: int = 20000) -> tuple[float, float]:
    """Forward KL(P || q) in nats; exact by enumeration when 2n <= 14.

    Returns (kl, stderr); stderr is 0 for the exact path.  Falls back to a
    Monte Carlo estimate for larger codes, which still requires a noise
    model with pointwise probabilities.
    """
    if code.seq_len <= ENUM_SEQ_LIMIT:
        logp = exact_config_logprobs(code, noise_model)
        seqs = enumerate_configs(code.seq_len)
        logq = np.asarray(armodel.log_joint(params, seqs))
        with np.errstate(under="ignore"):
            p = np.exp(logp)
        mask = p > 0
        kl = float(np.sum(p[mask] * (logp[mask] - logq[mask])))
        return kl, 0.0
    if not hasattr(noise_model, "logprob"):
        raise UnevaluableModelError(
            "noise model has no pointwise probability; KL is unavailable")
    if rng is None:
        rng = np.random.default_rng(0)
    paulis = noise_model.sample_batch(rng, mc_samples)
    from .codes import els_bits
    seqs = els_bits(code, paulis)
    vals = np.asarray(noise_model.logprob(paulis)) - np.asarray(
        armodel.log_joint(params, seqs))
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(mc_samples))


def true_entropy(code: CodeTables, noise_model) -> float:
    """Exact entropy of the error distribution in nats (enumeration)."""
    logp = exact_config_logprobs(code, noise_model)
    with np.errstate(under="ignore"):
        p = np.exp(logp)
    mask = p > 0
    return float(-np.sum(p[mask] * logp[mask]))


def train_mismatched(code: CodeTables, train_p: float, eval_ps: list[float], *,
                     model_config: armodel.ModelConfig,
                     train_config: TrainConfig, trials: int, seed: int,
                     mismatched_params=None, matched_params_by_p=None,
                     refine_samples: int = 0) -> list[dict]:
    """Decode with a model trained at one rate across a grid of true rates.

    Trains (or reuses, when params are injected) one model at ``train_p``
    and, per evaluation rate, a matched model at that rate; decodes the same
    error stream with both and reports the paired rate gap.
    """
    from .decoding import decode_pretrained_batch, logical_error_rate_from_masks
    from .codes import els_bits
    rows = []
    if mismatched_params is None:
        mismatched_params, _ = pretrain(
            code, DepolarizingModel(code.n, train_p), model_config, train_config)
    matched_params_by_p = dict(matched_params_by_p or {})
    for i, p in enumerate(eval_ps):
        if p not in matched_params_by_p:
            matched_params_by_p[p], _ = pretrain(
                code, DepolarizingModel(code.n, p), model_config, train_config)
        rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(len(eval_ps))[i])
        noise_eval = DepolarizingModel(code.n, p)
        errors = noise_eval.sample_batch(rng, trials)
        seqs = els_bits(code, errors)
        gammas = seqs[:, :code.m]
        truth = seqs[:, code.m:code.m + 2 * code.k]
        beta_mis = decode_pretrained_batch(mismatched_params, code, gammas)
        beta_mat = decode_pretrained_batch(matched_params_by_p[p], code, gammas)
        rate_mis = logical_error_rate_from_masks(beta_mis, truth)
        rate_mat = logical_error_rate_from_masks(beta_mat, truth)
        rows.append(dict(
            p=p, train_p=train_p, trials=trials,
            mismatched_rate=rate_mis.rate, mismatched_stderr=rate_mis.stderr,
            matched_rate=rate_mat.rate, matched_stderr=rate_mat.stderr,
            gap=rate_mis.rate - rate_mat.rate))
    return rows


def train_config_to_dict(cfg: TrainConfig) -> dict:
    return asdict(cfg)
