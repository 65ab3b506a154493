"""Experiment harness: error-rate sweeps, paired comparisons, self-test.

A sweep trains (or reuses) one model per grid point, decodes one shared
error stream per point with every requested method, and emits rows of
``p,method,logical_error_rate,stderr,trials,wall_ms``.  All randomness flows
from a single root seed through named substreams recorded in the CSV header
comments, so a rerun with the same configuration reproduces the same rows.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import model as armodel
from .codes import build_code_from_spec, check_tables, repetition_code, \
    surface_code, rotated_surface_code, toric_code, puncture
from .decoding import METHODS, decode_multi
from .errors import UnpairedDataError
from .noise import DepolarizingModel, IsingNoiseModel
from .training import PROFILES, TrainConfig, pretrain, resolve_profile


@dataclass
class ExperimentConfig:
    code: str
    noise_kind: str = "depolarizing"
    grid: list[float] = field(default_factory=lambda: [0.05, 0.10, 0.15])
    methods: list[str] = field(default_factory=lambda: ["pretrained"])
    trials: int = 10000
    seed: int = 0
    profile: str = "desk"
    train_overrides: dict = field(default_factory=dict)
    refine_samples: int = 128
    ising_graph_seed: int = 0
    ising_h: float = 0.3
    ising_degree: int = 4

    def __post_init__(self):
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}")
        if self.noise_kind == "depolarizing":
            bad = [p for p in self.grid if not 0 < p < 0.5]
            if bad:
                raise ValueError(f"grid rates outside (0, 0.5): {bad}")
        if self.trials <= 0:
            raise ValueError("trials must be positive")


@dataclass
class SweepRow:
    p: float
    method: str
    logical_error_rate: float
    stderr: float
    trials: int
    wall_ms: float


def _noise_for(cfg: ExperimentConfig, n: int, value: float):
    if cfg.noise_kind == "depolarizing":
        return DepolarizingModel(n, value)
    if cfg.noise_kind == "ising":
        return IsingNoiseModel.build(
            n, beta=value, seed=cfg.ising_graph_seed,
            degree=cfg.ising_degree, h=cfg.ising_h)
    raise ValueError(f"unknown noise kind {cfg.noise_kind!r}")


def _train_cache_key(code_spec, noise_kind, value, mcfg, tcfg, extra=()):
    payload = json.dumps([
        code_spec, noise_kind, value,
        [mcfg.seq_len, mcfg.d_model, mcfg.n_heads, mcfg.n_layers, mcfg.d_ff],
        [tcfg.batch, tcfg.steps, tcfg.lr, tcfg.seed, tcfg.eval_every],
        list(extra)], sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:20]


def train_for_sweep(cfg: ExperimentConfig, code, value: float, seed: int,
                    checkpoint_dir: str | None = None, metrics_cb=None):
    """Train (or load a cached) model for one grid point."""
    mcfg, tcfg = resolve_profile(cfg.profile, code.seq_len,
                                 overrides=cfg.train_overrides, seed=seed)
    tcfg.seed = seed
    noise = _noise_for(cfg, code.n, value)
    if checkpoint_dir:
        extra = ((cfg.ising_graph_seed, cfg.ising_h, cfg.ising_degree)
                 if cfg.noise_kind == "ising" else ())
        key = _train_cache_key(cfg.code, cfg.noise_kind, value, mcfg, tcfg, extra)
        path = os.path.join(checkpoint_dir, f"{key}.ckpt")
        if os.path.exists(path):
            params, _ = armodel.load_checkpoint(path)
            return params
        os.makedirs(checkpoint_dir, exist_ok=True)
        params, _ = pretrain(code, noise, mcfg, tcfg, metrics_cb=metrics_cb,
                             checkpoint_path=path)
        return params
    params, _ = pretrain(code, noise, mcfg, tcfg, metrics_cb=metrics_cb)
    return params


def run_sweep(cfg: ExperimentConfig, *, checkpoint_dir: str | None = None,
              metrics_cb=None) -> tuple[list[SweepRow], str, dict]:
    """Run a full sweep; returns (rows, csv_text, metadata)."""
    code = build_code_from_spec(cfg.code)
    needs_model = bool({"pretrained", "refined"} & set(cfg.methods))
    root = np.random.SeedSequence(cfg.seed)
    point_seeds = root.spawn(2 * len(cfg.grid))  # (train, decode) per point
    rows: list[SweepRow] = []
    hashes = {}
    for i, value in enumerate(cfg.grid):
        train_ss, decode_ss = point_seeds[2 * i], point_seeds[2 * i + 1]
        params = None
        if needs_model:
            train_seed = int(train_ss.generate_state(1)[0])
            params = train_for_sweep(cfg, code, value, train_seed,
                                     checkpoint_dir=checkpoint_dir,
                                     metrics_cb=metrics_cb)
        noise = _noise_for(cfg, code.n, value)
        result = decode_multi(
            code, noise, cfg.methods, cfg.trials,
            np.random.default_rng(decode_ss), params=params,
            refine_samples=cfg.refine_samples)
        hashes[value] = result["error_stream_hash"]
        for method in cfg.methods:
            mask = result["success"][method]
            failures = int((~mask).sum())
            rate = failures / cfg.trials
            rows.append(SweepRow(
                p=value, method=method, logical_error_rate=rate,
                stderr=float(np.sqrt(rate * (1 - rate) / cfg.trials)),
                trials=cfg.trials, wall_ms=result["wall_ms"][method]))
    meta = dict(seed=cfg.seed, code=cfg.code, noise_kind=cfg.noise_kind,
                profile=cfg.profile, error_stream_hashes=hashes)
    return rows, format_sweep_csv(rows, meta), meta


def format_sweep_csv(rows: list[SweepRow], meta: dict | None = None) -> str:
    """Serialize sweep rows with reproducibility metadata in '#' comments."""
    out = io.StringIO()
    if meta:
        out.write(f"# seed={meta['seed']} code={meta['code']} "
                  f"noise={meta['noise_kind']} profile={meta['profile']}\n")
        for value, digest in meta.get("error_stream_hashes", {}).items():
            out.write(f"# error_stream p={value!r} sha256_16={digest}\n")
    out.write("p,method,logical_error_rate,stderr,trials,wall_ms\n")
    for r in rows:
        out.write(f"{r.p!r},{r.method},{r.logical_error_rate!r},"
                  f"{r.stderr!r},{r.trials},{r.wall_ms:.3f}\n")
    return out.getvalue()


def mask_wall_ms(csv_text: str) -> str:
    """Blank the wall-clock column for determinism comparisons."""
    lines = []
    for line in csv_text.splitlines():
        if line.startswith("#") or line.startswith("p,"):
            lines.append(line)
            continue
        parts = line.split(",")
        parts[-1] = "-"
        lines.append(",".join(parts))
    return "\n".join(lines) + "\n"


def compare_methods(success_masks: dict[str, np.ndarray], *,
                    baseline: str | None = None) -> list[dict]:
    """Paired per-trial comparison of failure counts between methods.

    Each output row reports the paired difference in failures
    (method - baseline), its normal-approximation 95% confidence interval,
    and the per-method failure counts.  All masks must come from the same
    error stream (same length); otherwise UnpairedDataError.
    """
    names = list(success_masks)
    if not names:
        return []
    lengths = {name: len(success_masks[name]) for name in names}
    if len(set(lengths.values())) != 1:
        raise UnpairedDataError(f"trial counts differ: {lengths}")
    trials = lengths[names[0]]
    baseline = baseline or names[0]
    if baseline not in success_masks:
        raise UnpairedDataError(f"baseline {baseline!r} missing from masks")
    base_fail = ~np.asarray(success_masks[baseline], dtype=bool)
    rows = []
    for name in names:
        fail = ~np.asarray(success_masks[name], dtype=bool)
        diff = fail.astype(np.int64) - base_fail.astype(np.int64)
        mean = diff.mean()
        half = 1.96 * diff.std(ddof=1) / np.sqrt(trials) if trials > 1 else 0.0
        rows.append(dict(
            method=name, baseline=baseline, trials=trials,
            failures=int(fail.sum()), baseline_failures=int(base_fail.sum()),
            diff_failures=int(diff.sum()), diff_rate=float(mean),
            diff_ci95=(float(mean - half), float(mean + half))))
    return rows


# ---------------------------------------------------------------------------
# Self-test
# ---------------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def run_selftest() -> list[CheckResult]:
    """Fast invariant suite across every module; seconds, not minutes."""
    checks: list[CheckResult] = []

    def record(name, fn):
        start = time.perf_counter()
        try:
            fn()
            checks.append(CheckResult(
                name, True, f"{(time.perf_counter() - start) * 1e3:.0f} ms"))
        except Exception as exc:  # noqa: BLE001 - report, do not crash
            checks.append(CheckResult(name, False, f"{type(exc).__name__}: {exc}"))

    def table_identities():
        for code in (repetition_code(3), repetition_code(5), surface_code(3),
                     rotated_surface_code(3), toric_code(3),
                     puncture(surface_code(3), 2, seed=11)):
            failed = [k for k, v in check_tables(code).items() if not v]
            assert not failed, f"{failed} on n={code.n},k={code.k}"
    record("code_table_identities", table_identities)

    def roundtrip():
        rng = np.random.default_rng(5)
        for code in (repetition_code(4), surface_code(3)):
            errors = rng.integers(0, 2, size=(200, code.seq_len)).astype(np.uint8)
            from .codes import els_bits, els_sequence_to_pauli
            back = els_bits(code, els_sequence_to_pauli(code, errors))
            assert np.array_equal(back, errors)
    record("els_roundtrip", roundtrip)

    def model_normalization():
        from .training import enumerate_configs
        cfg = armodel.ModelConfig(seq_len=6, d_model=8, n_heads=2,
                                  n_layers=1, d_ff=8)
        params = armodel.init_params(cfg, seed=3, dtype=np.float64)
        total = np.exp(armodel.log_joint(params, enumerate_configs(6))).sum()
        assert abs(total - 1.0) < 1e-6, total
    record("joint_normalization", model_normalization)

    def gradient_spot_check():
        cfg = armodel.ModelConfig(seq_len=4, d_model=8, n_heads=2,
                                  n_layers=1, d_ff=8)
        params = armodel.init_params(cfg, seed=1, dtype=np.float64)
        rng = np.random.default_rng(2)
        batch = rng.integers(0, 2, size=(6, 4)).astype(np.uint8)
        _, grads = armodel.nll_and_grad(params, batch)
        h = 1e-5
        for name in ("head_w", "layer0.wq", "tok_emb"):
            arr = params.arrays[name]
            idx = tuple(rng.integers(0, s) for s in arr.shape)
            keep = arr[idx]
            arr[idx] = keep + h
            up, _ = armodel.nll_and_grad(params, batch)
            arr[idx] = keep - h
            down, _ = armodel.nll_and_grad(params, batch)
            arr[idx] = keep
            fd = (up - down) / (2 * h)
            rel = abs(fd - grads[name][idx]) / max(abs(fd), 1e-12)
            assert rel < 1e-4, f"{name}{idx}: {rel}"
    record("gradient_finite_difference", gradient_spot_check)

    def checkpoint_roundtrip():
        import tempfile
        cfg = armodel.ModelConfig(seq_len=6, d_model=8, n_heads=2,
                                  n_layers=1, d_ff=8)
        params = armodel.init_params(cfg, seed=9)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "m.ckpt")
            armodel.save_checkpoint(params, path, seed=9, step=17)
            loaded, header = armodel.load_checkpoint(path)
            assert header["step"] == 17
            for k, v in params.arrays.items():
                assert np.array_equal(v, loaded.arrays[k]), k
    record("checkpoint_roundtrip", checkpoint_roundtrip)

    def depolarizing_normalization():
        from .training import exact_config_logprobs
        code = repetition_code(3)
        logp = exact_config_logprobs(code, DepolarizingModel(3, 0.23))
        assert abs(np.exp(logp).sum() - 1.0) < 1e-9
    record("depolarizing_normalization", depolarizing_normalization)

    def gf2_properties():
        from . import gf2
        rng = np.random.default_rng(7)
        for _ in range(25):
            mat = rng.integers(0, 2, size=(5, 8)).astype(np.uint8)
            red, pivots = gf2.gaussian_eliminate(mat)
            kernel = gf2.kernel_basis(mat)
            assert not ((mat @ kernel.T) & 1).any()
            assert len(pivots) + kernel.shape[0] == 8
    record("gf2_kernel_rank", gf2_properties)

    return checks


def selftest_passed(checks: list[CheckResult]) -> bool:
    return all(c.ok for c in checks)
