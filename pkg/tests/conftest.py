"""Shared fixtures: disk-cached trained models so suites reuse checkpoints."""

import hashlib
import json
import os
from pathlib import Path

import numpy as np
import pytest

from arqec import model as armodel
from arqec.training import TrainConfig, pretrain

CACHE_DIR = Path(__file__).resolve().parent.parent / ".cache"


def _cache_key(tag: str, mcfg: armodel.ModelConfig, tcfg: TrainConfig) -> str:
    payload = json.dumps([
        tag,
        [mcfg.seq_len, mcfg.d_model, mcfg.n_heads, mcfg.n_layers, mcfg.d_ff],
        [tcfg.batch, tcfg.steps, tcfg.lr, tcfg.seed, tcfg.eval_every],
    ])
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def train_cached(tag: str, code, noise_model, mcfg: armodel.ModelConfig,
                 tcfg: TrainConfig) -> armodel.ModelParams:
    """Train once per (tag, config); later runs load the saved checkpoint.

    The tag must pin down everything the configs do not (code, noise).
    """
    CACHE_DIR.mkdir(exist_ok=True)
    path = CACHE_DIR / f"{_cache_key(tag, mcfg, tcfg)}.ckpt"
    if path.exists():
        return armodel.load_checkpoint(str(path))[0]
    params, _ = pretrain(code, noise_model, mcfg, tcfg,
                         checkpoint_path=str(path))
    return params


@pytest.fixture(scope="session")
def cache_dir():
    CACHE_DIR.mkdir(exist_ok=True)
    return CACHE_DIR


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
