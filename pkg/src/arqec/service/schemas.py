"""Request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator


class HealthResponse(BaseModel):
    status: str
    version: str


class NoiseSpec(BaseModel):
    """Noise channel description shared by train/decode/sweep requests."""

    kind: Literal["depolarizing", "ising"] = "depolarizing"
    p: float | None = None          # depolarizing rate
    beta: float | None = None       # Ising inverse temperature
    graph_seed: int = 0
    degree: int = 4
    h: float = 0.3

    @model_validator(mode="after")
    def _check_fields(self):
        if self.kind == "depolarizing":
            if self.p is None:
                raise ValueError("depolarizing noise needs p")
            if not 0 <= self.p < 1:
                raise ValueError(f"p={self.p} outside [0, 1)")
        elif self.beta is None:
            raise ValueError("ising noise needs beta")
        return self


class BuildCodeRequest(BaseModel):
    """Build from a named family (`spec` like "surface3") or a check matrix."""

    spec: str | None = None
    kind: str | None = None
    size: int | None = None
    check_matrix: str | None = None

    @model_validator(mode="after")
    def _one_source(self):
        sources = [self.spec is not None,
                   self.kind is not None or self.size is not None,
                   self.check_matrix is not None]
        if sum(sources) != 1:
            raise ValueError(
                "provide exactly one of: spec, kind+size, check_matrix")
        if (self.kind is None) != (self.size is None):
            raise ValueError("kind and size go together")
        return self


class CodeSummary(BaseModel):
    code_id: str
    n: int
    k: int
    m: int
    seq_len: int
    checks: dict[str, bool]


class CodeDetail(CodeSummary):
    check_matrix: str
    pure_errors: list[str]
    logicals: list[str]


class PunctureRequest(BaseModel):
    remove: int = Field(ge=1)
    seed: int = 0


class TrainRequest(BaseModel):
    code_id: str
    noise: NoiseSpec
    profile: str = "desk"
    seed: int = 0
    overrides: dict[str, float] = Field(default_factory=dict)


class TrainMetric(BaseModel):
    step: int
    nll: float
    wall_ms: float


class TrainResponse(BaseModel):
    model_id: str
    final_nll: float
    steps: int
    metrics: list[TrainMetric]
    config: dict


class ModelSummary(BaseModel):
    model_id: str
    seq_len: int
    step: int
    config: dict


class DecodeRequest(BaseModel):
    code_id: str
    method: Literal["pretrained", "refined", "exact_mld", "exact_minweight"]
    syndromes: list[str] = Field(min_length=1)
    model_id: str | None = None
    noise: NoiseSpec | None = None
    refine_samples: int = 128
    seed: int = 0


class DecodeRow(BaseModel):
    syndrome: str
    beta_hat: str
    method: str
    logprob_bits: list[float] | None = None


class DecodeResponse(BaseModel):
    rows: list[DecodeRow]


class SweepRequest(BaseModel):
    code: str
    noise_kind: Literal["depolarizing", "ising"] = "depolarizing"
    grid: list[float] = Field(min_length=1)
    methods: list[str] = Field(default_factory=lambda: ["pretrained"])
    trials: int = 10000
    seed: int = 0
    profile: str = "desk"
    train_overrides: dict[str, float] = Field(default_factory=dict)
    refine_samples: int = 128
    ising_graph_seed: int = 0
    ising_h: float = 0.3
    ising_degree: int = 4


class SweepRowModel(BaseModel):
    p: float
    method: str
    logical_error_rate: float
    stderr: float
    trials: int
    wall_ms: float


class SweepResponse(BaseModel):
    rows: list[SweepRowModel]
    csv: str
    meta: dict


class SelftestCheck(BaseModel):
    name: str
    ok: bool
    detail: str = ""


class SelftestResponse(BaseModel):
    ok: bool
    checks: list[SelftestCheck]
