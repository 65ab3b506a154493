"""FastAPI application exposing codes, training, decoding, and sweeps.

State lives in two in-process registries on ``app.state`` (codes and
models), so each app instance is an isolated workspace.  Every package
error maps onto a structured JSON error body: size/feasibility guards
become 422 responses, everything else a client can fix becomes 400.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .. import __version__
from .. import model as armodel
from ..codes import (build_code, build_code_from_spec, check_tables,
                     format_check_matrix, parse_check_matrix, puncture)
from ..decoding import decode_batch
from ..errors import (ArqecError, NonFiniteError, TooLargeError,
                      UnevaluableModelError)
from ..experiments import ExperimentConfig, run_selftest, run_sweep, selftest_passed
from ..noise import DepolarizingModel, IsingNoiseModel
from ..training import pretrain, resolve_profile
from . import schemas


def _noise_from_spec(spec: schemas.NoiseSpec, n: int):
    if spec.kind == "depolarizing":
        return DepolarizingModel(n, spec.p)
    return IsingNoiseModel.build(n, beta=spec.beta, seed=spec.graph_seed,
                                 degree=spec.degree, h=spec.h)


def _bits_to_str(bits) -> str:
    return "".join(str(int(b)) for b in np.asarray(bits).ravel())


def _parse_bits(text: str, length: int, what: str) -> np.ndarray:
    text = text.strip()
    if len(text) != length or set(text) - {"0", "1"}:
        raise ValueError(
            f"{what} must be exactly {length} bits of 0/1, got {text!r}")
    return np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")


def create_app() -> FastAPI:
    app = FastAPI(title="arqec", version=__version__)
    app.state.codes = {}
    app.state.models = {}
    app.state.counters = {"code": 0, "model": 0}

    def next_id(kind: str) -> str:
        app.state.counters[kind] += 1
        return f"{kind[0]}{app.state.counters[kind]:04d}"

    def get_code(code_id: str):
        code = app.state.codes.get(code_id)
        if code is None:
            raise KeyError(f"no such code {code_id!r}")
        return code

    def get_model(model_id: str):
        entry = app.state.models.get(model_id)
        if entry is None:
            raise KeyError(f"no such model {model_id!r}")
        return entry

    # -- error mapping ------------------------------------------------------

    def _json_error(status: int, error: str, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=status,
                            content={"error": error, "detail": str(exc)})

    @app.exception_handler(TooLargeError)
    def _too_large(request: Request, exc: TooLargeError):
        return _json_error(422, "too_large", exc)

    @app.exception_handler(UnevaluableModelError)
    def _unevaluable(request: Request, exc: UnevaluableModelError):
        return _json_error(422, "unevaluable_model", exc)

    @app.exception_handler(NonFiniteError)
    def _non_finite(request: Request, exc: NonFiniteError):
        return _json_error(422, "non_finite", exc)

    @app.exception_handler(ArqecError)
    def _package_error(request: Request, exc: ArqecError):
        return _json_error(400, "bad_request", exc)

    @app.exception_handler(ValueError)
    def _value_error(request: Request, exc: ValueError):
        return _json_error(400, "bad_request", exc)

    @app.exception_handler(KeyError)
    def _missing(request: Request, exc: KeyError):
        return _json_error(404, "not_found", exc)

    # -- health -------------------------------------------------------------

    @app.get("/healthz", response_model=schemas.HealthResponse)
    def healthz():
        return schemas.HealthResponse(status="ok", version=__version__)

    # -- codes --------------------------------------------------------------

    def _summary(code_id: str, code) -> schemas.CodeSummary:
        return schemas.CodeSummary(code_id=code_id, n=code.n, k=code.k,
                                   m=code.m, seq_len=code.seq_len,
                                   checks=check_tables(code))

    @app.post("/codes", response_model=schemas.CodeSummary)
    def create_code(req: schemas.BuildCodeRequest):
        if req.check_matrix is not None:
            code = parse_check_matrix(req.check_matrix)
        elif req.spec is not None:
            code = build_code_from_spec(req.spec)
        else:
            code = build_code(req.kind, req.size)
        code_id = next_id("code")
        app.state.codes[code_id] = code
        return _summary(code_id, code)

    @app.get("/codes", response_model=list[schemas.CodeSummary])
    def list_codes():
        return [_summary(cid, code) for cid, code in app.state.codes.items()]

    @app.get("/codes/{code_id}", response_model=schemas.CodeDetail)
    def code_detail(code_id: str):
        code = get_code(code_id)
        return schemas.CodeDetail(
            **_summary(code_id, code).model_dump(),
            check_matrix=format_check_matrix(code),
            pure_errors=[_bits_to_str(row) for row in code.pure_errors],
            logicals=[_bits_to_str(row) for row in code.logicals])

    @app.post("/codes/{code_id}/puncture", response_model=schemas.CodeSummary)
    def puncture_code(code_id: str, req: schemas.PunctureRequest):
        code = get_code(code_id)
        new_code = puncture(code, req.remove, seed=req.seed)
        new_id = next_id("code")
        app.state.codes[new_id] = new_code
        return _summary(new_id, new_code)

    # -- models -------------------------------------------------------------

    @app.post("/models", response_model=schemas.TrainResponse)
    def train_model(req: schemas.TrainRequest):
        code = get_code(req.code_id)
        mcfg, tcfg = resolve_profile(req.profile, code.seq_len,
                                     overrides=req.overrides, seed=req.seed)
        noise = _noise_from_spec(req.noise, code.n)
        metrics: list[schemas.TrainMetric] = []
        params, reports = pretrain(
            code, noise, mcfg, tcfg,
            metrics_cb=lambda r: metrics.append(schemas.TrainMetric(
                step=r.step, nll=r.nll, wall_ms=r.wall_ms)))
        model_id = next_id("model")
        app.state.models[model_id] = dict(
            params=params, seed=tcfg.seed, step=tcfg.steps)
        return schemas.TrainResponse(
            model_id=model_id, final_nll=reports[-1].nll, steps=tcfg.steps,
            metrics=metrics, config=dict(
                seq_len=mcfg.seq_len, d_model=mcfg.d_model,
                n_heads=mcfg.n_heads, n_layers=mcfg.n_layers, d_ff=mcfg.d_ff,
                batch=tcfg.batch, steps=tcfg.steps, lr=tcfg.lr,
                seed=tcfg.seed))

    @app.get("/models", response_model=list[schemas.ModelSummary])
    def list_models():
        return [schemas.ModelSummary(
            model_id=mid, seq_len=e["params"].config.seq_len,
            step=e["step"], config=vars(e["params"].config))
            for mid, e in app.state.models.items()]

    @app.get("/models/{model_id}/checkpoint")
    def download_checkpoint(model_id: str):
        entry = get_model(model_id)
        data = armodel.checkpoint_bytes(entry["params"], seed=entry["seed"],
                                        step=entry["step"])
        return Response(content=data, media_type="application/octet-stream")

    @app.post("/models/load", response_model=schemas.ModelSummary)
    async def load_model(request: Request):
        data = await request.body()
        params, header = armodel.params_from_checkpoint_bytes(data)
        model_id = next_id("model")
        app.state.models[model_id] = dict(
            params=params, seed=header.get("seed", 0),
            step=header.get("step", 0))
        return schemas.ModelSummary(model_id=model_id,
                                    seq_len=params.config.seq_len,
                                    step=header.get("step", 0),
                                    config=vars(params.config))

    # -- decoding -----------------------------------------------------------

    @app.post("/decode", response_model=schemas.DecodeResponse)
    def decode(req: schemas.DecodeRequest):
        code = get_code(req.code_id)
        gammas = np.stack([_parse_bits(s, code.m, "syndrome")
                           for s in req.syndromes])
        params = None
        if req.method in ("pretrained", "refined"):
            if req.model_id is None:
                raise ValueError(f"{req.method} decoding needs model_id")
            params = get_model(req.model_id)["params"]
            if params.config.seq_len != code.seq_len:
                raise ValueError(
                    f"model sequence length {params.config.seq_len} does not "
                    f"match code sequence length {code.seq_len}")
        noise = None
        if req.noise is not None:
            noise = _noise_from_spec(req.noise, code.n)
        beta, logprobs = decode_batch(
            code, req.method, gammas, params=params, noise_model=noise,
            refine_samples=req.refine_samples,
            rng=np.random.default_rng(req.seed))
        rows = []
        for i, syndrome in enumerate(req.syndromes):
            bits = (None if logprobs is None
                    else [float(v) for v in logprobs[i]])
            rows.append(schemas.DecodeRow(
                syndrome=syndrome.strip(), beta_hat=_bits_to_str(beta[i]),
                method=req.method, logprob_bits=bits))
        return schemas.DecodeResponse(rows=rows)

    # -- sweeps and selftest --------------------------------------------------

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep(req: schemas.SweepRequest):
        cfg = ExperimentConfig(
            code=req.code, noise_kind=req.noise_kind, grid=req.grid,
            methods=req.methods, trials=req.trials, seed=req.seed,
            profile=req.profile, train_overrides=req.train_overrides,
            refine_samples=req.refine_samples,
            ising_graph_seed=req.ising_graph_seed, ising_h=req.ising_h,
            ising_degree=req.ising_degree)
        rows, csv_text, meta = run_sweep(cfg)
        return schemas.SweepResponse(
            rows=[schemas.SweepRowModel(**vars(r)) for r in rows],
            csv=csv_text, meta=meta)

    @app.post("/selftest", response_model=schemas.SelftestResponse)
    def selftest():
        checks = run_selftest()
        return schemas.SelftestResponse(
            ok=selftest_passed(checks),
            checks=[schemas.SelftestCheck(name=c.name, ok=c.ok, detail=c.detail)
                    for c in checks])

    return app
