"""Command-line front end.

Every subcommand is a thin client of the HTTP service: by default an
in-process app instance handles the calls, and ``--url`` points them at a
running server instead.  File handling (syndrome batches, checkpoints,
metrics, CSVs) stays on the client side.

Exit codes: 0 success, 1 configuration or invariant failure, 2 when a
request trips an enumeration-size guard.
"""

from __future__ import annotations

import argparse
import json
import os
import sys


class ClientError(Exception):
    def __init__(self, message: str, exit_code: int = 1):
        super().__init__(message)
        self.exit_code = exit_code


class ServiceClient:
    """Minimal JSON/bytes transport over TestClient or a live server."""

    def __init__(self, url: str | None = None):
        if url:
            import httpx
            self._client = httpx.Client(base_url=url, timeout=None)
        else:
            from fastapi.testclient import TestClient
            from .service import create_app
            self._client = TestClient(create_app())

    def _check(self, resp):
        if resp.status_code >= 400:
            try:
                body = resp.json()
                error = body.get("error", "error")
                detail = body.get("detail", resp.text)
            except (ValueError, AttributeError):
                error, detail = "error", resp.text
            raise ClientError(f"{error}: {detail}",
                              2 if error == "too_large" else 1)
        return resp

    def post(self, path: str, payload: dict) -> dict:
        return self._check(self._client.post(path, json=payload)).json()

    def post_bytes(self, path: str, data: bytes) -> dict:
        return self._check(self._client.post(
            path, content=data,
            headers={"content-type": "application/octet-stream"})).json()

    def get_json(self, path: str) -> dict:
        return self._check(self._client.get(path)).json()

    def get_bytes(self, path: str) -> bytes:
        return self._check(self._client.get(path)).content


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------

def _code_payload(spec: str) -> dict:
    """A spec names a built-in family unless it is a local file path."""
    if os.path.exists(spec):
        with open(spec) as fh:
            return {"check_matrix": fh.read()}
    return {"spec": spec}


def _create_code(client: ServiceClient, spec: str) -> dict:
    return client.post("/codes", _code_payload(spec))


def _noise_payload(args, value_attr: str = "p") -> dict | None:
    kind = getattr(args, "noise", "depolarizing")
    if kind == "depolarizing":
        value = getattr(args, value_attr, None)
        if value is None:
            return None
        return {"kind": "depolarizing", "p": value}
    if args.beta is None:
        raise ClientError("--noise ising requires --beta")
    return {"kind": "ising", "beta": args.beta, "graph_seed": args.graph_seed,
            "degree": args.degree, "h": args.field}


_OVERRIDE_KEYS = ("d_model", "n_heads", "n_layers", "d_ff",
                  "batch", "steps", "lr", "eval_every")


def _train_overrides(args) -> dict:
    """Profile defaults < JSON config file < explicit flags."""
    merged: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            try:
                loaded = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ClientError(f"config file is not valid JSON: {exc}")
        if not isinstance(loaded, dict):
            raise ClientError("config file must hold a JSON object")
        unknown = set(loaded) - set(_OVERRIDE_KEYS) - {"profile", "seed"}
        if unknown:
            raise ClientError(f"unknown config keys {sorted(unknown)}")
        merged.update(loaded)
    for key in _OVERRIDE_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _read_syndromes(path: str) -> list[str]:
    lines = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if line and not line.startswith("#"):
                lines.append(line)
    if not lines:
        raise ClientError(f"no syndromes found in {path}")
    return lines


def _write_decode_csv(path_or_none, all_rows: list[dict]) -> None:
    """CSV columns: syndrome, beta_hat, method, then per-bit log probs.

    Width is fixed by the widest row; methods without per-bit values get
    empty cells so every record has the same number of fields.
    """
    n_bits = max((len(r["logprob_bits"] or []) for r in all_rows), default=0)
    header = ["syndrome", "beta_hat", "method"]
    header += [f"logprob_bit{i}" for i in range(n_bits)]
    out_lines = [",".join(header)]
    for r in all_rows:
        bits = r["logprob_bits"] or []
        cells = [r["syndrome"], r["beta_hat"], r["method"]]
        cells += [repr(v) for v in bits]
        cells += [""] * (n_bits - len(bits))
        out_lines.append(",".join(cells))
    text = "\n".join(out_lines) + "\n"
    if path_or_none:
        with open(path_or_none, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ClientError(f"expected comma-separated floats, got {text!r}")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_build_code(client: ServiceClient, args) -> int:
    if args.kind is not None:
        if args.n is None:
            raise ClientError("--kind requires --n")
        payload = {"kind": args.kind, "size": args.n}
    elif args.file is not None:
        with open(args.file) as fh:
            payload = {"check_matrix": fh.read()}
    elif args.spec is not None:
        payload = _code_payload(args.spec)
    else:
        raise ClientError("give --kind/--n, --spec, or --file")
    summary = client.post("/codes", payload)
    detail = client.get_json(f"/codes/{summary['code_id']}")
    print(f"[[{detail['n']}, {detail['k']}]] code, "
          f"{detail['m']} checks, sequence length {detail['seq_len']}")
    failed = [name for name, ok in detail["checks"].items() if not ok]
    for name, ok in detail["checks"].items():
        print(f"  {'ok  ' if ok else 'FAIL'} {name}")
    out = args.out
    if out is None and args.kind is not None:
        out = f"{args.kind}{args.n}.code"
    if out is None and args.spec is not None and not os.path.exists(args.spec):
        out = f"{args.spec}.code"
    if out:
        lines = [detail["check_matrix"].rstrip("\n")]
        lines += [f"# pure_error {row}" for row in detail["pure_errors"]]
        lines += [f"# logical {row}" for row in detail["logicals"]]
        with open(out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"tables written to {out}")
    if failed:
        print(f"invariant failures: {', '.join(failed)}", file=sys.stderr)
        return 1
    print("all invariants passed")
    return 0


def cmd_train(client: ServiceClient, args) -> int:
    code = _create_code(client, args.code)
    noise = _noise_payload(args)
    if noise is None:
        raise ClientError("training needs --p (or --noise ising --beta)")
    overrides = _train_overrides(args)
    profile = args.profile
    if "profile" in overrides:
        profile = overrides.pop("profile")
    seed = overrides.pop("seed", args.seed)
    resp = client.post("/models", dict(
        code_id=code["code_id"], noise=noise, profile=profile,
        seed=seed, overrides=overrides))
    if args.metrics:
        with open(args.metrics, "w") as fh:
            for metric in resp["metrics"]:
                fh.write(json.dumps({"step": metric["step"],
                                     "nll": metric["nll"],
                                     "wall_ms": metric["wall_ms"]}) + "\n")
    blob = client.get_bytes(f"/models/{resp['model_id']}/checkpoint")
    with open(args.checkpoint, "wb") as fh:
        fh.write(blob)
    print(f"trained {resp['steps']} steps, final nll {resp['final_nll']:.6f}")
    print(f"checkpoint written to {args.checkpoint}")
    return 0


def _decode_with_methods(client: ServiceClient, args, methods: list[str]) -> int:
    code = _create_code(client, args.code)
    model_id = None
    if any(m in ("pretrained", "refined") for m in methods):
        if not getattr(args, "checkpoint", None):
            raise ClientError(f"{methods} decoding needs --checkpoint")
        with open(args.checkpoint, "rb") as fh:
            model_id = client.post_bytes("/models/load", fh.read())["model_id"]
    noise = _noise_payload(args)
    syndromes = _read_syndromes(args.input)
    rows: list[dict] = []
    for method in methods:
        if method != "pretrained" and noise is None:
            raise ClientError(f"{method} decoding needs --p "
                              "(or --noise ising --beta)")
        resp = client.post("/decode", dict(
            code_id=code["code_id"], method=method, syndromes=syndromes,
            model_id=model_id, noise=noise,
            refine_samples=args.refine_samples, seed=args.seed))
        rows.extend(resp["rows"])
    _write_decode_csv(args.output, rows)
    if args.output:
        print(f"{len(rows)} results written to {args.output}")
    return 0


def cmd_decode(client: ServiceClient, args) -> int:
    return _decode_with_methods(client, args, [args.method])


def cmd_oracle(client: ServiceClient, args) -> int:
    methods = {"mld": ["exact_mld"], "minweight": ["exact_minweight"],
               "both": ["exact_mld", "exact_minweight"]}[args.method]
    return _decode_with_methods(client, args, methods)


def cmd_sweep(client: ServiceClient, args) -> int:
    payload = dict(
        code=args.code, noise_kind=args.noise, grid=_float_list(args.p),
        methods=[m.strip() for m in args.methods.split(",") if m.strip()],
        trials=args.trials, seed=args.seed, profile=args.profile,
        train_overrides=_train_overrides(args),
        refine_samples=args.refine_samples)
    if args.noise == "ising":
        payload.update(ising_graph_seed=args.graph_seed,
                       ising_degree=args.degree, ising_h=args.field)
    resp = client.post("/sweep", payload)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(resp["csv"])
        print(f"{len(resp['rows'])} rows written to {args.out}")
    else:
        sys.stdout.write(resp["csv"])
    return 0


def cmd_selftest(client: ServiceClient, args) -> int:
    resp = client.post("/selftest", {})
    for check in resp["checks"]:
        mark = "ok  " if check["ok"] else "FAIL"
        detail = f" ({check['detail']})" if check["detail"] else ""
        print(f"{mark} {check['name']}{detail}")
    if not resp["ok"]:
        print("selftest FAILED", file=sys.stderr)
        return 1
    print("selftest passed")
    return 0


def cmd_serve(client: ServiceClient, args) -> int:
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_noise_flags(sp, single_rate: bool):
    sp.add_argument("--noise", choices=["depolarizing", "ising"],
                    default="depolarizing")
    if single_rate:
        sp.add_argument("--p", type=float, default=None,
                        help="depolarizing error rate")
    sp.add_argument("--beta", type=float, default=None,
                    help="interaction strength for correlated noise")
    sp.add_argument("--graph-seed", type=int, default=0, dest="graph_seed")
    sp.add_argument("--degree", type=int, default=4)
    sp.add_argument("--field", type=float, default=0.3,
                    help="on-site field for correlated noise")


def _add_train_flags(sp):
    sp.add_argument("--profile", default="desk")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--config", default=None,
                    help="JSON file with training overrides")
    sp.add_argument("--d-model", type=int, default=None, dest="d_model")
    sp.add_argument("--n-heads", type=int, default=None, dest="n_heads")
    sp.add_argument("--n-layers", type=int, default=None, dest="n_layers")
    sp.add_argument("--d-ff", type=int, default=None, dest="d_ff")
    sp.add_argument("--batch", type=int, default=None)
    sp.add_argument("--steps", type=int, default=None)
    sp.add_argument("--lr", type=float, default=None)
    sp.add_argument("--eval-every", type=int, default=None, dest="eval_every")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arqec",
        description="Train and run neural maximum-likelihood decoders "
                    "for stabilizer codes.")
    parser.add_argument("--url", default=None,
                        help="base URL of a running service "
                             "(default: run in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("build-code", help="build code tables and verify them")
    sp.add_argument("--kind", default=None,
                    help="code family: surface | rotated_surface | toric | repetition")
    sp.add_argument("--n", type=int, default=None,
                    help="size (distance, or qubit count for repetition)")
    sp.add_argument("--spec", default=None,
                    help="compact spec like surface3, or a check-matrix file")
    sp.add_argument("--file", default=None, help="check-matrix file to load")
    sp.add_argument("--out", default=None, help="tables output path")
    sp.set_defaults(func=cmd_build_code)

    sp = sub.add_parser("train", help="pretrain a decoder on sampled noise")
    sp.add_argument("--code", required=True)
    _add_noise_flags(sp, single_rate=True)
    _add_train_flags(sp)
    sp.add_argument("--checkpoint", required=True, help="checkpoint output path")
    sp.add_argument("--metrics", default=None, help="JSON-lines metrics path")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("decode", help="decode a batch of syndromes from a file")
    sp.add_argument("--code", required=True)
    sp.add_argument("--method", required=True,
                    choices=["pretrained", "refined", "exact_mld",
                             "exact_minweight"])
    sp.add_argument("--input", required=True,
                    help="file with one syndrome per line")
    sp.add_argument("--output", default=None, help="result CSV (default stdout)")
    sp.add_argument("--checkpoint", default=None)
    _add_noise_flags(sp, single_rate=True)
    sp.add_argument("--refine-samples", type=int, default=128,
                    dest="refine_samples")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_decode)

    sp = sub.add_parser("sweep",
                        help="logical error rate sweep over a rate grid")
    sp.add_argument("--code", required=True)
    sp.add_argument("--p", required=True,
                    help="comma-separated error rates (or interaction "
                         "strengths for correlated noise)")
    sp.add_argument("--methods", default="pretrained")
    sp.add_argument("--trials", type=int, default=10000)
    _add_noise_flags(sp, single_rate=False)
    _add_train_flags(sp)
    sp.add_argument("--refine-samples", type=int, default=128,
                    dest="refine_samples")
    sp.add_argument("--out", default=None, help="CSV output path (default stdout)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("oracle", help="run exact reference decoders")
    sp.add_argument("--code", required=True)
    sp.add_argument("--method", choices=["mld", "minweight", "both"],
                    default="both")
    sp.add_argument("--input", required=True,
                    help="file with one syndrome per line")
    sp.add_argument("--output", default=None, help="result CSV (default stdout)")
    _add_noise_flags(sp, single_rate=True)
    sp.add_argument("--refine-samples", type=int, default=128,
                    dest="refine_samples")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("selftest", help="run the built-in invariant suite")
    sp.set_defaults(func=cmd_selftest)

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    sp.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            return cmd_serve(None, args)
        client = ServiceClient(args.url)
        return args.func(client, args)
    except ClientError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
