"""Command-line front end: ``divlat-sim {build-check,fer,outage,slb,gen-code}``.

Runs are described by a JSON config; flags override config keys. Example::

    {"field": {"kind": "quadratic", "m": 10},
     "code": {"regular": {"N": 100, "wc": 3, "wr": 6, "seed": 1}},
     "channel": {"nakagami_m": 1.0, "rho_db": "10:30:2.5"},
     "run": {"target_errors": 100, "max_frames": 1000000, "trials": 1000000},
     "seed": 7, "workers": 1}
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import analysis
from .channel import RNG_NAME
from .errors import DivlatError, InvalidInput, UnusableField
from .latcore import (canonical_json, det_scaled, disc_gamma, fnv1a_64, log_det_scaled,
                      parity_identity_ok, spec_from_descriptor)
from .ldpc import code_from_descriptor, write_alist
from .numfield import field_from_descriptor, prime_above_2

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2
KINDS = ("build-check", "fer", "outage", "slb", "gen-code")
SEEDED = ("fer", "outage", "slb")
RUN_KEYS = {"target_errors", "max_frames", "chunk_frames", "z_box", "max_iter",
            "metric", "selection", "use_r", "trials"}


def parse_rho_grid(value) -> list[float]:
    """A list of dB values, or "a:b:step" with b included when it falls on the grid."""
    if isinstance(value, str):
        parts = value.split(":")
        if len(parts) != 3:
            raise InvalidInput(f"rho grid {value!r} must look like a:b:step")
        a, b, step = map(float, parts)
        if step <= 0:
            raise InvalidInput("rho grid step must be positive")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        return [round(a + i * step, 9) for i in range(max(count, 0))]
    return [float(v) for v in value]


def validate(config: dict, kind: str | None = None) -> list[str]:
    """All problems found in ``config``; an empty list means it is usable."""
    diags: list[str] = []
    config = normalize(config)
    kind = kind or config.get("kind")
    if kind not in KINDS:
        diags.append(f"run kind must be one of {', '.join(KINDS)}")
    if kind != "gen-code":
        fdesc = config.get("field")
        if not isinstance(fdesc, dict):
            diags.append("missing field descriptor")
        else:
            try:
                prime_above_2(field_from_descriptor(fdesc), config.get("prime_root"))
            except UnusableField as exc:
                diags.append(f"field: unusable field, {exc}")
            except DivlatError as exc:
                diags.append(f"field: {exc}")
    cdesc = config.get("code")
    if cdesc is None:
        diags.append("missing code descriptor")
    elif isinstance(cdesc, dict) and "regular" in cdesc:
        p = cdesc["regular"]
        try:
            N, wc, wr = int(p["N"]), int(p["wc"]), int(p["wr"])
            int(p["seed"])
            if (N * wc) % wr:
                diags.append(f"code: N*wc = {N * wc} is not divisible by wr = {wr}")
        except (KeyError, TypeError, ValueError):
            diags.append("code: regular descriptor needs integer N, wc, wr and seed")
    workers = config.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        diags.append("workers must be an integer >= 1")
    if kind in SEEDED:
        seed = config.get("seed")
        if not isinstance(seed, int) or seed < 0 or seed >= 2 ** 64:
            diags.append("--seed (unsigned 64-bit) is required for simulation runs")
        try:
            grid = parse_rho_grid(config.get("channel", {}).get("rho_db", []))
            if not grid:
                diags.append("rho grid is empty")
            elif any(b <= a for a, b in zip(grid, grid[1:])):
                diags.append("rho grid must be strictly increasing")
        except (InvalidInput, ValueError, TypeError) as exc:
            diags.append(f"rho grid: {exc}")
        m = config.get("channel", {}).get("nakagami_m", 1.0)
        if not isinstance(m, (int, float)) or m <= 0:
            diags.append("nakagami_m must be positive")
        run = config.get("run", {})
        unknown = set(run) - RUN_KEYS
        if unknown:
            diags.append(f"unknown run keys: {', '.join(sorted(unknown))}")
        if kind == "fer":
            try:
                analysis.SimConfig(**_sim_kwargs(config))
            except (DivlatError, TypeError) as exc:
                diags.append(f"run: {exc}")
        elif int(run.get("trials", 1)) < 1:
            diags.append("trials must be >= 1")
    return diags


def normalize(config: dict) -> dict:
    """Expand shorthands: a bare ``m`` means the quadratic field Q(sqrt m)."""
    if "field" not in config and "m" in config:
        m = config["m"]
        config = {k: v for k, v in config.items() if k != "m"}
        config["field"] = {"kind": "quadratic", "m": m}
    return config


def _sim_kwargs(config: dict) -> dict:
    run = {k: v for k, v in config.get("run", {}).items() if k != "trials"}
    run["nakagami_m"] = float(config.get("channel", {}).get("nakagami_m", 1.0))
    return run


def _build(config: dict, base_dir):
    return spec_from_descriptor(config["field"], config["code"], config.get("prime_root"), base_dir)


def write_atomic(path: Path, text: str) -> None:
    """Write via a temporary file in the target directory and rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out) -> None:
    if out:
        write_atomic(Path(out), text)
    else:
        sys.stdout.write(text)


def _header(config: dict, extra: dict) -> str:
    clean = {k: v for k, v in config.items() if k not in ("out", "kind")}
    meta = {"config": canonical_json(clean), "config_hash": fnv1a_64(canonical_json(clean)),
            "version": analysis.package_version(), **extra}
    return "".join(f"# {k}={v}\n" for k, v in sorted(meta.items()))


def run(config: dict, base_dir=None) -> int:
    """Execute a validated config. Returns the process exit status."""
    config = normalize(config)
    kind = config["kind"]
    out = config.get("out")
    if kind == "gen-code":
        h = code_from_descriptor(config["code"], base_dir)
        _emit(write_alist(h), out)
        return EXIT_OK

    spec = _build(config, base_dir)
    if kind == "build-check":
        ok = parity_identity_ok(spec)
        print(f"spec {spec.spec_hash()}: n={spec.n} N={spec.N} k={spec.k} d_K={spec.field.disc_dK}")
        print(f"disc = {disc_gamma(spec):,}")
        print(f"det_scaled = {det_scaled(spec):.10g}")
        print("parity identity OK" if ok else "parity identity FAILED")
        return EXIT_OK if ok else EXIT_RUNTIME

    seed = int(config["seed"])
    workers = int(config.get("workers", 1))
    grid = parse_rho_grid(config["channel"]["rho_db"])
    m = float(config["channel"].get("nakagami_m", 1.0))
    base = {"spec_hash": spec.spec_hash(), "seed": seed, "workers": workers, "rng": RNG_NAME}

    if kind == "fer":
        cfg = analysis.SimConfig(**_sim_kwargs(config))

        def report(p):
            print(f"rho={p.rho_db:g} dB  frames={p.trials}  errors={p.frame_errors}  fer={p.fer:.3e}",
                  flush=True)

        curve = analysis.fer_sim(spec, grid, seed, cfg, workers, progress=report)
        _emit(_header(config, base) + curve.csv_body(), out)
        return EXIT_OK

    trials = int(config.get("run", {}).get("trials", 1_000_000))
    rng = analysis.make_rng(seed, 0, 0)
    rho = analysis.db_to_linear(grid)
    if kind == "outage":
        est = analysis.poltyrev_outage(spec, rho, trials, m, rng)
        col = "p_out"
    else:
        detM = math.exp(log_det_scaled(spec) / spec.N)
        est = analysis.slb(spec.n, spec.N, detM, rho, trials, m, rng)
        col = "p_slb"
    lines = [f"rho_db,rho_linear,trials,{col},stderr"]
    for r_db, r, p, se in zip(grid, rho, np.atleast_1d(est.p), np.atleast_1d(est.stderr)):
        lines.append(f"{r_db:.6g},{r:.10g},{trials},{p:.10g},{se:.10g}")
        print(f"rho={r_db:g} dB  {col}={p:.3e}", flush=True)
    _emit(_header(config, base) + "\n".join(lines) + "\n", out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="divlat-sim", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--config", type=Path, help="JSON run description")
        p.add_argument("--out", type=Path, help="output path (default: stdout)")
        if kind in SEEDED:
            p.add_argument("--seed", type=int, help="master seed (required)")
            p.add_argument("--workers", type=int, help="worker processes (env DIVLAT_WORKERS)")
            p.add_argument("--rho-db", help='rho grid in dB, "a:b:step"')
    return ap


def load_config(args) -> tuple[dict, Path | None]:
    config: dict = {}
    base_dir = None
    if args.config is not None:
        config = json.loads(Path(args.config).read_text())
        base_dir = Path(args.config).resolve().parent
        if not isinstance(config, dict):
            raise InvalidInput("config must be a JSON object")
    config["kind"] = args.kind
    if getattr(args, "seed", None) is not None:
        config["seed"] = args.seed
    workers = getattr(args, "workers", None)
    if workers is None and args.kind in SEEDED and "workers" not in config and "DIVLAT_WORKERS" in os.environ:
        workers = int(os.environ["DIVLAT_WORKERS"])
    if workers is not None:
        config["workers"] = workers
    if getattr(args, "rho_db", None) is not None:
        config.setdefault("channel", {})["rho_db"] = args.rho_db
    if args.out is not None:
        config["out"] = str(args.out)
    return config, base_dir


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config, base_dir = load_config(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    diags = validate(config)
    if diags:
        for d in diags:
            print(f"config error: {d}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(config, base_dir)
    except (DivlatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
