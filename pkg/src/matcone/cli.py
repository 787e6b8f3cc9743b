"""Command-line entry point.

Evaluates individual transforms on demand (`gamma`, `beta`, `volume`,
`gg`, `ek`, `radon`, `dual-radon`) and runs the full verification suite
(`verify`) with seeded reproducibility.  Exit codes: 0 success, 1 failed
verification rows, 2 flag or domain errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .core import DimError, DomainError, SpdMatrix
from .fracint import IntegralSpec, WallachParameter, ek_integral, gg_integral
from .functions import NAMED, named_test_function
from .radon import GrassmannConfig, ZonalFunction, dual_radon, radon
from .sampling import MonteCarloEstimate, RngState, sample_matrix_interval, sample_stiefel
from .special import siegel_beta, siegel_gamma, siegel_log_gamma, stiefel_volume
from .suite import SuiteConfig, exit_code, report_to_json, run_suite, summarize, write_report


def _parse_point(spec: str, rank: int, seed: int) -> SpdMatrix:
    """Evaluation-point spec: 'random', 'scaled:<t>' or 'diag:<v1,v2,..>'."""
    if spec == "random":
        return sample_matrix_interval(np.eye(rank), RngState(seed, (999,)))
    if spec.startswith("scaled:"):
        t = float(spec.split(":", 1)[1])
        return SpdMatrix.from_full(t * np.eye(rank))
    if spec.startswith("diag:"):
        vals = [float(x) for x in spec.split(":", 1)[1].split(",")]
        if len(vals) != rank:
            raise DomainError(f"diag spec needs {rank} entries")
        return SpdMatrix.from_full(np.diag(vals))
    raise DomainError(f"bad point spec {spec!r}")


def _parse_beta(spec: str) -> WallachParameter:
    if spec.startswith("half:"):
        return WallachParameter.half(int(spec.split(":", 1)[1]))
    return WallachParameter.generic(float(spec))


def _parse_dims(text: str):
    out = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        vals = tuple(int(x) for x in part.split(","))
        if len(vals) != 4:
            raise DomainError(f"dims tuple needs 4 entries, got {part!r}")
        out.append(vals)
    if not out:
        raise DomainError("empty dims list")
    return tuple(out)


def _emit(value, stderr, n_samples, seed, as_json: bool):
    if as_json:
        print(json.dumps(
            {"value": value, "stderr": stderr, "n_samples": n_samples, "seed": seed}
        ))
    elif stderr:
        print(f"{value:.10g} +- {stderr:.3g}")
    else:
        print(f"{value:.10g}")


def _emit_estimate(est: MonteCarloEstimate, as_json: bool):
    _emit(est.value, est.stderr, est.n_samples, est.seed, as_json)


def _read_config_file(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"bad config line {line!r}")
            key, val = (x.strip() for x in line.split("=", 1))
            out[key] = val
    return out


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="matcone")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gamma", help="Siegel gamma function of the cone")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--log", action="store_true")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("beta", help="beta function of the cone")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("volume", help="Stiefel manifold volume")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--json", action="store_true")

    def mc_common(p, with_side=True):
        if with_side:
            p.add_argument("--side", choices=("left", "right"), default="left")
        p.add_argument("--samples", type=int, default=1_000_000)
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--json", action="store_true")

    p = sub.add_parser("gg", help="fractional integral over a matrix interval")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--f", choices=NAMED, default="const1")
    p.add_argument("--power", type=float, default=1.0, help="exponent for det-p")
    p.add_argument("--s", default="random")
    mc_common(p)

    p = sub.add_parser("ek", help="two-parameter (Erdelyi-Kober type) integral")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", required=True, help="real value or half:<m>")
    p.add_argument("--f", choices=NAMED, default="const1")
    p.add_argument("--power", type=float, default=1.0)
    p.add_argument("--s", default="random")
    mc_common(p)

    for name in ("radon", "dual-radon"):
        p = sub.add_parser(name, help=f"{name} transform of a zonal lift at a random frame")
        p.add_argument("--dims", required=True, help="n,m,k,l")
        p.add_argument("--f0", choices=NAMED, default="exp-tr")
        p.add_argument("--power", type=float, default=1.0)
        mc_common(p, with_side=False)

    p = sub.add_parser("verify", help="run the full verification suite")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--dims", default=None, help="n,m,k,l[;n,m,k,l...]")
    p.add_argument("--z-cap", dest="z_cap", type=float, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--config", default=None, help="key = value file; flags override")
    p.add_argument("--json", action="store_true", help="print the JSON report to stdout")
    return top


def _run_verify(args) -> int:
    file_cfg = _read_config_file(args.config) if args.config else {}

    def pick(flag, key, cast, default):
        if flag is not None:
            return flag
        if key in file_cfg:
            return cast(file_cfg[key])
        return default

    cfg = SuiteConfig(
        seed=pick(args.seed, "seed", int, 42),
        samples=pick(args.samples, "samples", int, 1_000_000),
        dims=pick(
            _parse_dims(args.dims) if args.dims else None, "dims", _parse_dims,
            SuiteConfig.dims,
        ),
        z_cap=pick(args.z_cap, "z-cap", float, 3.0),
        out=pick(args.out, "out", str, None),
        workers=pick(args.workers, "workers", int, 1),
    )
    report = run_suite(cfg)
    if cfg.out:
        write_report(report, cfg.out)
    if args.json:
        sys.stdout.write(report_to_json(report))
    else:
        print(summarize(report))
        if cfg.out:
            print(f"report written to {cfg.out}")
    return exit_code(report)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gamma":
            val = (
                siegel_log_gamma(args.rank, args.alpha)
                if args.log
                else siegel_gamma(args.rank, args.alpha)
            )
            _emit(val, 0.0, 0, 0, args.json)
        elif args.command == "beta":
            _emit(siegel_beta(args.rank, args.alpha, args.beta), 0.0, 0, 0, args.json)
        elif args.command == "volume":
            _emit(stiefel_volume(args.n, args.m), 0.0, 0, 0, args.json)
        elif args.command == "gg":
            f = named_test_function(args.f, args.rank, args.power)
            s = _parse_point(args.s, args.rank, args.seed)
            spec = IntegralSpec(args.side, args.alpha, s, args.samples, RngState(args.seed))
            _emit_estimate(gg_integral(spec, f), args.json)
        elif args.command == "ek":
            f = named_test_function(args.f, args.rank, args.power)
            s = _parse_point(args.s, args.rank, args.seed)
            est = ek_integral(
                args.side, args.alpha, _parse_beta(args.beta), f, s,
                args.samples, RngState(args.seed),
            )
            _emit_estimate(est, args.json)
        elif args.command in ("radon", "dual-radon"):
            dims = _parse_dims(args.dims)
            if len(dims) != 1:
                raise DomainError("exactly one dims tuple expected")
            g = GrassmannConfig(*dims[0])
            f0 = named_test_function(args.f0, g.ell, args.power)
            rng = RngState(args.seed)
            if args.command == "radon":
                lift = ZonalFunction(g.ell, f0, g.n, g.m)
                frame = sample_stiefel(g.n, g.n - g.k, rng.substream(0))
                est = radon(lift, frame, g, args.samples, rng.substream(1))
            else:
                lift = ZonalFunction(g.ell, f0, g.n, g.n - g.k)
                frame = sample_stiefel(g.n, g.m, rng.substream(0))
                est = dual_radon(lift, frame, g, args.samples, rng.substream(1))
            _emit_estimate(est, args.json)
        elif args.command == "verify":
            return _run_verify(args)
    except (DomainError, DimError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
