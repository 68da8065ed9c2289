"""Command-line entry point.

Exit codes: 0 on success, 2 for invalid arguments or configuration, 1 when a
pipeline stage fails.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .cover import (
    APPENDIX_BASE,
    CoverSpec,
    cover_sphere,
    enumerate_candidates,
    family_size_bound,
    lemma_alpha,
    vertex_resolution,
)
from .errors import InvalidConfig, SimplexError
from .geometry import Simplex, load_simplex
from .harness import (
    SCHEMA,
    ExperimentConfig,
    _json_safe,
    dump_json,
    provenance,
    run_experiment,
    sweep_phase_transition,
)
from .localization import LocalizationBall, RN_STATEMENT, localize, min_samples_localize
from .minimax import assouad_family, empirical_minimax, fano_family, lecam_pair
from .sampler import NoisyModel, read_samples, sample, write_samples
from .scheffe import LearnerConfig, learn
from .spectral import cf_noisy, tail_energy


def _emit(obj, out):
    text = dump_json(_json_safe(obj), out)
    if out is None:
        sys.stdout.write(text)


def _args_payload(args) -> dict:
    skip = {"func", "out", "config", "command", "config_dict", "seed_given"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _load_config_defaults(parser, argv):
    """Apply ``--config file.json`` values as defaults before the real parse."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return None
    with open(known.config) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as e:
            raise InvalidConfig(f"{known.config}: {e}") from None


def cmd_generate(args):
    s = load_simplex(args.simplex) if args.simplex else Simplex.standard(args.K)
    model = NoisyModel(s, args.sigma)
    samples = sample(model, args.n, args.seed)
    if not args.out:
        raise InvalidConfig("generate needs --out for the CSV path")
    write_samples(samples, args.out, {"provenance": provenance(_args_payload(args), args.seed)})
    return 0


def cmd_localize(args):
    samples = read_samples(args.input)
    K = samples.dim
    defined = True
    try:
        ball = localize(samples, args.variant)
    except SimplexError as e:
        if getattr(e, "ball", None) is None:
            raise
        ball, defined = e.ball, False
    out = {"schema": SCHEMA, **ball.to_dict(), "noise_bound_defined": defined,
           "provenance": provenance(_args_payload(args), args.seed)}
    if args.delta is not None:
        m_req = min_samples_localize(K, args.delta)
        out["m_required"] = m_req
        out["sufficient"] = ball.m >= m_req
    _emit(out, args.out)
    return 0


def cmd_cover(args):
    with open(args.ball) as fh:
        ball = LocalizationBall.from_dict(json.load(fh))
    if math.isnan(ball.noise_bound):
        ball = LocalizationBall(ball.center, ball.radius, ball.statistic, ball.statistic, ball.m)
    K = ball.dim
    vol_floor = args.vol_floor if args.vol_floor is not None else 1e-3 * ball.radius**K / math.factorial(K)
    alpha = args.alpha if args.alpha is not None else lemma_alpha(vol_floor, K, args.theta_hi)
    spec = CoverSpec(args.eps, alpha, args.point_budget, args.tuple_budget, args.seed)
    eps_cov = vertex_resolution(spec, K)
    pts = cover_sphere(ball, eps_cov, spec, args.base)
    fam = enumerate_candidates(pts, ball, spec, args.theta_lo, args.theta_hi, vol_floor)
    out = {"schema": SCHEMA, **fam.to_dict(), "alpha": alpha, "eps_cov": eps_cov,
           "cover_target_count": pts.target_count,
           "log_family_size_bound": family_size_bound(ball, args.eps, alpha, K),
           "provenance": provenance(_args_payload(args), args.seed)}
    _emit(out, args.out)
    return 0


def _learner_from_args(args) -> LearnerConfig:
    return LearnerConfig(
        epsilon=args.eps, delta=args.delta, theta_lo=args.theta_lo, theta_hi=args.theta_hi,
        point_budget=args.point_budget, global_tuples=args.global_tuples, seeded_budget=args.seeded_budget,
        quad_size=args.quad_size, mc_mass=args.mc_mass, rn_variant=args.variant, seed=args.seed,
    )


def cmd_learn(args):
    samples = read_samples(args.input)
    res = learn(samples, _learner_from_args(args))
    out = {"schema": SCHEMA, **res.to_dict(), "provenance": provenance(_args_payload(args), args.seed)}
    _emit(out, args.out)
    return 0


def cmd_spectrum(args):
    s = load_simplex(args.simplex)
    omega = np.array([float(v) for v in args.omega.split(",")])
    if len(omega) != s.dim:
        raise InvalidConfig(f"--omega has {len(omega)} entries, simplex has K = {s.dim}")
    v = complex(cf_noisy(NoisyModel(s, args.sigma), omega))
    out = {"schema": SCHEMA, "re": v.real, "im": v.imag, "modulus": abs(v),
           "provenance": provenance(_args_payload(args), args.seed)}
    _emit(out, args.out)
    return 0


def cmd_tail(args):
    s = load_simplex(args.simplex)
    rep = tail_energy(s, args.alpha, args.grid, args.method, args.mc, args.seed)
    out = {"schema": SCHEMA, **rep.to_dict(), "provenance": provenance(_args_payload(args), args.seed)}
    _emit(out, args.out)
    return 0


def cmd_minimax(args):
    if args.construction == "fano":
        fam = fano_family(args.K, args.zeta, args.M, args.seed)
    elif args.construction == "assouad":
        fam = assouad_family(args.K, args.zeta, args.mode, args.subsample, args.seed)
    else:
        fam = lecam_pair(Simplex.standard(args.K), args.zeta)
    cfg = _learner_from_args(args)

    def learner(data):
        return learn(data, cfg)

    rep = empirical_minimax(fam, args.sigma, args.n, args.trials, learner, args.seed)
    prov = provenance(_args_payload(args), args.seed)
    lines = [f"# build={prov['build']} config_hash={prov['config_hash']} seed={prov['seed']}",
             "member_id,trial,tv_error"]
    lines += [f"{m},{t},{e!r}" for m, t, e in rep.rows]
    csv_text = "\n".join(lines) + "\n"
    summary = {"schema": SCHEMA, "construction": fam.construction, "members": len(fam), **rep.to_dict(),
               "provenance": prov}
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "minimax.csv"), "w") as fh:
            fh.write(csv_text)
        dump_json(_json_safe(summary), os.path.join(args.out, "minimax.json"))
    else:
        sys.stdout.write(csv_text)
        sys.stdout.write(dump_json(_json_safe(summary)))
    return 0


def _experiment_config(args, cfg_dict) -> ExperimentConfig:
    d = dict(cfg_dict or {})
    d.pop("schema", None)
    if args.seed_given:
        d["seed"] = args.seed
    if args.out:
        d["out"] = args.out
    if args.timing:
        d["timing"] = True
    return ExperimentConfig.from_dict(d)


def cmd_experiment(args):
    run_experiment(_experiment_config(args, args.config_dict))
    return 0


def cmd_phase(args):
    rep = sweep_phase_transition(_experiment_config(args, args.config_dict))
    if "warning" in rep.extra:
        sys.stderr.write("warning: " + rep.extra["warning"] + "\n")
    return 0


def _learner_flags(p):
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--theta-hi", type=float, default=5.0)
    p.add_argument("--theta-lo", type=float, default=5.0)
    p.add_argument("--point-budget", type=int, default=400)
    p.add_argument("--global-tuples", type=int, default=10)
    p.add_argument("--seeded-budget", type=int, default=15)
    p.add_argument("--quad-size", type=int, default=256)
    p.add_argument("--mc-mass", type=int, default=800)
    p.add_argument("--variant", choices=["statement", "proof"], default=RN_STATEMENT)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--config", default=None)

    parser = argparse.ArgumentParser(prog="noisysimplex", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="sample noisy points from a simplex")
    p.add_argument("--simplex")
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--n", type=int, default=1000)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("localize", parents=[common], help="localization ball and noise bound")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--variant", choices=["statement", "proof"], default=RN_STATEMENT)
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("cover", parents=[common], help="candidate family from a ball")
    p.add_argument("--ball", required=True)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--point-budget", type=int, default=5000)
    p.add_argument("--tuple-budget", type=int, default=200_000)
    p.add_argument("--theta-hi", type=float, default=5.0)
    p.add_argument("--theta-lo", type=float, default=5.0)
    p.add_argument("--vol-floor", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--base", type=float, default=APPENDIX_BASE)
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("learn", parents=[common], help="run the full learner on a sample file")
    p.add_argument("--in", dest="input", required=True)
    _learner_flags(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("spectrum", parents=[common], help="characteristic function at one frequency")
    p.add_argument("--simplex", required=True)
    p.add_argument("--omega", required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("tail", parents=[common], help="out-of-band spectral energy")
    p.add_argument("--simplex", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--method", choices=["closed_form_quadrature", "monte_carlo"], default="closed_form_quadrature")
    p.add_argument("--mc", type=int, default=200_000)
    p.set_defaults(func=cmd_tail)

    p = sub.add_parser("minimax", parents=[common], help="empirical risk on a lower-bound family")
    p.add_argument("--construction", choices=["fano", "assouad", "lecam"], required=True)
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--zeta", type=float, default=0.3)
    p.add_argument("--sigma", type=float, default=0.3)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--M", type=int, default=8)
    p.add_argument("--mode", choices=["tv", "vertex_l1"], default="tv")
    p.add_argument("--subsample", type=int, default=64)
    _learner_flags(p)
    p.set_defaults(func=cmd_minimax)

    p = sub.add_parser("experiment", parents=[common], help="run an experiment config")
    p.add_argument("--timing", action="store_true", help="record runtime_ms (breaks byte identity)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("phase", parents=[common], help="sigma sweep with phase-transition flag")
    p.add_argument("--timing", action="store_true", help="record runtime_ms (breaks byte identity)")
    p.set_defaults(func=cmd_phase)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        cfg_dict = _load_config_defaults(parser, argv)
        args = parser.parse_args(argv)
        args.seed_given = args.seed is not None
        if args.command not in ("experiment", "phase") and cfg_dict:
            # flat config files supply defaults for flags not given on the command line
            for k, v in cfg_dict.items():
                key = k.replace("-", "_")
                if hasattr(args, key) and f"--{k.replace('_', '-')}" not in argv:
                    setattr(args, key, v)
            args.seed_given = args.seed is not None
        if args.command in ("experiment", "phase") and cfg_dict is None:
            raise InvalidConfig(f"{args.command} needs --config file.json")
        args.config_dict = cfg_dict
        if args.seed is None:
            args.seed = 0
        return args.func(args)
    except InvalidConfig as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    except (SimplexError, OSError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
