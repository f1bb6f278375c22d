import argparse
import json
import logging
import sys

from settings import DEFAULT_EFFECTIVE_ANGLE
from toolkit import (BfDcqoConfig, MixerField, ToolkitError, build_cd_program, dump_program,
                     layout_for_instance, load_instance, load_layout, run_bfdcqo)

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description="Bias-field digitized counterdiabatic optimization.")
    parser.add_argument("--instance", required=True)
    parser.add_argument("--layout", default=None, help="layout JSON; defaults to the layout in the instance metadata")
    parser.add_argument("--iters", type=int, default=1)
    parser.add_argument("--shots", type=int, default=2000)
    parser.add_argument("--cvar", type=int, default=100)
    parser.add_argument("--trot", type=int, default=1)
    parser.add_argument("--pre-sweeps", type=int, default=1000)
    parser.add_argument("--pre-runs", type=int, default=100)
    parser.add_argument("--post-sweeps", type=int, default=10)
    parser.add_argument("--gamma", type=float, default=DEFAULT_EFFECTIVE_ANGLE)
    parser.add_argument("--bias-sign", type=int, default=-1, choices=(-1, 1))
    parser.add_argument("--bitflip", type=float, default=0.0)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--dump-program", default=None, help="write the first iteration's gate list here")
    parser.add_argument("--out", default=None)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        inst = load_instance(args.instance)
        layout = load_layout(args.layout) if args.layout else layout_for_instance(inst)
        cfg = BfDcqoConfig(n_iter=args.iters, n_shots=args.shots, n_cvar=args.cvar, n_trot=args.trot,
                           n_sweep_pre=args.pre_sweeps, n_runs_pre=args.pre_runs, n_sweep_post=args.post_sweeps,
                           effective_angle=args.gamma, bias_sign=args.bias_sign, bitflip_prob=args.bitflip,
                           seed=args.seed)
        result = run_bfdcqo(inst, layout, cfg)
        if args.dump_program:
            mixer = MixerField.uniform(inst.num_vars, cfg.transverse_field, cfg.bias_sign * result.pre_spin
                                       if result.pre_spin is not None else None)
            dump_program(build_cd_program(inst, mixer, layout, cfg.effective_angle / cfg.n_trot), args.dump_program)
    except (ToolkitError, ValueError, OSError) as e:
        logging.error(f"run-bfdcqo failed: {e}")
        return 1

    text = json.dumps(result.to_dict(), indent=2)
    if args.out:
        with open(args.out, 'w', encoding='utf-8') as f:
            f.write(text)
        logging.info(f"Wrote {args.out}")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
