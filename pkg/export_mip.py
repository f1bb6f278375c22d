import argparse
import json
import logging
import os
import sys

from toolkit import ToolkitError, export_lp, linearize, load_instance, model_stats, warm_start_from_sa

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description="Linearize a HUBO instance into an LP model.")
    parser.add_argument("--instance", required=True)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--policy", choices=("termwise", "shared"), default="termwise")
    parser.add_argument("--warm-start-sweeps", type=int, default=10,
                        help="SA sweeps for the warm start; 0 skips it")
    parser.add_argument("--warm-start-runs", type=int, default=1)
    parser.add_argument("--seed", type=int, default=None)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    os.makedirs(args.out, exist_ok=True)
    try:
        inst = load_instance(args.instance)
        model = linearize(inst, args.policy)
        export_lp(model, os.path.join(args.out, "model.lp"))
        stats = model_stats(model)
        if args.warm_start_sweeps > 0:
            _, warm_energy = warm_start_from_sa(inst, model, os.path.join(args.out, "warm_start.txt"),
                                                n_sweep=args.warm_start_sweeps, n_runs=args.warm_start_runs,
                                                seed=args.seed)
            stats["warm_start_energy"] = warm_energy
    except (ToolkitError, ValueError, OSError) as e:
        logging.error(f"export-mip failed: {e}")
        return 1

    with open(os.path.join(args.out, "model_stats.json"), 'w', encoding='utf-8') as f:
        json.dump(stats, f, indent=2)
    logging.info(f"Model: {stats['variables']} variables, {stats['constraints']} constraints -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
