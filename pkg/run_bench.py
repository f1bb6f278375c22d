import argparse
import json
import logging
import os
import sys

from settings import BENCH_OUTPUT_DIR
from toolkit import SaConfig, ToolkitError, hardness_sweep, load_suite_config, run_suite

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description="Run a benchmark suite or a hardness sweep.")
    parser.add_argument("--config", required=True, help="suite TOML file")
    parser.add_argument("--out", default=BENCH_OUTPUT_DIR)
    parser.add_argument("--hardness-alphas", type=float, nargs="*", default=None,
                        help="run the Pareto hardness sweep over these alphas instead of the suite")
    parser.add_argument("--hardness-instances", type=int, default=50)
    parser.add_argument("--hardness-sweeps", type=int, default=100)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.info(f"--- Starting benchmark run from {args.config} ---")
    try:
        cfg = load_suite_config(args.config)
        if args.hardness_alphas:
            sa_cfg = SaConfig(n_sweep=args.hardness_sweeps, n_runs=cfg.sa.n_runs, workers=cfg.sa.workers)
            rows = hardness_sweep(cfg.generator, args.hardness_alphas, args.hardness_instances, sa_cfg,
                                  num_qubits=cfg.sizes[0], seed=cfg.master_seed)
            os.makedirs(args.out, exist_ok=True)
            path = os.path.join(args.out, "hardness_sweep.json")
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(rows, f, indent=2)
            logging.info(f"Wrote {path}")
            return 0
        result = run_suite(cfg, args.out)
    except (ToolkitError, ValueError, OSError) as e:
        logging.error(f"bench failed: {e}", exc_info=True)
        return 1

    logging.info(f"--- Benchmark finished: {result['records']} records, {result['failed']} failed ---")
    return 0


if __name__ == "__main__":
    sys.exit(main())
