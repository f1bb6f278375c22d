import argparse
import json
import logging
import sys

from toolkit import SaConfig, ToolkitError, anneal, load_instance, spins_from_bitstring

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description="Simulated annealing on a HUBO instance.")
    parser.add_argument("--instance", required=True, help="instance JSON file")
    parser.add_argument("--sweeps", type=int, default=1000)
    parser.add_argument("--runs", type=int, default=100)
    parser.add_argument("--t-final-ratio", type=float, default=0.01)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--zero-temp", action="store_true", help="greedy descent: accept only dE < 0")
    parser.add_argument("--init", default=None,
                        help="start configurations, one 0/1 bitstring per line (one shared line, or one per run)")
    parser.add_argument("--out", default=None, help="result JSON file (stdout when omitted)")
    return parser.parse_args(argv)


def read_initial_states(path: str):
    with open(path, 'r', encoding='utf-8') as f:
        rows = [spins_from_bitstring(line).tolist() for line in f if line.strip() and not line.startswith('#')]
    if not rows:
        raise ValueError(f"{path} holds no bitstrings")
    return rows[0] if len(rows) == 1 else rows


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        inst = load_instance(args.instance)
        cfg = SaConfig(n_sweep=args.sweeps, n_runs=args.runs, t_final_ratio=args.t_final_ratio, seed=args.seed,
                       workers=args.workers, zero_temperature=args.zero_temp,
                       initial_state=read_initial_states(args.init) if args.init else None)
        result = anneal(inst, cfg).to_dict()
    except (ToolkitError, ValueError, OSError) as e:
        logging.error(f"solve-sa failed: {e}")
        return 1

    text = json.dumps(result, indent=2)
    if args.out:
        with open(args.out, 'w', encoding='utf-8') as f:
            f.write(text)
        logging.info(f"Wrote {args.out}")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
