import argparse
import json
import logging
import sys

from toolkit import GeneratorConfig, ToolkitError, generate_instance, save_instance, save_layout, term_counts

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description="Heavy-hex HUBO instance generator.")
    parser.add_argument("--topology", choices=("patch", "heavy_hex", "heron"), default="patch")
    parser.add_argument("--num-qubits", type=int, default=14, help="patch size")
    parser.add_argument("--rows", type=int, default=1)
    parser.add_argument("--cols", type=int, default=1)
    parser.add_argument("--full-lines", action="store_true")
    parser.add_argument("--n", type=int, default=1, help="number of layers")
    parser.add_argument("--s2q", type=int, default=1)
    parser.add_argument("--s3q", type=int, default=2)
    parser.add_argument("--distribution", choices=("cauchy", "pareto", "constant"), default="cauchy")
    parser.add_argument("--alpha", type=float, default=2.0)
    parser.add_argument("--truncation", type=float, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", required=True, help="instance JSON file")
    parser.add_argument("--layout-out", default=None)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        gen = GeneratorConfig(topology=args.topology, rows=args.rows, cols=args.cols, full_lines=args.full_lines,
                              n=args.n, s2q=args.s2q, s3q=args.s3q, distribution=args.distribution,
                              alpha=args.alpha, truncation=args.truncation)
        inst, layout = generate_instance(gen, args.num_qubits, args.seed)
    except (ToolkitError, ValueError, OSError) as e:
        logging.error(f"generate-instance failed: {e}")
        return 1

    save_instance(inst, args.out)
    if args.layout_out:
        save_layout(layout, args.layout_out)
    print(json.dumps(term_counts(inst)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
