import argparse
import logging
import sys

from toolkit import GeneratorConfig, ToolkitError, calibrate_sweep_time, generate_instance, load_instance

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description="Fit the wall time per SA sweep.")
    parser.add_argument("--instance", default=None, help="instance JSON; a heavy-hex patch instance when omitted")
    parser.add_argument("--num-qubits", type=int, default=16)
    parser.add_argument("--grid", type=int, nargs="+", default=[100, 1000, 10000])
    parser.add_argument("--runs", type=int, default=20)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None, help="calibration JSON file")
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        if args.instance:
            inst = load_instance(args.instance)
        else:
            inst, _ = generate_instance(GeneratorConfig(), args.num_qubits, args.seed)
        calibration = calibrate_sweep_time(inst, args.grid, args.runs, repeats=args.repeats, seed=args.seed)
    except (ToolkitError, ValueError, OSError) as e:
        logging.error(f"calibrate-sweeps failed: {e}")
        return 1

    if args.out:
        calibration.save(args.out)
    print(f"t_sweep={calibration.t_sweep:.6e} t_offset={calibration.t_offset:.6e} R^2={calibration.r_squared:.5f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
