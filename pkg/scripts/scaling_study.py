"""Wall-clock scaling of the empirical expansion vs gPC over the horizon.

The empirical solver does a fixed amount of work per window, so its running
time grows linearly with t_final. A gPC solve needs its order grown with the
horizon to hold accuracy, making its cost superlinear; on the
advection-reaction problem the two curves cross.
"""

import argparse
import json
import sys

from empchaos import cli


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--problem", default="advection-reaction",
                        choices=["wave", "advection-reaction"])
    parser.add_argument("--horizons", type=float, nargs="+",
                        default=[8.0, 24.0, 96.0])
    parser.add_argument("--grid-size", type=int, default=256)
    parser.add_argument("--node-count", type=int, default=100)
    parser.add_argument("--order-factor", type=float, default=1.1)
    parser.add_argument("--output-dir", default="results/scaling")
    args = parser.parse_args()

    config = cli.ExperimentConfig(
        problem=args.problem,
        grid_size=args.grid_size,
        node_count=args.node_count,
        outputs_per_window=6,
        order_cap=200,
        step=1e-2,
        output_dir=args.output_dir,
    )
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        report = cli.run_scaling_study(config, args.horizons,
                                       order_factor=args.order_factor)
    cli.write_scaling_artifacts(report, args.output_dir)
    print(json.dumps(report, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
