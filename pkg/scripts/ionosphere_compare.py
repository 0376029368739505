#!/usr/bin/env python3
"""Optional, non-gating comparison on the Ionosphere data (or any binary LIBSVM file).

Usage:
    python3 scripts/ionosphere_compare.py path/to/ionosphere.libsvm [--seed N]

Downloads nothing: supply the file yourself. Splits 100/100/151-ish in the
train/cv/test proportions used for this dataset, sweeps sigma for the robust
trainer and lambda for the hinge+L2 baseline with cv selection, and prints
both test accuracies. Exits 0 iff the robust trainer scores at least the
baseline minus one point; exits 1 otherwise, 2 on usage errors.
"""

import argparse
import sys

sys.path.insert(0, "src")

from gaussrobust.data import SplitSpec, load_libsvm, split_dataset
from gaussrobust.experiments import SweepSpec, run_sweep
from gaussrobust.linear import TrainConfig


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("data", help="binary LIBSVM file (e.g. Ionosphere)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-iters", type=int, default=40000)
    args = parser.parse_args()

    data = load_libsvm(args.data)
    n = data.n_samples
    train, cv, test = split_dataset(
        data, SplitSpec(100 / n, 100 / n, 1.0 - 200 / n, seed=args.seed)
    )
    print(f"splits: train={train.n_samples} cv={cv.n_samples} test={test.n_samples} d={data.dim}")

    cfg = TrainConfig(eta0=0.5, epsilon=1e-6, max_iters=args.max_iters, seed=args.seed,
                      eval_period=2000)
    robust = run_sweep("guru", SweepSpec("sigma", 2.0, -8, 8), train, cv, test, cfg)
    baseline = run_sweep("svm", SweepSpec("lambda", 4.0, -8, 8), train, cv, test, cfg)

    print(f"robust:   sigma={robust.selected_parameter:g}  "
          f"test accuracy {robust.selected_test_accuracy:.4f}")
    print(f"baseline: lambda={baseline.selected_parameter:g}  "
          f"test accuracy {baseline.selected_test_accuracy:.4f}")

    if robust.selected_test_accuracy >= baseline.selected_test_accuracy - 0.01:
        print("OK: robust trainer within one point of (or above) the baseline")
        return 0
    print("FAIL: robust trainer more than one point below the baseline")
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
