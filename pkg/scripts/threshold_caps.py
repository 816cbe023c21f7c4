"""Observed mistakes on threshold families next to the integer caps and lower counts."""
import argparse

from mbl.adversaries import AmbMedian, ThresholdMaximin
from mbl.engine import Protocol, run_game
from mbl.families import build_threshold_family, spread_thresholds
from mbl.learners import GreedySubroundLearner, HalvingLearner
from mbl.verify import mistake_cap, threshold_lower_count


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-log", type=int, default=8, help="largest |F| is 2**max-log")
    args = ap.parse_args()
    print("model,r,F,mistakes,cap,lower")
    for e in range(2, args.max_log + 1):
        F = 2**e
        fam = build_threshold_family(2 * F, spread_thresholds(F, 2 * F))
        for r in (1, 2, 3):
            tr = run_game(Protocol("cart_weak", r), fam, HalvingLearner(), ThresholdMaximin(), seed=args.seed)
            print(f"cart_weak,{r},{F},{tr.mistakes},{mistake_cap('cart_weak', r, F)},{threshold_lower_count(F, r)}")
            tr = run_game(Protocol("amb", r), fam, GreedySubroundLearner(), AmbMedian(), seed=args.seed)
            print(f"amb,{r},{F},{tr.mistakes},{mistake_cap('amb', r, F)},")


if __name__ == "__main__":
    main()
