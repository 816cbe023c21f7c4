"""Mistakes the insertion adversary forces in the order model (r = 2) on S_n, against p(n)."""
import argparse

from mbl.adversaries import Insertion
from mbl.engine import Protocol, run_game
from mbl.families import build_permutation_family
from mbl.learners import HalvingLearner, RandomLearner
from mbl.verify import p_closed


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=16)
    ap.add_argument("--random-learners", type=int, default=5)
    args = ap.parse_args()
    print("n,p_n,halving,min_random")
    for n in range(2, args.max_n + 1):
        fam = build_permutation_family(n, implicit=True)
        proto = Protocol("order", 2)
        halving = run_game(proto, fam, HalvingLearner(), Insertion()).mistakes
        rnd = min(run_game(proto, fam, RandomLearner(), Insertion(), seed=s).mistakes
                  for s in range(args.random_learners))
        print(f"{n},{p_closed(n)},{halving},{rnd}")


if __name__ == "__main__":
    main()
