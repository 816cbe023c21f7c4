"""Adversary-forced mistakes, exact game value and learner worst case on small instances."""
from mbl.adversaries import AmbMedian, Insertion, Quicksort, RelposThreshold, ThresholdMaximin
from mbl.engine import Protocol
from mbl.families import build_permutation_family, build_threshold_family, spread_thresholds
from mbl.learners import GreedySubroundLearner, HalvingLearner
from mbl.oracle import adversary_forced, exact_opt, learner_worst_case


def main() -> None:
    print("instance,forced,opt,worst")
    for F in (4, 6, 8):
        fam = build_threshold_family(2 * F, spread_thresholds(F, 2 * F))
        for model, adv, lrn in (("cart_weak", ThresholdMaximin, HalvingLearner),
                                ("amb", AmbMedian, GreedySubroundLearner)):
            P = Protocol(model, 1)
            print(f"{model} F={F},{adversary_forced(P, fam, adv)},{exact_opt(P, fam)},"
                  f"{learner_worst_case(P, fam, lrn)}")
    S4 = build_permutation_family(4)
    for model, adv in (("order", Insertion), ("comparison", Quicksort), ("relpos", RelposThreshold)):
        P = Protocol(model, 2 if model == "order" else 1)
        print(f"{model} S_4,{adversary_forced(P, S4, adv)},{exact_opt(P, S4, 24)},"
              f"{learner_worst_case(P, S4, HalvingLearner, max_hypotheses=24)}")


if __name__ == "__main__":
    main()
