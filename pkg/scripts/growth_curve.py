"""Measure how much larger the compiled sequent proof is than its tableau
on the family of conjoined existential-instance goals.

Every existential step clones the sequent proof built so far, so the ratio
climbs steeply with the number of conjuncts.

Usage: python scripts/growth_curve.py [--max-k K]
"""

import argparse
import time

from tabseq import gs3
from tabseq.formula import Not
from tabseq.problems import growth_goal
from tabseq.tableau import prove, rule_count
from tabseq.translate import translate


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-k", type=int, default=4)
    args = parser.parse_args()

    print(f"{'k':>3} {'tableau':>8} {'sequent':>9} {'ratio':>10} {'seconds':>8}")
    for k in range(1, args.max_k + 1):
        t0 = time.perf_counter()
        ct = prove([Not(growth_goal(k))])
        proof = translate(ct, audit=False)
        assert gs3.check(proof).accepted
        elapsed = time.perf_counter() - t0
        t, g = rule_count(ct.root), gs3.inference_count(proof)
        print(f"{k:>3} {t:>8} {g:>9} {g / t:>10.2f} {elapsed:>8.2f}")


if __name__ == "__main__":
    main()
