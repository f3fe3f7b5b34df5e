"""Run the whole pipeline over the bundled corpus and print a result table.

Usage: python scripts/run_corpus.py [--generated N] [--seed S]
"""

import argparse
import time

from tabseq import gs3
from tabseq.formula import Not
from tabseq.problems import corpus
from tabseq.tableau import Exhausted, prove, rule_count
from tabseq.translate import translate_detailed


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--generated", type=int, default=40)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    goals = corpus(generated=args.generated, seed=args.seed)
    print(f"{'name':24} {'tableau':>8} {'sequent':>8} {'grafts':>7} {'verdict':>9} {'ms':>7}")
    failures = 0
    start = time.perf_counter()
    for name, goal in goals:
        t0 = time.perf_counter()
        ct = prove([Not(goal)])
        if isinstance(ct, Exhausted):
            failures += 1
            print(f"{name:24} {'-':>8} {'-':>8} {'-':>7} {'exhausted':>9}")
            continue
        proof, stats = translate_detailed(ct)
        verdict = gs3.check(proof)
        ms = (time.perf_counter() - t0) * 1000
        word = "accepted" if verdict else "REJECTED"
        if not verdict:
            failures += 1
        print(f"{name:24} {rule_count(ct.root):>8} {gs3.inference_count(proof):>8} "
              f"{stats.grafts:>7} {word:>9} {ms:>7.1f}")
    total = time.perf_counter() - start
    print(f"\n{len(goals) - failures}/{len(goals)} accepted in {total:.1f}s")
    raise SystemExit(1 if failures else 0)


if __name__ == "__main__":
    main()
