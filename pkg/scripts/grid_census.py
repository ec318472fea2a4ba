"""Classify every deduplicated 2x2 game with payoffs on a k-grid and tabulate the verdicts."""

import argparse
import json
import time
from collections import Counter

from repent.builders import phase2_length
from repent.characterize import (
    CONSTANT,
    decide_effective,
    decide_general,
    decide_two_player,
)
from repent.corpus import grid_2x2_family, grid_2x2_game
from repent.game import normalize


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=4, help="grid denominator; payoffs are 0, 1/steps, ..., 1")
    parser.add_argument("--limit", type=int, help="stop after this many games")
    args = parser.parse_args()
    start = time.perf_counter()
    verdicts = Counter()
    variants = Counter()
    lengths = Counter()
    disagreements = []
    family = grid_2x2_family(args.steps)[: args.limit]
    for v in family:
        g = normalize(grid_2x2_game(v, args.steps))
        two = decide_two_player(g)
        general = decide_general(g)
        verdicts[two.result] += 1
        if general.result != two.result:
            disagreements.append(v)
        if general.result == CONSTANT:
            cert = general.certificate
            variants[cert.variant] += 1
            lengths[phase2_length(g, cert)] += 1
            if decide_effective(g).result != CONSTANT:
                disagreements.append(v)
    print(json.dumps({
        "games": len(family),
        "verdicts": dict(verdicts),
        "general_variants": dict(variants),
        "phase2_lengths": {str(k): lengths[k] for k in sorted(lengths)},
        "disagreements": disagreements[:20],
        "seconds": round(time.perf_counter() - start, 2),
    }, indent=1))


if __name__ == "__main__":
    main()
