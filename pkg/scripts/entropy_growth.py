"""Print total and effective entropy of built machines as the horizon grows.

CONSTANT games stay flat once phase 1 has started; the mixed stage NE of a
LINEAR game repeated n times grows linearly for comparison.
"""

import argparse

from repent.builders import build, minimum_horizon
from repent.characterize import decide_effective, decide_general
from repent.corpus import corpus
from repent.game import normalize
from repent.machine import entropy_report, repeat_machine
from repent.values import ne_search


def _machines(game, verdict):
    """Smallest horizon and a horizon -> machine factory; LINEAR games repeat a stage NE."""
    if verdict.certificate is not None:
        return minimum_horizon(game, verdict.certificate), lambda n: build(game, verdict.certificate, n)
    ne = ne_search(game, ())
    return 1, lambda n: repeat_machine(ne.profile)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--games", nargs="*", default=["reward_two_blocks", "stage_ne_concatenation", "matching_pennies"])
    parser.add_argument("--model", choices=("general", "effective"), default="general")
    parser.add_argument("--extra", type=int, default=40, help="horizons beyond the minimum to report")
    parser.add_argument("--step", type=int, default=10)
    args = parser.parse_args()
    decide = decide_general if args.model == "general" else decide_effective
    games = corpus()
    for name in args.games:
        g = normalize(games[name])
        verdict = decide(g)
        print(f"{name}: {verdict.result}")
        first, make = _machines(g, verdict)
        print(f"  {'n':>5} {'total':>28} {'effective':>28}")
        for n in range(first, first + args.extra + 1, args.step):
            rep = entropy_report(make(n), g, n)
            total = ", ".join(f"{x:.3f}" for x in rep.total)
            eff = ", ".join(f"{x:.3f}" for x in rep.effective)
            print(f"  {n:>5} {total:>28} {eff:>28}")


if __name__ == "__main__":
    main()
