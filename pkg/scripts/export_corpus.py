"""Write every corpus game to games/<name>.json."""

import argparse
import json
from pathlib import Path

from repent.corpus import corpus
from repent.game import game_to_json


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "games"))
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, game in corpus().items():
        (out / f"{name}.json").write_text(json.dumps(game_to_json(game), indent=1) + "\n")
        print(out / f"{name}.json")


if __name__ == "__main__":
    main()
