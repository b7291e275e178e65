"""Random search for union-volume defects under expansions.

    python3 scripts/search_defects.py --d 2 --n-balls 4 --pairs 2000 --out defects.csv
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from dataclasses import dataclass

import numpy as np

from kpverify.dynamics import kp_defect
from kpverify.geometry import theorem_condition_holds
from kpverify.instances import render_csv
from kpverify.montecarlo import MCEstimate, derive_seed
from kpverify.random_instances import expansion_pairs


@dataclass
class SearchConfig:
    d: int = 2
    n_balls: int = 4
    pairs: int = 1000
    spread: float = 2.0
    s: float = 0.0
    samples: int = 10**5  # only used for d > 2
    seed: int = 0
    out: str | None = None


def run(cfg: SearchConfig) -> list[tuple]:
    rng = np.random.default_rng(cfg.seed)
    mode = "exact" if cfg.d <= 2 else "mc"
    gen = expansion_pairs(rng, cfg.n_balls, cfg.d, 10**9, spread=cfg.spread)
    rows = []
    for k in range(cfg.pairs):
        p, q = next(gen)
        res = kp_defect(p, q, cfg.s, mode, cfg.samples, derive_seed(cfg.seed, k))
        value, err = (res.value, res.std_error) if isinstance(res, MCEstimate) else (res, 0.0)
        holds, table = theorem_condition_holds(p)
        rows.append((k, value, err, holds, max(table.values(), default=0)))
    return rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for f in dataclasses.fields(SearchConfig):
        kind = int if f.type == "int" else float if f.type == "float" else str
        parser.add_argument(f"--{f.name.replace('_', '-')}", type=kind, default=f.default)
    cfg = SearchConfig(**vars(parser.parse_args(argv)))
    rows = run(cfg)
    text = render_csv(["pair", "defect", "err", "condition", "max_pair_count"], rows)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    worst = min(rows, key=lambda r: r[1])
    print(f"{len(rows)} pairs, min defect {worst[1]:.6g} ± {worst[2]:.2g} at pair {worst[0]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
