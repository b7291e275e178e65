"""pi (V_1(q) - V_1(p)) against the s-derivative of E^3 volume differences.

    python3 scripts/proof_chain.py --instances 5 --samples 2000000
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from kpverify.dynamics import proof_chain_check
from kpverify.montecarlo import derive_seed
from kpverify.random_instances import expansion_pairs


@dataclass
class ChainConfig:
    instances: int = 5
    n_balls: int = 3
    samples: int = 10**7
    h: float = 1e-2
    s: float = 0.0
    seed: int = 0
    workers: int = 1


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(ChainConfig()).items():
        parser.add_argument(f"--{name.replace('_', '-')}", type=type(default), default=default)
    cfg = ChainConfig(**vars(parser.parse_args()))

    rng = np.random.default_rng(cfg.seed)
    pairs = expansion_pairs(rng, cfg.n_balls, 1, 10**9, box=2.0, r_range=(0.4, 1.0))
    for c in range(cfg.instances):
        p, q = next(pairs)
        res = proof_chain_check(p, q, cfg.s, 1, cfg.h, cfg.samples, derive_seed(cfg.seed, c), cfg.workers)
        z = abs(res.lhs - res.rhs) / res.error_bound if res.error_bound else 0.0
        print(f"instance {c}: lhs={res.lhs:.6f} rhs={res.rhs:.6f} ± {res.error_bound:.2g}  z={z:.2f}  "
              f"{'PASS' if res.passed else 'FAIL'}")


if __name__ == "__main__":
    main()
