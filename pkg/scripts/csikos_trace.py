"""Union volume along the lifted monotone motion of a random d = 1 expansion pair.

Prints V(t), the derivative formula and its central difference on a t grid.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from kpverify.dynamics import csikos_derivative, lifted_monotone_motion, total_volume_derivative_fd
from kpverify.measure import union_area_2d
from kpverify.random_instances import expansion_pairs


@dataclass
class TraceConfig:
    n_balls: int = 4
    points: int = 21
    h: float = 1e-5
    seed: int = 0


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-balls", type=int, default=TraceConfig.n_balls)
    parser.add_argument("--points", type=int, default=TraceConfig.points)
    parser.add_argument("--seed", type=int, default=TraceConfig.seed)
    cfg = TraceConfig(**{k: v for k, v in vars(parser.parse_args()).items()})

    rng = np.random.default_rng(cfg.seed)
    p, q = next(expansion_pairs(rng, cfg.n_balls, 1, 10**9, box=2.0, r_range=(0.3, 0.9)))
    motion = lifted_monotone_motion(p, q)
    print(f"{'t':>6} {'V(t)':>12} {'formula':>12} {'FD':>12} {'|diff|':>9}")
    for t in np.linspace(0.05, 0.95, cfg.points):
        f = csikos_derivative(motion, t)
        fd = total_volume_derivative_fd(motion, t, h=cfg.h)
        print(f"{t:6.3f} {union_area_2d(motion.family_at(t)):12.8f} {f:12.8f} {fd:12.8f} {abs(f - fd):9.2e}")


if __name__ == "__main__":
    main()
