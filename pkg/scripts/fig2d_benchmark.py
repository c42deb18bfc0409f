"""IDADE success fraction against chain length for random solvable transverse targets."""
import math
import time

import numpy as np

from _common import parser, write_csv
from iontweezer.chain import ConventionalTrap, make_chain
from iontweezer.ida import IdaConfig, generate_solvable_target, idade
from iontweezer.modes import build_a_matrix


def main():
    p = parser(__doc__, "results/fig2d_benchmark.csv")
    p.add_argument("--sizes", type=int, nargs="+", default=[2, 3, 4, 5, 6, 8, 10])
    p.add_argument("--targets", type=int, default=100)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--max-rounds", type=int, default=20)
    args = p.parse_args()
    trap = ConventionalTrap.from_hz(1.2e6, 1.0e6, 0.2e6)
    eps = 2 * math.pi * 10.0
    rows = []
    for n in args.sizes:
        chain = make_chain(["Yb171"] * n, trap)
        a_conv = build_a_matrix(chain, "y").matrix
        w_max = chain.conv_freqs()[:, 1].min()
        seeds = np.random.SeedSequence([args.seed, n]).spawn(args.targets)
        t0 = time.perf_counter()
        ok = 0
        for s in seeds:
            w_tar, _, _ = generate_solvable_target(chain, "y", np.random.default_rng(s), w_max)
            cfg = IdaConfig(tolerance=eps, seed=int(s.generate_state(1)[0]), max_rounds=args.max_rounds)
            ok += idade(w_tar, a_conv, cfg, chain, "y").converged
        rows.append({"n_ions": n, "targets": args.targets, "successes": ok,
                     "success_fraction": ok / args.targets, "seconds": time.perf_counter() - t0})
        print(rows[-1])
    write_csv(args.out, rows)


if __name__ == "__main__":
    main()
