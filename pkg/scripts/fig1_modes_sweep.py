"""Mode frequencies of a five-ion Yb chain while a tweezer on one ion is ramped up."""
import math

import numpy as np

from _common import parser, write_csv
from iontweezer.chain import ConventionalTrap, Tweezer, make_chain
from iontweezer.modes import normal_modes


def main():
    p = parser(__doc__, "results/fig1_modes_sweep.csv")
    p.add_argument("--ion", type=int, default=2, help="index of the tweezed ion")
    p.add_argument("--max-ratio", type=float, default=1.0, help="largest strength in units of the trap frequency")
    p.add_argument("--points", type=int, default=51)
    args = p.parse_args()
    chain = make_chain(["Yb171"] * 5, ConventionalTrap.from_hz(1.2e6, 1.0e6, 0.2e6))
    conv = chain.conv_freqs()[args.ion]
    rows = []
    for ratio in np.linspace(0, args.max_ratio, args.points):
        for k, axis in enumerate("xyz"):
            strengths = [0.0, 0.0, 0.0]
            strengths[k] = ratio * conv[k]
            modes = normal_modes(chain, axis, [Tweezer(args.ion, tuple(strengths))])
            for m, f in enumerate(modes.freqs):
                rows.append({"ratio": ratio, "axis": axis, "mode": m, "frequency_Hz": f / (2 * math.pi)})
    write_csv(args.out, rows)


if __name__ == "__main__":
    main()
