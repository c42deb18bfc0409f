"""Transverse spectra of a Ba-Ba-Yb-Ba-Ba chain before and after the centre-of-mass restoring tweezer."""
import math

from _common import parser, write_csv
from iontweezer.chain import ConventionalTrap
from iontweezer.multispecies import restore_com, strength_by_scaling_model

SPECIES = ["Ba133", "Ba133", "Yb171", "Ba133", "Ba133"]


def main():
    p = parser(__doc__, "results/fig4_multispecies.csv")
    p.add_argument("--axis", choices=list("xy"), default="y")
    args = p.parse_args()
    trap = ConventionalTrap.from_hz(1.2e6, 1.0e6, 0.2e6)
    r = restore_com(SPECIES, trap, args.axis)
    rows = []
    for label, freqs in (("single_species", r.freqs_reference), ("before", r.freqs_before), ("after", r.freqs_after)):
        rows += [{"chain": label, "mode": m, "frequency_Hz": f / (2 * math.pi)} for m, f in enumerate(freqs)]
    write_csv(args.out, rows)
    print(f"tweezer strength / trap frequency: {r.strength_ratio:.4f} {strength_by_scaling_model(SPECIES, trap, args.axis)}")
    print(f"COM overlap before {r.com_overlap_before:.6f}, after {r.com_overlap_after:.12f}")


if __name__ == "__main__":
    main()
