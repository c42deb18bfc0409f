"""Work statistics and the Jarzynski estimator for the Yb to Ba frequency ramp."""
import numpy as np

from _common import parser, write_csv
from iontweezer.thermo import (
    RampSchedule,
    analytic_delta_f,
    identity_residual,
    jarzynski_estimate,
    propagate,
    work_distribution,
)


def main():
    p = parser(__doc__, "results/fig3_jarzynski.csv")
    p.add_argument("--taus", type=float, nargs="+", default=[0.5, 2.0, 10.0, 50.0], help="switching times in 1/omega_f")
    p.add_argument("--betas", type=float, nargs="+", default=list(np.geomspace(0.3, 3.0, 9)))
    p.add_argument("--n-max", type=int, default=64)
    args = p.parse_args()
    rows = []
    for tau in args.taus:
        r = RampSchedule.mass_ratio(1.0, 171, 133, tau)
        tm = propagate(r, args.n_max)
        for beta in args.betas:
            d = work_distribution(tm, beta, r.omega_i, r.omega_f)
            est = jarzynski_estimate(d)
            rows.append({
                "tau_omega_f": tau,
                "beta_hbar_omega_f": beta,
                "mean_work": est.mean_work,
                "delta_f_estimate": est.delta_f,
                "delta_f_exact": analytic_delta_f(r.omega_i, r.omega_f, beta),
                "identity_residual": identity_residual(d, r.omega_i, r.omega_f),
                "steps": tm.steps,
            })
    write_csv(args.out, rows)


if __name__ == "__main__":
    main()
