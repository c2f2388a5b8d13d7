"""Growth of energy moments and of ||(H psi)_N|| under truncation.

Also tabulates the final-decade increment of <H>_N for the Kerr state
against N, next to the asymptotic estimate n^(-5/4) / zeta(13/4), and
runs the Hermite amplitude scan on interior and far-out intervals.
"""

import numpy as np

from carpetlab.energy import energy_moment_partial_sums, hermite_amplitude_exponent
from carpetlab.special import zeta
from carpetlab.spectral import BasisSpec, CoefficientLaw, build_state, hamiltonian_norms

from _common import parser, save


def main():
    args = parser(__doc__.splitlines()[0]).parse_args()
    box = BasisSpec.box()
    big = 10**5 if args.quick else 10**6
    out = {}
    for name, law in (("uniform", CoefficientLaw.uniform(big)), ("power_alpha_3", CoefficientLaw.power_law(3.0, big))):
        s = build_state(box, law)
        out[name] = {"h_psi": hamiltonian_norms(s).to_dict(), "moments": energy_moment_partial_sums(s).to_dict()}

    kerr_rows = []
    for n in (10**3, 10**4, 10**5) if args.quick else (10**3, 10**4, 10**5, 10**6, 10**7):
        m = energy_moment_partial_sums(build_state(BasisSpec.kerr(), CoefficientLaw.kerr_zeta(n)))
        kerr_rows.append({
            "modes": n,
            "mean_increment": m.mean_increment,
            "asymptotic_increment": (n / 10) ** -1.25 / zeta(3.25),
            "mean_sq_exponent": m.mean_sq_fit.exponent,
            "mean_verdict": m.mean_verdict,
        })
    out["kerr"] = kerr_rows
    # first decade start where single increments fall below 1e-8
    out["kerr_cauchy_1e-8_needs_n_from"] = float((1e-8 * zeta(3.25)) ** (-1 / 1.25))

    scans = []
    for interval in ((-2.0, 2.0), (-1.0, 1.0), (-30.0, -28.0)):
        s = hermite_amplitude_exponent((100, 2000), interval)
        scans.append({"interval": interval, "exponent": s.exponent, "stderr": s.stderr, "regime_mismatch": s.regime_mismatch})
    out["hermite"] = scans
    out["hermite_sup_at_2000"] = float(np.max(hermite_amplitude_exponent((1000, 2000)).sup))
    save(args.out, "divergence_study.json", out)


if __name__ == "__main__":
    main()
