"""KS distance between Bohm ensembles and |psi|^2 along a revival.

Runs the smooth power-law state at several ensemble sizes and reports KS
distance, the no-crossing invariant and the failure census at each time.
"""

from carpetlab.bohm import Ensemble, evolve_ensemble
from carpetlab.spectral import BasisSpec, CoefficientLaw, build_state

from _common import parser, save


def main():
    args = parser(__doc__.splitlines()[0]).parse_args()
    box = BasisSpec.box()
    state = build_state(box, CoefficientLaw.power_law(3.0, 32))
    T = box.revival_time
    times = [T * f for f in (1 / 32, 1 / 16, 1 / 8, 1 / 4)]
    rows = []
    for count in (1000,) if args.quick else (1000, 3000, 10_000):
        rep = evolve_ensemble(state, Ensemble.sample(state, count, seed=20240601), times)
        rows.append(rep.to_dict())
    save(args.out, "equivariance_study.json", {"runs": rows})


if __name__ == "__main__":
    main()
