"""Residuals of the continuity and Hamilton-Jacobi equations under refinement.

Fixed smooth state with the grid refined, and the uniform state with modes
and grid refined together, for each stencil order.
"""

from carpetlab.madelung import coupled_sweep, refinement_table, stationarity_gap
from carpetlab.spectral import GOLDEN, BasisSpec, CoefficientLaw, build_state

from _common import parser, save


def main():
    args = parser(__doc__.splitlines()[0]).parse_args()
    box = BasisSpec.box()
    smooth = build_state(box, CoefficientLaw.power_law(3.0, 32))
    out = {"smooth": {}, "uniform_sweep": {}}
    for order in (2, 4, 6):
        out["smooth"][order] = refinement_table(smooth, [256, 512, 1024, 2048], [0.1 * box.revival_time], order)
        modes = [63, 127, 255] if args.quick else [63, 127, 255, 511, 1023]
        out["uniform_sweep"][order] = coupled_sweep(
            lambda n: build_state(box, CoefficientLaw.uniform(n)), modes, [GOLDEN * box.revival_time], stencil_order=order
        )
    uniform = build_state(box, CoefficientLaw.uniform(4095))
    out["stationarity"] = [stationarity_gap(uniform, f * box.revival_time).to_dict() for f in (0.01, 0.05, 0.5, 1.0)]
    save(args.out, "madelung_study.json", out)


if __name__ == "__main__":
    main()
