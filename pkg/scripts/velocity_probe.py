"""Convergence of the truncated Bohm velocity v_N(x*, t*) as N doubles.

For each alpha and phase rule, records the increments |v_2N - v_N| and the
fitted decay exponent of the increments.
"""

from carpetlab.bohm import velocity_convergence_probe

from _common import parser, save


def main():
    args = parser(__doc__.splitlines()[0]).parse_args()
    top = 14 if args.quick else 18
    schedule = [2**k for k in range(7, top + 1)]
    rows = []
    for alpha in (1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0):
        for phases in ("unit", "random"):
            p = velocity_convergence_probe(alpha, schedule=schedule, phases=phases)
            rows.append(p.to_dict())
    save(args.out, "velocity_probe.json", {"probes": rows})


if __name__ == "__main__":
    main()
