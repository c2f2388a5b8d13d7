"""Box-counting and variation dimensions of carpet sections and synthetic series.

Covers the spatial and temporal sections of the uniform box state, the
dimension law of random-phase Fourier series, and the derivative section of
power-law states as the truncation grows (random and unit phases).
"""

from carpetlab.fractal import box_count_dimension, extract_section, synthetic_fourier_series, variation_dimension
from carpetlab.spectral import GOLDEN, BasisSpec, CoefficientLaw, build_state

from _common import parser, save


def both(samples):
    b, v = box_count_dimension(samples), variation_dimension(samples)
    return {"box_counting": b.D, "box_stderr": b.stderr, "r2": b.r2, "variation": v.D, "variation_stderr": v.stderr}


def main():
    args = parser(__doc__.splitlines()[0]).parse_args()
    box = BasisSpec.box()
    out = {}

    uniform = build_state(box, CoefficientLaw.uniform(1023 if args.quick else 4095))
    out["spatial"] = both(extract_section(uniform, "spatial", GOLDEN * box.revival_time))
    out["temporal"] = both(extract_section(uniform, "temporal", 0.3827 * box.length))
    out["spatial_by_time"] = [
        {"t_fraction": f, **both(extract_section(uniform, "spatial", f * box.revival_time))}
        for f in (0.1, 0.2, GOLDEN, 0.7, 0.9)
    ]

    modes = 1 << (12 if args.quick else 14)
    out["dimension_law"] = [
        {"z": z, "seed": seed, "expected": 2.5 - z, **both(synthetic_fourier_series(z, modes, seed))}
        for z in (0.6, 0.75, 1.0, 1.25, 1.4)
        for seed in range(3)
    ]

    rows = []
    top = 16 if args.quick else 20
    for alpha in (1.6, 1.75, 1.9):
        for phases in ("random", "unit"):
            for k in range(14, top + 1, 2):
                n = 1 << k
                state = build_state(box, CoefficientLaw.power_law(alpha, n, phases, seed=0))
                g = extract_section(state, "spatial", observable="re_dpsi", resolution=n)
                rows.append({"alpha": alpha, "phases": phases, "modes": n, "expected": 3.5 - alpha, **both(g)})
    out["derivative"] = rows
    save(args.out, "fractal_study.json", out)


if __name__ == "__main__":
    main()
