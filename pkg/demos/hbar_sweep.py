"""Distance between the quantum density/velocity and the classical
(minplus) solution as hbar is halved."""

import argparse

from pilotwave.benchmarks import semiclassical_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kind", choices=["free", "linear_gravity"], default="free")
    ap.add_argument("--levels", type=int, default=5)
    args = ap.parse_args()

    r = semiclassical_sweep(args.kind, levels=args.levels)
    print(f"{'hbar':>8} {'|rho - rho_cl|_1':>18} {'|v - v_cl|_inf':>16}")
    for h, d, v in zip(r.hbars, r.rho_l1, r.v_inf):
        print(f"{h:8.4f} {d:18.3e} {v:16.3e}")
    print("strictly decreasing:", r.converges)


if __name__ == "__main__":
    main()
