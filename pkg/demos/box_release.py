"""
Releasing a particle from a box: quantum potential turning into motion.

A particle sits at rest in the ground state of a hard-wall box of side L.
Its quantum potential is the same everywhere inside, 3 pi^2 hbar^2 / 2 m L^2,
and it does not move.  At t = 0 the wall at x = L is removed.  The wave
spreads into the new space, Q at the particle falls, and the particle picks
up kinetic energy over a finite time rather than instantly.

How much it can gain is fixed by energy conservation: only the energy
stored along the released axis, pi^2 hbar^2 / 2 m L^2, is set free.  The
two transverse factors keep their stationary share.

Run:  python3 demos/box_release.py [--dim 3] [--n 64] [--ensemble 256]
"""
import argparse

import numpy as np

from pilotwave.propagate import box_energy
from pilotwave.scenarios import BoxReleaseConfig, gaussian_surrogate_release, run_box_release


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--ensemble", type=int, default=256)
    ap.add_argument("--t-end", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = BoxReleaseConfig(dim=args.dim, n=args.n, ensemble=args.ensemble, t_end=args.t_end,
                           seed=args.seed)
    print(f"box {args.dim}D, n = {args.n}, released axis stretched {cfg.enlargement:g}x, "
          f"{args.ensemble} Born-sampled particles")
    rep = run_box_release(cfg)
    s = rep.summary

    print(f"\nbefore release: Q = {s['Q_stationary']:.6f} everywhere inside "
          f"(closed form {s['Q_stationary_closed_form']:.6f}), max speed "
          f"{s['pre_release_max_speed']:.1e}")

    t = rep.ledger.column("t")
    T = rep.ledger.column("T")
    fT = rep.series["field_T"]
    print(f"\n{'t':>6} {'<T> particles':>14} {'<T> Born':>10} {'H':>12}")
    H = rep.ledger.column("H")
    for i in range(0, len(t), max(1, len(t) // 10)):
        print(f"{t[i]:6.3f} {T[i]:14.4f} {fT[i]:10.4f} {H[i]:12.8f}")

    released = s["released_energy"]
    print(f"\nreleased energy (x axis only): {released:.4f}  "
          f"[pi^2/2 = {box_energy((1.0,), (1,)):.4f}]")
    print(f"kinetic energy gained, Born average: {s['delta_KE_field_average']:.4f} "
          f"({s['delta_KE_field_average'] / released:.1%} of what was released)")
    print(f"kinetic energy gained, {s['particles']} particles: {s['delta_KE']:.4f}")
    print(f"90% of the release reached after t = {s['rise_time_90']:.3f}: "
          "the transfer is not instantaneous")
    print(f"H drift over the run: {s['H_relative_drift']:.1e}")

    sur = gaussian_surrogate_release(cfg).summary
    print("\nGaussian surrogate (width L/2, particle at distance L):")
    print(f"  Q0 by substitution {sur['Q0_formula']:.4f}, reference Q0 {sur['Q0_reference']:.4f}")
    print(f"  Q drop with the reference Q0: {sur['delta_KE_reference_Q0']:.3f} "
          f"(below 15: {sur['delta_KE_reference_Q0'] < 15})")
    print(f"  the simulated gain is capped at {released:.3f} by energy conservation, so the "
          "surrogate's Q drop is not realized as kinetic energy")


if __name__ == "__main__":
    main()
