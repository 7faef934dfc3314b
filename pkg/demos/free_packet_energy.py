"""
Where the energy of a free Gaussian packet sits, as seen by one particle.

The packet has total energy H = m u^2/2 + 3 hbar^2 / 8 m sigma0^2, fixed for
all time.  A particle riding the packet has kinetic energy T, feels the
quantum potential Q, and the rest, U = H - T - Q, belongs to the wave field
elsewhere.  As the packet spreads, Q at the particle drains into T: the
particle accelerates although no classical force acts on it.

Run:  python3 demos/free_packet_energy.py [--x0 1.5] [--t-end 4]
"""
import argparse

import numpy as np

from pilotwave import gaussian
from pilotwave.gaussian import GaussianParams
from pilotwave.ledger import build_ledger, check_eq16, check_eq17
from pilotwave.sources import GaussianSource
from pilotwave.trajectory import integrate


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--x0", type=float, default=1.0, help="start offset along x (units of sigma0)")
    ap.add_argument("--t-end", type=float, default=4.0)
    ap.add_argument("--dt", type=float, default=1e-2)
    args = ap.parse_args()

    prm = GaussianParams()
    src = GaussianSource(prm)
    ens = integrate(src, np.array([[args.x0, 0.0, 0.0]]), 0.0, args.t_end, args.dt)
    led = build_ledger(ens.times, ens.positions[:, 0], [src.at(t) for t in ens.times])

    print(f"total energy H = {gaussian.total_H(prm):.6f}  (3/8 for sigma0 = m = hbar = 1)\n")
    print(f"{'t':>5} {'x':>8} {'sigma':>7} {'T':>9} {'Q':>9} {'U':>9} {'T+Q':>9}")
    stride = max(1, int(round(0.5 / args.dt)))
    for rec, x in zip(led.records[::stride], ens.positions[::stride, 0, 0]):
        sig = float(gaussian.sigma_at(rec.t, prm))
        print(f"{rec.t:5.2f} {x:8.4f} {sig:7.4f} {rec.T:9.5f} {rec.Q:9.5f} {rec.U:9.5f} "
              f"{rec.T + rec.Q:9.5f}")

    # the particle's path is self-similar: x(t) / sigma(t) stays put
    drift = np.ptp(ens.positions[:, 0, 0] / gaussian.sigma_at(ens.times, prm))
    print(f"\nx(t)/sigma(t) varies by {drift:.1e} along the path (a Bohmian particle keeps its "
          "place in the packet)")

    e16, e17 = check_eq16(led), check_eq17(led)
    print(f"dT/dt = -grad Q . v       holds to {e16.relative:.1e} of the signal")
    print(f"dU/dt = -dQ/dt (frozen x) holds to {e17.relative:.1e} of the signal")
    T, Q = led.column("T"), led.column("Q")
    U = led.column("U")
    print(f"\nover the run Q at the particle fell by {Q[0] - Q[-1]:.5f}; T took {T[-1] - T[0]:.5f} "
          f"of it and U, the field away from the particle, took {U[-1] - U[0]:.5f}")


if __name__ == "__main__":
    main()
