"""Reproduce the exact square-lattice magnetization curve by cluster sweeps.

Runs the coupled-sweep sampler on a plus-boundary box over a grid of inverse
temperatures and compares the magnetization at the center against the exact
closed form, together with the corresponding wired random-cluster spanning
frequency (the two must agree: M = phi(origin <-> boundary)).
"""

import math

import fkslab as fk
from fkslab import stats

SIDE = 32
SWEEPS = 4000
BETAS = [0.30, 0.40, 0.44, 0.48, 0.55, 0.70, 0.90]


def main():
    g = fk.build_cubic_box(2, SIDE)
    print(f"box {SIDE}x{SIDE} (+shell), plus boundary, {SWEEPS} sweeps per point")
    print(f"{'beta':>6} {'M_hat':>9} {'stderr':>8} {'fk_span':>9} {'M_exact':>9}")
    for i, beta in enumerate(BETAS):
        table = fk.run_chain_table(
            g, fk.ModelParams(beta=beta),
            fk.Schedule(burn_in=10 * SIDE, sweeps=SWEEPS, thin=1, seed=100 + i))
        m = stats.accumulate(table["m_origin"].astype(float))
        span = table["fk_span"].astype(float).mean()
        exact_m = fk.onsager_magnetization(beta)
        print(f"{beta:6.2f} {m.mean:9.4f} {m.stderr:8.4f} {span:9.4f} "
              f"{exact_m:9.4f}")
    print("note: near the critical point (beta ~ 0.4407) the finite box blurs"
          " the transition; the exact curve is the infinite-volume limit.")


if __name__ == "__main__":
    main()
