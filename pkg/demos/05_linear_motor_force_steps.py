"""Vertical linear stage: fixed gains across force commands and pad stiffness.

The stage approaches at a constant 0.04 m/s under a velocity servo, switches
to force control at first contact, and must track -1.5 / -2.0 / -2.5 N on
three pads of decreasing stiffness without retuning.  Rail friction (Coulomb
plus viscous) acts as an unmeasured disturbance throughout.
"""

import copy

from nonsmooth_adm.sim import (
    LINMOTOR_STIFFNESS_LEVELS,
    apply_override,
    compute_metrics,
    presets,
    run_scenario,
)

base = presets()["linmotor_steps"]
print(f"controller period {base.h * 1e3:.0f} ms, force limit "
      f"{base.controller.torque_limits[0]} N, gains fixed for all cells\n")
print(f"{'stiffness [N/m]':>16s} {'command [N]':>12s} {'steady force [N]':>17s} "
      f"{'rel. error':>11s} {'violations':>11s}")
for ks in LINMOTOR_STIFFNESS_LEVELS:
    for fd in (-1.5, -2.0, -2.5):
        sc = copy.deepcopy(base)
        apply_override(sc, "env.k_s", ks)
        apply_override(sc, "fd_y", fd)
        m = compute_metrics(run_scenario(sc), sc)
        print(f"{ks:16.0f} {fd:12.1f} {m.steady_force_mean:17.4f} "
              f"{m.steady_force_err:11.4f} {m.torque_violations:11d}")
