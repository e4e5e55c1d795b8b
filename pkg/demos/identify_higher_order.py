"""Approximating higher-order processes by SOPDT models.

Fits an SOPDT to the open-loop step of each of the seven validation
processes, then shows that the closed-loop fit (which only needs a recorded
disturbance rejection and the running PID tuning) lands in the same place.

    python demos/identify_higher_order.py
"""

from loopgrade import PidTuning
from loopgrade.identification import TABLE_I, fit_sopdt, fit_sopdt_closed_loop, simulate_higher_order

print(f"{'':4}{'process':>16}  {'expected':>12}  {'open loop':>12}  {'rms':>8}")
for name, (proc, expected) in TABLE_I.items():
    fit = fit_sopdt(simulate_higher_order(proc))
    p = fit.normalized
    print(f"{name:4}{proc.family + ' alpha=' + format(proc.alpha, 'g'):>16}  "
          f"({expected[0]:.2f}, {expected[1]:.2f})  ({p.L1:.3f}, {p.L2:.3f})  {fit.residual:8.1e}")

# A closed-loop experiment on P5: apply a load step of 0.2 and record the output.
proc, expected = TABLE_I["P5"]
tuning = PidTuning(0.75, 1.25, 0.3)
record = simulate_higher_order(proc, "closed", tuning=tuning, delta_d=0.2)
fit = fit_sopdt_closed_loop(record, tuning, delta_d=0.2)
m = fit.model
print(f"\nP5 from closed-loop data: k={m.k:.3f} tau1={m.tau1:.3f} tau2={m.tau2:.3f} tau0={m.tau0:.3f} "
      f"-> L1={fit.normalized.L1:.3f} L2={fit.normalized.L2:.3f} (tabulated {expected})")
