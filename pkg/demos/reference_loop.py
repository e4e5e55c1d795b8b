"""From a plant model to an OK/NOK label, without a trained classifier.

Optimizes the reference tuning for one SOPDT plant, detunes it a few ways,
and labels each variant with the margin and trajectory-distance rule used for
the training data.  Writes an SVG overlay to loopgrade-out/demos/.

    python demos/reference_loop.py
"""

from pathlib import Path

from loopgrade import SopdtModel, denormalize, normalize, simulate_rejection
from loopgrade.datagen import label_sample
from loopgrade.plots import response_overlay
from loopgrade.tuning import optimize_reference

OUT = Path("loopgrade-out/demos")

# A physical plant: gain 2, lags of 8 s and 3 s, 4 s of dead time.
plant = SopdtModel(k=2.0, tau1=8.0, tau2=3.0, tau0=4.0)
p = normalize(plant)
print(f"normalized process: L1={p.L1:.3f} L2={p.L2:.3f}")

# The reference lives on the canonical plant (k = tau1 = 1); a physical
# tuning follows by dividing kr by k and stretching Ti, Td by tau1.
entry = optimize_reference(p)
ref = entry.tuning
print(f"reference tuning  kr={ref.kr:.4f} Ti={ref.Ti:.4f} Td={ref.Td:.4f} "
      f"(physical kr={ref.kr / plant.k:.4f} Ti={ref.Ti * plant.tau1:.3f} s Td={ref.Td * plant.tau1:.3f} s)")
print(f"reference margins Am={entry.margins.Am:.3f} phi_m={entry.margins.phi_m:.2f} deg, "
      f"IAE={entry.iae_ref:.4f}")

variants = {
    "reference": (1.0, 1.0, 1.0),
    "slightly hot": (1.05, 0.97, 1.0),
    "aggressive gain": (1.8, 1.0, 1.0),
    "sluggish": (0.4, 1.5, 1.0),
    "heavy derivative": (1.0, 1.0, 2.5),
}
canonical = denormalize(p)
overlay = []
for name, a in variants.items():
    tun = ref.scaled(*a)
    s = label_sample(entry, tun, a)
    print(f"{name:>17}: {s.label:<3}  Am={s.Am:6.3f} phi_m={s.phi_m:6.2f} e_dist={s.e_dist:.3f}  "
          f"F1={s.features['F1']:.3f} F7={s.features['F7']:.2f}")
    if name != "reference":
        overlay.append((simulate_rejection(canonical, tun), s.label))

OUT.mkdir(parents=True, exist_ok=True)
response_overlay(entry.response_ref, overlay, OUT / "reference_loop.svg",
                 title=f"L1={p.L1:.2f} L2={p.L2:.2f}: variants vs reference")
print(f"overlay written to {OUT / 'reference_loop.svg'}")
