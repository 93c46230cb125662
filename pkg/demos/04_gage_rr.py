"""Gage repeatability & reproducibility on simulated pin measurements.

Generates a 20 parts x 3 operators x 3 trials grid of 3 mm pin heights
with per-trial noise and a per-mounting carrier-roll offset, then runs the
two-way ANOVA study. The carrier roll is what separates reproducibility
from plain repeatability.
"""

import numpy as np

from trackscan import grr_dataset, grr_study

data = grr_dataset(parts=20, operators=3, trials=3, seed=0)
print(f"grid: {data.parts} parts x {data.operators} operators x {data.trials} trials ({data.unit})")
print(f"grand mean: {data.values.mean():.1f} um (pins are 3 mm)")

result = grr_study(data)
print(f"repeatability  EV: {result.repeatability_ev:6.1f} um")
print(f"reproducibility AV: {result.reproducibility_av:6.1f} um")
print(f"part variation PV: {result.part_variation_pv:6.1f} um")
print(f"total R&R        : {result.total_rr:6.1f} um ({result.percent_rr:.0f}% of total variation)")

# without the carrier roll the reproducibility collapses
quiet = grr_study(grr_dataset(parts=20, operators=3, trials=3, seed=0, carrier_roll_um=0.0))
print(f"with a perfectly stiff carrier: total R&R {quiet.total_rr:.1f} um")

# the band over many seeds
rrs = [grr_study(grr_dataset(seed=s)).total_rr for s in range(100)]
print(f"over 100 seeds: median {np.median(rrs):.1f} um, in [40, 60]: {sum(40 <= v <= 60 for v in rrs)}/100")
