"""
PD term structures and the logit overlay
=========================================

Baseline PD curves come as unconditional annual default probabilities. A
scenario shifts each year's conditional PD in logit space, and the
unconditional curve is rebuilt from the shifted hazards.
"""

import math

import numpy as np

from scenario_ecl import (BucketKey, DeltaTable, PdTermStructure, adjust_term_structure,
                          constant_hazard, survival_curve, to_conditional)

# A five-year curve with a flat 3% hazard.
pd_bs = constant_hazard(0.03, 5)
print("unconditional:", np.round(pd_bs.values, 5))
print("conditional:  ", np.round(to_conditional(pd_bs).values, 5))
print("survival:     ", np.round(survival_curve(to_conditional(pd_bs)).ps, 5))

# An observed curve that is not flat.
observed = PdTermStructure.unconditional([0.010, 0.018, 0.022, 0.021, 0.019])
print("hazards of observed curve:", np.round(to_conditional(observed).values, 5))

# %%
# A scenario table gives logit add-ons per bucket at snapshot years. Years
# between snapshots are interpolated, and the first and last snapshots are
# held flat outside the covered range.

key = BucketKey("I01", "R1", 3)
table = DeltaTable("transition", {(key, 2030): 0.2, (key, 2035): 0.6, (key, 2040): 0.9})
for year in (2026, 2030, 2032, 2038, 2045):
    print(f"delta in {year}: {table.lookup(key, year):.3f}")

stressed = adjust_term_structure(observed, table, key, start_year=2029)
print("baseline :", np.round(observed.values, 5))
print("stressed :", np.round(stressed.values, 5))

# %%
# Adding log(3) to the logit of 0.5 gives exactly 0.75.
shift = DeltaTable.constant("odds x3", [key], math.log(3.0))
print(adjust_term_structure(PdTermStructure.unconditional([0.5]), shift, key, 2025).values)
