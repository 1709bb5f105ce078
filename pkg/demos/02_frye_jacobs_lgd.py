"""
Scenario LGD from the Frye-Jacobs relationship
==============================================

When a scenario raises PD, the loss severity moves with it. The proxy keeps
the baseline expected loss on the same one-factor curve and reads off the
stressed LGD.
"""

import numpy as np

from scenario_ecl import LgdInputs, frye_jacobs

pd_bs, lgd_bs = 0.02, 0.40
print(f"no stress: {frye_jacobs(pd_bs, lgd_bs, pd_bs):.6f}")
print(f"pd 2% -> 5%: {frye_jacobs(LgdInputs(pd_bs, lgd_bs, 0.05)):.6f}")

# %%
# LGD rises with the scenario PD, and rises faster for low baseline LGDs.

grid = np.array([0.02, 0.03, 0.05, 0.08, 0.12, 0.2, 0.3])
print("pd_sc   " + "  ".join(f"{p:6.2f}" for p in grid))
for lgd in (0.1, 0.4, 0.7):
    row = [frye_jacobs(pd_bs, lgd, p) for p in grid]
    print(f"lgd {lgd:.1f} " + "  ".join(f"{v:6.3f}" for v in row))

# %%
# Degenerate inputs fall back to the baseline LGD.
print(frye_jacobs(0.02, 0.4, 0.0), frye_jacobs(0.0, 0.4, 0.05))
