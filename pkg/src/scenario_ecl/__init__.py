"""Scenario-adjusted expected credit loss on top of provisioning PD curves.

Baseline lifetime ECL is recomputed with PDs shifted by a logit add-on per
(industry, region, credit bucket, year) and LGDs proxied with Frye-Jacobs.
The add-ons themselves are calibrated by regressing entity-level logit PD
shifts on entity features within homogeneous sectors.
"""

from .calibration import (CalibrationResult, CalibrationSpec, EntityObservation, RegressionFit,
                          build_design_matrix, calibrate_all, calibrate_bucket,
                          delta_standard_error, extract_delta, fit_ols, logit_differences)
from .ecl import (EclBreakdown, ExposureRecord, PortfolioResult, ScenarioLeg, ScenarioWeights,
                  delta_ecl, ecl_baseline, ecl_scenario, present_value, run_portfolio)
from .errors import *  # noqa: F401,F403
from .lgd import LgdInputs, frye_jacobs
from .overlay import (BucketKey, DeltaTable, adjust_term_structure, apply_overlay, logit,
                      lookup_delta, sigmoid)
from .pd_term import (PdTermStructure, SurvivalCurve, constant_hazard, survival_curve,
                      to_conditional, to_unconditional)
from .special import betainc, normal_cdf, normal_quantile
from .synth import PlantedCoefficients, SynthConfig, generate_portfolio, generate_sample

__version__ = "0.1.0"
