"""Fairness auditing for county-level epidemic quantile forecasts.

The pipeline scores hub-format quantile forecasts with population-normalized
pinball loss, fits Gaussian log-link GLMs relating error to race/ethnicity
shares and urbanization level (with model-data interaction terms), screens
multicollinearity with adjusted GVIF, and emits accuracy-equality-ratio
bundles and fairness nutritional cards for an interactive dashboard.
"""

from .metrics import (QUANTILE_LEVELS, TrimReport, TrimResult, mean_pbl,
                      mean_pbl_batch, normalize, pinball_loss, trim_and_transform)
from .phases import DEFAULT_PHASES, PhaseConfig, assign_phase, detect_phases
from .ingest import (HEALTH_OUTCOMES, CountyCovariates, GroundTruth,
                     JoinedGroup, JoinedPanel, QuantileForecast, TeamMetadata,
                     UrbanicityGroup, epi_week_end, join_panel, parse_covariates,
                     parse_forecasts, parse_metadata, parse_truth)
from .panel import Panel, PblObservation, build_panel, iter_observations
from .design import (MODEL_CATALOG, DesignMatrix, ModelSpec, build_design,
                     hypothesis_vector)
from .glm import FitResult, WaldResult, fit_glm, predict, wald_linear_hypothesis
from .diagnostics import (FitDiagnostics, GvifReport, fit_diagnostics, gvif,
                          screen_collinearity)
from .fairness import (RelativeEffect, ViewConfig, aer, audit_bundle_consistency,
                       build_bundle, bundle_to_json, config_hash,
                       plurality_group, relative_effects, save_bundle)
from .synth import SynthConfig, SynthData, generate

__version__ = "0.1.0"
