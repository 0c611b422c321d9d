"""Declarative model specifications and their realized design matrices.

A :class:`ModelSpec` names a sensitive block (race shares or urbanicity
dummies), at most one interacting model-data characteristic, and the control
set. :func:`build_design` turns a spec plus a scored panel into a labeled
numeric matrix with treatment coding, deterministic column order, and term
groups for collinearity screening and hypothesis building.

Column order: intercept, sensitive block, characteristics (lookahead, phase,
model type, mobility), interactions, health controls, age 65+, state dummies.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from .errors import InputDataError
from .ingest import HEALTH_OUTCOMES

RACE_BLOCK = ("pct_black", "pct_hispanic", "pct_asian")  # White share omitted
URBANICITY_LEVELS = ("LM", "SMM", "MC")

#: Catalog order of characteristic factors and their level orders.
MODEL_TYPE_ORDER = ("Compartmental", "Baseline", "DeepLearning", "Ensemble", "Statistical")
MOBILITY_ORDER = ("No", "Yes", "Mixed")

DEFAULT_REFERENCES = {
    "lookahead": 7,
    "phase": 0,
    "model_type": "Compartmental",
    "mobility": "No",
    "urbanicity": "LM",
}

CHARACTERISTICS = ("lookahead", "phase", "model_type", "mobility")


@dataclass(frozen=True)
class ModelSpec:
    """Declarative description of one regression model."""

    name: str
    sensitive_block: str                      # "race" | "urbanicity"
    interaction_with: str | None = None       # one of CHARACTERISTICS or None
    health_controls: tuple = HEALTH_OUTCOMES
    include_age65: bool = True
    state_effects: bool = True
    reference_levels: tuple = tuple(sorted(DEFAULT_REFERENCES.items()))

    def __post_init__(self):
        if self.sensitive_block not in ("race", "urbanicity"):
            raise InputDataError(f"unknown sensitive block {self.sensitive_block!r}")
        if self.interaction_with is not None and self.interaction_with not in CHARACTERISTICS:
            raise InputDataError(f"unknown interaction factor {self.interaction_with!r}")

    @property
    def references(self):
        return dict(self.reference_levels)


#: The catalog from the study: main effects plus the four interaction variants
#: for each sensitive block.
MODEL_CATALOG = {
    "GLM-1": ModelSpec(name="GLM-1", sensitive_block="race"),
    "GLM-1a": ModelSpec(name="GLM-1a", sensitive_block="race", interaction_with="lookahead"),
    "GLM-1b": ModelSpec(name="GLM-1b", sensitive_block="race", interaction_with="phase"),
    "GLM-1c": ModelSpec(name="GLM-1c", sensitive_block="race", interaction_with="model_type"),
    "GLM-1d": ModelSpec(name="GLM-1d", sensitive_block="race", interaction_with="mobility"),
    "GLM-2": ModelSpec(name="GLM-2", sensitive_block="urbanicity"),
    "GLM-2a": ModelSpec(name="GLM-2a", sensitive_block="urbanicity", interaction_with="lookahead"),
    "GLM-2b": ModelSpec(name="GLM-2b", sensitive_block="urbanicity", interaction_with="phase"),
    "GLM-2c": ModelSpec(name="GLM-2c", sensitive_block="urbanicity", interaction_with="model_type"),
    "GLM-2d": ModelSpec(name="GLM-2d", sensitive_block="urbanicity", interaction_with="mobility"),
}


@dataclass(frozen=True)
class FactorCoding:
    """Treatment coding of one categorical factor."""

    name: str
    levels: tuple          # canonical order, reference included
    reference: object
    dummy_labels: tuple    # (level, column label) for each non-reference level

    def label_for(self, level):
        for lvl, lab in self.dummy_labels:
            if lvl == level:
                return lab
        raise InputDataError(f"{self.name} has no non-reference level {level!r}")


@dataclass(frozen=True)
class DesignMatrix:
    """Realized numeric design with labeled columns."""

    column_labels: tuple
    X: np.ndarray
    y: np.ndarray
    term_groups: dict = field(default_factory=dict)
    factors: dict = field(default_factory=dict)
    sensitive_labels: tuple = ()
    protected_terms: tuple = ()
    spec: ModelSpec | None = None

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    def column_index(self, label):
        try:
            return self.column_labels.index(label)
        except ValueError:
            raise InputDataError(f"no design column named {label!r}") from None

    def drop_terms(self, names):
        """New design without the named term groups (labels reindexed)."""
        names = set(names)
        unknown = names - set(self.term_groups)
        if unknown:
            raise InputDataError(f"cannot drop unknown terms {sorted(unknown)}")
        drop_cols = {c for t in names for c in self.term_groups[t]}
        keep = [i for i in range(self.p) if i not in drop_cols]
        remap = {old: new for new, old in enumerate(keep)}
        groups = {t: tuple(remap[c] for c in cols)
                  for t, cols in self.term_groups.items() if t not in names}
        return replace(self,
                       column_labels=tuple(self.column_labels[i] for i in keep),
                       X=self.X[:, keep],
                       term_groups=groups,
                       protected_terms=tuple(t for t in self.protected_terms
                                             if t not in names))

    def to_frame(self):
        frame = pd.DataFrame(self.X, columns=list(self.column_labels))
        frame.insert(0, "sqrt_pbl", self.y)
        return frame

    def write_csv(self, path):
        self.to_frame().to_csv(path, index=False)


def _factor_values(panel, name):
    if name == "lookahead":
        return panel.lookahead
    if name == "phase":
        return panel.phase
    if name == "model_type":
        return panel.model_type
    if name == "mobility":
        return panel.mobility
    if name == "urbanicity":
        return panel.urbanicity
    if name == "state":
        return panel.state
    raise InputDataError(f"unknown factor {name!r}")


def _canonical_levels(name, present):
    present = set(present)
    if name in ("lookahead", "phase"):
        return tuple(sorted(int(v) for v in present))
    if name == "model_type":
        order = MODEL_TYPE_ORDER
    elif name == "mobility":
        order = MOBILITY_ORDER
    elif name == "urbanicity":
        order = URBANICITY_LEVELS
    elif name == "state":
        return tuple(sorted(present))
    else:
        raise InputDataError(f"unknown factor {name!r}")
    unknown = present - set(order)
    if unknown:
        raise InputDataError(f"factor {name} has unexpected levels {sorted(unknown)}")
    return tuple(lvl for lvl in order if lvl in present)


def _dummy_label(name, level):
    if name == "lookahead":
        return f"lookahead{level}"
    if name == "phase":
        return f"phase{level}"
    if name == "model_type":
        return f"model_type{level}"
    if name == "mobility":
        return f"mobility{level}"
    if name == "urbanicity":
        return f"urb_{str(level).lower()}"
    if name == "state":
        return f"state{level}"
    raise InputDataError(f"unknown factor {name!r}")


def _code_factor(panel, name, reference):
    """Treatment-code one factor; returns (FactorCoding, columns, labels)."""
    values = _factor_values(panel, name)
    levels = _canonical_levels(name, values)
    if reference not in levels:
        raise InputDataError(
            f"reference level {reference!r} for factor {name} is absent from the data "
            f"(present: {list(levels)})")
    non_ref = [lvl for lvl in levels if lvl != reference]
    cols, labels, dummy_labels = [], [], []
    for lvl in non_ref:
        lab = _dummy_label(name, lvl)
        cols.append((values == lvl).astype(float))
        labels.append(lab)
        dummy_labels.append((lvl, lab))
    coding = FactorCoding(name=name, levels=levels, reference=reference,
                          dummy_labels=tuple(dummy_labels))
    return coding, cols, labels


def build_design(spec, panel):
    """Realize a :class:`ModelSpec` against a scored panel.

    Treatment coding with the declared reference levels omitted; race shares
    enter as raw percents with the White share omitted; interaction columns
    are elementwise products of each sensitive column with each non-reference
    dummy of the interacting characteristic.

    Raises
    ------
    InputDataError
        If a declared reference level is absent from the data, or any
        non-intercept column is constant.
    """
    if panel.n == 0:
        raise InputDataError("cannot build a design from an empty panel")
    refs = spec.references

    labels = ["intercept"]
    columns = [np.ones(panel.n)]
    term_groups = {}
    factors = {}

    def add_term(term, new_labels, new_cols):
        start = len(labels)
        labels.extend(new_labels)
        columns.extend(new_cols)
        term_groups[term] = tuple(range(start, start + len(new_labels)))

    # sensitive block
    if spec.sensitive_block == "race":
        sensitive_labels = RACE_BLOCK
        for lab in sensitive_labels:
            add_term(lab, [lab], [getattr(panel, lab).astype(float)])
    else:
        coding, cols, labs = _code_factor(panel, "urbanicity", refs["urbanicity"])
        factors["urbanicity"] = coding
        sensitive_labels = tuple(labs)
        add_term("urbanicity", labs, cols)

    # model-data characteristics, catalog order; a single-level factor
    # contributes no columns (its only level is the reference)
    for name in CHARACTERISTICS:
        coding, cols, labs = _code_factor(panel, name, refs[name])
        factors[name] = coding
        if labs:
            add_term(name, labs, cols)

    # interactions: sensitive-major over the interacting factor's dummies
    if spec.interaction_with is not None:
        coding = factors[spec.interaction_with]
        sens_cols = {lab: columns[labels.index(lab)] for lab in sensitive_labels}
        for sens in sensitive_labels:
            labs, cols = [], []
            for _, dummy_lab in coding.dummy_labels:
                labs.append(f"{sens}:{dummy_lab}")
                cols.append(sens_cols[sens] * columns[labels.index(dummy_lab)])
            if labs:
                add_term(f"{sens}:{spec.interaction_with}", labs, cols)

    # controls
    for outcome in spec.health_controls:
        idx = HEALTH_OUTCOMES.index(outcome)
        add_term(outcome, [outcome], [panel.health[:, idx].astype(float)])
    if spec.include_age65:
        add_term("pct_age65", ["pct_age65"], [panel.pct_age65.astype(float)])
    if spec.state_effects:
        states = _canonical_levels("state", panel.state)
        if len(states) > 1:
            coding, cols, labs = _code_factor(panel, "state", states[0])
            factors["state"] = coding
            add_term("state", labs, cols)

    X = np.column_stack(columns)
    spans = X.max(axis=0) - X.min(axis=0)
    constant = [labels[i] for i in range(1, X.shape[1]) if spans[i] == 0.0]
    if constant:
        raise InputDataError(
            f"constant non-intercept design column(s): {constant}; a factor level "
            "may be absent from the data")

    candidates = (list(sensitive_labels) if spec.sensitive_block == "race"
                  else ["urbanicity"])
    candidates += list(CHARACTERISTICS)
    candidates += [t for t in term_groups if ":" in t]
    protected = [t for t in candidates if t in term_groups]

    return DesignMatrix(
        column_labels=tuple(labels),
        X=X,
        y=panel.sqrt_pbl.astype(float),
        term_groups=term_groups,
        factors=factors,
        sensitive_labels=tuple(sensitive_labels),
        protected_terms=tuple(protected),
        spec=spec,
    )


def hypothesis_vector(design, sensitive, characteristic, level):
    """Contrast vector selecting a sensitive main effect plus one interaction.

    For the characteristic's reference level the vector selects the main
    effect alone; otherwise it has ones at the sensitive column and at the
    matching interaction column.
    """
    if sensitive not in design.sensitive_labels:
        raise InputDataError(
            f"{sensitive!r} is not a sensitive term of this design "
            f"(has {list(design.sensitive_labels)})")
    if characteristic not in design.factors:
        raise InputDataError(f"design has no factor {characteristic!r}")
    coding = design.factors[characteristic]
    c = np.zeros(design.p)
    c[design.column_index(sensitive)] = 1.0
    if level != coding.reference:
        label = f"{sensitive}:{coding.label_for(level)}"
        if label not in design.column_labels:
            spec_name = design.spec.name if design.spec else "?"
            raise InputDataError(
                f"design {spec_name} has no interaction column {label!r}; fit the "
                f"ModelSpec with interaction_with={characteristic!r}")
        c[design.column_index(label)] = 1.0
    return c


def expected_column_count(n_sensitive, factor_levels, n_interactions, n_controls,
                          n_states):
    """Bookkeeping helper: p implied by the block structure."""
    p = 1 + n_sensitive + sum(k - 1 for k in factor_levels) + n_interactions + n_controls
    if n_states > 1:
        p += n_states - 1
    return p
