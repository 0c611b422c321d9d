from datetime import date, timedelta

import numpy as np
import pytest

from hubfair.ingest import HEALTH_OUTCOMES
from hubfair.panel import panel_from_arrays


def make_panel(n=400, seed=0, n_states=3, lookaheads=(7, 14, 21, 28),
               phases=(0, 1, 2), model_types=("Compartmental", "Statistical"),
               mobilities=("No", "Yes"), sqrt_pbl=None,
               race_alpha=(30.0, 5.0, 5.0, 2.0, 3.0)):
    """Synthetic scored panel with every factor varying."""
    rng = np.random.default_rng(seed)
    shares = rng.dirichlet(race_alpha, size=n) * 100.0
    urb = rng.choice(["LM", "SMM", "MC"], size=n)
    states = rng.choice([f"S{i}" for i in range(n_states)], size=n)
    pbl = rng.uniform(0.5, 2.0, size=n) if sqrt_pbl is None else np.asarray(sqrt_pbl) ** 2
    start = date(2020, 7, 11)
    panel, _ = panel_from_arrays(
        team_id=np.array(["team%d" % (i % 2) for i in range(n)], dtype=object),
        fips=np.array([f"{(i % 97) + 1:05d}" for i in range(n)], dtype=object),
        week_end=np.array([start + timedelta(days=7 * (i % 30)) for i in range(n)],
                          dtype=object),
        lookahead=rng.choice(lookaheads, size=n),
        phase=rng.choice(phases, size=n),
        pbl_norm=pbl,
        model_type=rng.choice(model_types, size=n),
        mobility=rng.choice(mobilities, size=n),
        pct_white=shares[:, 0], pct_black=shares[:, 1],
        pct_hispanic=shares[:, 2], pct_asian=shares[:, 3],
        pct_age65=rng.uniform(8, 25, size=n),
        urbanicity=urb,
        health=rng.uniform(5, 40, size=(n, len(HEALTH_OUTCOMES))),
        state=states,
        population=rng.integers(10_000, 500_000, size=n),
        trim_frac=0.0,
    )
    return panel


@pytest.fixture
def panel():
    return make_panel()
