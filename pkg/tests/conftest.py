import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from actisleep.synth import SynthConfig, generate_subject


@pytest.fixture(scope="session")
def jittered_subject():
    """One 7-day subject with 45-min onset jitter, shared across tests."""
    cfg = SynthConfig(days=7, onset_jitter_sd_minutes=45.0, seed=11)
    return generate_subject(cfg)


@pytest.fixture(scope="session")
def fitted_subject(jittered_subject):
    """The shared subject plus its STC fit and coarse transitions."""
    from actisleep.stc import dichotomize, fit_stc

    series, truth = jittered_subject
    fit = fit_stc(series)
    coarse, cp_stc = dichotomize(fit.predict(series.n))
    return series, truth, fit, coarse, cp_stc
