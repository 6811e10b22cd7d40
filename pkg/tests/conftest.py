import numpy as np
import pytest

from pacbayes import RiskProfile, backend


def rand_profile(rng, h=None, m=None, lo=0.0, hi=0.9) -> RiskProfile:
    """Random profile with risks drawn uniformly from [lo, hi]."""
    if h is None:
        h = int(rng.integers(2, 30))
    if m is None:
        m = int(rng.integers(20, 500))
    risks = rng.uniform(lo, hi, h)
    return RiskProfile.from_risks(risks, sample_size=m)


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # JIT cost must not land inside timed assertions
    backend.warmup()
