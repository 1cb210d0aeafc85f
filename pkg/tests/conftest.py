import numpy as np
import pandas as pd
import pytest

from app.data.encoding import encode_binary
from app.data.synthetic import quadrature_toy, well_conditioned
from app.sampling.models import NuMode, PriorSpec, Representation, SamplerConfig
from app.sampling.rng import RngStream


@pytest.fixture
def rng() -> RngStream:
    return RngStream(20240611)


@pytest.fixture
def small_binary():
    """Binary dataset with an intercept and four slopes, plus its κ = 1 encoding."""
    dataset, beta = well_conditioned(RngStream(7), n=80)
    return dataset, encode_binary(dataset), beta


@pytest.fixture
def toy_one():
    dataset, _ = quadrature_toy(RngStream(11), p=1)
    return dataset, encode_binary(dataset)


@pytest.fixture
def fixed_nu_config():
    def build(p: int, intercept: bool = True, nu: float = 1.0, **kwargs) -> SamplerConfig:
        prior = PriorSpec.build(p, intercept, kwargs.pop("alpha", 1), nu_mode=NuMode.fixed, nu_fixed=nu)
        rep = kwargs.pop("rep", Representation.pdf())
        return SamplerConfig(rep=rep, prior=prior, **kwargs)

    return build


@pytest.fixture
def binary_csv(tmp_path):
    """Raw CSV with a 0/1 response and three predictors."""
    gen = np.random.default_rng(3)
    X = gen.normal(size=(60, 3))
    eta = 0.4 + X @ np.array([1.0, -0.8, 0.0])
    y = (gen.random(60) < 1.0 / (1.0 + np.exp(-eta))).astype(int)
    path = tmp_path / "train.csv"
    pd.DataFrame({"y": y, "age": X[:, 0], "dose": X[:, 1], "noise": X[:, 2]}).to_csv(path, index=False)
    return path
