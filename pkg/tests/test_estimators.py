import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from csiratio import (
    BreathingModel,
    CsiRatioTransformer,
    RespirationPatternExtractor,
    RespirationRateEstimator,
    bnr,
    extract_pattern,
    make_scene,
    smooth,
    synthesize,
)


@pytest.fixture(scope="module")
def sim():
    scene = make_scene(n_subcarriers=6, breathing=BreathingModel(rate=22.0), snr_db=10, seed=1)
    return synthesize(scene, 14.0, seed=1)


def test_clone_and_params():
    est = RespirationRateEstimator(gate=0.6, band=(12, 30))
    c = clone(est)
    assert c.get_params() == est.get_params() and c is not est
    c.set_params(gate=0.8)
    assert c.gate == 0.8 and est.gate == 0.6
    for cls in (CsiRatioTransformer, RespirationPatternExtractor):
        assert clone(cls()).get_params() == cls().get_params()


def test_ratio_transformer(sim):
    stream, _ = sim
    t = CsiRatioTransformer().fit(stream)
    np.testing.assert_array_equal(t.transform(stream), stream.ratio())
    np.testing.assert_array_equal(t.transform(np.asarray(stream.values)), stream.ratio())
    flipped = CsiRatioTransformer(antenna_pair=(1, 0)).fit_transform(stream)
    np.testing.assert_allclose(flipped * stream.ratio(), 1.0, rtol=1e-12)
    with pytest.raises(ValueError):
        CsiRatioTransformer(antenna_pair=(0, 2)).fit(stream)
    with pytest.raises(ValueError):
        t.transform(np.ones((5, 2, 3), complex))
    with pytest.raises(NotFittedError):
        CsiRatioTransformer().transform(stream)


def test_pattern_extractor(sim):
    stream, _ = sim
    x = stream.ratio()[:1200]
    pipe = make_pipeline(RespirationPatternExtractor())
    y = pipe.fit_transform(x)
    ext = pipe[0]
    assert y.shape == (1200, 6) and ext.theta_.shape == (6,)
    ref = extract_pattern(smooth(x[:, 2]))
    assert ext.bnr_[2] == pytest.approx(bnr(y[:, 2]), abs=1e-12)
    assert ext.bnr_[2] >= ref.best.bnr * 0.5
    var = RespirationPatternExtractor(selection="variance").fit(x)
    assert var.theta_.shape == (6,)
    with pytest.raises(ValueError):
        RespirationPatternExtractor(selection="nope").fit(x)
    with pytest.raises(ValueError):
        ext.transform(x[:, :3])


def test_rate_estimator(sim):
    stream, truth = sim
    est = RespirationRateEstimator().fit()
    pred = est.predict(stream)
    assert pred.shape == (3,) and np.all(np.abs(pred - 22.0) < 0.5)
    assert est.score(stream, truth.rate_bpm) == 1.0
    np.testing.assert_array_equal(est.predict(np.asarray(stream.values)), pred)
    np.testing.assert_array_equal(est.predict(stream.ratio()), pred)
    assert len(est.estimates_) == 3


def test_rate_estimator_validation():
    with pytest.raises(NotFittedError):
        RespirationRateEstimator().predict(np.ones((1200, 2), complex))
    with pytest.raises(ValueError):
        RespirationRateEstimator(gate=0).fit()
    with pytest.raises(ValueError):
        RespirationRateEstimator(selection="nope").fit()
    with pytest.raises(ValueError):
        RespirationRateEstimator(band=(30, 10)).fit()
