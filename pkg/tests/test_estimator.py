import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from indoorprop.coverage import GridSpec, sweep
from indoorprop.estimator import PropagationModel
from indoorprop.floorplan import TX_EAST
from indoorprop.scene import Scene
from indoorprop.tracer import TraceConfig, TraceError, trace

from oracles import friis_db


def test_params_round_trip(floor):
    m = PropagationModel(floor, tx=TX_EAST, max_reflection_order=2)
    params = m.get_params()
    assert params["max_reflection_order"] == 2 and params["max_paths"] == 25
    c = clone(m)
    assert c.get_params()["tx"] == TX_EAST
    m.set_params(max_paths=5)
    assert m.max_paths == 5


def test_free_space_prediction():
    m = PropagationModel(Scene(), max_reflection_order=0).fit([[0, 0, 0]])
    out = m.predict([[1, 0, 0], [0, 2, 0]])
    assert out == pytest.approx([friis_db(1), friis_db(2)], abs=1e-12)


def test_matches_sweep(floor):
    cfg = TraceConfig(max_reflection_order=1)
    cmap = sweep(floor, TX_EAST, GridSpec(2.0, 2.0), cfg)
    ii, jj = np.nonzero(cmap.interior)
    pts = np.array([cmap.center(i, j) for i, j in zip(ii, jj)])
    pred = PropagationModel(floor, tx=TX_EAST, max_reflection_order=1).fit().predict(pts)
    assert np.array_equal(pred, cmap.power_db[ii, jj])


def test_paths_helper(floor):
    m = PropagationModel(floor, tx=TX_EAST, max_reflection_order=1).fit()
    assert m.paths((17.4, 5.55, 2.0)) == trace(floor, TX_EAST, (17.4, 5.55, 2.0), TraceConfig(1))


def test_validation(floor):
    with pytest.raises(NotFittedError):
        PropagationModel(floor).predict([[1, 1, 1]])
    with pytest.raises(ValueError):
        PropagationModel(floor).fit()
    with pytest.raises(ValueError):
        PropagationModel(floor).fit([[1, 1, 1], [2, 2, 2]])
    with pytest.raises(TypeError):
        PropagationModel("floor.scn", tx=(1, 1, 1)).fit()
    m = PropagationModel(floor, tx=TX_EAST, max_reflection_order=0).fit()
    with pytest.raises(ValueError):
        m.predict([[1, 2]])
    with pytest.raises(ValueError):
        m.predict([[np.nan, 1, 1]])
    with pytest.raises(TraceError):
        m.predict([[100, 1, 1]])
