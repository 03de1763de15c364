"""scikit-learn style wrapper: fit on a transmitter, predict received power."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .scene import Scene, as_point
from .tracer import ImageEngine, TraceConfig, TraceError, check_link


class PropagationModel(BaseEstimator):
    """Predict total received power (dB re transmit power) at receiver points.

    ``fit`` takes a single transmitter position, either as the ``tx`` param or
    as a one-row ``X``; it builds the image tree once. ``predict`` then
    traces any number of receivers against it. Points with no path get
    ``-inf``.

    >>> from indoorprop.floorplan import make_ece_floor, TX_EAST
    >>> model = PropagationModel(make_ece_floor(), tx=TX_EAST, max_reflection_order=1)
    >>> float(model.fit().predict([[17.4, 5.55, 2.0]])[0]) < 0
    True
    """

    def __init__(
        self,
        scene: Scene = None,
        tx=None,
        max_reflection_order: int = 3,
        max_paths: int = 25,
        frequency: float = 1e9,
        min_path_gain_db: float = -250.0,
    ):
        self.scene = scene
        self.tx = tx
        self.max_reflection_order = max_reflection_order
        self.max_paths = max_paths
        self.frequency = frequency
        self.min_path_gain_db = min_path_gain_db

    def _config(self) -> TraceConfig:
        return TraceConfig(self.max_reflection_order, self.max_paths, self.frequency, self.min_path_gain_db)

    def fit(self, X=None, y=None):
        if not isinstance(self.scene, Scene):
            raise TypeError("scene must be a Scene")
        if X is None:
            if self.tx is None:
                raise ValueError("no transmitter: pass tx or a one-row X")
            tx = as_point(self.tx)
        else:
            X = check_array(X, ensure_min_features=3)
            if X.shape != (1, 3):
                raise ValueError(f"fit expects one transmitter row of 3 coordinates, got shape {X.shape}")
            tx = as_point(X[0])
        config = self._config()
        check_link(self.scene, tx)
        self.tx_ = tx
        self.config_ = config
        self.engine_ = ImageEngine(self.scene, tx, config)
        self.n_features_in_ = 3
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "engine_")
        X = check_array(X, ensure_min_features=3)
        if X.shape[1] != 3:
            raise ValueError(f"expected 3 coordinates per row, got {X.shape[1]}")
        for p in X:
            check_link(self.scene, self.tx_, p)
        batch = self.engine_.evaluate(X)
        total = batch.total_power(len(X), self.config_)
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(total)

    def paths(self, rx):
        """Full path list for one receiver, strongest first."""
        check_is_fitted(self, "engine_")
        rx = as_point(rx)
        check_link(self.scene, self.tx_, rx)
        return self.engine_.evaluate([rx]).paths_for(0, self.config_)


__all__ = ["PropagationModel", "TraceError"]
