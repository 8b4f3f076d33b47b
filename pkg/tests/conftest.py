"""Shared draws for the test suite.

Random model parameters are always produced in the canonical axis labeling
(v_x > 0, |v_y| <= v_x, b >= 0) so every module sees inputs it accepts; the
draw covers negative v_y/v_z, the XXZ line, and b on both sides of b_c.
"""

from __future__ import annotations

import numpy as np

from fcspin import ModelParams


def draw_params(rng: np.random.Generator, n: int, *,
                allow_negative: bool = True) -> ModelParams:
    v_x = float(rng.uniform(0.5, 2.0))
    lo = -1.0 if allow_negative else 0.0
    v_y = float(rng.uniform(lo, 1.0)) * v_x
    v_z = float(rng.uniform(lo, 1.0)) * v_x
    b = float(rng.uniform(0.0, 2.5)) * v_x
    return ModelParams(n=n, b=b, v_x=v_x, v_y=v_y, v_z=v_z)


def draw_temperature(rng: np.random.Generator, v_x: float) -> float:
    # log-uniform over the regimes the formulas must cover
    return float(np.exp(rng.uniform(np.log(0.02), np.log(5.0)))) * v_x
