"""Least-squares constants for the cost laws."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError

MIN_POINTS = 5
MIN_DECADES = 2.0


@dataclass
class Fit:
    C: float
    residual_ratio: float       # max over points of max(r / C, C / r), r = y / x
    ratios: list[float]

    def as_dict(self) -> dict:
        return {"C": self.C, "residual_ratio": self.residual_ratio, "ratios": self.ratios}


def fit_through_origin(xs, ys) -> Fit:
    """y ~ C x by least squares."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if len(x) == 0 or len(x) != len(y) or not np.all(x > 0):
        raise ParameterError("need matching positive x values")
    C = float(x @ y / (x @ x))
    ratios = (y / x).tolist()
    worst = max((max(r / C, C / r) if r > 0 and C > 0 else math.inf) for r in ratios)
    return Fit(C, worst, ratios)


def fit_overhead(xs, ys, Ls=None) -> Fit:
    """Fit L' = C * x where x is the cost scale of each point of an L-sweep.

    Needs at least five points whose L values (``Ls``, default ``xs``) span
    two decades.
    """
    Ls = list(xs if Ls is None else Ls)
    if len(Ls) < MIN_POINTS:
        raise ParameterError(f"need at least {MIN_POINTS} points, got {len(Ls)}")
    if min(Ls) <= 0 or math.log10(max(Ls) / min(Ls)) < MIN_DECADES:
        raise ParameterError("the sweep must span at least two decades")
    return fit_through_origin(xs, ys)
