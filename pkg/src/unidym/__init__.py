"""Numerical toolkit for one-dimensional real dynamics: Schwarzian and cross-ratio distortion
bounds, critical intervals of polynomials, pullback chains, and periodic orbit / pack census."""

from .crossratio import cross_ratio, distortion, minimum_principle_check, scaled_neighborhood, space
from .errors import *  # noqa: F401,F403
from .intervals import Domain, OrientedInterval, intersection_multiplicity
from .maps import (MapModel, critical_points, cubic_perturbation, family, identity, logistic, mobius,
                   odd_cubic, polynomial, tangent)
from .schwarzian import schwarzian_at, schwarzian_values, verify_cos_bound, verify_sinh_bound

__version__ = "0.1.0"
