"""Minimum-speed wave of the problem without cut-off.

At the minimum speed v = 2 the leading edge of the wave decays like
(A*ybar + B) * exp(-ybar); the global constants A and B feed the
third term of the small-threshold speed expansion.  They are extracted
by a linear least-squares fit to U(ybar) * exp(ybar) over a window on
the leading edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import WindowTooNarrow
from .integrator import (IntegrationControl, PhaseState, Trajectory,
                         trace_field_until_alpha)
from .reaction import ReactionSpec, gamma_rate, lambda_plus
from .solver import Profile

_MIN_SPEED = 2.0
#: below this level exp(ybar)-amplified integration noise dominates
_FLOOR = 1e-14
#: profile samples stop here; below it the absolute tolerance noise
#: breaks monotonicity (the trajectory itself runs on to the floor)
_PROFILE_FLOOR = 1e-11
_MANIFOLD_OFFSET = 1e-10
#: resampling step used for the edge fit
_FIT_SPACING = 0.025


@dataclass
class ReferenceWave:
    """Minimum-speed wave, origin shifted so U(0) = 1/2."""

    profile: Profile
    y_shift: float
    reaction: ReactionSpec
    trajectory: Trajectory


@dataclass(frozen=True)
class AsymptoticConstants:
    a_inf: float
    b_inf: float
    gamma: float
    fit_window: tuple[float, float]
    fit_residual: float

    def to_json_dict(self) -> dict:
        return {"a_inf": self.a_inf, "b_inf": self.b_inf,
                "gamma": self.gamma, "window": list(self.fit_window),
                "residual": self.fit_residual}


def solve_reference(reaction: ReactionSpec,
                    control: IntegrationControl | None = None,
                    n_samples: int = 4001) -> ReferenceWave:
    """Integrate the no-cut-off system at v = 2 down to the noise floor.

    Starts on the saddle's unstable manifold (the branch entering the
    front region has negative slope), locates U = 1/2 by event detection
    and shifts the origin there.
    """
    if control is None:
        control = IntegrationControl()
    v = _MIN_SPEED
    eps = _MANIFOLD_OFFSET
    start = PhaseState(1.0 - eps, -lambda_plus(reaction, v) * eps)
    half, front = trace_field_until_alpha(reaction.f, v, start, 0.5, control)
    _, edge = trace_field_until_alpha(reaction.f, v, half.state, _FLOOR,
                                      control, y0=half.y_event)
    front.extend(edge)
    y_shift = half.y_event

    y_last = front.find_alpha(_PROFILE_FLOOR)[0]
    grid = np.linspace(front.y_start - y_shift, y_last - y_shift, n_samples)
    grid[np.argmin(np.abs(grid))] = 0.0
    u = np.empty_like(grid)
    up = np.empty_like(grid)
    for i, ybar in enumerate(grid):
        u[i], up[i] = front.sample(ybar + y_shift)
    return ReferenceWave(profile=Profile(y=grid, u=u, uprime=up),
                         y_shift=y_shift, reaction=reaction,
                         trajectory=front)


def fit_edge_constants(wave: ReferenceWave,
                       window: tuple[float, float] = (10.0, 25.0),
                       spacing: float = _FIT_SPACING) -> AsymptoticConstants:
    """Fit U(ybar) * exp(ybar) = A*ybar + B over the leading-edge window."""
    lo, hi = window
    if lo >= hi:
        raise ValueError("window must have lo < hi")
    y_lo = wave.trajectory.y_start - wave.y_shift
    y_hi = wave.trajectory.y_end - wave.y_shift
    if lo < y_lo or hi > y_hi:
        raise ValueError(
            f"window [{lo}, {hi}] outside the sampled range [{y_lo:.3g}, {y_hi:.3g}]")
    n = int(math.floor((hi - lo) / spacing)) + 1
    if n < 100:
        raise WindowTooNarrow(f"window yields {n} samples; need at least 100")

    ybar = np.linspace(lo, hi, n)
    g = np.empty_like(ybar)
    for i, yv in enumerate(ybar):
        u, _ = wave.trajectory.sample(yv + wave.y_shift)
        g[i] = u * math.exp(yv)
    coeffs = np.polyfit(ybar, g, 1)
    resid = float(np.sqrt(np.mean((np.polyval(coeffs, ybar) - g) ** 2)))
    a_inf, b_inf = float(coeffs[0]), float(coeffs[1])
    if a_inf <= 0.0:
        raise ValueError(f"leading-edge slope fit came out non-positive: {a_inf}")
    return AsymptoticConstants(a_inf=a_inf, b_inf=b_inf,
                               gamma=gamma_rate(wave.reaction),
                               fit_window=(lo, hi), fit_residual=resid)
