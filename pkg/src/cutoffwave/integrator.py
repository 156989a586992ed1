"""Adaptive integration of the travelling-wave phase-plane system.

The planar system

    alpha' = beta,
    beta'  = -v*beta - f_c(alpha),

is integrated forward in the wave coordinate y with an embedded
Dormand-Prince 5(4) pair and a free quartic dense-output interpolant.
Threshold crossings (alpha reaching a target level) are terminal events,
localized by bisection on the interpolant within the bracketing step.

The cut-off rate is discontinuous at alpha = u_c, so error estimates are
invalid for any step straddling that line.  Crossings are therefore
handled by splitting: the integration stops at the alpha = u_c event and
restarts there with the sub-threshold (zero-rate) field, so every step
sees a smooth right-hand side.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable

from .errors import SpanExceeded, StepFailure
from .reaction import CutoffReaction, lambda_plus

# Dormand-Prince 5(4) tableau.
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (9017 / 3168, -355 / 33, 46732 / 5247,
                                49 / 176, -5103 / 18656)
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# Embedded 4th-order error weights (difference of the two formulas).
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920,
                                -17253 / 339200, 22 / 525, -1 / 40)
# Quartic dense-output coefficients (columns multiply theta..theta^4).
_P1 = (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
       -12715105075 / 11282082432)
_P3 = (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
       87487479700 / 32700410799)
_P4 = (0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
       -10690763975 / 1880347072)
_P5 = (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
       701980252875 / 199316789632)
_P6 = (0.0, -282668133 / 205662961, 2019193451 / 616988883,
       -1453857185 / 822651844)
_P7 = (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_EPS = 2.220446049250313e-16


@dataclass(frozen=True)
class PhaseState:
    """A point (alpha, beta) = (U_T, U_T') in the phase plane."""

    alpha: float
    beta: float


@dataclass(frozen=True)
class IntegrationControl:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    max_span: float = 1e4
    initial_step: float = 1e-4

    def __post_init__(self) -> None:
        if self.abs_tol <= 0.0 or self.rel_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_span <= 0.0 or self.initial_step <= 0.0:
            raise ValueError("max_span and initial_step must be positive")


@dataclass(frozen=True)
class EventRecord:
    """Terminal threshold crossing: location, state and step counts."""

    y_event: float
    state: PhaseState
    n_steps: int
    n_rejects: int


class Trajectory:
    """Piecewise-quartic dense representation of an integrated path.

    Each accepted step contributes one polynomial segment; ``sample``
    evaluates the continuous (alpha, beta) interpolant at any y inside
    [y_start, y_end].
    """

    def __init__(self, y_start: float) -> None:
        self.y_start = y_start
        self.y_end = y_start
        # per segment: (y0, h, a0, b0, qa, qb) with q* the quartic coeffs
        self._segments: list[tuple] = []
        self._starts: list[float] = []

    def _append(self, y0: float, h: float, a0: float, b0: float,
                qa: tuple, qb: tuple) -> None:
        self._segments.append((y0, h, a0, b0, qa, qb))
        self._starts.append(y0)

    def __len__(self) -> int:
        return len(self._segments)

    def sample(self, y: float) -> tuple[float, float]:
        if not self._segments:
            raise ValueError("empty trajectory")
        if y < self.y_start - 1e-12 or y > self.y_end + 1e-12:
            raise ValueError(f"y={y} outside sampled range "
                             f"[{self.y_start}, {self.y_end}]")
        i = bisect_right(self._starts, y) - 1
        if i < 0:
            i = 0
        y0, h, a0, b0, qa, qb = self._segments[i]
        t = (y - y0) / h
        return (_quartic(a0, h, qa, t), _quartic(b0, h, qb, t))

    def find_alpha(self, target: float) -> tuple[float, float, float] | None:
        """Locate the first y where alpha crosses ``target`` (descending).

        Returns (y, alpha, beta) localized on the dense interpolant, or
        None when the trajectory never reaches the level.  Segments cut
        short by an event are only searched up to the cut, never into
        the discarded overrun of the step polynomial.
        """
        for i, seg in enumerate(self._segments):
            y0, h, a0, b0, qa, qb = seg
            y_stop = (self._starts[i + 1] if i + 1 < len(self._segments)
                      else self.y_end)
            t_max = min(1.0, (y_stop - y0) / h)
            a1 = _quartic(a0, h, qa, t_max)
            if a0 >= target >= a1:
                t = _bisect_theta(a0, h, qa, target, t_max)
                return (y0 + t * h,
                        _quartic(a0, h, qa, t), _quartic(b0, h, qb, t))
        return None

    def extend(self, other: "Trajectory") -> None:
        """Append a continuation leg; the legs must abut in y."""
        if abs(other.y_start - self.y_end) > 1e-9:
            raise ValueError("trajectories do not abut")
        self._segments.extend(other._segments)
        self._starts.extend(other._starts)
        self.y_end = other.y_end


def _quartic(y0: float, h: float, q: tuple, t: float) -> float:
    return y0 + h * t * (q[0] + t * (q[1] + t * (q[2] + t * q[3])))


def _bisect_theta(a0: float, h: float, qa: tuple, target: float,
                  t_max: float = 1.0) -> float:
    """Bisect g(theta) = alpha(theta) - target on [0, t_max].

    The trajectory is monotone decreasing in alpha, so the crossing is
    unique; iterate until |alpha - target| <= 1e-14 or the interval is
    exhausted, comfortably inside the 1e-13 event contract.
    """
    lo, hi = 0.0, t_max
    if a0 == target:
        return 0.0
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        g = _quartic(a0, h, qa, mid) - target
        if abs(g) <= 1e-14 or (hi - lo) <= 4.0 * _EPS:
            return mid
        if g > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class _Integration:
    """Mutable stepping state shared across the legs of one integration."""

    __slots__ = ("v", "control", "y", "a", "b", "h", "n_steps", "n_rejects",
                 "trajectory")

    def __init__(self, v: float, start: PhaseState, y0: float,
                 control: IntegrationControl) -> None:
        self.v = v
        self.control = control
        self.y = y0
        self.a = start.alpha
        self.b = start.beta
        self.h = control.initial_step
        self.n_steps = 0
        self.n_rejects = 0
        self.trajectory = Trajectory(y0)

    def advance_to_alpha(self, rate: Callable[[float], float],
                         alpha_stop: float) -> bool:
        """Step forward until alpha first equals ``alpha_stop``.

        Returns True on the event (state snapped to the crossing) and
        False when the span budget runs out first.  The rate callable
        must be smooth over the leg; zone switching is the caller's job.
        """
        v = self.v
        atol = self.control.abs_tol
        rtol = self.control.rel_tol
        y_limit = self.trajectory.y_start + self.control.max_span
        a, b = self.a, self.b
        if a == alpha_stop:
            self.trajectory.y_end = self.y
            return True
        y, h = self.y, self.h
        da = b
        db = -v * b - rate(a)
        while True:
            if y >= y_limit or a > 2.0:
                # a > 2 only happens for malformed reactions: the phase
                # path has left the wave region and cannot come back down
                self._store(y, a, b, h)
                return False
            if h < 1e-14 * max(1.0, abs(y)):
                raise StepFailure(f"step size underflow at y={y}: h={h}")

            a2 = a + h * (_A21 * da)
            b2 = b + h * (_A21 * db)
            da2 = b2; db2 = -v * b2 - rate(a2)
            a3 = a + h * (_A31 * da + _A32 * da2)
            b3 = b + h * (_A31 * db + _A32 * db2)
            da3 = b3; db3 = -v * b3 - rate(a3)
            a4 = a + h * (_A41 * da + _A42 * da2 + _A43 * da3)
            b4 = b + h * (_A41 * db + _A42 * db2 + _A43 * db3)
            da4 = b4; db4 = -v * b4 - rate(a4)
            a5 = a + h * (_A51 * da + _A52 * da2 + _A53 * da3 + _A54 * da4)
            b5 = b + h * (_A51 * db + _A52 * db2 + _A53 * db3 + _A54 * db4)
            da5 = b5; db5 = -v * b5 - rate(a5)
            a6 = a + h * (_A61 * da + _A62 * da2 + _A63 * da3 + _A64 * da4
                          + _A65 * da5)
            b6 = b + h * (_A61 * db + _A62 * db2 + _A63 * db3 + _A64 * db4
                          + _A65 * db5)
            da6 = b6; db6 = -v * b6 - rate(a6)
            a_new = a + h * (_B1 * da + _B3 * da3 + _B4 * da4 + _B5 * da5
                             + _B6 * da6)
            b_new = b + h * (_B1 * db + _B3 * db3 + _B4 * db4 + _B5 * db5
                             + _B6 * db6)
            da7 = b_new; db7 = -v * b_new - rate(a_new)

            err_a = h * (_E1 * da + _E3 * da3 + _E4 * da4 + _E5 * da5
                         + _E6 * da6 + _E7 * da7)
            err_b = h * (_E1 * db + _E3 * db3 + _E4 * db4 + _E5 * db5
                         + _E6 * db6 + _E7 * db7)
            sa = atol + rtol * max(abs(a), abs(a_new))
            sb = atol + rtol * max(abs(b), abs(b_new))
            err = math.sqrt(0.5 * ((err_a / sa) ** 2 + (err_b / sb) ** 2))

            if not err <= 1.0:  # rejects NaN estimates as well
                self.n_rejects += 1
                h *= _MIN_FACTOR if not math.isfinite(err) else max(
                    _MIN_FACTOR, _SAFETY * err ** -0.2)
                continue

            qa = (_P1[0] * da + _P3[0] * da3 + _P4[0] * da4 + _P5[0] * da5
                  + _P6[0] * da6 + _P7[0] * da7,
                  _P1[1] * da + _P3[1] * da3 + _P4[1] * da4 + _P5[1] * da5
                  + _P6[1] * da6 + _P7[1] * da7,
                  _P1[2] * da + _P3[2] * da3 + _P4[2] * da4 + _P5[2] * da5
                  + _P6[2] * da6 + _P7[2] * da7,
                  _P1[3] * da + _P3[3] * da3 + _P4[3] * da4 + _P5[3] * da5
                  + _P6[3] * da6 + _P7[3] * da7)
            qb = (_P1[0] * db + _P3[0] * db3 + _P4[0] * db4 + _P5[0] * db5
                  + _P6[0] * db6 + _P7[0] * db7,
                  _P1[1] * db + _P3[1] * db3 + _P4[1] * db4 + _P5[1] * db5
                  + _P6[1] * db6 + _P7[1] * db7,
                  _P1[2] * db + _P3[2] * db3 + _P4[2] * db4 + _P5[2] * db5
                  + _P6[2] * db6 + _P7[2] * db7,
                  _P1[3] * db + _P3[3] * db3 + _P4[3] * db4 + _P5[3] * db5
                  + _P6[3] * db6 + _P7[3] * db7)
            self.trajectory._append(y, h, a, b, qa, qb)
            self.n_steps += 1
            factor = _MAX_FACTOR if err == 0.0 else min(
                _MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err ** -0.2))

            if a_new <= alpha_stop:
                t = _bisect_theta(a, h, qa, alpha_stop)
                y_event = y + t * h
                b_event = _quartic(b, h, qb, t)
                # snap alpha to the target; the interpolant agrees to 1e-14
                self.y, self.a, self.b = y_event, alpha_stop, b_event
                self.h = h * factor
                self.trajectory.y_end = y_event
                return True

            y += h
            a, b, da, db = a_new, b_new, da7, db7  # FSAL
            h *= factor
            self.trajectory.y_end = y

    def _store(self, y: float, a: float, b: float, h: float) -> None:
        self.y, self.a, self.b, self.h = y, a, b, h
        self.trajectory.y_end = y


def unstable_manifold_start(cutoff: CutoffReaction, v: float,
                            epsilon: float = 1e-10) -> PhaseState:
    """Linearized point on the saddle's unstable manifold entering the
    region 0 < alpha < 1, beta < 0: (1 - eps, -lambda_plus(v) * eps)."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    return PhaseState(1.0 - epsilon, -lambda_plus(cutoff.base, v) * epsilon)


def trace_until_alpha(cutoff: CutoffReaction, v: float, start: PhaseState,
                      alpha_target: float,
                      control: IntegrationControl | None = None,
                      ) -> tuple[EventRecord, Trajectory]:
    """Like :func:`integrate_until_alpha` but also returns the dense path."""
    if control is None:
        control = IntegrationControl()
    if v < 0.0:
        raise ValueError("speed must be non-negative")
    if alpha_target < 0.0 or start.alpha < alpha_target:
        raise ValueError("need start.alpha >= alpha_target >= 0")

    run = _Integration(v, start, 0.0, control)
    u_c = cutoff.u_c
    base_f = cutoff.base.f
    # legs of smooth dynamics: above the threshold the gated rate equals
    # the base reaction, at or below it the rate is identically zero
    if run.a > u_c:
        stop = u_c if alpha_target < u_c else alpha_target
        if not run.advance_to_alpha(base_f, stop):
            raise SpanExceeded(
                f"alpha={run.a:.6g} after span {control.max_span:g} "
                f"(target {alpha_target:g})")
    if run.a > alpha_target:
        if not run.advance_to_alpha(lambda _u: 0.0, alpha_target):
            raise SpanExceeded(
                f"alpha={run.a:.6g} after span {control.max_span:g} "
                f"(target {alpha_target:g}); trajectory turned above the target")
    record = EventRecord(y_event=run.y, state=PhaseState(run.a, run.b),
                         n_steps=run.n_steps, n_rejects=run.n_rejects)
    return record, run.trajectory


def integrate_until_alpha(cutoff: CutoffReaction, v: float, start: PhaseState,
                          alpha_target: float,
                          control: IntegrationControl | None = None,
                          ) -> EventRecord:
    """Integrate the phase-plane system until alpha first hits the target.

    Raises SpanExceeded when y outruns ``control.max_span`` first (the
    trajectory turned, i.e. stalled above the target level) and
    StepFailure on step-size underflow.
    """
    record, _ = trace_until_alpha(cutoff, v, start, alpha_target, control)
    return record


def trace_field_until_alpha(rate: Callable[[float], float], v: float,
                            start: PhaseState, alpha_target: float,
                            control: IntegrationControl | None = None,
                            y0: float = 0.0,
                            ) -> tuple[EventRecord, Trajectory]:
    """Integrate a single smooth vector field until alpha hits the target.

    Used for reaction functions without a cut-off (no zone splitting);
    ``y0`` offsets the independent variable so chained legs line up.
    """
    if control is None:
        control = IntegrationControl()
    run = _Integration(v, start, y0, control)
    if not run.advance_to_alpha(rate, alpha_target):
        raise SpanExceeded(
            f"alpha={run.a:.6g} after span {control.max_span:g} "
            f"(target {alpha_target:g})")
    record = EventRecord(y_event=run.y, state=PhaseState(run.a, run.b),
                         n_steps=run.n_steps, n_rejects=run.n_rejects)
    return record, run.trajectory
