"""Adaptive integration with dense output and event location.

Stepping is delegated to scipy's DOP853 (an explicit 8(5,3) Runge-Kutta pair
with a 7th-order continuous extension). Event location is done here, on the
dense interpolant of each accepted step: the step is subsampled, sign changes
are bracketed, near-tangential pairs of roots are split at the interior
extremum, and every root is polished with Brent's method.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.integrate import DOP853, OdeSolution
from scipy.optimize import brentq, minimize_scalar

from .errors import StateOverflow, StepFailure

Field = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Tolerances:
    atol: float = 1e-10
    rtol: float = 1e-10
    event: float = 1e-12
    max_norm: float = 1e8
    subsamples: int = 8

    def scaled(self, factor: float) -> "Tolerances":
        return Tolerances(self.atol * factor, self.rtol * factor, self.event, self.max_norm, self.subsamples)


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class Event:
    """A scalar event function g(t, y); roots of g are recorded.

    terminal: stop after this many accepted roots (0 = never stop).
    direction: record only crossings with this sign of dg/dt (0 = both).
    accept: optional filter; rejected roots are neither recorded nor counted.
    """

    name: str
    func: Callable[[float, np.ndarray], float]
    terminal: int = 0
    direction: int = 0
    accept: Optional[Callable[[float, np.ndarray], bool]] = None


@dataclass(frozen=True, eq=False)
class EventRecord:
    t: float
    kind: str
    state: np.ndarray
    direction: int


class DenseSolution:
    """Piecewise dense output on [t0, t_end], one interpolant per accepted step."""

    def __init__(self, ts: Sequence[float], ys: Sequence[np.ndarray], interpolants: list, tol: Tolerances):
        self.ts = np.asarray(ts, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        self.tol = tol
        self.dimension = self.ys.shape[1]
        self._interpolants = interpolants
        self._sol = OdeSolution(self.ts, interpolants) if interpolants else None

    @property
    def t0(self) -> float:
        return float(self.ts[0])

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])

    @property
    def segments(self) -> list[tuple[float, float, object]]:
        return [(float(self.ts[i]), float(self.ts[i + 1]), f) for i, f in enumerate(self._interpolants)]

    def __call__(self, t):
        """State at t (scalar -> (dim,), array -> (dim, n))."""
        if self._sol is None:
            t_arr = np.asarray(t, dtype=float)
            if t_arr.ndim == 0:
                return self.ys[0].copy()
            return np.repeat(self.ys[0][:, None], t_arr.size, axis=1)
        return self._sol(t)

    @property
    def final_state(self) -> np.ndarray:
        return self.ys[-1].copy()


@dataclass
class IntegrationResult:
    solution: DenseSolution
    events: list[EventRecord]
    status: str  # "completed" | "terminated"
    terminated_by: Optional[str] = None

    def times(self, kind: str) -> list[float]:
        return [e.t for e in self.events if e.kind == kind]

    def of_kind(self, kind: str) -> list[EventRecord]:
        return [e for e in self.events if e.kind == kind]


@dataclass
class _EventState:
    event: Event
    count: int = 0
    last_t: float = -math.inf
    records: list = field(default_factory=list)


def _g(ev: Event, t: float, interp) -> float:
    return float(ev.func(t, interp(t)))


def _roots_in_step(ev: Event, interp, ta: float, tb: float, n_sub: int, xtol: float) -> list[tuple[float, int]]:
    """All roots of ev.func along interp on (ta, tb], with crossing direction."""
    ts = np.linspace(ta, tb, n_sub + 1)
    ys = interp(ts)
    gs = np.array([float(ev.func(t, ys[:, i])) for i, t in enumerate(ts)])
    f = lambda t: _g(ev, t, interp)
    out: list[tuple[float, int]] = []

    def polish(a, b, ga, gb):
        if ga == 0.0:
            return a
        if gb == 0.0:
            return b
        return brentq(f, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)

    for k in range(n_sub):
        a, b, ga, gb = ts[k], ts[k + 1], gs[k], gs[k + 1]
        if (ga < 0 < gb) or (ga > 0 > gb) or (gb == 0.0 and ga != 0.0):
            t_root = polish(a, b, ga, gb)
            out.append((t_root, 1 if gb > ga else -1))
            continue
        if ga == 0.0 and gb != 0.0:
            # g leaves a root at a; if it leaves with the wrong sign it must
            # return inside (a, b). Sample dyadically towards a to bracket it.
            t_prev = b
            for j in range(1, 46):
                t = a + (b - a) * 2.0**-j
                gt = f(t)
                if gt != 0.0 and (gt > 0) != (gb > 0):
                    out.append((polish(t, t_prev, gt, f(t_prev)), 1 if gb > 0 else -1))
                    break
                t_prev = t
            continue
        # Same sign at both ends: look for a pair of roots around an interior
        # extremum that approaches zero (near-tangential crossings).
        if ga == 0.0 or gb == 0.0:
            continue
        s = 1.0 if ga > 0 else -1.0
        # at the ends of the step the neighbour sample comes from the step's
        # interpolating polynomial, so pairs next to a step boundary are seen
        lo = gs[k - 1] if k > 0 else f(a - (b - a))
        hi = gs[k + 2] if k + 2 <= n_sub else f(b + (b - a))
        slope_in, slope_mid, slope_out = ga - lo, gb - ga, hi - gb
        dips = (s * slope_in < 0 < s * slope_mid) or (s * slope_mid < 0 < s * slope_out)
        if not dips:
            continue
        res = minimize_scalar(lambda t: s * f(t), bounds=(a, b), method="bounded", options={"xatol": xtol})
        tm = float(res.x)
        gm = f(tm)
        if s * gm < 0:
            out.append((polish(a, tm, ga, gm), -int(s)))
            out.append((polish(tm, b, gm, gb), int(s)))
    return out


def integrate(
    field_fn: Field,
    x0: Sequence[float] | np.ndarray,
    T: float,
    tol: Tolerances = DEFAULT_TOL,
    events: Iterable[Event] = (),
    t0: float = 0.0,
    first_step: Optional[float] = None,
    max_step: float = np.inf,
) -> IntegrationResult:
    """Integrate x' = field_fn(t, x) from t0 to t0 + T.

    Returns the dense solution and every located event root. An event root at
    t0 itself is recorded when |g(t0, x0)| <= 1e-14. Roots closer than
    tol.event to a previous root of the same event are merged.
    """
    if not T > 0:
        raise ValueError(f"T must be positive, got {T!r}")
    x0 = np.array(x0, dtype=float)
    events = list(events)
    states = [_EventState(ev) for ev in events]
    t_bound = t0 + T
    solver = DOP853(
        field_fn, t0, x0, t_bound, rtol=tol.rtol, atol=tol.atol, first_step=first_step, max_step=max_step
    )
    ts, ys, interps = [t0], [x0.copy()], []
    all_records: list[EventRecord] = []
    xtol = min(tol.event, 1e-13)
    terminated_by = None

    def record(st: _EventState, t: float, y: np.ndarray, direction: int) -> bool:
        ev = st.event
        if ev.direction and direction != ev.direction:
            return False
        if t - st.last_t <= tol.event:
            return False
        if ev.accept is not None and not ev.accept(t, y):
            return False
        rec = EventRecord(float(t), ev.name, np.array(y, dtype=float), int(direction))
        st.records.append(rec)
        all_records.append(rec)
        st.last_t = t
        st.count += 1
        return bool(ev.terminal) and st.count >= ev.terminal

    stop_at = None
    for st in states:
        if abs(float(st.event.func(t0, x0))) <= 1e-14:
            d0 = field_fn(t0, x0)
            h = 1e-7 * max(1.0, abs(t0))
            g_plus = float(st.event.func(t0 + h, x0 + h * np.asarray(d0)))
            if record(st, t0, x0, 1 if g_plus > 0 else -1):
                stop_at = (t0, st.event.name)

    while stop_at is None and solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise StepFailure(str(msg), solver.t)
        interp = solver.dense_output()
        ta, tb = solver.t_old, solver.t
        y_new = solver.y.copy()
        hits = []
        for st in states:
            for t_root, direction in _roots_in_step(st.event, interp, ta, tb, tol.subsamples, xtol):
                hits.append((t_root, direction, st))
        hits.sort(key=lambda h: h[0])
        for t_root, direction, st in hits:
            if record(st, t_root, interp(t_root), direction):
                stop_at = (t_root, st.event.name)
                break
        if stop_at is not None:
            t_stop = stop_at[0]
            if t_stop > ta:
                ts.append(t_stop)
                ys.append(interp(t_stop))
                interps.append(interp)
            all_records[:] = [r for r in all_records if r.t <= t_stop]
            break
        ts.append(tb)
        ys.append(y_new)
        interps.append(interp)
        norm = float(np.max(np.abs(y_new)))
        if not np.isfinite(norm) or norm > tol.max_norm:
            raise StateOverflow(norm, tb)

    all_records.sort(key=lambda r: r.t)
    sol = DenseSolution(ts, ys, interps, tol)
    if stop_at is not None:
        return IntegrationResult(sol, all_records, "terminated", stop_at[1])
    return IntegrationResult(sol, all_records, "completed")


def reversed_field(field_fn: Field) -> Field:
    """Time-reversed field: solutions run the original backwards."""

    def f(t: float, y: np.ndarray) -> np.ndarray:
        return -np.asarray(field_fn(-t, y))

    return f
