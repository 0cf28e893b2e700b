"""Explicit time stepping for the graph flow d phi / dt = 1/F.

F = H h Theta is the speed weight of the potential formulation; it stays
positive exactly while the hypersurface is mean-convex, so F <= 0 anywhere
terminates the run as an event rather than an error.  Step sizes follow a
parabolic CFL bound built from the principal symbol Theta^2 st / F^2 of the
quasilinear operator; on the degenerate point base the equation is an ODE
and dt_max applies directly.

Diagnostics are recorded on a fixed cadence and full field snapshots on a
(usually coarser) second cadence; steps are clipped to land exactly on both
grids, which keeps runs bit-reproducible for a given configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as _geom
from .warp import WarpDomainError
from .geometry import GraphState

__all__ = [
    "FlowConfig", "FlowEvent", "FlowTrace", "MeanConvexityError",
    "rhs", "stable_dt", "run", "TRACE_COLUMNS",
]

TRACE_COLUMNS = ("dt", "min_H", "max_H", "min_omega", "max_omega",
                 "max_grad_phi", "max_hess_phi", "max_A", "osc_rescaled_h")


class MeanConvexityError(RuntimeError):
    """Speed weight F <= 0 somewhere: 1/F is no longer defined."""

    def __init__(self, node, value):
        self.node = int(node)
        self.value = float(value)
        super().__init__(f"F = {value:.6g} <= 0 at node {node}")


@dataclass
class FlowConfig:
    t_end: float
    integrator: str = "rk4"          # "euler" | "rk4"
    safety: float = 0.25
    dt_max: float = 1e-3
    snapshot_every: float = 1.0
    record_every: float = 0.1
    theta_min: float = 1e-3

    def __post_init__(self):
        if self.integrator not in ("euler", "rk4"):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        for name in ("t_end", "safety", "dt_max", "snapshot_every", "record_every"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.theta_min < 1.0:
            raise ValueError("theta_min must lie in [0, 1)")


@dataclass
class FlowEvent:
    kind: str        # loss_of_mean_convexity | angle_degeneracy | numeric | domain
    t: float
    node: int
    value: float

    def as_dict(self):
        return {"kind": self.kind, "t": self.t, "node": self.node, "value": self.value}


@dataclass
class FlowTrace:
    base: object
    warp: object
    config: FlowConfig
    times: np.ndarray = None
    columns: dict = field(default_factory=dict)
    snapshots: list = field(default_factory=list)   # (t, GraphState, GeometrySnapshot)
    terminal: object = "completed"                  # "completed" | FlowEvent

    @property
    def n(self):
        return self.base.d + 1

    @property
    def completed(self):
        return self.terminal == "completed"

    @property
    def t_final(self):
        return float(self.times[-1]) if len(self.times) else 0.0

    def snapshot_times(self):
        return np.array([t for t, _, _ in self.snapshots])


def _phi_domain_violation(wspec, phi):
    """Index of a potential value outside the image of Phi, or None."""
    pid = wspec.preset_id
    if pid == "hyperbolic":
        bad = phi >= 0.0
    elif pid == "power" and wspec.params["p"] != 1.0:
        bad = 1.0 + (1.0 - wspec.params["p"]) * phi <= 0.0
    elif pid in ("schwarzschild3", "saturating"):
        lo, hi = wspec._phi_domain
        bad = (phi <= lo) | (phi >= hi)
    else:
        return None
    if bad.any():
        return int(bad.argmax())
    return None


def _probe(base, wspec, phi, t, theta_min):
    """Light geometry fields plus event detection; (lf, event|None)."""
    finite = np.isfinite(phi)
    if not finite.all():
        node = int((~finite).argmax())
        return None, FlowEvent("numeric", t, node, float(phi.flat[node]))
    node = _phi_domain_violation(wspec, phi)
    if node is not None:
        return None, FlowEvent("domain", t, node, float(phi.flat[node]))
    try:
        lf = _geom._light_fields(GraphState(base, wspec, phi, t))
    except WarpDomainError:
        return None, FlowEvent("domain", t, 0, float(phi.max()))
    F = lf["F"]
    finite = np.isfinite(F)
    if not finite.all():
        node = int((~finite).argmax())
        return None, FlowEvent("numeric", t, node, float(F.flat[node]))
    fmin = float(F.min())
    if fmin <= 0.0:
        return lf, FlowEvent("loss_of_mean_convexity", t, int(F.argmin()), fmin)
    theta = lf["theta"]
    tmin = float(theta.min())
    if tmin < theta_min:
        return lf, FlowEvent("angle_degeneracy", t, int(theta.argmin()), tmin)
    return lf, None


def rhs(state):
    """Speed of the potential, 1/F, as a field over the base."""
    lf = _geom._light_fields(state)
    F = lf["F"]
    fmin = float(np.min(F))
    if fmin <= 0.0 or not np.isfinite(fmin):
        raise MeanConvexityError(int(np.argmin(F)), fmin)
    return 1.0 / F


def _scalar_speed(wspec, nm1):
    """Pure-float 1/F for round slices: (speed_fn, phi_lo, phi_hi).

    On the point base the flow is the ODE d phi/dt = 1/((n-1) h'(r(phi)));
    the numpy probe costs dominate there, so each preset gets a closed-form
    or table-backed float evaluator.  speed_fn raises WarpDomainError
    outside (phi_lo, phi_hi).
    """
    pid = wspec.preset_id
    inf = math.inf
    if pid == "euclidean" or (pid == "power" and wspec.params["p"] == 1.0):
        c = 1.0 / nm1
        return (lambda phi: c), -inf, inf
    if pid == "hyperbolic":
        # h' = cosh r = (1 + e^{2 phi}) / (1 - e^{2 phi}) for phi = ln tanh(r/2)
        def speed(phi):
            if phi >= 0.0:
                raise WarpDomainError("hyperbolic potential must be negative")
            e2 = math.exp(2.0 * phi)
            return (1.0 - e2) / ((1.0 + e2) * nm1)
        return speed, -inf, 0.0
    if pid == "power":
        p = wspec.params["p"]
        q = 1.0 - p
        hi = 1.0 / (p - 1.0)

        # r^{1-p} = 1 + (1-p) phi exactly, so 1/F is affine in phi
        def speed(phi):
            b = 1.0 + q * phi
            if b <= 0.0:
                raise WarpDomainError("potential beyond the image of Phi")
            return b / (nm1 * p)
        return speed, -inf, hi
    lo, hi = wspec._phi_domain
    inv, fwd = wspec._r_of_phi_table, wspec._phi_table
    if pid == "schwarzschild3":
        ht = wspec._h_table
        m2 = 2.0 * wspec.params["m"]

        def speed(phi):
            if phi <= lo or phi >= hi:
                raise WarpDomainError("potential outside tabulated image")
            r = inv.scalar(phi)
            r -= (fwd.scalar(r) - phi) * ht.scalar(r)
            return 1.0 / (nm1 * math.sqrt(1.0 - m2 / ht.scalar(r)))
        return speed, lo, hi
    if pid == "saturating":
        a, b, k = (wspec.params[key] for key in ("a", "b", "k"))

        def h_closed(r):
            if k == 1.0:
                return 1.0 + a * r - b * math.log1p(r)
            return 1.0 + a * r + b / (k - 1.0) * ((1.0 + r) ** (1.0 - k) - 1.0)

        def speed(phi):
            if phi <= lo or phi >= hi:
                raise WarpDomainError("potential outside tabulated image")
            r = inv.scalar(phi)
            r -= (fwd.scalar(r) - phi) * h_closed(r)
            return 1.0 / (nm1 * (a - b * (1.0 + r) ** (-k)))
        return speed, lo, hi
    raise ValueError(f"unknown preset {pid!r}")


def _stable_dt_from(base, lf, config):
    if base.dc == 0:
        return config.dt_max
    theta2 = lf["theta"] ** 2
    F2 = lf["F"] ** 2
    if base.kind == "circle":
        # one direction only: the lone eigenvalue of st is 1 - Theta^2 phi_theta^2
        st = 1.0 - theta2 * lf["grad"][0] ** 2
        D = theta2 * st / F2
    else:
        # st = I - Theta^2 Dphi Dphi^T keeps a unit eigenvalue transverse to Dphi
        D = theta2 / F2
    dmax = float(np.max(D))
    if dmax <= 0.0:
        return config.dt_max
    return min(config.dt_max,
               config.safety * base.dx_min ** 2 / (2.0 * base.d * dmax))


def stable_dt(state, config):
    """Parabolic CFL step bound for the current state."""
    lf = _geom._light_fields(state)
    return _stable_dt_from(state.base, lf, config)


def _diag_row(snap, dt_used):
    return {
        "dt": dt_used,
        "min_H": float(np.min(snap.H)),
        "max_H": float(np.max(snap.H)),
        "min_omega": float(np.min(snap.omega)),
        "max_omega": float(np.max(snap.omega)),
        "max_grad_phi": snap.grad_norm_max,
        "max_hess_phi": snap.hess_abs_max,
        "max_A": snap.A_max,
        "osc_rescaled_h": snap.osc_rescaled_h,
    }


def run(initial, config):
    """Integrate a graph state to config.t_end (or a terminating event).

    Returns a FlowTrace whose diagnostics rows sit exactly on the record
    cadence plus t = 0 and the final time; snapshots follow their own
    cadence.  A violated validity condition terminates the trace with the
    corresponding event; the final stored snapshot is the offending state
    when it is still a well-defined graph (F <= 0, angle below theta_min)
    and the last valid state otherwise (domain exit, non-finite values),
    so every event can be re-verified from what the trace preserves.
    """
    if initial.base.dc == 0:
        return _run_point(initial, config)
    base, wspec = initial.base, initial.warp
    phi = np.array(initial.phi, dtype=float)
    t = 0.0
    times, rows, snaps = [], [], []
    k_rec, k_snap = 1, 1

    def record(tt, phi_now, dt_used, want_row=True, want_snap=True):
        st = GraphState(base, wspec, phi_now.copy(), tt)
        snap = _geom.snapshot(st)
        if want_row:
            times.append(tt)
            rows.append(_diag_row(snap, dt_used))
        if want_snap:
            snaps.append((tt, st, snap))
        return snap

    def finish(terminal):
        cols = {k: np.array([row[k] for row in rows]) for k in TRACE_COLUMNS}
        return FlowTrace(base=base, warp=wspec, config=config,
                         times=np.array(times), columns=cols,
                         snapshots=snaps, terminal=terminal)

    def settle_event(ev, dt_used, bad_phi, ok_phi, ok_t):
        # graph-valid violations keep the offending state; otherwise fall
        # back to the last valid one (unless it is already stored)
        if ev.kind in ("loss_of_mean_convexity", "angle_degeneracy"):
            record(ev.t, bad_phi, dt_used)
        else:
            need_row = not times or times[-1] != ok_t
            need_snap = not snaps or snaps[-1][0] != ok_t
            if need_row or need_snap:
                record(ok_t, ok_phi, dt_used, want_row=need_row,
                       want_snap=need_snap)
        return finish(ev)

    lf, event = _probe(base, wspec, phi, t, config.theta_min)
    if event is not None and event.kind in ("domain", "numeric"):
        return finish(event)
    record(t, phi, 0.0)
    if event is not None:
        return finish(event)

    t_end = config.t_end
    tol = 1e-12 * max(1.0, t_end)
    euler = config.integrator == "euler"
    dt = 0.0

    while t < t_end - tol:
        next_rec = k_rec * config.record_every
        next_snap = k_snap * config.snapshot_every
        target = min(next_rec, next_snap, t_end)
        dt = min(_stable_dt_from(base, lf, config), target - t)
        landed = dt >= target - t - 1e-15 * max(1.0, target)
        if landed:
            dt = target - t

        if euler:
            phi_new = phi + dt / lf["F"]
        else:
            ks = [1.0 / lf["F"]]
            ev = None
            for frac in (0.5, 0.5, 1.0):
                phi_stage = phi + frac * dt * ks[-1]
                lf_s, ev = _probe(base, wspec, phi_stage, t + frac * dt,
                                  config.theta_min)
                if ev is not None:
                    return settle_event(ev, dt, phi_stage, phi, t)
                ks.append(1.0 / lf_s["F"])
            phi_new = phi + dt / 6.0 * (ks[0] + 2.0 * ks[1] + 2.0 * ks[2] + ks[3])

        t_prev, phi_prev = t, phi
        t = target if landed else t + dt
        phi = phi_new

        lf, event = _probe(base, wspec, phi, t, config.theta_min)
        if event is not None:
            return settle_event(event, dt, phi, phi_prev, t_prev)

        if landed:
            final = t >= t_end - tol
            at_rec = abs(t - next_rec) <= tol or final
            at_snap = abs(t - next_snap) <= tol or final
            if at_rec or at_snap:
                record(t, phi, dt, want_row=at_rec, want_snap=at_snap)
            while k_rec * config.record_every <= t + tol:
                k_rec += 1
            while k_snap * config.snapshot_every <= t + tol:
                k_snap += 1

    # accumulated steps can drift inside the exit band without landing on
    # t_end; force the terminal row and snapshot if they are missing
    need_row = abs(times[-1] - t_end) > tol
    need_snap = not snaps or abs(snaps[-1][0] - t_end) > tol
    if need_row or need_snap:
        record(t_end, phi, dt, want_row=need_row, want_snap=need_snap)
    return finish("completed")


def _run_point(initial, config):
    """Scalar fast path of run() for the degenerate single-node base.

    Same cadence, landing and event semantics, but the inner loop works on
    a plain float through _scalar_speed instead of the array probe.
    """
    base, wspec = initial.base, initial.warp
    times, rows, snaps = [], [], []

    def record(tt, phi_val, dt_used, want_row=True, want_snap=True):
        st = GraphState(base, wspec, np.array([phi_val]), tt)
        snap = _geom.snapshot(st)
        if want_row:
            times.append(tt)
            rows.append(_diag_row(snap, dt_used))
        if want_snap:
            snaps.append((tt, st, snap))

    def finish(terminal):
        cols = {k: np.array([row[k] for row in rows]) for k in TRACE_COLUMNS}
        return FlowTrace(base=base, warp=wspec, config=config,
                         times=np.array(times), columns=cols,
                         snapshots=snaps, terminal=terminal)

    phi_arr = np.array(initial.phi, dtype=float)
    phi = float(phi_arr[0])
    t = 0.0
    _, event = _probe(base, wspec, phi_arr, t, config.theta_min)
    if event is not None and event.kind in ("domain", "numeric"):
        return finish(event)
    record(t, phi, 0.0)
    if event is not None:
        return finish(event)

    speed, phi_lo, phi_hi = _scalar_speed(wspec, base.d)

    def canonical_event(phi_val, tt):
        # reuse the array probe so event payloads match the generic path
        _, ev = _probe(base, wspec, np.array([phi_val]), tt, config.theta_min)
        return ev if ev is not None else FlowEvent("domain", tt, 0, phi_val)

    def settle_event(ev, dt_used, ok_phi, ok_t):
        # scalar-path events are domain or numeric: keep the last valid state
        need_row = not times or times[-1] != ok_t
        need_snap = not snaps or snaps[-1][0] != ok_t
        if need_row or need_snap:
            record(ok_t, ok_phi, dt_used, want_row=need_row, want_snap=need_snap)
        return finish(ev)

    t_end = config.t_end
    tol = 1e-12 * max(1.0, t_end)
    euler = config.integrator == "euler"
    dt = 0.0
    k_rec, k_snap = 1, 1

    while t < t_end - tol:
        next_rec = k_rec * config.record_every
        next_snap = k_snap * config.snapshot_every
        target = min(next_rec, next_snap, t_end)
        dt = min(config.dt_max, target - t)
        landed = dt >= target - t - 1e-15 * max(1.0, target)
        if landed:
            dt = target - t

        fail = None
        ks = []
        try:
            ks.append(speed(phi))
        except WarpDomainError:
            fail = (phi, t)
        if fail is None and not euler:
            for frac in (0.5, 0.5, 1.0):
                phi_stage = phi + frac * dt * ks[-1]
                try:
                    ks.append(speed(phi_stage))
                except WarpDomainError:
                    fail = (phi_stage, t + frac * dt)
                    break
        if fail is not None:
            ph, tt = fail
            return settle_event(canonical_event(ph, tt), dt, phi, t)
        if euler:
            phi_new = phi + dt * ks[0]
        else:
            phi_new = phi + dt / 6.0 * (ks[0] + 2.0 * ks[1] + 2.0 * ks[2] + ks[3])

        t_prev, phi_prev = t, phi
        t = target if landed else t + dt
        phi = phi_new

        if not phi_lo < phi < phi_hi:  # also catches NaN
            return settle_event(canonical_event(phi, t), dt, phi_prev, t_prev)

        if landed:
            final = t >= t_end - tol
            at_rec = abs(t - next_rec) <= tol or final
            at_snap = abs(t - next_snap) <= tol or final
            if at_rec or at_snap:
                record(t, phi, dt, want_row=at_rec, want_snap=at_snap)
            while k_rec * config.record_every <= t + tol:
                k_rec += 1
            while k_snap * config.snapshot_every <= t + tol:
                k_snap += 1

    need_row = abs(times[-1] - t_end) > tol
    need_snap = not snaps or abs(snaps[-1][0] - t_end) > tol
    if need_row or need_snap:
        record(t_end, phi, dt, want_row=need_row, want_snap=need_snap)
    return finish("completed")
