"""Independent numerical checks: trajectory integration, finite-difference
brackets, grid Maxwell residuals, and energy conservation.

Everything here deliberately avoids the symbolic engine's own reductions:
derivatives along trajectories and on grids come from central differences,
so agreement with the symbolic layer is a genuine cross-check.  Reductions
use max and compensated sums, making results independent of evaluation
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from . import expr as ex
from .expr import Expr, UnboundSymbolError, Var, VectorField
from .bracket import bracket as _rule_bracket


@dataclass(frozen=True)
class NumericBindings:
    """Values for the symbolic constants e, m, c."""

    e: float = 1.0
    m: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if not (self.m > 0 and self.c > 0):
            raise ValueError("m and c must be positive")


@dataclass(frozen=True)
class ParticleState:
    r: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        if self.r.shape != (3,) or self.v.shape != (3,):
            raise ValueError("position and velocity must be 3-vectors")
        if not (np.all(np.isfinite(self.r)) and np.all(np.isfinite(self.v))):
            raise ValueError("state components must be finite")


@dataclass(frozen=True)
class Trajectory:
    """Uniformly spaced states produced by one integrator."""

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    h: float
    method: str

    def __post_init__(self):
        n = len(self.times)
        if n >= 2:
            steps = np.diff(self.times)
            scale = max(abs(self.h), 1e-300)
            if np.any(steps <= 0) or np.max(np.abs(steps - self.h)) > 1e-12 * scale:
                raise ValueError("trajectory times must increase uniformly")

    def __len__(self) -> int:
        return len(self.times)

    def state(self, n: int) -> ParticleState:
        return ParticleState(self.positions[n], self.velocities[n], float(self.times[n]))

    def csv_lines(self):
        yield "t,x1,x2,x3,v1,v2,v3"
        for ti, r, v in zip(self.times, self.positions, self.velocities):
            vals = [ti, r[0], r[1], r[2], v[0], v[1], v[2]]
            yield ",".join(f"{val:.17g}" for val in vals)


@dataclass(frozen=True)
class GridSpec:
    """Sampling cube [-extent, extent]^3 with n points per axis at time t0."""

    extent: float
    n: int
    t0: float = 0.0

    def __post_init__(self):
        if self.n < 5:
            raise ValueError("grids need at least 5 points per axis")
        if not self.extent > 0:
            raise ValueError("extent must be positive")

    @property
    def h(self) -> float:
        return 2.0 * self.extent / (self.n - 1)

    def axis(self) -> np.ndarray:
        return np.linspace(-self.extent, self.extent, self.n)


@dataclass(frozen=True)
class ResidualEntry:
    name: str
    max: float
    rms: float
    h: Optional[float] = None
    order: Optional[float] = None

    def to_json_dict(self) -> dict:
        out = {"name": self.name, "max": self.max, "rms": self.rms}
        if self.h is not None:
            out["h"] = self.h
        if self.order is not None:
            out["order"] = self.order
        return out


@dataclass
class ResidualReport:
    entries: list[ResidualEntry] = dc_field(default_factory=list)

    def entry(self, name: str) -> ResidualEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def to_json_dict(self) -> dict:
        return {"entries": [e.to_json_dict() for e in self.entries]}


def _norms(values) -> tuple[float, float]:
    flat = np.ravel(np.asarray(values, dtype=float))
    if flat.size == 0:
        return 0.0, 0.0
    return float(np.max(np.abs(flat))), float(
        math.sqrt(math.fsum(float(x) * float(x) for x in flat) / flat.size)
    )


def convergence_order(
    norm_coarse: float, norm_fine: float, h_coarse: float, h_fine: float
) -> float:
    """Observed order from two refinement levels."""
    if norm_fine <= 0 or norm_coarse <= 0:
        return float("inf")
    return math.log(norm_coarse / norm_fine) / math.log(h_coarse / h_fine)


# ---------------------------------------------------------------------------
# expression evaluation


_SLOTS = {
    ("q", 1): 0, ("q", 2): 1, ("q", 3): 2,
    ("x", 1): 0, ("x", 2): 1, ("x", 3): 2,
    ("v", 1): 3, ("v", 2): 4, ("v", 3): 5,
    ("t", None): 6,
}


class CompiledExpr:
    """A term-table evaluator over (position, velocity, time) slots.

    Accepts scalars or broadcastable numpy arrays in every slot, so the same
    compiled object serves single states and whole grids.
    """

    def __init__(self, expr: Expr):
        table = []
        for coeff, cpow, atoms in expr.terms:
            slots = []
            for atom in atoms:
                if not isinstance(atom, Var):
                    raise UnboundSymbolError(
                        f"cannot evaluate symbolic atom {atom!r}; bind fields first"
                    )
                key = (atom.kind, atom.index)
                if key not in _SLOTS:
                    raise UnboundSymbolError(f"no numeric value for {atom!r}")
                slots.append(_SLOTS[key])
            table.append((float(coeff), cpow, tuple(slots)))
        self.table = tuple(table)
        self.uses_velocity = any(s in (3, 4, 5) for _, _, slots in table for s in slots)

    def __call__(self, position, velocity, time, bindings: NumericBindings):
        values = [
            position[0], position[1], position[2],
            None if velocity is None else velocity[0],
            None if velocity is None else velocity[1],
            None if velocity is None else velocity[2],
            time,
        ]
        total = 0.0
        consts = (bindings.e, bindings.m, bindings.c)
        for coeff, cpow, slots in self.table:
            piece = coeff
            for base, p in zip(consts, cpow):
                if p:
                    piece = piece * base**p
            for s in slots:
                if values[s] is None:
                    raise UnboundSymbolError("expression needs a velocity value")
                piece = piece * values[s]
            total = total + piece
        return total


def evaluate(expr: Expr, state, bindings: Optional[NumericBindings] = None, time: float = 0.0):
    """Evaluate a fully concrete expression at a state or spatial point."""
    bindings = bindings or NumericBindings()
    if isinstance(state, ParticleState):
        pos, vel, tval = state.r, state.v, state.t
    else:
        pos = np.asarray(state, dtype=float)
        if pos.shape != (3,):
            raise ValueError("spatial points must be 3-vectors")
        vel, tval = None, time
    return CompiledExpr(expr)(pos, vel, tval, bindings)


class FieldEvaluator:
    """Compiled (E, B) pair returning 3-vectors at (r, t)."""

    def __init__(self, field_E: VectorField, field_B: VectorField, bindings: NumericBindings):
        self.e_comps = [CompiledExpr(comp) for comp in field_E]
        self.b_comps = [CompiledExpr(comp) for comp in field_B]
        self.bindings = bindings

    def E(self, r, t: float) -> np.ndarray:
        return np.array([f(r, None, t, self.bindings) for f in self.e_comps])

    def B(self, r, t: float) -> np.ndarray:
        return np.array([f(r, None, t, self.bindings) for f in self.b_comps])


# ---------------------------------------------------------------------------
# integrators


def _boris_step(r, v, t, h, fields: FieldEvaluator, bindings: NumericBindings):
    # drift-kick-drift: half position drift, Boris velocity update with the
    # fields at the midpoint, half drift; time-symmetric, hence second order
    # with synchronized states, and exactly norm-preserving when E = 0.
    r_half = r + 0.5 * h * v
    t_half = t + 0.5 * h
    half_acc = (bindings.e * h) / (2.0 * bindings.m)
    e_val = fields.E(r_half, t_half)
    b_val = fields.B(r_half, t_half)
    v_minus = v + half_acc * e_val
    tvec = (bindings.e * h / (2.0 * bindings.m * bindings.c)) * b_val
    v_prime = v_minus + np.cross(v_minus, tvec)
    svec = 2.0 * tvec / (1.0 + float(np.dot(tvec, tvec)))
    v_plus = v_minus + np.cross(v_prime, svec)
    v_new = v_plus + half_acc * e_val
    return r_half + 0.5 * h * v_new, v_new, t + h


def _accel(r, v, t, fields: FieldEvaluator, bindings: NumericBindings):
    return (bindings.e / bindings.m) * (
        fields.E(r, t) + np.cross(v, fields.B(r, t)) / bindings.c
    )


def _rk4_step(r, v, t, h, fields: FieldEvaluator, bindings: NumericBindings):
    k1r, k1v = v, _accel(r, v, t, fields, bindings)
    k2r = v + 0.5 * h * k1v
    k2v = _accel(r + 0.5 * h * k1r, k2r, t + 0.5 * h, fields, bindings)
    k3r = v + 0.5 * h * k2v
    k3v = _accel(r + 0.5 * h * k2r, k3r, t + 0.5 * h, fields, bindings)
    k4r = v + h * k3v
    k4v = _accel(r + h * k3r, k4r, t + h, fields, bindings)
    r_new = r + (h / 6.0) * (k1r + 2 * k2r + 2 * k3r + k4r)
    v_new = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
    return r_new, v_new, t + h


_STEPPERS = {"boris": _boris_step, "rk4": _rk4_step}


def step_boris(
    state: ParticleState,
    fields: tuple[VectorField, VectorField],
    h: float,
    bindings: Optional[NumericBindings] = None,
) -> ParticleState:
    """One drift / half-kick / rotation / half-kick / drift update of
    m dv/dt = eE + (e/c) v x B.

    With E = 0 the rotation preserves the speed exactly up to rounding.
    """
    bindings = bindings or NumericBindings()
    if not h > 0:
        raise ValueError("step size must be positive")
    ev = FieldEvaluator(fields[0], fields[1], bindings)
    r, v, t = _boris_step(state.r, state.v, state.t, h, ev, bindings)
    return ParticleState(r, v, t)


def step_rk4(
    state: ParticleState,
    fields: tuple[VectorField, VectorField],
    h: float,
    bindings: Optional[NumericBindings] = None,
) -> ParticleState:
    """One classical fourth-order step of the same equations of motion."""
    bindings = bindings or NumericBindings()
    if not h > 0:
        raise ValueError("step size must be positive")
    ev = FieldEvaluator(fields[0], fields[1], bindings)
    r, v, t = _rk4_step(state.r, state.v, state.t, h, ev, bindings)
    return ParticleState(r, v, t)


def integrate(
    state: ParticleState,
    fields: tuple[VectorField, VectorField],
    h: float,
    steps: int,
    method: str = "boris",
    bindings: Optional[NumericBindings] = None,
) -> Trajectory:
    """Integrate for a fixed number of uniform steps."""
    bindings = bindings or NumericBindings()
    if method not in _STEPPERS:
        raise ValueError(f"unknown integrator {method!r}")
    if not h > 0 or steps < 1:
        raise ValueError("need h > 0 and steps >= 1")
    stepper = _STEPPERS[method]
    ev = FieldEvaluator(fields[0], fields[1], bindings)
    times = np.empty(steps + 1)
    positions = np.empty((steps + 1, 3))
    velocities = np.empty((steps + 1, 3))
    r, v, t = state.r.copy(), state.v.copy(), state.t
    times[0], positions[0], velocities[0] = t, r, v
    for k in range(1, steps + 1):
        r, v, t = stepper(r, v, state.t + (k - 1) * h, h, ev, bindings)
        t = state.t + k * h  # uniform grid, no accumulated rounding
        times[k], positions[k], velocities[k] = t, r, v
    return Trajectory(times, positions, velocities, h, method)


def measured_rotation_frequency(traj: Trajectory, axis: Sequence[float] = (0, 0, 1)) -> float:
    """Angular frequency of the velocity rotation in the plane normal to axis."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    vel = traj.velocities - np.outer(traj.velocities @ n, n)
    total = 0.0
    for a, b in zip(vel[:-1], vel[1:]):
        cross = np.dot(np.cross(a, b), n)
        dot = float(np.dot(a, b))
        total += math.atan2(cross, dot)
    span = float(traj.times[-1] - traj.times[0])
    return abs(total) / span


# ---------------------------------------------------------------------------
# trajectory residuals


def el_residual(
    traj: Trajectory,
    lagrangian,
    bindings: Optional[NumericBindings] = None,
) -> ResidualReport:
    """Finite-difference Euler-Lagrange residual along a trajectory.

    Momenta dL/dv are differentiated in time by central differences and
    compared against dL/dq at the interior points; on an exact trajectory of
    the matching force the residual shrinks at second order in the step.
    """
    bindings = bindings or NumericBindings()
    if len(traj) < 5:
        raise ValueError("need at least 5 trajectory points")
    l_expr = lagrangian.L if hasattr(lagrangian, "L") else lagrangian
    momenta = [CompiledExpr(ex.partial(l_expr, ("v", i))) for i in (1, 2, 3)]
    gradients = [CompiledExpr(ex.partial(l_expr, ("q", i))) for i in (1, 2, 3)]
    pos = tuple(traj.positions[:, k] for k in range(3))
    vel = tuple(traj.velocities[:, k] for k in range(3))

    def sample(f: CompiledExpr) -> np.ndarray:
        value = f(pos, vel, traj.times, bindings)
        return np.broadcast_to(np.asarray(value, dtype=float), (len(traj),)).copy()

    p = np.stack([sample(f) for f in momenta], axis=1)
    dl_dq = np.stack([sample(f) for f in gradients], axis=1)
    dp_dt = (p[2:] - p[:-2]) / (2.0 * traj.h)
    residual = dp_dt - dl_dq[1:-1]
    mx, rms = _norms(residual)
    return ResidualReport([ResidualEntry("euler-lagrange", mx, rms, traj.h)])


def energy_check(
    traj: Trajectory,
    scalar_pot: Expr,
    conservative: Optional[Expr] = None,
    bindings: Optional[NumericBindings] = None,
) -> ResidualReport:
    """Drift of H = m v^2/2 + e A0(r) + U(r) along a trajectory.

    Static potentials only: a time-dependent A0 or U is rejected, because
    then H is not conserved to begin with.
    """
    bindings = bindings or NumericBindings()
    for name, pot in (("A0", scalar_pot), ("U", conservative)):
        if pot is not None and pot.has_kind("t"):
            raise ValueError(f"{name} must be static for the energy check")
    pos = tuple(traj.positions[:, k] for k in range(3))
    kinetic = 0.5 * bindings.m * np.sum(traj.velocities**2, axis=1)
    a0 = CompiledExpr(scalar_pot)(pos, None, traj.times, bindings)
    h_series = kinetic + bindings.e * np.asarray(a0, dtype=float)
    if conservative is not None:
        h_series = h_series + np.asarray(
            CompiledExpr(conservative)(pos, None, traj.times, bindings), dtype=float
        )
    h0 = float(h_series[0])
    scale = abs(h0) if abs(h0) > 1e-300 else 1.0
    drift = np.abs(h_series - h0) / scale
    mx, rms = _norms(drift)
    return ResidualReport([ResidualEntry("energy-drift", mx, rms, traj.h)])


# ---------------------------------------------------------------------------
# canonical brackets by finite differences


def canonical_bracket_check(
    fields: tuple[VectorField, VectorField],
    potentials: tuple[VectorField, Expr],
    state: ParticleState,
    bindings: Optional[NumericBindings] = None,
    fd_step: float = 1e-4,
) -> ResidualReport:
    """Central-difference canonical brackets versus the symbolic rule table.

    Builds p = m v + (e/c) A(r, t), treats v(r, p) as a function on phase
    space, and forms {f, g} = df/dr.dg/dp - df/dp.dg/dr numerically.  The
    reference values are the symbolic rules with the magnetic field bound,
    evaluated at the same point, so the two routes are fully independent.
    """
    bindings = bindings or NumericBindings()
    field_E, field_B = fields
    vec_pot, _ = potentials
    a_comps = [CompiledExpr(comp) for comp in vec_pot]
    t0 = state.t

    def a_val(r):
        return np.array([f(r, None, t0, bindings) for f in a_comps])

    def v_of(r, p, j):
        return (p[j] - (bindings.e / bindings.c) * a_val(r)[j]) / bindings.m

    p0 = bindings.m * state.v + (bindings.e / bindings.c) * a_val(state.r)

    def fd_bracket(f, g):
        total = 0.0
        for k in range(3):
            dr = np.zeros(3)
            dr[k] = fd_step
            dp = np.zeros(3)
            dp[k] = fd_step
            df_dr = (f(state.r + dr, p0) - f(state.r - dr, p0)) / (2 * fd_step)
            dg_dp = (g(state.r, p0 + dp) - g(state.r, p0 - dp)) / (2 * fd_step)
            df_dp = (f(state.r, p0 + dp) - f(state.r, p0 - dp)) / (2 * fd_step)
            dg_dr = (g(state.r + dr, p0) - g(state.r - dr, p0)) / (2 * fd_step)
            total += df_dr * dg_dp - df_dp * dg_dr
        return total

    entries = []
    diag_err, offdiag_err, qq_err = [], [], []
    for i in range(3):
        for j in range(3):
            got = fd_bracket(
                lambda r, p, i=i: r[i], lambda r, p, j=j: v_of(r, p, j)
            )
            if i == j:
                expected = 1.0 / bindings.m
                diag_err.append(abs(got - expected) * bindings.m)
            else:
                offdiag_err.append(abs(got))
            qq = fd_bracket(lambda r, p, i=i: r[i], lambda r, p, j=j: r[j])
            qq_err.append(abs(qq))
    mx, rms = _norms(diag_err)
    entries.append(ResidualEntry("position-velocity-diagonal", mx, rms, fd_step))
    mx, rms = _norms(offdiag_err)
    entries.append(ResidualEntry("position-velocity-offdiagonal", mx, rms, fd_step))
    mx, rms = _norms(qq_err)
    entries.append(ResidualEntry("position-position", mx, rms, fd_step))

    vv_err = []
    for i in range(3):
        for j in range(3):
            got = fd_bracket(
                lambda r, p, i=i: v_of(r, p, i), lambda r, p, j=j: v_of(r, p, j)
            )
            rule = _rule_bracket(ex.v(i + 1), ex.v(j + 1))
            bound = ex.substitute_fields(rule, {"B": field_B})
            expected = float(evaluate(bound, state.r, bindings, time=t0))
            scale = max(abs(expected), 1.0)
            vv_err.append(abs(got - expected) / scale)
    mx, rms = _norms(vv_err)
    entries.append(ResidualEntry("velocity-velocity", mx, rms, fd_step))
    return ResidualReport(entries)


# ---------------------------------------------------------------------------
# grid Maxwell residuals


def _central_diff(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    sl_plus = [slice(1, -1)] * 3
    sl_minus = [slice(1, -1)] * 3
    sl_plus[axis] = slice(2, None)
    sl_minus[axis] = slice(0, -2)
    return (values[tuple(sl_plus)] - values[tuple(sl_minus)]) / (2.0 * h)


def _interior(values: np.ndarray) -> np.ndarray:
    return values[1:-1, 1:-1, 1:-1]


def maxwell_grid_residuals(
    fields: tuple[VectorField, VectorField],
    grid: GridSpec,
    bindings: Optional[NumericBindings] = None,
    charge_density: Optional[Expr] = None,
    current_density: Optional[VectorField] = None,
) -> ResidualReport:
    """Four central-difference Maxwell residuals on a cubic grid.

    Time derivatives are taken symbolically and sampled; space derivatives
    are second-order central stencils on interior points.  Without source
    expressions, the Gauss and Ampere-Maxwell rows report the implied
    sources div E and c curl B - dE/dt instead of residuals.
    """
    bindings = bindings or NumericBindings()
    field_E, field_B = fields
    axis = grid.axis()
    mesh = np.meshgrid(axis, axis, axis, indexing="ij")
    pos = (mesh[0], mesh[1], mesh[2])
    t0 = grid.t0
    h = grid.h

    def sample(comp: Expr) -> np.ndarray:
        value = CompiledExpr(comp)(pos, None, t0, bindings)
        return np.broadcast_to(np.asarray(value, dtype=float), mesh[0].shape).copy()

    e_vals = [sample(c) for c in field_E]
    b_vals = [sample(c) for c in field_B]
    de_dt = [sample(ex.partial(c, ("t", None))) for c in field_E]
    db_dt = [sample(ex.partial(c, ("t", None))) for c in field_B]

    def div_fd(vals) -> np.ndarray:
        return sum(_central_diff(vals[k], k, h) for k in range(3))

    def curl_fd(vals) -> list[np.ndarray]:
        return [
            _central_diff(vals[2], 1, h) - _central_diff(vals[1], 2, h),
            _central_diff(vals[0], 2, h) - _central_diff(vals[2], 0, h),
            _central_diff(vals[1], 0, h) - _central_diff(vals[0], 1, h),
        ]

    entries = []
    mx, rms = _norms(div_fd(b_vals))
    entries.append(ResidualEntry("magnetic-divergence", mx, rms, h))

    curl_e = curl_fd(e_vals)
    faraday = [
        curl_e[k] + _interior(db_dt[k]) / bindings.c for k in range(3)
    ]
    mx, rms = _norms(faraday)
    entries.append(ResidualEntry("faraday-induction", mx, rms, h))

    div_e = div_fd(e_vals)
    if charge_density is not None:
        rho = _interior(sample(charge_density))
        mx, rms = _norms(div_e - rho)
        entries.append(ResidualEntry("gauss-electric", mx, rms, h))
    else:
        mx, rms = _norms(div_e)
        entries.append(ResidualEntry("implied-charge-density", mx, rms, h))

    curl_b = curl_fd(b_vals)
    if current_density is not None:
        j_vals = [_interior(sample(c)) for c in current_density]
        ampere = [
            curl_b[k] - (j_vals[k] + _interior(de_dt[k])) / bindings.c
            for k in range(3)
        ]
        mx, rms = _norms(ampere)
        entries.append(ResidualEntry("ampere-maxwell", mx, rms, h))
    else:
        implied = [
            bindings.c * curl_b[k] - _interior(de_dt[k]) for k in range(3)
        ]
        mx, rms = _norms(implied)
        entries.append(ResidualEntry("implied-current-density", mx, rms, h))
    return ResidualReport(entries)
