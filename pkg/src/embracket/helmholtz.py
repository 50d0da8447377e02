"""Inverse problem of the calculus of variations for velocity-dependent forces.

Given a force F(t, q, v) this module decides whether it derives from a
Lagrangian with Hessian m * delta_ij, using the two classical conditions

    dF_i/dv_j + dF_j/dv_i = 0
    dF_i/dq_j - dF_j/dq_i + d/dt (dF_j/dv_i) = 0

plus the equivalent triple on the affine decomposition F_i = a_ij v_j + b_i
(a antisymmetric, cyclic gradient sum of a vanishing, curl b matching the
time derivative of a).  Passing forces are decomposed into electric and
magnetic fields, potentials are constructed by the star-shaped homotopy
integral, and the minimally coupled Lagrangian is rebuilt and round-tripped
through its Euler-Lagrange equations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import expr as ex
from .expr import (
    C_SYM,
    E_SYM,
    Expr,
    M_SYM,
    VectorField,
    ZERO,
    accel,
    curl,
    divergence,
    gradient,
    partial,
    phase_space,
    rational,
    time_derivative_field,
    total_time_derivative,
    v,
    x,
)

_EPS_SIGN = {
    (1, 2, 3): 1, (2, 3, 1): 1, (3, 1, 2): 1,
    (1, 3, 2): -1, (3, 2, 1): -1, (2, 1, 3): -1,
}


class NotVariationalError(Exception):
    """The force fails the potentiality conditions; carries the report."""

    def __init__(self, report: "HelmholtzReport"):
        super().__init__("force does not derive from a Lagrangian")
        self.report = report


class SymmetricPartError(Exception):
    """The velocity-gradient matrix has a symmetric part; carries a witness."""

    def __init__(self, witness: Expr, indices: tuple[int, int]):
        super().__init__(
            f"symmetric part nonzero at {indices}: {witness}"
        )
        self.witness = witness
        self.indices = indices


class PotentialConstructionError(Exception):
    """No potential exists; carries the obstruction residual(s)."""

    def __init__(self, message: str, residual):
        super().__init__(f"{message}: {residual}")
        self.residual = residual


@dataclass(frozen=True)
class ForceLaw:
    """Three phase-space force components plus an optional conservative term.

    The scalar potential contributes -dU/dq_i on top of the stored
    components; it never enters the field identification.
    """

    components: tuple[Expr, Expr, Expr]
    potential: Optional[Expr] = None

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) != 3:
            raise ex.ExprError("a force law needs exactly three components")
        object.__setattr__(self, "components", comps)
        if self.potential is not None and self.potential.has_kind("v"):
            raise ex.ExprError("the conservative potential may not depend on v")

    @classmethod
    def lorentz(
        cls,
        field_E: VectorField,
        field_B: VectorField,
        potential: Optional[Expr] = None,
    ) -> "ForceLaw":
        """e E + (e/c) v x B built from concrete fields, moved onto the trajectory."""
        e_q = field_E.to_phase()
        b_q = field_B.to_phase()
        comps = []
        for i in (1, 2, 3):
            f = E_SYM * e_q[i - 1]
            for (a, b, c), sign in _EPS_SIGN.items():
                if a == i:
                    f = f + rational(sign) * (E_SYM / C_SYM) * v(b) * b_q[c - 1]
            comps.append(f)
        pot = phase_space(potential) if potential is not None else None
        return cls(tuple(comps), pot)

    def total_components(self) -> tuple[Expr, Expr, Expr]:
        if self.potential is None:
            return self.components
        return tuple(
            comp - partial(self.potential, ("q", i))
            for i, comp in zip((1, 2, 3), self.components)
        )


@dataclass(frozen=True)
class AffineDecomposition:
    """F_i = a_ij v_j + b_i with a, b functions of (q, t)."""

    a: tuple[tuple[Expr, ...], ...]
    b: tuple[Expr, ...]

    def reconstruct(self) -> tuple[Expr, Expr, Expr]:
        return tuple(
            sum((self.a[i][j] * v(j + 1) for j in range(3)), start=ZERO) + self.b[i]
            for i in range(3)
        )


@dataclass(frozen=True)
class ConditionResult:
    name: str
    residuals: tuple[tuple[tuple[int, ...], Expr], ...]  # nonzero entries only

    @property
    def passed(self) -> bool:
        return not self.residuals

    def residual_at(self, *indices: int) -> Expr:
        for idx, value in self.residuals:
            if idx == indices:
                return value
        return ZERO

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": self.passed,
            "residuals": [
                {"indices": list(idx), "expr": str(value)}
                for idx, value in self.residuals
            ],
        }


@dataclass(frozen=True)
class HelmholtzReport:
    """Outcome of the potentiality test, condition by condition."""

    linearity: ConditionResult
    velocity_symmetry: ConditionResult
    mixed_gradient: ConditionResult
    affine_antisymmetry: Optional[ConditionResult]
    affine_cyclic: Optional[ConditionResult]
    affine_time: Optional[ConditionResult]
    hessian: tuple[tuple[Expr, ...], ...]

    @property
    def conditions(self) -> tuple[ConditionResult, ...]:
        out = [self.linearity, self.velocity_symmetry, self.mixed_gradient]
        for extra in (self.affine_antisymmetry, self.affine_cyclic, self.affine_time):
            if extra is not None:
                out.append(extra)
        return tuple(out)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def condition(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "conditions": [c.to_json_dict() for c in self.conditions],
            "hessian": [[str(h) for h in row] for row in self.hessian],
            "pass": self.passed,
        }


def _nonzero(name: str, entries) -> ConditionResult:
    return ConditionResult(
        name, tuple((idx, value) for idx, value in entries if not value.is_zero)
    )


def check_linearity(force: ForceLaw) -> ConditionResult:
    """Second velocity derivatives of every component must vanish."""
    comps = force.total_components()
    entries = []
    for i, j, k in itertools.product((1, 2, 3), repeat=3):
        value = partial(partial(comps[i - 1], ("v", j)), ("v", k))
        entries.append(((i, j, k), value))
    return _nonzero("linearity", entries)


def helmholtz_check(force: ForceLaw) -> HelmholtzReport:
    """Evaluate the potentiality conditions symbolically.

    The total time derivative in the mixed condition is taken in free mode;
    for affine forces the acceleration terms drop out on their own.
    """
    comps = force.total_components()
    linearity = check_linearity(force)

    c1 = []
    for i, j in itertools.product((1, 2, 3), repeat=2):
        value = partial(comps[i - 1], ("v", j)) + partial(comps[j - 1], ("v", i))
        c1.append(((i, j), value))
    velocity_symmetry = _nonzero("velocity-symmetry", c1)

    c2 = []
    for i, j in itertools.product((1, 2, 3), repeat=2):
        value = (
            partial(comps[i - 1], ("q", j))
            - partial(comps[j - 1], ("q", i))
            + total_time_derivative(partial(comps[j - 1], ("v", i)), mode="free")
        )
        c2.append(((i, j), value))
    mixed_gradient = _nonzero("mixed-gradient", c2)

    affine_anti = affine_cyc = affine_time = None
    if linearity.passed:
        a = [[partial(comps[i - 1], ("v", j)) for j in (1, 2, 3)] for i in (1, 2, 3)]
        b = [
            comps[i - 1]
            - sum((a[i - 1][j - 1] * v(j) for j in (1, 2, 3)), start=ZERO)
            for i in (1, 2, 3)
        ]
        anti = [
            ((i, j), a[i - 1][j - 1] + a[j - 1][i - 1])
            for i, j in itertools.product((1, 2, 3), repeat=2)
        ]
        affine_anti = _nonzero("affine-antisymmetry", anti)
        # The cyclic gradient condition is reported in the orientation that
        # writes the Lorentz matrix as -(e/c) eps_ijk B_k (the transpose of
        # the literal velocity gradient); its (1,2,3) entry is then exactly
        # -(e/c) div B.
        at = [[a[j][i] for j in range(3)] for i in range(3)]
        cyc = []
        for i, s, j in itertools.product((1, 2, 3), repeat=3):
            value = (
                partial(at[i - 1][s - 1], ("q", j))
                + partial(at[s - 1][j - 1], ("q", i))
                + partial(at[j - 1][i - 1], ("q", s))
            )
            cyc.append(((i, s, j), value))
        affine_cyc = _nonzero("affine-cyclic", cyc)
        tcond = []
        for i, j in itertools.product((1, 2, 3), repeat=2):
            value = (
                partial(b[i - 1], ("q", j))
                - partial(b[j - 1], ("q", i))
                - partial(a[i - 1][j - 1], ("t", None))
            )
            tcond.append(((i, j), value))
        affine_time = _nonzero("affine-time", tcond)

    hessian = tuple(
        tuple(M_SYM * rational(1 if i == j else 0) for j in (1, 2, 3))
        for i in (1, 2, 3)
    )
    return HelmholtzReport(
        linearity,
        velocity_symmetry,
        mixed_gradient,
        affine_anti,
        affine_cyc,
        affine_time,
        hessian,
    )


def decompose(force: ForceLaw) -> AffineDecomposition:
    """Split the (electromagnetic) components as a_ij v_j + b_i.

    Only the stored components enter; the conservative potential is kept
    separate so the field identification stays clean.
    """
    lin = check_linearity(ForceLaw(force.components))
    if not lin.passed:
        idx, witness = lin.residuals[0]
        raise PotentialConstructionError(
            f"force is not affine in velocity at {idx}", witness
        )
    comps = force.components
    a = tuple(
        tuple(partial(comps[i - 1], ("v", j)) for j in (1, 2, 3)) for i in (1, 2, 3)
    )
    b = tuple(
        comps[i - 1] - sum((a[i - 1][j - 1] * v(j) for j in (1, 2, 3)), start=ZERO)
        for i in (1, 2, 3)
    )
    deco = AffineDecomposition(a, b)
    for orig, back in zip(comps, deco.reconstruct()):
        assert (orig - back).is_zero
    return deco


def identify_fields(
    deco: AffineDecomposition,
) -> tuple[tuple[Expr, Expr, Expr], tuple[Expr, Expr, Expr]]:
    """Recover (E, B) from an affine decomposition of a Lorentz-type force.

    The symmetric part of a must vanish.  The axial dual is taken as
    B_k = -(c/2e) eps_kij a_ji: the contraction runs over the transposed
    (velocity-reversal) orientation, which is the one that writes the
    matrix as -(e/c) eps_ijk B_k, so the fields of e E + (e/c) v x B come
    back exactly.  E_i = b_i / e.  Components come back as (q, t)
    expressions.
    """
    for i, j in itertools.product((1, 2, 3), repeat=2):
        sym = (deco.a[i - 1][j - 1] + deco.a[j - 1][i - 1]) / 2
        if not sym.is_zero:
            raise SymmetricPartError(sym, (i, j))
    b_field = []
    for k in (1, 2, 3):
        acc = ZERO
        for (a, b, c), sign in _EPS_SIGN.items():
            if a == k:
                acc = acc + rational(sign) * deco.a[c - 1][b - 1]
        b_field.append(-(C_SYM / (2 * E_SYM)) * acc)
    e_field = tuple(bi / E_SYM for bi in deco.b)
    return tuple(e_field), tuple(b_field)


# ---------------------------------------------------------------------------
# potentials by the star-shaped homotopy


def _scale_degree_integral(component: Expr, shift: int) -> Expr:
    """Integrate s^(shift-1) f(s x, t) ds over [0, 1] monomial by monomial.

    A monomial of spatial degree d turns into s^(d + shift - 1) f(x, t), so
    it just picks up the exact rational weight 1/(d + shift).
    """
    out = ZERO
    for coeff, cpow, atoms in component.terms:
        degree = sum(
            1 for a in atoms if isinstance(a, ex.Var) and a.kind == "x"
        )
        piece = Expr(((coeff / (degree + shift), cpow, atoms),), _canonical=True)
        out = out + piece
    return out


def poincare_vector_potential(field_B: VectorField) -> VectorField:
    """A vector potential for a divergence-free polynomial field.

    Uses the homotopy A(x, t) = integral_0^1 s B(s x, t) x x ds, which for
    polynomial B evaluates to exact rational coefficients and satisfies
    curl A = B identically.
    """
    div_b = divergence(field_B)
    if not div_b.is_zero:
        raise PotentialConstructionError("magnetic field has nonzero divergence", div_b)
    comps = []
    for i in (1, 2, 3):
        acc = ZERO
        for (a, b, c), sign in _EPS_SIGN.items():
            if a == i:
                acc = acc + rational(sign) * _scale_degree_integral(field_B[b - 1], 2) * x(c)
        comps.append(acc)
    result = VectorField(comps)
    residual = [ci - bi for ci, bi in zip(curl(result), field_B)]
    assert all(r.is_zero for r in residual)
    return result


def scalar_potential(field_E: VectorField, vec_potential: VectorField) -> Expr:
    """A scalar potential with E = -grad A0 - (1/c) dA/dt.

    The curl-free combination G = E + (1/c) dA/dt is integrated radially:
    A0(x, t) = -integral_0^1 G(s x, t) . x ds.
    """
    g = VectorField(
        tuple(
            ei + ai / C_SYM
            for ei, ai in zip(field_E, time_derivative_field(vec_potential))
        )
    )
    curl_g = curl(g)
    if not all(ci.is_zero for ci in curl_g):
        raise PotentialConstructionError(
            "electric field is not compatible with the vector potential",
            tuple(curl_g),
        )
    a0 = ZERO
    for i in (1, 2, 3):
        a0 = a0 - _scale_degree_integral(g[i - 1], 1) * x(i)
    residual = [gi + ai for gi, ai in zip(gradient(a0), g)]
    assert all(r.is_zero for r in residual)
    return a0


# ---------------------------------------------------------------------------
# the Lagrangian


@dataclass(frozen=True)
class LagrangianExpr:
    """A reconstructed phase-space Lagrangian plus the potentials it came from."""

    L: Expr
    vector_potential: VectorField
    scalar_pot: Expr
    conservative: Optional[Expr] = None

    def hessian(self) -> tuple[tuple[Expr, ...], ...]:
        return tuple(
            tuple(partial(partial(self.L, ("v", i)), ("v", j)) for j in (1, 2, 3))
            for i in (1, 2, 3)
        )

    def to_json_dict(self) -> dict:
        return {
            "lagrangian": str(self.L),
            "vector_potential": str(self.vector_potential),
            "scalar_potential": str(self.scalar_pot),
            "conservative_potential": (
                str(self.conservative) if self.conservative is not None else None
            ),
        }


def _require_concrete(parts, what: str) -> None:
    for p in parts:
        if p.has_fields():
            raise PotentialConstructionError(
                f"{what} contains opaque field components; potentials need "
                "concrete polynomials",
                p,
            )


def _field_space(component: Expr) -> Expr:
    raw = []
    for coeff, cpow, atoms in component.terms:
        new_atoms = tuple(
            ex.Var("x", a.index) if isinstance(a, ex.Var) and a.kind == "q" else a
            for a in atoms
        )
        raw.append((coeff, cpow, new_atoms))
    return Expr(tuple(raw))


def reconstruct_lagrangian(force: ForceLaw) -> LagrangianExpr:
    """Rebuild L = m v^2/2 + (e/c) v.A - e A0 - U for a potential force.

    Raises :class:`NotVariationalError` when the potentiality conditions
    fail and :class:`PotentialConstructionError` when no polynomial
    potentials exist.
    """
    report = helmholtz_check(force)
    if not report.passed:
        raise NotVariationalError(report)
    deco = decompose(force)
    e_q, b_q = identify_fields(deco)
    _require_concrete(e_q + b_q, "identified field")
    field_e = VectorField(tuple(_field_space(c) for c in e_q))
    field_b = VectorField(tuple(_field_space(c) for c in b_q))
    vec_pot = poincare_vector_potential(field_b)
    a0 = scalar_potential(field_e, vec_pot)

    lagrangian = sum(
        (M_SYM * v(i) * v(i) / 2 for i in (1, 2, 3)), start=ZERO
    )
    a_phase = vec_pot.to_phase()
    for i in (1, 2, 3):
        lagrangian = lagrangian + (E_SYM / C_SYM) * v(i) * a_phase[i - 1]
    lagrangian = lagrangian - E_SYM * phase_space(a0)
    if force.potential is not None:
        lagrangian = lagrangian - force.potential

    result = LagrangianExpr(lagrangian, vec_pot, a0, force.potential)
    for i, row in enumerate(result.hessian()):
        for j, h in enumerate(row):
            assert h == (M_SYM if i == j else ZERO)
    return result


def euler_lagrange_roundtrip(
    lagrangian: LagrangianExpr | Expr, force: ForceLaw
) -> tuple[Expr, Expr, Expr]:
    """(m a_i - F_i) minus the Euler-Lagrange expression of L, per component.

    Identically zero exactly when L generates the force.
    """
    l_expr = lagrangian.L if isinstance(lagrangian, LagrangianExpr) else lagrangian
    comps = force.total_components()
    out = []
    for i in (1, 2, 3):
        el = total_time_derivative(partial(l_expr, ("v", i)), mode="free") - partial(
            l_expr, ("q", i)
        )
        target = M_SYM * accel(i) - comps[i - 1]
        out.append(target - el)
    return tuple(out)


# ---------------------------------------------------------------------------
# duality and parity


def duality_transform(
    field_E: VectorField, field_B: VectorField
) -> tuple[VectorField, VectorField]:
    """(E, B) -> (B, -E); four applications are the identity."""
    return field_B, -field_E


def duality_map(expression: Expr) -> Expr:
    """Apply E -> B, B -> -E to the opaque field atoms of a constraint."""
    return ex.map_field_families(expression, {"E": ("B", 1), "B": ("E", -1)})


def normalize_sign(expression: Expr) -> Expr:
    """Flip an overall sign so the leading canonical coefficient is positive."""
    if expression.terms and expression.terms[0][0] < 0:
        return -expression
    return expression


@dataclass(frozen=True)
class FieldLagrangianSpec:
    """Coefficients of the candidate field functional alpha E^2 + beta B^2 + gamma E.B."""

    alpha: Fraction
    beta: Fraction
    gamma: Fraction

    def integrand(self) -> Expr:
        e_sq = ex.field_component("E", "i") * ex.field_component("E", "i")
        b_sq = ex.field_component("B", "i") * ex.field_component("B", "i")
        e_dot_b = ex.field_component("E", "i") * ex.field_component("B", "i")
        return (
            rational(self.alpha) * e_sq
            + rational(self.beta) * b_sq
            + rational(self.gamma) * e_dot_b
        )

    def to_json_dict(self) -> dict:
        return {
            "alpha": str(self.alpha),
            "beta": str(self.beta),
            "gamma": str(self.gamma),
        }


CANONICAL_FIELD_SPEC = FieldLagrangianSpec(Fraction(1, 2), Fraction(1, 2), Fraction(0))


@dataclass(frozen=True)
class ParityVerdict:
    passed: bool
    odd_part: Expr
    canonical: FieldLagrangianSpec
    note: str

    def to_json_dict(self) -> dict:
        return {
            "pass": self.passed,
            "odd_part": str(self.odd_part),
            "canonical": self.canonical.to_json_dict(),
            "note": self.note,
        }


def parity_audit(spec: FieldLagrangianSpec) -> ParityVerdict:
    """Check that the field functional is parity even.

    E is a vector and B an axial vector, so the mixed E.B term flips sign
    under inversion and the functional is even exactly when gamma = 0.
    """
    integrand = spec.integrand()
    flipped = ex.parity_transform(integrand)
    odd = (integrand - flipped) / 2
    return ParityVerdict(
        passed=odd.is_zero,
        odd_part=odd,
        canonical=CANONICAL_FIELD_SPEC,
        note=(
            "canonical normalization alpha = beta = 1/2; the free-field "
            "action conventionally carries (E^2 - B^2)/2, the relative sign "
            "is reported, not altered"
        ),
    )
