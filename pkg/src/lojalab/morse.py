"""Morse-Bott and higher-order flatness checks on coordinate subspaces.

The critical set is assumed (and verified, not discovered) to be a
coordinate subspace ``K`` through the origin.  The plain check compares the
kernel of the exact rational Hessian with ``K``; the order-``N`` check
verifies that every derivative of order ``1..N-1`` vanishes identically on
``K`` and that the ``N``-th derivative at the origin is coercive transverse
to ``K``.  A positive order-``N`` verdict predicts the gradient-inequality
exponent ``1 - 1/N`` with the explicit constant

    C = (N/4) * inf_v ( (2/N!) * ||D^N(0) v^{N-1}|| )^(1/N)

over unit directions ``v`` normal to ``K``; the inequality is then checked
by sampling a shrinking cylinder around ``K`` on which the Taylor-remainder
smallness conditions of the constant's derivation are themselves verified.

Equality of the critical set with ``K`` (as opposed to containment, which is
symbolic and exact) is probed by sampling only and flagged as heuristic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .poly import Polynomial
from .reports import InequalityCheckReport, rational_str
from .sampling import ball_points, geometric_radii, sphere_directions, subspace_grid
from .snc import ZERO_SKIP

CERTIFIED_ZETA_MARGIN = 0.9
COERCIVITY_FLOOR = 1e-12


class MorseBottError(ValueError):
    pass


@dataclass
class MorseBottReport:
    kind: str  # "morse-bott" or "generalized"
    critical_subspace: tuple[int, ...]
    gradient_vanishes_on_subspace: bool
    is_critical_set_exactly_subspace: bool  # sampled heuristic, not a proof
    order: int | None
    condition_b_holds: bool | None
    coercivity_zeta: float | None
    coercivity_zeta_certified: float | None
    predicted_theta: Fraction | None
    verdict: bool
    hessian_rank: int | None = None
    hessian_kernel_basis: tuple[tuple[Fraction, ...], ...] | None = None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "K": list(self.critical_subspace),
            "N": self.order,
            "zeta": self.coercivity_zeta,
            "zeta_certified": self.coercivity_zeta_certified,
            "theta": rational_str(self.predicted_theta) if self.predicted_theta else None,
            "conditions": {
                "a": self.gradient_vanishes_on_subspace
                and self.is_critical_set_exactly_subspace,
                "b": self.condition_b_holds,
                "c": None
                if self.coercivity_zeta is None
                else self.coercivity_zeta > COERCIVITY_FLOOR,
            },
            "critical_set_equality_check": "heuristic-sampled",
            "pass": self.verdict,
        }


def _require_critical_origin(p: Polynomial) -> None:
    for g in p.gradient():
        if g.constant_term() != 0:
            raise MorseBottError("origin is not a critical point")


def _restrict_to_subspace(p: Polynomial, subspace: Sequence[int]) -> Polynomial:
    zeroed = {
        v: 0 for i, v in enumerate(p.variables) if i not in set(subspace)
    }
    return p.shift(zeroed) if zeroed else p


def _gradient_vanishes_on(p: Polynomial, subspace: Sequence[int]) -> bool:
    return all(_restrict_to_subspace(g, subspace).is_zero for g in p.gradient())


def _sampled_criticality_check(
    p: Polynomial,
    subspace: Sequence[int],
    radius: float = 0.25,
    samples: int = 10_000,
    seed: int = 0,
) -> bool:
    """Look for sampled gradient zeros off the declared subspace.

    Random points almost never land exactly on a stray critical variety, so
    this can only catch gross violations; the report flags it as heuristic.
    """
    d = len(p.variables)
    points = ball_points(d, samples, radius, seed=seed)
    off = [i for i in range(d) if i not in set(subspace)]
    dist = np.linalg.norm(points[:, off], axis=1)
    keep = dist > 1e-3 * radius
    if not np.any(keep):
        return True
    grads = np.linalg.norm(p.gradient_numeric()(points[keep]), axis=1)
    return bool(np.all(grads > 1e-12))


def _hessian_exact(p: Polynomial) -> list[list[Fraction]]:
    d = len(p.variables)
    H: list[list[Fraction]] = [[Fraction(0)] * d for _ in range(d)]
    for i in range(d):
        gi = p.derivative(p.variables[i])
        for j in range(i, d):
            value = gi.derivative(p.variables[j]).constant_term()
            H[i][j] = value
            H[j][i] = value
    return H


def _kernel_basis(matrix: list[list[Fraction]]) -> list[tuple[Fraction, ...]]:
    """Exact kernel basis via fraction-free-ish Gaussian elimination."""
    rows = [list(r) for r in matrix]
    d = len(rows[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(d):
        pivot_row = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        pivot = rows[r][c]
        rows[r] = [x / pivot for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                factor = rows[i][c]
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(d) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * d
        vec[f] = Fraction(1)
        for row_idx, c in enumerate(pivots):
            vec[c] = -rows[row_idx][f]
        basis.append(tuple(vec))
    return basis


def check_morse_bott(
    p: Polynomial,
    subspace: Iterable[int] = (),
    samples: int = 10_000,
    seed: int = 0,
) -> MorseBottReport:
    """Does the Hessian kernel at the origin equal the declared subspace?

    Verifies symbolically that the gradient vanishes identically on the
    subspace, computes the exact rational Hessian at the origin, and demands
    that its kernel be exactly the span of the subspace coordinates.
    """
    _require_critical_origin(p)
    d = len(p.variables)
    subspace = tuple(sorted(set(subspace)))
    if any(i < 0 or i >= d for i in subspace):
        raise MorseBottError(f"subspace indices {subspace} out of range for d={d}")
    contains = _gradient_vanishes_on(p, subspace)
    heuristic_equal = _sampled_criticality_check(p, subspace, samples=samples, seed=seed)
    hessian = _hessian_exact(p)
    kernel = _kernel_basis(hessian)
    rank = d - len(kernel)
    kernel_is_subspace = len(kernel) == len(subspace) and all(
        all(hessian[i][j] == 0 for i in range(d)) for j in subspace
    )
    verdict = contains and kernel_is_subspace
    return MorseBottReport(
        kind="morse-bott",
        critical_subspace=subspace,
        gradient_vanishes_on_subspace=contains,
        is_critical_set_exactly_subspace=heuristic_equal,
        order=2 if verdict else None,
        condition_b_holds=contains,
        coercivity_zeta=None,
        coercivity_zeta_certified=None,
        predicted_theta=Fraction(1, 2) if verdict else None,
        verdict=verdict,
        hessian_rank=rank,
        hessian_kernel_basis=tuple(kernel),
    )


def _derivatives_by_multi_index(p: Polynomial, max_order: int) -> dict[tuple[int, ...], Polynomial]:
    """All iterated partials with multi-index total order <= max_order."""
    d = len(p.variables)
    out: dict[tuple[int, ...], Polynomial] = {(0,) * d: p}
    frontier = [(0,) * d]
    for _ in range(max_order):
        next_frontier = []
        for m in frontier:
            base = out[m]
            for i in range(d):
                key = tuple(e + (1 if j == i else 0) for j, e in enumerate(m))
                if key not in out:
                    out[key] = base.derivative(p.variables[i])
                    next_frontier.append(key)
        frontier = next_frontier
    return out


def _normal_directions(d: int, subspace: Sequence[int], count: int) -> np.ndarray:
    normal = [i for i in range(d) if i not in set(subspace)]
    if not normal:
        raise MorseBottError("subspace is the whole space; no normal directions")
    block = sphere_directions(len(normal), count)
    out = np.zeros((block.shape[0], d))
    for j, idx in enumerate(normal):
        out[:, idx] = block[:, j]
    return out


def _homogeneous_part(p: Polynomial, degree: int) -> Polynomial:
    terms = {e: c for e, c in p.terms.items() if sum(e) == degree}
    return Polynomial(p.variables, terms)


def nth_derivative_form(p: Polynomial, order: int) -> Polynomial:
    """Polynomial v -> D^order p(0) v^order, i.e. order! times the degree-order part."""
    return _homogeneous_part(p, order).scale(math.factorial(order))


def check_generalized_morse_bott(
    p: Polynomial,
    subspace: Iterable[int],
    order: int,
    sphere_samples: int = 10_000,
    samples: int = 10_000,
    seed: int = 0,
) -> MorseBottReport:
    """Order-``N`` flatness along the subspace plus transverse coercivity.

    Condition (b): every mixed partial of total order ``1..N-1`` vanishes
    identically on the subspace (checked symbolically, exactly).  Condition
    (c): the N-th derivative form at 0 is bounded away from zero on the unit
    sphere of the normal space (checked on a deterministic mesh; the
    certified coercivity keeps a 10% slack under the sampled minimum).
    """
    if order < 2:
        raise MorseBottError("order must be at least 2")
    _require_critical_origin(p)
    d = len(p.variables)
    subspace = tuple(sorted(set(subspace)))
    if any(i < 0 or i >= d for i in subspace):
        raise MorseBottError(f"subspace indices {subspace} out of range for d={d}")
    contains = _gradient_vanishes_on(p, subspace)
    heuristic_equal = _sampled_criticality_check(p, subspace, samples=samples, seed=seed)

    derivs = _derivatives_by_multi_index(p, order - 1)
    condition_b = True
    for m, poly in derivs.items():
        if 1 <= sum(m) <= order - 1:
            if not _restrict_to_subspace(poly, subspace).is_zero:
                condition_b = False
                break

    form = nth_derivative_form(p, order)
    directions = _normal_directions(d, subspace, sphere_samples)
    values = np.abs(form.numeric()(directions))
    zeta = float(values.min())
    condition_c = zeta > COERCIVITY_FLOOR

    verdict = contains and condition_b and condition_c
    return MorseBottReport(
        kind="generalized",
        critical_subspace=subspace,
        gradient_vanishes_on_subspace=contains,
        is_critical_set_exactly_subspace=heuristic_equal,
        order=order,
        condition_b_holds=condition_b,
        coercivity_zeta=zeta,
        coercivity_zeta_certified=CERTIFIED_ZETA_MARGIN * zeta,
        predicted_theta=Fraction(order - 1, order) if verdict else None,
        verdict=verdict,
    )


def _contracted_gradient(form_gradient: list, points: np.ndarray, order: int) -> np.ndarray:
    """(m, d) array of D^N(0) v^{N-1} over rows v, given grad of the N-form."""
    cols = [g(points) for g in form_gradient]
    return np.stack(cols, axis=1) / order


def gmb_constant(
    p: Polynomial, subspace: Sequence[int], order: int, sphere_samples: int = 10_000
) -> float:
    """The cylinder constant (N/4) inf_v ((2/N!)||D^N(0) v^{N-1}||)^{1/N}."""
    d = len(p.variables)
    form = nth_derivative_form(p, order)
    grad_parts = [g.numeric() for g in form.gradient()]
    directions = _normal_directions(d, subspace, sphere_samples)
    contracted = _contracted_gradient(grad_parts, directions, order)
    norms = np.linalg.norm(contracted, axis=1)
    inf_term = float(((2.0 / math.factorial(order)) * norms).min())
    return (order / 4.0) * inf_term ** (1.0 / order)


def verify_gmb_gradient_inequality(
    p: Polynomial,
    report: MorseBottReport,
    samples: int = 4000,
    cylinder_radius: float = 0.5,
    cylinder_length: float = 0.5,
    force: bool = False,
    extra_points: np.ndarray | None = None,
    max_halvings: int = 40,
) -> InequalityCheckReport:
    """Sampled check of ``||grad p|| >= C |p - p(0)|^(1-1/N)`` near the subspace.

    The cylinder radius and length are halved until the sampled
    Taylor-remainder conditions behind the constant's derivation hold, then
    the ratio is minimized over the cylinder samples (and any caller-supplied
    extra points, which is how known bad curves are exhibited).
    """
    if report.order is None:
        raise MorseBottError("report carries no order; run the order-N check")
    if not (report.verdict or force):
        raise MorseBottError("report verdict is negative; pass force=True to probe anyway")
    order = report.order
    d = len(p.variables)
    subspace = report.critical_subspace
    constant = gmb_constant(p, subspace, order)

    derivs = _derivatives_by_multi_index(p, order)
    top = {m: poly for m, poly in derivs.items() if sum(m) == order}
    top_numeric = {m: poly.numeric() for m, poly in top.items()}
    factorial = math.factorial

    def tensor_vn(points: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        """D^N p(x) v^N per row (x, v)."""
        total = np.zeros(points.shape[0])
        for m, fn in top_numeric.items():
            weight = factorial(order) / math.prod(factorial(k) for k in m)
            monomial = np.prod(dirs**np.array(m, dtype=float), axis=1)
            total += weight * fn(points) * monomial
        return total

    def tensor_vn_minus_one(points: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        """D^N p(x) v^{N-1} per row, an (m, d) array."""
        out = np.zeros((points.shape[0], d))
        for m, fn in top_numeric.items():
            base = fn(points)
            for j in range(d):
                if m[j] == 0:
                    continue
                reduced = tuple(k - 1 if i == j else k for i, k in enumerate(m))
                weight = factorial(order - 1) / math.prod(
                    factorial(k) for k in m
                ) * m[j]
                monomial = np.prod(dirs**np.array(reduced, dtype=float), axis=1)
                out[:, j] += weight * base * monomial
        return out

    n_dirs = max(16, samples // 40)
    n_radii = 12
    n_kappa = max(1, samples // (n_dirs * n_radii))
    directions = _normal_directions(d, subspace, n_dirs)
    origin = np.zeros((1, d))

    radius, length = float(cylinder_radius), float(cylinder_length)
    for _ in range(max_halvings + 1):
        kappas = subspace_grid(subspace, d, n_kappa, length)
        radii = geometric_radii(radius / 256.0, radius, n_radii)
        pts = []
        dirs_rep = []
        for kappa in kappas:
            for r in radii:
                pts.append(kappa[None, :] + r * directions)
                dirs_rep.append(directions)
        points = np.concatenate(pts)
        dirs_all = np.concatenate(dirs_rep)
        at_zero_vn = tensor_vn(np.repeat(origin, len(points), axis=0), dirs_all)
        moved_vn = tensor_vn(points, dirs_all)
        cond1 = np.all(np.abs(moved_vn - at_zero_vn) <= np.abs(at_zero_vn) + 1e-12)
        at_zero_vm = tensor_vn_minus_one(np.repeat(origin, len(points), axis=0), dirs_all)
        moved_vm = tensor_vn_minus_one(points, dirs_all)
        cond2 = np.all(
            np.linalg.norm(moved_vm - at_zero_vm, axis=1)
            <= 0.5 * np.linalg.norm(at_zero_vm, axis=1) + 1e-12
        )
        if cond1 and cond2:
            break
        radius *= 0.5
        length *= 0.5
    else:
        raise MorseBottError(
            "cylinder radius underflow while enforcing Taylor-remainder bounds"
        )

    check_points = points
    if extra_points is not None:
        check_points = np.concatenate([points, np.atleast_2d(extra_points)])
    energies = np.abs(p.numeric()(check_points) - float(p.constant_term()))
    grads = np.linalg.norm(p.gradient_numeric()(check_points), axis=1)
    keep = energies > ZERO_SKIP
    theta = 1.0 - 1.0 / order
    measured = float((grads[keep] / energies[keep] ** theta).min()) if np.any(keep) else math.inf
    return InequalityCheckReport(
        inequality_id="gradient",
        exponent=Fraction(order - 1, order),
        measured_constant=measured,
        predicted_constant=constant,
        sample_count=int(keep.sum()),
        ball_radii=(radius, length),
    )
