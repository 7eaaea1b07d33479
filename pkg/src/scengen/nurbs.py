"""Rational B-spline curves on clamped knot vectors.

A trajectory is encoded as a weighted spline in a road-aligned plane:
control points carry (longitudinal, lateral) coordinates, weights pull
the curve toward or away from individual points, and the clamped knot
vector makes the curve interpolate its first and last control point.
Basis functions follow the Cox-de Boor recursion with 0/0 terms defined
as zero; the right end of the domain is closed so evaluation at the
last parameter value returns the last control point instead of nothing.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

WEIGHT_FLOOR = 1e-3


def build_knot_vector(n_control, degree):
    """Clamped, uniformly spaced knot vector.

    The first and last knot values repeat degree+1 times and the
    interior knots are evenly spaced on (0, 1), giving n_control +
    degree + 1 knots in total.

    Args:
        n_control: number of control points, at least degree + 1.
        degree: polynomial degree, at least 1.

    Returns:
        Array of knots in [0, 1].
    """
    if degree < 1:
        raise ConfigurationError(f"degree must be >= 1, got {degree}")
    if n_control < degree + 1:
        raise ConfigurationError(
            f"need at least {degree + 1} control points for degree {degree}, "
            f"got {n_control}"
        )
    n_interior = n_control - degree - 1
    interior = np.linspace(0.0, 1.0, n_interior + 2)[1:-1]
    return np.concatenate(
        [np.zeros(degree + 1), interior, np.ones(degree + 1)]
    )


def _find_span(u, degree, knots):
    n_basis = len(knots) - degree - 1
    if u >= knots[n_basis]:
        return n_basis - 1
    if u <= knots[degree]:
        return degree
    return int(np.searchsorted(knots, u, side="right") - 1)


def basis_functions(u, degree, knots):
    """All basis function values N_{i,degree}(u) at a single parameter.

    Args:
        u: parameter value inside the knot domain.
        degree: polynomial degree.
        knots: non-decreasing knot vector.

    Returns:
        Array of length len(knots) - degree - 1; at most degree + 1
        entries are non-zero and the values sum to one.
    """
    knots = np.asarray(knots, dtype=float)
    n_basis = len(knots) - degree - 1
    lo, hi = knots[degree], knots[n_basis]
    if not lo <= u <= hi:
        raise DomainError(f"parameter {u} outside knot domain [{lo}, {hi}]")
    span = _find_span(u, degree, knots)
    # triangular scheme over the degree+1 funcs alive on this span
    vals = np.zeros(degree + 1)
    vals[0] = 1.0
    left = np.zeros(degree + 1)
    right = np.zeros(degree + 1)
    for j in range(1, degree + 1):
        left[j] = u - knots[span + 1 - j]
        right[j] = knots[span + j] - u
        saved = 0.0
        for r in range(j):
            tmp = vals[r] / (right[r + 1] + left[j - r])
            vals[r] = saved + right[r + 1] * tmp
            saved = left[j - r] * tmp
        vals[j] = saved
    out = np.zeros(n_basis)
    out[span - degree : span + 1] = vals
    return out


def basis_matrix(us, degree, knots):
    """Stack of basis rows, one per parameter value.

    Handy for repeated curve sampling: with the knot vector fixed, the
    matrix is constant and sampling reduces to two matrix products.
    """
    return np.array([basis_functions(u, degree, knots) for u in us])


@dataclass(frozen=True)
class NurbsCurve:
    """Immutable rational curve.

    Attributes:
        control_points: (n, 2) array of planar control points.
        weights: (n,) strictly positive weights, floored at 1e-3.
        degree: polynomial degree.
        knots: clamped knot vector with n + degree + 1 entries.
    """

    control_points: np.ndarray
    weights: np.ndarray
    degree: int
    knots: np.ndarray

    def __post_init__(self):
        cps = np.array(self.control_points, dtype=float)
        ws = np.array(self.weights, dtype=float)
        knots = np.array(self.knots, dtype=float)
        if cps.ndim != 2 or cps.shape[1] != 2:
            raise ConfigurationError(
                f"control points must have shape (n, 2), got {cps.shape}"
            )
        n = cps.shape[0]
        if self.degree < 1 or n < self.degree + 1:
            raise ConfigurationError(
                f"degree {self.degree} needs at least {self.degree + 1} "
                f"control points, got {n}"
            )
        if ws.shape != (n,):
            raise ConfigurationError(
                f"expected {n} weights, got shape {ws.shape}"
            )
        if np.any(ws < WEIGHT_FLOOR):
            raise ConfigurationError(
                f"weights must be >= {WEIGHT_FLOOR}, min was {ws.min()}"
            )
        if knots.shape != (n + self.degree + 1,):
            raise ConfigurationError(
                f"expected {n + self.degree + 1} knots, got {knots.shape}"
            )
        if np.any(np.diff(knots) < 0.0):
            raise ConfigurationError("knot vector must be non-decreasing")
        for name, arr in (
            ("control_points", cps),
            ("weights", ws),
            ("knots", knots),
        ):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def domain(self):
        """(lo, hi) parameter interval the curve is defined on."""
        return float(self.knots[self.degree]), float(self.knots[-self.degree - 1])

    @property
    def n_control(self):
        return self.control_points.shape[0]


def uniform_curve(control_points, weights=None, degree=3):
    """Curve on the standard clamped uniform knot vector."""
    control_points = np.asarray(control_points, dtype=float)
    n = control_points.shape[0]
    if weights is None:
        weights = np.ones(n)
    return NurbsCurve(
        control_points=control_points,
        weights=np.asarray(weights, dtype=float),
        degree=degree,
        knots=build_knot_vector(n, degree),
    )


def greville_abscissae(degree, knots):
    """Knot averages; placing control values there reproduces linears."""
    knots = np.asarray(knots, dtype=float)
    n_basis = len(knots) - degree - 1
    return np.array(
        [knots[i + 1 : i + 1 + degree].mean() for i in range(n_basis)]
    )


def evaluate_curve(curve, u):
    """Point on the curve at parameter u.

    The rational sum divides the weighted control-point combination by
    the weighted basis sum, which stays positive because weights are
    floored and the basis is a partition of unity.
    """
    basis = basis_functions(u, curve.degree, curve.knots)
    bw = basis * curve.weights
    return (bw @ curve.control_points) / bw.sum()


def sample_curve(curve, n_samples):
    """n_samples curve points at uniformly spaced parameters.

    Both domain endpoints are included, so the first and last sample
    interpolate the first and last control point.
    """
    if n_samples < 2:
        raise ConfigurationError(f"need at least 2 samples, got {n_samples}")
    lo, hi = curve.domain
    us = np.linspace(lo, hi, n_samples)
    basis = basis_matrix(us, curve.degree, curve.knots)
    bw = basis * curve.weights
    return (bw @ curve.control_points) / bw.sum(axis=1, keepdims=True)
