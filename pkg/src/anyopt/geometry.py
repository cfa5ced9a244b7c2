"""Finite-dimensional primal/dual vector primitives, feasible sets, and mirror maps.

Vectors and dual vectors (gradients) are plain float64 numpy arrays of equal
dimension.  Two geometries are shipped: the self-dual Euclidean setup (l2/l2)
and the entropy setup on the probability simplex (l1 primal, linf dual).
"""

from __future__ import annotations

import numpy as np

# Floor applied to simplex iterates before they are fed back into the entropy
# map; keeps log() finite while staying far below every test tolerance.
SIMPLEX_FLOOR = 1e-12

_PRIMAL_KINDS = ("l2", "l1")
_DUAL_KINDS = ("l2", "linf")


class GeometryError(ValueError):
    """Dimension mismatch, non-finite input, or domain violation."""


def as_vector(x, dim=None):
    """Validate and return a finite 1-d float64 array."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise GeometryError(f"expected a 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise GeometryError("vector has non-finite entries")
    if dim is not None and v.size != dim:
        raise GeometryError(f"dimension mismatch: expected {dim}, got {v.size}")
    return v


def pairing(g, h):
    """Dual pairing <g, h> = sum_i g_i h_i (dimension-checked)."""
    g = as_vector(g)
    h = as_vector(h, dim=g.size)
    return float(g @ h)


def primal_norm(h, kind="l2"):
    h = as_vector(h)
    if kind == "l2":
        return float(np.linalg.norm(h))
    if kind == "l1":
        return float(np.abs(h).sum())
    raise GeometryError(f"unknown primal norm kind {kind!r}; use one of {_PRIMAL_KINDS}")


def dual_norm(g, kind="l2"):
    """Norm on the dual side: 'l2' is self-dual, 'linf' is the dual of l1."""
    g = as_vector(g)
    if kind == "l2":
        return float(np.linalg.norm(g))
    if kind == "linf":
        return float(np.abs(g).max())
    raise GeometryError(f"unknown dual norm kind {kind!r}; use one of {_DUAL_KINDS}")


def clamp_simplex(h, floor=SIMPLEX_FLOOR):
    """Push simplex coordinates up to `floor` and renormalize to unit sum."""
    h = np.maximum(h, floor)
    return h / h.sum()


class EuclideanMap:
    """Phi(u) = ||u||^2 / 2; 1-strongly convex w.r.t. l2."""

    strong_convexity = 1.0
    primal_norm_kind = "l2"
    dual_norm_kind = "l2"
    name = "euclidean"

    def value(self, u):
        u = as_vector(u)
        return float(0.5 * (u @ u))

    def grad(self, u):
        return u

    def grad_inverse(self, y):
        return y

    def bregman(self, u, v):
        u = as_vector(u)
        v = as_vector(v, dim=u.size)
        diff = u - v
        return float(0.5 * (diff @ diff))


class NegativeEntropyMap:
    """Phi(u) = sum_i u_i log u_i on the positive orthant.

    1-strongly convex w.r.t. l1 when restricted to the simplex; the induced
    divergence is the generalized KL divergence.
    """

    strong_convexity = 1.0
    primal_norm_kind = "l1"
    dual_norm_kind = "linf"
    name = "negative-entropy"

    def value(self, u):
        u = as_vector(u)
        if np.any(u < 0):
            raise GeometryError("entropy map requires nonnegative coordinates")
        return float(np.sum(np.where(u > 0, u * np.log(np.where(u > 0, u, 1.0)), 0.0)))

    def grad(self, u):
        u = as_vector(u)
        if np.any(u <= 0):
            raise GeometryError("entropy gradient requires strictly positive coordinates")
        return 1.0 + np.log(u)

    def grad_inverse(self, y):
        y = as_vector(y)
        return np.exp(y - 1.0)

    def bregman(self, u, v):
        u = as_vector(u)
        v = as_vector(v, dim=u.size)
        if np.any(u < 0):
            raise GeometryError("first argument outside the entropy domain")
        if np.any(v <= 0):
            raise GeometryError("second argument on the entropy-domain boundary")
        terms = np.where(u > 0, u * (np.log(np.where(u > 0, u, 1.0)) - np.log(v)), 0.0)
        return float(terms.sum() - u.sum() + v.sum())


def bregman(mirror_map, u, v):
    """B_Phi(u; v) = Phi(u) - Phi(v) - <grad Phi(v), u - v> >= 0."""
    return mirror_map.bregman(u, v)


def _project_simplex_l2(v):
    # Euclidean projection onto the unit simplex (sort-and-threshold).
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u * idx > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


class L2Ball:
    """Euclidean ball {h : ||h - center|| <= radius}; l2 diameter 2*radius."""

    def __init__(self, center, radius):
        self.center = as_vector(center)
        if not radius > 0:
            raise GeometryError("radius must be positive")
        self.radius = float(radius)

    @property
    def dim(self):
        return self.center.size

    @property
    def diameter(self):
        return 2.0 * self.radius

    def contains(self, h, tol=1e-12):
        h = as_vector(h, dim=self.dim)
        return np.linalg.norm(h - self.center) <= self.radius + tol

    def project(self, h):
        h = as_vector(h, dim=self.dim)
        off = h - self.center
        norm = np.linalg.norm(off)
        if norm <= self.radius:
            return h
        return self.center + off * (self.radius / norm)

    def bregman_project(self, h, mirror_map):
        if mirror_map.name != "euclidean":
            raise GeometryError("L2Ball only supports the Euclidean mirror map")
        return self.project(h)

    def support_gap(self, g):
        """sup_{h, h' in set} <g, h - h'> = diameter * ||g||_2."""
        return self.diameter * float(np.linalg.norm(as_vector(g, dim=self.dim)))

    def __repr__(self):
        return f"L2Ball(dim={self.dim}, radius={self.radius})"


class Simplex:
    """Unit probability simplex in R^d; l2 diameter sqrt(2)."""

    def __init__(self, dim):
        if dim < 2:
            raise GeometryError("simplex needs dimension >= 2")
        self._dim = int(dim)

    @property
    def dim(self):
        return self._dim

    @property
    def diameter(self):
        return float(np.sqrt(2.0))

    def contains(self, h, tol=1e-12):
        h = as_vector(h, dim=self.dim)
        return bool(np.all(h >= -tol) and abs(h.sum() - 1.0) <= tol)

    def project(self, h):
        h = as_vector(h, dim=self.dim)
        if self.contains(h, tol=0.0):
            return h
        return _project_simplex_l2(h)

    def bregman_project(self, h, mirror_map):
        h = as_vector(h, dim=self.dim)
        if mirror_map.name == "euclidean":
            return self.project(h)
        if np.any(h <= 0):
            raise GeometryError("entropy projection requires positive input")
        return h / h.sum()

    def support_gap(self, g):
        """sup over pairs of simplex points: max_i g_i - min_i g_i."""
        g = as_vector(g, dim=self.dim)
        return float(g.max() - g.min())

    def __repr__(self):
        return f"Simplex(dim={self.dim})"


def project(feasible_set, h):
    """Euclidean projection onto the set (module-level convenience)."""
    return feasible_set.project(h)
