"""Lattice representation, duality, certified box enumeration, generators.

Convention used everywhere (including the JSON file format): the basis matrix
is stored with its *columns* as the lattice generators; ``basis[i][j]`` is the
i-th coordinate of the j-th generator.
"""

import json
import math
import os

import numpy as np

from .errors import BadParams, BudgetExceeded, SingularBasis

DET_THRESHOLD = 1e-12
DEFAULT_BUDGET = 10 ** 8
_CHUNK = 1 << 18


def default_budget():
    """Candidate budget for certified enumeration (env override LATFLOW_BUDGET)."""
    raw = os.environ.get("LATFLOW_BUDGET")
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError as exc:
        raise BadParams(f"LATFLOW_BUDGET must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise BadParams("LATFLOW_BUDGET must be positive")
    return value


class LatticePoint:
    """A lattice point: exact integer coefficients plus ambient coordinates."""

    __slots__ = ("coeffs", "coords")

    def __init__(self, coeffs, coords):
        self.coeffs = np.asarray(coeffs, dtype=np.int64)
        self.coords = np.asarray(coords, dtype=float)

    @property
    def coeff_tuple(self):
        return tuple(int(c) for c in self.coeffs)

    def __neg__(self):
        return LatticePoint(-self.coeffs, -self.coords)

    def __repr__(self):
        return f"LatticePoint(coeffs={self.coeff_tuple})"


class Lattice:
    """Full-rank unimodular lattice in R^d.

    The input basis is rescaled to |det| = 1 at construction (the scaling is
    skipped when |det| is already 1 within 1e-12 so that round-trips through
    the file format are bit-exact).
    """

    def __init__(self, basis, label=""):
        b = np.array(basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise SingularBasis("basis must be a square matrix")
        d = b.shape[0]
        if d < 2:
            raise BadParams("dimension must be at least 2")
        det = np.linalg.det(b)
        if abs(det) <= DET_THRESHOLD:
            raise SingularBasis(f"|det| = {abs(det):.3e} below threshold")
        if abs(abs(det) - 1.0) > 1e-12:
            b = b * abs(det) ** (-1.0 / d)
            det = np.linalg.det(b)
        b.setflags(write=False)
        self.dim = d
        self.basis = b
        self.det = float(det)
        self.label = label
        self._dual = None
        self._inv = None

    @property
    def basis_inverse(self):
        if self._inv is None:
            inv = np.linalg.inv(self.basis)
            inv.setflags(write=False)
            self._inv = inv
        return self._inv

    def point(self, coeffs):
        c = np.asarray(coeffs, dtype=np.int64)
        return LatticePoint(c, self.basis @ c.astype(float))

    def dual(self):
        """Dual lattice: basis is the inverse transpose, so (B*)^T B = I."""
        if self._dual is None:
            label = self.label[:-1] if self.label.endswith("*") else self.label + "*"
            self._dual = Lattice(self.basis_inverse.T, label=label)
        return self._dual

    def __repr__(self):
        return f"Lattice(dim={self.dim}, label={self.label!r})"


def normalize_unimodular(basis, label=""):
    """Scale a basis by |det|^(-1/d) so the lattice has covolume 1."""
    return Lattice(basis, label=label)


def dual_lattice(lattice):
    return lattice.dual()


def product_form(x):
    """Geometric mean of |x_i|; exactly 0 whenever some coordinate is 0."""
    v = np.abs(np.asarray(x, dtype=float))
    if np.any(v == 0.0):
        return 0.0
    return float(np.exp(np.mean(np.log(v))))


def sup_norm(x):
    return float(np.max(np.abs(np.asarray(x, dtype=float))))


def box_candidate_count(lattice, halfwidths):
    """Number of coefficient candidates certified to cover the box."""
    _, _, bounds = _box_frame(lattice, np.asarray(halfwidths, dtype=float))
    total = 1
    for b in bounds:
        total *= 2 * int(b) + 1
    return total


def _box_frame(lattice, h):
    """Enumeration frame for the box {|v_i| <= h_i}: a verified basis of the
    lattice (original columns times an exactly-unimodular transform, LLL
    reduced in the box metric when possible) plus certified per-coefficient
    bounds |c_j| <= sum_i |(A^-1)_{ji}| h_i."""
    from .reduction import int_det, lll_reduce

    if np.all(h > 0):
        scaled = lattice.basis / h[:, None]
        scaled_red, t = lll_reduce(scaled)
        if abs(int_det(t)) != 1:
            raise RuntimeError("reduction transform is not unimodular")
        basis = scaled_red * h[:, None]
        transform = np.array(t, dtype=np.int64)
    else:
        basis = lattice.basis
        transform = np.eye(lattice.dim, dtype=np.int64)
    bound = np.abs(np.linalg.inv(basis)) @ h
    bounds = np.floor(bound * (1 + 1e-9) + 1e-9).astype(np.int64)
    return basis, transform, bounds


def iter_points_in_box(lattice, halfwidths, strict=False, budget=None):
    """Stream (coeffs, coords) chunks of the nonzero lattice points v with
    |v_i| <= h_i for all i (with `strict`, |v_i| < h_i(1 - 1e-12)).

    Completeness is certified by the coefficient-box bound from the rows of
    the inverse basis; raises BudgetExceeded rather than truncating.
    """
    if budget is None:
        budget = default_budget()
    h = np.asarray(halfwidths, dtype=float)
    if np.any(h < 0):
        raise BadParams("halfwidths must be nonnegative")
    d = lattice.dim
    if np.any(h == 0.0) and strict:
        return
    basis, transform, bounds = _box_frame(lattice, h)
    total = 1
    for b in bounds:
        total *= 2 * int(b) + 1
    if total > budget:
        raise BudgetExceeded(
            f"coefficient box has {total} candidates, budget {budget}",
            required=total, budget=budget)

    sizes = (2 * bounds + 1).astype(np.int64)
    basis_t = basis.T.copy()
    if strict:
        cut = h * (1 - 1e-12)
    else:
        cut = h * (1 + 1e-12)
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        idx = np.arange(start, stop, dtype=np.int64)
        coeffs = np.empty((stop - start, d), dtype=np.int64)
        rem = idx
        for j in range(d - 1, -1, -1):
            rem, r = np.divmod(rem, sizes[j])
            coeffs[:, j] = r - bounds[j]
        coords = coeffs.astype(float) @ basis_t
        if strict:
            mask = np.all(np.abs(coords) < cut, axis=1)
        else:
            mask = np.all(np.abs(coords) <= cut, axis=1)
        mask &= np.any(coeffs != 0, axis=1)
        if np.any(mask):
            yield coeffs[mask] @ transform.T, coords[mask]


def points_in_box(lattice, halfwidths, strict=False, budget=None):
    """Materialized variant of iter_points_in_box: (coeffs, coords) arrays."""
    keep_coeffs, keep_coords = [], []
    for coeffs, coords in iter_points_in_box(lattice, halfwidths, strict, budget):
        keep_coeffs.append(coeffs)
        keep_coords.append(coords)
    if not keep_coeffs:
        d = lattice.dim
        return (np.zeros((0, d), dtype=np.int64), np.zeros((0, d)))
    return (np.concatenate(keep_coeffs), np.concatenate(keep_coords))


def feasible_sup_radius(lattice, budget=None, hi=1 << 20):
    """Largest sup-norm radius whose certified box stays within budget."""
    if budget is None:
        budget = default_budget()
    lo_r, hi_r = 1.0, float(hi)
    if box_candidate_count(lattice, np.full(lattice.dim, lo_r)) > budget:
        raise BudgetExceeded("even radius 1 exceeds the budget", budget=budget)
    for _ in range(60):
        mid = math.sqrt(lo_r * hi_r)
        if box_candidate_count(lattice, np.full(lattice.dim, mid)) <= budget:
            lo_r = mid
        else:
            hi_r = mid
        if hi_r / lo_r < 1.01:
            break
    return lo_r


def enumerate_point_arrays(lattice, tau_components, radius, budget=None):
    """Array version of enumerate_points: (coeffs, coords, gauges), sorted."""
    if radius <= 0:
        raise BadParams("radius must be positive")
    t = np.asarray(tau_components, dtype=float)
    halfwidths = radius * np.exp(t)
    coeffs, coords = points_in_box(lattice, halfwidths, strict=False, budget=budget)
    if len(coeffs) == 0:
        return coeffs, coords, np.zeros(0)
    gauges = np.max(np.abs(coords) * np.exp(-t), axis=1)
    keep = gauges <= radius * (1 + 1e-12)
    coeffs, coords, gauges = coeffs[keep], coords[keep], gauges[keep]
    order = np.lexsort(tuple(coeffs[:, j] for j in range(lattice.dim - 1, -1, -1)) + (gauges,))
    return coeffs[order], coords[order], gauges[order]


def enumerate_points(lattice, tau, radius, budget=None):
    """All nonzero lattice points with max_i |v_i| e^{-tau_i} <= radius,
    sorted by that gauge value (ties broken by coefficient order)."""
    components = getattr(tau, "components", tau)
    coeffs, coords, _ = enumerate_point_arrays(lattice, components, radius, budget=budget)
    return [LatticePoint(c, x) for c, x in zip(coeffs, coords)]


_CUBIC_ROOTS = 2.0 * np.cos(np.array([np.pi / 9, 7 * np.pi / 9, 13 * np.pi / 9]))


def make_test_lattice(kind, dim=None, seed=None, params=None):
    """Deterministic test-lattice generators.

    Kinds: "integer", "totally-real-cubic", "unipotent", "random-unimodular",
    "axis-sublattice".  All outputs are unimodular; fixed seeds give fixed
    lattices.
    """
    params = dict(params or {})
    if kind == "integer":
        d = dim or 3
        return Lattice(np.eye(d), label=f"integer-d{d}")
    if kind == "totally-real-cubic":
        if dim not in (None, 3):
            raise BadParams("totally-real-cubic is three-dimensional")
        # rows: the three real embeddings of the power basis 1, a, a^2,
        # a a root of x^3 - 3x - 1 (fundamental unit, discriminant 81)
        v = np.vander(_CUBIC_ROOTS, 3, increasing=True)
        return Lattice(v, label="totally-real-cubic")
    if kind == "unipotent":
        d = dim or 3
        thetas = params.pop("thetas", None)
        if thetas is None:
            thetas = [2.0 ** (j / 3.0) for j in range(1, d)]
        if len(thetas) != d - 1:
            raise BadParams(f"unipotent needs {d - 1} thetas")
        b = np.eye(d)
        b[0, 1:] = thetas
        return Lattice(b, label=f"unipotent-d{d}")
    if kind == "random-unimodular":
        d = dim or 3
        rng = np.random.default_rng(0 if seed is None else seed)
        while True:
            b = rng.normal(size=(d, d))
            if abs(np.linalg.det(b)) > 1e-6:
                break
        return Lattice(b, label=f"random-unimodular-d{d}-s{seed}")
    if kind == "axis-sublattice":
        d = dim or 3
        rng = np.random.default_rng(0 if seed is None else seed)
        sub_diag = params.pop("sub_diag", None)
        if sub_diag is None:
            sub_diag = rng.integers(1, 4, size=d)
        weights = params.pop("weights", None)
        if weights is None:
            weights = np.exp(rng.normal(scale=0.5, size=d))
        s = np.diag(np.asarray(sub_diag, dtype=float))
        for i in range(d):
            for j in range(i + 1, d):
                s[i, j] = float(rng.integers(0, int(sub_diag[j])))
        b = np.diag(np.asarray(weights, dtype=float)) @ s
        return Lattice(b, label=f"axis-sublattice-d{d}-s{seed}")
    raise BadParams(f"unknown lattice kind {kind!r}")


def bundled_test_lattices():
    """The fixed family used by the acceptance and consistency runs."""
    return [
        make_test_lattice("integer", dim=3),
        make_test_lattice("totally-real-cubic"),
        make_test_lattice("unipotent", dim=3),
        make_test_lattice("random-unimodular", dim=3, seed=1),
        make_test_lattice("random-unimodular", dim=3, seed=2),
    ]


def lattice_to_json(lattice):
    """Serialize as {"dim", "basis" (row-major), "label"} with 17 significant
    digits, which round-trips doubles exactly."""
    rows = []
    for i in range(lattice.dim):
        rows.append("[" + ", ".join(f"{x:.17g}" for x in lattice.basis[i]) + "]")
    basis = "[" + ", ".join(rows) + "]"
    return '{"dim": %d, "basis": %s, "label": %s}' % (
        lattice.dim, basis, json.dumps(lattice.label))


def lattice_from_json(text):
    doc = json.loads(text)
    if set(doc) != {"dim", "basis", "label"}:
        raise BadParams(f"lattice file must have keys dim/basis/label, got {sorted(doc)}")
    b = np.array(doc["basis"], dtype=float)
    if b.shape != (doc["dim"], doc["dim"]):
        raise BadParams("basis shape does not match dim")
    return Lattice(b, label=doc["label"])


def write_lattice(lattice, path):
    with open(path, "w") as fh:
        fh.write(lattice_to_json(lattice) + "\n")


def read_lattice(path):
    with open(path) as fh:
        return lattice_from_json(fh.read())
