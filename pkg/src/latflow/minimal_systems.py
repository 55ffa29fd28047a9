"""Minimal systems of lattice points and the three-dimensional degeneracies.

A system of k <= d lattice points is minimal when no nonzero lattice point
lies strictly inside its coordinate envelope box; a Minkowski basis is a
minimal system that is also a lattice basis.  Lattices missing a coordinate
axis admit infinitely many of these, which forces the first upper exponent
to vanish; the d = 3 check below tests the resulting collapse of the
exponent table.
"""

import math

import numpy as np

from .errors import BadParams, MissingEstimates, NotIrrational
from .checks import CheckReport, _Slacks
from .lattices import LatticePoint, enumerate_point_arrays, points_in_box
from .reduction import int_det

STRICT_MARGIN = 1e-12


class VectorSystem:
    """k lattice points with their span rank and coordinate envelope."""

    def __init__(self, points):
        self.points = list(points)
        if not self.points:
            raise BadParams("a system needs at least one point")
        d = len(self.points[0].coords)
        if len(self.points) > d:
            raise BadParams("a system has at most d points")
        coords = np.array([p.coords for p in self.points])
        self.envelope = np.max(np.abs(coords), axis=0)
        sv = np.linalg.svd(coords, compute_uv=False)
        self.rank = int(np.sum(sv > 1e-9 * max(1.0, sv[0])))

    @property
    def size(self):
        return len(self.points)

    def envelope_volume(self):
        return float(np.prod(self.envelope))

    def coefficient_det(self):
        if self.size != len(self.points[0].coords):
            raise BadParams("coefficient determinant needs a full system")
        return int_det([[int(c) for c in p.coeffs] for p in self.points])

    def __repr__(self):
        return f"VectorSystem({[p.coeff_tuple for p in self.points]})"


def is_minimal_system(lattice, system, budget=None):
    """(minimal?, witness): decides by certified enumeration whether some
    nonzero lattice point lies strictly inside the envelope box (strictness
    with a 1e-12 margin).  Systems with a zero envelope coordinate are
    vacuously minimal: the open box is empty."""
    m = np.asarray(system.envelope if isinstance(system, VectorSystem) else system,
                   dtype=float)
    if np.any(m == 0.0):
        return True, None
    coeffs, coords = points_in_box(lattice, m, strict=True, budget=budget)
    if len(coeffs) == 0:
        return True, None
    order = np.lexsort(tuple(coeffs[:, j] for j in range(lattice.dim - 1, -1, -1)))
    i = order[0]
    return False, LatticePoint(coeffs[i], coords[i])


def _sign_normalized_representatives(coeffs, coords):
    keep = []
    for i in range(len(coeffs)):
        row = coeffs[i]
        lead = row[np.nonzero(row)[0][0]]
        if lead > 0:
            keep.append(i)
    return coeffs[keep], coords[keep]


def find_minkowski_bases(lattice, search_radius, budget=None):
    """All Minkowski bases of a 3-dimensional lattice whose vectors have
    sup-norm at most search_radius, normalized (leading coefficient of each
    vector positive, vectors in coefficient order) and sorted by envelope
    volume.

    Certified: any point strictly inside a candidate envelope has sup-norm
    below the search radius, so checking against the enumerated ball decides
    minimality exactly.
    """
    if lattice.dim != 3:
        raise BadParams("Minkowski-basis search is implemented for d = 3")
    coeffs, coords, _ = enumerate_point_arrays(
        lattice, np.zeros(3), float(search_radius), budget=budget)
    if len(coeffs) < 6:
        return []
    reps_c, reps_x = _sign_normalized_representatives(coeffs, coords)
    n = len(reps_c)
    abs_all = np.abs(coords)
    # cheap rejection set: the shortest points catch almost every violation
    short = abs_all[np.argsort(np.max(abs_all, axis=1), kind="stable")[:64]]
    triples = []
    for i in range(n - 2):
        cross = np.cross(reps_c[i], reps_c[i + 1:])
        dets = cross @ reps_c.T  # dets[j - i - 1, k] = det(v_i, v_j, v_k)
        for j in range(i + 1, n - 1):
            hits = np.nonzero(np.abs(dets[j - i - 1, j + 1:]) == 1)[0]
            for k in hits + j + 1:
                triples.append((i, j, int(k)))
    systems = []
    margin = 1.0 - STRICT_MARGIN
    for i, j, k in triples:
        m = np.max(np.abs([reps_x[i], reps_x[j], reps_x[k]]), axis=0)
        if np.any(np.all(short < m * margin, axis=1)):
            continue
        if np.any(np.all(abs_all < m * margin, axis=1)):
            continue
        pts = sorted((LatticePoint(reps_c[t], reps_x[t]) for t in (i, j, k)),
                     key=lambda p: p.coeff_tuple)
        systems.append(VectorSystem(pts))
    systems.sort(key=lambda s: (s.envelope_volume(),
                                tuple(p.coeff_tuple for p in s.points)))
    return systems


class EnvelopeGapReport:
    def __init__(self, volumes, labels):
        self.volumes = list(volumes)
        self.labels = list(labels)
        self.min_volume = min(self.volumes) if self.volumes else math.inf
        self.stays_positive = bool(self.volumes) and self.min_volume > 1e-9

    def __repr__(self):
        return (f"EnvelopeGapReport(min={self.min_volume:.6g}, "
                f"count={len(self.volumes)}, positive={self.stays_positive})")


def envelope_volume_gap(lattice, systems):
    """Coefficient-determinant-normalized envelope volumes of rank-d minimal
    systems, and whether the smallest stays away from zero."""
    volumes, labels = [], []
    for s in systems:
        if s.rank != lattice.dim or s.size != lattice.dim:
            raise BadParams("envelope gap needs rank-d systems of d points")
        det = abs(s.coefficient_det())
        if det == 0:
            raise BadParams("degenerate system: zero coefficient determinant")
        volumes.append(s.envelope_volume() / (det * abs(lattice.det)))
        labels.append(str([p.coeff_tuple for p in s.points]))
    return EnvelopeGapReport(volumes, labels)


def find_axis_point(lattice, axis_radius=1000.0, width=1e-6, budget=None):
    """A nonzero lattice point on some coordinate axis with |v| up to
    axis_radius, or None (a budgeted claim, not a proof of absence)."""
    d = lattice.dim
    for axis in range(d):
        h = np.full(d, width)
        h[axis] = float(axis_radius)
        coeffs, coords = points_in_box(lattice, h, budget=budget)
        for i in range(len(coeffs)):
            off = [abs(coords[i][j]) for j in range(d) if j != axis]
            if max(off) <= 1e-9 and abs(coords[i][axis]) > 1e-9:
                return LatticePoint(coeffs[i], coords[i])
    return None


def d3_degeneracy_check(lattice, est, est_dual_conj, tol=None,
                        axis_radius=1000.0, budget=None):
    """For a 3-dimensional lattice with no axis points: the six exponents
    that degenerate to zero, the two identities binding the rest, the
    window -1 <= psi_lower_1 <= psi_lower_2 <= 0 <= psi_upper_2 <=
    psi_upper_3 <= 2 for the sup-plus gauge, and the four duality swaps.

    Raises NotIrrational when an axis point is found within the search
    budget (such lattices share the exponents of the integer lattice).
    """
    if lattice.dim != 3 or est.dim != 3 or est_dual_conj.dim != 3:
        raise BadParams("degeneracy check is three-dimensional")
    if est.f.kind != "sup-plus":
        raise BadParams("window constants are implemented for the sup-plus gauge")
    if est_dual_conj.f.name != est.f.conjugate().name:
        raise MissingEstimates(
            f"dual set uses {est_dual_conj.f.name}, expected {est.f.conjugate().name}")
    axis_point = find_axis_point(lattice, axis_radius, budget=budget)
    if axis_point is not None:
        raise NotIrrational(
            f"axis point {axis_point.coeff_tuple} found; exponents equal those "
            "of the integer lattice and the degeneracy relations do not apply",
            axis_point=axis_point)
    if tol is None:
        tol = est.suggested_tolerance() + est_dual_conj.suggested_tolerance()
    c1, c2 = -1.0, 2.0
    v = est.value
    w = est_dual_conj.value
    slacks = _Slacks()
    for name, val in [("psi_upper_1", v("psi_upper", 1)),
                      ("psi_lower_3", v("psi_lower", 3)),
                      ("Psi_upper_1", v("Psi_upper", 1)),
                      ("Psi_upper_2", v("Psi_upper", 2)),
                      ("Psi_upper_3", v("Psi_upper", 3)),
                      ("Psi_lower_3", v("Psi_lower", 3))]:
        slacks.update_min(f"zero_{name}", tol - abs(val))
    slacks.update_min("psi1_equals_Psi1",
                      tol - abs(v("psi_lower", 1) - v("Psi_lower", 1)))
    slacks.update_min("psi3_equals_minus_Psi2",
                      tol - abs(v("psi_upper", 3) + v("Psi_lower", 2)))
    slacks.update_min("window_lower", v("psi_lower", 1) - c1 + tol)
    slacks.update_min("window_order_lower", v("psi_lower", 2) - v("psi_lower", 1) + tol)
    slacks.update_min("window_lower_nonpositive", tol - v("psi_lower", 2))
    slacks.update_min("window_upper_nonnegative", v("psi_upper", 2) + tol)
    slacks.update_min("window_order_upper", v("psi_upper", 3) - v("psi_upper", 2) + tol)
    slacks.update_min("window_upper", c2 - v("psi_upper", 3) + tol)
    slacks.update_min("dual_swap_psi1",
                      tol - abs(v("psi_lower", 1) + w("psi_upper", 3)))
    slacks.update_min("dual_swap_psi3",
                      tol - abs(v("psi_upper", 3) + w("psi_lower", 1)))
    slacks.update_min("dual_swap_psi2_lower",
                      tol - abs(v("psi_lower", 2) + w("psi_upper", 2)))
    slacks.update_min("dual_swap_psi2_upper",
                      tol - abs(v("psi_upper", 2) + w("psi_lower", 2)))
    return CheckReport("d3-degeneracy", [est.lattice_label, est_dual_conj.lattice_label],
                       len(est.estimates), slacks,
                       {"tol": tol, "window_c1": c1, "window_c2": c2,
                        "axis_radius": axis_radius})


def systems_csv_header(d):
    cols = [f"vector_{j + 1}" for j in range(d)]
    cols += [f"envelope_{i + 1}" for i in range(d)]
    cols += ["envelope_volume", "minimal", "rank"]
    return ",".join(cols)


def systems_csv_row(system, minimal=True):
    vals = [";".join(str(c) for c in p.coeff_tuple) for p in system.points]
    vals += [f"{x:.17g}" for x in system.envelope]
    vals += [f"{system.envelope_volume():.17g}", "1" if minimal else "0",
             str(system.rank)]
    return ",".join(vals)
