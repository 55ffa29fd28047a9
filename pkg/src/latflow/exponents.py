"""Gauge functionals on the trace-zero hyperplane and exponent estimators.

The limiting exponents (liminf/limsup of L_k / f and of their partial sums as
the deformation grows) are not computable; the estimators here truncate them
to inf/sup over an "asymptotic shell" of sampled deformations and report the
per-radius trace so convergence is auditable.
"""

import math

import numpy as np

from .errors import BadParams, InsufficientSamples, OutOfDomain, ZeroGauge
from .lattices import iter_points_in_box
from .minima import TauVector, as_tau, successive_minima, tau_of_vector

KINDS = ("psi_lower", "psi_upper", "Psi_lower", "Psi_upper")


class GaugeFunction:
    """Non-negative functional on the trace-zero hyperplane whose sublevel
    sets exhaust it.  Kinds: sup-plus (max tau_k), sup-minus (-min tau_k),
    sup (sup-norm), weighted (max_k w_k tau_k, positive weights)."""

    def __init__(self, kind, weights=None, flipped=False):
        if kind not in ("sup-plus", "sup-minus", "sup", "weighted"):
            raise BadParams(f"unknown gauge kind {kind!r}")
        if kind == "weighted":
            w = np.asarray(weights, dtype=float)
            if np.any(w <= 0):
                raise BadParams("weights must be positive")
            self.weights = w
        elif weights is not None:
            raise BadParams(f"gauge kind {kind!r} takes no weights")
        else:
            self.weights = None
        self.kind = kind
        self.flipped = flipped

    def value(self, tau):
        t = as_tau(tau).components
        if self.flipped:
            t = -t
        if self.kind == "sup-plus":
            return float(np.max(t))
        if self.kind == "sup-minus":
            return float(-np.min(t))
        if self.kind == "sup":
            return float(np.max(np.abs(t)))
        return float(np.max(self.weights * t))

    __call__ = value

    def conjugate(self):
        """The functional tau -> f(-tau)."""
        if self.kind == "sup-plus":
            return GaugeFunction("sup-minus")
        if self.kind == "sup-minus":
            return GaugeFunction("sup-plus")
        if self.kind == "sup":
            return GaugeFunction("sup")
        return GaugeFunction("weighted", self.weights, flipped=not self.flipped)

    @property
    def name(self):
        if self.kind == "weighted":
            base = "weighted:" + ",".join(f"{w:g}" for w in self.weights)
            return base + ("*" if self.flipped else "")
        return self.kind

    @classmethod
    def from_name(cls, name):
        if name in ("sup-plus", "sup-minus", "sup"):
            return cls(name)
        if name.startswith("weighted:"):
            body = name[len("weighted:"):]
            flipped = body.endswith("*")
            if flipped:
                body = body[:-1]
            return cls("weighted", [float(x) for x in body.split(",")], flipped)
        raise BadParams(f"unknown gauge name {name!r}")

    def __repr__(self):
        return f"GaugeFunction({self.name!r})"


def sup_plus_gauge():
    return GaugeFunction("sup-plus")


def make_directions(d, extra=8):
    """Deterministic scan directions: all axis-pair directions e_i - e_j plus
    a Kronecker low-discrepancy set (and its negatives), all normalized to
    sup-norm 1 on the hyperplane."""
    dirs = []
    for i in range(d):
        for j in range(d):
            if i != j:
                u = np.zeros(d)
                u[i], u[j] = 1.0, -1.0
                dirs.append(u)
    # additive recurrence from the root of x^(d+1) = x + 1
    phi = 1.5
    for _ in range(60):
        phi = (1 + phi) ** (1.0 / (d + 1))
    alpha = np.array([phi ** -(j + 1) for j in range(d)])
    n = 0
    produced = 0
    while produced < extra:
        n += 1
        x = (0.5 + n * alpha) % 1.0
        y = x - np.mean(x)
        s = np.max(np.abs(y))
        if s < 1e-9:
            continue
        y = y / s
        dirs.append(y)
        dirs.append(-y)
        produced += 1
    return [TauVector.project(u).components for u in dirs]


class ScanConfig:
    """Geometric radius schedule and direction set for ray scans."""

    def __init__(self, directions, r0, ratio, count, shell_fraction=0.5):
        if r0 <= 0 or ratio <= 1 or count < 2:
            raise BadParams("need r0 > 0, ratio > 1, count >= 2")
        if not 0 < shell_fraction <= 1:
            raise BadParams("shell_fraction must be in (0, 1]")
        self.directions = []
        for u in directions:
            v = np.asarray(u, dtype=float)
            if abs(float(np.sum(v))) > 1e-12:
                raise BadParams("directions must sum to zero")
            s = np.max(np.abs(v))
            if s <= 0:
                raise BadParams("zero direction")
            self.directions.append(v / s)
        if not self.directions:
            raise BadParams("need at least one direction")
        self.r0 = float(r0)
        self.ratio = float(ratio)
        self.count = int(count)
        self.shell_fraction = float(shell_fraction)

    @property
    def radii(self):
        return [self.r0 * self.ratio ** j for j in range(self.count)]

    @property
    def shell_start(self):
        shell = max(1, int(round(self.count * self.shell_fraction)))
        return self.count - shell

    @classmethod
    def default(cls, d, r_max=12.0, count=8, extra_directions=8, shell_fraction=0.5):
        ratio = 1.45
        r0 = r_max / ratio ** (count - 1)
        return cls(make_directions(d, extra_directions), r0, ratio, count, shell_fraction)


class ExponentEstimate:
    """Truncated liminf/limsup with its convergence trace.

    The trace holds one (radius, value) entry per radius of the schedule;
    entries from index `shell_start` on are the asymptotic shell that the
    reported value was taken over.
    """

    __slots__ = ("kind", "k", "f_name", "lattice_label", "value", "trace",
                 "witness_tau", "method", "shell_start")

    def __init__(self, kind, k, f_name, lattice_label, value, trace,
                 witness_tau, method, shell_start=0):
        if kind not in KINDS:
            raise BadParams(f"unknown estimate kind {kind!r}")
        self.kind = kind
        self.k = k
        self.f_name = f_name
        self.lattice_label = lattice_label
        self.value = value
        self.trace = list(trace)
        self.witness_tau = witness_tau
        self.method = method
        self.shell_start = shell_start

    @property
    def shell_trace(self):
        return self.trace[self.shell_start:]

    @property
    def oscillation(self):
        """Per-shell oscillation: spread of the shell trace around the value."""
        shell = [v for _, v in self.shell_trace if not math.isinf(v)]
        if not shell or math.isinf(self.value):
            return 0.0
        return max(abs(v - self.value) for v in shell)

    def to_json_dict(self):
        if math.isinf(self.value):
            value = "inf" if self.value > 0 else "-inf"
        else:
            value = self.value
        return {
            "lattice": self.lattice_label,
            "f": self.f_name,
            "k": self.k,
            "kind": self.kind,
            "value": value,
            "trace": [[r, v] for r, v in self.trace],
            "witness_tau": None if self.witness_tau is None else list(self.witness_tau),
        }

    def __repr__(self):
        return (f"ExponentEstimate({self.kind}, k={self.k}, "
                f"value={self.value:.6g}, {self.lattice_label})")


class EstimateSet:
    """All four exponent kinds for k = 1..d from one scan."""

    def __init__(self, lattice_label, dim, f, estimates, shell_min_f, method):
        self.lattice_label = lattice_label
        self.dim = dim
        self.f = f
        self.estimates = dict(estimates)
        self.shell_min_f = shell_min_f
        self.method = method

    def get(self, kind, k):
        try:
            return self.estimates[(kind, k)]
        except KeyError:
            from .errors import MissingEstimates
            raise MissingEstimates(f"no estimate {kind} k={k} for {self.lattice_label}")

    def value(self, kind, k):
        return self.get(kind, k).value

    def suggested_tolerance(self):
        """Tolerance at which the limiting relations are expected to hold for
        these truncated estimates: the worst trace oscillation plus the
        Minkowski slack log(d!)/f at the inner shell radius."""
        osc = max(e.oscillation for e in self.estimates.values())
        return osc + math.log(math.factorial(self.dim)) / self.shell_min_f

    def all_estimates(self):
        return [self.estimates[key] for key in sorted(self.estimates)]


def psi_values(lattice, tau, f, node_budget=None):
    """(psi_1..psi_d, Psi_1..Psi_d) at one deformation: L_k/f and S_k/f."""
    t = as_tau(tau, lattice.dim)
    ft = f.value(t)
    if ft <= 0:
        raise ZeroGauge("f(tau) must be positive (tau != 0)")
    profile = successive_minima(lattice, t, node_budget=node_budget)
    return profile.L / ft, profile.S / ft


def estimate_exponents(lattice, f, config, node_budget=None):
    """Ray-scan estimator: inf/sup of psi_k and Psi_k over the asymptotic
    shell of a (direction x radius) grid, with per-radius traces."""
    d = lattice.dim
    radii = config.radii
    shell_start = config.shell_start
    per_radius = {(kind, k): [] for kind in KINDS for k in range(1, d + 1)}
    shell_min_f = math.inf
    for ri, r in enumerate(radii):
        row_vals = {key: [] for key in per_radius}
        for u in config.directions:
            t = TauVector.project(r * u)
            ft = f.value(t)
            if ft <= 0:
                continue
            psis, big_psis = psi_values(lattice, t, f, node_budget=node_budget)
            for k in range(1, d + 1):
                row_vals[("psi_lower", k)].append((psis[k - 1], t))
                row_vals[("psi_upper", k)].append((psis[k - 1], t))
                row_vals[("Psi_lower", k)].append((big_psis[k - 1], t))
                row_vals[("Psi_upper", k)].append((big_psis[k - 1], t))
            if ri >= shell_start:
                shell_min_f = min(shell_min_f, ft)
        for key in per_radius:
            vals = row_vals[key]
            if not vals:
                raise ZeroGauge("gauge vanished on every direction at a radius")
            if key[0].endswith("lower"):
                per_radius[key].append(min(vals, key=lambda p: p[0]))
            else:
                per_radius[key].append(max(vals, key=lambda p: p[0]))
    shell_count = (config.count - shell_start) * len(config.directions)
    if shell_count < 10:
        raise InsufficientSamples(
            f"asymptotic shell has {shell_count} samples, need >= 10")
    estimates = {}
    for (kind, k), entries in per_radius.items():
        shell_entries = entries[shell_start:]
        if kind.endswith("lower"):
            value, wit = min(shell_entries, key=lambda p: p[0])
        else:
            value, wit = max(shell_entries, key=lambda p: p[0])
        trace = [(radii[i], float(entries[i][0])) for i in range(len(radii))]
        estimates[(kind, k)] = ExponentEstimate(
            kind, k, f.name, lattice.label, float(value), trace,
            list(wit.components), "ray-scan", shell_start=shell_start)
    return EstimateSet(lattice.label, d, f, estimates, shell_min_f, "ray-scan")


_SCAN_BINS = 64


def _vector_scan_stats(lattice, norm_bound, budget):
    """Stream the sup-ball of radius N and collect, over points with |v| in
    [sqrt(N), N]: per-bin extremes of log(gm(v)) and log|v| on a geometric
    norm grid, the extremal points, and the shell count.

    Points with a zero coordinate are flagged (they carry gm = 0, hence the
    limiting ratio -1 and an infinite Diophantine exponent).
    """
    if norm_bound < 2:
        raise BadParams("norm bound must be at least 2")
    d = lattice.dim
    lo = math.sqrt(norm_bound)
    log_lo, log_hi = math.log(lo), math.log(norm_bound) + 1e-9
    edges = np.exp(np.linspace(log_lo, log_hi, _SCAN_BINS + 1))
    bin_min_ratio = np.full(_SCAN_BINS, math.inf)
    bin_max_gamma = np.full(_SCAN_BINS, -math.inf)
    count = 0
    zero_norm = None
    best = (math.inf, None)   # (ratio, coords) minimizer
    worst = (-math.inf, None)  # (gamma, coords) maximizer
    h = np.full(d, float(norm_bound))
    for _, coords in iter_points_in_box(lattice, h, budget=budget):
        norms = np.max(np.abs(coords), axis=1)
        keep = norms >= lo
        if not np.any(keep):
            continue
        coords = coords[keep]
        norms = norms[keep]
        count += len(norms)
        zero = np.any(coords == 0.0, axis=1)
        if np.any(zero):
            zn = float(np.min(norms[zero]))
            zero_norm = zn if zero_norm is None else min(zero_norm, zn)
        nz = ~zero
        if not np.any(nz):
            continue
        lv = np.log(norms[nz])
        lp = np.mean(np.log(np.abs(coords[nz])), axis=1)
        denom = lv - lp
        ratio = np.where(denom > 0, lp / np.maximum(denom, 1e-300), math.inf)
        gamma = -lp / lv
        i = int(np.argmin(ratio))
        if ratio[i] < best[0]:
            best = (float(ratio[i]), coords[nz][i].copy())
        j = int(np.argmax(gamma))
        if gamma[j] > worst[0]:
            worst = (float(gamma[j]), coords[nz][j].copy())
        bins = np.clip(np.searchsorted(edges, norms[nz], side="right") - 1,
                       0, _SCAN_BINS - 1)
        np.minimum.at(bin_min_ratio, bins, ratio)
        np.maximum.at(bin_max_gamma, bins, gamma)
    if count < 10:
        raise InsufficientSamples(
            f"only {count} points with |v| in [sqrt(N), N], need >= 10")
    return edges, bin_min_ratio, bin_max_gamma, zero_norm, best, worst


def estimate_psi1_vector_scan(lattice, norm_bound, budget=None):
    """Vector-route estimate of the first lower sum exponent for f = sup-plus:
    inf over lattice points v with |v| in [sqrt(N), N] of
    log(gm(v)) / (log|v| - log(gm(v))), gm the coordinate geometric mean.
    Points with a zero coordinate contribute the limit value -1.  The trace
    records the running infimum on a geometric grid of norms."""
    edges, bin_min_ratio, _, zero_norm, best, _ = _vector_scan_stats(
        lattice, norm_bound, budget)
    if zero_norm is not None:
        zero_bin = min(int(np.searchsorted(edges, zero_norm, side="right")) - 1,
                       len(bin_min_ratio) - 1)
        bin_min_ratio[max(zero_bin, 0)] = min(bin_min_ratio[max(zero_bin, 0)], -1.0)
    trace = []
    running = math.inf
    for b in range(len(bin_min_ratio)):
        if not math.isinf(bin_min_ratio[b]):
            running = min(running, float(bin_min_ratio[b]))
        if not math.isinf(running):
            trace.append((float(edges[b + 1]), running))
    value = trace[-1][1] if trace else math.inf
    witness = None
    if zero_norm is None and best[1] is not None:
        witness = list(tau_of_vector(best[1]).components)
    return ExponentEstimate("Psi_lower", 1, "sup-plus", lattice.label,
                            float(value), trace, witness, "vector-scan")


def estimate_omega(lattice, norm_bound, budget=None):
    """Multiplicative Diophantine exponent, truncated: sup over lattice
    points with |v| in [sqrt(N), N] of log(1/gm(v)) / log|v|; +inf as soon
    as a point with a zero coordinate occurs."""
    _, _, bin_max_gamma, zero_norm, _, worst = _vector_scan_stats(
        lattice, norm_bound, budget)
    if zero_norm is not None:
        return math.inf
    return float(worst[0])


def omega_psi_convert(x, direction):
    """The exact correspondence between the Diophantine exponent and the
    first lower sum exponent for f = sup-plus:
    omega -> -omega/(1 + omega) (infinity -> -1) and its inverse."""
    if direction == "omega_to_psi":
        if isinstance(x, float) and math.isinf(x) and x > 0:
            return -1.0
        if x < 0 or (isinstance(x, float) and math.isnan(x)):
            raise OutOfDomain(f"omega must be in [0, +inf], got {x}")
        return -x / (1.0 + x)
    if direction == "psi_to_omega":
        if x == -1.0:
            return math.inf
        if not -1.0 <= x <= 0.0:
            raise OutOfDomain(f"Psi_1 lower value must be in [-1, 0], got {x}")
        return -x / (1.0 + x)
    raise BadParams(f"unknown direction {direction!r}")
