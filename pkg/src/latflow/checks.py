"""The inequality battery, with every asymptotic O(1) made explicit.

Each check evaluates a family of sub-inequalities over supplied deformation
samples and reports the worst slack (RHS - LHS, so nonnegative means the
inequality holds) per sub-inequality, together with the constants used.
A check passes when every worst slack is >= -1e-9.
"""

import math

import numpy as np

from .errors import MissingEstimates
from .minima import MinimaProfile, TauVector, as_tau, gauge_minus, gauge_plus, successive_minima

SLACK_TOL = 1e-9


class CheckReport:
    def __init__(self, check_name, lattice_labels, sample_count, slacks, constants):
        self.check_name = check_name
        self.lattice_labels = list(lattice_labels)
        self.sample_count = sample_count
        self.slacks = dict(slacks)
        self.constants = dict(constants)

    @property
    def status(self):
        return "pass" if all(s >= -SLACK_TOL for s in self.slacks.values()) else "fail"

    @property
    def passed(self):
        return self.status == "pass"

    def worst(self):
        return min(self.slacks.values())

    def to_json_dict(self):
        return {
            "check": self.check_name,
            "status": self.status,
            "lattices": self.lattice_labels,
            "samples": self.sample_count,
            "worst_slack": {k: v for k, v in sorted(self.slacks.items())},
            "constants": {k: v for k, v in sorted(self.constants.items())},
        }

    def __repr__(self):
        return f"CheckReport({self.check_name}, {self.status}, worst={self.worst():.3g})"


class _Slacks(dict):
    def update_min(self, name, value):
        v = float(value)
        if name not in self or v < self[name]:
            self[name] = v


def sample_tau_vectors(d, count, radius, seed=0):
    """Seeded deformation samples with sup-norm up to `radius`."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        t = rng.uniform(-radius, radius, size=d)
        t -= t.mean()
        s = np.max(np.abs(t))
        if s > radius:
            t *= radius / s
        out.append(TauVector(t))
    return out


def corrupted_profile_fn(factor=1.01, index=1):
    """Engine wrapper that inflates one minimum; used by the mutation test
    to prove the checks are not vacuous."""

    def fn(lattice, tau, **kwargs):
        p = successive_minima(lattice, tau, **kwargs)
        lam = p.lambdas.copy()
        lam[index] *= factor
        return MinimaProfile(p.tau, lam, p.witnesses, validate=False)

    return fn


def check_L_properties(lattice, samples, profile_fn=successive_minima):
    """Monotonicity of the log-minima, the effectivized two-sided bounds
    -|tau|_+ + L_1(0) <= L_1(tau) <= 0 and L_d(tau) <= |tau|_- + L_d(0),
    and the 1-Lipschitz property along consecutive sample pairs."""
    d = lattice.dim
    base = profile_fn(lattice, TauVector(np.zeros(d)))
    l1_0, ld_0 = float(base.L[0]), float(base.L[-1])
    slacks = _Slacks()
    profiles = [profile_fn(lattice, t) for t in samples]
    for t, p in zip(samples, profiles):
        for k in range(d - 1):
            slacks.update_min("L_monotone", p.L[k + 1] - p.L[k])
        slacks.update_min("L1_nonpositive", -p.L[0])
        slacks.update_min("L1_lower_bound", p.L[0] + gauge_plus(t) - l1_0)
        slacks.update_min("Ld_upper_bound", gauge_minus(t) + ld_0 - p.L[-1])
    for (ta, pa), (tb, pb) in zip(zip(samples, profiles), zip(samples[1:], profiles[1:])):
        dist = float(np.max(np.abs(ta.components - tb.components)))
        for k in range(d):
            slacks.update_min("L_lipschitz", dist - abs(pa.L[k] - pb.L[k]))
    return CheckReport("L-properties", [lattice.label], len(samples), slacks,
                       {"L1_at_0": l1_0, "Ld_at_0": ld_0})


def check_S_properties(lattice, samples, profile_fn=successive_minima):
    """Minkowski bounds -log d! <= S_d <= 0, the chain
    (k+1)/k S_k <= S_{k+1} <= (d-k-1)/(d-k) S_k with the intermediate
    S_k <= k L_{k+1}, the (d-1)-fold consequence for S_{d-1}, and
    |S_{d-1} + L_d| <= log d!."""
    d = lattice.dim
    logdf = math.log(math.factorial(d))
    slacks = _Slacks()
    for t in samples:
        p = profile_fn(lattice, t)
        s = p.S
        slacks.update_min("Sd_lower", s[-1] + logdf)
        slacks.update_min("Sd_upper", -s[-1])
        for k in range(1, d):
            slacks.update_min("S_chain_lower", s[k] - (k + 1) / k * s[k - 1])
            slacks.update_min("S_chain_upper", (d - k - 1) / (d - k) * s[k - 1] - s[k])
            slacks.update_min("S_vs_next_L", k * p.L[k] - s[k - 1])
        slacks.update_min("S_dminus1_lower", s[d - 2] - (d - 1) * s[0])
        slacks.update_min("S_dminus1_upper", s[0] / (d - 1) - s[d - 2])
        slacks.update_min("Sd_decomposition", logdf - abs(s[d - 2] + p.L[-1]))
    return CheckReport("S-properties", [lattice.label], len(samples), slacks,
                       {"log_d_factorial": logdf})


def check_duality(lattice, samples, profile_fn=successive_minima):
    """Two-sided pairing with the dual lattice at the mirrored deformation:
    -log d <= L_k(tau) + L*_{d+1-k}(-tau) <= log d! and
    -k log d <= S_k(tau) - S*_{d-k}(-tau) <= (k+1) log d!."""
    d = lattice.dim
    dual = lattice.dual()
    logd, logdf = math.log(d), math.log(math.factorial(d))
    slacks = _Slacks()
    for t in samples:
        p = profile_fn(lattice, t)
        q = profile_fn(dual, -t)
        for k in range(1, d + 1):
            pair = p.L[k - 1] + q.L[d - k]
            slacks.update_min("L_pairing_lower", pair + logd)
            slacks.update_min("L_pairing_upper", logdf - pair)
        for k in range(1, d):
            gap = p.S[k - 1] - q.S[d - k - 1]
            slacks.update_min("S_pairing_lower", gap + k * logd)
            slacks.update_min("S_pairing_upper", (k + 1) * logdf - gap)
    return CheckReport("duality", [lattice.label, dual.label], len(samples), slacks,
                       {"log_d": logd, "log_d_factorial": logdf})


def check_transference_local(lattice, samples, profile_fn=successive_minima):
    """The finite-deformation core of transference: S_k/k nondecreasing,
    S_k/(d-k) nonincreasing, the dual gap within the pairing constants, and
    the composed bound S_1(tau) <= S_1*(-tau)/(d-1) + 2 log d!."""
    d = lattice.dim
    dual = lattice.dual()
    logd, logdf = math.log(d), math.log(math.factorial(d))
    slacks = _Slacks()
    for t in samples:
        p = profile_fn(lattice, t)
        q = profile_fn(dual, -t)
        s = p.S
        for k in range(1, d - 1):
            slacks.update_min("sum_ratio_nondecreasing", s[k] / (k + 1) - s[k - 1] / k)
            slacks.update_min("deficiency_ratio_nonincreasing",
                              s[k - 1] / (d - k) - s[k] / (d - k - 1))
        for k in range(1, d):
            gap = s[k - 1] - q.S[d - k - 1]
            slacks.update_min("dual_gap_lower", gap + k * logd)
            slacks.update_min("dual_gap_upper", (k + 1) * logdf - gap)
        slacks.update_min("transfer_composed",
                          q.S[0] / (d - 1) + 2 * logdf - s[0])
    return CheckReport("transference-local", [lattice.label, dual.label],
                       len(samples), slacks,
                       {"log_d": logd, "log_d_factorial": logdf,
                        "composed_constant": 2 * logdf})


def _conjugate_comparison_factor(f, d):
    # f/(d-1) <= f(-, .) <= (d-1) f holds for the sup-plus/sup-minus pair and
    # trivially for the symmetric sup gauge
    if f.kind in ("sup-plus", "sup-minus", "sup"):
        return d - 1
    return None


def check_exponent_relations(est, est_dual, est_dual_conj, tol=None):
    """All stated relations between the limiting exponents, evaluated on
    truncated estimates within `tol`:

    monotonicity in k, the identities binding the sum exponents to the
    extreme ones, vanishing of the d-th sums, the two chains, the duality
    swaps against (dual lattice, conjugate gauge), and the split transference
    chain ending at the dual estimate.

    `est` is the estimate set for (Lambda, f); `est_dual` for (Lambda*, f);
    `est_dual_conj` for (Lambda*, f conjugate).  Default tol: the suggested
    tolerance of the primal set plus the worst of the dual ones.
    """
    d = est.dim
    if est_dual.dim != d or est_dual_conj.dim != d:
        raise MissingEstimates("estimate sets have mismatched dimensions")
    if est_dual.lattice_label != est_dual_conj.lattice_label:
        raise MissingEstimates("dual estimate sets describe different lattices")
    if est_dual_conj.f.name != est.f.conjugate().name:
        raise MissingEstimates(
            f"dual-conjugate set uses {est_dual_conj.f.name}, expected {est.f.conjugate().name}")
    if est_dual.f.name != est.f.name:
        raise MissingEstimates("dual set must use the same gauge as the primal set")
    if tol is None:
        tol = est.suggested_tolerance() + max(est_dual.suggested_tolerance(),
                                              est_dual_conj.suggested_tolerance())
    lo = lambda kind, k: est.value(kind, k)
    lod = lambda kind, k: est_dual.value(kind, k)
    loc = lambda kind, k: est_dual_conj.value(kind, k)
    slacks = _Slacks()
    for k in range(1, d):
        slacks.update_min("psi_lower_monotone", lo("psi_lower", k + 1) - lo("psi_lower", k) + tol)
        slacks.update_min("psi_upper_monotone", lo("psi_upper", k + 1) - lo("psi_upper", k) + tol)
    slacks.update_min("Psi1_equals_psi1",
                      tol - abs(lo("Psi_lower", 1) - lo("psi_lower", 1)))
    slacks.update_min("Psi1_equals_psi1",
                      tol - abs(lo("Psi_upper", 1) - lo("psi_upper", 1)))
    slacks.update_min("psi1_nonpositive", tol - lo("psi_upper", 1))
    slacks.update_min("Psi_dminus1_is_minus_psi_d",
                      tol - abs(lo("Psi_lower", d - 1) + lo("psi_upper", d)))
    slacks.update_min("Psi_dminus1_is_minus_psi_d",
                      tol - abs(lo("Psi_upper", d - 1) + lo("psi_lower", d)))
    slacks.update_min("Psi_d_zero", tol - abs(lo("Psi_lower", d)))
    slacks.update_min("Psi_d_zero", tol - abs(lo("Psi_upper", d)))
    for kind in ("Psi_lower", "Psi_upper"):
        for k in range(1, d):
            slacks.update_min(f"{kind}_chain_lo",
                              lo(kind, k + 1) - (k + 1) / k * lo(kind, k) + tol)
            slacks.update_min(f"{kind}_chain_hi",
                              (d - k - 1) / (d - k) * lo(kind, k) - lo(kind, k + 1) + tol)
        slacks.update_min(f"{kind}_nonpositive", tol - lo(kind, 1))
        slacks.update_min(f"{kind}_dminus1_lo",
                          lo(kind, d - 1) - (d - 1) * lo(kind, 1) + tol)
        slacks.update_min(f"{kind}_dminus1_hi",
                          lo(kind, 1) / (d - 1) - lo(kind, d - 1) + tol)
    for k in range(1, d + 1):
        slacks.update_min("psi_duality_swap",
                          tol - abs(lo("psi_lower", k) + loc("psi_upper", d + 1 - k)))
        slacks.update_min("psi_duality_swap",
                          tol - abs(lo("psi_upper", k) + loc("psi_lower", d + 1 - k)))
    for k in range(1, d):
        slacks.update_min("Psi_duality_swap",
                          tol - abs(lo("Psi_lower", k) - loc("Psi_lower", d - k)))
        slacks.update_min("Psi_duality_swap",
                          tol - abs(lo("Psi_upper", k) - loc("Psi_upper", d - k)))
    for k in range(1, d):
        slacks.update_min("split_chain_step",
                          lo("Psi_lower", k) / k - lo("Psi_lower", 1) + tol)
        slacks.update_min("split_chain_step",
                          lo("Psi_lower", d - 1) / (d - 1) - lo("Psi_lower", k) / k + tol)
    constants = {"tol": tol}
    factor = _conjugate_comparison_factor(est.f, d)
    if factor is not None:
        slacks.update_min("split_chain_dual_link",
                          lod("Psi_lower", 1) / factor ** 2
                          - lo("Psi_lower", d - 1) / (d - 1) + tol)
        constants["conjugate_comparison_factor"] = factor
    slacks.update_min("conjugate_transfer",
                      loc("Psi_lower", 1) / (d - 1) - lo("Psi_lower", 1) + tol)
    return CheckReport("exponent-relations",
                       [est.lattice_label, est_dual.lattice_label],
                       len(est.estimates), slacks, constants)


def full_suite(lattice, samples, profile_fn=successive_minima):
    """The sample-based checks (the exponent relations need scans and are
    run separately)."""
    return [
        check_L_properties(lattice, samples, profile_fn),
        check_S_properties(lattice, samples, profile_fn),
        check_duality(lattice, samples, profile_fn),
        check_transference_local(lattice, samples, profile_fn),
    ]
