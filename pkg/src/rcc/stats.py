"""Finite-sample certification: exact binomial intervals, the three
measurement protocols, sample-size planners and bound combination.

Every protocol turns raw outcome counts into a CertifiedBound: a one-sided
lower confidence bound on a divergence, tagged with its confidence level
and full parameter provenance. Endpoints are Clopper-Pearson, computed by
bisecting the exact binomial tail (through the regularized incomplete
beta), which is bit-reproducible and avoids special-function inversions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc

from .bounds import (
    DEFAULT_CONSTANTS,
    BoundBreakdown,
    BoundConstants,
    bound_from_divergence,
    smoothed_lower_bound,
)
from .entropy import binary_entropy, shannon
from .errors import ProtocolInvalidError, ValidationError
from .reference import ReferenceSet

PROTOCOLS = ("hypothesis_test", "witness", "dephase")

# outcome labels used by hypothesis-test records (null-calibration run and
# alternative run, decision per shot)
HT_LABELS = ("null_accept_h1", "null_accept_h0", "alt_accept_h1", "alt_accept_h0")
WITNESS_LABELS = ("success", "failure")


@dataclass(frozen=True)
class MeasurementRecord:
    """Labeled outcome counts from n trials of one protocol."""

    protocol: str
    n: int
    counts: dict[str, int]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValidationError(
                f"unknown protocol {self.protocol!r}; expected one of {PROTOCOLS}"
            )
        if self.n <= 0:
            raise ValidationError("n must be positive")
        counts = {str(k): int(v) for k, v in self.counts.items()}
        if any(v < 0 for v in counts.values()):
            raise ValidationError("negative count")
        if sum(counts.values()) != self.n:
            raise ValidationError(
                f"counts sum {sum(counts.values())} does not match n = {self.n}"
            )
        object.__setattr__(self, "counts", counts)


@dataclass(frozen=True)
class CertifiedBound:
    """A one-sided lower bound with confidence 1 - delta and provenance."""

    quantity: str  # "D_H" | "D_max" | "D" | "C_R"
    value: float
    unit: str
    confidence: float
    protocol: str
    params: dict = field(default_factory=dict)
    direction: str = "lower"

    def __post_init__(self):
        if self.quantity not in ("D_H", "D_max", "D", "C_R"):
            raise ValidationError(f"unknown quantity {self.quantity!r}")
        if not 0.0 < self.confidence < 1.0:
            raise ValidationError(f"confidence {self.confidence} outside (0,1)")
        if self.direction != "lower":
            raise ValidationError("certified bounds are lower bounds by construction")


def _check_binomial_args(k: int, n: int, delta: float) -> None:
    if n <= 0 or not 0 <= k <= n:
        raise ValidationError(f"invalid counts k={k}, N={n}")
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta {delta} must be in (0,1)")


def _binom_cdf(k: int, n: int, p: float) -> float:
    """P(X <= k) for X ~ Binomial(n, p), via the incomplete beta."""
    if k >= n:
        return 1.0
    if p <= 0.0:
        return 1.0
    if p >= 1.0:
        return 0.0
    return float(betainc(n - k, k + 1, 1.0 - p))


def _bisect(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Root of a monotone bracketed function by plain bisection."""
    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol:
            return mid
        if (f(mid) > 0) == (flo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def clopper_pearson_upper(k: int, n: int, delta: float) -> float:
    """One-sided exact upper endpoint: largest p with P(X <= k; p) >= delta."""
    _check_binomial_args(k, n, delta)
    if k == n:
        return 1.0
    return _bisect(lambda p: _binom_cdf(k, n, p) - delta, 0.0, 1.0)


def clopper_pearson_lower(k: int, n: int, delta: float) -> float:
    """One-sided exact lower endpoint: smallest p with P(X >= k; p) >= delta."""
    _check_binomial_args(k, n, delta)
    if k == 0:
        return 0.0
    return _bisect(lambda p: (1.0 - _binom_cdf(k - 1, n, p)) - delta, 0.0, 1.0)


def ht_protocol(
    record: MeasurementRecord,
    eta: float,
    delta: float,
    delta_split: float = 0.5,
) -> CertifiedBound:
    """Hypothesis-testing certification at total confidence 1 - delta.

    The record holds decision counts from a null-calibration run (state was
    the structured vacuum) and an alternative run (state was rho); see
    HT_LABELS. The type-I endpoint alpha_U(delta_split * delta) must stay
    within eta, otherwise the run cannot certify at level eta; the returned
    value is -log2 of the type-II upper endpoint at the remaining budget.
    """
    if record.protocol != "hypothesis_test":
        raise ValidationError(f"record protocol {record.protocol!r} is not hypothesis_test")
    if not 0.0 < eta < 1.0:
        raise ValidationError(f"eta {eta} must be in (0,1)")
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta {delta} must be in (0,1)")
    if not 0.0 < delta_split < 1.0:
        raise ValidationError("delta_split must be in (0,1)")
    missing = [lab for lab in HT_LABELS if lab not in record.counts]
    if missing:
        raise ValidationError(f"hypothesis_test record is missing counts {missing}")
    n_null = record.counts["null_accept_h1"] + record.counts["null_accept_h0"]
    n_alt = record.counts["alt_accept_h1"] + record.counts["alt_accept_h0"]
    if n_null == 0 or n_alt == 0:
        raise ValidationError("both the null and alternative runs need samples")
    delta_alpha = delta * delta_split
    delta_beta = delta * (1.0 - delta_split)
    alpha_upper = clopper_pearson_upper(record.counts["null_accept_h1"], n_null, delta_alpha)
    if alpha_upper > eta:
        raise ProtocolInvalidError(
            f"type-I upper endpoint {alpha_upper:.6f} exceeds eta = {eta}; the "
            "bound would not certify at this level (recalibrate the test or "
            "increase the null sample size)"
        )
    beta_upper = clopper_pearson_upper(record.counts["alt_accept_h0"], n_alt, delta_beta)
    value = -math.log2(beta_upper) if beta_upper > 0 else math.inf
    return CertifiedBound(
        quantity="D_H",
        value=max(0.0, value),
        unit="bits",
        confidence=1.0 - delta,
        protocol="hypothesis_test",
        params={
            "eta": eta,
            "delta": delta,
            "delta_split": delta_split,
            "alpha_upper": alpha_upper,
            "beta_upper": beta_upper,
            "n_null": n_null,
            "n_alt": n_alt,
            "type_ii_count": record.counts["alt_accept_h0"],
        },
    )


def ht_sample_plan(target_bits: float, delta: float) -> int:
    """Zero-failure sample size certifying D_H >= target: ceil(2^L ln(1/delta))."""
    if target_bits < 0:
        raise ValidationError("target must be nonnegative")
    if not 0.0 < delta <= 1.0:
        raise ValidationError(f"delta {delta} must be in (0,1]")
    # the 1e-9 slack keeps exact integer requirements from rounding up
    return math.ceil(2.0**target_bits * math.log(1.0 / delta) - 1e-9)


def witness_protocol(
    record: MeasurementRecord,
    ref: ReferenceSet,
    rank: int,
    delta: float,
    projector=None,
) -> CertifiedBound:
    """Projective-witness certification of the max-divergence.

    With p_L the exact lower endpoint of the occupation probability of a
    rank-r projector supported in the reference subspace, certifies
    D_max >= max(0, log2(p_L d_R / r)). The caller attests the support
    condition unless the projector matrix is supplied for checking.
    """
    if record.protocol != "witness":
        raise ValidationError(f"record protocol {record.protocol!r} is not witness")
    if rank < 1:
        raise ValidationError("witness rank must be >= 1")
    if rank > ref.d_r:
        raise ValidationError(f"witness rank {rank} exceeds d_R = {ref.d_r}")
    if projector is not None:
        pw = np.asarray(projector, dtype=complex)
        leak = np.linalg.norm(pw - ref.total.matrix @ pw @ ref.total.matrix)
        if leak > 1e-9:
            raise ValidationError(
                f"witness projector leaks outside the reference subspace "
                f"(norm {leak:.3e})"
            )
    for lab in WITNESS_LABELS:
        if lab not in record.counts:
            raise ValidationError(f"witness record is missing count {lab!r}")
    successes = record.counts["success"]
    p_lower = clopper_pearson_lower(successes, record.n, delta)
    value = 0.0
    if p_lower * ref.d_r > rank:
        value = math.log2(p_lower * ref.d_r / rank)
    return CertifiedBound(
        quantity="D_max",
        value=value,
        unit="bits",
        confidence=1.0 - delta,
        protocol="witness",
        params={
            "delta": delta,
            "rank": rank,
            "d_r": ref.d_r,
            "p_lower": p_lower,
            "successes": successes,
            "n": record.n,
        },
    )


def witness_sample_plan(
    p0: float, target_bits: float, rank: int, d_r: int, delta: float
) -> int:
    """Hoeffding sample size to separate p0 from p* = 2^L r / d_R."""
    if rank < 1 or d_r < rank:
        raise ValidationError("need 1 <= rank <= d_R")
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta {delta} must be in (0,1)")
    p_star = 2.0**target_bits * rank / d_r
    if p0 <= p_star:
        raise ValidationError(
            f"anticipated occupation p0 = {p0} does not exceed the certification "
            f"threshold p* = {p_star}; the target is unreachable"
        )
    return math.ceil(math.log(1.0 / delta) / (2.0 * (p0 - p_star) ** 2) - 1e-9)


def dephase_protocol(
    record: MeasurementRecord, ref: ReferenceSet, delta: float
) -> CertifiedBound:
    """Classical-basis certification through an entropy confidence endpoint.

    From counts over the d_R reference basis outcomes, bounds the true
    Shannon entropy by H_U = min(log2 M, H(P_hat) + v log2(M-1) + h2(v)),
    v = eps_N/2 with eps_N = sqrt((2/N)(M ln 2 + ln(1/delta))), and returns
    D >= log2 d_R - H_U floored at 0. The continuity term is evaluated on
    its validity range v <= 1 - 1/M; beyond it the always-valid log2 M cap
    takes over.
    """
    if record.protocol != "dephase":
        raise ValidationError(f"record protocol {record.protocol!r} is not dephase")
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta {delta} must be in (0,1)")
    m = ref.d_r
    if len(record.counts) > m:
        raise ValidationError(
            f"{len(record.counts)} outcome labels exceed the d_R = {m} basis states"
        )
    n = record.n
    counts = np.array(list(record.counts.values()), dtype=float)
    p_hat = np.zeros(m)
    p_hat[: counts.size] = counts / n
    h_hat = shannon(p_hat).bits
    eps_n = math.sqrt((2.0 / n) * (m * math.log(2.0) + math.log(1.0 / delta)))
    v = eps_n / 2.0
    if m == 1:
        h_upper = 0.0
    else:
        v_eff = min(v, 1.0 - 1.0 / m)
        continuity = v_eff * math.log2(m - 1) + binary_entropy(v_eff).bits
        h_upper = min(math.log2(m), h_hat + continuity)
    value = max(0.0, math.log2(ref.d_r) - h_upper)
    return CertifiedBound(
        quantity="D",
        value=value,
        unit="bits",
        confidence=1.0 - delta,
        protocol="dephase",
        params={
            "delta": delta,
            "n": n,
            "m_outcomes": m,
            "empirical_entropy_bits": h_hat,
            "eps_n": eps_n,
            "v": v,
            "entropy_upper_bits": h_upper,
        },
    )


def bonferroni(delta: float, m: int) -> float:
    """Split a confidence budget across m comparisons: delta / m."""
    if m < 1:
        raise ValidationError("number of comparisons must be >= 1")
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta {delta} must be in (0,1)")
    return delta / m


@dataclass(frozen=True)
class CombinedBound:
    """Best certified circuit bound across measurement paths."""

    value_structons: float
    confidence: float
    winner: str
    breakdown: BoundBreakdown
    contributing: tuple[CertifiedBound, ...]
    delta_policy: str
    per_path: dict[str, float] = field(default_factory=dict)


def _path_breakdown(
    bound: CertifiedBound,
    ref: ReferenceSet,
    epsilon: float,
    constants: BoundConstants,
    method: str,
) -> BoundBreakdown:
    if bound.quantity == "D_H":
        eta = bound.params.get("eta")
        if eta is None:
            raise ValidationError("a D_H bound must carry its eta in params")
        return smoothed_lower_bound(
            bound.value, ref, epsilon, eta, constants=constants, method=method
        )
    if bound.quantity in ("D", "D_max"):
        # D + skew equals D_max identically, so a max-divergence bound may be
        # used as the leading term directly; a plain divergence bound gets
        # the conservative zero skew.
        return bound_from_divergence(
            bound.value, ref, epsilon, constants=constants, spectral_bits=0.0, method=method
        )
    if bound.quantity == "C_R":
        return bound_from_divergence(
            bound.value * ref.log2_gamma, ref, epsilon, constants=constants, method=method
        )
    raise ValidationError(f"cannot combine quantity {bound.quantity!r}")


def combine_bounds(
    bounds,
    ref: ReferenceSet,
    epsilon: float,
    constants: BoundConstants = DEFAULT_CONSTANTS,
    method: str = "lambert",
    delta_policy: str = "cap",
) -> CombinedBound:
    """Propagate each certified bound through its matching theorem form and
    keep the best final circuit bound.

    The combined confidence applies a multiple-comparison adjustment over
    the m paths compared: delta_total = min(1, m * max_i delta_i). With
    delta_policy="presplit" the caller attests the deltas were already
    divided out of one budget (e.g. via bonferroni), which the report echoes;
    the adjustment formula is the same.
    """
    bounds = list(bounds)
    if not bounds:
        raise ValidationError("no bounds to combine")
    if delta_policy not in ("cap", "presplit"):
        raise ValidationError(f"unknown delta policy {delta_policy!r}")
    for b in bounds:
        if not isinstance(b, CertifiedBound) or b.direction != "lower":
            raise ValidationError(
                "only lower-direction CertifiedBounds can enter a lower-bound report"
            )
    per_path: dict[str, float] = {}
    best: tuple[float, CertifiedBound, BoundBreakdown] | None = None
    for i, b in enumerate(bounds):
        bb = _path_breakdown(b, ref, epsilon, constants, method)
        key = f"{b.protocol}[{i}]" if b.protocol in per_path else b.protocol
        per_path[key] = bb.final
        if best is None or bb.final > best[0]:
            best = (bb.final, b, bb)
    assert best is not None
    m = len(bounds)
    max_delta = max(1.0 - b.confidence for b in bounds)
    delta_total = min(1.0 - 1e-12, m * max_delta)
    return CombinedBound(
        value_structons=best[0],
        confidence=1.0 - delta_total,
        winner=best[1].protocol,
        breakdown=best[2],
        contributing=tuple(bounds),
        delta_policy=delta_policy,
        per_path=per_path,
    )
