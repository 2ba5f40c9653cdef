"""Observation windows, windowed complexity, and thermodynamic bounds.

A window is a basis-block partition whose pinching fixes the structured
vacuum; sweeping a nested family of windows traces how much of a state's
order a finite observer can resolve. Thermodynamic identities in this
module follow the nats convention; hbar and k_B default to 1 and are
explicit arguments everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entropy import von_neumann
from .errors import ValidationError
from .operators import BlockPartition, DensityOperator, pinch
from .reference import ReferenceSet

COMPAT_TOL = 1e-10

TIME_BOUND_VARIANTS = ("envelope", "net_gain", "full", "isothermal", "sign_robust")


@dataclass(frozen=True)
class ObservationWindow:
    """A block partition with its capability label Xi >= 0."""

    partition: BlockPartition
    xi: float = 0.0

    def __post_init__(self):
        if self.xi < 0:
            raise ValidationError("window label xi must be >= 0")


def _refines(fine: BlockPartition, coarse: BlockPartition) -> bool:
    """True when every block of `fine` sits inside one block of `coarse`."""
    if fine.covered != coarse.covered:
        return False
    owner: dict[int, int] = {}
    for k, b in enumerate(coarse.blocks):
        for i in b:
            owner[i] = k
    for b in fine.blocks:
        ids = {owner[i] for i in b}
        if len(ids) != 1:
            return False
    return True


@dataclass(frozen=True)
class WindowFamily:
    """Strictly increasing capability labels with nested window algebras.

    Growing Xi enlarges the algebra the observer commands, so partitions
    coarsen along the family: each earlier partition refines every later
    one, and the windowed entropy can only decrease along the sweep.
    """

    windows: tuple[ObservationWindow, ...]

    def __post_init__(self):
        wins = tuple(self.windows)
        if not wins:
            raise ValidationError("window family is empty")
        for a, b in zip(wins, wins[1:]):
            if not b.xi > a.xi:
                raise ValidationError("window labels must be strictly increasing")
            if not _refines(a.partition, b.partition):
                raise ValidationError(
                    f"window at xi={a.xi} does not refine the window at xi={b.xi}; "
                    "the family is not nested"
                )
        object.__setattr__(self, "windows", wins)


def window_compatible(window: ObservationWindow, ref: ReferenceSet) -> bool:
    """A window is compatible when its pinching fixes the total projector
    (equivalently the structured vacuum)."""
    lab = window.partition.labels(ref.dim)
    mask = lab[:, None] == lab[None, :]
    pinched = np.where(mask, ref.total.matrix, 0.0)
    return bool(np.linalg.norm(pinched - ref.total.matrix) <= COMPAT_TOL)


def conditional_expectation(rho: DensityOperator, window: ObservationWindow) -> DensityOperator:
    """Project onto the window's block algebra (idempotent block pinching)."""
    return pinch(rho, window.partition)


def windowed_entropy_bits(
    rho: DensityOperator, ref: ReferenceSet, window: ObservationWindow
) -> float:
    if not window_compatible(window, ref):
        raise ValidationError(
            "window partition does not preserve the reference projector"
        )
    return von_neumann(conditional_expectation(rho, window)).bits


def windowed_rcc(
    rho: DensityOperator, ref: ReferenceSet, window: ObservationWindow
) -> float:
    """(log2 d_R - S(E_Xi(rho))) / log2 Gamma_R, in structons.

    Never exceeds the unwindowed complexity; equals it when the window's
    single block spans the whole space.
    """
    s_bits = windowed_entropy_bits(rho, ref, window)
    return max(0.0, (math.log2(ref.d_r) - s_bits) / ref.log2_gamma)


def windowed_pinching_bound(probabilities, ranks, ref: ReferenceSet) -> float:
    """Operational lower bound on windowed complexity from block outcomes.

    Given outcome probabilities p_i over orthogonal blocks of ranks r_i that
    resolve the reference subspace, returns
    (ln d_R - H({p_i}) - sum_i p_i ln r_i) / ln Gamma_R, floored at 0.
    Rank-one blocks reduce this to the plain dephasing bound.
    """
    p = np.asarray(probabilities, dtype=float)
    r = np.asarray(ranks, dtype=float)
    if p.shape != r.shape or p.ndim != 1:
        raise ValidationError("probabilities and ranks must be matching 1-d arrays")
    if (r < 1).any():
        raise ValidationError("ranks must be >= 1")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValidationError(f"probabilities sum to {p.sum()!r}, not 1")
    p = np.clip(p, 0.0, None)
    pos = p > 0.0
    h_nats = float(-(p[pos] * np.log(p[pos])).sum())
    rank_term = float((p[pos] * np.log(r[pos])).sum())
    value = (math.log(ref.d_r) - h_nats - rank_term) / math.log(ref.gamma)
    return max(0.0, value)


def work_complexity_potential(
    temperature: float,
    dc_dxi: float,
    gamma_r: float,
    dlngamma_dxi: float = 0.0,
    complexity: float | None = None,
) -> float:
    """Information-processing work per unit budget at fixed energy.

    Pi_Xi = T * ln(Gamma_R) * dC/dXi, plus T * C * dln(Gamma_R)/dXi when
    the bandwidth drifts with the budget (then the current complexity C
    must be supplied).
    """
    if temperature < 0:
        raise ValidationError("temperature must be >= 0")
    if gamma_r <= 1:
        raise ValidationError("gamma_r must exceed 1")
    value = temperature * math.log(gamma_r) * dc_dxi
    if dlngamma_dxi != 0.0:
        if complexity is None:
            raise ValidationError("bandwidth drift requires the current complexity")
        value += temperature * complexity * dlngamma_dxi
    return value


@dataclass(frozen=True)
class ProcessTrace:
    """Sampled process history: time, work potential, temperature, complexity."""

    times: np.ndarray
    potentials: np.ndarray
    temperatures: np.ndarray
    complexities: np.ndarray

    def __post_init__(self):
        arrays = {
            "times": np.asarray(self.times, dtype=float),
            "potentials": np.asarray(self.potentials, dtype=float),
            "temperatures": np.asarray(self.temperatures, dtype=float),
            "complexities": np.asarray(self.complexities, dtype=float),
        }
        n = arrays["times"].size
        if n < 2:
            raise ValidationError("a process trace needs at least 2 samples")
        for name, a in arrays.items():
            if a.ndim != 1 or a.size != n:
                raise ValidationError(f"trace column {name} must have {n} entries")
            object.__setattr__(self, name, a)
        if (np.diff(arrays["times"]) <= 0).any():
            raise ValidationError("trace times must be strictly increasing")


def info_work(trace: ProcessTrace, gamma_r: float) -> tuple[float, float | None]:
    """Total information-processing work and complexity-weighted temperature.

    W = ln(Gamma_R) * integral of T dC (trapezoidal along the complexity
    coordinate) and <T>_C = (integral T dC) / dC. The average is None when
    the net complexity change vanishes.
    """
    if gamma_r <= 1:
        raise ValidationError("gamma_r must exceed 1")
    t_dc = float(np.trapezoid(trace.temperatures, trace.complexities))
    delta_c = float(trace.complexities[-1] - trace.complexities[0])
    work = math.log(gamma_r) * t_dc
    if abs(delta_c) < 1e-15:
        return 0.0, None
    return work, t_dc / delta_c


@dataclass(frozen=True)
class TimeBound:
    """Lower bound on process duration, with its derivation variant."""

    value: float
    variant: str
    approximate: bool = False


def process_time_bound(
    delta_c: float,
    pi_avg: float | None = None,
    variant: str = "envelope",
    *,
    log_correction: float = 0.0,
    temperature: float | None = None,
    trace: ProcessTrace | None = None,
    hbar: float = 1.0,
    k_b: float = 1.0,
) -> TimeBound:
    """Minimum duration to generate delta_c structons of complexity.

    envelope / net_gain: hbar * delta_c / (2 * pi_avg), differing only in
    what the caller subtracted to form delta_c (initial envelope value vs
    initial complexity). full: additionally removes the supplied logarithmic
    correction budget. isothermal: hbar * delta_c / (2 pi k_B T), flagged
    approximate since the underlying potential cap is heuristic.
    sign_robust: pi_avg is replaced by the time average of the positive part
    of the potential along the trace.
    """
    if variant not in TIME_BOUND_VARIANTS:
        raise ValidationError(
            f"unknown variant {variant!r}; expected one of {TIME_BOUND_VARIANTS}"
        )
    if delta_c == 0.0:
        return TimeBound(0.0, variant, approximate=variant == "isothermal")
    if variant == "isothermal":
        if temperature is None or temperature <= 0:
            raise ValidationError("isothermal variant needs a positive temperature")
        return TimeBound(
            hbar * delta_c / (2.0 * math.pi * k_b * temperature), variant, approximate=True
        )
    if variant == "sign_robust":
        if trace is None:
            raise ValidationError("sign_robust variant needs a process trace")
        span = float(trace.times[-1] - trace.times[0])
        pi_avg = float(
            np.trapezoid(np.clip(trace.potentials, 0.0, None), trace.times) / span
        )
    if pi_avg is None or pi_avg <= 0:
        raise ValidationError("the average work potential must be positive")
    effective = delta_c - (log_correction if variant == "full" else 0.0)
    return TimeBound(max(0.0, hbar * effective / (2.0 * pi_avg)), variant)


def window_leakage_error(p_leak: float, d_r: int, gamma_r: float) -> float:
    """Worst-case windowed-complexity shift from support leakage p_leak.

    Projection back into the subspace moves the state by at most
    delta = 2p + 2 sqrt(p(1-p)) in trace distance, which perturbs any
    windowed complexity by at most
    (delta ln(d_R - 1) + h2(delta)) / ln(Gamma_R)   [structons, nats inside].
    """
    if not 0.0 <= p_leak < 1.0:
        raise ValidationError(f"p_leak {p_leak} must be in [0,1)")
    if d_r < 2:
        raise ValidationError("d_R must be >= 2")
    if gamma_r <= 1:
        raise ValidationError("gamma_r must exceed 1")
    delta = min(1.0, 2.0 * p_leak + 2.0 * math.sqrt(p_leak * (1.0 - p_leak)))
    h2_nats = 0.0
    if 0.0 < delta < 1.0:
        h2_nats = -delta * math.log(delta) - (1.0 - delta) * math.log(1.0 - delta)
    return (delta * math.log(d_r - 1) + h2_nats) / math.log(gamma_r)


@dataclass(frozen=True)
class RectEfficiency:
    """Dynamical efficiency factors; values above 1 violate physical law."""

    eta_qsl: float
    eta_lr: float

    @property
    def qsl_satisfied(self) -> bool:
        return self.eta_qsl <= 1.0

    @property
    def lr_satisfied(self) -> bool:
        return self.eta_lr <= 1.0


def rect_efficiency(
    sigma_avail: float,
    delta_t: float,
    c_opt: float,
    s_e: float,
    gamma_j: float,
    hbar: float = 1.0,
) -> RectEfficiency:
    """Speed-limit and locality efficiency factors of a dynamical process.

    eta_QSL = (pi hbar / 2) C_opt / (sigma_avail * dt) and
    eta_LR = hbar * S_E / (gamma_j * dt). The testable physics is that both
    stay at or below 1.
    """
    if sigma_avail <= 0 or delta_t <= 0:
        raise ValidationError("sigma_avail and delta_t must be positive")
    if s_e < 0:
        raise ValidationError("entanglement output must be >= 0")
    if gamma_j <= 0 or hbar <= 0:
        raise ValidationError("gamma_j and hbar must be positive")
    eta_qsl = (math.pi * hbar / 2.0) * c_opt / (sigma_avail * delta_t)
    eta_lr = hbar * s_e / (gamma_j * delta_t)
    return RectEfficiency(eta_qsl, eta_lr)


def rect_identity_check(
    sigma_avail: float,
    s_e: float,
    eta_qsl: float,
    eta_lr: float,
    gamma_j: float,
    c_opt: float,
) -> float:
    """Residual of the resource-accounting identity.

    sigma_avail * S_E - (eta_LR/eta_QSL)(pi gamma_j / 2) C_opt vanishes
    identically when the efficiency factors come from rect_efficiency on the
    same process; independently chosen factors simply yield a nonzero
    residual (reported, not an error).
    """
    if eta_qsl <= 0:
        raise ValidationError("eta_qsl must be positive")
    return sigma_avail * s_e - (eta_lr / eta_qsl) * (math.pi * gamma_j / 2.0) * c_opt


@dataclass(frozen=True)
class RectPerformance:
    """Margins of the measurable performance inequality."""

    margin: float
    margin_dimensionless: float
    passed: bool


def rect_performance_check(
    sigma_avail: float,
    s_e: float,
    eta_qsl: float,
    eta_lr: float,
    gamma_j: float,
    j: float,
    c_r_value: float,
) -> RectPerformance:
    """Check sigma_avail * S_E >= (eta_LR/eta_QSL)(pi gamma_j/2) C_R and its
    dimensionless form (both sides divided by the energy scale J)."""
    if eta_qsl <= 0:
        raise ValidationError("eta_qsl must be positive")
    if j <= 0:
        raise ValidationError("the characteristic energy scale J must be positive")
    rhs = (eta_lr / eta_qsl) * (math.pi * gamma_j / 2.0) * c_r_value
    lhs = sigma_avail * s_e
    margin = lhs - rhs
    tol = 1e-12 * max(1.0, abs(lhs), abs(rhs))
    return RectPerformance(margin, margin / j, margin >= -tol)
