"""Region of insecurity and security verdicts under the USD attack.

Eve's achievable click pairs form the convex hull of the number-state points
and the saturation point ``(P_D, P_D)``. A link whose working point lies in
that hull can be eavesdropped completely without leaving a trace in Bob's
single- and double-click rates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .click_model import (
    ClickPoint,
    check_eta_b,
    check_eta_l,
    check_probability,
    number_state_points,
    working_point,
)
from .errors import DomainError
from .usd_core import SourceModel, usd_failure_log, usd_probability

__all__ = [
    "Verdict",
    "CriteriaMode",
    "SecurityVerdict",
    "InsecurityPolygon",
    "CriticalEta",
    "SecurityMap",
    "necessary_threshold",
    "asymptotic_threshold",
    "mu2_threshold",
    "f_criterion",
    "small_etab_f",
    "critical_eta",
    "build_insecurity_polygon",
    "classify",
    "security_map",
]

POLYGON_EPS = 1e-12
DEFAULT_POLYGON_TOL = 1e-12


class Verdict(enum.Enum):
    SECURE = "secure"
    INSECURE = "insecure"
    INDETERMINATE = "indeterminate"


class CriteriaMode(enum.Enum):
    GEOMETRIC = "geometric"
    PAPER = "paper"


@dataclass(frozen=True)
class SecurityVerdict:
    verdict: Verdict
    mode: CriteriaMode
    mu: float
    eta_l: float
    eta_b: float
    f: float
    mu2: float
    p_d: float
    working: ClickPoint
    # P_D - p_single; positive when the necessary condition for insecurity holds
    margin: float


def necessary_threshold(mu: float, model: SourceModel = SourceModel.FOCK) -> float:
    """Largest total transmission ``eta_l * eta_b`` still allowing full insecurity.

    The working point can only enter the insecure region while its
    single-click rate stays below ``P_D``, which rearranges to
    ``eta_l * eta_b < -ln(1 - P_D) / mu``.
    """
    if not math.isfinite(mu) or mu <= 0.0:
        raise DomainError(f"necessary threshold needs mu > 0 (limit 0 at mu=0), got {mu!r}")
    return -usd_failure_log(mu, model) / mu


def asymptotic_threshold() -> float:
    """Large-mu limit of :func:`necessary_threshold` for the Fock-mixture source."""
    return 1.0 - 2.0**-0.5


def mu2_threshold(eta_l: float, eta_b: float) -> float:
    """Mean photon number below which the working point lies under the 0-2 chord."""
    eta_l = check_eta_l(eta_l)
    eta_b = check_eta_b(eta_b)
    if eta_l == 0.0:
        raise DomainError("mu2 threshold needs eta_l > 0")
    # ln[(4 - 3 eta)/(4 - eta)] == log1p(-2 eta / (4 - eta))
    return -2.0 / (eta_l * eta_b) * math.log1p(-2.0 * eta_b / (4.0 - eta_b))


def f_criterion(mu: float, eta_l: float, eta_b: float) -> float:
    """Signed distance proxy from the working point to the vertex 1-2 edge.

    Non-positive values (together with ``mu < mu2``) put the working point
    inside the insecure region.
    """
    x_w, y_w = working_point(mu, eta_l, eta_b)
    p_d = usd_probability(mu, SourceModel.FOCK)
    return x_w * eta_b - 2.0 * y_w * (1.0 - eta_b) - p_d * eta_b**2


def small_etab_f(mu: float, eta_l: float, eta_b: float) -> float:
    """Leading-order form of :func:`f_criterion` for small ``eta_b``."""
    eta_l = check_eta_l(eta_l)
    eta_b = check_eta_b(eta_b)
    p_d = usd_probability(mu, SourceModel.FOCK)
    return eta_b**2 * (eta_l * mu - 0.5 * (eta_l * mu) ** 2 - p_d)


@dataclass(frozen=True)
class CriticalEta:
    """Small-``eta_b`` boundary on the accessible transmittance.

    ``value`` is None once ``P_D > 1/2``: the square root turns imaginary and
    the small-``eta_b`` analysis gives no boundary there.
    """

    mu: float
    value: float | None
    approx: float
    p_d: float

    @property
    def defined(self) -> bool:
        return self.value is not None

    @property
    def at_branch_point(self) -> bool:
        return self.p_d == 0.5


def critical_eta(mu: float) -> CriticalEta:
    if not math.isfinite(mu) or mu <= 0.0:
        raise DomainError(f"critical eta needs mu > 0, got {mu!r}")
    p_d = usd_probability(mu, SourceModel.FOCK)
    disc = 1.0 - 2.0 * p_d
    value = None
    if disc >= 0.0:
        # (1 - sqrt(1 - 2P)) / mu without cancellation for small P
        value = 2.0 * p_d / (1.0 + math.sqrt(disc)) / mu
    return CriticalEta(mu=mu, value=value, approx=p_d / mu, p_d=p_d)


@dataclass(frozen=True)
class InsecurityPolygon:
    """Counter-clockwise hull: N = 0 .. n_max vertices, then ``(p_d, p_d)``."""

    vertices: np.ndarray
    p_d: float
    eta_b: float
    n_max: int

    def orientations(self) -> np.ndarray:
        """Cross products of consecutive edge pairs around the closed polygon."""
        v = self.vertices
        if len(v) < 3:
            return np.zeros(0)
        a = v
        b = np.roll(v, -1, axis=0)
        c = np.roll(v, -2, axis=0)
        return (b[:, 0] - a[:, 0]) * (c[:, 1] - b[:, 1]) - (b[:, 1] - a[:, 1]) * (
            c[:, 0] - b[:, 0]
        )

    def contains(self, point, eps: float = POLYGON_EPS) -> bool:
        """Inside-or-on-boundary test with absolute tolerance ``eps``."""
        px, py = float(point[0]), float(point[1])
        v = self.vertices
        if len(v) == 1:
            return math.hypot(px - v[0, 0], py - v[0, 1]) <= eps
        a = v
        b = np.roll(v, -1, axis=0)
        edge = b - a
        length = np.hypot(edge[:, 0], edge[:, 1])
        keep = length > 0.0
        cross = edge[:, 0] * (py - a[:, 1]) - edge[:, 1] * (px - a[:, 0])
        return bool(np.all(cross[keep] >= -eps * length[keep]))


def _n_max(eta_b: float, tol: float) -> int:
    if eta_b == 1.0:
        return 1
    q = 1.0 - eta_b
    n = max(1, int(math.floor(math.log(tol) / math.log1p(-eta_b))) + 1)
    while q**n >= tol:
        n += 1
    while n > 1 and q ** (n - 1) < tol:
        n -= 1
    return n


def build_insecurity_polygon(
    eta_b: float, p_d: float, tol: float = DEFAULT_POLYGON_TOL
) -> InsecurityPolygon:
    """Hull of the number-state points up to the first N with ``(1-eta_b)^N < tol``."""
    eta_b = check_eta_b(eta_b)
    p_d = check_probability("p_d", p_d)
    if not 0.0 < tol < 1.0:
        raise DomainError(f"tol must lie in (0, 1), got {tol!r}")
    if p_d == 0.0:
        return InsecurityPolygon(np.zeros((1, 2)), 0.0, eta_b, 0)
    n_max = _n_max(eta_b, tol)
    n = np.arange(n_max + 1)
    xs, ys = number_state_points(n, eta_b, p_d)
    vertices = np.vstack([np.column_stack([xs, ys]), [[p_d, p_d]]])
    return InsecurityPolygon(vertices, p_d, eta_b, n_max)


def classify(
    mu: float,
    eta_l: float,
    eta_b: float,
    mode: CriteriaMode = CriteriaMode.GEOMETRIC,
    *,
    tol: float = DEFAULT_POLYGON_TOL,
    polygon: InsecurityPolygon | None = None,
) -> SecurityVerdict:
    """Decide whether the USD attack breaks the link at ``(mu, eta_l, eta_b)``.

    ``GEOMETRIC`` tests the working point against the hull itself.
    ``PAPER`` applies the two linear tests: the working point must sit below
    the chord through vertex 2 (``mu < mu2``, otherwise the verdict is
    indeterminate) and then ``F <= 0`` means insecure.

    In both modes a working point with ``p_single >= P_D`` is secure, since
    Eve cannot then reproduce Bob's click rate.
    """
    mode = CriteriaMode(mode)
    x_w, y_w = working = working_point(mu, eta_l, eta_b)
    p_d = usd_probability(mu, SourceModel.FOCK)
    f = x_w * eta_b - 2.0 * y_w * (1.0 - eta_b) - p_d * eta_b**2
    mu2 = math.inf if eta_l == 0.0 else mu2_threshold(eta_l, eta_b)
    margin = p_d - x_w

    if mode is CriteriaMode.PAPER:
        if mu >= mu2:
            verdict = Verdict.INDETERMINATE
        elif margin <= 0.0:
            verdict = Verdict.SECURE
        else:
            verdict = Verdict.INSECURE if f <= 0.0 else Verdict.SECURE
    else:
        if margin <= 0.0:
            verdict = Verdict.SECURE
        else:
            if polygon is None or polygon.p_d != p_d or polygon.eta_b != eta_b:
                polygon = build_insecurity_polygon(eta_b, p_d, tol)
            verdict = Verdict.INSECURE if polygon.contains(working) else Verdict.SECURE

    return SecurityVerdict(
        verdict=verdict,
        mode=mode,
        mu=float(mu),
        eta_l=float(eta_l),
        eta_b=float(eta_b),
        f=f,
        mu2=mu2,
        p_d=p_d,
        working=working,
        margin=margin,
    )


@dataclass(frozen=True)
class SecurityMap:
    """Verdict grid indexed ``[i_mu, j_eta_l]`` plus the analytic boundary curves.

    Boundary curves are expressed as ``eta_l`` values per ``mu``:
    ``necessary_eta_l`` (total-transmission bound divided by ``eta_b``),
    ``critical_eta_l`` (small-``eta_b`` boundary, NaN where undefined) and
    ``mu2_eta_l`` (where ``mu`` equals the mu2 threshold).
    """

    mu: np.ndarray
    eta_l: np.ndarray
    eta_b: float
    mode: CriteriaMode
    verdicts: np.ndarray
    f: np.ndarray
    boundaries: dict[str, np.ndarray] = field(default_factory=dict)


def security_map(
    mu_values,
    eta_l_values,
    eta_b: float,
    mode: CriteriaMode = CriteriaMode.GEOMETRIC,
    *,
    tol: float = DEFAULT_POLYGON_TOL,
) -> SecurityMap:
    mu_values = np.asarray(mu_values, dtype=float).ravel()
    eta_l_values = np.asarray(eta_l_values, dtype=float).ravel()
    if mu_values.size == 0 or eta_l_values.size == 0:
        raise DomainError("security map needs a non-empty grid")
    eta_b = check_eta_b(eta_b)
    mode = CriteriaMode(mode)

    verdicts = np.empty((mu_values.size, eta_l_values.size), dtype=object)
    f = np.empty(verdicts.shape)
    for i, mu in enumerate(mu_values):
        polygon = None
        if mode is CriteriaMode.GEOMETRIC:
            polygon = build_insecurity_polygon(eta_b, usd_probability(mu), tol)
        for j, eta_l in enumerate(eta_l_values):
            v = classify(mu, eta_l, eta_b, mode, tol=tol, polygon=polygon)
            verdicts[i, j] = v.verdict
            f[i, j] = v.f

    necessary = np.full(mu_values.size, np.nan)
    critical = np.full(mu_values.size, np.nan)
    mu2_line = np.full(mu_values.size, np.nan)
    log_ratio = math.log1p(-2.0 * eta_b / (4.0 - eta_b))
    for i, mu in enumerate(mu_values):
        if mu > 0.0:
            necessary[i] = necessary_threshold(mu) / eta_b
            c = critical_eta(mu)
            if c.defined:
                critical[i] = c.value
            mu2_line[i] = -2.0 * log_ratio / (eta_b * mu)
    return SecurityMap(
        mu=mu_values,
        eta_l=eta_l_values,
        eta_b=eta_b,
        mode=mode,
        verdicts=verdicts,
        f=f,
        boundaries={
            "necessary_eta_l": necessary,
            "critical_eta_l": critical,
            "mu2_eta_l": mu2_line,
        },
    )
