"""Scalar security formulas: entropies, finite-size corrections, key rates.

All entropies and rates are in bits (base-2 logarithms throughout); key
lengths are in bits per block, rates in bits per channel use.

The channel is the thermal-loss model induced by an entangling-cloner
attack with transmissivity eta and environment mean photons omega; the
excess noise in shot-noise units is u = (1 - eta) omega.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

# Above this transmissivity the closed-form eavesdropper information is
# known to behave unphysically (it does not vanish for a lossless line);
# results are emitted verbatim but flagged.
ETA_WARN_THRESHOLD = 0.99


@dataclass(frozen=True)
class ChannelModel:
    """Thermal-loss channel: transmissivity eta, cloner mean photons omega."""

    eta: float
    omega: float

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if self.omega < 0.0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")

    @property
    def u(self) -> float:
        """Excess noise (1 - eta) * omega in shot-noise units."""
        return (1.0 - self.eta) * self.omega

    @classmethod
    def from_excess_noise(cls, eta: float, u: float) -> "ChannelModel":
        """Build from (eta, u); requires eta < 1 when u > 0."""
        if u < 0.0:
            raise ValueError(f"u must be >= 0, got {u}")
        if u == 0.0:
            return cls(eta, 0.0)
        if eta >= 1.0:
            raise ValueError("u > 0 requires eta < 1")
        return cls(eta, u / (1.0 - eta))


@dataclass(frozen=True)
class SecurityParams:
    """Finite-size security inputs.

    cardinality is |Ybar| = 2^(2 b_B), the size of the receiver's joint
    discretized symbol alphabet over both quadratures.
    """

    eps_s: float
    eps_h: float
    eps_a: float
    n: float
    cardinality: int
    beta: float | None = None
    eps_p: float | None = None

    def __post_init__(self):
        for name in ("eps_s", "eps_h", "eps_a"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        c = self.cardinality
        if c < 2 or (c & (c - 1)) != 0:
            raise ValueError(f"cardinality must be a power of two >= 2, got {c}")
        if self.beta is not None and not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")


@dataclass(frozen=True)
class KeyRateReport:
    """Decomposed finite-size rate r_n = r_inf - f_term - aep_term / sqrt(n)."""

    r_inf: float
    r_n: float
    mutual_ab: float
    holevo_ye: float
    f_term: float
    aep_term: float
    total_epsilon: float
    n: float
    notes: tuple = field(default_factory=tuple)


def g_entropy(x: float) -> float:
    """Bosonic entropy g[x] = (x+1) log2(x+1) - x log2(x), g[0] = 0."""
    if x < 0:
        raise ValueError(f"g_entropy needs x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    # log1p keeps (x+1)log2(x+1) accurate for x << 1; x log x needs no care
    return ((x + 1.0) * math.log1p(x) - x * math.log(x)) / math.log(2.0)


def delta_aep(eps_s: float, cardinality: int) -> float:
    """Finite-size entropy correction 4 (log2|Ybar|/2 + 1) sqrt(log2(2/eps_s^2)).

    Evaluated as sqrt(1 - 2 log2 eps_s) so the formula survives smoothing
    parameters far below the underflow point of eps_s^2.
    """
    if not 0.0 < eps_s < 1.0:
        raise ValueError(f"eps_s must lie in (0, 1), got {eps_s}")
    if cardinality < 2:
        raise ValueError(f"cardinality must be >= 2, got {cardinality}")
    return 4.0 * (0.5 * math.log2(cardinality) + 1.0) * math.sqrt(1.0 - 2.0 * math.log2(eps_s))


def f_continuity(eps: float, cardinality: int) -> float:
    """Mutual-information continuity penalty for states eps-close in trace distance:

        f = eps log2|Ybar| + 2 (1+eps) log2(1+eps) - 2 eps log2(eps),

    with f(0, .) = 0 by continuity.
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    if eps == 0.0:
        return 0.0
    ln2 = math.log(2.0)
    return (eps * math.log2(cardinality)
            + 2.0 * (1.0 + eps) * math.log1p(eps) / ln2
            - 2.0 * eps * math.log2(eps))


def mutual_info_ab(ch: ChannelModel, N: float) -> float:
    """Heterodyne mutual information log2(1 + eta N / (u + 1)), both quadratures."""
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    return math.log1p(ch.eta * N / (ch.u + 1.0)) / math.log(2.0)


def holevo_ye(ch: ChannelModel, N: float) -> float:
    """Eavesdropper information bound g[N] - g[(1 - eta) Ntilde] with

        Ntilde = N (1 + omega) / (1 + eta N + (1 - eta) omega).

    The closed form is used as given; it is known not to vanish in the
    lossless limit, hence the eta > 0.99 warning on the rate functions.
    """
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    if N == 0.0:
        return 0.0
    denom = (1.0 + ch.eta * N) + (1.0 - ch.eta) * ch.omega
    ntilde = N * ((1.0 + ch.omega) / denom)
    return g_entropy(N) - g_entropy((1.0 - ch.eta) * ntilde)


def _warn_high_eta(eta: float) -> None:
    if eta > ETA_WARN_THRESHOLD:
        warnings.warn(
            f"eta={eta} > {ETA_WARN_THRESHOLD}: the eavesdropper-information "
            "closed form is unreliable near the lossless limit",
            RuntimeWarning,
            stacklevel=3,
        )


def rate_asymptotic(ch: ChannelModel, N: float, beta: float) -> float:
    """Asymptotic rate beta * mutual_info_ab - holevo_ye (bits per use)."""
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    _warn_high_eta(ch.eta)
    return beta * mutual_info_ab(ch, N) - holevo_ye(ch, N)


def rate_finite(
    ch: ChannelModel,
    N: float,
    params: SecurityParams,
    *,
    h_ybar: float | None = None,
    leak_ec: float | None = None,
    exact_lhl: bool = False,
) -> KeyRateReport:
    """Finite-size rate r_n = r_inf - f(eps_a, |Ybar|) - Delta(eps_s, |Ybar|)/sqrt(n).

    By default r_inf = beta * I(X;Y) - I(Y;E) from ``params.beta``. If both
    ``h_ybar`` (empirical symbol entropy, bits) and ``leak_ec`` (reconciliation
    leakage, bits per use) are supplied, the explicit-entropy form
    r_inf = H(Ybar) - leak_EC - I(Y;E) is used instead and beta is ignored.

    ``exact_lhl`` restores the higher-order hashing terms
    (-2 log2(1/eps_h) + 1)/n that are negligible at cryptographic block sizes.
    Negative rates are reported as-is so crossover block sizes can be located.
    """
    _warn_high_eta(ch.eta)
    mi = mutual_info_ab(ch, N)
    hol = holevo_ye(ch, N)
    notes = [
        "error-correction success-probability corrections omitted",
    ]
    if (h_ybar is None) != (leak_ec is None):
        raise ValueError("h_ybar and leak_ec must be supplied together")
    if h_ybar is not None:
        r_inf = h_ybar - leak_ec - hol
        notes.append("explicit-entropy form: r_inf = H(Ybar) - leak_EC - I(Y;E)")
    else:
        if params.beta is None:
            raise ValueError("params.beta is required unless h_ybar/leak_ec are given")
        r_inf = params.beta * mi - hol
    f_term = f_continuity(params.eps_a, params.cardinality)
    aep_term = delta_aep(params.eps_s, params.cardinality)
    r_n = r_inf - f_term - aep_term / math.sqrt(params.n)
    if exact_lhl:
        r_n += (-2.0 * math.log2(1.0 / params.eps_h) + 1.0) / params.n
        notes.append("higher-order hashing terms included")
    else:
        notes.append("higher-order hashing terms neglected")
    return KeyRateReport(
        r_inf=r_inf,
        r_n=r_n,
        mutual_ab=mi,
        holevo_ye=hol,
        f_term=f_term,
        aep_term=aep_term,
        total_epsilon=params.eps_h + params.eps_s + params.eps_a,
        n=params.n,
        notes=tuple(notes),
    )


def key_length(hmin_smooth: float, eps_h: float) -> int:
    """Extractable key bits floor(hmin - 2 log2(1/eps_h) + 1), clamped at 0."""
    if not 0.0 < eps_h < 1.0:
        raise ValueError(f"eps_h must lie in (0, 1), got {eps_h}")
    raw = hmin_smooth - 2.0 * math.log2(1.0 / eps_h) + 1.0
    return max(0, math.floor(raw))
