"""Exponential Levy models with analytic characteristic exponents.

The log-price process X satisfies E[exp(i xi X_t)] = exp(-t psi(xi)), where
psi(xi) = -i mu xi + phi(xi) extends holomorphically to the horizontal strip
lambda_minus < Im(xi) < lambda_plus and grows like c*|xi|**order along it.
Every pricing contour in this package lives inside that strip, and the
risk-neutral drift mu is pinned by the martingale condition r + psi(-i) = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import gamma as _gamma_fn

from .errors import InvalidModel, NoRoot, StripTooNarrow, StripViolation

# Brownian motion is regular of any exponential type; downstream strip checks
# still want finite bounds, so report a wide configurable proxy instead.
GAUSSIAN_STRIP_PROXY = 50.0

EMM_TOL = 1e-12


def _as_complex(xi):
    arr = np.asarray(xi, dtype=complex)
    return arr, arr.ndim == 0


@dataclass(frozen=True)
class LevyModel:
    """Base class: immutable, side-effect free, safe to share across threads."""

    mu: float
    r: float

    kind = "base"

    @property
    def strip(self) -> tuple[float, float]:
        raise NotImplementedError

    @property
    def order(self) -> float:
        raise NotImplementedError

    @property
    def decay_coefficient(self) -> float:
        """c such that Re psi(x) ~ c*|x|**order for large real x."""
        raise NotImplementedError

    @property
    def decay_shift(self) -> float:
        """Constant offset per unit time: Re psi(x) >= c*|x|**order - shift."""
        return 0.0

    def phi(self, xi):
        """Drift-free part of the exponent."""
        raise NotImplementedError

    def check_strip(self, xi) -> None:
        lo, hi = self.strip
        arr, _ = _as_complex(xi)
        im = arr.imag
        im_min = float(im.min()) if arr.size else 0.0
        im_max = float(im.max()) if arr.size else 0.0
        if not (im_min > lo and im_max < hi):
            raise StripViolation(
                f"Im(xi) in [{im_min:g}, {im_max:g}] leaves the open strip "
                f"({lo:g}, {hi:g}) of the {self.kind} model"
            )

    def psi(self, xi):
        """Characteristic exponent; raises StripViolation off the strip."""
        arr, scalar = _as_complex(xi)
        self.check_strip(arr)
        out = -1j * self.mu * arr + self.phi(arr)
        return complex(out) if scalar else out

    def emm_residual(self) -> float:
        return abs(self.r + self.psi(-1j))


@dataclass(frozen=True)
class GaussianModel(LevyModel):
    sigma: float = 0.2
    strip_proxy: float = GAUSSIAN_STRIP_PROXY

    kind = "gaussian"

    def __post_init__(self):
        if self.sigma <= 0:
            raise InvalidModel(f"sigma must be positive, got {self.sigma}")
        if self.strip_proxy <= 1:
            raise InvalidModel("strip_proxy must exceed 1")

    @property
    def strip(self):
        return (-self.strip_proxy, self.strip_proxy)

    @property
    def order(self):
        return 2.0

    @property
    def decay_coefficient(self):
        return 0.5 * self.sigma**2

    def phi(self, xi):
        return 0.5 * self.sigma**2 * xi * xi


@dataclass(frozen=True)
class NIGModel(LevyModel):
    alpha: float = 8.0
    beta: float = -2.0
    delta: float = 0.3

    kind = "nig"

    def __post_init__(self):
        if not (self.alpha > 0 and abs(self.beta) < self.alpha and self.delta > 0):
            raise InvalidModel(
                f"need alpha > 0, |beta| < alpha, delta > 0; got "
                f"alpha={self.alpha}, beta={self.beta}, delta={self.delta}"
            )
        if self.beta - self.alpha >= -1:
            raise StripTooNarrow(
                f"lambda_minus = beta - alpha = {self.beta - self.alpha:g} >= -1: "
                "-i falls outside the strip"
            )

    @property
    def strip(self):
        return (self.beta - self.alpha, self.beta + self.alpha)

    @property
    def order(self):
        return 1.0

    @property
    def decay_coefficient(self):
        return self.delta

    @property
    def decay_shift(self):
        return self.delta * math.sqrt(self.alpha**2 - self.beta**2)

    def phi(self, xi):
        root = self.alpha**2 - (self.beta + 1j * xi) ** 2
        # Holomorphy on the strip keeps the radicand in the right half plane.
        if np.min(np.real(root)) <= 0:
            raise StripViolation("NIG radicand left the right half plane")
        return self.delta * (np.sqrt(root) - math.sqrt(self.alpha**2 - self.beta**2))


@dataclass(frozen=True)
class CGMYModel(LevyModel):
    c: float = 1.0
    g: float = 5.0
    m: float = 5.0
    y: float = 0.5

    kind = "cgmy"

    def __post_init__(self):
        ok = self.c > 0 and self.g > 0 and self.m > 0
        ok = ok and 0 < self.y < 2 and self.y != 1.0
        if not ok:
            raise InvalidModel(
                "need c > 0, g > 0, m > 0 and activity y in ]0,1[ or ]1,2[; got "
                f"c={self.c}, g={self.g}, m={self.m}, y={self.y}"
            )
        if self.m <= 1:
            raise StripTooNarrow(
                f"lambda_minus = -m = {-self.m:g} >= -1: -i falls outside the strip"
            )

    @property
    def strip(self):
        return (-self.m, self.g)

    @property
    def order(self):
        return self.y

    @property
    def decay_coefficient(self):
        return -2.0 * self.c * _gamma_fn(-self.y) * math.cos(math.pi * self.y / 2)

    @property
    def decay_shift(self):
        # the subtracted m^y + g^y constants delay the asymptotic decay
        return max(0.0, -self.c * _gamma_fn(-self.y) * (self.m**self.y + self.g**self.y))

    def phi(self, xi):
        base_m = self.m - 1j * xi
        base_g = self.g + 1j * xi
        if min(np.min(np.real(base_m)), np.min(np.real(base_g))) <= 0:
            raise StripViolation("CGMY power base left the right half plane")
        gam = _gamma_fn(-self.y)
        return -self.c * gam * (
            np.power(base_m, self.y) - self.m**self.y
            + np.power(base_g, self.y) - self.g**self.y
        )


def _phi_at_minus_i(kind: str, params: dict) -> float:
    if kind == "gaussian":
        return -0.5 * params["sigma"] ** 2
    if kind == "nig":
        a, b, d = params["alpha"], params["beta"], params["delta"]
        return d * (math.sqrt(a**2 - (b + 1) ** 2) - math.sqrt(a**2 - b**2))
    if kind == "cgmy":
        c, g, m, y = params["c"], params["g"], params["m"], params["y"]
        gam = _gamma_fn(-y)
        return -c * gam * ((m - 1) ** y - m**y + (g + 1) ** y - g**y)
    raise InvalidModel(f"unknown model kind {kind!r}")


def make_gaussian(sigma: float, r: float, strip_proxy: float = GAUSSIAN_STRIP_PROXY) -> GaussianModel:
    """Black-Scholes dynamics with the mean-correcting martingale drift."""
    mu = r + _phi_at_minus_i("gaussian", {"sigma": sigma})
    model = GaussianModel(mu=mu, r=r, sigma=sigma, strip_proxy=strip_proxy)
    _assert_emm(model)
    return model


def make_nig(alpha: float, beta: float, delta: float, r: float) -> NIGModel:
    """Normal inverse Gaussian model, mean-corrected to the pricing measure."""
    probe = NIGModel(mu=0.0, r=r, alpha=alpha, beta=beta, delta=delta)  # validates
    mu = r + _phi_at_minus_i("nig", {"alpha": alpha, "beta": beta, "delta": delta})
    model = NIGModel(mu=mu, r=r, alpha=probe.alpha, beta=probe.beta, delta=probe.delta)
    _assert_emm(model)
    return model


def make_cgmy(c: float, g: float, m: float, y: float, r: float) -> CGMYModel:
    """CGMY model, mean-corrected; activity y in ]0,1[ or ]1,2[ and m > 1."""
    probe = CGMYModel(mu=0.0, r=r, c=c, g=g, m=m, y=y)  # validates
    mu = r + _phi_at_minus_i("cgmy", {"c": c, "g": g, "m": m, "y": y})
    model = CGMYModel(mu=mu, r=r, c=probe.c, g=probe.g, m=probe.m, y=probe.y)
    _assert_emm(model)
    return model


def make_model(kind: str, params: dict, r: float) -> LevyModel:
    """Generic constructor used by the JSON front end."""
    kind = kind.lower()
    if kind == "gaussian":
        return make_gaussian(params["sigma"], r, params.get("strip_proxy", GAUSSIAN_STRIP_PROXY))
    if kind == "nig":
        return make_nig(params["alpha"], params["beta"], params["delta"], r)
    if kind == "cgmy":
        return make_cgmy(params["c"], params["g"], params["m"], params["y"], r)
    raise InvalidModel(f"unknown model kind {kind!r}")


def _assert_emm(model: LevyModel) -> None:
    res = model.emm_residual()
    if res > EMM_TOL:
        raise InvalidModel(f"martingale residual {res:g} exceeds {EMM_TOL:g}")


def esscher_calibrate(historic: LevyModel, r: float) -> LevyModel:
    """Exponential-tilt change of measure to the martingale measure.

    Solves psi_P(-ih) - psi_P(-ih - i) = r for the tilt h, then returns the
    model whose exponent is psi_P(. - ih) - psi_P(-ih).  For each supported
    family the tilted process stays in the family: Gaussian keeps sigma and
    gains drift sigma^2 h, NIG shifts beta by h, CGMY shifts (g, m) by
    (+h, -h).  The historic model may carry any drift.
    """
    lo_strip, hi_strip = historic.strip
    lo, hi = -hi_strip, -lo_strip - 1.0  # both -ih and -ih-i must stay inside
    if not lo < hi:
        raise NoRoot("strip too narrow to tilt: no admissible h interval")
    pad = 1e-9 * (hi - lo)
    lo, hi = lo + pad, hi - pad

    def residual(h: float) -> float:
        return (historic.psi(-1j * h) - historic.psi(-1j * h - 1j)).real - r

    grid = np.linspace(lo, hi, 257)
    vals = np.array([residual(h) for h in grid])
    sign_change = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
    if vals[0] == 0.0:
        h_star = float(grid[0])
    elif len(sign_change) == 0:
        raise NoRoot("Esscher equation has no root inside the strip")
    else:
        k = int(sign_change[0])
        h_star = brentq(residual, grid[k], grid[k + 1], xtol=1e-14, rtol=8.9e-16)
    if abs(residual(h_star)) > EMM_TOL:
        raise NoRoot(f"Esscher residual {residual(h_star):g} above tolerance")

    if isinstance(historic, GaussianModel):
        tilted = GaussianModel(
            mu=historic.mu + historic.sigma**2 * h_star, r=r,
            sigma=historic.sigma, strip_proxy=historic.strip_proxy,
        )
    elif isinstance(historic, NIGModel):
        tilted = NIGModel(
            mu=historic.mu, r=r,
            alpha=historic.alpha, beta=historic.beta + h_star, delta=historic.delta,
        )
    elif isinstance(historic, CGMYModel):
        tilted = CGMYModel(
            mu=historic.mu, r=r,
            c=historic.c, g=historic.g + h_star, m=historic.m - h_star, y=historic.y,
        )
    else:
        raise InvalidModel(f"unsupported model type {type(historic).__name__}")
    _assert_emm(tilted)
    return tilted
