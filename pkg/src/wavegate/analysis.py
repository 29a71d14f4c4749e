"""Quantitative evaluation: sinc-width fits, phase-gradient fits, classical
fidelity between intensity distributions, and the dynamic-range figure of
merit."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .apparatus import FilterSpec, GateSpec
from .errors import GridError


@dataclass(frozen=True)
class FitReport:
    model: str  # "sinc_magnitude" | "linear_phase"
    params: dict
    window: tuple
    residual_rms: float
    converged: bool

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": dict(self.params),
            "window": list(self.window),
            "residual_rms": self.residual_rms,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class FidelityReport:
    value: float
    domain: str
    bin_count: int

    def to_dict(self) -> dict:
        return {"value": self.value, "domain": self.domain, "bin_count": self.bin_count}


def _abs_sinc(t, amp, t_c, width):
    # amp * |sinc(2*pi*(t - t_c)/width)| with sinc(x) = sin(x)/x
    return amp * np.abs(np.sinc(2.0 * (t - t_c) / width))


def fit_sinc_width(times: np.ndarray, magnitude: np.ndarray, init: dict | None = None) -> FitReport:
    """Least-squares fit of A*|sinc(2*pi*(t - t_c)/dt_width)| to a magnitude trace.

    A coarse grid over the width (50 points spanning +-50% of an
    energy-bandwidth initial guess) seeds a Nelder-Mead refinement on scaled
    parameters.  ``init`` may pre-seed any of ``amp``, ``t_c``, ``width``.
    """
    t = np.asarray(times, dtype=float)
    m = np.asarray(magnitude, dtype=float)
    if t.shape != m.shape or t.ndim != 1:
        raise GridError("times and magnitude must be 1-d arrays of the same length")
    if t.size < 8:
        raise GridError("too few samples for a sinc fit")
    amp0 = float(m.max())
    if not amp0 > float(m.min()) + 1e-300 or not amp0 > 0:
        raise GridError("magnitude trace is degenerate (flat)")

    init = dict(init or {})
    t_c0 = float(init.get("t_c", t[int(np.argmax(m))]))
    # energy equivalent width: integral m^2 dt = A^2 * width / 2 for |sinc|
    width0 = float(init.get("width", 2.0 * np.trapezoid(m**2, t) / amp0**2))
    amp0 = float(init.get("amp", amp0))

    best = None
    for width in np.linspace(0.5 * width0, 1.5 * width0, 50):
        g = np.abs(np.sinc(2.0 * (t - t_c0) / width))
        denom = float(np.sum(g * g))
        amp = float(np.sum(m * g)) / denom if denom > 0 else 0.0
        sse = float(np.sum((m - amp * g) ** 2))
        if best is None or sse < best[0]:
            best = (sse, amp, width)
    _, amp1, width1 = best

    p0 = np.array([amp1, t_c0, width1])
    scale = np.array([max(abs(amp1), 1e-12), max(abs(width1), 1e-12), max(abs(width1), 1e-12)])

    def cost(q):
        amp, t_c, width = q * scale
        if width <= 0:
            return np.inf
        return float(np.sum((m - _abs_sinc(t, amp, t_c, width)) ** 2))

    res = minimize(
        cost,
        p0 / scale,
        method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-24, "maxiter": 5000, "maxfev": 10000},
    )
    amp, t_c, width = res.x * scale
    rms = float(np.sqrt(cost(res.x) / t.size))
    return FitReport(
        model="sinc_magnitude",
        params={"amp": float(amp), "t_c": float(t_c), "width": float(abs(width))},
        window=(float(t.min()), float(t.max())),
        residual_rms=rms,
        converged=bool(res.success and np.isfinite(rms)),
    )


def fit_phase_gradient(
    times: np.ndarray,
    amplitudes: np.ndarray,
    window: tuple = (3.75, 5.75),
    magnitude_floor: float = 0.1,
) -> FitReport:
    """Weighted linear fit of the envelope phase over a time window.

    Samples below ``magnitude_floor`` of the window's peak magnitude are
    dropped.  The phase is unwrapped modulo pi (the envelope magnitude
    changes sign at its zeros, so the physically smooth quantity is the
    phase of psi^2), then regressed against time with |psi|^2 weights.
    """
    t = np.asarray(times, dtype=float)
    a = np.asarray(amplitudes, dtype=complex)
    lo, hi = window
    sel = (t >= lo) & (t <= hi)
    if not np.any(sel):
        raise GridError(f"window [{lo}, {hi}] contains no samples")
    t, a = t[sel], a[sel]
    mags = np.abs(a)
    floor = magnitude_floor * float(mags.max())
    keep = mags >= floor
    if np.count_nonzero(keep) < 4:
        raise GridError("fewer than 4 usable samples above the magnitude floor")
    t, a, mags = t[keep], a[keep], mags[keep]

    phase = np.unwrap(2.0 * np.angle(a)) / 2.0
    weights = mags  # polyfit squares its weights, giving |psi|^2
    kappa, intercept = np.polyfit(t, phase, 1, w=weights)
    resid = phase - (kappa * t + intercept)
    w2 = mags**2
    rms = float(np.sqrt(np.sum(w2 * resid**2) / np.sum(w2)))
    return FitReport(
        model="linear_phase",
        params={"kappa": float(kappa), "intercept": float(intercept)},
        window=(float(lo), float(hi)),
        residual_rms=rms,
        converged=True,
    )


def classical_fidelity(p: np.ndarray, q: np.ndarray, domain: str = "time") -> FidelityReport:
    """Bhattacharyya coefficient sum_j sqrt(p_j q_j) of two distributions.

    Inputs are clamped at zero (tiny negatives come from roundoff) and
    renormalized to unit sum before comparison.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise GridError("distributions must be 1-d arrays of the same length")
    for name, arr in (("p", p), ("q", q)):
        neg = -float(arr.min()) if arr.size else 0.0
        if neg > 1e-9 * max(float(np.abs(arr).max()), 1e-300):
            warnings.warn(f"clamping significant negative mass in {name}", stacklevel=2)
    p = np.clip(p, 0.0, None)
    q = np.clip(q, 0.0, None)
    ps, qs = p.sum(), q.sum()
    if ps <= 0 or qs <= 0:
        raise GridError("cannot compare an all-zero distribution")
    value = float(np.sum(np.sqrt((p / ps) * (q / qs))))
    return FidelityReport(value=min(value, 1.0), domain=domain, bin_count=p.size)


def rebin_density(values: np.ndarray, src_centers: np.ndarray, dst_centers: np.ndarray) -> np.ndarray:
    """Mass-conserving rebinning of a density between uniform grids.

    The source is read as piecewise constant over its bins; each destination
    bin receives the integrated mass it overlaps, divided by its own width.
    """
    values = np.asarray(values, dtype=float)
    src_centers = np.asarray(src_centers, dtype=float)
    dst_centers = np.asarray(dst_centers, dtype=float)
    ds = src_centers[1] - src_centers[0]
    dd = dst_centers[1] - dst_centers[0]
    src_edges = np.concatenate([src_centers - ds / 2.0, [src_centers[-1] + ds / 2.0]])
    cum = np.concatenate([[0.0], np.cumsum(values * ds)])

    def cdf(x):
        return np.interp(x, src_edges, cum)

    lo = dst_centers - dd / 2.0
    hi = dst_centers + dd / 2.0
    return (cdf(hi) - cdf(lo)) / dd


def fidelity_between(
    p_values: np.ndarray,
    p_centers: np.ndarray,
    q_values: np.ndarray,
    q_centers: np.ndarray,
    domain: str = "time",
) -> FidelityReport:
    """Fidelity of two densities on (possibly different) uniform grids.

    The finer distribution is rebinned onto the coarser grid first, so the
    comparison is made bin by bin at the coarser resolution.
    """
    dp = p_centers[1] - p_centers[0]
    dq = q_centers[1] - q_centers[0]
    if dp < dq:
        p_on_q = rebin_density(p_values, p_centers, q_centers)
        return classical_fidelity(p_on_q, q_values, domain=domain)
    q_on_p = rebin_density(q_values, q_centers, p_centers)
    return classical_fidelity(p_values, q_on_p, domain=domain)


def dynamic_range(filt: FilterSpec, gate: GateSpec) -> float:
    """Measurable window over time resolution: (4*pi/delta_w) / gate FWHM.

    The window is the spacing of the reference sinc's central zeros; the
    ratio is undefined for the ideal delta gate.
    """
    if gate.shape == "delta":
        raise GridError("dynamic range is undefined for a delta gate")
    return (4.0 * np.pi / filt.delta_w) / gate.fwhm_ps
