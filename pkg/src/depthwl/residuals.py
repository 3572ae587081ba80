"""Depth Pearson residuals and downweighting.

A depth Pearson residual compares the empirical depth of an
observation with its depth under the fitted model,

    tau = (d_emp - d_model) / d_model**alpha,

so tau is zero when the sample agrees with the model at that point and
grows when it does not.  Weights map residuals to [0, 1]; the trimming
rule additionally zeroes any weight whose residual exceeds the sample
median of the residuals by more than ``xi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DprConfig",
    "WeightSpec",
    "ResidualVector",
    "dpr",
    "weight",
    "apply_trim",
    "check_weight_class",
    "WeightClassReport",
    "weight_config_to_dict",
    "weight_config_from_dict",
]

# Weight parameters minimizing the 95% error quantile in the original
# calibration study, keyed by the residual exponent alpha:
# (gamma, delta1, delta2, xi).
_OPTIMAL = {
    0.25: (0.1, 2.0, 3.0, 1.0),
    0.5: (0.3, 2.0, 9.0, 1.0),
    0.75: (0.3, 2.0, 9.0, 5.0),
    1.0: (0.3, 2.0, 9.0, 5.0),
}

ResidualVector = np.ndarray


@dataclass(frozen=True)
class DprConfig:
    """Exponent of the model-depth denominator.

    Values in (0, 1] are accepted.  General theory covers alpha < 3/4;
    for the Gaussian family every moment is finite and exponents up to
    1 remain valid.
    """

    alpha: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")


@dataclass(frozen=True)
class WeightSpec:
    """Weight family plus trimming constant.

    piecewise: w(tau) = (h(tau) + gamma) / (1 + gamma) with h equal to
    1 up to delta1, decreasing linearly to 0 at delta2, and 0 beyond;
    the floor gamma/(1+gamma) keeps every untrimmed weight positive.

    smooth_exp: w(tau) = exp(-a * tau**2), smooth with w(0)=1, w'(0)=0.

    ``trim_xi`` is the margin above the residual median beyond which
    weights are hard-zeroed.  Any positive value (including inf, which
    disables trimming) is accepted; 1 is the calibrated default for
    alpha <= 0.5.
    """

    family: str
    delta1: float | None = None
    delta2: float | None = None
    gamma: float | None = None
    a: float | None = None
    trim_xi: float = 1.0

    def __post_init__(self):
        if self.family == "piecewise":
            if self.delta1 is None or self.delta2 is None or self.gamma is None:
                raise ValueError("piecewise family requires delta1, delta2, gamma")
            if not 0.0 < self.delta1 < self.delta2:
                raise ValueError("piecewise family requires 0 < delta1 < delta2")
            if self.gamma < 0.0:
                raise ValueError("gamma must be >= 0")
            if self.a is not None:
                raise ValueError("'a' does not apply to the piecewise family")
        elif self.family == "smooth_exp":
            if self.a is None or self.a < 0.0:
                raise ValueError("smooth_exp family requires a >= 0")
            if any(v is not None for v in (self.delta1, self.delta2, self.gamma)):
                raise ValueError("delta1/delta2/gamma do not apply to smooth_exp")
        else:
            raise ValueError(f"unknown weight family: {self.family!r}")
        if not self.trim_xi > 0.0:
            raise ValueError("trim_xi must be positive")

    @classmethod
    def piecewise(cls, delta1: float, delta2: float, gamma: float,
                  trim_xi: float = 1.0) -> "WeightSpec":
        return cls("piecewise", delta1=delta1, delta2=delta2, gamma=gamma,
                   trim_xi=trim_xi)

    @classmethod
    def smooth_exp(cls, a: float, trim_xi: float = 1.0) -> "WeightSpec":
        return cls("smooth_exp", a=a, trim_xi=trim_xi)

    @classmethod
    def optimal(cls, alpha: float) -> "WeightSpec":
        """Calibrated piecewise parameters for the given exponent.

        Exact table entries exist for alpha in {0.25, 0.5, 0.75, 1};
        other exponents use the nearest tabulated value.
        """
        key = min(_OPTIMAL, key=lambda t: abs(t - alpha))
        gamma, d1, d2, xi = _OPTIMAL[key]
        return cls.piecewise(d1, d2, gamma, trim_xi=xi)


def dpr(d_emp, d_model, cfg: DprConfig):
    """Depth Pearson residual (d_emp - d_model) / d_model**alpha.

    ``d_model`` must be strictly positive: the Gaussian population
    depth is positive everywhere, so a nonpositive value signals an
    upstream bug rather than a data condition.
    """
    d_emp = np.asarray(d_emp, dtype=np.float64)
    d_model = np.asarray(d_model, dtype=np.float64)
    if np.any(d_model <= 0.0):
        raise ValueError("model depth must be strictly positive")
    if np.any(d_emp < 0.0):
        raise ValueError("empirical depth must be nonnegative")
    out = (d_emp - d_model) / d_model**cfg.alpha
    return float(out) if out.ndim == 0 else out


def weight(tau, spec: WeightSpec):
    """Evaluate the weight function of ``spec`` at residual(s) ``tau``."""
    tau = np.asarray(tau, dtype=np.float64)
    if spec.family == "piecewise":
        h = np.where(
            tau > spec.delta2,
            0.0,
            np.where(
                tau > spec.delta1,
                (spec.delta2 - tau) / (spec.delta2 - spec.delta1),
                1.0,
            ),
        )
        out = (h + spec.gamma) / (1.0 + spec.gamma)
    else:
        out = np.exp(-spec.a * tau**2)
    return float(out) if out.ndim == 0 else out


def apply_trim(tau, w, xi: float):
    """Zero the weights of residuals exceeding median(tau) + xi.

    The median of an even-length vector is the midpoint of the two
    central order statistics.  Entries at or below the threshold are
    returned unchanged, so at least half the weights always survive.
    """
    tau = np.asarray(tau, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if tau.size == 0:
        raise ValueError("empty residual vector")
    if tau.shape != w.shape:
        raise ValueError("residual and weight vectors must have equal length")
    if not xi > 0.0:
        raise ValueError("xi must be positive")
    threshold = np.median(tau) + xi
    return np.where(tau <= threshold, w, 0.0)


@dataclass(frozen=True)
class WeightClassReport:
    """Finite-difference conformance summary for a weight function.

    ``sup_first_order`` and ``sup_second_order`` are the grid maxima of
    |w'(t)(t+1)| and |w''(t)(t+2)^2|, the two boundedness conditions a
    twice-differentiable weight must satisfy.  ``differentiable`` is
    False for the piecewise family (kinks at delta1 and delta2 by
    construction); its derivative diagnostics are informational only.
    """

    w_at_zero: float
    dw_at_zero: float
    sup_first_order: float
    sup_second_order: float
    differentiable: bool
    kinks: tuple
    passes_smooth_conditions: bool


_FD_STEP = 1e-5
_DW_TOL = 1e-6


def check_weight_class(spec: WeightSpec, grid) -> WeightClassReport:
    """Probe weight-class conditions on a residual grid covering [-1, T].

    Derivatives use central differences with step 1e-5, whose O(step^2)
    error is far above machine noise, hence the 1e-6 acceptance
    tolerance on w'(0) for smooth families.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0 or grid.min() > -1.0 or grid.max() < 10.0:
        raise ValueError("grid must cover [-1, T] with T >= 10")
    h = _FD_STEP

    def d1(t):
        return (weight(t + h, spec) - weight(t - h, spec)) / (2.0 * h)

    def d2(t):
        return (weight(t + h, spec) - 2.0 * weight(t, spec)
                + weight(t - h, spec)) / h**2

    w0 = float(weight(0.0, spec))
    dw0 = float(d1(0.0))
    sup1 = float(np.max(np.abs(d1(grid) * (grid + 1.0))))
    sup2 = float(np.max(np.abs(d2(grid) * (grid + 2.0) ** 2)))
    differentiable = spec.family != "piecewise"
    kinks = () if differentiable else (spec.delta1, spec.delta2)
    passes = differentiable and abs(w0 - 1.0) <= _DW_TOL and abs(dw0) <= _DW_TOL
    return WeightClassReport(
        w_at_zero=w0,
        dw_at_zero=dw0,
        sup_first_order=sup1,
        sup_second_order=sup2,
        differentiable=differentiable,
        kinks=kinks,
        passes_smooth_conditions=passes,
    )


def weight_config_to_dict(spec: WeightSpec, cfg: DprConfig) -> dict:
    """Wire format: weight family, trimming constant and exponent."""
    d = {"family": spec.family, "xi": spec.trim_xi, "alpha": cfg.alpha}
    if spec.family == "piecewise":
        d.update(delta1=spec.delta1, delta2=spec.delta2, gamma=spec.gamma)
    else:
        d.update(a=spec.a)
    return d


def weight_config_from_dict(d: dict) -> tuple[WeightSpec, DprConfig]:
    cfg = DprConfig(float(d["alpha"]))
    xi = d.get("xi", 1.0)
    xi = float("inf") if xi in ("inf", None) else float(xi)
    family = d["family"]
    if family == "piecewise":
        spec = WeightSpec.piecewise(float(d["delta1"]), float(d["delta2"]),
                                    float(d["gamma"]), trim_xi=xi)
    elif family == "smooth_exp":
        spec = WeightSpec.smooth_exp(float(d["a"]), trim_xi=xi)
    else:
        raise ValueError(f"unknown weight family: {family!r}")
    return spec, cfg
