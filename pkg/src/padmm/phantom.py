"""Synthetic data generation: FLAIR brain phantom, coil maps, spiral mask.

The phantom is an ellipse composite: each region carries a tissue tag,
later regions paint over earlier ones, and the per-pixel signal comes
from the FLAIR sequence equation.  Tissue relaxation values follow the
BrainWeb-style table commonly used for 1.5 T simulations (CSF T1 fixed
at 2569 ms so the inversion time 1781 ms nulls it); cortical bone is an
approximate short-T2, low-density entry.  The acceptance checks depend
only on relative tissue contrast, not on these exact numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import dft2


@dataclass(frozen=True)
class TissueParams:
    rho: float   # relative spin density, a.u.
    t1: float    # ms
    t2: float    # ms


# Frozen ground-truth table for the simulator (1.5 T values).
TISSUES = {
    "background": TissueParams(rho=0.0, t1=1.0, t2=1.0),
    "csf": TissueParams(rho=1.0, t1=2569.0, t2=329.0),
    "gm": TissueParams(rho=0.86, t1=833.0, t2=83.0),
    "wm": TissueParams(rho=0.77, t1=500.0, t2=70.0),
    "bone": TissueParams(rho=0.12, t1=246.0, t2=0.9),
}

# FLAIR sequence timing (ms); TI = T1_csf * ln 2 nulls CSF.
TR_MS = 10000.0
TE_MS = 90.0
TI_MS = 1781.0


def flair_signal(rho, t1, t2, tr=TR_MS, te=TE_MS, ti=TI_MS):
    """FLAIR signal s = rho (1 - 2 e^{-TI/T1}) (1 - e^{-TR/T1}) e^{-TE/T2}."""
    return rho * (1.0 - 2.0 * np.exp(-ti / t1)) * (1.0 - np.exp(-tr / t1)) \
        * np.exp(-te / t2)


@dataclass(frozen=True)
class Ellipse:
    """Region in normalized [-1, 1]^2 coordinates, painter's order."""

    tissue: str
    cx: float
    cy: float
    a: float
    b: float
    angle_deg: float = 0.0


# Ellipse composite loosely shaped like an axial brain slice: skull,
# CSF layer, cortical GM shell, WM interior, CSF ventricles and a few
# deep GM structures for fine detail.
DEFAULT_ELLIPSES = (
    Ellipse("bone", 0.0, 0.0, 0.75, 0.95, 0.0),
    Ellipse("csf", 0.0, 0.0, 0.68, 0.88, 0.0),
    Ellipse("gm", 0.0, 0.0, 0.64, 0.84, 0.0),
    Ellipse("wm", 0.0, 0.0, 0.54, 0.74, 0.0),
    Ellipse("csf", -0.11, -0.05, 0.07, 0.24, 18.0),
    Ellipse("csf", 0.11, -0.05, 0.07, 0.24, -18.0),
    Ellipse("gm", 0.0, 0.28, 0.10, 0.13, 0.0),
    Ellipse("gm", -0.20, 0.35, 0.06, 0.09, 25.0),
    Ellipse("gm", 0.20, 0.35, 0.06, 0.09, -25.0),
    Ellipse("gm", 0.0, -0.48, 0.05, 0.05, 0.0),
    Ellipse("wm", 0.0, 0.05, 0.03, 0.03, 0.0),
)


@dataclass(frozen=True)
class PhantomSpec:
    size: int = 190
    ellipses: tuple = DEFAULT_ELLIPSES


@dataclass(frozen=True)
class SamplingSpec:
    fraction: float = 0.25
    turns: float = 12.0
    fraction_tol: float = 0.02
    sigma: float = 0.05
    noise_seed: int = 0

    def validate(self):
        if not 0.0 < self.fraction <= 1.0:
            raise ValueError("sampling fraction must lie in (0, 1]")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        return self


def _normalized_grid(size: int):
    ax = np.linspace(-1.0, 1.0, size)
    return np.meshgrid(ax, ax, indexing="xy")


def build_phantom(spec: PhantomSpec, tissues: dict = TISSUES) -> np.ndarray:
    """Rasterize the ellipse composite; real signal, max modulus 1."""
    x, y = _normalized_grid(spec.size)
    img = np.zeros((spec.size, spec.size), dtype=np.float64)
    for e in spec.ellipses:
        t = tissues[e.tissue]
        phi = math.radians(e.angle_deg)
        xr = (x - e.cx) * math.cos(phi) + (y - e.cy) * math.sin(phi)
        yr = (y - e.cy) * math.cos(phi) - (x - e.cx) * math.sin(phi)
        inside = (xr / e.a) ** 2 + (yr / e.b) ** 2 <= 1.0
        img[inside] = flair_signal(t.rho, t.t1, t.t2)
    peak = np.max(np.abs(img))
    if peak > 0:
        img = img / peak
    return img.astype(np.complex128)


def make_coil_maps(n: int, size: int, seed: int = 0) -> list:
    """Smooth synthetic complex sensitivity maps, deterministic per seed.

    Gaussian magnitude profiles centered around the field of view with a
    slowly varying phase; sum-of-squares magnitude stays well away from
    zero over the whole grid.
    """
    rng = np.random.default_rng(seed)
    x, y = _normalized_grid(size)
    maps = []
    for j in range(n):
        if n == 1:
            cx = cy = 0.0
        else:
            ang = 2.0 * math.pi * j / n + rng.uniform(-0.1, 0.1)
            cx, cy = 1.1 * math.cos(ang), 1.1 * math.sin(ang)
        width = 1.1 + rng.uniform(-0.05, 0.05)
        mag = np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * width ** 2))
        phase = rng.uniform(-math.pi, math.pi) \
            + 0.4 * (x * math.cos(j) + y * math.sin(j)) \
            + 0.15 * x * y
        maps.append((mag * np.exp(1j * phase)).astype(np.complex128))
    return maps


class MaskFractionError(RuntimeError):
    """Spiral parameter search could not reach the target coverage."""


def _stamp_spiral(size: int, turns: float, thickness: float) -> np.ndarray:
    """Centered one-armed Archimedean spiral with given line thickness."""
    center = (size - 1) / 2.0
    r_max = math.sqrt(2.0) * size / 2.0
    theta_max = 2.0 * math.pi * turns
    half = thickness / 2.0
    win = max(int(math.ceil(half)), 0)

    # uniform theta sampling fine enough for ~0.3 px arc steps outermost
    n_samples = max(int(theta_max * r_max / 0.3), 64)
    theta = np.linspace(0.0, theta_max, n_samples)
    r = r_max * theta / theta_max
    px = center + r * np.cos(theta)
    py = center + r * np.sin(theta)
    i0 = np.rint(py).astype(np.int64)
    j0 = np.rint(px).astype(np.int64)

    mask = np.zeros((size, size), dtype=bool)
    for di in range(-win, win + 1):
        for dj in range(-win, win + 1):
            i, j = i0 + di, j0 + dj
            close = ((i - py) ** 2 + (j - px) ** 2) <= half ** 2 + 0.25
            keep = close & (i >= 0) & (i < size) & (j >= 0) & (j < size)
            mask[i[keep], j[keep]] = True
    mask[int(round(center)), int(round(center))] = True
    return mask


def spiral_mask(spec: SamplingSpec, size: int) -> np.ndarray:
    """Binary k-space mask with DC at index [0, 0].

    Line thickness is found by bisection so the covered fraction lands
    within ``fraction_tol`` of the target; deterministic, seed-free.
    """
    spec.validate()
    if spec.fraction >= 1.0:
        return np.ones((size, size), dtype=np.float64)

    lo, hi = 0.0, 1.0
    # grow hi until coverage overshoots the target
    for _ in range(20):
        if _stamp_spiral(size, spec.turns, hi).mean() >= spec.fraction:
            break
        hi *= 2.0
    else:
        raise MaskFractionError("spiral cannot reach the requested fraction")

    best = None
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        m = _stamp_spiral(size, spec.turns, mid)
        frac = m.mean()
        if abs(frac - spec.fraction) <= spec.fraction_tol:
            best = m
            break
        if frac < spec.fraction:
            lo = mid
        else:
            hi = mid
    if best is None:
        raise MaskFractionError(
            f"search ended {abs(frac - spec.fraction):.3f} away from target"
        )
    centered = best.astype(np.float64)
    return np.fft.ifftshift(centered)


def simulate_kspace(phantom: np.ndarray, coil_maps, mask: np.ndarray,
                    sigma: float, seed: int):
    """Sub-sampled noisy k-space per coil.

    f_j = S F(phantom * c_j) + noise, with independent real and
    imaginary Gaussian components of standard deviation sigma on the
    sampled bins only; off-mask bins are exactly zero.
    """
    rng = np.random.default_rng(seed)
    data = []
    for c in coil_maps:
        ksp = mask * dft2(phantom * c)
        if sigma > 0:
            noise = sigma * (rng.standard_normal(mask.shape)
                             + 1j * rng.standard_normal(mask.shape))
            ksp = ksp + mask * noise
        data.append(ksp)
    return data
