"""Random visibility masks and their application to observations.

A mask is a binary array over the image plane: 1 = visible, 0 = hidden.
The ratio is the fraction of the observation that is NOT visible. Units
(pixels or square patches) are hidden independently with probability
`ratio`. Hidden pixels are either zeroed or replaced with uniform noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .seeding import derive_seed, new_rng

GRANULARITIES = ("pixel", "patch")
FILL_MODES = ("zero", "uniform_noise")
SEED_POLICIES = ("fresh_per_visit", "fixed_per_observation")


@dataclass(frozen=True)
class MaskSpec:
    """How masks are drawn: ratio hidden, unit size, fill and seeding policy."""

    ratio: float = 0.4
    granularity: str = "pixel"
    patch_side: int = 8
    fill: str = "uniform_noise"
    policy: str = "fresh_per_visit"

    def __post_init__(self):
        if not 0.0 <= self.ratio <= 1.0:
            raise ConfigurationError(f"mask ratio must be in [0, 1], got {self.ratio}")
        if self.granularity not in GRANULARITIES:
            raise ConfigurationError(f"mask granularity must be one of {GRANULARITIES}")
        if self.fill not in FILL_MODES:
            raise ConfigurationError(f"mask fill must be one of {FILL_MODES}")
        if self.policy not in SEED_POLICIES:
            raise ConfigurationError(f"mask policy must be one of {SEED_POLICIES}")
        if self.granularity == "patch" and self.patch_side < 1:
            raise ConfigurationError("patch side must be a positive integer")

    def to_flat(self) -> dict[str, str]:
        return {
            "mask.ratio": repr(self.ratio),
            "mask.granularity": self.granularity,
            "mask.patch_side": str(self.patch_side),
            "mask.fill": self.fill,
            "mask.policy": self.policy,
        }

    @classmethod
    def from_flat(cls, kv: dict[str, str], prefix: str = "mask.") -> "MaskSpec":
        def get(key: str, default):
            return kv.get(prefix + key, default)

        return cls(
            ratio=float(get("ratio", 0.4)),
            granularity=str(get("granularity", "pixel")),
            patch_side=int(get("patch_side", 8)),
            fill=str(get("fill", "uniform_noise")),
            policy=str(get("policy", "fresh_per_visit")),
        )


@dataclass(frozen=True)
class Mask:
    """Binary visibility array (1 = visible) plus the seed that generated it."""

    values: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ConfigurationError("mask must be a 2-D array")


def _unit_grid(shape: tuple[int, int], spec: MaskSpec, rng: np.random.Generator) -> np.ndarray:
    h, w = shape
    if spec.granularity == "pixel":
        hidden = rng.random((h, w)) < spec.ratio
        return hidden
    side = spec.patch_side
    if h % side != 0 or w % side != 0:
        raise ConfigurationError(
            f"patch side {side} does not divide image shape {h}x{w}"
        )
    grid = rng.random((h // side, w // side)) < spec.ratio
    return np.kron(grid, np.ones((side, side), dtype=bool))


def sample_mask(
    shape: tuple[int, int],
    spec: MaskSpec,
    rng: np.random.Generator,
    seed: int | None = None,
) -> Mask:
    """Draw one mask; each unit hidden independently with probability `spec.ratio`."""
    hidden = _unit_grid(shape, spec, rng)
    return Mask(values=(~hidden).astype(np.uint8), seed=seed)


def sample_mask_batch(
    n: int, shape: tuple[int, int], spec: MaskSpec, rng: np.random.Generator
) -> np.ndarray:
    """(n, H, W) uint8 visibility stack sampled in one pass."""
    h, w = shape
    if spec.granularity == "pixel":
        hidden = rng.random((n, h, w)) < spec.ratio
    else:
        side = spec.patch_side
        if h % side != 0 or w % side != 0:
            raise ConfigurationError(
                f"patch side {side} does not divide image shape {h}x{w}"
            )
        grid = rng.random((n, h // side, w // side)) < spec.ratio
        hidden = np.kron(grid, np.ones((1, side, side), dtype=bool))
    return (~hidden).astype(np.uint8)


def observation_mask(
    shape: tuple[int, int], spec: MaskSpec, base_seed: int, observation_id: int
) -> tuple[Mask, np.random.Generator]:
    """Mask plus fill RNG for the fixed-per-observation policy.

    The same (base_seed, observation_id) always yields the same mask and
    the same noise fill, so repeated evaluation passes see identical inputs.
    """
    seed = derive_seed("obs-mask", base_seed, observation_id)
    rng = new_rng("obs-mask", base_seed, observation_id)
    return sample_mask(shape, spec, rng, seed=seed), rng


def apply_mask(
    image: np.ndarray,
    mask: Mask | np.ndarray,
    fill: str = "zero",
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Hide masked pixels of `image` ((H, W) or (..., H, W), mask shared across channels).

    Visible pixels are copied through untouched; hidden pixels become 0 or
    i.i.d. uniform [0, 1) noise.
    """
    values = mask.values if isinstance(mask, Mask) else mask
    if image.shape[-2:] != values.shape:
        raise ConfigurationError(
            f"mask shape {values.shape} does not match image spatial shape {image.shape[-2:]}"
        )
    if fill not in FILL_MODES:
        raise ConfigurationError(f"unknown fill mode {fill!r}")
    visible = values.astype(bool)
    if fill == "zero":
        return np.where(visible, image, np.zeros((), dtype=image.dtype))
    if rng is None:
        raise ConfigurationError("uniform_noise fill requires an rng")
    noise = rng.random(image.shape).astype(image.dtype, copy=False)
    return np.where(visible, image, noise)


def apply_mask_batch(
    images: np.ndarray,
    masks: np.ndarray,
    fill: str = "zero",
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Vectorized `apply_mask` over leading batch axes; masks are (B, H, W)."""
    if images.shape[-2:] != masks.shape[-2:] or images.shape[0] != masks.shape[0]:
        raise ConfigurationError(
            f"mask batch {masks.shape} incompatible with images {images.shape}"
        )
    if fill not in FILL_MODES:
        raise ConfigurationError(f"unknown fill mode {fill!r}")
    visible = masks.astype(bool)
    while visible.ndim < images.ndim:
        visible = visible[..., None] if images.shape[-1] != masks.shape[-1] else visible[:, None]
    visible = np.broadcast_to(visible.reshape(masks.shape[0], *([1] * (images.ndim - 3)), *masks.shape[-2:])
                              if images.ndim > 3 else visible, images.shape)
    if fill == "zero":
        return np.where(visible, images, np.zeros((), dtype=images.dtype))
    if rng is None:
        raise ConfigurationError("uniform_noise fill requires an rng")
    noise = rng.random(images.shape).astype(images.dtype, copy=False)
    return np.where(visible, images, noise)
