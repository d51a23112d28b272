"""Test-patch plus random train/validation partition of a feature grid."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..features import FeatureGrid
from ..gbdt import TrainingSet
from ..sardata import HeightRaster


@dataclass(frozen=True)
class SplitSpec:
    """``test_patch`` is ``(row0, col0, rows, cols)`` in valid-grid coordinates.

    With ``block_size`` set, validation pixels are drawn as whole square
    blocks instead of individually.
    """

    test_patch: tuple[int, int, int, int]
    validation_fraction: float = 0.2
    seed: int = 0
    block_size: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "test_patch", tuple(int(v) for v in self.test_patch))
        if not 0 < self.validation_fraction < 1:
            raise ValueError("validation_fraction must be in (0, 1)")
        if min(self.test_patch[2:]) < 1:
            raise ValueError("test patch must be non-empty")

    @classmethod
    def from_scene_patch(cls, scene_patch, valid_offset: int, **kwargs) -> "SplitSpec":
        """Translate a patch given in scene pixel coordinates to grid coordinates."""
        r0, c0, h, w = scene_patch
        return cls((r0 - valid_offset, c0 - valid_offset, h, w), **kwargs)

    def patch_mask(self, shape) -> np.ndarray:
        r0, c0, h, w = self.test_patch
        if r0 < 0 or c0 < 0 or r0 + h > shape[0] or c0 + w > shape[1]:
            raise ValueError(f"test patch {self.test_patch} outside the {shape[0]}x{shape[1]} grid")
        mask = np.zeros(shape, dtype=bool)
        mask[r0 : r0 + h, c0 : c0 + w] = True
        return mask


def split_indices(shape, spec: SplitSpec):
    """Flat pixel indices ``(train, validation, test)``; test is row-major within the patch."""
    mask = spec.patch_mask(shape)
    test = np.flatnonzero(mask)
    rest = np.flatnonzero(~mask)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(spec.seed & (2**64 - 1))))
    if spec.block_size:
        b = int(spec.block_size)
        rows, cols = np.divmod(rest, shape[1])
        block_id = (rows // b) * (-(-shape[1] // b)) + cols // b
        blocks = np.unique(block_id)
        n_val_blocks = max(1, int(round(spec.validation_fraction * blocks.size)))
        val_blocks = rng.permutation(blocks)[:n_val_blocks]
        is_val = np.isin(block_id, val_blocks)
        return rest[~is_val], rest[is_val], test
    n_train = math.floor(round((1.0 - spec.validation_fraction) * rest.size, 9))
    perm = rng.permutation(rest.size)
    return np.sort(rest[perm[:n_train]]), np.sort(rest[perm[n_train:]]), test


def split_dataset(grid: FeatureGrid, targets: HeightRaster, spec: SplitSpec):
    if (grid.rows, grid.cols) != targets.shape or grid.valid_offset != targets.valid_offset:
        raise ValueError(
            f"feature grid {grid.rows}x{grid.cols} (offset {grid.valid_offset}) and targets "
            f"{targets.rows}x{targets.cols} (offset {targets.valid_offset}) are not aligned"
        )
    X = grid.as_matrix()
    y = targets.values.ravel().astype(np.float64)
    return tuple(TrainingSet(X[idx], y[idx]) for idx in split_indices(targets.shape, spec))
