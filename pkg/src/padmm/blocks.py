"""Block vectors: ordered stacks of complex arrays forming one variable.

A :class:`BlockVector` holds the primal stacks ``(u_0, ..., u_n)`` and
``(v_0, ..., v_2n)`` and the dual variable.  Blocks may be plain 2D
fields, gradient fields of shape ``(2, H, W)``, or any other complex
array; all vector-space operations act blockwise.
"""

from __future__ import annotations

import numpy as np


class BlockVector:
    """Immutable-by-convention tuple of complex numpy blocks."""

    __slots__ = ("blocks",)

    def __init__(self, blocks):
        self.blocks = tuple(np.asarray(b, dtype=np.complex128) for b in blocks)

    @classmethod
    def zeros(cls, shapes) -> "BlockVector":
        return cls([np.zeros(s, dtype=np.complex128) for s in shapes])

    @classmethod
    def zeros_like(cls, other: "BlockVector") -> "BlockVector":
        return cls.zeros(other.shapes)

    @property
    def shapes(self):
        return tuple(b.shape for b in self.blocks)

    def copy(self) -> "BlockVector":
        return BlockVector([b.copy() for b in self.blocks])

    def __len__(self):
        return len(self.blocks)

    def __getitem__(self, i):
        return self.blocks[i]

    def __add__(self, other):
        return BlockVector([a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        return BlockVector([a - b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, scalar):
        return BlockVector([scalar * b for b in self.blocks])

    __rmul__ = __mul__

    def __neg__(self):
        return BlockVector([-b for b in self.blocks])

    def inner(self, other: "BlockVector") -> complex:
        """Conjugate-linear in ``other``, summed over blocks."""
        return complex(
            sum(np.sum(a * np.conj(b)) for a, b in zip(self.blocks, other.blocks))
        )

    def norm(self) -> float:
        return float(np.sqrt(sum(np.sum(np.abs(b) ** 2) for b in self.blocks)))

    def isfinite(self) -> bool:
        return all(np.all(np.isfinite(b)) for b in self.blocks)

    def ravel(self) -> np.ndarray:
        """Flatten to one complex vector (dense test oracles)."""
        return np.concatenate([b.ravel() for b in self.blocks])

    @classmethod
    def from_ravel(cls, flat: np.ndarray, shapes) -> "BlockVector":
        blocks, pos = [], 0
        for s in shapes:
            n = int(np.prod(s))
            blocks.append(np.asarray(flat[pos : pos + n]).reshape(s))
            pos += n
        return cls(blocks)

    def __repr__(self):
        return f"BlockVector(shapes={self.shapes})"


def random_like(bv: BlockVector, rng: np.random.Generator) -> BlockVector:
    """Standard complex Gaussian vector with the layout of ``bv``."""
    return BlockVector(
        [
            rng.standard_normal(s) + 1j * rng.standard_normal(s)
            for s in bv.shapes
        ]
    )
