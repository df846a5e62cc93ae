"""Vector geometry, seeded random streams and uniform sphere sampling.

Everything in this module is deterministic: the only state lives in an
explicit ``RngStream``. Angles are radians throughout; degrees appear only
at the command-line boundary.

Sphere sampling uses the inverse-CDF construction and consumes exactly two
uniform draws per sample (``z = 2*u1 - 1``, ``phi = 2*pi*u2``), so a stream
replays identically whether samples are drawn one at a time or in blocks.
"""

import math
from dataclasses import dataclass
from typing import Iterator, List, Tuple, Union

import numpy as np

# Unit vectors are accepted when |norm^2 - 1| stays below this
UNIT_TOLERANCE: float = 1e-12

# Dot products this close to +/-1 are snapped onto it, so identical
# settings give an exact 1 regardless of rounding in the components
_SNAP: float = 8 * float(np.finfo(float).eps)

# Raw uniform draws consumed per sphere sample
DRAWS_PER_SPHERE_SAMPLE: int = 2

ComplexScalar = complex
"""Complex scalars are plain Python ``complex`` values."""

Vector = Union["UnitVector3", np.ndarray, Tuple[float, float, float]]


@dataclass(frozen=True)
class UnitVector3:
    """A direction on the unit sphere.

    Used for measurement settings and for the sampled shared direction.

    Attributes:
        x: First direction cosine.
        y: Second direction cosine.
        z: Third direction cosine.

    Raises:
        ValueError: If the components are not finite or not unit-norm
            within ``UNIT_TOLERANCE``.
    """

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        components = (self.x, self.y, self.z)
        if not all(math.isfinite(c) for c in components):
            raise ValueError(f"Non-finite unit vector components: {components}")
        norm_sq = self.x * self.x + self.y * self.y + self.z * self.z
        if abs(norm_sq - 1.0) > UNIT_TOLERANCE:
            raise ValueError(f"Vector {components} is not unit-norm (|v|^2 = {norm_sq!r})")

    @classmethod
    def normalized(cls, x: float, y: float, z: float) -> "UnitVector3":
        """Build a unit vector pointing along (x, y, z).

        Raises:
            ValueError: If the input is the zero vector or not finite.
        """
        norm = math.sqrt(x * x + y * y + z * z)
        if not math.isfinite(norm) or norm == 0.0:
            raise ValueError(f"Cannot normalize vector ({x}, {y}, {z})")
        return cls(x / norm, y / norm, z / norm)

    @classmethod
    def from_array(cls, values: Union[np.ndarray, List[float], Tuple[float, ...]]) -> "UnitVector3":
        x, y, z = (float(v) for v in values)
        return cls.normalized(x, y, z)

    @classmethod
    def planar(cls, angle: float) -> "UnitVector3":
        """Unit vector in the x-y plane at ``angle`` radians from x."""
        if not math.isfinite(angle):
            raise ValueError(f"Non-finite angle: {angle}")
        return cls(math.cos(angle), math.sin(angle), 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def __iter__(self) -> Iterator[float]:
        return iter(self.as_tuple())

    def __neg__(self) -> "UnitVector3":
        return UnitVector3(-self.x, -self.y, -self.z)


X_AXIS = UnitVector3(1.0, 0.0, 0.0)
Y_AXIS = UnitVector3(0.0, 1.0, 0.0)
Z_AXIS = UnitVector3(0.0, 0.0, 1.0)


class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    The generator is a PCG64 seeded from ``numpy.random.SeedSequence`` with
    the stream id (and any child path) as spawn key, so the same identity
    gives the same sequence in every process and thread layout. A stream is
    stateful: hand each worker its own, never share one concurrently.

    Args:
        seed: 64-bit master seed.
        stream_id: 64-bit stream identifier.
        path: Child indices appended by ``child``.
    """

    def __init__(self, seed: int, stream_id: int = 0, path: Tuple[int, ...] = ()) -> None:
        for label, value in (("seed", seed), ("stream_id", stream_id)):
            if not 0 <= int(value) < 2 ** 64:
                raise ValueError(f"{label} must be a 64-bit unsigned integer, got {value}")
        self.seed: int = int(seed)
        self.stream_id: int = int(stream_id)
        self.path: Tuple[int, ...] = tuple(int(p) for p in path)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,) + self.path)
        self._generator = np.random.Generator(np.random.PCG64(sequence))

    def child(self, index: int) -> "RngStream":
        """Independent stream derived from this one's identity, not its state."""
        return RngStream(self.seed, self.stream_id, self.path + (index,))

    def split(self, count: int) -> List["RngStream"]:
        """``count`` independent child streams, indices ``0 .. count-1``."""
        return [self.child(i) for i in range(count)]

    def random(self, size: Union[int, Tuple[int, ...], None] = None) -> Union[float, np.ndarray]:
        """Uniform draws in [0, 1)."""
        return self._generator.random(size)

    def integers(self, high: int, size: int) -> np.ndarray:
        """Uniform integers in [0, high)."""
        return self._generator.integers(0, high, size=size)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, path={self.path})"


def _sphere_from_uniforms(draws: np.ndarray) -> np.ndarray:
    z = 2.0 * draws[..., 0] - 1.0
    phi = 2.0 * math.pi * draws[..., 1]
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)


def sample_uniform_sphere(rng: RngStream) -> UnitVector3:
    """Draw one direction uniformly distributed on the unit sphere.

    Consumes exactly ``DRAWS_PER_SPHERE_SAMPLE`` uniform draws.
    """
    x, y, z = sample_uniform_sphere_many(rng, 1)[0]
    return UnitVector3(float(x), float(y), float(z))


def sample_uniform_sphere_many(rng: RngStream, size: int) -> np.ndarray:
    """Draw ``size`` uniform directions as a ``(size, 3)`` array.

    Row ``i`` equals the ``i``-th result of repeated ``sample_uniform_sphere``
    calls on the same stream.
    """
    draws = np.asarray(rng.random((size, DRAWS_PER_SPHERE_SAMPLE)))
    rows = _sphere_from_uniforms(draws)
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def _as_array(v: Vector) -> np.ndarray:
    if isinstance(v, UnitVector3):
        return v.as_array()
    return np.asarray(v, dtype=float)


def _snap_and_clamp(values: np.ndarray) -> np.ndarray:
    values = np.where(np.abs(values) >= 1.0 - _SNAP, np.sign(values), values)
    return np.clip(values, -1.0, 1.0)


def dot(u: Vector, v: Vector) -> float:
    """Dot product of two unit vectors, clamped to [-1, 1]."""
    a, b = _as_array(u), _as_array(v)
    value = a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    return float(_snap_and_clamp(np.asarray(value)))


def dot_rows(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Row-wise dot products of two ``(m, 3)`` arrays, clamped to [-1, 1]."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    values = u[:, 0] * v[:, 0] + u[:, 1] * v[:, 1] + u[:, 2] * v[:, 2]
    return _snap_and_clamp(values)


def cross(u: Vector, v: Vector) -> np.ndarray:
    """Cross product ``u x v``; its norm is the sine of the enclosed angle."""
    return np.cross(_as_array(u), _as_array(v))


def cross_rows(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.cross(np.asarray(u, dtype=float), np.asarray(v, dtype=float))


def relative_angle(u: Vector, v: Vector) -> float:
    """Angle between two unit vectors in [0, pi].

    Computed as ``atan2(|u x v|, u . v)``, which stays accurate near
    parallel and antiparallel settings where ``acos`` loses precision.
    """
    return float(math.atan2(float(np.linalg.norm(cross(u, v))), dot(u, v)))


def rotation_matrix(axis: Vector, angle: float) -> np.ndarray:
    """Rotation by ``angle`` radians about ``axis`` (Rodrigues' formula)."""
    k = _as_array(axis)
    k = k / np.linalg.norm(k)
    skew = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + math.sin(angle) * skew + (1.0 - math.cos(angle)) * (skew @ skew)


def rotate(matrix: np.ndarray, v: UnitVector3) -> UnitVector3:
    return UnitVector3.from_array(matrix @ v.as_array())
