"""Step systems for walks on periodic structures.

A walk draws its increments from one or two finite direction families: a
single family U for one-stream walks ("type 1"), or an ordered pair (U, W)
for two-stream walks ("type 2") that strictly alternate between families.
This module owns the geometry: construction and validation of step
families, a registry of worked example systems, and the first two moments
of a uniformly drawn step, which all asymptotic formulas are built from.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParseError, UnknownPresetError

RANK_TOLERANCE = 1e-9
COINCIDENCE_TOLERANCE = 1e-9
DEFAULT_PROBE_DEPTH = 3


class WalkType(enum.Enum):
    TYPE1 = "type1"
    TYPE2 = "type2"


@dataclass(frozen=True)
class StepSet:
    """An ordered family of m >= 2 step vectors in R^d."""

    vectors: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.vectors, dtype=float)
        if arr.ndim != 2:
            raise ParseError("step family must be a rectangular array of shape (m, d)")
        if arr.shape[1] < 1:
            raise ParseError("step vectors need at least one coordinate")
        if arr.shape[0] < 2:
            raise DomainError("a step family needs at least two directions (m >= 2)")
        if not np.all(np.isfinite(arr)):
            raise ParseError("step vectors must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "vectors", arr)

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]


def mean_step(steps: StepSet) -> np.ndarray:
    """Mean of a uniformly drawn step vector."""
    return steps.vectors.mean(axis=0)


def step_covariance(steps: StepSet) -> np.ndarray:
    """Covariance of a uniformly drawn step vector, (1/m) sum (u - mean)(u - mean)^T."""
    centered = steps.vectors - mean_step(steps)
    return centered.T @ centered / steps.size


@dataclass(frozen=True)
class LatticeSpec:
    """A walk specification: step families, walk type, and first directions.

    i0 and j0 are 0-based indices into U and W giving the deterministic
    first direction of each stream.  Type 1 walks use a single family, so
    W must equal U element-wise.
    """

    name: str
    walk_type: WalkType
    u: StepSet
    w: StepSet
    i0: int = 0
    j0: int = 0

    def __post_init__(self):
        if self.u.dimension != self.w.dimension:
            raise DomainError("U and W live in different dimensions")
        if self.walk_type is WalkType.TYPE1 and not (
            self.u.size == self.w.size
            and np.array_equal(self.u.vectors, self.w.vectors)
        ):
            raise DomainError("a type 1 walk uses a single family; W must equal U")
        if not 0 <= self.i0 < self.u.size:
            raise DomainError(f"i0 = {self.i0} is not a valid index into U")
        if not 0 <= self.j0 < self.w.size:
            raise DomainError(f"j0 = {self.j0} is not a valid index into W")

    @property
    def dimension(self) -> int:
        return self.u.dimension

    @property
    def m(self) -> int:
        return self.u.size

    @property
    def m_prime(self) -> int:
        return self.w.size


def make_spec(
    name: str,
    walk_type: WalkType,
    u,
    w=None,
    i0: int = 0,
    j0: int = 0,
) -> LatticeSpec:
    """Build a LatticeSpec; omitting w reuses u for both families."""
    u_set = u if isinstance(u, StepSet) else StepSet(np.asarray(u, dtype=float))
    if w is None:
        w_set = u_set
    else:
        w_set = w if isinstance(w, StepSet) else StepSet(np.asarray(w, dtype=float))
    return LatticeSpec(name=name, walk_type=walk_type, u=u_set, w=w_set, i0=i0, j0=j0)


def parse_spec(document) -> LatticeSpec:
    """Parse a JSON lattice document (dict or JSON text) into a LatticeSpec.

    Schema: {name, walk_type: "type1"|"type2", u: [[...], ...],
    w (optional, defaults to u), i0 (optional), j0 (optional),
    dimension (optional, checked against the vectors)}.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ParseError("lattice document must be a JSON object")

    def pull(key, kind, required=True, default=None):
        if key not in document:
            if required:
                raise ParseError(f"missing field '{key}'")
            return default
        value = document[key]
        if kind is not None and not isinstance(value, kind):
            raise ParseError(f"field '{key}' has the wrong type")
        return value

    name = pull("name", str)
    walk_type_raw = pull("walk_type", str)
    try:
        walk_type = WalkType(walk_type_raw)
    except ValueError:
        raise ParseError(
            f"field 'walk_type' must be 'type1' or 'type2', got {walk_type_raw!r}"
        ) from None
    u_raw = pull("u", list)
    w_raw = pull("w", list, required=False)
    i0 = pull("i0", int, required=False, default=0)
    j0 = pull("j0", int, required=False, default=0)
    try:
        u_arr = np.asarray(u_raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"field 'u' is not a numeric matrix: {exc}") from exc
    if w_raw is None:
        w_arr = None
    else:
        try:
            w_arr = np.asarray(w_raw, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"field 'w' is not a numeric matrix: {exc}") from exc
    dim = pull("dimension", int, required=False)
    if dim is not None and (u_arr.ndim != 2 or u_arr.shape[1] != dim):
        raise ParseError("field 'dimension' disagrees with the step vectors")
    if walk_type is WalkType.TYPE1 and w_arr is not None:
        if u_arr.shape != w_arr.shape or not np.array_equal(u_arr, w_arr):
            raise ParseError("type 1 uses a single family; omit 'w' or repeat 'u'")
    return make_spec(name, walk_type, u_arr, w_arr, i0=i0, j0=j0)


def to_document(spec: LatticeSpec) -> dict:
    """Inverse of parse_spec (up to float representation)."""
    return {
        "name": spec.name,
        "dimension": spec.dimension,
        "walk_type": spec.walk_type.value,
        "u": spec.u.vectors.tolist(),
        "w": spec.w.vectors.tolist(),
        "i0": spec.i0,
        "j0": spec.j0,
    }


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of structural checks on a LatticeSpec.

    bipartite_ok is None when not applicable (type 1 walks).  Callers
    decide whether a failed check aborts their workflow.
    """

    rank_ok: bool
    bipartite_ok: bool | None
    probe_depth: int
    singular_values: tuple[float, ...]
    messages: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return self.rank_ok and self.bipartite_ok is not False


def validate(
    spec: LatticeSpec,
    probe_depth: int = DEFAULT_PROBE_DEPTH,
    rank_tolerance: float = RANK_TOLERANCE,
    coincidence_tolerance: float = COINCIDENCE_TOLERANCE,
) -> ValidationReport:
    """Check that the combined family spans R^d and, for type 2 walks, that
    the balanced-word sublattice and its U-shift do not collide up to
    probe_depth double-steps."""
    if probe_depth < 1:
        raise DomainError("probe_depth must be at least 1")
    messages = []

    if spec.walk_type is WalkType.TYPE2:
        stacked = np.vstack([spec.u.vectors, spec.w.vectors])
    else:
        stacked = spec.u.vectors
    svals = np.linalg.svd(stacked, compute_uv=False)
    d = spec.dimension
    rank_ok = len(svals) >= d and svals[d - 1] > rank_tolerance * svals[0]
    if not rank_ok:
        messages.append(
            f"step family does not span R^{d}: singular values {svals.tolist()}"
        )

    bipartite_ok: bool | None = None
    if spec.walk_type is WalkType.TYPE2:
        bipartite_ok = _bipartite_probe(spec, probe_depth, coincidence_tolerance)
        if not bipartite_ok:
            messages.append(
                "balanced-word lattice meets its U-shift within "
                f"{coincidence_tolerance:g} at probe depth {probe_depth}; "
                "even and odd positions are not separated"
            )

    return ValidationReport(
        rank_ok=rank_ok,
        bipartite_ok=bipartite_ok,
        probe_depth=probe_depth,
        singular_values=tuple(float(s) for s in svals),
        messages=tuple(messages),
    )


def _compositions(total: int, parts: int):
    """All tuples of `parts` nonnegative ints summing to `total`."""
    for cuts in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for c in cuts:
            out.append(c - prev - 1)
            prev = c
        out.append(total + parts - 2 - prev)
        yield tuple(out)


def _bipartite_probe(spec: LatticeSpec, depth: int, tol: float) -> bool:
    """Enumerate balanced-word points and check they avoid their U-shift."""
    u = spec.u.vectors
    w = spec.w.vectors
    base = []
    for r in range(depth + 1):
        u_sums = [np.asarray(cu, dtype=float) @ u for cu in _compositions(r, spec.m)]
        w_sums = [np.asarray(cw, dtype=float) @ w for cw in _compositions(r, spec.m_prime)]
        for pu in u_sums:
            for pw in w_sums:
                base.append(pu + pw)
    base = np.unique(np.asarray(base), axis=0)

    # Bucket the balanced points on a tol-grid; a shifted point collides iff
    # some balanced point sits in its own or a neighboring bucket.
    scale = 1.0 / tol
    buckets = {}
    for point in base:
        buckets.setdefault(tuple(np.rint(point * scale).astype(np.int64)), []).append(point)
    offsets = list(itertools.product((-1, 0, 1), repeat=spec.dimension))
    for point in base:
        for uvec in u:
            shifted = point + uvec
            cell = np.rint(shifted * scale).astype(np.int64)
            for off in offsets:
                hits = buckets.get(tuple(cell + np.asarray(off, dtype=np.int64)))
                if not hits:
                    continue
                for candidate in hits:
                    if np.max(np.abs(candidate - shifted)) < tol:
                        return False
    return True


_SQRT3 = math.sqrt(3.0)


def _signed_pairs(vectors) -> np.ndarray:
    out = []
    for v in vectors:
        arr = np.asarray(v, dtype=float)
        out.append(arr)
        out.append(-arr)
    return np.asarray(out)


def _preset_zd(d: int) -> LatticeSpec:
    if d < 1:
        raise DomainError("zd presets need dimension >= 1")
    axes = [np.eye(d)[k] for k in range(d)]
    return make_spec(f"zd{d}", WalkType.TYPE1, _signed_pairs(axes))


def _preset_triangular() -> LatticeSpec:
    u = _signed_pairs([(1.0, 0.0), (0.5, 0.5 * _SQRT3), (-0.5, 0.5 * _SQRT3)])
    return make_spec("triangular", WalkType.TYPE1, u)


def _preset_hexagonal() -> LatticeSpec:
    u = np.asarray([(0.0, 1.0), (0.5 * _SQRT3, -0.5), (-0.5 * _SQRT3, -0.5)])
    return make_spec("hexagonal", WalkType.TYPE2, u, -u)


def _preset_brick_wall() -> LatticeSpec:
    u = [(1.0, 0.0), (-1.0, 0.0), (0.0, -1.0)]
    w = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0)]
    return make_spec("brick_wall", WalkType.TYPE2, u, w)


def _preset_example5() -> LatticeSpec:
    u = _signed_pairs([(1.0, 2.0), (1.0, -2.0)])
    w = _signed_pairs([(1.0, 0.0), (0.0, 1.0)])
    return make_spec("example5", WalkType.TYPE2, u, w)


def _preset_example6() -> LatticeSpec:
    u = np.asarray([(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 2.0)])
    w = _signed_pairs([(1.0, 0.0), (0.0, 1.0)])
    return make_spec("example6", WalkType.TYPE2, u, w)


_PRESETS = {
    "triangular": _preset_triangular,
    "hexagonal": _preset_hexagonal,
    "brick_wall": _preset_brick_wall,
    "example5": _preset_example5,
    "example6": _preset_example6,
}

_ZD_PATTERN = re.compile(r"^zd\(?(\d+)\)?$")


def preset_names() -> tuple[str, ...]:
    """Registered preset names (zd presets shown for d = 1, 2, 3)."""
    return ("zd1", "zd2", "zd3") + tuple(sorted(_PRESETS))


def preset(name: str) -> LatticeSpec:
    """Look up a worked example system by name ('zd2' and 'zd(2)' both work)."""
    match = _ZD_PATTERN.match(name.strip().lower())
    if match:
        return _preset_zd(int(match.group(1)))
    builder = _PRESETS.get(name.strip().lower())
    if builder is None:
        raise UnknownPresetError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        )
    return builder()
