from fractions import Fraction
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PlainSerializer, SkipValidation

from billiards.modules.geomcore import Direction, Isometry, Point, Scalar, Segment, same_direction


def scalar_record(x) -> dict:
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        x = Fraction(x)
        return {"exact": f"{x.numerator}/{x.denominator}", "float": float(x)}
    return {"float": float(x)}


def point_record(p) -> dict:
    return {"x": scalar_record(p[0]), "y": scalar_record(p[1])}


def direction_record(d) -> dict:
    return {"dx": scalar_record(d[0]), "dy": scalar_record(d[1]), "angle": Direction(*d).angle}


def segment_record(s) -> dict:
    return {"a": point_record(s[0]), "b": point_record(s[1])}


def isometry_record(g) -> dict:
    return {
        "matrix": [[scalar_record(g.a), scalar_record(g.b)], [scalar_record(g.c), scalar_record(g.d)]],
        "translation": [scalar_record(g.tx), scalar_record(g.ty)],
    }


ScalarField = Annotated[Scalar, SkipValidation, PlainSerializer(scalar_record)]
PointField = Annotated[Point, SkipValidation, PlainSerializer(point_record)]
DirectionField = Annotated[Direction, SkipValidation, PlainSerializer(direction_record)]
SegmentField = Annotated[Segment, SkipValidation, PlainSerializer(segment_record)]
IsometryField = Annotated[Isometry, SkipValidation, PlainSerializer(isometry_record)]


class Record(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class FloorSet(Record):
    base: DirectionField
    directions: Tuple[DirectionField, ...]
    floor_count: int
    bound: int

    def index_of(self, d) -> Optional[int]:
        for i, member in enumerate(self.directions):
            if same_direction(member, d):
                return i
        return None

    def __contains__(self, d) -> bool:
        return self.index_of(d) is not None


class PhasePoint(Record):
    q: PointField
    v: DirectionField
    floor_index: Optional[int] = None


class BounceEvent(Record):
    hit: PointField
    side_index: int
    incoming: DirectionField
    outgoing: DirectionField
    singular: bool = False
    vertex_index: Optional[int] = None
    # sides the unfolded line crosses at this event; one entry unless singular
    crossed: Tuple[int, ...] = ()

    def state(self) -> PhasePoint:
        return PhasePoint(q=self.hit, v=self.outgoing)


class Period(Record):
    period_links: int
    period_length: float


class Orbit(Record):
    start: PhasePoint
    events: Tuple[BounceEvent, ...]
    links: Tuple[SegmentField, ...]
    geometric_length: float
    periodic: Optional[Period] = None

    @property
    def word(self) -> List[int]:
        return [side for e in self.events for side in e.crossed]

    def period_events(self) -> Tuple[BounceEvent, ...]:
        if self.periodic is None:
            return self.events
        return self.events[: self.periodic.period_links]


class Cone(Record):
    """Open cone of rays from `apex`, swept counterclockwise from `lo` to `hi`."""

    apex: PointField
    lo: DirectionField
    hi: DirectionField


class Corridor(Record):
    """copies[k+1] = copies[k] ∘ reflection in side word[k]; copies[0] is the identity."""

    word: Tuple[int, ...]
    copies: Tuple[IsometryField, ...]
    apex_vertex: Optional[int] = None
    # rays from the apex vertex that pass through every copy; absent for the corridor of a single orbit
    beam: Optional[Cone] = None

    def __len__(self):
        return len(self.word)


class GeneralizedDiagonal(Record):
    start_vertex: int
    end_vertex_copy: Tuple[int, int]
    link_count: int
    direction: DirectionField
    unfolded_segment: SegmentField
    word: Tuple[int, ...]

    @property
    def end_vertex(self) -> int:
        return self.end_vertex_copy[1]

    def key(self) -> tuple:
        """Identity up to reversal."""
        forward = (self.start_vertex, self.word, self.end_vertex)
        backward = (self.end_vertex, tuple(reversed(self.word)), self.start_vertex)
        return min(forward, backward)


class BranchReport(Record):
    j_fwd: int
    j_bwd: int
    vertex_fwd: Optional[PointField] = None
    vertex_bwd: Optional[PointField] = None
    diagonal: Optional[GeneralizedDiagonal] = None


class Cylinder(Record):
    word: Tuple[int, ...]
    entry_side: int
    direction: DirectionField
    translation: DirectionField
    # the open strip is bounded by the lines through these two points of the entry side
    strip: Tuple[PointField, PointField]
    width: float
    representative: PhasePoint
    period_links: int
    period_length: float

    def key(self) -> tuple:
        return canonical_word(self.word)


def canonical_word(word) -> tuple:
    """Smallest rotation of the word or of its reversal."""
    word = tuple(word)
    candidates = []
    for w in (word, tuple(reversed(word))):
        candidates.extend(w[i:] + w[:i] for i in range(len(w)))
    return min(candidates)


class PerpendicularOutcome(Record):
    kind: Literal["periodic", "singular", "undecided"]
    foot: PointField
    links_used: int
    orbit: Optional[Orbit] = None
    diagonal: Optional[GeneralizedDiagonal] = None


class FootInterval(Record):
    lo: ScalarField
    hi: ScalarField
    period_links: Optional[int] = None
    samples: int = 0


class PerpScanResult(Record):
    side_index: int
    periodic_feet: Tuple[FootInterval, ...]
    singular_feet: Tuple[PointField, ...]
    periodic_samples: int
    singular_samples: int
    undecided_samples: int


class CoverageSample(Record):
    point: PointField
    covering_sides: Tuple[int, ...]

    @property
    def covered(self) -> bool:
        return len(self.covering_sides) >= 1

    @property
    def double_covered(self) -> bool:
        return len(self.covering_sides) >= 2


class ExceptionalSetReport(Record):
    segments: Tuple[SegmentField, ...]
    candidate_points: Optional[Tuple[PointField, ...]] = None
    samples: Tuple[CoverageSample, ...] = ()


class BasisRegion(Record):
    center: PointField
    q: int
    s: int
    diameter: ScalarField
    area_fraction: float

    @property
    def radius(self) -> Fraction:
        return self.diameter / 2


class RegionDiscrepancy(Record):
    region: BasisRegion
    length_fraction: float
    area_fraction: float
    discrepancy: float


class DiscrepancyReport(Record):
    epsilon: ScalarField
    per_region: Tuple[RegionDiscrepancy, ...]
    sup_discrepancy: float
    well_distributed: bool


class DensityReport(Record):
    epsilon: ScalarField
    uncovered_witness: Optional[PointField] = None
    witness_distance: Optional[float] = None
    floor_index: Optional[int] = None
    dense: bool
    grid_spacing: ScalarField


class CoveredPoint(Record):
    point: PointField
    cylinder: int
    direction: DirectionField
    open_radius: float
    sup_discrepancy: float


class ScanReport(Record):
    theta: float
    delta: float
    epsilon: ScalarField
    sampled: int
    covered: Tuple[CoveredPoint, ...]
    coverage_fraction: float
    strips: Tuple[Cylinder, ...]
    nodes_expanded: int


class NearbyPeriodicPoint(Record):
    cylinder: Cylinder
    distance: float
    folded_direction: DirectionField


class CEpsilonCandidate(Record):
    direction: DirectionField
    orbit: Orbit
    witness: DensityReport
    diagonal: GeneralizedDiagonal


class WindowCover(Record):
    start_link: int
    length: int
    sup_discrepancy: float


class UnfoldReport(Record):
    corridor: Corridor
    segment: SegmentField
    links: Tuple[SegmentField, ...]
    residual: float


class LShapeReport(Record):
    k: int
    links: int
    period_length: float
    avoids_right_square: bool
    orbit: Orbit


class RunConfig(Record):
    backend: Literal["exact", "float"] = "exact"
    tolerance: float = Field(default=1e-9, gt=0)
    polygon_path: Optional[Path] = None
    seed: int = 0
    svg: Optional[Path] = None
    json_path: Optional[Path] = None
