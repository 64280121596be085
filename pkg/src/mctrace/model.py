"""Scenario domain types, the YAML scenario file format, and parameter paths.

A scenario is a declarative description of a planar mechanical system:
rigid bodies, a joint tree, terrain, a controller, an outcome predicate,
and a catalog of parameter distributions used by the sampling layer.

Canonical file format
---------------------
Scenarios are YAML documents (``yaml.safe_load`` subset).  All physical
quantities are SI (meters, kilograms, seconds, Newtons); angles are in
radians.  ``serialize_scenario`` emits the canonical form: keys in schema
order, floats rendered with Python's shortest round-trip ``repr``.  The
round trip ``load -> serialize -> load`` is field-exact.

Parameter paths
---------------
Scalar fields are addressed by dotted paths, e.g. ``body.wheel.mass``,
``gravity.y``, ``terrain.segment[0].friction``, ``controller.step_height``.
``resolve_path`` returns a read/write handle.  Sensor-noise and lag-jitter
targets (``sensor.*``, ``actuator.*``, ``control.lag_jitter``) are virtual
channels: valid distribution targets, but not stored fields.
"""

from __future__ import annotations

import copy
import io
import math
import re
from dataclasses import dataclass, field

import yaml


class ScenarioError(ValueError):
    """Raised for malformed or invalid scenario documents.

    ``path`` names the offending field when known (dotted path notation).
    """

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        if path:
            message = f"{message} (at {path})"
        super().__init__(message)


WORLD = "world"

# -- shapes ----------------------------------------------------------------


@dataclass
class Disc:
    radius: float


@dataclass
class Capsule:
    half_length: float
    radius: float


@dataclass
class Polygon:
    # counter-clockwise convex vertex list in the body's shape frame
    vertices: list[list[float]]


@dataclass
class RegularPolygon:
    """Regular n-gon given by circumradius; keeps a single perturbable
    size scalar (e.g. spoke length of a rimless wheel)."""

    sides: int
    radius: float
    phase: float = 0.0

    def to_polygon(self) -> Polygon:
        verts = []
        for k in range(self.sides):
            a = self.phase + 2.0 * math.pi * k / self.sides
            verts.append([self.radius * math.cos(a), self.radius * math.sin(a)])
        return Polygon(verts)


Shape = Disc | Capsule | Polygon | RegularPolygon


@dataclass
class Body:
    id: str
    mass: float
    inertia: float
    shape: Shape
    initial_pose: list[float]      # x, y, theta of the center of mass
    initial_velocity: list[float]  # xdot, ydot, thetadot
    # center-of-mass location within分 the shape frame; the collision shape
    # is drawn at -com_offset relative to the body origin (the c.o.m.)
    com_offset: list[float] = field(default_factory=lambda: [0.0, 0.0])


@dataclass
class Joint:
    id: str
    parent: str  # body id or WORLD
    child: str
    anchor_parent: list[float]
    anchor_child: list[float]
    kind: str  # "revolute" | "prismatic"
    axis: list[float] = field(default_factory=lambda: [1.0, 0.0])  # prismatic only
    limits: list[float] | None = None  # [lower, upper]
    actuated: bool = False
    effort_limit: float = math.inf
    initial_coord: float = 0.0
    initial_rate: float = 0.0


@dataclass
class TerrainSegment:
    a: list[float]
    b: list[float]
    friction: float
    restitution: float


@dataclass
class Obstacle:
    id: str
    min: list[float]
    max: list[float]
    friction: float
    restitution: float


@dataclass
class Terrain:
    segments: list[TerrainSegment] = field(default_factory=list)
    obstacles: list[Obstacle] = field(default_factory=list)


@dataclass
class ParamDistribution:
    target: str
    kind: str            # "normal" | "uniform"
    phase: str           # "initial" | "per_step"
    mu: float = 0.0      # normal only
    sigma: float = 0.0   # normal only
    lo: float = 0.0      # uniform only
    hi: float = 0.0      # uniform only
    truncation: float = 3.0
    mode: str = "additive"  # "additive" | "multiplicative"


@dataclass
class OutcomePredicateSpec:
    kind: str  # "fall" | "region" | "collision" | "timeout"
    body: str | None = None
    threshold: float | None = None      # fall
    box: list[float] | None = None      # region: [xmin, ymin, xmax, ymax]
    at: float | None = None             # region
    obstacle: str | None = None         # collision


@dataclass
class ControllerSpec:
    kind: str  # "passive" | "pd" | "stepper"
    params: dict[str, float] = field(default_factory=dict)


@dataclass
class ScenarioSpec:
    """Validated, immutable-by-convention scenario description.

    Instances are safe to share across concurrent trace executions; the
    sampling layer perturbs deep copies, never the original.
    """

    name: str
    bodies: list[Body]
    joints: list[Joint]
    terrain: Terrain
    gravity: list[float]
    duration: float
    timestep: float
    control_rate: float
    controller: ControllerSpec
    distributions: list[ParamDistribution]
    outcome: OutcomePredicateSpec
    telemetry_rate: float = 100.0
    collision_exclude: list[list[str]] = field(default_factory=list)

    def body(self, body_id: str) -> Body:
        for b in self.bodies:
            if b.id == body_id:
                return b
        raise ScenarioError(f"unknown body '{body_id}'")


# -- path resolution --------------------------------------------------------

_SEGMENT_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\[(\d+)\])?$")

SENSOR_PREFIXES = ("sensor.", "actuator.")
LAG_JITTER_PATH = "control.lag_jitter"
LAG_PATH = "control.lag"


@dataclass
class PathRef:
    """Read/write handle to one numeric scenario field."""

    path: str
    get: "callable"
    set: "callable"


def _split_path(path: str) -> list[tuple[str, int | None]]:
    parts = []
    for raw in path.split("."):
        m = _SEGMENT_RE.match(raw)
        if not m:
            raise ScenarioError(f"malformed path segment '{raw}'", path)
        parts.append((m.group(1), int(m.group(2)) if m.group(2) else None))
    return parts


def _pair_ref(path: str, obj: list, axis: str) -> PathRef:
    idx = {"x": 0, "y": 1, "theta": 2, "omega": 2, "lower": 0, "upper": 1}.get(axis)
    if idx is None or idx >= len(obj):
        raise ScenarioError(f"unknown component '{axis}'", path)
    return PathRef(path, lambda: obj[idx], lambda v: obj.__setitem__(idx, float(v)))


def _attr_ref(path: str, obj, name: str) -> PathRef:
    val = getattr(obj, name, None)
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise ScenarioError(f"'{name}' is not a numeric field", path)
    return PathRef(path, lambda: getattr(obj, name), lambda v: setattr(obj, name, float(v)))


def is_virtual_path(path: str) -> bool:
    """Sensor/actuator noise channels and lag jitter: valid distribution
    targets with no backing scenario field."""
    return path.startswith(SENSOR_PREFIXES) or path == LAG_JITTER_PATH


def resolve_path(spec: ScenarioSpec, path: str) -> PathRef:
    """Return a read/write handle to the numeric field ``path`` addresses.

    Raises ScenarioError for unknown segments, out-of-range indices, or
    paths that address a non-numeric field.
    """
    parts = _split_path(path)
    head, idx = parts[0]

    if head == "gravity":
        if len(parts) != 2:
            raise ScenarioError("gravity takes a component (.x or .y)", path)
        return _pair_ref(path, spec.gravity, parts[1][0])
    if head in ("duration", "timestep", "control_rate", "telemetry_rate") and len(parts) == 1:
        return _attr_ref(path, spec, head)
    if head == "controller" and len(parts) == 2:
        key = parts[1][0]
        params = spec.controller.params
        if key not in params:
            raise ScenarioError(f"controller has no parameter '{key}'", path)
        return PathRef(path, lambda: params[key], lambda v: params.__setitem__(key, float(v)))
    if head == "control" and len(parts) == 2 and parts[1][0] == "lag":
        params = spec.controller.params
        params.setdefault("lag", 0.0)
        return PathRef(path, lambda: params["lag"], lambda v: params.__setitem__("lag", float(v)))
    if head == "body":
        return _resolve_body(spec, path, parts)
    if head == "joint":
        return _resolve_joint(spec, path, parts)
    if head == "terrain":
        return _resolve_terrain(spec, path, parts)
    raise ScenarioError(f"unknown path root '{head}'", path)


def _resolve_body(spec: ScenarioSpec, path: str, parts) -> PathRef:
    if len(parts) < 3:
        raise ScenarioError("body paths are body.<id>.<field>...", path)
    body = None
    for b in spec.bodies:
        if b.id == parts[1][0]:
            body = b
    if body is None:
        raise ScenarioError(f"unknown body '{parts[1][0]}'", path)
    name, idx = parts[2]
    if name in ("mass", "inertia") and len(parts) == 3:
        return _attr_ref(path, body, name)
    if name in ("com_offset", "initial_pose", "initial_velocity") and len(parts) == 4:
        return _pair_ref(path, getattr(body, name), parts[3][0])
    if name == "shape":
        if len(parts) == 4 and parts[3][1] is None:
            return _attr_ref(path, body.shape, parts[3][0])
        if (
            len(parts) == 5
            and parts[3][0] == "vertex"
            and parts[3][1] is not None
            and isinstance(body.shape, Polygon)
        ):
            verts = body.shape.vertices
            if parts[3][1] >= len(verts):
                raise ScenarioError(f"vertex index {parts[3][1]} out of range", path)
            return _pair_ref(path, verts[parts[3][1]], parts[4][0])
    raise ScenarioError(f"unknown body field '{name}'", path)


def _resolve_joint(spec: ScenarioSpec, path: str, parts) -> PathRef:
    if len(parts) < 3:
        raise ScenarioError("joint paths are joint.<id>.<field>...", path)
    joint = None
    for j in spec.joints:
        if j.id == parts[1][0]:
            joint = j
    if joint is None:
        raise ScenarioError(f"unknown joint '{parts[1][0]}'", path)
    name = parts[2][0]
    if name in ("anchor_parent", "anchor_child", "axis") and len(parts) == 4:
        return _pair_ref(path, getattr(joint, name), parts[3][0])
    if name == "limits" and len(parts) == 4 and joint.limits is not None:
        return _pair_ref(path, joint.limits, parts[3][0])
    if name in ("effort_limit", "initial_coord", "initial_rate") and len(parts) == 3:
        return _attr_ref(path, joint, name)
    raise ScenarioError(f"unknown joint field '{name}'", path)


def _resolve_terrain(spec: ScenarioSpec, path: str, parts) -> PathRef:
    if len(parts) < 3 or parts[1][1] is None:
        raise ScenarioError("terrain paths are terrain.segment[i]... or terrain.obstacle[i]...", path)
    kind, idx = parts[1]
    if kind == "segment":
        if idx >= len(spec.terrain.segments):
            raise ScenarioError(f"segment index {idx} out of range", path)
        seg = spec.terrain.segments[idx]
        name = parts[2][0]
        if name in ("a", "b") and len(parts) == 4:
            return _pair_ref(path, getattr(seg, name), parts[3][0])
        if name in ("friction", "restitution") and len(parts) == 3:
            return _attr_ref(path, seg, name)
    if kind == "obstacle":
        if idx >= len(spec.terrain.obstacles):
            raise ScenarioError(f"obstacle index {idx} out of range", path)
        obs = spec.terrain.obstacles[idx]
        name = parts[2][0]
        if name in ("min", "max") and len(parts) == 4:
            return _pair_ref(path, getattr(obs, name), parts[3][0])
        if name in ("friction", "restitution") and len(parts) == 3:
            return _attr_ref(path, obs, name)
    raise ScenarioError(f"unknown terrain path", path)


# -- parsing ----------------------------------------------------------------


def _req(d: dict, key: str, ctx: str):
    if key not in d:
        raise ScenarioError(f"missing required key '{key}'", ctx)
    return d[key]


def _floats(x, n: int, ctx: str) -> list[float]:
    if not isinstance(x, (list, tuple)) or len(x) != n:
        raise ScenarioError(f"expected a list of {n} numbers", ctx)
    try:
        return [float(v) for v in x]
    except (TypeError, ValueError):
        raise ScenarioError(f"expected a list of {n} numbers", ctx)


def _num(x, ctx: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ScenarioError("expected a number", ctx)
    return float(x)


def _parse_shape(d, ctx: str) -> Shape:
    if not isinstance(d, dict):
        raise ScenarioError("shape must be a mapping", ctx)
    kind = _req(d, "kind", ctx)
    if kind == "disc":
        return Disc(radius=_num(_req(d, "radius", ctx), ctx + ".radius"))
    if kind == "capsule":
        return Capsule(
            half_length=_num(_req(d, "half_length", ctx), ctx + ".half_length"),
            radius=_num(_req(d, "radius", ctx), ctx + ".radius"),
        )
    if kind == "polygon":
        verts = _req(d, "vertices", ctx)
        if not isinstance(verts, list) or len(verts) < 3:
            raise ScenarioError("polygon needs >= 3 vertices", ctx)
        return Polygon([_floats(v, 2, ctx + f".vertex[{i}]") for i, v in enumerate(verts)])
    if kind == "regular_polygon":
        sides = _req(d, "sides", ctx)
        if not isinstance(sides, int) or sides < 3:
            raise ScenarioError("regular_polygon needs integer sides >= 3", ctx)
        return RegularPolygon(
            sides=sides,
            radius=_num(_req(d, "radius", ctx), ctx + ".radius"),
            phase=_num(d.get("phase", 0.0), ctx + ".phase"),
        )
    raise ScenarioError(f"unknown shape kind '{kind}'", ctx)


def _parse_body(d, i: int) -> Body:
    ctx = f"bodies[{i}]"
    if not isinstance(d, dict):
        raise ScenarioError("body must be a mapping", ctx)
    return Body(
        id=str(_req(d, "id", ctx)),
        mass=_num(_req(d, "mass", ctx), ctx + ".mass"),
        inertia=_num(_req(d, "inertia", ctx), ctx + ".inertia"),
        shape=_parse_shape(_req(d, "shape", ctx), ctx + ".shape"),
        initial_pose=_floats(_req(d, "initial_pose", ctx), 3, ctx + ".initial_pose"),
        initial_velocity=_floats(_req(d, "initial_velocity", ctx), 3, ctx + ".initial_velocity"),
        com_offset=_floats(d.get("com_offset", [0.0, 0.0]), 2, ctx + ".com_offset"),
    )


def _parse_joint(d, i: int) -> Joint:
    ctx = f"joints[{i}]"
    if not isinstance(d, dict):
        raise ScenarioError("joint must be a mapping", ctx)
    limits = d.get("limits")
    return Joint(
        id=str(_req(d, "id", ctx)),
        parent=str(_req(d, "parent", ctx)),
        child=str(_req(d, "child", ctx)),
        anchor_parent=_floats(_req(d, "anchor_parent", ctx), 2, ctx + ".anchor_parent"),
        anchor_child=_floats(_req(d, "anchor_child", ctx), 2, ctx + ".anchor_child"),
        kind=str(_req(d, "kind", ctx)),
        axis=_floats(d.get("axis", [1.0, 0.0]), 2, ctx + ".axis"),
        limits=None if limits is None else _floats(limits, 2, ctx + ".limits"),
        actuated=bool(d.get("actuated", False)),
        effort_limit=_num(d.get("effort_limit", math.inf), ctx + ".effort_limit"),
        initial_coord=_num(d.get("initial_coord", 0.0), ctx + ".initial_coord"),
        initial_rate=_num(d.get("initial_rate", 0.0), ctx + ".initial_rate"),
    )


def _parse_terrain(d) -> Terrain:
    if not isinstance(d, dict):
        raise ScenarioError("terrain must be a mapping", "terrain")
    segments = []
    for i, s in enumerate(d.get("segments", []) or []):
        ctx = f"terrain.segment[{i}]"
        segments.append(
            TerrainSegment(
                a=_floats(_req(s, "a", ctx), 2, ctx + ".a"),
                b=_floats(_req(s, "b", ctx), 2, ctx + ".b"),
                friction=_num(_req(s, "friction", ctx), ctx + ".friction"),
                restitution=_num(_req(s, "restitution", ctx), ctx + ".restitution"),
            )
        )
    obstacles = []
    for i, o in enumerate(d.get("obstacles", []) or []):
        ctx = f"terrain.obstacle[{i}]"
        obstacles.append(
            Obstacle(
                id=str(o.get("id", str(i))),
                min=_floats(_req(o, "min", ctx), 2, ctx + ".min"),
                max=_floats(_req(o, "max", ctx), 2, ctx + ".max"),
                friction=_num(_req(o, "friction", ctx), ctx + ".friction"),
                restitution=_num(_req(o, "restitution", ctx), ctx + ".restitution"),
            )
        )
    return Terrain(segments=segments, obstacles=obstacles)


def _parse_distribution(d, i: int) -> ParamDistribution:
    ctx = f"distributions[{i}]"
    if not isinstance(d, dict):
        raise ScenarioError("distribution must be a mapping", ctx)
    kind = str(_req(d, "kind", ctx))
    dist = ParamDistribution(
        target=str(_req(d, "target", ctx)),
        kind=kind,
        phase=str(_req(d, "phase", ctx)),
        truncation=_num(d.get("truncation", 3.0), ctx + ".truncation"),
        mode=str(d.get("mode", "additive")),
    )
    if kind == "normal":
        dist.mu = _num(d.get("mu", 0.0), ctx + ".mu")
        dist.sigma = _num(_req(d, "sigma", ctx), ctx + ".sigma")
    elif kind == "uniform":
        dist.lo = _num(_req(d, "lo", ctx), ctx + ".lo")
        dist.hi = _num(_req(d, "hi", ctx), ctx + ".hi")
    else:
        raise ScenarioError(f"unknown distribution kind '{kind}'", ctx)
    return dist


def _parse_outcome(d) -> OutcomePredicateSpec:
    ctx = "outcome"
    if not isinstance(d, dict):
        raise ScenarioError("outcome must be a mapping", ctx)
    kind = str(_req(d, "kind", ctx))
    pred = OutcomePredicateSpec(kind=kind)
    if kind == "fall":
        pred.body = str(_req(d, "body", ctx))
        pred.threshold = _num(_req(d, "threshold", ctx), ctx + ".threshold")
    elif kind == "region":
        pred.body = str(_req(d, "body", ctx))
        pred.box = _floats(_req(d, "box", ctx), 4, ctx + ".box")
        pred.at = _num(_req(d, "at", ctx), ctx + ".at")
    elif kind == "collision":
        pred.body = str(_req(d, "body", ctx))
        pred.obstacle = str(_req(d, "obstacle", ctx))
    elif kind != "timeout":
        raise ScenarioError(f"unknown outcome kind '{kind}'", ctx)
    return pred


def load_scenario(text: str) -> ScenarioSpec:
    """Parse and validate a scenario document.

    Any input either yields a valid ScenarioSpec or raises ScenarioError;
    no other exception escapes.
    """
    try:
        doc = yaml.safe_load(io.StringIO(text))
    except yaml.YAMLError as e:
        raise ScenarioError(f"not valid YAML: {e}") from e
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a mapping")
    try:
        ctrl = doc.get("controller", {"kind": "passive"})
        if not isinstance(ctrl, dict) or "kind" not in ctrl:
            raise ScenarioError("controller needs a 'kind'", "controller")
        params = {k: _num(v, f"controller.{k}") for k, v in ctrl.items() if k != "kind"}
        spec = ScenarioSpec(
            name=str(_req(doc, "name", "document")),
            bodies=[_parse_body(b, i) for i, b in enumerate(_req(doc, "bodies", "document"))],
            joints=[_parse_joint(j, i) for i, j in enumerate(doc.get("joints", []) or [])],
            terrain=_parse_terrain(_req(doc, "terrain", "document")),
            gravity=_floats(_req(doc, "gravity", "document"), 2, "gravity"),
            duration=_num(_req(doc, "duration", "document"), "duration"),
            timestep=_num(_req(doc, "timestep", "document"), "timestep"),
            control_rate=_num(doc.get("control_rate", 100.0), "control_rate"),
            telemetry_rate=_num(doc.get("telemetry_rate", 100.0), "telemetry_rate"),
            controller=ControllerSpec(kind=str(ctrl["kind"]), params=params),
            distributions=[
                _parse_distribution(d, i) for i, d in enumerate(doc.get("distributions", []) or [])
            ],
            outcome=_parse_outcome(doc.get("outcome", {"kind": "timeout"})),
            collision_exclude=[
                [str(a), str(b)]
                for a, b in (doc.get("collision_exclude", []) or [])
            ],
        )
    except ScenarioError:
        raise
    except (TypeError, ValueError, KeyError, AttributeError) as e:
        raise ScenarioError(f"malformed document: {e}") from e
    validate(spec)
    return spec


# -- validation --------------------------------------------------------------


def _check_convex_ccw(verts: list[list[float]], ctx: str) -> None:
    n = len(verts)
    if n < 3:
        raise ScenarioError("polygon needs >= 3 vertices", ctx)
    area2 = 0.0
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        area2 += x0 * y1 - x1 * y0
    if area2 <= 0.0:
        raise ScenarioError("polygon must be counter-clockwise with positive area", ctx)
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        cx, cy = verts[(i + 2) % n]
        cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if cross < -1e-12:
            raise ScenarioError("polygon must be convex", ctx)


def validate(spec: ScenarioSpec) -> None:
    """Check every scenario invariant; raises ScenarioError on the first
    violation, naming the offending path."""
    if spec.timestep <= 0.0:
        raise ScenarioError("timestep must be > 0", "timestep")
    if spec.duration <= 0.0:
        raise ScenarioError("duration must be > 0", "duration")
    if spec.control_rate <= 0.0:
        raise ScenarioError("control_rate must be > 0", "control_rate")
    if spec.control_rate * spec.timestep > 1.0 + 1e-12:
        raise ScenarioError("control_rate * timestep must be <= 1", "control_rate")
    period_steps = 1.0 / (spec.control_rate * spec.timestep)
    if abs(period_steps - round(period_steps)) > 1e-9:
        raise ScenarioError(
            "control period must be an integer multiple of timestep", "control_rate"
        )
    if spec.telemetry_rate <= 0.0:
        raise ScenarioError("telemetry_rate must be > 0", "telemetry_rate")

    ids = set()
    for b in spec.bodies:
        ctx = f"body.{b.id}"
        if b.id in ids or b.id == WORLD:
            raise ScenarioError(f"duplicate or reserved body id '{b.id}'", ctx)
        ids.add(b.id)
        if b.mass <= 0.0:
            raise ScenarioError("mass must be > 0", ctx + ".mass")
        if b.inertia <= 0.0:
            raise ScenarioError("inertia must be > 0", ctx + ".inertia")
        s = b.shape
        if isinstance(s, Disc) and s.radius <= 0.0:
            raise ScenarioError("disc radius must be > 0", ctx + ".shape.radius")
        if isinstance(s, Capsule) and (s.radius <= 0.0 or s.half_length <= 0.0):
            raise ScenarioError("capsule dimensions must be > 0", ctx + ".shape")
        if isinstance(s, RegularPolygon):
            if s.radius <= 0.0:
                raise ScenarioError("regular_polygon radius must be > 0", ctx + ".shape.radius")
            if s.sides < 3:
                raise ScenarioError("regular_polygon needs >= 3 sides", ctx + ".shape.sides")
        if isinstance(s, Polygon):
            _check_convex_ccw(s.vertices, ctx + ".shape")

    joint_ids = set()
    parent_of: dict[str, str] = {}
    for j in spec.joints:
        ctx = f"joint.{j.id}"
        if j.id in joint_ids:
            raise ScenarioError(f"duplicate joint id '{j.id}'", ctx)
        joint_ids.add(j.id)
        if j.kind not in ("revolute", "prismatic"):
            raise ScenarioError(f"unknown joint kind '{j.kind}'", ctx + ".kind")
        if j.parent == j.child:
            raise ScenarioError("joint parent and child must differ", ctx)
        if j.parent != WORLD and j.parent not in ids:
            raise ScenarioError(f"unknown parent body '{j.parent}'", ctx + ".parent")
        if j.child not in ids:
            raise ScenarioError(f"unknown child body '{j.child}'", ctx + ".child")
        if j.child in parent_of:
            raise ScenarioError(f"body '{j.child}' has two parent joints", ctx)
        parent_of[j.child] = j.parent
        if j.limits is not None and not j.limits[0] < j.limits[1]:
            raise ScenarioError("limits.lower must be < limits.upper", ctx + ".limits")
        if j.kind == "prismatic" and math.hypot(*j.axis) < 1e-12:
            raise ScenarioError("prismatic axis must be nonzero", ctx + ".axis")
        if j.effort_limit <= 0.0:
            raise ScenarioError("effort_limit must be > 0", ctx + ".effort_limit")
    # tree check: walking up from any body must terminate at a root
    for b in spec.bodies:
        seen = set()
        cur = b.id
        while cur in parent_of:
            if cur in seen:
                raise ScenarioError(f"kinematic loop through body '{cur}'", f"body.{cur}")
            seen.add(cur)
            cur = parent_of[cur]

    for i, seg in enumerate(spec.terrain.segments):
        ctx = f"terrain.segment[{i}]"
        if math.hypot(seg.b[0] - seg.a[0], seg.b[1] - seg.a[1]) <= 0.0:
            raise ScenarioError("segment must have positive length", ctx)
        if seg.friction < 0.0:
            raise ScenarioError("friction must be >= 0", ctx + ".friction")
        if not 0.0 <= seg.restitution <= 1.0:
            raise ScenarioError("restitution must be in [0, 1]", ctx + ".restitution")
    obs_ids = set()
    for i, o in enumerate(spec.terrain.obstacles):
        ctx = f"terrain.obstacle[{i}]"
        if o.id in obs_ids:
            raise ScenarioError(f"duplicate obstacle id '{o.id}'", ctx)
        obs_ids.add(o.id)
        if not (o.min[0] < o.max[0] and o.min[1] < o.max[1]):
            raise ScenarioError("obstacle min must be componentwise < max", ctx)
        if o.friction < 0.0:
            raise ScenarioError("friction must be >= 0", ctx + ".friction")
        if not 0.0 <= o.restitution <= 1.0:
            raise ScenarioError("restitution must be in [0, 1]", ctx + ".restitution")

    for pair in spec.collision_exclude:
        for bid in pair:
            if bid not in ids:
                raise ScenarioError(f"unknown body '{bid}' in collision_exclude", "collision_exclude")

    for i, d in enumerate(spec.distributions):
        ctx = f"distributions[{i}]"
        if d.kind == "normal" and d.sigma < 0.0:
            raise ScenarioError("sigma must be >= 0", ctx + ".sigma")
        if d.kind == "uniform" and d.lo > d.hi:
            raise ScenarioError("uniform lo must be <= hi", ctx)
        if d.truncation < 0.0:
            raise ScenarioError("truncation must be >= 0", ctx + ".truncation")
        if d.mode not in ("additive", "multiplicative"):
            raise ScenarioError(f"unknown mode '{d.mode}'", ctx + ".mode")
        if d.phase == "per_step":
            if not is_virtual_path(d.target) and d.target != LAG_JITTER_PATH:
                raise ScenarioError(
                    f"per_step distributions only target sensor/actuator noise or "
                    f"control.lag_jitter, not '{d.target}'",
                    d.target,
                )
        elif d.phase == "initial":
            if is_virtual_path(d.target):
                raise ScenarioError(
                    f"initial-phase distributions cannot target the noise channel "
                    f"'{d.target}'",
                    d.target,
                )
            try:
                resolve_path(spec, d.target)
            except ScenarioError as e:
                raise ScenarioError(f"distribution target does not resolve: {e}", d.target) from e
        else:
            raise ScenarioError(f"unknown phase '{d.phase}'", ctx + ".phase")

    out = spec.outcome
    if out.kind in ("fall", "region", "collision") and out.body not in ids:
        raise ScenarioError(f"outcome references unknown body '{out.body}'", "outcome.body")
    if out.kind == "fall" and not (out.threshold and out.threshold > 0.0):
        raise ScenarioError("fall threshold must be > 0", "outcome.threshold")
    if out.kind == "collision" and out.obstacle not in obs_ids:
        raise ScenarioError(f"outcome references unknown obstacle '{out.obstacle}'", "outcome.obstacle")
    if out.kind == "region" and (out.at is None or out.at < 0.0):
        raise ScenarioError("region check time must be >= 0", "outcome.at")


# -- serialization -----------------------------------------------------------


def _shape_doc(s: Shape) -> dict:
    if isinstance(s, Disc):
        return {"kind": "disc", "radius": s.radius}
    if isinstance(s, Capsule):
        return {"kind": "capsule", "half_length": s.half_length, "radius": s.radius}
    if isinstance(s, Polygon):
        return {"kind": "polygon", "vertices": [list(v) for v in s.vertices]}
    return {"kind": "regular_polygon", "sides": s.sides, "radius": s.radius, "phase": s.phase}


def _dist_doc(d: ParamDistribution) -> dict:
    doc: dict = {"target": d.target, "kind": d.kind, "phase": d.phase}
    if d.kind == "normal":
        doc["mu"] = d.mu
        doc["sigma"] = d.sigma
    else:
        doc["lo"] = d.lo
        doc["hi"] = d.hi
    doc["truncation"] = d.truncation
    doc["mode"] = d.mode
    return doc


def _outcome_doc(o: OutcomePredicateSpec) -> dict:
    doc: dict = {"kind": o.kind}
    if o.kind == "fall":
        doc["body"] = o.body
        doc["threshold"] = o.threshold
    elif o.kind == "region":
        doc["body"] = o.body
        doc["box"] = list(o.box)
        doc["at"] = o.at
    elif o.kind == "collision":
        doc["body"] = o.body
        doc["obstacle"] = o.obstacle
    return doc


def scenario_to_doc(spec: ScenarioSpec) -> dict:
    joints = []
    for j in spec.joints:
        d = {
            "id": j.id,
            "parent": j.parent,
            "child": j.child,
            "anchor_parent": list(j.anchor_parent),
            "anchor_child": list(j.anchor_child),
            "kind": j.kind,
            "axis": list(j.axis),
            "actuated": j.actuated,
            "initial_coord": j.initial_coord,
            "initial_rate": j.initial_rate,
        }
        if j.limits is not None:
            d["limits"] = list(j.limits)
        if math.isfinite(j.effort_limit):
            d["effort_limit"] = j.effort_limit
        joints.append(d)
    doc = {
        "name": spec.name,
        "gravity": list(spec.gravity),
        "duration": spec.duration,
        "timestep": spec.timestep,
        "control_rate": spec.control_rate,
        "telemetry_rate": spec.telemetry_rate,
        "bodies": [
            {
                "id": b.id,
                "mass": b.mass,
                "inertia": b.inertia,
                "shape": _shape_doc(b.shape),
                "initial_pose": list(b.initial_pose),
                "initial_velocity": list(b.initial_velocity),
                "com_offset": list(b.com_offset),
            }
            for b in spec.bodies
        ],
        "joints": joints,
        "terrain": {
            "segments": [
                {"a": list(s.a), "b": list(s.b), "friction": s.friction, "restitution": s.restitution}
                for s in spec.terrain.segments
            ],
            "obstacles": [
                {"id": o.id, "min": list(o.min), "max": list(o.max), "friction": o.friction,
                 "restitution": o.restitution}
                for o in spec.terrain.obstacles
            ],
        },
        "controller": {"kind": spec.controller.kind, **spec.controller.params},
        "outcome": _outcome_doc(spec.outcome),
        "distributions": [_dist_doc(d) for d in spec.distributions],
        "collision_exclude": [list(p) for p in spec.collision_exclude],
    }
    return doc


def serialize_scenario(spec: ScenarioSpec) -> str:
    """Canonical YAML encoding; floats use shortest round-trip decimals."""
    return yaml.safe_dump(scenario_to_doc(spec), sort_keys=False, default_flow_style=None)


def apply_overrides(spec: ScenarioSpec, overrides: list[tuple[str, float]]) -> ScenarioSpec:
    """Deep copy with path->value replacements; revalidates the result."""
    out = copy.deepcopy(spec)
    for path, value in overrides:
        resolve_path(out, path).set(value)
    validate(out)
    return out
