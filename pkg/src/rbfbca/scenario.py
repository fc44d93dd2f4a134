"""Line-oriented scenario files describing coverage scenes.

Grammar (strict; parse errors carry line numbers):

    # comment and blank lines are ignored
    [scene]                 exactly once
    width = <float>         scene extent in meters, > 0
    height = <float>
    grid_resolution = <float>   cells per meter; must tile the scene exactly
    cameras = <int>         number of cameras, >= 1

    [camera_model]          exactly once
    fov_half_angle = <float>    radians, in (0, pi]
    range = <float>             meters, > 0

    [obstacle]              zero or more, one section per obstacle
    x_min = <float>
    y_min = <float>
    x_max = <float>
    y_max = <float>

Every key is required within its section, duplicates are rejected, unknown
sections or keys are rejected, and obstacles must lie inside the scene box.
"""

from __future__ import annotations

from pathlib import Path

from .coverage import CameraModel, CoverageScene, Obstacle

_SCENE_KEYS = ("width", "height", "grid_resolution", "cameras")
_MODEL_KEYS = ("fov_half_angle", "range")
_OBSTACLE_KEYS = ("x_min", "y_min", "x_max", "y_max")


class ScenarioParseError(ValueError):
    """Malformed scenario text; message carries line/field context."""


def _fail(line_no: int, message: str) -> None:
    raise ScenarioParseError(f"line {line_no}: {message}")


def parse_scenario_text(text: str) -> CoverageScene:
    sections: list[tuple[str, int, dict[str, tuple[float, int]]]] = []
    current: dict[str, tuple[float, int]] | None = None
    current_name = ""
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current_name = line[1:-1].strip()
            if current_name not in ("scene", "camera_model", "obstacle"):
                _fail(line_no, f"unknown section [{current_name}]")
            current = {}
            sections.append((current_name, line_no, current))
            continue
        if "=" not in line:
            _fail(line_no, f"expected 'key = value', got {line!r}")
        if current is None:
            _fail(line_no, "key outside any section")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        allowed = {
            "scene": _SCENE_KEYS,
            "camera_model": _MODEL_KEYS,
            "obstacle": _OBSTACLE_KEYS,
        }[current_name]
        if key not in allowed:
            _fail(line_no, f"unknown key {key!r} in section [{current_name}]")
        if key in current:
            _fail(line_no, f"duplicate key {key!r} in section [{current_name}]")
        try:
            current[key] = (float(value), line_no)
        except ValueError:
            _fail(line_no, f"value for {key!r} is not a number: {value!r}")

    by_name: dict[str, list[tuple[int, dict]]] = {"scene": [], "camera_model": [], "obstacle": []}
    for name, line_no, fields in sections:
        by_name[name].append((line_no, fields))

    for required in ("scene", "camera_model"):
        if len(by_name[required]) == 0:
            raise ScenarioParseError(f"missing required section [{required}]")
        if len(by_name[required]) > 1:
            line_no = by_name[required][1][0]
            _fail(line_no, f"duplicate section [{required}]")

    def take(fields: dict, key: str, section: str, line_no: int) -> float:
        if key not in fields:
            _fail(line_no, f"section [{section}] is missing key {key!r}")
        return fields[key][0]

    line_no, fields = by_name["scene"][0]
    width = take(fields, "width", "scene", line_no)
    height = take(fields, "height", "scene", line_no)
    resolution = take(fields, "grid_resolution", "scene", line_no)
    cameras_f = take(fields, "cameras", "scene", line_no)
    if cameras_f != int(cameras_f):
        _fail(fields["cameras"][1], "cameras must be an integer")

    line_no, fields = by_name["camera_model"][0]
    half = take(fields, "fov_half_angle", "camera_model", line_no)
    rng = take(fields, "range", "camera_model", line_no)

    obstacles = []
    for index, (line_no, fields) in enumerate(by_name["obstacle"]):
        vals = {k: take(fields, k, "obstacle", line_no) for k in _OBSTACLE_KEYS}
        try:
            ob = Obstacle(**vals)
        except ValueError as exc:
            _fail(line_no, f"obstacle {index}: {exc}")
        if not (0.0 <= ob.x_min and ob.x_max <= width and 0.0 <= ob.y_min and ob.y_max <= height):
            _fail(line_no, f"obstacle {index} extends outside the scene box")
        obstacles.append(ob)

    try:
        return CoverageScene(
            width=width,
            height=height,
            grid_resolution=resolution,
            obstacles=tuple(obstacles),
            camera_model=CameraModel(fov_half_angle=half, sight_range=rng),
            camera_count=int(cameras_f),
        )
    except ValueError as exc:
        raise ScenarioParseError(str(exc)) from exc


def parse_scenario(path: "str | Path") -> CoverageScene:
    return parse_scenario_text(Path(path).read_text(encoding="utf-8"))


def format_scenario(scene: CoverageScene, comment: str = "") -> str:
    """Serialize a scene back to scenario text (round-trips through the parser)."""
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines += [
        "[scene]",
        f"width = {scene.width!r}",
        f"height = {scene.height!r}",
        f"grid_resolution = {scene.grid_resolution!r}",
        f"cameras = {scene.camera_count}",
        "",
        "[camera_model]",
        f"fov_half_angle = {scene.camera_model.fov_half_angle!r}",
        f"range = {scene.camera_model.sight_range!r}",
    ]
    for ob in scene.obstacles:
        lines += [
            "",
            "[obstacle]",
            f"x_min = {ob.x_min!r}",
            f"y_min = {ob.y_min!r}",
            f"x_max = {ob.x_max!r}",
            f"y_max = {ob.y_max!r}",
        ]
    return "\n".join(lines) + "\n"


# Bundled demo scenes, materialized by `rbfbca demo` and used by the tests.

EMPTY_ROOM = """\
# 10 x 10 empty room, one omnidirectional camera
[scene]
width = 10
height = 10
grid_resolution = 2
cameras = 1

[camera_model]
fov_half_angle = 3.141592653589793
range = 15
"""

TWO_OBSTACLE_ROOM = """\
# 10 x 10 room with two interior obstacles, four wide-angle cameras
[scene]
width = 10
height = 10
grid_resolution = 2
cameras = 4

[camera_model]
fov_half_angle = 1.5707963267948966
range = 6

[obstacle]
x_min = 2.5
y_min = 2.0
x_max = 4.0
y_max = 5.5

[obstacle]
x_min = 6.0
y_min = 6.0
x_max = 8.5
y_max = 7.5
"""

BUNDLED_SCENES = {
    "empty-room": EMPTY_ROOM,
    "two-obstacle-room": TWO_OBSTACLE_ROOM,
}
