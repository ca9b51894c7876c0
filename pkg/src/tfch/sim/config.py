"""Line-oriented ``key = value`` run configuration."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..spectral_field import Grid
from ..stepper import NonlinearSolveConfig, PhysicalParams, Variant
from ..time_mesh import AdaptiveParams


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.key = key
        self.line = line


INITIAL_CONDITIONS = ("star", "random", "wedge", "thinfilm", "constant")

_REQUIRED = object()


def _float(s):
    return float(s)


def _int(s):
    v = float(s)
    if v != int(v):
        raise ValueError(f"expected an integer, got {s}")
    return int(v)


def _choice(*options):
    def conv(s):
        v = s.strip().lower()
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {s!r}")
        return v
    return conv


def _float_list(s):
    s = s.strip()
    if not s:
        return []
    return [float(x) for x in s.replace(";", ",").split(",") if x.strip()]


def _opt_float(s):
    return None if s.strip().lower() in ("auto", "none", "") else float(s)


def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


# key: (converter, default, range check, range description)
KEYS = {
    "alpha": (_float, _REQUIRED, lambda v: 0 < v < 1, "alpha must lie in (0, 1)"),
    "mobility": (_float, _REQUIRED, _positive, "mobility must be positive"),
    "epsilon": (_float, _REQUIRED, _positive, "epsilon must be positive"),
    "T": (_float, _REQUIRED, _positive, "T must be positive"),
    "initial": (_choice(*INITIAL_CONDITIONS), _REQUIRED, None, None),
    "nx": (_int, 128, lambda v: v > 0 and v % 2 == 0, "nx must be a positive even integer"),
    "ny": (_int, 128, lambda v: v > 0 and v % 2 == 0, "ny must be a positive even integer"),
    "lx": (_float, 1.0, _positive, "lx must be positive"),
    "ly": (_float, 1.0, _positive, "ly must be positive"),
    "mode": (_choice("fixed", "adaptive"), "fixed", None, None),
    "mesh": (_choice("uniform", "graded"), "uniform", None, None),
    "N": (_int, 100, lambda v: v >= 1, "N must be >= 1"),
    "grading": (_float, 1.0, lambda v: v >= 1, "grading exponent must be >= 1"),
    "dt_min": (_float, 1e-4, _positive, "dt_min must be positive"),
    "dt_max": (_float, 1e-1, _positive, "dt_max must be positive"),
    "beta": (_float, 1e7, _nonneg, "beta must be non-negative"),
    "warmup_steps": (_int, 100, _nonneg, "warmup_steps must be non-negative"),
    "variant": (Variant.parse, Variant.STANDARD, None, None),
    "tol": (_float, 1e-10, _positive, "tol must be positive"),
    "max_iters": (_int, 500, lambda v: v >= 1, "max_iters must be >= 1"),
    "damping": (_float, 1.0, lambda v: 0 < v <= 1, "damping must lie in (0, 1]"),
    "stabilization": (_opt_float, None, lambda v: v is None or v >= 0, "stabilization must be >= 0 or auto"),
    "x0": (_float, 0.5, None, None),
    "y0": (_float, 0.5, None, None),
    "mean": (_float, 0.0, None, None),
    "amplitude": (_float, 1e-3, _nonneg, "amplitude must be non-negative"),
    "r0": (_float, 0.05, _positive, "r0 must be positive"),
    "seed": (_int, 0, lambda v: 0 <= v < 2 ** 64, "seed must be a 64-bit unsigned integer"),
    "out_dir": (str.strip, "out", None, None),
    "snapshot_times": (_float_list, None, lambda v: all(t >= 0 for t in v), "snapshot times must be >= 0"),
}


@dataclass
class RunConfig:
    physical: PhysicalParams
    grid: Grid
    T: float
    initial: str
    mode: str = "fixed"
    mesh: str = "uniform"
    N: int = 100
    grading: float = 1.0
    adaptive: AdaptiveParams = field(default_factory=AdaptiveParams)
    variant: Variant = Variant.STANDARD
    solve: NonlinearSolveConfig = field(default_factory=NonlinearSolveConfig)
    ic: dict = field(default_factory=dict)
    seed: int = 0
    out_dir: Path = Path("out")
    snapshot_times: list[float] = field(default_factory=list)
    values: dict = field(default_factory=dict, repr=False)

    def with_overrides(self, **kv) -> "RunConfig":
        """Re-validate with some keys replaced (used for CLI flags and studies)."""
        merged = dict(self.values)
        merged.update({k: v for k, v in kv.items() if v is not None})
        return build_config(merged)

    def as_dict(self) -> dict:
        out = {}
        for k, v in self.values.items():
            if isinstance(v, Variant):
                v = v.value
            elif isinstance(v, Path):
                v = str(v)
            out[k] = v
        return out


def parse_config(text: str) -> RunConfig:
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", line=lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in KEYS:
            raise ConfigError("unknown key", key=key, line=lineno)
        if key in raw:
            raise ConfigError(f"duplicate key (first set on line {raw[key][1]})", key=key, line=lineno)
        raw[key] = (value, lineno)

    values = {}
    for key, (text_value, lineno) in raw.items():
        conv, _, check, msg = KEYS[key]
        try:
            v = conv(text_value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc), key=key, line=lineno) from None
        if check is not None and not check(v):
            raise ConfigError(f"{msg}, got {text_value}", key=key, line=lineno)
        values[key] = v
    return build_config(values, lines={k: ln for k, (_, ln) in raw.items()})


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    return parse_config(text)


def build_config(values: dict, lines: dict | None = None) -> RunConfig:
    lines = lines or {}
    full = {}
    for key, (conv, default, check, msg) in KEYS.items():
        if key in values:
            v = values[key]
            if check is not None and not check(v):
                raise ConfigError(f"{msg}, got {v}", key=key, line=lines.get(key))
            full[key] = v
        elif default is _REQUIRED:
            raise ConfigError("missing required key", key=key)
        else:
            full[key] = default
    if full["dt_min"] > full["dt_max"]:
        raise ConfigError("dt_min must not exceed dt_max", key="dt_min", line=lines.get("dt_min"))
    if full["mesh"] == "uniform" and full["grading"] != 1.0 and "grading" in values:
        raise ConfigError("grading requires mesh = graded", key="grading", line=lines.get("grading"))
    snaps = full["snapshot_times"]
    if snaps is None:
        snaps = [full["T"]]
    full["snapshot_times"] = sorted(snaps)
    full["variant"] = Variant.parse(full["variant"])
    full["out_dir"] = Path(full["out_dir"])
    try:
        return RunConfig(
            physical=PhysicalParams(full["alpha"], full["mobility"], full["epsilon"]),
            grid=Grid(full["nx"], full["ny"], full["lx"], full["ly"]),
            T=full["T"],
            initial=full["initial"],
            mode=full["mode"],
            mesh=full["mesh"],
            N=full["N"],
            grading=full["grading"],
            adaptive=AdaptiveParams(full["dt_min"], full["dt_max"], full["beta"], full["warmup_steps"]),
            variant=full["variant"],
            solve=NonlinearSolveConfig(full["tol"], full["max_iters"], full["damping"], full["stabilization"]),
            ic={k: full[k] for k in ("x0", "y0", "mean", "amplitude", "r0")},
            seed=full["seed"],
            out_dir=full["out_dir"],
            snapshot_times=full["snapshot_times"],
            values=full,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def format_config(cfg: RunConfig) -> str:
    """Render a config back to the text format (round-trips through :func:`parse_config`)."""
    lines = []
    for key, v in cfg.as_dict().items():
        if key == "snapshot_times":
            v = ", ".join(repr(float(t)) for t in v)
        elif v is None:
            v = "auto"
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"


__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config", "build_config", "format_config",
           "KEYS", "INITIAL_CONDITIONS"]
