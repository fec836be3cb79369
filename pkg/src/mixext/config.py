"""Flat ``key = value`` experiment configuration.

Blank lines and lines starting with ``#`` are ignored. Vector values are
comma separated; a scalar given for a vector key is broadcast to dimension
``d``. ``m`` may be ``auto`` (meaning ``l(alpha)``) and ``theta`` may be
``inf``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields

import numpy as np

__all__ = ["ExperimentConfig", "ConfigError", "parse_config", "load_config", "DEFAULT_FUNCTIONS"]

DEFAULT_FUNCTIONS = ("poly", "sin", "exp_sin", "abs25", "abs15", "step")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Parameters shared by the ``verify``, ``extend`` and ``norms`` commands.

    Attributes
    ----------
    d : int
        Dimension (1 or 2 for the shipped catalog).
    alpha : tuple of float
        Smoothness per axis.
    m : tuple of int or None
        Spline order; ``None`` means ``l(alpha)``.
    K : int or None
        Truncation level of the extension; ``None`` means 5 for ``d = 1`` and 4 otherwise.
    functions : tuple of str
        Catalog entries used by the suites and the default for ``extend``/``norms``.
    """

    d: int = 1
    alpha: tuple = (1.5,)
    p: float = 2.0
    theta: float = 2.0
    m: tuple | None = None
    K: int | None = None
    functions: tuple = DEFAULT_FUNCTIONS
    function: str = "sin"
    lam: tuple = (0,)
    quad_order: int = 0
    n_shifts: int = 9
    n_avg: int = 6
    K_t: int = 8
    trials: int = 20
    grid_lo: tuple = (-0.5,)
    grid_hi: tuple = (1.5,)
    grid_n: tuple = (41,)
    with_extension: bool = False
    inject_pprime_fault: bool = False
    suites: tuple = ("all",)
    seed: int = 0
    out: str = "out"

    def __post_init__(self):
        self.validate()

    # vector fields broadcast to d
    _VECTORS = ("alpha", "lam", "grid_lo", "grid_hi", "grid_n")

    def validate(self) -> "ExperimentConfig":
        if self.d < 1:
            raise ConfigError("d must be >= 1")
        for name in self._VECTORS:
            v = tuple(np.atleast_1d(getattr(self, name)).tolist())
            if len(v) == 1:
                v = v * self.d
            if len(v) != self.d:
                raise ConfigError(f"{name} needs {self.d} entries, got {len(v)}")
            setattr(self, name, v)
        self.alpha = tuple(float(a) for a in self.alpha)
        self.lam = tuple(int(v) for v in self.lam)
        self.grid_n = tuple(int(v) for v in self.grid_n)
        self.grid_lo = tuple(float(v) for v in self.grid_lo)
        self.grid_hi = tuple(float(v) for v in self.grid_hi)
        if self.m is not None:
            m = tuple(int(v) for v in np.atleast_1d(self.m))
            self.m = m * self.d if len(m) == 1 else m
            if len(self.m) != self.d:
                raise ConfigError(f"m needs {self.d} entries")
        if any(a <= 0 for a in self.alpha):
            raise ConfigError("alpha must be positive")
        if not 1 <= self.p < np.inf:
            raise ConfigError("p must satisfy 1 <= p < inf")
        if not self.theta >= 1:
            raise ConfigError("theta must be >= 1")
        if self.K is not None and self.K < 0:
            raise ConfigError("K must be >= 0")
        if any(lj < 0 or lj >= aj for lj, aj in zip(self.lam, self.alpha)):
            raise ConfigError("lam must satisfy 0 <= lam < alpha")
        if any(n < 2 for n in self.grid_n):
            raise ConfigError("grid_n must be >= 2")
        if self.n_shifts < 3 or self.K_t < 1 or self.trials < 1 or self.n_avg < 1:
            raise ConfigError("n_shifts >= 3, K_t >= 1, trials >= 1 and n_avg >= 1 are required")
        self.functions = tuple(self.functions)
        self.suites = tuple(self.suites)
        return self

    @property
    def l(self) -> tuple[int, ...]:
        from .analysis import l_of_alpha

        return l_of_alpha(self.alpha)

    @property
    def m_eff(self) -> tuple[int, ...]:
        m = self.l if self.m is None else self.m
        if any(mj < lj for mj, lj in zip(m, self.l)):
            raise ConfigError("m must satisfy m >= l(alpha)")
        return m

    @property
    def K_eff(self) -> int:
        return (5 if self.d == 1 else 4) if self.K is None else self.K

    def order(self) -> int | None:
        return self.quad_order or None

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    # -- text form ---------------------------------------------------------
    def serialize(self) -> str:
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {_format(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)


def _format(v) -> str:
    if v is None:
        return "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "inf" if np.isinf(v) else repr(v)
    if isinstance(v, tuple):
        return ",".join(_format(x) for x in v)
    return str(v)


def _parse_bool(s: str) -> bool:
    s = s.lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _parse_float(s: str) -> float:
    return float("inf") if s.lower() in ("inf", "infinity") else float(s)


_PARSERS = {
    "d": int,
    "alpha": lambda s: tuple(_parse_float(x) for x in s.split(",")),
    "p": _parse_float,
    "theta": _parse_float,
    "m": lambda s: None if s.lower() == "auto" else tuple(int(x) for x in s.split(",")),
    "K": lambda s: None if s.lower() == "auto" else int(s),
    "functions": lambda s: tuple(x.strip() for x in s.split(",") if x.strip()),
    "function": str,
    "lam": lambda s: tuple(int(x) for x in s.split(",")),
    "quad_order": int,
    "n_shifts": int,
    "n_avg": int,
    "K_t": int,
    "trials": int,
    "grid_lo": lambda s: tuple(float(x) for x in s.split(",")),
    "grid_hi": lambda s: tuple(float(x) for x in s.split(",")),
    "grid_n": lambda s: tuple(int(x) for x in s.split(",")),
    "with_extension": _parse_bool,
    "inject_pprime_fault": _parse_bool,
    "suites": lambda s: tuple(x.strip() for x in s.split(",") if x.strip()),
    "seed": int,
    "out": str,
}


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Parse ``key = value`` text; ``overrides`` win over the file."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def load_config(path: str | None, **overrides) -> ExperimentConfig:
    text = ""
    if path:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return parse_config(text, **overrides)
