"""The concrete families: descriptors, parsing and expansion to RationalMap."""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field

from numpy.polynomial import polynomial as P

from gasketforge.maps import RationalMap

FIXED_B = -17 - 12 * math.sqrt(2)

_FLOAT = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"


def parse_complex(text: str) -> complex:
    """Parse ``<float>[+|-]<float>i`` (either part may be omitted)."""
    t = text.strip()
    if not t or " " in t:
        raise ValueError(f"bad complex literal {text!r}")
    m = re.fullmatch(rf"(?P<re>{_FLOAT})(?P<im>[+-](?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)i", t)
    if m:
        return complex(float(m["re"]), float(m["im"]))
    m = re.fullmatch(rf"(?P<im>{_FLOAT})i", t)
    if m:
        return complex(0.0, float(m["im"]))
    m = re.fullmatch(_FLOAT, t)
    if m:
        return complex(float(t), 0.0)
    raise ValueError(f"bad complex literal {text!r}")


def format_complex(z: complex) -> str:
    """Inverse of ``parse_complex``, both parts printed to 17 significant digits."""
    z = complex(z)
    sign = "+" if math.copysign(1, z.imag) > 0 else "-"
    return f"{z.real:.17g}{sign}{abs(z.imag):.17g}i"


def sextic_coefficients(eta):
    """(a, b) for the sextic with parameter eta; works on complex or dual inputs."""
    a = eta * (eta - 4) ** 3 / (27 * (eta - 1) ** 6)
    b = eta * (1 + 2 * eta) / (4 - eta)
    return a, b


@dataclass(frozen=True)
class MapFamily:
    """Tagged family descriptor.

    ``kind`` is one of ``mcmullen``, ``siegel``, ``sextic``, ``sextic_b``,
    ``basilica``, ``quadratic``; ``params`` holds the named parameters.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _BUILDERS:
            raise ValueError(f"unknown family {self.kind!r}")
        _VALIDATORS[self.kind](self.params)

    def __hash__(self):
        return hash((self.kind, tuple(sorted(self.params.items()))))

    # parameter access -------------------------------------------------
    def __getitem__(self, key):
        return self.params[key]

    @property
    def free_parameter(self) -> str:
        return _FREE_PARAM[self.kind]

    def with_param(self, value) -> "MapFamily":
        params = dict(self.params)
        params[self.free_parameter] = complex(value)
        return MapFamily(self.kind, params)

    def rational_map(self) -> RationalMap:
        return _BUILDERS[self.kind](self.params)

    @property
    def symbolic_degree(self) -> int:
        if self.kind == "mcmullen":
            return self["m"] + self["n"]
        return {"siegel": 2, "sextic": 6, "sextic_b": 6, "basilica": 2, "quadratic": 2}[self.kind]

    def descriptor(self) -> str:
        parts = []
        for key in _ORDER[self.kind]:
            v = self.params[key]
            if isinstance(v, complex):
                parts.append(f"{_NAMES.get(key, key)}={format_complex(v)}")
            else:
                parts.append(f"{_NAMES.get(key, key)}={v!r}")
        tag = {"sextic_b": "sextic-b"}.get(self.kind, self.kind)
        return f"{tag}:" + ",".join(parts)

    # convenience constructors ------------------------------------------
    @classmethod
    def mcmullen(cls, m: int, n: int, lam) -> "MapFamily":
        return cls("mcmullen", {"m": int(m), "n": int(n), "lam": complex(lam)})

    @classmethod
    def siegel(cls, theta: float, lam=None) -> "MapFamily":
        """q_lambda; ``lam=None`` picks the parameter with a finite critical orbit."""
        if lam is None:
            lam = siegel_finite_orbit_lambda(theta)
        return cls("siegel", {"theta": float(theta), "lam": complex(lam)})

    @classmethod
    def sextic(cls, eta) -> "MapFamily":
        return cls("sextic", {"eta": complex(eta)})

    @classmethod
    def sextic_fixed_b(cls, a) -> "MapFamily":
        return cls("sextic_b", {"a": complex(a)})

    @classmethod
    def basilica(cls, mu) -> "MapFamily":
        return cls("basilica", {"mu": complex(mu)})

    @classmethod
    def quadratic(cls, c) -> "MapFamily":
        return cls("quadratic", {"c": complex(c)})


GOLDEN_THETA = (math.sqrt(5) - 1) / 2


def siegel_finite_orbit_lambda(theta: float) -> complex:
    return 4 / cmath.exp(2j * math.pi * theta) - 1


def _check_mcmullen(p):
    if int(p["m"]) < 2 or int(p["n"]) < 1:
        raise ValueError("McMullen family needs m >= 2 and n >= 1")
    if p["lam"] == 0:
        raise ValueError("McMullen family needs lambda != 0")


def _check_siegel(p):
    th = float(p["theta"])
    if not 0 < th < 1:
        raise ValueError("rotation number must lie in (0, 1)")
    if p["lam"] == 1:
        raise ValueError("q_lambda is degenerate at lambda = 1")


def _check_sextic(p):
    eta = p["eta"]
    for bad in (0, 1, 4, -0.5):
        if abs(eta - bad) == 0:
            raise ValueError(f"eta = {bad} is excluded")


def _check_nonzero(key):
    def check(p):
        if p[key] == 0:
            raise ValueError(f"{key} must be nonzero")

    return check


def _build_mcmullen(p):
    m, n, lam = int(p["m"]), int(p["n"]), p["lam"]
    num = [0j] * (m + n + 1)
    num[0] = lam
    num[m + n] = 1
    den = [0j] * n + [1]
    return RationalMap(num, den)


def _build_siegel(p):
    e = cmath.exp(2j * math.pi * p["theta"])
    lam = p["lam"]
    s = (1 + lam) / 2
    # the constant is -(e*s) so that den(s) cancels exactly
    return RationalMap([-lam, 0, 1], [-(e * s), e])


def _sextic_map(a, b):
    num = a * P.polymul(P.polypow([-1, 1], 3), P.polypow([-b, 1], 3))
    return RationalMap(num, [0, 0, 0, 0, 1])


def _build_sextic(p):
    a, b = sextic_coefficients(p["eta"])
    return _sextic_map(a, b)


def _build_sextic_b(p):
    return _sextic_map(p["a"], FIXED_B)


def _build_basilica(p):
    return RationalMap([p["mu"]], [0, 2, 1])


def _build_quadratic(p):
    return RationalMap([p["c"], 0, 1], [1])


_BUILDERS = {
    "mcmullen": _build_mcmullen,
    "siegel": _build_siegel,
    "sextic": _build_sextic,
    "sextic_b": _build_sextic_b,
    "basilica": _build_basilica,
    "quadratic": _build_quadratic,
}
_VALIDATORS = {
    "mcmullen": _check_mcmullen,
    "siegel": _check_siegel,
    "sextic": _check_sextic,
    "sextic_b": _check_nonzero("a"),
    "basilica": _check_nonzero("mu"),
    "quadratic": lambda p: None,
}
_FREE_PARAM = {
    "mcmullen": "lam",
    "siegel": "lam",
    "sextic": "eta",
    "sextic_b": "a",
    "basilica": "mu",
    "quadratic": "c",
}
_ORDER = {
    "mcmullen": ("m", "n", "lam"),
    "siegel": ("theta", "lam"),
    "sextic": ("eta",),
    "sextic_b": ("a",),
    "basilica": ("mu",),
    "quadratic": ("c",),
}
_NAMES = {"lam": "lambda"}
_ALIASES = {"lambda": "lam", "λ": "lam", "η": "eta", "μ": "mu", "θ": "theta"}
_INT_KEYS = {"m", "n"}
_REAL_KEYS = {"theta"}


def parse_family(text: str, require_param: bool = True) -> MapFamily:
    """Parse descriptors such as ``mcmullen:m=3,n=3,lambda=0.125+0i``.

    With ``require_param=False`` the free parameter may be omitted; it is then
    filled with a placeholder and the caller is expected to replace it (the
    parameter plane and the solver do this).
    """
    kind, sep, rest = text.strip().partition(":")
    kind = kind.strip().lower().replace("-", "_")
    if kind not in _BUILDERS:
        raise ValueError(f"unknown family {kind!r} in {text!r}")
    params: dict = {}
    if rest.strip():
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise ValueError(f"expected key=value, got {item!r}")
            key = _ALIASES.get(key.strip(), key.strip())
            if key not in _ORDER[kind]:
                raise ValueError(f"{kind} has no parameter {key!r}")
            if key in _INT_KEYS:
                params[key] = int(val)
            elif key in _REAL_KEYS:
                params[key] = float(val)
            else:
                params[key] = parse_complex(val)
    if kind == "siegel":
        params.setdefault("theta", GOLDEN_THETA)
        if "lam" not in params:
            params["lam"] = siegel_finite_orbit_lambda(params["theta"])
    missing = [k for k in _ORDER[kind] if k not in params]
    free = _FREE_PARAM[kind]
    if missing and (require_param or missing != [free]):
        raise ValueError(f"{kind} descriptor is missing {missing}")
    if missing:
        params[free] = _PLACEHOLDER[kind]
    return MapFamily(kind, params)


_PLACEHOLDER = {
    "mcmullen": 0.1 + 0j,
    "siegel": 0.5 + 0j,
    "sextic": 2 + 2j,
    "sextic_b": 1 + 0j,
    "basilica": 1 + 0j,
    "quadratic": 0j,
}
