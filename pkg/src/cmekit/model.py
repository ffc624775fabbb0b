"""Reaction network definitions.

A network is a set of species with molecule-count caps, a stoichiometry
matrix and generalized mass-action propensities

    a_r(x) = rate_r * prod_i C(x_i, m_i)

Buffered species are folded into ``rate``. Two built-in systems are provided
(reversible isomerization and the Schlogl model) together with a small text
format for user-defined networks; see ``parse_model``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np


class ModelError(ValueError):
    """Raised for invalid models or malformed model files."""


@dataclass(frozen=True)
class PropensitySpec:
    rate: float
    orders: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if not math.isfinite(self.rate) or self.rate < 0:
            raise ModelError(f"negative rate {self.rate!r}")
        for species, mult in self.orders:
            if species < 0 or mult < 1:
                raise ModelError(f"invalid reactant order ({species}, {mult})")

    def evaluate(self, x) -> float:
        comb = 1
        for species, mult in self.orders:
            xi = int(x[species])
            if xi < mult:
                return 0.0
            comb *= math.comb(xi, mult)
        return self.rate * comb


@dataclass(frozen=True)
class InitialCondition:
    state: tuple[int, ...]
    time: float = 0.0


@dataclass(frozen=True)
class ReactionModel:
    """Immutable reaction network.

    ``stoich`` is stored row-major as an N x M nested tuple so that column
    ``r`` is the state change of reaction ``r``.
    """

    species_names: tuple[str, ...]
    caps: tuple[int, ...]
    stoich: tuple[tuple[int, ...], ...]
    propensities: tuple[PropensitySpec, ...]
    name: str = field(default="model", compare=False)

    def __post_init__(self):
        n, m = len(self.species_names), len(self.propensities)
        if n < 1 or m < 1:
            raise ModelError("a model needs at least one species and one reaction")
        if len(set(self.species_names)) != n:
            raise ModelError("duplicate species name")
        if len(self.caps) != n or len(self.stoich) != n:
            raise ModelError("caps/stoichiometry do not match the species list")
        if any(len(row) != m for row in self.stoich):
            raise ModelError("stoichiometry rows must have one entry per reaction")
        if any(c < 0 for c in self.caps):
            raise ModelError("negative cap")
        for r in range(m):
            if all(self.stoich[i][r] == 0 for i in range(n)):
                raise ModelError(f"reaction {r + 1} has a zero state-change vector")
            for species, _ in self.propensities[r].orders:
                if species >= n:
                    raise ModelError(f"reaction {r + 1} references unknown species")

    @property
    def n_species(self) -> int:
        return len(self.species_names)

    @property
    def n_reactions(self) -> int:
        return len(self.propensities)

    @cached_property
    def stoich_matrix(self) -> np.ndarray:
        return np.array(self.stoich, dtype=np.int64).reshape(self.n_species, self.n_reactions)

    def change_vector(self, r: int) -> np.ndarray:
        """State change of reaction ``r`` (0-based)."""
        return self.stoich_matrix[:, r]

    def with_caps(self, caps) -> "ReactionModel":
        return replace(self, caps=tuple(int(c) for c in caps))

    def check_initial(self, init: InitialCondition) -> None:
        if len(init.state) != self.n_species:
            raise ModelError("initial state has the wrong dimension")
        for i, (v, cap) in enumerate(zip(init.state, self.caps)):
            if not 0 <= v <= cap:
                raise ModelError(
                    f"initial count {v} of {self.species_names[i]} outside [0, {cap}]"
                )

    @cached_property
    def kernel_arrays(self):
        """Flat arrays describing the model for the compiled samplers."""
        m = self.n_reactions
        width = max(1, max(len(p.orders) for p in self.propensities))
        species = np.zeros((m, width), dtype=np.int64)
        mult = np.zeros((m, width), dtype=np.int64)
        count = np.zeros(m, dtype=np.int64)
        for r, spec in enumerate(self.propensities):
            count[r] = len(spec.orders)
            for k, (s, mm) in enumerate(spec.orders):
                species[r, k] = s
                mult[r, k] = mm
        rates = np.array([p.rate for p in self.propensities], dtype=np.float64)
        caps = np.array(self.caps, dtype=np.int64)
        return self.stoich_matrix.copy(), species, mult, count, rates, caps


def propensity(model: ReactionModel, r: int, x) -> float:
    """Propensity of reaction ``r`` (1-based, as in the literature) at ``x``."""
    if not 1 <= r <= model.n_reactions:
        raise IndexError(f"reaction index {r} outside 1..{model.n_reactions}")
    return model.propensities[r - 1].evaluate(x)


def total_propensity(model: ReactionModel, x) -> float:
    return sum(p.evaluate(x) for p in model.propensities)


def builtin_isomer():
    """Reversible isomerization x1 <-> x2 with c1 = c2 = 10."""
    model = ReactionModel(
        species_names=("x1", "x2"),
        caps=(80, 80),
        stoich=((-1, 1), (1, -1)),
        propensities=(PropensitySpec(10.0, ((0, 1),)), PropensitySpec(10.0, ((1, 1),))),
        name="isomer",
    )
    return model, InitialCondition((40, 40)), 10.0


# Schlogl parameters; B1 and B2 are buffered and folded into the rates.
SCHLOGL_C1 = 3e-7
SCHLOGL_C2 = 1e-4
SCHLOGL_C3 = 1e-3
SCHLOGL_C4 = 3.5
SCHLOGL_N1 = 1e5
SCHLOGL_N2 = 2e5


def builtin_schlogl():
    """Schlogl model  B1 + 2X <-> 3X,  B2 <-> X.

    The reverse trimolecular channel uses c2 * C(x, 3) without the B1 count,
    which keeps the deterministic steady states (about 85, 248, 565) below
    the cap.
    """
    model = ReactionModel(
        species_names=("X",),
        caps=(900,),
        stoich=((1, -1, 1, -1),),
        propensities=(
            PropensitySpec(SCHLOGL_C1 * SCHLOGL_N1, ((0, 2),)),
            PropensitySpec(SCHLOGL_C2, ((0, 3),)),
            PropensitySpec(SCHLOGL_C3 * SCHLOGL_N2, ()),
            PropensitySpec(SCHLOGL_C4, ((0, 1),)),
        ),
        name="schlogl",
    )
    return model, InitialCondition((250,)), 4.0


BUILTINS = {"isomer": builtin_isomer, "schlogl": builtin_schlogl}


# ---------------------------------------------------------------------------
# text format
#
#   # comment
#   model <name>
#   species <name> cap <int>
#   init <name> <int>
#   reaction <rate> : <lhs> -> <rhs>
#   horizon <float>
#
# <lhs>/<rhs> are "0" (nothing) or terms "[m ]name" joined by "+".

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
_TERM = re.compile(r"(?:(\d+)\s*\*?\s*)?([A-Za-z_][A-Za-z0-9_]*)$")


def _parse_side(text, index, lineno):
    text = text.strip()
    counts: dict[int, int] = {}
    if text in ("0", ""):
        return counts
    for term in text.split("+"):
        match = _TERM.match(term.strip())
        if not match:
            raise ModelError(f"line {lineno}: malformed term {term.strip()!r}")
        mult = int(match.group(1) or 1)
        name = match.group(2)
        if name not in index:
            raise ModelError(f"line {lineno}: unknown species {name!r}")
        if mult < 1:
            raise ModelError(f"line {lineno}: multiplicity must be positive")
        counts[index[name]] = counts.get(index[name], 0) + mult
    return counts


def _parse_number(text, lineno, kind, cast=float):
    try:
        value = cast(text)
    except ValueError:
        raise ModelError(f"line {lineno}: bad {kind} {text!r}") from None
    if isinstance(value, float) and not math.isfinite(value):
        raise ModelError(f"line {lineno}: non-finite {kind}")
    if value < 0:
        raise ModelError(f"line {lineno}: negative {kind} {text}")
    return value


def parse_model(text: str):
    """Parse a model file; returns ``(model, initial_condition, horizon)``."""
    name = "model"
    names: list[str] = []
    caps: list[int] = []
    index: dict[str, int] = {}
    init: dict[int, int] = {}
    reactions = []
    horizon = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, _, rest = line.partition(" ")
        parts = rest.split()
        if keyword == "model":
            if len(parts) != 1:
                raise ModelError(f"line {lineno}: expected 'model <name>'")
            name = parts[0]
        elif keyword == "species":
            if len(parts) != 3 or parts[1] != "cap":
                raise ModelError(f"line {lineno}: expected 'species <name> cap <int>'")
            if not _NAME.match(parts[0]):
                raise ModelError(f"line {lineno}: invalid species name {parts[0]!r}")
            if parts[0] in index:
                raise ModelError(f"line {lineno}: duplicate species {parts[0]!r}")
            index[parts[0]] = len(names)
            names.append(parts[0])
            caps.append(_parse_number(parts[2], lineno, "cap", int))
        elif keyword == "init":
            if len(parts) != 2:
                raise ModelError(f"line {lineno}: expected 'init <name> <int>'")
            if parts[0] not in index:
                raise ModelError(f"line {lineno}: unknown species {parts[0]!r}")
            init[index[parts[0]]] = _parse_number(parts[1], lineno, "count", int)
        elif keyword == "reaction":
            rate_text, colon, body = rest.partition(":")
            if not colon or "->" not in body:
                raise ModelError(f"line {lineno}: expected 'reaction <rate> : lhs -> rhs'")
            rate = _parse_number(rate_text.strip(), lineno, "rate")
            lhs, _, rhs = body.partition("->")
            reactions.append(
                (rate, _parse_side(lhs, index, lineno), _parse_side(rhs, index, lineno), lineno)
            )
        elif keyword == "horizon":
            if len(parts) != 1:
                raise ModelError(f"line {lineno}: expected 'horizon <float>'")
            horizon = _parse_number(parts[0], lineno, "horizon")
        else:
            raise ModelError(f"line {lineno}: unknown keyword {keyword!r}")

    if not names:
        raise ModelError("no species declared")
    if not reactions:
        raise ModelError("no reactions declared")

    stoich = [[0] * len(reactions) for _ in names]
    props = []
    for r, (rate, lhs, rhs, lineno) in enumerate(reactions):
        for i in range(len(names)):
            stoich[i][r] = rhs.get(i, 0) - lhs.get(i, 0)
        if all(stoich[i][r] == 0 for i in range(len(names))):
            raise ModelError(f"line {lineno}: reaction does not change the state")
        props.append(PropensitySpec(rate, tuple(sorted(lhs.items()))))

    model = ReactionModel(
        species_names=tuple(names),
        caps=tuple(caps),
        stoich=tuple(tuple(row) for row in stoich),
        propensities=tuple(props),
        name=name,
    )
    ic = InitialCondition(tuple(init.get(i, 0) for i in range(len(names))))
    model.check_initial(ic)
    return model, ic, horizon


def _format_side(counts, names):
    if not counts:
        return "0"
    return " + ".join(
        names[i] if m == 1 else f"{m} {names[i]}" for i, m in sorted(counts.items())
    )


def format_model(model: ReactionModel, init: InitialCondition | None = None, horizon=None) -> str:
    """Serialize to the text format accepted by ``parse_model``."""
    names = model.species_names
    lines = [f"model {model.name}"]
    for name, cap in zip(names, model.caps):
        lines.append(f"species {name} cap {cap}")
    if init is not None:
        for name, v in zip(names, init.state):
            lines.append(f"init {name} {v}")
    for r, spec in enumerate(model.propensities):
        lhs = dict(spec.orders)
        rhs = {}
        for i in range(model.n_species):
            n_out = lhs.get(i, 0) + model.stoich[i][r]
            if n_out < 0:
                raise ModelError(
                    f"reaction {r + 1} consumes {names[i]} without a matching reactant order"
                )
            if n_out:
                rhs[i] = n_out
        lines.append(f"reaction {spec.rate!r} : {_format_side(lhs, names)} -> {_format_side(rhs, names)}")
    if horizon is not None:
        lines.append(f"horizon {float(horizon)!r}")
    return "\n".join(lines) + "\n"


def load_model(source: str):
    """Resolve a built-in name or read a model file path."""
    if source in BUILTINS:
        return BUILTINS[source]()
    with open(source, encoding="utf-8") as fh:
        return parse_model(fh.read())
