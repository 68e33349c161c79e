"""Merge policies: pure decision functions over the top of the run stack.

Every policy is split into a *trigger* (returns the merge the inner loop
should perform, or ``None`` once the stack is quiescent) and the public
``*_rule`` wrapper, which falls back to Push while runs are pending and to the
wrap-up merge of Y and Z once the input is exhausted.

All comparisons involving alpha are done on exact rationals by
cross-multiplication: ``|Y| <= alpha |Z|`` with ``alpha = p/q`` is evaluated
as ``q*|Y| <= p*|Z|``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Optional

from .errors import AlphaOutOfRange, UnknownPolicy

PHI = (1 + math.sqrt(5)) / 2
# Smallest rational accepted by alpha-merge without --force; phi itself is
# irrational, so the guard sits just above it.
ALPHA_MERGE_MIN = Fraction(1619, 1000)


class Action(enum.IntEnum):
    PUSH = 0
    MERGE_YZ = 1
    MERGE_XY = 2


class StackView(NamedTuple):
    """Lengths of the top four stack entries (``None`` when absent).

    ``z`` is the topmost entry.  ``pending`` tells whether original runs remain
    to be pushed and ``height`` is the full stack height.
    """

    w: Optional[int]
    x: Optional[int]
    y: Optional[int]
    z: Optional[int]
    pending: bool
    height: int

    @classmethod
    def from_lengths(cls, lengths, pending):
        h = len(lengths)
        top = [None] * max(0, 4 - h) + list(lengths[-4:])
        return cls(top[0], top[1], top[2], top[3], bool(pending), h)


def _fallback(view: StackView) -> Action:
    if view.pending:
        return Action.PUSH
    return wrapup_rule(view)


def wrapup_rule(view: StackView) -> Optional[Action]:
    """Final loop of every policy: merge Y and Z until one run is left."""
    if view.height >= 2:
        return Action.MERGE_YZ
    return None


# -- triggers -----------------------------------------------------------------

def timsort_trigger(view: StackView) -> Optional[Action]:
    # a test that mentions a missing entry is false
    w, x, y, z = view.w, view.x, view.y, view.z
    if x is not None and x < z:
        return Action.MERGE_XY
    if x is not None and x <= y + z:
        return Action.MERGE_YZ
    if w is not None and w <= x + y:
        return Action.MERGE_YZ
    if y is not None and y <= z:
        return Action.MERGE_YZ
    return None


def alpha_stack_trigger(view: StackView, alpha: Fraction) -> Optional[Action]:
    p, q = alpha.numerator, alpha.denominator
    if view.y is not None and q * view.y <= p * view.z:
        return Action.MERGE_YZ
    return None


def shivers_trigger(view: StackView) -> Optional[Action]:
    y = view.y
    if y is not None and 1 << (y.bit_length() - 1) <= view.z:
        return Action.MERGE_YZ
    return None


def augmented_shivers_trigger(view: StackView) -> Optional[Action]:
    y, z, x = view.y, view.z, view.x
    if y is None or 1 << (y.bit_length() - 1) > z:
        return None
    if x is None or z <= x:
        return Action.MERGE_YZ
    return Action.MERGE_XY


def two_merge_trigger(view: StackView) -> Optional[Action]:
    y, z, x = view.y, view.z, view.x
    if y is None or not y < 2 * z:
        return None
    if x is not None and x < z:
        return Action.MERGE_XY
    return Action.MERGE_YZ


def alpha_merge_trigger(view: StackView, alpha: Fraction) -> Optional[Action]:
    # missing X behaves as an infinitely long virtual bottom run
    p, q = alpha.numerator, alpha.denominator
    y, z, x = view.y, view.z, view.x
    if y is None:
        return None
    if q * y < p * z or (x is not None and q * x < p * y):
        if x is not None and x < z:
            return Action.MERGE_XY
        return Action.MERGE_YZ
    return None


# -- public rules ---------------------------------------------------------------

def timsort_rule(view: StackView) -> Action:
    return timsort_trigger(view) or _fallback(view)


def alpha_stack_rule(view: StackView, alpha) -> Action:
    alpha = check_alpha("alpha-stack", alpha)
    return alpha_stack_trigger(view, alpha) or _fallback(view)


def shivers_rule(view: StackView) -> Action:
    return shivers_trigger(view) or _fallback(view)


def augmented_shivers_rule(view: StackView) -> Action:
    return augmented_shivers_trigger(view) or _fallback(view)


def two_merge_rule(view: StackView) -> Action:
    return two_merge_trigger(view) or _fallback(view)


def alpha_merge_rule(view: StackView, alpha, force: bool = False) -> Action:
    alpha = check_alpha("alpha-merge", alpha, force=force)
    return alpha_merge_trigger(view, alpha) or _fallback(view)


# -- alpha handling ---------------------------------------------------------------

def parse_alpha(value) -> Fraction:
    """Convert ``value`` to an exact rational.

    Decimal strings are taken literally ("1.62" -> 81/50), as are floats via
    their shortest repr, so 1.7 becomes 17/10 rather than the binary double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        value = repr(value)
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise AlphaOutOfRange(f"alpha {value!r} is not a rational number") from exc


def check_alpha(kind: str, alpha, force: bool = False) -> Fraction:
    if alpha is None:
        raise AlphaOutOfRange(f"{kind} needs an alpha value")
    a = parse_alpha(alpha)
    if a <= 1:
        raise AlphaOutOfRange(f"{kind}: alpha must exceed 1, got {a}")
    if kind == "alpha-merge":
        if force:
            if a > 2:
                raise AlphaOutOfRange(f"alpha-merge: alpha must be <= 2, got {a}")
        elif not ALPHA_MERGE_MIN <= a < 2:
            raise AlphaOutOfRange(
                f"alpha-merge needs {ALPHA_MERGE_MIN} <= alpha < 2 (above the "
                f"golden ratio); got {a}. Use force=True to experiment.")
    return a


# -- policy identifiers -------------------------------------------------------------

# name -> (kernel code, awareness (k1, k2), takes alpha)
BUILTIN = {
    "timsort": (0, (4, 3), False),
    "alpha-stack": (1, (2, 2), True),
    "shivers": (2, (2, 2), False),
    "augmented-shivers": (3, (3, 3), False),
    "two-merge": (4, (3, 3), False),
    "alpha-merge": (5, (3, 3), True),
}

ALIASES = {
    "tim": "timsort",
    "astack": "alpha-stack",
    "alpha_stack": "alpha-stack",
    "ssort": "shivers",
    "augmented_shivers": "augmented-shivers",
    "aug-shivers": "augmented-shivers",
    "2-merge": "two-merge",
    "two_merge": "two-merge",
    "amerge": "alpha-merge",
    "alpha_merge": "alpha-merge",
}


class ExtensionContext(NamedTuple):
    """Extra information an extension policy may read.

    ``n`` is the total input length and ``position`` the index of the first
    element after the top run Z (the start of the next pending run).
    """

    n: int
    position: int


@dataclass(frozen=True)
class Extension:
    name: str
    trigger: Callable[[StackView, ExtensionContext], Optional[Action]]
    awareness: tuple = (3, 3)


_EXTENSIONS: dict = {}


def register_extension(name, trigger, awareness=(3, 3)):
    """Register an externally sourced merge rule under ``name``.

    ``trigger(view, ctx)`` must return ``Action.MERGE_YZ``/``MERGE_XY`` while
    the inner loop should keep merging and ``None`` once it is quiescent.
    Extensions run on the reference engine only.
    """
    name = name.lower()
    if name in BUILTIN or name in ALIASES:
        raise ValueError(f"{name!r} is a built-in policy")
    _EXTENSIONS[name] = Extension(name, trigger, tuple(awareness))


def unregister_extension(name):
    _EXTENSIONS.pop(name.lower(), None)


@dataclass(frozen=True)
class Policy:
    """A merge policy plus its parameter, e.g. ``Policy("alpha-merge", 17/10)``."""

    kind: str
    alpha: Optional[Fraction] = None

    @property
    def code(self) -> int:
        return BUILTIN[self.kind][0] if self.kind in BUILTIN else -1

    @property
    def awareness(self) -> tuple:
        if self.kind in BUILTIN:
            return BUILTIN[self.kind][1]
        return _EXTENSIONS[self.kind].awareness

    @property
    def is_extension(self) -> bool:
        return self.kind not in BUILTIN

    @property
    def label(self) -> str:
        if self.alpha is None:
            return self.kind
        return f"{self.kind}({format_alpha(self.alpha)})"

    def trigger(self, view: StackView, ctx: Optional[ExtensionContext] = None):
        k = self.kind
        if k == "timsort":
            return timsort_trigger(view)
        if k == "alpha-stack":
            return alpha_stack_trigger(view, self.alpha)
        if k == "shivers":
            return shivers_trigger(view)
        if k == "augmented-shivers":
            return augmented_shivers_trigger(view)
        if k == "two-merge":
            return two_merge_trigger(view)
        if k == "alpha-merge":
            return alpha_merge_trigger(view, self.alpha)
        return _EXTENSIONS[k].trigger(view, ctx)

    def next_action(self, view: StackView, ctx=None) -> Optional[Action]:
        return self.trigger(view, ctx) or _fallback(view)

    def __str__(self):
        return self.label


def format_alpha(a: Fraction) -> str:
    """Decimal text when alpha terminates in base 10, else ``p/q``."""
    # print terminating decimals as decimals, anything else as p/q
    q = a.denominator
    while q % 2 == 0:
        q //= 2
    while q % 5 == 0:
        q //= 5
    if q != 1:
        return f"{a.numerator}/{a.denominator}"
    s = f"{a.numerator / a.denominator:.12f}".rstrip("0")
    return s[:-1] if s.endswith(".") else s


def make_policy(name, alpha=None, force: bool = False) -> Policy:
    """Resolve a policy name (and alpha where required) to a ``Policy``.

    ``name`` may carry the parameter inline, as in ``"alpha-merge:1.62"``.
    """
    if isinstance(name, Policy):
        return name
    key = str(name).strip().lower()
    if ":" in key:
        key, inline = key.split(":", 1)
        if alpha is None:
            alpha = inline
    key = ALIASES.get(key, key)
    if key in BUILTIN:
        if BUILTIN[key][2]:
            return Policy(key, check_alpha(key, alpha, force=force))
        if alpha is not None:
            raise AlphaOutOfRange(f"{key} takes no alpha parameter")
        return Policy(key)
    if key in _EXTENSIONS:
        return Policy(key)
    raise UnknownPolicy(f"unknown policy {name!r}; choose from "
                        f"{', '.join(sorted(BUILTIN) + sorted(_EXTENSIONS))}")
