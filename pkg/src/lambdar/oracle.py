"""Reference pure lambda-calculus semantics and random term generators."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .errors import FuelExhausted, NotABetaRedex, NotPure
from .term_core import (
    Abs,
    App,
    Dist,
    FreshSupply,
    Sub,
    Var,
    all_names,
    alpha_key,
    children,
    is_pure,
    replace_at,
    subst_meta,
    subterm,
)


def beta_step_at(p, path, supply: FreshSupply):
    """Contract the beta redex at ``path``."""
    if not is_pure(p):
        raise NotPure("beta steps are defined on pure terms")
    r = subterm(p, path)
    if not (isinstance(r, App) and isinstance(r.fun, Abs)):
        raise NotABetaRedex("no beta redex at that position")
    supply.avoid(all_names(p))
    return replace_at(p, path, subst_meta(r.fun.body, r.fun.binder, r.arg, supply))


def beta_redexes(p, path=()):
    """Positions of all beta redexes, outermost-leftmost first."""
    out = []
    if isinstance(p, App) and isinstance(p.fun, Abs):
        out.append(path)
    for sel, c in children(p):
        out += beta_redexes(c, path + (sel,))
    return out


class Reach(str, Enum):
    REACHED = "Reached"
    NOT_WITHIN_FUEL = "NotWithinFuel"


def beta_reach(p, q, fuel: int, supply: FreshSupply) -> Reach:
    """Breadth-first search over beta reducts of ``p`` for a term alpha-equal to ``q``.

    ``fuel`` bounds the number of terms expanded.
    """
    goal = alpha_key(q)
    seen = {alpha_key(p)}
    queue = deque([p])
    expanded = 0
    while queue:
        cur = queue.popleft()
        if alpha_key(cur) == goal:
            return Reach.REACHED
        if expanded >= fuel:
            break
        expanded += 1
        for path in beta_redexes(cur):
            nxt = beta_step_at(cur, path, supply)
            k = alpha_key(nxt)
            if k not in seen:
                seen.add(k)
                queue.append(nxt)
    return Reach.NOT_WITHIN_FUEL


def beta_normalize(p, fuel: int, supply: FreshSupply):
    """Leftmost-outermost normal form; raises ``FuelExhausted`` after ``fuel`` steps."""
    for _ in range(fuel + 1):
        rs = beta_redexes(p)
        if not rs:
            return p
        if _ == fuel:
            break
        p = beta_step_at(p, rs[0], supply)
    raise FuelExhausted(f"no beta normal form within {fuel} steps")


# ---------------------------------------------------------------------------
# generators


class Grammar(str, Enum):
    PURE = "PureLambda"
    U = "U"


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    max_size: int = 8
    var_pool: tuple = ("x", "y", "z", "w")
    closed: bool = False
    grammar: Grammar = Grammar.PURE

    def __post_init__(self):
        if self.max_size < 1:
            raise ValueError("max_size must be at least 1")


def gen_term(cfg: GenConfig):
    """A pseudo-random term, deterministic in ``cfg``."""
    rng = random.Random(cfg.seed)
    return _Gen(rng, cfg).term(cfg.max_size, ())


@dataclass
class _Gen:
    rng: random.Random
    cfg: GenConfig
    supply: FreshSupply = field(default_factory=FreshSupply)

    def var(self, bound):
        pool = list(bound) if self.cfg.closed else list(self.cfg.var_pool) + list(bound)
        if not pool:
            return None
        return Var(self.rng.choice(pool))

    def pure(self, size, bound):
        if size <= 1:
            v = self.var(bound)
            if v is not None:
                return v
            size = 2
        if size == 2 or self.rng.random() < 0.35:
            b = self.rng.choice(self.cfg.var_pool)
            return Abs(b, self.pure(size - 1, bound + (b,)))
        k = self.rng.randint(1, size - 2)
        return App(self.pure(k, bound), self.pure(size - 1 - k, bound))

    def term(self, size, bound):
        if self.cfg.grammar is Grammar.PURE:
            return self.pure(size, bound)
        return self.u(size, bound)

    def u(self, size, bound):
        if size <= 2:
            return self.pure(size, bound)
        r = self.rng.random()
        if r < 0.25:
            b = self.rng.choice(self.cfg.var_pool)
            return Abs(b, self.pure(size - 1, bound + (b,)))
        if r < 0.55:
            k = self.rng.randint(1, size - 2)
            return App(self.u(k, bound), self.u(size - 1 - k, bound))
        b = self.rng.choice(self.cfg.var_pool)
        k = self.rng.randint(1, size - 2)
        body = self.u(k, bound + (b,))
        if r < 0.8 or size - 1 - k < 2:
            return Sub(body, b, self.u(size - 1 - k, bound))
        return Dist(body, b, self.t_content(size - 1 - k, bound))

    def t_content(self, size, bound):
        """An abstraction in T: its body is a pure term, possibly pre-split."""
        y = self.rng.choice(self.cfg.var_pool)
        lam = Abs(y, self.pure(max(size - 1, 1), bound + (y,)))
        if self.rng.random() < 0.5:
            return lam
        from .strategies import st_normalize

        z = "z0"
        return st_normalize(Abs(y, Sub(Var(z), z, lam.body)), FreshSupply())


def shrink(t) -> list:
    """Strictly smaller candidate terms, smallest first."""
    out = []
    for sel, c in children(t):
        out.append(c)
    if isinstance(t, Abs):
        out += [Abs(t.binder, s) for s in shrink(t.body)]
    elif isinstance(t, App):
        out += [App(s, t.arg) for s in shrink(t.fun)]
        out += [App(t.fun, s) for s in shrink(t.arg)]
    elif isinstance(t, (Sub, Dist)):
        out += [type(t)(s, t.binder, t.content) for s in shrink(t.body)]
        if isinstance(t, Sub):
            out += [Sub(t.body, t.binder, s) for s in shrink(t.content)]
    from .term_core import size

    return sorted(out, key=size)


def minimize(t, fails) -> object:
    """Greedily shrink ``t`` while ``fails`` keeps holding."""
    changed = True
    while changed:
        changed = False
        for cand in shrink(t):
            try:
                bad = fails(cand)
            except Exception:
                bad = False
            if bad:
                t, changed = cand, True
                break
    return t


__all__ = [
    "beta_step_at", "beta_redexes", "beta_reach", "beta_normalize", "Reach",
    "Grammar", "GenConfig", "gen_term", "shrink", "minimize",
]
