"""Big-step interpreter for the vectorised target language.

A command runs under a random database, a state of lifted variables, and a
finite antichain of active indices, producing a new state and a score
tensor whose domain is exactly that antichain.  Loops come in two modes:
"fixpoint" stops re-running the body once a round leaves the state
unchanged (as a represented function), "unrolled" always runs the declared
number of rounds.  Both keep only the final round's scores.
"""

from __future__ import annotations

import math
from typing import Optional

from .errors import MissingString, PrimitiveDomainError, ScoreNaN
from .evalexpr import eval_expr
from .indices import AChain, Index, ROOT_CHAIN, in_down
from .pmap import PMap
from .rdb import Rdb
from .state import SPARSE, LoopRound, TgtOutcome, make_state
from .syntax import (Assign, Cmd, ExtendIndex, Fetch, For, Ifz, LookupIndex,
                     LoopFixpt, Score, Seq, Shift, Skip, walk, validate_tier)

FIXPOINT = "fixpoint"
UNROLLED = "unrolled"


def shift_rho(chain: AChain, name: str) -> dict[Index, Index]:
    """The relocation map of shift: each slot receives its predecessor.

    Slot (name, 0) receives the value below the name level; slot
    (name, k + 1) receives slot (name, k)'s.
    """
    rho: dict[Index, Index] = {}
    members = list(chain)
    for target in members:
        if not target.pairs or target.pairs[-1][0] != name:
            continue
        k = target.pairs[-1][1]
        if k == 0:
            rho[target.parent()] = target
        else:
            source = target.parent().append(name, k - 1)
            if in_down(source, members):
                rho[source] = target
    return rho


def exit_rho(chain: AChain, name: str, count: int) -> dict[Index, Index]:
    """The relocation applied when extend_index restores its outer chain."""
    return {i.append(name, count - 1): i for i in chain}


def loop_sites(program: Cmd) -> dict[int, int]:
    """Loop node identity -> preorder site number."""
    sites: dict[int, int] = {}
    from .syntax import ExtendedLoopShift
    for node in walk(program):
        if isinstance(node, (LoopFixpt, ExtendedLoopShift)):
            sites[id(node)] = len(sites)
    return sites


class _TargetRun:
    def __init__(self, program: Cmd, db: Rdb, mode: str, mutant: Optional[str]):
        self.db = db
        self.mode = mode
        self.mutant = mutant
        self.sites = loop_sites(program)
        self.trace: list[LoopRound] = []

    def eval_at(self, expr, state, i: Index):
        return eval_expr(expr, lambda var: state.read(var, i))

    def run(self, c: Cmd, state, chain: AChain):
        if isinstance(c, Skip):
            return state, {i: 0.0 for i in chain}
        if isinstance(c, Score):
            tensor: dict[Index, float] = {}
            for i in chain:
                value = self.eval_at(c.expr, state, i)
                if self.mutant == "score-nudge":
                    value += 1e-6
                if math.isnan(value):
                    raise ScoreNaN(f"score evaluated to NaN at {i.text()}")
                tensor[i] = value
            return state, tensor
        if isinstance(c, Assign):
            written = {i: self.eval_at(c.expr, state, i) for i in chain}
            return state.updated(c.var, written), {i: 0.0 for i in chain}
        if isinstance(c, Fetch):
            written = {
                i: self.db.lookup(self.eval_at(c.index, state, i)) for i in chain
            }
            return state.updated(c.var, written), {i: 0.0 for i in chain}
        if isinstance(c, Seq):
            score: dict[Index, float] = {}
            for item in c.items:
                state, part = self.run(item, state, chain)
                score = _oplus(score, part)
            return state, score
        if isinstance(c, Ifz):
            zero, nonzero = chain.partition(
                lambda i: self.eval_at(c.cond, state, i) == 0
            )
            state, then_score = self.run(c.then, state, zero)
            state, else_score = self.run(c.orelse, state, nonzero)
            return state, _oplus(then_score, else_score)
        if isinstance(c, For):
            score: dict[Index, float] = {}
            for k in range(c.count):
                state = state.updated(c.var, {i: k for i in chain})
                state, part = self.run(c.body, state, chain)
                score = _oplus(score, part)
            return state, score
        if isinstance(c, LookupIndex):
            written: dict[Index, int] = {}
            for i in chain:
                value = i.lookup(c.name)
                if value is None:
                    raise MissingString(
                        f'lookup_index("{c.name}") under {i.text()}'
                    )
                written[i] = value
            return state.updated(c.var, written), {i: 0.0 for i in chain}
        if isinstance(c, Shift):
            return state.copied(shift_rho(chain, c.name)), {i: 0.0 for i in chain}
        if isinstance(c, ExtendIndex):
            inner = chain.extend(c.name, c.count)
            state, inner_score = self.run(c.body, state, inner)
            state = state.copied(exit_rho(chain, c.name, c.count))
            score = {
                i: sum(inner_score[i.append(c.name, k)] for k in range(c.count))
                for i in chain
            }
            return state, score
        if isinstance(c, LoopFixpt):
            return self.run_loop(c, state, chain)
        raise TypeError(f"not a target command: {c!r}")

    def run_loop(self, c: LoopFixpt, state, chain: AChain):
        site = self.sites[id(c)]
        score: dict[Index, float] = {i: 0.0 for i in chain}
        hit = False
        rounds = 0
        for _ in range(c.count):
            previous = state
            state, score = self.run(c.body, state, chain)
            rounds += 1
            if self.mode == FIXPOINT:
                if self.mutant == "loop-one-round":
                    hit = True
                    break
                if previous.same_function(state):
                    hit = True
                    break
        self.trace.append(LoopRound(site, rounds, hit))
        return state, score


def _oplus(left: dict, right: dict) -> dict:
    out = dict(left)
    for i, v in right.items():
        out[i] = out[i] + v if i in out else v
    return out


def run_tgt(c: Cmd, db: Rdb, state=None, chain: AChain = ROOT_CHAIN,
            mode: str = FIXPOINT, backend: str = SPARSE,
            check_tier: bool = True, mutant: Optional[str] = None) -> TgtOutcome:
    if check_tier:
        validate_tier(c, "target")
    if mode not in (FIXPOINT, UNROLLED):
        raise ValueError(f"unknown mode {mode!r}")
    if state is None:
        state = make_state(backend)
    runner = _TargetRun(c, db, mode, mutant)
    try:
        final, score = runner.run(c, state, chain)
    except PrimitiveDomainError as err:
        raise err if err.path else err.with_path("target run") from None
    return TgtOutcome(final, PMap(score), tuple(runner.trace))


def run_under_empty(c: Cmd, db: Rdb, state=None, backend: str = SPARSE) -> TgtOutcome:
    from .indices import EMPTY_CHAIN
    return run_tgt(c, db, state, EMPTY_CHAIN, backend=backend)
