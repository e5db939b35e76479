"""Conflict-driven clause-learning SAT solver.

Two watched literals (binary clauses get their own implication lists),
first-UIP learning with local minimization, VSIDS branching with phase
saving, Luby restarts and LBD-based learned clause deletion. Runs are
deterministic for a fixed configuration.

Internally variable ``v`` (1-based) has literals ``2v`` (positive) and
``2v+1`` (negative).
"""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from typing import Optional

from .blast import CnfFormula


@dataclass
class SolverConfig:
    restart_unit: int = 100          # conflicts per Luby unit
    var_decay: float = 0.95
    first_reduce: int = 2000         # learned clauses kept before the first cleanup
    reduce_growth: float = 1.3
    keep_lbd: int = 2                # "glue" clauses are never deleted
    default_phase: bool = False


@dataclass
class SolveResult:
    status: str                      # "sat", "unsat" or "unknown"
    model: Optional[dict] = None     # DIMACS variable -> bool, only for sat
    stats: dict = field(default_factory=dict)

    def value(self, lit: int) -> bool:
        v = self.model[abs(lit)]
        return v if lit > 0 else not v


def luby(i: int) -> int:
    """i-th element (0-based) of the Luby sequence 1 1 2 1 1 2 4 ..."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i %= size
    return 1 << seq


class CDCLSolver:
    def __init__(self, num_vars: int, clauses, config: SolverConfig | None = None,
                 priority_vars=()):
        self.config = config or SolverConfig()
        self.num_vars = n = num_vars
        self.val = [0] * (2 * n + 2)      # per literal: 1 true, -1 false, 0 free
        self.level = [0] * (n + 1)
        self.reason: list = [None] * (n + 1)
        self.polarity = [self.config.default_phase] * (n + 1)
        self.activity = [0.0] * (n + 1)
        self.seen = [False] * (n + 1)
        self.var_inc = 1.0
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.watches: list[list] = [[] for _ in range(2 * n + 2)]
        self.bins: list[list] = [[] for _ in range(2 * n + 2)]
        self.problem: list[list[int]] = []
        self.learnts: list[list[int]] = []
        self.lbd: dict[int, int] = {}
        self.ok = True
        self.stats = {"conflicts": 0, "decisions": 0, "propagations": 0,
                      "restarts": 0, "learned": 0, "deleted": 0}
        for v in priority_vars:
            self.activity[v] = 1.0
        self.heap = [(-self.activity[v], v) for v in range(1, n + 1)]
        heapq.heapify(self.heap)
        self.original = [list(c) for c in clauses]
        for c in clauses:
            self._add_problem_clause(c)

    # construction --------------------------------------------------------
    def _add_problem_clause(self, dimacs_clause):
        if not self.ok:
            return
        lits = set()
        for x in dimacs_clause:
            if x == 0 or abs(x) > self.num_vars:
                raise ValueError(f"literal {x} out of range for {self.num_vars} variables")
            lit = 2 * x if x > 0 else -2 * x + 1
            if lit ^ 1 in lits:
                return  # tautology
            lits.add(lit)
        c = sorted(lits)
        if not c:
            self.ok = False
            return
        if len(c) == 1:
            lit = c[0]
            if self.val[lit] == -1:
                self.ok = False
            elif self.val[lit] == 0:
                self._enqueue(lit, None)
            return
        self.problem.append(c)
        self._attach(c)

    def _attach(self, c):
        if len(c) == 2:
            self.bins[c[0]].append((c[1], c))
            self.bins[c[1]].append((c[0], c))
        else:
            self.watches[c[0]].append(c)
            self.watches[c[1]].append(c)

    # trail ------------------------------------------------------------------
    def _enqueue(self, lit, reason):
        v = lit >> 1
        self.val[lit] = 1
        self.val[lit ^ 1] = -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _cancel_until(self, lvl):
        if len(self.trail_lim) <= lvl:
            return
        val, polarity, reason, act, heap = self.val, self.polarity, self.reason, self.activity, self.heap
        start = self.trail_lim[lvl]
        trail = self.trail
        for i in range(len(trail) - 1, start - 1, -1):
            lit = trail[i]
            v = lit >> 1
            val[lit] = 0
            val[lit ^ 1] = 0
            reason[v] = None
            polarity[v] = not (lit & 1)
            heapq.heappush(heap, (-act[v], v))
        del trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = start

    # propagation ------------------------------------------------------------
    def _propagate(self):
        val = self.val
        trail = self.trail
        watches = self.watches
        bins = self.bins
        level = self.level
        reason = self.reason
        dl = len(self.trail_lim)
        qhead = self.qhead
        confl = None
        props = 0
        while qhead < len(trail):
            p = trail[qhead]
            qhead += 1
            props += 1
            false_lit = p ^ 1
            for other, c in bins[false_lit]:
                vo = val[other]
                if vo == 1:
                    continue
                if vo == -1:
                    confl = c
                    break
                if c[0] != other:
                    c[0], c[1] = other, false_lit
                val[other] = 1
                val[other ^ 1] = -1
                level[other >> 1] = dl
                reason[other >> 1] = c
                trail.append(other)
            if confl is not None:
                break
            ws = watches[false_lit]
            i = j = 0
            nws = len(ws)
            while i < nws:
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0] = c[1]
                    c[1] = false_lit
                first = c[0]
                if val[first] == 1:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    if val[lk] != -1:
                        c[1] = lk
                        c[k] = false_lit
                        watches[lk].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if val[first] == -1:
                        confl = c
                        while i < nws:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                    else:
                        val[first] = 1
                        val[first ^ 1] = -1
                        level[first >> 1] = dl
                        reason[first >> 1] = c
                        trail.append(first)
            del ws[j:]
            if confl is not None:
                break
        self.qhead = len(trail) if confl is not None else qhead
        self.stats["propagations"] += props
        return confl

    # learning ----------------------------------------------------------------
    def _bump(self, v):
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for u in range(1, self.num_vars + 1):
                act[u] *= 1e-100
            self.var_inc *= 1e-100
            self._rebuild_heap()
        elif self.val[2 * v] == 0:
            heapq.heappush(self.heap, (-act[v], v))

    def _rebuild_heap(self):
        act, val = self.activity, self.val
        self.heap = [(-act[v], v) for v in range(1, self.num_vars + 1) if val[2 * v] == 0]
        heapq.heapify(self.heap)

    def _analyze(self, confl):
        seen, level, reason, trail = self.seen, self.level, self.reason, self.trail
        dl = len(self.trail_lim)
        learnt = [0]
        path = 0
        p = -1
        idx = len(trail) - 1
        c = confl
        while True:
            start = 0 if p == -1 else 1
            for k in range(start, len(c)):
                q = c[k]
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    self._bump(v)
                    seen[v] = True
                    if level[v] >= dl:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            v = p >> 1
            c = reason[v]
            seen[v] = False
            path -= 1
            if path == 0:
                break
        learnt[0] = p ^ 1

        # local minimization: drop literals implied by the rest of the clause
        out = [learnt[0]]
        for q in learnt[1:]:
            r = reason[q >> 1]
            if r is None:
                out.append(q)
                continue
            for x in r[1:]:
                vx = x >> 1
                if not seen[vx] and level[vx] > 0:
                    out.append(q)
                    break
        for q in learnt[1:]:
            seen[q >> 1] = False

        if len(out) == 1:
            bt = 0
        else:
            mi = max(range(1, len(out)), key=lambda i: level[out[i] >> 1])
            out[1], out[mi] = out[mi], out[1]
            bt = level[out[1] >> 1]
        lbd = len({level[q >> 1] for q in out})
        return out, bt, lbd

    def _reduce_db(self):
        keep_lbd = self.config.keep_lbd
        lbd = self.lbd
        ranked = sorted(self.learnts, key=lambda c: (lbd[id(c)], len(c)))
        half = len(ranked) // 2
        kept = [c for i, c in enumerate(ranked) if i < half or lbd[id(c)] <= keep_lbd]
        removed = len(self.learnts) - len(kept)
        self.stats["deleted"] += removed
        kept_ids = {id(c) for c in kept}
        self.lbd = {k: v for k, v in lbd.items() if k in kept_ids}
        self.learnts = kept
        for wl in self.watches:
            wl.clear()
        for bl in self.bins:
            bl.clear()
        for c in self.problem:
            self._attach(c)
        for c in self.learnts:
            self._attach(c)

    # search --------------------------------------------------------------------
    def _pick_branch(self):
        heap, val, act = self.heap, self.val, self.activity
        while heap:
            a, v = heapq.heappop(heap)
            if val[2 * v] == 0 and -a == act[v]:
                return v
        # stale entries may have hidden a free variable
        for v in range(1, self.num_vars + 1):
            if val[2 * v] == 0:
                return v
        return 0

    def solve(self, timeout: float | None = None) -> SolveResult:
        t0 = time.perf_counter()
        deadline = None if timeout is None else t0 + timeout
        status = self._search(deadline)
        stats = dict(self.stats)
        stats["solve_time"] = time.perf_counter() - t0
        if status != "sat":
            return SolveResult(status, None, stats)
        model = {v: self.val[2 * v] == 1 for v in range(1, self.num_vars + 1)}
        for c in self.original:
            if not any(model[abs(x)] == (x > 0) for x in c):
                raise AssertionError(f"solver produced a model violating clause {c}")
        return SolveResult("sat", model, stats)

    def _search(self, deadline):
        if not self.ok:
            return "unsat"
        if self._propagate() is not None:
            return "unsat"
        cfg = self.config
        stats = self.stats
        max_learnts = cfg.first_reduce
        restart_idx = 0
        budget = luby(0) * cfg.restart_unit
        since_restart = 0
        decisions_since_check = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                stats["conflicts"] += 1
                since_restart += 1
                if not self.trail_lim:
                    return "unsat"
                learnt, bt, lbd = self._analyze(confl)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self.learnts.append(learnt)
                    self.lbd[id(learnt)] = lbd
                    self._attach(learnt)
                    self._enqueue(learnt[0], learnt)
                stats["learned"] += 1
                self.var_inc /= cfg.var_decay
                if deadline is not None and stats["conflicts"] % 64 == 0 \
                        and time.perf_counter() > deadline:
                    return "unknown"
                continue
            if since_restart >= budget:
                stats["restarts"] += 1
                restart_idx += 1
                budget = luby(restart_idx) * cfg.restart_unit
                since_restart = 0
                self._cancel_until(0)
                if len(self.learnts) > max_learnts:
                    self._reduce_db()
                    max_learnts = int(max_learnts * cfg.reduce_growth)
                continue
            v = self._pick_branch()
            if v == 0:
                return "sat"
            stats["decisions"] += 1
            decisions_since_check += 1
            if deadline is not None and decisions_since_check >= 512:
                decisions_since_check = 0
                if time.perf_counter() > deadline:
                    return "unknown"
            self.trail_lim.append(len(self.trail))
            self._enqueue(2 * v if self.polarity[v] else 2 * v + 1, None)


def solve(f: CnfFormula, timeout: float | None = None, config: SolverConfig | None = None,
          priority_vars=()) -> SolveResult:
    """Decide ``f``; ``unknown`` when the timeout (seconds) expires first."""
    return CDCLSolver(f.num_vars, f.clauses, config, priority_vars).solve(timeout)
