"""Plan-style instances: one user per step, weighted equality constraints.

A plan assigns each step exactly one user.  Grouping steps by their assigned
user yields a set partition, and constraint weight only depends on that
partition, so exhaustive partition enumeration (restricted growth strings)
plus a min-cost matching of blocks to users solves the problem exactly.
Practical up to about 12 steps; a guard refuses more.

Two reductions connect these instances to authorization relations:
one for instances with only user-based separation/binding constraints, and
one for existence-based binding plus user-based separation, which expands
each resource into per-partner steps.
"""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, Optional

from .constraints import MAX_PENALTY, PenaltySpec
from .matching import INF, assignment_cost, min_cost_assignment
from .model import (
    AuthCost,
    AuthorizationRelation,
    GuardError,
    Instance,
    _check_names,
    _reject_unknown,
    canonical_json,
)

log = logging.getLogger("vapep.wsp")

MAX_STEPS_EXACT = 12

MUST_EQUAL = "must_equal"
MUST_DIFFER = "must_differ"
DISJOINT = "disjoint"

Plan = Dict[str, str]


@dataclass(frozen=True)
class WspConstraint:
    kind: str
    scope: tuple
    ell: Optional[int] = None
    spec: Optional[PenaltySpec] = None

    def __post_init__(self):
        if self.kind in (MUST_EQUAL, MUST_DIFFER):
            if len(self.scope) != 2 or self.scope[0] == self.scope[1]:
                raise ValueError(f"{self.kind} needs two distinct steps")
            ell = 1 if self.ell is None else self.ell
            if not isinstance(ell, int) or isinstance(ell, bool) or not 1 <= ell <= MAX_PENALTY:
                raise ValueError(f"{self.kind} penalty must be in [1, {MAX_PENALTY}]")
            object.__setattr__(self, "ell", ell)
        elif self.kind == DISJOINT:
            if len(self.scope) != 2:
                raise ValueError("disjoint needs two step groups")
            a, b = tuple(self.scope[0]), tuple(self.scope[1])
            if not a or not b:
                raise ValueError("disjoint groups must be non-empty")
            object.__setattr__(self, "scope", (a, b))
            spec = self.spec if self.spec is not None else PenaltySpec()
            if not isinstance(spec, PenaltySpec):
                raise ValueError("disjoint needs a penalty curve")
            object.__setattr__(self, "spec", spec)
        else:
            raise ValueError(f"unknown plan constraint kind {self.kind!r}")


def must_equal(s1: str, s2: str, ell: int = 1) -> WspConstraint:
    return WspConstraint(MUST_EQUAL, (s1, s2), ell=ell)


def must_differ(s1: str, s2: str, ell: int = 1) -> WspConstraint:
    return WspConstraint(MUST_DIFFER, (s1, s2), ell=ell)


def disjoint(group_a, group_b, spec=None) -> WspConstraint:
    spec = spec if isinstance(spec, PenaltySpec) else PenaltySpec.linear(spec or 1)
    return WspConstraint(DISJOINT, (tuple(group_a), tuple(group_b)), spec=spec)


@dataclass
class WspInstance:
    steps: tuple[str, ...]
    users: tuple[str, ...]
    constraints: tuple[WspConstraint, ...]
    auth: Optional[AuthCost] = None
    cost_fn: Optional[Callable[[int, int], int]] = None  # (user idx, step mask)

    def __post_init__(self):
        self.steps = _check_names(self.steps, "step", 900)
        self.users = _check_names(self.users, "user", 10**6)
        self.constraints = tuple(self.constraints)
        self._sindex = {s: i for i, s in enumerate(self.steps)}
        self._uindex = {u: i for i, u in enumerate(self.users)}
        for c in self.constraints:
            names = c.scope[0] + c.scope[1] if c.kind == DISJOINT else c.scope
            for s in names:
                if s not in self._sindex:
                    raise ValueError(f"constraint scope uses unknown step {s!r}")
        if self.auth is None and self.cost_fn is None:
            raise ValueError("an authorization cost (auth or cost_fn) is required")
        self._base_mask = [0] * len(self.users)
        if self.auth is not None:
            for u, ss in self.auth.base.items():
                if u not in self._uindex:
                    raise ValueError(f"authorization for unknown user {u!r}")
                m = 0
                for s in ss:
                    if s not in self._sindex:
                        raise ValueError(f"authorization for unknown step {s!r}")
                    m |= 1 << self._sindex[s]
                self._base_mask[self._uindex[u]] = m

    @property
    def k(self) -> int:
        return len(self.steps)

    @property
    def n(self) -> int:
        return len(self.users)

    def step_mask(self, names) -> int:
        m = 0
        for s in names:
            try:
                m |= 1 << self._sindex[s]
            except KeyError:
                raise ValueError(f"unknown step {s!r}") from None
        return m

    def cost(self, ui: int, mask: int) -> int:
        """Authorization cost for user index ui covering the masked steps."""
        if mask == 0:
            return 0
        if self.cost_fn is not None:
            return self.cost_fn(ui, mask)
        extra = mask & ~self._base_mask[ui]
        pp = self.auth.pair_penalty
        if isinstance(pp, dict):
            u = self.users[ui]
            w = 0
            while extra:
                b = extra & -extra
                w += pp.get((u, self.steps[b.bit_length() - 1]), 1)
                extra ^= b
            return w
        return pp * extra.bit_count()

    def authorized(self, ui: int, si: int) -> bool:
        if self.auth is None:
            raise ValueError("authorization base unavailable for derived instances")
        return bool(self._base_mask[ui] >> si & 1)


def _rgs(K: int) -> Iterator[list[int]]:
    """Restricted growth strings of length K in lexicographic order.

    Yields its working list; callers must copy if they keep a reference.
    """
    a = [0] * K
    mx = [0] * K  # max of a[: i + 1]
    while True:
        yield a
        i = K - 1
        while i > 0 and a[i] == mx[i - 1] + 1:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        mx[i] = mx[i - 1] if mx[i - 1] >= a[i] else a[i]
        for t in range(i + 1, K):
            a[t] = 0
            mx[t] = mx[t - 1]


def solve_wsp(w: WspInstance) -> tuple[Plan, int]:
    """Exact minimum-weight plan.

    Partitions are scanned in restricted-growth-string order and the first
    optimum is kept; the block-to-user matching breaks ties toward smaller
    user indices per block.
    """
    t0 = time.perf_counter()
    K, n = w.k, w.n
    if K > MAX_STEPS_EXACT:
        raise GuardError(
            f"plan search over {K} steps needs Bell({K}) partitions; "
            f"the guard allows at most {MAX_STEPS_EXACT} steps"
        )
    compiled = []
    for c in w.constraints:
        if c.kind == DISJOINT:
            compiled.append((c, w.step_mask(c.scope[0]), w.step_mask(c.scope[1])))
        else:
            compiled.append((c, w._sindex[c.scope[0]], w._sindex[c.scope[1]]))
    inc = INF
    best: Optional[list[int]] = None
    scanned = 0
    for rgs in _rgs(K):
        p = max(rgs) + 1
        if p > n:
            continue
        scanned += 1
        cw = 0
        for c, a, b in compiled:
            if c.kind == MUST_EQUAL:
                if rgs[a] != rgs[b]:
                    cw += c.ell
            elif c.kind == MUST_DIFFER:
                if rgs[a] == rgs[b]:
                    cw += c.ell
            else:
                blocks = [0] * p
                for i, g in enumerate(rgs):
                    blocks[g] |= 1 << i
                hits = sum(1 for bm in blocks if bm & a and bm & b)
                cw += c.spec(hits)
        if cw >= inc:
            continue
        blocks = [0] * p
        for i, g in enumerate(rgs):
            blocks[g] |= 1 << i
        costs = [[w.cost(u, bm) for u in range(n)] for bm in blocks]
        total = cw + assignment_cost(costs)
        if total < inc:
            inc = total
            best = list(rgs)
    p = max(best) + 1
    blocks = [0] * p
    for i, g in enumerate(best):
        blocks[g] |= 1 << i
    costs = [[w.cost(u, bm) for u in range(n)] for bm in blocks]
    match, _ = min_cost_assignment(costs)
    plan = {w.steps[i]: w.users[match[best[i]]] for i in range(K)}
    log.info(
        "plan solve: steps=%d users=%d partitions=%d weight=%d (%.3fs)",
        K, n, scanned, inc, time.perf_counter() - t0,
    )
    return plan, inc


# --------------------------------------------------------------------------
# reductions


def reduce_sodu_bodu(instance: Instance) -> WspInstance:
    """Separation/binding-of-duty (user form) as a plan problem.

    Steps are the resources themselves; each separation constraint becomes a
    weighted inequality with penalty f(1), each binding one an equality.
    Optimal weights coincide because some optimum assigns one user per
    resource.
    """
    cons = []
    for c in instance.constraints:
        if c.kind == "sod_u":
            cons.append(must_differ(c.scope[0], c.scope[1], c.spec(1)))
        elif c.kind == "bod_u":
            cons.append(must_equal(c.scope[0], c.scope[1], c.spec(1)))
        else:
            raise ValueError(f"reduction only handles sod_u/bod_u, got {c.kind}")
    return WspInstance(
        steps=instance.resources,
        users=instance.users,
        constraints=tuple(cons),
        auth=instance.auth if instance.auth.custom is None else None,
        cost_fn=instance.omega_mask if instance.auth.custom is not None else None,
    )


def reduce_bode_sodu(instance: Instance) -> tuple[WspInstance, dict[str, str]]:
    """Existence-binding plus user-separation as a plan problem.

    Every resource r_i splits into one step per binding partner (or a single
    step when it has none); a binding pair (r_i, r_j) pins the two facing
    steps to the same user, and a separation pair penalizes users shared by
    the two step groups.  Lifting an optimal plan back (union of step users
    per resource) preserves the optimal weight.  The derived instance has at
    most k(k-1) steps.
    """
    k = instance.k
    partners: list[set[int]] = [set() for _ in range(k)]
    for c in instance.constraints:
        if c.kind == "bod_e":
            i1 = instance._rindex[c.scope[0]]
            i2 = instance._rindex[c.scope[1]]
            partners[i1].add(i2)
            partners[i2].add(i1)
        elif c.kind != "sod_u":
            raise ValueError(f"reduction only handles bod_e/sod_u, got {c.kind}")
    steps: list[str] = []
    origin: dict[str, str] = {}
    group: list[list[str]] = [[] for _ in range(k)]
    res_of_step: list[int] = []
    for i in range(k):
        if partners[i]:
            for j in sorted(partners[i]):
                name = f"s{i + 1}_{j + 1}"
                group[i].append(name)
                origin[name] = instance.resources[i]
                steps.append(name)
                res_of_step.append(i)
        else:
            name = f"s{i + 1}"
            group[i].append(name)
            origin[name] = instance.resources[i]
            steps.append(name)
            res_of_step.append(i)
    cons = []
    for c in instance.constraints:
        i1 = instance._rindex[c.scope[0]]
        i2 = instance._rindex[c.scope[1]]
        if c.kind == "bod_e":
            cons.append(
                must_equal(f"s{i1 + 1}_{i2 + 1}", f"s{i2 + 1}_{i1 + 1}", c.ell)
            )
        else:
            cons.append(disjoint(group[i1], group[i2], c.spec))

    def cost_fn(ui: int, mask: int) -> int:
        rmask = 0
        while mask:
            b = mask & -mask
            rmask |= 1 << res_of_step[b.bit_length() - 1]
            mask ^= b
        return instance.omega_mask(ui, rmask)

    wsp = WspInstance(
        steps=tuple(steps),
        users=instance.users,
        constraints=tuple(cons),
        auth=None,
        cost_fn=cost_fn,
    )
    return wsp, origin


def lift_plan(plan: Plan, origin: dict[str, str]) -> AuthorizationRelation:
    """Relation induced by a plan: each resource collects its steps' users."""
    assign: dict[str, set] = {}
    for s, u in plan.items():
        assign.setdefault(u, set()).add(origin[s])
    return AuthorizationRelation.from_mapping(assign)


# --------------------------------------------------------------------------
# documents

_WSP_KEYS = {"steps", "users", "auth", "constraints"}
_WSP_CON_KEYS = {"type", "scope", "ell", "slope"}


def wsp_from_doc(doc: dict) -> WspInstance:
    if not isinstance(doc, dict):
        raise ValueError("plan instance document must be a JSON object")
    _reject_unknown(doc, _WSP_KEYS, "plan instance")
    for key in ("steps", "users"):
        if not isinstance(doc.get(key), list):
            raise ValueError(f"plan instance needs a {key!r} list")
    auth_doc = doc.get("auth", {})
    _reject_unknown(auth_doc, {"pairs", "pair_penalty"}, "auth")
    base: dict[str, set] = {}
    for p in auth_doc.get("pairs", []):
        if not (isinstance(p, list) and len(p) == 2):
            raise ValueError("auth.pairs entries must be [user, step]")
        base.setdefault(p[0], set()).add(p[1])
    pp = auth_doc.get("pair_penalty", 1)
    cons = []
    for idx, entry in enumerate(doc.get("constraints", [])):
        where = f"constraints[{idx}]"
        _reject_unknown(entry, _WSP_CON_KEYS, where)
        kind = entry.get("type")
        scope = entry.get("scope")
        if kind in (MUST_EQUAL, MUST_DIFFER):
            if entry.get("slope") is not None:
                raise ValueError(f"{where}: {kind} takes ell, not slope")
            cons.append(WspConstraint(kind, tuple(scope), ell=entry.get("ell", 1)))
        elif kind == DISJOINT:
            if entry.get("ell") is not None:
                raise ValueError(f"{where}: disjoint takes slope, not ell")
            if not (isinstance(scope, list) and len(scope) == 2):
                raise ValueError(f"{where}: disjoint scope is a pair of lists")
            cons.append(
                disjoint(scope[0], scope[1], PenaltySpec.linear(entry.get("slope", 1)))
            )
        else:
            raise ValueError(f"{where}: unknown constraint type {kind!r}")
    return WspInstance(
        steps=tuple(doc["steps"]),
        users=tuple(doc["users"]),
        constraints=tuple(cons),
        auth=AuthCost({u: frozenset(ss) for u, ss in base.items()}, pp),
    )


def wsp_to_doc(w: WspInstance) -> dict:
    if w.auth is None:
        raise ValueError("derived plan instances are not serializable")
    pairs = [
        [u, s] for u in w.users for s in w.steps if s in w.auth.base.get(u, ())
    ]
    cons = []
    for c in w.constraints:
        if c.kind == DISJOINT:
            if c.spec.table:
                raise ValueError("penalty tables are not serializable")
            cons.append(
                {"type": c.kind, "scope": [list(c.scope[0]), list(c.scope[1])],
                 "slope": c.spec.slope}
            )
        else:
            cons.append({"type": c.kind, "scope": list(c.scope), "ell": c.ell})
    return {
        "steps": list(w.steps),
        "users": list(w.users),
        "auth": {"pairs": pairs, "pair_penalty": w.auth.pair_penalty},
        "constraints": cons,
    }


def load_wsp(path: str) -> WspInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return wsp_from_doc(json.load(fh))


def dump_wsp(w: WspInstance, path: Optional[str] = None) -> str:
    text = canonical_json(wsp_to_doc(w))
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
