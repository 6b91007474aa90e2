"""Problem instances, authorization relations, user profiles and JSON I/O.

Resource subsets are bitmasks over the instance's resource order (bit i is
resources[i]); k is capped at 30 so masks stay cheap machine ints.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Union

from .constraints import (
    CARD_LB,
    CARD_UB,
    MAX_CONSTRAINTS,
    MAX_PENALTY,
    Constraint,
    PenaltySpec,
    eval_relation,
)

MAX_RESOURCES = 30
MAX_USERS = 10**6


class GuardError(RuntimeError):
    """A search-space guard tripped; the request is too large to run exactly."""


def subset_order(k: int) -> list[int]:
    """Non-empty subset masks of k resources, ordered by (popcount, value)."""
    return sorted(range(1, 1 << k), key=lambda m: (m.bit_count(), m))


@dataclass
class AuthCost:
    """Additive authorization cost: each unauthorized (user, resource) pair
    in an assignment adds its pair penalty.  `custom` swaps in an arbitrary
    monotone per-(user, subset) cost for library users; it must return 0 for
    the empty set and is not serializable.
    """

    base: dict[str, frozenset[str]]
    pair_penalty: Union[int, dict[tuple[str, str], int]] = 1
    custom: Optional[Callable[[str, frozenset], int]] = None

    def __post_init__(self):
        self.base = {u: frozenset(rs) for u, rs in self.base.items()}
        if isinstance(self.pair_penalty, bool) or (
            isinstance(self.pair_penalty, int) and not 0 <= self.pair_penalty <= MAX_PENALTY
        ):
            raise ValueError(f"pair penalty must be in [0, {MAX_PENALTY}]")
        if isinstance(self.pair_penalty, dict):
            for v in self.pair_penalty.values():
                if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v <= MAX_PENALTY:
                    raise ValueError(f"pair penalties must be in [0, {MAX_PENALTY}]")


def _check_names(names, what, cap):
    names = tuple(names)
    if not names:
        raise ValueError(f"at least one {what} is required")
    if len(names) > cap:
        raise ValueError(f"at most {cap} {what}s are supported")
    seen = set()
    for nm in names:
        if not isinstance(nm, str) or not nm:
            raise ValueError(f"{what} names must be non-empty strings")
        if nm in seen:
            raise ValueError(f"duplicate {what} name {nm!r}")
        seen.add(nm)
    return names


@dataclass
class Instance:
    resources: tuple[str, ...]
    users: tuple[str, ...]
    constraints: tuple[Constraint, ...]
    auth: AuthCost
    meta: Optional[dict] = None

    def __post_init__(self):
        self.resources = _check_names(self.resources, "resource", MAX_RESOURCES)
        self.users = _check_names(self.users, "user", MAX_USERS)
        self.constraints = tuple(self.constraints)
        if len(self.constraints) > MAX_CONSTRAINTS:
            raise ValueError(f"at most {MAX_CONSTRAINTS} constraints are supported")
        self._rindex = {r: i for i, r in enumerate(self.resources)}
        self._uindex = {u: i for i, u in enumerate(self.users)}
        for c in self.constraints:
            for r in c.scope:
                if r not in self._rindex:
                    raise ValueError(f"constraint scope uses unknown resource {r!r}")
        for u, rs in self.auth.base.items():
            if u not in self._uindex:
                raise ValueError(f"authorization for unknown user {u!r}")
            for r in rs:
                if r not in self._rindex:
                    raise ValueError(f"authorization for unknown resource {r!r}")
        if isinstance(self.auth.pair_penalty, dict):
            for (u, r) in self.auth.pair_penalty:
                if u not in self._uindex or r not in self._rindex:
                    raise ValueError(f"pair penalty for unknown pair ({u!r}, {r!r})")
        # per-user authorized mask and per-(user, resource) penalty rows
        self._base_mask = [0] * len(self.users)
        for u, rs in self.auth.base.items():
            self._base_mask[self._uindex[u]] = self.resource_mask(rs)
        pp = self.auth.pair_penalty
        if isinstance(pp, dict):
            self._pen = [
                [pp.get((u, r), 1) for r in self.resources] for u in self.users
            ]
        else:
            self._pen = None  # uniform

    @property
    def k(self) -> int:
        return len(self.resources)

    @property
    def n(self) -> int:
        return len(self.users)

    def resource_mask(self, names: Iterable[str]) -> int:
        m = 0
        for r in names:
            try:
                m |= 1 << self._rindex[r]
            except KeyError:
                raise ValueError(f"unknown resource {r!r}") from None
        return m

    def mask_resources(self, mask: int) -> tuple[str, ...]:
        return tuple(r for i, r in enumerate(self.resources) if mask >> i & 1)

    def user_index(self, name: str) -> int:
        try:
            return self._uindex[name]
        except KeyError:
            raise ValueError(f"unknown user {name!r}") from None

    def omega_mask(self, ui: int, mask: int) -> int:
        """Authorization cost for user index ui holding the masked subset."""
        if mask == 0:
            return 0
        if self.auth.custom is not None:
            w = self.auth.custom(self.users[ui], frozenset(self.mask_resources(mask)))
            if not isinstance(w, int) or w < 0:
                raise ValueError("custom authorization cost must return a non-negative int")
            return w
        extra = mask & ~self._base_mask[ui]
        if self._pen is None:
            return self.auth.pair_penalty * extra.bit_count()
        row = self._pen[ui]
        w = 0
        while extra:
            b = extra & -extra
            w += row[b.bit_length() - 1]
            extra ^= b
        return w


@dataclass
class AuthorizationRelation:
    """A (possibly partial) assignment of resource subsets to users."""

    assignment: dict[str, frozenset[str]]

    def __post_init__(self):
        self.assignment = {u: frozenset(rs) for u, rs in self.assignment.items()}

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Iterable[str]]) -> "AuthorizationRelation":
        return cls({u: frozenset(rs) for u, rs in mapping.items()})

    def resources_of(self, user: str) -> frozenset:
        return self.assignment.get(user, frozenset())

    def users_of(self, resource: str) -> frozenset:
        return frozenset(u for u, rs in self.assignment.items() if resource in rs)

    def assigned_users(self) -> frozenset:
        return frozenset(u for u, rs in self.assignment.items() if rs)

    def size(self) -> int:
        return sum(len(rs) for rs in self.assignment.values())

    def is_complete(self, instance: Instance) -> bool:
        covered = set()
        for rs in self.assignment.values():
            covered.update(rs)
        return all(r in covered for r in instance.resources)


def validate_relation(instance: Instance, rel: AuthorizationRelation) -> None:
    for u, rs in rel.assignment.items():
        if u not in instance._uindex:
            raise ValueError(f"relation mentions unknown user {u!r}")
        for r in rs:
            if r not in instance._rindex:
                raise ValueError(f"relation mentions unknown resource {r!r}")


@dataclass
class UserProfile:
    """How many users hold each resource subset; mask 0 counts idle users."""

    counts: dict[int, int]
    resources: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        self.counts = {int(m): int(c) for m, c in self.counts.items() if c}
        for m, c in self.counts.items():
            if m < 0 or c < 0:
                raise ValueError("profile entries must be non-negative")
        if self.resources is not None:
            self.resources = tuple(self.resources)
            self._bit = {r: i for i, r in enumerate(self.resources)}

    def bit(self, resource: str) -> int:
        try:
            return self._bit[resource]
        except (AttributeError, KeyError):
            raise ValueError(f"profile has no resource {resource!r}") from None

    def n_users(self) -> int:
        return sum(self.counts.values())

    def assigned_count(self) -> int:
        return sum(c for m, c in self.counts.items() if m)

    def cover(self, bit: int) -> int:
        return sum(c for m, c in self.counts.items() if m >> bit & 1)

    def pair(self, b1: int, b2: int) -> int:
        need = (1 << b1) | (1 << b2)
        return sum(c for m, c in self.counts.items() if m & need == need)

    def one_sided(self, b1: int, b2: int) -> int:
        return sum(
            c for m, c in self.counts.items() if (m >> b1 & 1) and not (m >> b2 & 1)
        )

    def is_complete(self, k: int) -> bool:
        m = 0
        for mask in self.counts:
            m |= mask
        return m == (1 << k) - 1


def omega(instance: Instance, user: str, resources: Iterable[str]) -> int:
    """Authorization cost of one user holding the given subset."""
    return instance.omega_mask(instance.user_index(user), instance.resource_mask(resources))


def big_omega(instance: Instance, rel: AuthorizationRelation) -> int:
    """Total authorization cost of a relation."""
    validate_relation(instance, rel)
    return sum(
        instance.omega_mask(instance.user_index(u), instance.resource_mask(rs))
        for u, rs in rel.assignment.items()
    )


def total_weight(instance: Instance, rel: AuthorizationRelation) -> tuple[int, dict]:
    """Total weight and its breakdown: authorization cost plus every constraint."""
    om = big_omega(instance, rel)
    per = [eval_relation(c, rel) for c in instance.constraints]
    cats = {"authorizations": om, "sod": 0, "cardinality": 0, "user_count": 0, "other": 0}
    for c, w in zip(instance.constraints, per):
        if c.kind in ("sod_u", "sod_e"):
            cats["sod"] += w
        elif c.kind in (CARD_UB, CARD_LB):
            cats["cardinality"] += w
        elif c.kind == "user_count":
            cats["user_count"] += w
        else:
            cats["other"] += w
    breakdown = {"omega": om, "constraints": per, "by_category": cats}
    return om + sum(per), breakdown


def profile_of(instance: Instance, rel: AuthorizationRelation) -> UserProfile:
    """Collapse a relation to subset multiplicities over the instance's users."""
    validate_relation(instance, rel)
    counts: dict[int, int] = {}
    for u in instance.users:
        m = instance.resource_mask(rel.resources_of(u))
        counts[m] = counts.get(m, 0) + 1
    return UserProfile(counts, instance.resources)


@dataclass
class SolveResult:
    relation: AuthorizationRelation
    total_weight: int
    breakdown: dict
    meta: dict

    @classmethod
    def build(cls, instance: Instance, rel: AuthorizationRelation, meta: dict) -> "SolveResult":
        if not rel.is_complete(instance):
            raise ValueError("solver produced an incomplete relation")
        total, breakdown = total_weight(instance, rel)
        return cls(rel, total, breakdown, meta)

    def to_doc(self, instance: Instance) -> dict:
        assignment = {}
        for u in instance.users:
            rs = self.relation.resources_of(u)
            if rs:
                assignment[u] = [r for r in instance.resources if r in rs]
        meta = {k: v for k, v in sorted(self.meta.items()) if k != "wall_time_s"}
        return {
            "total_weight": self.total_weight,
            "assignment": assignment,
            "breakdown": {
                "omega": self.breakdown["omega"],
                "constraints": list(self.breakdown["constraints"]),
                "by_category": dict(self.breakdown["by_category"]),
            },
            "meta": meta,
        }

    def to_json(self, instance: Instance) -> str:
        return canonical_json(self.to_doc(instance))


def canonical_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


# --------------------------------------------------------------------------
# instance documents

_TOP_KEYS = {"resources", "users", "auth", "constraints", "meta"}
_AUTH_KEYS = {"pairs", "pair_penalty"}
_CON_KEYS = {"type", "scope", "t", "penalty", "slope", "ell"}


def _reject_unknown(d: dict, allowed: set, where: str) -> None:
    extra = set(d) - allowed
    if extra:
        raise ValueError(f"unknown field(s) in {where}: {', '.join(sorted(extra))}")


def _parse_penalty(entry: dict, where: str) -> Optional[int]:
    slope = entry.get("slope")
    alias = entry.get("penalty")
    if slope is not None and alias is not None:
        raise ValueError(f"{where}: give either slope or penalty, not both")
    return alias if slope is None else slope


def _constraint_from_doc(entry: dict, idx: int) -> Constraint:
    where = f"constraints[{idx}]"
    if not isinstance(entry, dict):
        raise ValueError(f"{where} must be an object")
    _reject_unknown(entry, _CON_KEYS, where)
    kind = entry.get("type")
    scope = entry.get("scope", [])
    if not isinstance(scope, list):
        raise ValueError(f"{where}: scope must be a list")
    slope = _parse_penalty(entry, where)

    def no(*fields):
        for f in fields:
            if entry.get(f) is not None:
                raise ValueError(f"{where}: field {f!r} not valid for {kind}")

    if kind in ("sod_u", "bod_u"):
        no("t", "ell")
        return Constraint(kind, tuple(scope), spec=PenaltySpec.linear(slope or 1))
    if kind in ("sod_e", "bod_e"):
        no("t", "slope", "penalty")
        return Constraint(kind, tuple(scope), ell=entry.get("ell", 1))
    if kind in ("card_ub", "card_lb"):
        no("ell")
        if "t" not in entry:
            raise ValueError(f"{where}: {kind} needs a threshold t")
        return Constraint(kind, tuple(scope), t=entry["t"], spec=PenaltySpec.linear(slope or 1))
    if kind == "user_count":
        no("t", "ell")
        if scope:
            raise ValueError(f"{where}: user_count takes no scope")
        if slope is None:
            return Constraint("user_count", (), quadratic=True)
        return Constraint("user_count", (), spec=PenaltySpec.linear(slope))
    raise ValueError(f"{where}: unknown constraint type {kind!r}")


def instance_from_doc(doc: dict) -> Instance:
    if not isinstance(doc, dict):
        raise ValueError("instance document must be a JSON object")
    _reject_unknown(doc, _TOP_KEYS, "instance")
    for key in ("resources", "users"):
        if not isinstance(doc.get(key), list):
            raise ValueError(f"instance needs a {key!r} list")
    auth_doc = doc.get("auth", {})
    if not isinstance(auth_doc, dict):
        raise ValueError("auth must be an object")
    _reject_unknown(auth_doc, _AUTH_KEYS, "auth")
    pairs = auth_doc.get("pairs", [])
    base: dict[str, set] = {}
    for p in pairs:
        if not (isinstance(p, list) and len(p) == 2):
            raise ValueError("auth.pairs entries must be [user, resource]")
        base.setdefault(p[0], set()).add(p[1])
    pp = auth_doc.get("pair_penalty", 1)
    if isinstance(pp, list):
        users, resources = doc["users"], doc["resources"]
        if len(pp) != len(users) or any(
            not isinstance(row, list) or len(row) != len(resources) for row in pp
        ):
            raise ValueError("pair_penalty matrix must be |users| x |resources|")
        pp = {
            (u, r): row[i]
            for u, row in zip(users, pp)
            for i, r in enumerate(resources)
        }
    cons_doc = doc.get("constraints", [])
    if not isinstance(cons_doc, list):
        raise ValueError("constraints must be a list")
    cons = tuple(_constraint_from_doc(e, i) for i, e in enumerate(cons_doc))
    meta = doc.get("meta")
    if meta is not None and not isinstance(meta, dict):
        raise ValueError("meta must be an object")
    return Instance(
        resources=tuple(doc["resources"]),
        users=tuple(doc["users"]),
        constraints=cons,
        auth=AuthCost({u: frozenset(rs) for u, rs in base.items()}, pp),
        meta=meta,
    )


def instance_to_doc(instance: Instance) -> dict:
    if instance.auth.custom is not None:
        raise ValueError("custom authorization costs are not serializable")
    pairs = [
        [u, r]
        for u in instance.users
        for r in instance.resources
        if r in instance.auth.base.get(u, ())
    ]
    pp = instance.auth.pair_penalty
    if isinstance(pp, dict):
        pp = [[pp.get((u, r), 1) for r in instance.resources] for u in instance.users]
    cons = []
    for c in instance.constraints:
        entry: dict = {"type": c.kind}
        if c.scope:
            entry["scope"] = list(c.scope)
        if c.t is not None:
            entry["t"] = c.t
        if c.kind in ("sod_e", "bod_e"):
            entry["ell"] = c.ell
        elif c.kind == "user_count":
            if not c.quadratic:
                entry["slope"] = c.spec.slope
        else:
            if c.spec.table:
                raise ValueError("penalty tables are not serializable")
            entry["slope"] = c.spec.slope
        cons.append(entry)
    doc = {
        "resources": list(instance.resources),
        "users": list(instance.users),
        "auth": {"pairs": pairs, "pair_penalty": pp},
        "constraints": cons,
    }
    if instance.meta is not None:
        doc["meta"] = instance.meta
    return doc


def load_instance(path: str) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_doc(json.load(fh))


def dump_instance(instance: Instance, path: Optional[str] = None) -> str:
    text = canonical_json(instance_to_doc(instance))
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def relation_from_doc(doc: dict, instance: Instance) -> AuthorizationRelation:
    if not isinstance(doc, dict):
        raise ValueError("relation document must be a JSON object")
    _reject_unknown(doc, {"assignment"}, "relation")
    assignment = doc.get("assignment")
    if not isinstance(assignment, dict):
        raise ValueError("relation needs an 'assignment' object")
    rel = AuthorizationRelation.from_mapping(assignment)
    validate_relation(instance, rel)
    return rel


def relation_to_doc(instance: Instance, rel: AuthorizationRelation) -> dict:
    validate_relation(instance, rel)
    assignment = {}
    for u in instance.users:
        rs = rel.resources_of(u)
        if rs:
            assignment[u] = [r for r in instance.resources if r in rs]
    return {"assignment": assignment}


def load_relation(path: str, instance: Instance) -> AuthorizationRelation:
    with open(path, "r", encoding="utf-8") as fh:
        return relation_from_doc(json.load(fh), instance)
