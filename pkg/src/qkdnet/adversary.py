"""t-bounded Byzantine adversary model.

Corruption is static per trial: a :class:`AdversaryConfig` fixes which
nodes are Byzantine and which scripted strategies they run.  During a
session a :class:`ScriptedAdversary` plugs into the transport layer as
its interceptor, recording everything corrupted nodes see into an
:class:`AdversaryView` and applying the scripted behaviors:

* ``passive``        observe and forward faithfully
* ``tamper_shares``  XOR a random nonzero mask into relayed key shares
* ``forge_auth``     replace classical payloads with uniform random bits
                     (a random well-formed message plus a uniform tag,
                     i.e. one impersonation attempt per interception)
* ``drop_auth``      deliver ⊥ for classical payloads
* ``disclose_all``   publish the view afterwards for honest-but-curious
                     evaluation

Privacy is measured by exact Bayesian enumeration: all completions of
the unknown shares are enumerated and the advantage is the maximum
posterior probability of any final key minus the uniform 2^-k.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .bits import BitString
from .errors import (
    BoundExceeded,
    EndpointCorruption,
    OutOfRange,
    TooLarge,
    ValidationError,
)
from .network import NetworkGraph, PathSet

STRATEGIES = (
    "passive",
    "tamper_shares",
    "forge_auth",
    "drop_auth",
    "disclose_all",
)


@dataclass(frozen=True)
class AdversaryConfig:
    """A static corruption pattern plus scripted strategies."""

    corrupted: frozenset
    t_bound: int
    strategies: tuple = ("passive",)

    def __post_init__(self):
        if self.t_bound < 0:
            raise ValidationError(f"t_bound must be >= 0, got {self.t_bound}")
        if len(self.corrupted) > self.t_bound:
            raise BoundExceeded(
                f"{len(self.corrupted)} corrupted nodes exceed t={self.t_bound}"
            )
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ValidationError(f"unknown strategy {s!r}")


def corrupt(
    graph: NetworkGraph,
    nodes,
    t: int,
    endpoints=(),
    strategies=("passive",),
) -> AdversaryConfig:
    """Corrupt ``nodes`` under a t-bound.

    The session endpoints themselves are never corruptible; pass them in
    ``endpoints`` to enforce that.
    """
    nodes = frozenset(nodes)
    unknown = nodes - graph.nodes
    if unknown:
        raise ValidationError(f"cannot corrupt unknown node(s) {sorted(unknown)}")
    hit = nodes & frozenset(endpoints)
    if hit:
        raise EndpointCorruption(f"endpoints cannot be corrupted: {sorted(hit)}")
    return AdversaryConfig(corrupted=nodes, t_bound=t, strategies=tuple(strategies))


def controlled_paths(config: AdversaryConfig, paths: PathSet) -> frozenset:
    """Indices of paths containing a corrupted internal node (the set S_A)."""
    return frozenset(
        i
        for i in range(len(paths))
        if set(paths.interior(i)) & config.corrupted
    )


@dataclass(frozen=True)
class PublishedBundle:
    """Material a disclosing adversary has posted for everyone to read."""

    shares: dict = field(default_factory=dict)
    transcripts: tuple = ()


class AdversaryView:
    """Everything one observer has learned during a single trial.

    ``learned_shares`` maps a path index to the share values observed on
    it, in observation order (the first entry is the value the sender
    put on the path).  The map gains an entry only when the path crosses
    a corrupted node or an epsilon-compromised hop.
    """

    __slots__ = ("n_paths", "share_bits", "learned_shares", "transcripts",
                 "compromised_link_bits", "published")

    def __init__(self, n_paths: int, share_bits: int = 0):
        self.n_paths = n_paths
        self.share_bits = share_bits
        self.learned_shares: dict[int, list[BitString]] = {}
        self.transcripts: list[tuple] = []
        self.compromised_link_bits: list[tuple] = []
        self.published: PublishedBundle | None = None

    def record_share(self, path_index: int, value: BitString):
        self.learned_shares.setdefault(path_index, []).append(value)

    def known_share(self, path_index: int) -> BitString | None:
        obs = self.learned_shares.get(path_index)
        return obs[0] if obs else None


def disclose(view: AdversaryView) -> PublishedBundle:
    """Post the view's secrets publicly (denial-of-service style leak)."""
    bundle = PublishedBundle(
        shares={i: tuple(obs) for i, obs in view.learned_shares.items() if obs},
        transcripts=tuple(view.transcripts),
    )
    view.published = bundle
    return bundle


def honest_path_view(
    n_paths: int,
    own_index: int,
    own_share: BitString,
    published: PublishedBundle | None = None,
) -> AdversaryView:
    """View of an honest-but-curious path: its own share plus anything
    adversarial paths have published."""
    view = AdversaryView(n_paths, own_share.length)
    view.record_share(own_index, own_share)
    if published is not None:
        for i, obs in published.shares.items():
            for value in obs:
                view.record_share(i, value)
    return view


class ScriptedAdversary:
    """Transport interceptor executing an :class:`AdversaryConfig`.

    Drop takes precedence over forgery when both are scripted.  Tamper
    masks and forged payloads are drawn from the trial rng, so trials
    replay bit-for-bit.
    """

    __slots__ = ("config", "view", "rng", "corrupted",
                 "_tamper", "_forge", "_drop")

    def __init__(self, config: AdversaryConfig, view: AdversaryView, rng):
        self.config = config
        self.view = view
        self.rng = rng
        self.corrupted = config.corrupted
        self._tamper = "tamper_shares" in config.strategies
        self._forge = "forge_auth" in config.strategies
        self._drop = "drop_auth" in config.strategies

    @property
    def discloses(self) -> bool:
        return "disclose_all" in self.config.strategies

    def on_key_hop(self, path_index, node, value):
        if node not in self.corrupted:
            return value
        self.view.record_share(path_index, value)
        if self._tamper:
            mask = self.rng.randrange(1, 1 << value.length)
            value = value ^ BitString.from_int(mask, value.length)
        return value

    def on_classical_hop(self, path_index, node, kind, message):
        if node not in self.corrupted:
            return message
        self.view.transcripts.append((path_index, kind, node, message))
        if self._drop:
            return None
        if self._forge:
            return BitString.random(message.length, self.rng)
        return message

    def on_hop_leak(self, path_index, link, value):
        self.view.compromised_link_bits.append((link.key, value))
        self.view.record_share(path_index, value)


@dataclass(frozen=True)
class AdvantageResult:
    """Guessing advantage in [0, 1]; a Fraction when computed exactly."""

    advantage: object
    exact: bool


def guessing_advantage(
    view: AdversaryView,
    true_key: BitString,
    key_len: int,
    exact_limit_bits: int = 20,
    mc_samples: int = 50_000,
    rng=None,
    require_exact: bool = False,
) -> AdvantageResult:
    """Advantage of ``view`` at guessing the XOR of all path shares.

    Exact mode enumerates every completion of the unknown shares and
    returns max posterior probability minus 2^-key_len as a Fraction;
    0 means perfect privacy.  Instances beyond the enumeration limit
    fall back to a flagged Monte-Carlo estimate, or raise
    :class:`TooLarge` when ``require_exact`` is set.
    """
    if key_len < 1:
        raise OutOfRange(f"key_len must be >= 1, got {key_len}")
    known = []
    for i in range(view.n_paths):
        share = view.known_share(i)
        if share is not None:
            if share.length != key_len:
                raise OutOfRange(
                    f"share on path {i} has {share.length} bits, "
                    f"expected {key_len}"
                )
            known.append(share.value)
    unknown = view.n_paths - len(known)
    base = 0
    for v in known:
        base ^= v

    uniform = Fraction(1, 1 << key_len)
    if unknown == 0:
        return AdvantageResult(Fraction(1) - uniform, True)

    if key_len <= 16 and unknown * key_len <= exact_limit_bits:
        counts = [0] * (1 << key_len)
        total = 1 << (unknown * key_len)
        mask = (1 << key_len) - 1
        for assignment in range(total):
            k = base
            a = assignment
            for _ in range(unknown):
                k ^= a & mask
                a >>= key_len
            counts[k] += 1
        advantage = Fraction(max(counts), total) - uniform
        return AdvantageResult(advantage, True)

    if require_exact:
        raise TooLarge(
            f"{unknown} unknown shares of {key_len} bits exceed exact mode"
        )

    rng = rng or random.Random(0)
    counts: dict[int, int] = {}
    for _ in range(mc_samples):
        k = base
        for _ in range(unknown):
            k ^= rng.getrandbits(key_len)
        counts[k] = counts.get(k, 0) + 1
    estimate = max(counts.values()) / mc_samples - float(uniform)
    return AdvantageResult(max(estimate, 0.0), False)
