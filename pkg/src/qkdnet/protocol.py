"""Multipath key establishment, key authentication, and deterministic
privacy amplification.

A session between two endpoints runs in four phases:

1. *Establish*: a fresh n-bit share rides each of the ell disjoint paths
   hop-by-hop; both ends XOR their per-path shares into full keys.  Any
   ell-1 controlled paths reveal nothing about the XOR.
2. *Challenge*: the initiator splits her key into two MAC sub-keys (2s
   bits total) and a remainder, draws m random parity vectors, and
   broadcasts the vectors with their remainder parities plus a tag under
   the first sub-key along every path.
3. *Response*: the responder accepts the first path whose copy
   authenticates under his first sub-key and checks every parity against
   his own remainder; the one-bit verdict travels back tagged under the
   second sub-key.  Differing keys slip through a parity check with
   probability 2^-m per session.
4. *Distill*: on mutual success both sides deterministically trash one
   pivot bit per parity vector (no communication), cancelling the m
   disclosed parity bits.

The reserved MAC prefix is 2s bits (two independent sub-keys of s bits,
one per direction), so the tested remainder has n - 2s bits.
"""

from __future__ import annotations

from dataclasses import dataclass

from .adversary import (
    AdversaryConfig,
    AdversaryView,
    PublishedBundle,
    ScriptedAdversary,
    disclose,
)
from .bits import BitString, split_key, xor_combine
from .errors import LengthMismatch, OutOfRange, ParameterViolation
from .mac import MacKey, MacParams, Tag, _tag_value, tag as mac_tag
from .network import NetworkGraph, PathSet, vertex_disjoint_paths
from .transport import (
    LinkKeyPool,
    _classical_over,
    _forward_key_over,
    _path_hops,
    qkd_generate,
)


@dataclass(frozen=True)
class SecurityParams:
    """Session parameters.

    n:       bits per path share and per full key
    s:       MAC key bits per authenticated message (= 2w; s/2 is the
             field word size, so tags are s/2 bits)
    m:       number of parity challenges
    ell:     number of vertex-disjoint paths
    epsilon: per-key failure probability of link-generated keys, used in
             bound formulas
    """

    n: int
    s: int
    m: int
    ell: int
    epsilon: float = 0.0

    def __post_init__(self):
        if self.s < 2 or self.s % 2:
            raise ParameterViolation(f"s must be even and >= 2, got {self.s}")
        if self.ell < 2:
            raise ParameterViolation(f"ell must be >= 2, got {self.ell}")
        if 2 * self.s >= self.n:
            raise ParameterViolation(
                f"n must exceed the 2s reserved MAC bits: n={self.n}, s={self.s}"
            )
        if not 1 <= self.m < self.test_bits:
            raise ParameterViolation(
                f"m < n - 2s required: m={self.m}, n-2s={self.test_bits}"
            )
        if not 0.0 <= self.epsilon <= 1.0:
            raise ParameterViolation(f"epsilon must lie in [0,1], got {self.epsilon}")

    @property
    def word_bits(self) -> int:
        return self.s // 2

    @property
    def mac(self) -> MacParams:
        return MacParams(self.word_bits)

    @property
    def reserved_bits(self) -> int:
        """Key bits consumed by the two MAC sub-keys."""
        return 2 * self.s

    @property
    def test_bits(self) -> int:
        """Length of the remainder key probed by the parity challenges."""
        return self.n - 2 * self.s

    @property
    def challenge_bits(self) -> int:
        """Encoded challenge length m * (test_bits + 1)."""
        return self.m * (self.test_bits + 1)

    @property
    def session_demand_bits(self) -> int:
        """Pool bits one link needs for a full session over it."""
        w = self.word_bits
        return self.n + self.challenge_bits + 8 * w + 1


@dataclass(frozen=True)
class SessionKeyParts:
    """A full key split into the two MAC sub-keys and the remainder."""

    auth_first: MacKey
    auth_second: MacKey
    remainder: BitString


def split_session_key(full_key: BitString, params: SecurityParams) -> SessionKeyParts:
    if full_key.length != params.n:
        raise OutOfRange(
            f"full key has {full_key.length} bits, params require {params.n}"
        )
    prefix, remainder = split_key(full_key, params.reserved_bits)
    first, second = split_key(prefix, params.s)
    return SessionKeyParts(MacKey(first), MacKey(second), remainder)


@dataclass(frozen=True)
class Challenge:
    """Parity challenge: m vectors, their remainder parities, and a tag."""

    lambdas: tuple
    parities: tuple
    message: BitString
    tag: Tag

    def payload(self) -> BitString:
        """Wire form: message || tag."""
        return self.message.concat(self.tag.value)


def encode_challenge(lambdas, parities, test_bits: int) -> BitString:
    acc = 0
    for lam, p in zip(lambdas, parities):
        acc = (acc << (test_bits + 1)) | (lam.value << 1) | p
    return BitString.from_int(acc, len(lambdas) * (test_bits + 1))


def decode_challenge(message: BitString, params: SecurityParams):
    """Inverse of encode_challenge; None if the length is malformed."""
    tb = params.test_bits
    if message.length != params.challenge_bits:
        return None
    lambdas, parities = [], []
    value = message.value
    for v in range(params.m - 1, -1, -1):
        chunk = (value >> (v * (tb + 1))) & ((1 << (tb + 1)) - 1)
        lambdas.append(BitString.from_int(chunk >> 1, tb))
        parities.append(chunk & 1)
    return tuple(lambdas), tuple(parities)


def _make_challenge(parts: SessionKeyParts, params: SecurityParams, rng) -> Challenge:
    tb = params.test_bits
    rem = parts.remainder.value
    acc = 0
    lambdas = []
    parities = []
    for _ in range(params.m):
        lam = rng.getrandbits(tb)
        p = (lam & rem).bit_count() & 1
        acc = (acc << (tb + 1)) | (lam << 1) | p
        lambdas.append(BitString.from_int(lam, tb))
        parities.append(p)
    message = BitString.from_int(acc, params.challenge_bits)
    return Challenge(
        tuple(lambdas), tuple(parities), message,
        mac_tag(parts.auth_first, message),
    )


def make_challenge(full_key: BitString, params: SecurityParams, rng) -> Challenge:
    """Draw m parity vectors against the key remainder and tag the bundle.

    Vectors are sampled in index order from ``rng`` for reproducibility.
    """
    return _make_challenge(split_session_key(full_key, params), params, rng)


def split_challenge_payload(payload: BitString, params: SecurityParams):
    """Split a wire payload into (message, tag); None if malformed."""
    w = params.word_bits
    if payload.length != params.challenge_bits + w:
        return None
    return (
        payload.slice(1, params.challenge_bits),
        Tag(payload.slice(params.challenge_bits + 1, payload.length)),
    )


@dataclass(frozen=True)
class ChallengeOutcome:
    """Responder verdict: result bit, accepted path, decoded vectors."""

    result: int
    accepted_path: int | None
    lambdas: tuple | None
    identified_dishonest: frozenset


def _verify_challenge(received, parts: SessionKeyParts, params: SecurityParams) -> ChallengeOutcome:
    w = params.word_bits
    cb = params.challenge_bits
    tb = params.test_bits
    key_int = parts.auth_first.material.value
    tag_mask = (1 << w) - 1
    accepted = None
    message_value = 0
    for h, payload in enumerate(received):
        if payload is None or payload.length != cb + w:
            continue
        pv = payload.value
        message_value = pv >> w
        if _tag_value(w, key_int, message_value, cb) == pv & tag_mask:
            accepted = h
            break
    if accepted is None:
        return ChallengeOutcome(0, None, None, frozenset())
    identified = frozenset(
        i for i, payload in enumerate(received)
        if payload != received[accepted]
    )
    rem = parts.remainder.value
    chunk_mask = (1 << (tb + 1)) - 1
    lambdas = []
    ok = True
    for v in range(params.m - 1, -1, -1):
        chunk = (message_value >> (v * (tb + 1))) & chunk_mask
        lam = chunk >> 1
        if (lam & rem).bit_count() & 1 != chunk & 1:
            ok = False
        lambdas.append(BitString.from_int(lam, tb))
    return ChallengeOutcome(1 if ok else 0, accepted, tuple(lambdas), identified)


def verify_challenge(received, full_key: BitString, params: SecurityParams) -> ChallengeOutcome:
    """Scan per-path copies in ascending index; the first copy whose tag
    authenticates is checked against the local remainder parities.

    ``received`` holds one payload (or None for a dropped copy) per
    path.  result=1 iff an authenticated copy exists and every embedded
    parity matches; any other outcome gives result=0.
    """
    return _verify_challenge(received, split_session_key(full_key, params), params)


def _make_response(result: int, parts: SessionKeyParts, params: SecurityParams) -> BitString:
    if result not in (0, 1):
        raise OutOfRange(f"result must be a bit, got {result}")
    w = params.word_bits
    t = _tag_value(w, parts.auth_second.material.value, result, 1)
    return BitString.from_int((result << w) | t, 1 + w)


def make_response(result: int, full_key: BitString, params: SecurityParams) -> BitString:
    """One-bit verdict tagged under the second MAC sub-key (wire form)."""
    return _make_response(result, split_session_key(full_key, params), params)


@dataclass(frozen=True)
class ResponseOutcome:
    result_prime: int
    accepted_path: int | None
    identified_dishonest: frozenset


def _verify_response(received, parts: SessionKeyParts, params: SecurityParams) -> ResponseOutcome:
    w = params.word_bits
    key_int = parts.auth_second.material.value
    tag_mask = (1 << w) - 1
    for h, payload in enumerate(received):
        if payload is None or payload.length != 1 + w:
            continue
        pv = payload.value
        bit = pv >> w
        if _tag_value(w, key_int, bit, 1) == pv & tag_mask:
            identified = frozenset(
                i for i, p in enumerate(received) if p != payload
            )
            return ResponseOutcome(bit, h, identified)
    return ResponseOutcome(0, None, frozenset())


def verify_response(received, full_key: BitString, params: SecurityParams) -> ResponseOutcome:
    """result' is the bit of the first properly authenticated copy
    (ascending path index); 0 when no copy authenticates."""
    return _verify_response(received, split_session_key(full_key, params), params)


def deterministic_pa(key: BitString, lambdas) -> tuple[BitString, frozenset]:
    """Deterministic privacy amplification.

    Maintains a row-reduced basis of the disclosed parity vectors,
    processed in order: each vector is reduced against the pivots chosen
    so far, a vector surviving reduction trashes the leading (smallest
    1-based) position of its reduced form, and a vector reducing to zero
    discloses nothing fresh and trashes nothing.  The chosen positions
    support a triangular, hence invertible, system in the trashed bits,
    so conditioned on every disclosed parity the surviving bits remain
    exactly uniform.

    Note the pivot must come from the *reduced* vector: trashing the
    leading not-yet-trashed position of the raw vector leaves linear
    combinations of parities (e.g. of (011101, 100111, 010111)) landing
    entirely on surviving positions, which would leak.

    Returns the key with trashed positions deleted (original order
    preserved) and the 1-based trash set.  At most one position is
    trashed per vector, and both ends compute identical outputs from
    identical vectors without communication.
    """
    nb = key.length
    basis: dict[int, int] = {}
    for lam in lambdas:
        if lam.length != nb:
            raise LengthMismatch(
                f"parity vector has {lam.length} bits, key has {nb}"
            )
        v = lam.value
        while v:
            pos = nb - v.bit_length() + 1
            row = basis.get(pos)
            if row is None:
                basis[pos] = v
                break
            v ^= row
    trash = frozenset(basis)
    kv = key.value
    out = 0
    out_len = 0
    for pos in range(1, nb + 1):
        if pos in trash:
            continue
        out = (out << 1) | ((kv >> (nb - pos)) & 1)
        out_len += 1
    return BitString.from_int(out, out_len), trash


@dataclass(frozen=True)
class AuthTranscript:
    """Audit record of the authentication round trip.

    Per-path copies hold the verbatim wire payloads (None for ⊥).
    """

    challenge_copies: tuple
    response_copies: tuple
    result: int
    result_prime: int
    identified_dishonest: frozenset

    def serialize(self) -> str:
        """One line per message: direction, path index, verbatim bits."""
        lines = []
        for direction, copies in (
            ("challenge", self.challenge_copies),
            ("response", self.response_copies),
        ):
            for i, payload in enumerate(copies):
                bits = str(payload) if payload is not None else "bottom"
                lines.append(f"{direction} path={i} bits={bits}")
        lines.append(f"result={self.result} result_prime={self.result_prime}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class EstablishResult:
    key_a: BitString
    key_b: BitString
    shares_sent: tuple
    shares_received: tuple
    paths: PathSet


def provision_pools(graph: NetworkGraph, paths: PathSet, bits_per_link: int, rng):
    """One fresh epoch per link used by ``paths``, in deterministic order."""
    pools = {}
    for i in range(len(paths)):
        for u, v in paths.hops(i):
            key = (u, v) if u <= v else (v, u)
            if key not in pools:
                pool = LinkKeyPool(graph.link_between(u, v))
                qkd_generate(pool, bits_per_link, rng)
                pools[key] = pool
    return pools


def multipath_establish(
    graph: NetworkGraph,
    a: str,
    b: str,
    params: SecurityParams,
    rng,
    interceptor=None,
    paths: PathSet | None = None,
    pools=None,
) -> EstablishResult:
    """Transport one fresh n-bit share per disjoint path and XOR them.

    With no active adversary the two ends compute identical keys; a
    tampering node on any path desynchronizes them without either party
    noticing at this layer.
    """
    if paths is None:
        paths = vertex_disjoint_paths(graph, a, b, params.ell)
    if pools is None:
        pools = provision_pools(
            graph, paths, params.n + 2 * params.word_bits, rng
        )
    w = params.word_bits
    n = params.n
    sent = []
    received = []
    for i in range(len(paths)):
        share = BitString.random(n, rng)
        sent.append(share)
        received.append(
            _forward_key_over(
                _path_hops(paths.paths[i], pools), share.value, n,
                w, interceptor, i,
            )
        )
    return EstablishResult(
        key_a=xor_combine(sent),
        key_b=xor_combine(received),
        shares_sent=tuple(sent),
        shares_received=tuple(received),
        paths=paths,
    )


@dataclass(frozen=True)
class SessionOutcome:
    """Everything a trial records about one full session."""

    result: int
    result_prime: int
    keys_equal: bool          # delta over the remainder keys
    full_keys_equal: bool
    final_key_a: BitString | None
    final_key_b: BitString | None
    trash_a: frozenset | None
    trash_b: frozenset | None
    transcript: AuthTranscript
    shares_sent: tuple
    shares_received: tuple
    challenge_lambdas: tuple
    paths: PathSet
    view: AdversaryView
    published: PublishedBundle | None
    leaked_epochs: int
    parity_bits_disclosed: int

    @property
    def succeeded(self) -> bool:
        """The agreement event: result = result' = delta."""
        return self.result == self.result_prime == int(self.keys_equal)


def full_session(
    graph: NetworkGraph,
    a: str,
    b: str,
    params: SecurityParams,
    adversary: AdversaryConfig | None,
    rng,
    paths: PathSet | None = None,
) -> SessionOutcome:
    """Run establish, challenge, response, and distillation once.

    All randomness flows from ``rng`` in a fixed order (per-link pool
    epochs in path/hop order, then per-path shares, then the parity
    vectors, with adversary draws interleaved at interception points),
    so a seeded generator reproduces the trial bit-for-bit.  Protocol
    failures surface as result=0 outcomes, never exceptions.
    """
    if paths is None:
        paths = vertex_disjoint_paths(graph, a, b, params.ell)
    view = AdversaryView(len(paths), params.n)
    interceptor = (
        ScriptedAdversary(adversary, view, rng) if adversary is not None else None
    )
    pools = provision_pools(graph, paths, params.session_demand_bits, rng)
    hop_lists = [_path_hops(p, pools) for p in paths.paths]

    w = params.word_bits
    n = params.n
    sent = []
    received = []
    for i, hops in enumerate(hop_lists):
        share = BitString.random(n, rng)
        sent.append(share)
        received.append(_forward_key_over(hops, share.value, n, w, interceptor, i))
    est = EstablishResult(
        key_a=xor_combine(sent),
        key_b=xor_combine(received),
        shares_sent=tuple(sent),
        shares_received=tuple(received),
        paths=paths,
    )
    parts_a = split_session_key(est.key_a, params)
    parts_b = split_session_key(est.key_b, params)

    challenge = _make_challenge(parts_a, params, rng)
    payload = challenge.payload()
    challenge_copies = tuple(
        _classical_over(hops, payload.value, payload.length,
                        w, interceptor, i, "challenge")
        for i, hops in enumerate(hop_lists)
    )
    cv = _verify_challenge(challenge_copies, parts_b, params)

    response_payload = _make_response(cv.result, parts_b, params)
    response_copies = tuple(
        _classical_over(hops, response_payload.value, response_payload.length,
                        w, interceptor, i, "response")
        for i, hops in enumerate(hop_lists)
    )
    rv = _verify_response(response_copies, parts_a, params)

    final_a = final_b = None
    trash_a = trash_b = None
    if rv.result_prime == 1:
        final_a, trash_a = deterministic_pa(parts_a.remainder, challenge.lambdas)
    if cv.result == 1:
        final_b, trash_b = deterministic_pa(parts_b.remainder, cv.lambdas)

    published = None
    if interceptor is not None and interceptor.discloses:
        published = disclose(view)

    transcript = AuthTranscript(
        challenge_copies=challenge_copies,
        response_copies=response_copies,
        result=cv.result,
        result_prime=rv.result_prime,
        identified_dishonest=cv.identified_dishonest | rv.identified_dishonest,
    )
    return SessionOutcome(
        result=cv.result,
        result_prime=rv.result_prime,
        keys_equal=parts_a.remainder == parts_b.remainder,
        full_keys_equal=est.key_a == est.key_b,
        final_key_a=final_a,
        final_key_b=final_b,
        trash_a=trash_a,
        trash_b=trash_b,
        transcript=transcript,
        shares_sent=est.shares_sent,
        shares_received=est.shares_received,
        challenge_lambdas=challenge.lambdas,
        paths=paths,
        view=view,
        published=published,
        leaked_epochs=len(view.compromised_link_bits),
        parity_bits_disclosed=params.m,
    )
