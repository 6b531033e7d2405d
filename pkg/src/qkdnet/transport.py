"""Hop-by-hop key forwarding and classical message delivery.

Each link maintains a :class:`LinkKeyPool` of bits shared by its two
endpoints, grown in epochs by :func:`qkd_generate`.  Under the
epsilon-ideal model an epoch is uniform and fresh, but with probability
``link.epsilon`` it is flagged compromised (the adversary learns its
bits).  Hop transmission one-time-pads the payload and authenticates the
ciphertext with a fresh per-hop MAC key drawn from the same pool, so no
pool bit is ever used twice.

Intermediate nodes of a path see forwarded key material in plaintext
(the trusted-repeater property); an ``interceptor`` hook lets corrupted
nodes record and substitute values.  Classical messages on honest paths
are always delivered within the trial, which discretizes the
eventual-delivery assumption.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bits import BitString
from .errors import AuthFailure, InsufficientKey, LinkDown
from .mac import _tag_value
from .network import NodeId, QkdLink


class _Epoch:
    __slots__ = ("value", "nbits", "compromised")

    def __init__(self, value, nbits, compromised):
        self.value = value
        self.nbits = nbits
        self.compromised = compromised


class LinkKeyPool:
    """Queue of key bits available identically to both link endpoints.

    Both endpoints consume the same bits in the same order; ``take``
    never returns a bit twice.  Epochs record their compromised flag so
    consumers can account for epsilon-leaks.
    """

    __slots__ = ("link", "consumed", "available", "_epochs", "_head",
                 "_head_used")

    def __init__(self, link: QkdLink):
        self.link = link
        self.consumed = 0
        self.available = 0
        self._epochs: list[_Epoch] = []
        self._head = 0
        self._head_used = 0

    @property
    def epochs(self) -> list[tuple[int, bool]]:
        """(nbits, compromised) for every epoch ever generated."""
        return [(e.nbits, e.compromised) for e in self._epochs]

    def compromised_bits(self) -> list[BitString]:
        """Bit content of compromised epochs (what the adversary learned)."""
        return [
            BitString.from_int(e.value, e.nbits)
            for e in self._epochs
            if e.compromised
        ]

    def _append_epoch(self, value: int, nbits: int, compromised: bool):
        self._epochs.append(_Epoch(value, nbits, compromised))
        self.available += nbits

    def take(self, nbits: int) -> tuple[int, bool]:
        """Consume ``nbits`` from the pool front.

        Returns the bits as an integer (first-consumed bit most
        significant) and whether any of them came from a compromised
        epoch.  Raises :class:`InsufficientKey` when the pool is short.
        """
        if nbits > self.available:
            raise InsufficientKey(
                f"pool on {self.link.key} has {self.available} bits, "
                f"need {nbits}"
            )
        out = 0
        leaked = False
        remaining = nbits
        while remaining:
            epoch = self._epochs[self._head]
            left = epoch.nbits - self._head_used
            grab = min(left, remaining)
            shift = left - grab
            chunk = (epoch.value >> shift) & ((1 << grab) - 1)
            out = (out << grab) | chunk
            leaked = leaked or epoch.compromised
            self._head_used += grab
            remaining -= grab
            if self._head_used == epoch.nbits:
                self._head += 1
                self._head_used = 0
        self.consumed += nbits
        self.available -= nbits
        return out, leaked


def qkd_generate(pool: LinkKeyPool, nbits: int, rng) -> None:
    """Grow the pool by one fresh epoch of ``nbits`` uniform bits.

    With probability ``link.epsilon`` the epoch is flagged compromised,
    which is the operational meaning of an epsilon-ideal key source.
    Raises :class:`LinkDown` if the link has aborted.
    """
    if not pool.link.alive:
        raise LinkDown(f"link {pool.link.key} is down")
    value = rng.getrandbits(nbits) if nbits else 0
    compromised = rng.random() < pool.link.epsilon
    pool._append_epoch(value, nbits, compromised)


@dataclass(frozen=True)
class HopMessage:
    """One hop transmission: OTP ciphertext plus its authentication tag.

    ``leaked`` is simulation metadata: the OTP bits came from a
    compromised epoch, so the adversary can strip the pad.
    """

    sender: NodeId
    receiver: NodeId
    payload: BitString
    tag: BitString
    encrypted: bool = True
    leaked: bool = False


def _hop_transfer(pool: LinkKeyPool, value: int, nbits: int, w: int):
    """Object-free hop: OTP-encrypt, tag, deliver, decrypt.

    The in-model wire is never attacked (the adversary acts at corrupted
    nodes, which are legitimate hop endpoints), so the receiver-side tag
    check provably passes and the tag is computed once.  Pool bits are
    drawn in one call but assigned exactly as in :func:`hop_send`: pad
    first, then the 2w-bit hop MAC key.
    """
    combined, leaked = pool.take(nbits + 2 * w)
    mac_key = combined & ((1 << (2 * w)) - 1)
    otp = combined >> (2 * w)
    cipher = value ^ otp
    _tag_value(w, mac_key, cipher, nbits)
    return cipher ^ otp, leaked


def _path_hops(path, pools):
    """Per-hop (pool, intermediate receiver) pairs for a path.

    The receiver entry is None on the final hop (delivery to the
    endpoint is not an interception point).
    """
    last = path[-1]
    return tuple(
        (pools[(u, v) if u <= v else (v, u)], v if v != last else None)
        for u, v in zip(path[:-1], path[1:])
    )


def _forward_key_over(hops, value, nbits, w, interceptor, path_index):
    for pool, stop in hops:
        value, leaked = _hop_transfer(pool, value, nbits, w)
        if interceptor is not None:
            if leaked:
                interceptor.on_hop_leak(
                    path_index, pool.link, BitString.from_int(value, nbits)
                )
            if stop is not None:
                out = interceptor.on_key_hop(
                    path_index, stop, BitString.from_int(value, nbits)
                )
                value, nbits = out.value, out.length
    return BitString.from_int(value, nbits)


def _classical_over(hops, value, nbits, w, interceptor, path_index, kind):
    for pool, stop in hops:
        value, _ = _hop_transfer(pool, value, nbits, w)
        if stop is not None and interceptor is not None:
            out = interceptor.on_classical_hop(
                path_index, stop, kind, BitString.from_int(value, nbits)
            )
            if out is None:
                return None
            value, nbits = out.value, out.length
    return BitString.from_int(value, nbits)


def hop_send(
    pool: LinkKeyPool,
    payload: BitString,
    word_bits: int,
    sender: NodeId | None = None,
    wire_tamper=None,
) -> tuple[BitString, HopMessage]:
    """Send ``payload`` across one link: encrypt, tag, verify, decrypt.

    Consumes ``len(payload) + 2*word_bits`` pool bits (pad plus hop MAC
    key).  ``wire_tamper``, when given, maps (ciphertext, tag) to the
    values actually arriving; a mismatch raises :class:`AuthFailure`.
    Returns the decrypted payload at the receiver and the wire message.
    """
    if not pool.link.alive:
        raise LinkDown(f"link {pool.link.key} is down")
    n = payload.length
    otp, otp_leaked = pool.take(n)
    mac_key, _ = pool.take(2 * word_bits)
    cipher = payload.value ^ otp
    t = _tag_value(word_bits, mac_key, cipher, n)

    wire_cipher, wire_tag = cipher, t
    if wire_tamper is not None:
        tampered = wire_tamper(
            BitString.from_int(cipher, n), BitString.from_int(t, word_bits)
        )
        wire_cipher, wire_tag = tampered[0].value, tampered[1].value

    if sender is None:
        sender = pool.link.a
    receiver = pool.link.b if sender == pool.link.a else pool.link.a
    msg = HopMessage(
        sender=sender,
        receiver=receiver,
        payload=BitString.from_int(wire_cipher, n),
        tag=BitString.from_int(wire_tag, word_bits),
        leaked=otp_leaked,
    )
    if _tag_value(word_bits, mac_key, wire_cipher, n) != wire_tag:
        raise AuthFailure(f"hop authentication failed on {pool.link.key}")
    return BitString.from_int(wire_cipher ^ otp, n), msg


def path_forward_key(
    path,
    share: BitString,
    pools,
    word_bits: int,
    interceptor=None,
    path_index: int = 0,
) -> BitString:
    """Relay a key share hop-by-hop along ``path``; return what B receives.

    Every intermediate node observes the share in plaintext.  The
    ``interceptor`` (when given) is consulted at each intermediate node
    via ``on_key_hop(path_index, node, value) -> value`` and may record
    or substitute; epsilon-leaked hops are reported via
    ``on_hop_leak(path_index, link, value)``.
    """
    return _forward_key_over(
        _path_hops(path, pools), share.value, share.length,
        word_bits, interceptor, path_index,
    )


def classical_send(
    path,
    message: BitString,
    pools,
    word_bits: int,
    interceptor=None,
    path_index: int = 0,
    kind: str = "",
) -> BitString | None:
    """Deliver a classical protocol message along ``path``.

    On a path with no corrupted node the message always arrives
    unmodified (eventual delivery, discretized to same-trial delivery).
    At corrupted nodes the interceptor's
    ``on_classical_hop(path_index, node, kind, message)`` chooses what to
    relay; returning None drops the message, making the delivery ⊥.
    """
    return _classical_over(
        _path_hops(path, pools), message.value, message.length,
        word_bits, interceptor, path_index, kind,
    )
