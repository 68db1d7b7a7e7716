"""Trusted-dealer-free key generation over a star topology.

Every client deals a random secret through Pedersen-committed Shamir
shares; complaint counting and server-side share verification decide the
qualified set; Feldman commitments then pin each qualified dealer's
public-key part g^{z_i}, with disputes settled by reconstructing the
dealer's secret from T verified shares.  The global public key is the
product of the per-dealer parts, and each client's private share x_i is
the sum of the shares it received from qualified dealers.

All broadcasts are echoed through the coordinator; pairwise shares also
route through it but as sealed payloads it never reads (that separation is
what the message bus audits).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from random import Random
from typing import Mapping

from .errors import AbortDisputeUnresolvable, AbortInsufficientQual, MissingShare
from .group import GroupParams
from .sharing import (FeldmanCommitment, PedersenCommitment, SecretPolynomialPair,
                      ShareBundle, evaluate, feldman_commit, feldman_verify,
                      lagrange_coefficient, pedersen_commit, pedersen_verify,
                      reconstruct_at_zero, sample_polynomial_pair)
from .wire import encode_int_seq

# Dealer misbehaviors the client state machine can act out.
BEHAVIOR_BAD_SHARE = "bad_share"        # corrupt every outgoing share
BEHAVIOR_FAKE_A0 = "fake_A0"            # broadcast a wrong public-key part
BEHAVIOR_SILENT = "silent"              # send nothing in any phase
BEHAVIOR_FALSE_COMPLAINT = "false_complaint"  # accuse every honest dealer


@dataclass
class FkgClient:
    """Per-client state machine; the coordinator drives its phases."""

    index: int
    params: GroupParams
    T: int
    rng: Random
    behavior: str | None = None

    poly: SecretPolynomialPair | None = None
    received_shares: dict[int, ShareBundle] = field(default_factory=dict)
    received_pedersen: dict[int, PedersenCommitment] = field(default_factory=dict)
    received_feldman: dict[int, FeldmanCommitment] = field(default_factory=dict)
    x_i: int | None = None

    @property
    def z_i(self) -> int:
        if self.poly is None:
            raise MissingShare("client has not dealt yet")
        return self.poly.secret

    # -- deal phase ---------------------------------------------------------

    def deal(self, recipients) -> tuple[PedersenCommitment | None, dict[int, ShareBundle] | None]:
        if self.behavior == BEHAVIOR_SILENT:
            return None, None
        self.poly = sample_polynomial_pair(self.params, self.T, self.rng)
        shares = {}
        for j in recipients:
            share = evaluate(self.params, self.poly, self.index, j)
            if self.behavior == BEHAVIOR_BAD_SHARE and j != self.index:
                share = ShareBundle(dealer=self.index, recipient=j,
                                    s=(share.s + 1) % self.params.q,
                                    s_prime=share.s_prime)
            shares[j] = share
        self.receive_share(shares[self.index])
        return pedersen_commit(self.params, self.poly), shares

    def receive_commitment(self, dealer: int, commit: PedersenCommitment):
        self.received_pedersen[dealer] = commit

    def receive_share(self, share: ShareBundle):
        self.received_shares[share.dealer] = share

    # -- complaint phase ----------------------------------------------------

    def pedersen_complaints(self, dealers) -> set[int]:
        """Dealers whose share is missing or fails the Pedersen check."""
        if self.behavior == BEHAVIOR_SILENT:
            return set()
        accused = set()
        for dealer in dealers:
            if dealer == self.index:
                continue
            if self.behavior == BEHAVIOR_FALSE_COMPLAINT:
                accused.add(dealer)
                continue
            share = self.received_shares.get(dealer)
            commit = self.received_pedersen.get(dealer)
            if share is None or commit is None or not pedersen_verify(self.params, share, commit):
                accused.add(dealer)
        return accused

    def upload_disputed_shares(self, complainers) -> dict[int, ShareBundle] | None:
        """Re-send the shares for each complainer so the server can check them."""
        if self.behavior == BEHAVIOR_SILENT or self.poly is None:
            return None
        out = {}
        for j in complainers:
            share = evaluate(self.params, self.poly, self.index, j)
            if self.behavior == BEHAVIOR_BAD_SHARE:
                share = ShareBundle(dealer=self.index, recipient=j,
                                    s=(share.s + 1) % self.params.q,
                                    s_prime=share.s_prime)
            out[j] = share
        return out

    def adopt_revealed_share(self, share: ShareBundle):
        self.received_shares[share.dealer] = share

    # -- Feldman phase ------------------------------------------------------

    def feldman_broadcast(self) -> FeldmanCommitment:
        commit = feldman_commit(self.params, self.poly)
        if self.behavior == BEHAVIOR_FAKE_A0:
            fake = (commit.A[0] * self.params.g % self.params.p,) + commit.A[1:]
            commit = FeldmanCommitment(A=fake)
        return commit

    def receive_feldman(self, dealer: int, commit: FeldmanCommitment):
        self.received_feldman[dealer] = commit

    def feldman_complaints(self, qual) -> set[int]:
        """Dealers whose share passed Pedersen but fails the Feldman check."""
        accused = set()
        for dealer in qual:
            if dealer == self.index:
                continue
            share = self.received_shares.get(dealer)
            commit = self.received_feldman.get(dealer)
            if share is None or commit is None:
                accused.add(dealer)
            elif not feldman_verify(self.params, share, commit):
                accused.add(dealer)
        return accused

    def upload_share_of(self, dealer: int) -> ShareBundle | None:
        return self.received_shares.get(dealer)

    # -- finalization -------------------------------------------------------

    def finalize(self, qual) -> int:
        self.x_i = compute_private_share(self.params, self.received_shares, qual)
        return self.x_i


def compute_private_share(params: GroupParams,
                          received_shares: Mapping[int, ShareBundle],
                          qual) -> int:
    """x_i = sum of the shares received from every qualified dealer, mod q."""
    if not qual:
        raise MissingShare("qualified set is empty")
    total = 0
    for dealer in qual:
        share = received_shares.get(dealer)
        if share is None:
            raise MissingShare(f"no share from qualified dealer {dealer}")
        total = (total + share.s) % params.q
    return total


@dataclass(frozen=True)
class FkgTranscript:
    """Everything the coordinator learned during one key generation."""

    round: int
    n: int
    T: int
    complaints: dict[int, frozenset[int]]
    feldman_complaints: dict[int, frozenset[int]]
    qual: frozenset[int]
    disqualified: frozenset[int]
    h: int
    h_parts: dict[int, int]
    reconstructed: dict[int, int]


def _record(bus, phase, kind, sender, receiver, nbytes, private=False):
    if bus is not None:
        bus.record(phase=phase, kind=kind, sender=sender, receiver=receiver,
                   nbytes=nbytes, private=private)


def run_fkg(clients, T: int, params: GroupParams,
            adversary_plan: Mapping[int, str] | None = None,
            bus=None, round_no: int = 0) -> FkgTranscript:
    """Drive the full key-generation protocol and return its transcript.

    ``clients`` are :class:`FkgClient` instances with distinct 1-based
    indices; ``adversary_plan`` maps client index to a behavior constant.
    Raises :class:`AbortInsufficientQual` if fewer than T clients survive,
    :class:`AbortDisputeUnresolvable` if a Feldman dispute cannot gather T
    verified shares.
    """
    n = len(clients)
    if n < 2:
        raise ValueError("need at least two clients")
    if not (n / 2 < T <= n):
        raise ValueError(f"threshold must satisfy n/2 < T <= n, got T={T}, n={n}")
    by_index = {c.index: c for c in clients}
    if len(by_index) != n:
        raise ValueError("client indices must be distinct")
    indices = sorted(by_index)
    if adversary_plan:
        for idx, behavior in adversary_plan.items():
            if idx in by_index:
                by_index[idx].behavior = behavior

    # Deal: broadcast Pedersen commitments, route sealed shares.
    commitments: dict[int, PedersenCommitment] = {}
    for i in indices:
        commit, shares = by_index[i].deal(indices)
        if commit is None:
            continue
        commitments[i] = commit
        nbytes = len(commit.to_bytes())
        _record(bus, "deal", "pedersen_commitment", i, 0, nbytes)
        for j in indices:
            if j == i:
                continue
            _record(bus, "deal", "pedersen_commitment", 0, j, nbytes)
            share_bytes = len(shares[j].to_bytes())
            _record(bus, "deal", "share", i, j, share_bytes, private=True)
            by_index[j].receive_share(shares[j])
    for j in indices:
        for i, commit in commitments.items():
            by_index[j].receive_commitment(i, commit)

    # Complain: one complaint per misbehaving dealer per client.
    complaints: dict[int, set[int]] = {}
    for j in indices:
        for accused in by_index[j].pedersen_complaints(indices):
            complaints.setdefault(accused, set()).add(j)
            _record(bus, "complain", "complaint", j, 0, len(encode_int_seq((accused,))))

    # Verify: count complaints, check uploaded shares for the disputed pairs.
    qual: set[int] = set()
    disqualified: set[int] = set()
    for i in indices:
        complainers = sorted(complaints.get(i, ()))
        if len(complainers) > T:
            disqualified.add(i)
            continue
        if not complainers:
            qual.add(i)
            continue
        uploaded = by_index[i].upload_disputed_shares(complainers)
        commit = commitments.get(i)
        ok = uploaded is not None and commit is not None
        if ok:
            for j in complainers:
                share = uploaded.get(j)
                if share is None or share.recipient != j or not pedersen_verify(params, share, commit):
                    ok = False
                    break
                _record(bus, "verify", "disputed_share_upload", i, 0, len(share.to_bytes()))
        if ok:
            qual.add(i)
            for j in complainers:
                _record(bus, "verify", "revealed_share", 0, j, len(uploaded[j].to_bytes()))
                by_index[j].adopt_revealed_share(uploaded[j])
        else:
            disqualified.add(i)
    if len(qual) < T:
        raise AbortInsufficientQual(
            f"only {len(qual)} qualified clients, threshold is {T}")

    # Feldman: qualified dealers expose g^{a_k}; mismatches raise disputes.
    feldman: dict[int, FeldmanCommitment] = {}
    for i in sorted(qual):
        commit = by_index[i].feldman_broadcast()
        feldman[i] = commit
        nbytes = len(commit.to_bytes())
        _record(bus, "feldman", "feldman_commitment", i, 0, nbytes)
        for j in sorted(qual):
            if j != i:
                _record(bus, "feldman", "feldman_commitment", 0, j, nbytes)
    for j in sorted(qual):
        for i, commit in feldman.items():
            by_index[j].receive_feldman(i, commit)
    f_complaints: dict[int, set[int]] = {}
    for j in sorted(qual):
        for accused in by_index[j].feldman_complaints(sorted(qual)):
            f_complaints.setdefault(accused, set()).add(j)
            _record(bus, "feldman", "complaint", j, 0, len(encode_int_seq((accused,))))

    # Dispute: rebuild the accused dealer's secret from T verified shares.
    accused_set = set(f_complaints)
    h_parts: dict[int, int] = {}
    reconstructed: dict[int, int] = {}
    for i in sorted(qual - accused_set):
        h_parts[i] = feldman[i].A[0]
    for i in sorted(accused_set):
        points: list[tuple[int, int]] = []
        for j in sorted(qual - accused_set - {i}):
            share = by_index[j].upload_share_of(i)
            if share is None:
                continue
            _record(bus, "dispute", "dispute_share_upload", j, 0, len(share.to_bytes()))
            if pedersen_verify(params, share, commitments[i]):
                points.append((j, share.s))
            if len(points) >= T:
                break
        if len(points) < T:
            raise AbortDisputeUnresolvable(
                f"dealer {i}: gathered {len(points)} verified shares, need {T}")
        z_i = reconstruct_at_zero(points, params.q)
        h_parts[i] = pow(params.g, z_i, params.p)
        reconstructed[i] = h_parts[i]

    # Assemble: h is the product of the per-dealer public parts.
    h = 1
    for i in sorted(qual):
        h = h * h_parts[i] % params.p
    pk_bytes = len(encode_int_seq((h,))) + len(encode_int_seq(tuple(sorted(qual))))
    for j in indices:
        _record(bus, "assemble", "public_key", 0, j, pk_bytes)
    for j in indices:
        client = by_index[j]
        try:
            client.finalize(qual)
        except MissingShare:
            client.x_i = None  # a misbehaving client may lack verified shares

    return FkgTranscript(
        round=round_no, n=n, T=T,
        complaints={i: frozenset(v) for i, v in complaints.items()},
        feldman_complaints={i: frozenset(v) for i, v in f_complaints.items()},
        qual=frozenset(qual), disqualified=frozenset(disqualified),
        h=h, h_parts=h_parts, reconstructed=reconstructed)


def decryption_lagrange(subset, q: int) -> dict[int, int]:
    """Lagrange coefficients at zero for the subset that actually decrypts."""
    return {i: lagrange_coefficient(i, subset, q) for i in subset}
