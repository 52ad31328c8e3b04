"""Functional model of the multiparty session-approval flow.

Four kinds of party take part: a requesting user agent, a session handler
(the principal the authority is willing to talk to), the session authority
that verifies identities and issues session keys, and the target cloud
registries where granted sessions are stored.  Credentials and keys are
opaque tokens with a modeled verification relation; no real cryptography is
involved, only the decision logic and its bookkeeping.

A full run walks nine numbered message steps:

1. user -> handler      access request
2. handler -> user      identity challenge
3. user -> handler      certificate presentation
4. handler -> authority session request under a fresh session id
5. authority -> its own identity store: verification lookup
6. authority -> each target cloud: store the new session
7. each target cloud -> authority: acknowledge (or refuse)
8. authority -> handler approval with the session key
9. handler -> user      grant, approval flag set to 1

Any gate failing stops the walk where it stands, the flag stays 0, and no
cloud registry retains the session.  Grants are all-or-nothing across the
target clouds.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional

__all__ = [
    "SessionStatus",
    "Credential",
    "SessionRecord",
    "ProtocolStep",
    "ProtocolTranscript",
    "SessionDecisionRequest",
    "CloudRegistry",
    "SessionAuthority",
    "SessionHandler",
    "UserAgent",
    "request_access",
    "forward_session_request",
    "run_protocol",
    "TrustCase",
    "CaseOutcome",
    "run_trust_case",
    "exhaustive_trust_matrix",
]


class SessionStatus(Enum):
    PENDING = "pending"
    GRANTED = "granted"
    DENIED = "denied"


@dataclass(frozen=True)
class Credential:
    """Opaque membership material issued at enrollment.

    Verification compares the presented credential with the stored copy, so
    flipping any field models tampering.
    """

    user_id: str
    realm: str
    root_key: str
    subdomain_key: str
    certificate: str

    def fields_present(self) -> bool:
        return all(
            (self.user_id, self.realm, self.root_key, self.subdomain_key, self.certificate)
        )


@dataclass
class SessionRecord:
    """Authority-side state of one session."""

    session_id: str
    session_key: str
    user_id: str
    target_clouds: frozenset[str]
    status: SessionStatus = SessionStatus.PENDING


@dataclass(frozen=True)
class ProtocolStep:
    number: int
    sender: str
    receiver: str
    kind: str


@dataclass
class ProtocolTranscript:
    """Ordered record of one protocol run.

    ``flag`` is 1 only after the final grant message; a denied run keeps
    flag 0 and carries the reason.
    """

    steps: list[ProtocolStep] = field(default_factory=list)
    flag: int = 0
    session_id: Optional[str] = None
    denial_reason: Optional[str] = None

    def add(self, number: int, sender: str, receiver: str, kind: str) -> None:
        self.steps.append(ProtocolStep(number, sender, receiver, kind))

    def deny(self, reason: str) -> None:
        self.denial_reason = reason

    @property
    def step_numbers(self) -> list[int]:
        return [s.number for s in self.steps]


@dataclass(frozen=True)
class SessionDecisionRequest:
    """What the authority receives at step 4."""

    session_id: str
    certificate: Credential
    principal: str


class CloudRegistry:
    """Target cloud's session store.

    ``accept_grants`` set to False models a cloud that refuses to store new
    sessions (it still answers, with a refusal).
    """

    def __init__(self, name: str, accept_grants: bool = True) -> None:
        self.name = name
        self.accept_grants = accept_grants
        self.sessions: dict[str, str] = {}

    def store_session(self, session_id: str, session_key: str) -> bool:
        if not self.accept_grants:
            return False
        self.sessions[session_id] = session_key
        return True

    def discard_session(self, session_id: str) -> None:
        self.sessions.pop(session_id, None)

    def __contains__(self, session_id: str) -> bool:
        return session_id in self.sessions


class SessionAuthority:
    """Issues session keys after checking who is asking and for whom.

    Holds the trust anchors (realms whose members may be verified,
    principals allowed to submit requests), the identity store written at
    enrollment, the session registry, and a denial log.  Granting is
    serialized under a lock so concurrent handlers cannot interleave a
    partial grant with a rollback.
    """

    def __init__(
        self,
        trusted_realms: Iterable[str] = (),
        trusted_principals: Iterable[str] = (),
        name: str = "authority",
    ) -> None:
        self.name = name
        self.trusted_realms = set(trusted_realms)
        self.trusted_principals = set(trusted_principals)
        self.registry: dict[str, SessionRecord] = {}
        self.denial_log: list[tuple[Optional[str], str]] = []
        self._identity_store: dict[str, Credential] = {}
        self._clouds: dict[str, CloudRegistry] = {}
        self._enroll_counter = itertools.count(1)
        self._key_counter = itertools.count(1)
        self._lock = threading.Lock()

    # -- enrollment and directory -------------------------------------

    def register_cloud(self, cloud: CloudRegistry) -> None:
        self._clouds[cloud.name] = cloud

    def known_clouds(self) -> frozenset[str]:
        return frozenset(self._clouds)

    def enroll_user(self, user_id: str, realm: str) -> Credential:
        """Issue membership keys and a certificate, keeping the reference copy.

        Re-enrolling a user id replaces its stored material.
        """
        if not user_id or not realm:
            raise ValueError("user id and realm must be non-empty")
        n = next(self._enroll_counter)
        cred = Credential(
            user_id=user_id,
            realm=realm,
            root_key=f"root-{realm}-{n:04d}",
            subdomain_key=f"sub-{realm}-{n:04d}",
            certificate=f"cert-{user_id}-{n:04d}",
        )
        self._identity_store[user_id] = cred
        return cred

    # -- decision gates ------------------------------------------------

    def accepts_principal(self, principal: str) -> bool:
        return principal in self.trusted_principals

    def verify_identity(self, presented: Optional[Credential]) -> bool:
        """True iff the presented credential is byte-for-byte the enrolled
        one and its realm is currently trusted.  Read-only."""
        if presented is None or not presented.fields_present():
            return False
        if presented.realm not in self.trusted_realms:
            return False
        return self._identity_store.get(presented.user_id) == presented

    def log_denial(self, session_id: Optional[str], reason: str) -> None:
        self.denial_log.append((session_id, reason))

    # -- granting --------------------------------------------------------

    def grant_session(
        self, session_id: str, user_id: str, target_clouds: Iterable[str]
    ) -> tuple[SessionRecord, list[tuple[str, bool]]]:
        """Issue a key and push the session to every target cloud.

        Returns the record plus per-cloud acknowledgements in deterministic
        (sorted) cloud order.  All-or-nothing: one refusal rolls back every
        store and drops the record, leaving it DENIED.  Unknown cloud names
        and an empty target set are caller errors, not denials.
        """
        targets = tuple(sorted(set(target_clouds)))
        if not targets:
            raise ValueError("target cloud set must not be empty")
        unknown = [t for t in targets if t not in self._clouds]
        if unknown:
            raise ValueError(f"unknown target clouds: {', '.join(unknown)}")
        with self._lock:
            if session_id in self.registry:
                raise ValueError(f"session id {session_id!r} already registered")
            key = f"sess-key-{next(self._key_counter):06d}"
            record = SessionRecord(session_id, key, user_id, frozenset(targets))
            self.registry[session_id] = record
            acks = [
                (name, self._clouds[name].store_session(session_id, key))
                for name in targets
            ]
            if all(ok for _, ok in acks):
                record.status = SessionStatus.GRANTED
            else:
                for name, ok in acks:
                    if ok:
                        self._clouds[name].discard_session(session_id)
                del self.registry[session_id]
                record.status = SessionStatus.DENIED
                refused = next(name for name, ok in acks if not ok)
                self.log_denial(session_id, f"cloud {refused} refused to store session")
            return record, acks


class SessionHandler:
    """Session handler ``F``: fronts the user and talks to the authority."""

    def __init__(self, name: str, authority: SessionAuthority) -> None:
        self.name = name
        self.authority = authority
        self._session_counter = itertools.count(1)
        self.pending: dict[str, tuple[Credential, tuple[str, ...]]] = {}

    def new_session_id(self) -> str:
        # Prefixed with the handler name so ids never collide across handlers.
        return f"{self.name}-sess-{next(self._session_counter):06d}"

    @staticmethod
    def certificate_plausible(cred: Optional[Credential]) -> bool:
        """Structural check only; real verification belongs to the authority."""
        return cred is not None and cred.fields_present()


class UserAgent:
    """Requesting party.  May withhold its certificate to model a client
    that aborts at the identity challenge."""

    def __init__(
        self, name: str, credential: Optional[Credential], withhold_certificate: bool = False
    ) -> None:
        self.name = name
        self.credential = credential
        self.withhold_certificate = withhold_certificate

    def present_certificate(self) -> Optional[Credential]:
        if self.withhold_certificate:
            return None
        return self.credential


def request_access(
    user: UserAgent,
    target_clouds: Iterable[str],
    handler: SessionHandler,
    transcript: Optional[ProtocolTranscript] = None,
) -> ProtocolTranscript:
    """Steps 1-3: access request, identity challenge, certificate presentation.

    On success the handler holds the certificate and targets under a fresh
    session id, published on the transcript.  A withheld or structurally
    empty certificate stops the walk with flag 0 and no session id.
    """
    t = transcript if transcript is not None else ProtocolTranscript()
    targets = tuple(sorted(set(target_clouds)))
    t.add(1, user.name, handler.name, "access-request")
    t.add(2, handler.name, user.name, "identity-request")
    cert = user.present_certificate()
    if cert is None:
        t.deny("certificate withheld")
        return t
    t.add(3, user.name, handler.name, "certificate")
    if not handler.certificate_plausible(cert):
        t.deny("malformed certificate")
        return t
    session_id = handler.new_session_id()
    handler.pending[session_id] = (cert, targets)
    t.session_id = session_id
    return t


def forward_session_request(
    handler: SessionHandler, session_id: str
) -> SessionDecisionRequest:
    """Step 4 payload: what the handler sends the authority."""
    cert, _targets = handler.pending[session_id]
    return SessionDecisionRequest(session_id, cert, handler.name)


def run_protocol(
    user: UserAgent,
    target_clouds: Iterable[str],
    handler: SessionHandler,
    authority: Optional[SessionAuthority] = None,
    clouds: Optional[Iterable[CloudRegistry]] = None,
) -> ProtocolTranscript:
    """Execute one full session-approval attempt and return its transcript.

    ``authority`` defaults to the handler's; ``clouds`` are registered with
    it first if given.  An empty target set is a parameter error, raised
    before any message is exchanged.
    """
    authority = authority if authority is not None else handler.authority
    if clouds is not None:
        for cloud in clouds:
            authority.register_cloud(cloud)
    targets = tuple(sorted(set(target_clouds)))
    if not targets:
        raise ValueError("target cloud set must not be empty")

    t = request_access(user, targets, handler)
    if t.session_id is None:
        return t

    t.add(4, handler.name, authority.name, "session-request")
    decision_req = forward_session_request(handler, t.session_id)
    if not authority.accepts_principal(decision_req.principal):
        authority.log_denial(t.session_id, f"untrusted principal {decision_req.principal}")
        t.deny("untrusted principal")
        return t

    t.add(5, authority.name, f"{authority.name}-identity-store", "identity-verification")
    if not authority.verify_identity(decision_req.certificate):
        authority.log_denial(t.session_id, "identity verification failed")
        t.deny("identity verification failed")
        return t

    record, acks = authority.grant_session(
        t.session_id, decision_req.certificate.user_id, targets
    )
    for cloud_name, _ok in acks:
        t.add(6, authority.name, cloud_name, "session-store")
    for cloud_name, ok in acks:
        t.add(7, cloud_name, authority.name, "session-stored" if ok else "store-refused")
    if record.status is not SessionStatus.GRANTED:
        t.deny("target cloud refused the session")
        return t

    t.add(8, authority.name, handler.name, "session-approved")
    t.add(9, handler.name, user.name, "session-granted")
    t.flag = 1
    return t


# -- exhaustive trust fixture ------------------------------------------------


@dataclass(frozen=True)
class TrustCase:
    """One corner of the trust space."""

    realm_trusted: bool
    principal_trusted: bool
    certificate_intact: bool
    clouds_acknowledge: bool

    @property
    def should_grant(self) -> bool:
        return (
            self.realm_trusted
            and self.principal_trusted
            and self.certificate_intact
            and self.clouds_acknowledge
        )


@dataclass(frozen=True)
class CaseOutcome:
    """Observed behavior for one trust case.

    ``leak_free`` is True when a denied attempt left no entry in any target
    registry; ``stored_everywhere`` when a granted session is present in all
    of them.  Both hold vacuously in the opposite outcome.
    """

    case: TrustCase
    flag: int
    denial_reason: Optional[str]
    leak_free: bool
    stored_everywhere: bool


def run_trust_case(
    case: TrustCase,
    lenient_realms: bool = False,
    lenient_principals: bool = False,
) -> CaseOutcome:
    """Build a fresh world for one trust case and run the protocol once.

    ``lenient_realms`` makes the authority trust every realm in play, so the
    realm axis stops mattering; likewise ``lenient_principals`` for the
    sender gate.  These model a deployment with broader trust anchors.
    """
    user_realm = "realm-a"
    trusted_realms = {user_realm} if case.realm_trusted else {"realm-other"}
    if lenient_realms:
        trusted_realms = {user_realm, "realm-other"}
    trusted_principals = {"F0"} if case.principal_trusted else {"F1"}
    if lenient_principals:
        trusted_principals = {"F0", "F1"}

    authority = SessionAuthority(
        trusted_realms=trusted_realms, trusted_principals=trusted_principals
    )
    clouds = [
        CloudRegistry("cloud-a"),
        CloudRegistry("cloud-b", accept_grants=case.clouds_acknowledge),
    ]
    for cloud in clouds:
        authority.register_cloud(cloud)
    handler = SessionHandler("F0", authority)

    cred = authority.enroll_user("user-1", user_realm)
    presented = (
        cred
        if case.certificate_intact
        else replace(cred, subdomain_key=cred.subdomain_key + "-tampered")
    )
    user = UserAgent("user-1", presented)

    transcript = run_protocol(user, [c.name for c in clouds], handler, authority)

    sid = transcript.session_id
    held = [cloud for cloud in clouds if sid is not None and sid in cloud]
    if transcript.flag == 1:
        leak_free = True
        stored_everywhere = len(held) == len(clouds)
    else:
        leak_free = not held
        stored_everywhere = True
    return CaseOutcome(
        case=case,
        flag=transcript.flag,
        denial_reason=transcript.denial_reason,
        leak_free=leak_free,
        stored_everywhere=stored_everywhere,
    )


def exhaustive_trust_matrix(
    lenient_realms: bool = False, lenient_principals: bool = False
) -> list[CaseOutcome]:
    """All sixteen trust corners, each in an isolated world."""
    outcomes = []
    for bits in itertools.product((True, False), repeat=4):
        case = TrustCase(*bits)
        outcomes.append(
            run_trust_case(
                case,
                lenient_realms=lenient_realms,
                lenient_principals=lenient_principals,
            )
        )
    return outcomes
