use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::future::Future;
use std::pin::Pin;
use std::rc::Rc;
use std::task::{Context, Poll, Waker};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::topology::{PartyId, Role, Topology};
use super::transcript::{Message, Transcript};
use super::verdict::{TapeEntry, Tapes, V0Rule};
use super::{RuntimeError, Seeds};
use crate::boxes::{shared_tape, PartyClass, SharedTape};

pub type PartyFuture = Pin<Box<dyn Future<Output = Result<(), RuntimeError>>>>;

/// A party's program: started once with its endpoint, then polled by the
/// scheduler until it halts.
pub struct Program {
    party: PartyId,
    start: Box<dyn FnOnce(Endpoint) -> PartyFuture>,
}

impl Program {
    pub fn new<F, Fut>(party: PartyId, body: F) -> Self
    where
        F: FnOnce(Endpoint) -> Fut + 'static,
        Fut: Future<Output = Result<(), RuntimeError>> + 'static,
    {
        Self { party, start: Box::new(move |ep| Box::pin(body(ep))) }
    }

    pub fn party(&self) -> PartyId {
        self.party
    }
}

struct Core {
    topology: Rc<Topology>,
    queues: HashMap<(PartyId, PartyId), VecDeque<Vec<u8>>>,
    messages: Vec<Message>,
    progress: u64,
    starving: BTreeSet<PartyId>,
    violation: Option<RuntimeError>,
}

impl Core {
    fn send(&mut self, from: PartyId, to: PartyId, payload: Vec<u8>) -> Result<(), RuntimeError> {
        let Some(channel) = self.topology.route(from, to) else {
            let err = RuntimeError::LocalityViolation { from, to };
            self.violation.get_or_insert(err.clone());
            return Err(err);
        };
        self.messages.push(Message { seq: self.messages.len() as u64, from, to, channel, payload: payload.clone() });
        if to.role != Role::Verdict {
            self.queues.entry((from, to)).or_default().push_back(payload);
        }
        self.progress += 1;
        Ok(())
    }

    fn try_recv(&mut self, me: PartyId, from: Option<PartyId>) -> Poll<Result<(PartyId, Vec<u8>), RuntimeError>> {
        let senders: Vec<PartyId> = match from {
            Some(f) => {
                if self.topology.route(f, me).is_none() {
                    let err = RuntimeError::LocalityViolation { from: f, to: me };
                    self.violation.get_or_insert(err.clone());
                    return Poll::Ready(Err(err));
                }
                vec![f]
            }
            None => self
                .topology
                .channels()
                .iter()
                .filter_map(|c| {
                    let other = if c.a == me { c.b } else if c.b == me { c.a } else { return None };
                    c.permits(other, me).then_some(other)
                })
                .collect(),
        };
        for s in senders {
            if let Some(p) = self.queues.get_mut(&(s, me)).and_then(VecDeque::pop_front) {
                self.progress += 1;
                return Poll::Ready(Ok((s, p)));
            }
        }
        if self.starving.remove(&me) {
            self.progress += 1;
            return Poll::Ready(Err(RuntimeError::Starved));
        }
        Poll::Pending
    }
}

/// A party's handle on the runtime.
#[derive(Clone)]
pub struct Endpoint {
    me: PartyId,
    core: Rc<RefCell<Core>>,
    seeds: Seeds,
}

impl Endpoint {
    pub fn id(&self) -> PartyId {
        self.me
    }

    /// Enqueues `payload` for `to`. Fails with `LocalityViolation` when no
    /// declared channel carries `self -> to`.
    pub fn send(&self, to: PartyId, payload: Vec<u8>) -> Result<(), RuntimeError> {
        self.core.borrow_mut().send(self.me, to, payload)
    }

    pub fn recv(&self, from: PartyId) -> impl Future<Output = Result<Vec<u8>, RuntimeError>> + 'static {
        let r = Recv { core: self.core.clone(), me: self.me, from: Some(from) };
        async move { r.await.map(|(_, p)| p) }
    }

    /// Next message from any incoming channel, scanning channels in
    /// declaration order.
    pub fn recv_any(&self) -> Recv {
        Recv { core: self.core.clone(), me: self.me, from: None }
    }

    /// Writes one entry on this verifier's tape to V0.
    pub fn write_tape(&self, entry: TapeEntry) -> Result<(), RuntimeError> {
        self.send(PartyId::v0(), entry.encode())
    }

    /// The class-wide shared string: `R` for provers, `S` for verifiers.
    /// Every call restarts at offset 0.
    pub fn shared_tape(&self) -> Result<SharedTape, RuntimeError> {
        match self.me.role {
            Role::Prover => Ok(shared_tape(self.seeds.provers, PartyClass::Provers)),
            Role::Verifier => Ok(shared_tape(self.seeds.verifiers, PartyClass::Verifiers)),
            _ => Err(RuntimeError::Setup(format!("{} has no shared tape", self.me))),
        }
    }

    /// This party's private random tape.
    pub fn private_rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seeds.private);
        let role = match self.me.role {
            Role::Prover => 1u64,
            Role::Verifier => 2,
            Role::ProverCorrelator => 3,
            Role::VerifierCorrelator => 4,
            Role::Verdict => 5,
        };
        rng.set_stream((role << 32) | self.me.index as u64);
        rng
    }

    pub fn seeds(&self) -> Seeds {
        self.seeds
    }
}

pub struct Recv {
    core: Rc<RefCell<Core>>,
    me: PartyId,
    from: Option<PartyId>,
}

impl Future for Recv {
    type Output = Result<(PartyId, Vec<u8>), RuntimeError>;

    fn poll(self: Pin<&mut Self>, _cx: &mut Context<'_>) -> Poll<Self::Output> {
        self.core.borrow_mut().try_recv(self.me, self.from)
    }
}

/// The run could not finish; the messages recorded so far are kept.
#[derive(Debug, Clone)]
pub struct RunAbort {
    pub error: RuntimeError,
    pub transcript: Transcript,
}

impl std::fmt::Display for RunAbort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "run aborted after {} messages: {}", self.transcript.messages.len(), self.error)
    }
}

impl std::error::Error for RunAbort {}

struct Task {
    party: PartyId,
    fut: Option<PartyFuture>,
}

/// Deterministic round-robin executor.
///
/// Each pass polls every live program once, in the order given; a program
/// runs until it blocks on a read. When a full pass makes no progress, the
/// run ends if only non-verifier programs are blocked. Otherwise, with
/// starvation enabled, each blocked verifier is handed a single
/// `RuntimeError::Starved` from its pending read (a timeout); a verifier
/// blocked again after that, or any blocked verifier without starvation,
/// is a deadlock.
pub struct Runner<'a> {
    topology: &'a Topology,
    seeds: Seeds,
    starvation: bool,
}

impl<'a> Runner<'a> {
    pub fn new(topology: &'a Topology, seeds: Seeds) -> Self {
        Self { topology, seeds, starvation: false }
    }

    pub fn with_starvation(mut self, on: bool) -> Self {
        self.starvation = on;
        self
    }

    pub fn run(&self, programs: Vec<Program>, rule: &dyn V0Rule) -> Result<Transcript, RunAbort> {
        let core = Rc::new(RefCell::new(Core {
            topology: Rc::new(self.topology.clone()),
            queues: HashMap::new(),
            messages: Vec::new(),
            progress: 0,
            starving: BTreeSet::new(),
            violation: None,
        }));
        let abort = |error: RuntimeError, core: &Rc<RefCell<Core>>| RunAbort {
            error,
            transcript: Transcript { messages: core.borrow().messages.clone(), ..Default::default() },
        };

        let mut seen = BTreeSet::new();
        for p in &programs {
            if p.party.role == Role::Verdict || !self.topology.parties().contains(&p.party) || !seen.insert(p.party) {
                return Err(abort(RuntimeError::Setup(format!("program for {} not allowed", p.party)), &core));
            }
        }
        if let Some(missing) = self.topology.parties().iter().find(|q| q.role != Role::Verdict && !seen.contains(q)) {
            return Err(abort(RuntimeError::Setup(format!("no program for {missing}")), &core));
        }

        let mut tasks: Vec<Task> = programs
            .into_iter()
            .map(|p| {
                let ep = Endpoint { me: p.party, core: core.clone(), seeds: self.seeds };
                Task { party: p.party, fut: Some((p.start)(ep)) }
            })
            .collect();

        let mut cx = Context::from_waker(Waker::noop());
        let mut starved_once: BTreeSet<PartyId> = BTreeSet::new();
        let mut starved = Vec::new();
        loop {
            let before = core.borrow().progress;
            for t in tasks.iter_mut() {
                let Some(fut) = t.fut.as_mut() else { continue };
                match fut.as_mut().poll(&mut cx) {
                    Poll::Pending => {}
                    Poll::Ready(res) => {
                        t.fut = None;
                        core.borrow_mut().progress += 1;
                        match res {
                            Ok(()) | Err(RuntimeError::Starved) => {}
                            Err(e) => return Err(abort(e, &core)),
                        }
                    }
                }
                if let Some(e) = core.borrow().violation.clone() {
                    return Err(abort(e, &core));
                }
            }
            let blocked_verifiers: Vec<PartyId> = tasks
                .iter()
                .filter(|t| t.fut.is_some() && t.party.role == Role::Verifier)
                .map(|t| t.party)
                .collect();
            if blocked_verifiers.is_empty() {
                break;
            }
            if core.borrow().progress != before {
                continue;
            }
            let fresh: Vec<PartyId> = blocked_verifiers.iter().copied().filter(|p| !starved_once.contains(p)).collect();
            if !self.starvation || fresh.is_empty() {
                return Err(abort(RuntimeError::Deadlock { blocked: blocked_verifiers }, &core));
            }
            for p in fresh {
                starved_once.insert(p);
                starved.push(p);
                core.borrow_mut().starving.insert(p);
            }
        }

        let abandoned = tasks.iter().filter(|t| t.fut.is_some()).map(|t| t.party).collect();
        drop(tasks);
        let messages = std::mem::take(&mut core.borrow_mut().messages);
        let mut tapes = Tapes::default();
        for m in messages.iter().filter(|m| m.to.role == Role::Verdict) {
            tapes.push(m.from.index, TapeEntry::decode(&m.payload));
        }
        let verdict = Some(rule.decide(&tapes));
        Ok(Transcript { messages, tapes, verdict, starved, abandoned })
    }
}

/// Runs without verifier timeouts.
pub fn run_protocol(
    topology: &Topology,
    programs: Vec<Program>,
    seeds: Seeds,
    rule: &dyn V0Rule,
) -> Result<Transcript, RunAbort> {
    Runner::new(topology, seeds).run(programs, rule)
}
