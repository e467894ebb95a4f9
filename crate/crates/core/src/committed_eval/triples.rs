use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CeError, CommitBackend, ProverBook, VerifierBook};
use crate::commitments::Lin;
use crate::fields::FieldSpec;
use crate::runtime::Endpoint;

/// `2·sigma·mults` candidate triples: half are opened, the rest form
/// `mults` buckets of `sigma` whose heads serve the multiplications.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleConfig {
    pub sigma: usize,
    pub mults: usize,
}

impl TripleConfig {
    pub fn total(&self) -> usize {
        2 * self.sigma * self.mults
    }

    pub fn commitments(&self) -> usize {
        3 * self.total()
    }
}

/// Which triples are opened and how the survivors are bucketed. The first
/// member of each bucket is its head.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditPlan {
    pub opened: Vec<usize>,
    pub buckets: Vec<Vec<usize>>,
}

impl AuditPlan {
    /// Splits a permutation of all triple indices: the first half is
    /// opened, the second half is cut into buckets in order.
    pub fn from_order(cfg: TripleConfig, order: &[usize]) -> Self {
        let half = cfg.sigma * cfg.mults;
        assert_eq!(order.len(), 2 * half, "order must cover every triple");
        let mut opened = order[..half].to_vec();
        opened.sort_unstable();
        let buckets = order[half..].chunks(cfg.sigma.max(1)).map(<[usize]>::to_vec).collect();
        Self { opened, buckets }
    }

    pub fn from_seed(cfg: TripleConfig, seed: u64) -> Self {
        let mut order: Vec<usize> = (0..cfg.total()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self::from_order(cfg, &order)
    }

    fn sacrifices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.buckets.iter().flat_map(|b| b[1..].iter().map(move |&t| (b[0], t)))
    }
}

/// Whether the audit rejects when triple `j` has `gamma = alpha·beta +
/// errors[j]`: an opened triple is caught outright, and a sacrifice
/// catches any bucket member whose error differs from its head's.
pub fn audit_catches(plan: &AuditPlan, errors: &[u64]) -> bool {
    let e = |j: usize| errors.get(j).copied().unwrap_or(0);
    plan.opened.iter().any(|&j| e(j) != 0) || plan.sacrifices().any(|(h, t)| e(h) != e(t))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleLins {
    pub alpha: Lin,
    pub beta: Lin,
    pub gamma: Lin,
}

/// Audited bucket heads, each consumed by exactly one multiplication.
#[derive(Clone, Debug, Default)]
pub struct TripleQueue {
    heads: Vec<TripleLins>,
    next: usize,
}

impl TripleQueue {
    pub fn new(heads: Vec<TripleLins>) -> Self {
        Self { heads, next: 0 }
    }

    pub fn take(&mut self) -> Result<TripleLins, CeError> {
        let t = self.heads.get(self.next).cloned().ok_or(CeError::Exhausted)?;
        self.next += 1;
        Ok(t)
    }

    pub fn remaining(&self) -> usize {
        self.heads.len() - self.next
    }
}

/// `gamma_h - gamma_t - rho·beta_t - tau·alpha_t - rho·tau`, zero when both
/// triples are good and `rho, tau` are the differences of their masks.
fn sacrifice_lin(f: &FieldSpec, h: &TripleLins, t: &TripleLins, rho: u64, tau: u64) -> Lin {
    h.gamma
        .sub(f, &t.gamma)
        .axpy(f, f.neg(rho), &t.beta)
        .axpy(f, f.neg(tau), &t.alpha)
        .add_const(f, f.neg(f.mul(rho, tau)))
}

/// Prover side of triple generation and audit. `errors[j]` is added to the
/// `gamma` of triple `j` (all zero for an honest prover).
pub async fn prover_triples<B: CommitBackend, R: Rng>(
    book: &mut ProverBook<B>,
    ep: &Endpoint,
    cfg: TripleConfig,
    rng: &mut R,
    errors: &[u64],
) -> Result<TripleQueue, CeError> {
    let f = book.field;
    let triples: Vec<TripleLins> = (0..cfg.total())
        .map(|j| {
            let (a, b) = (f.random(rng), f.random(rng));
            let g = f.add(f.mul(a, b), errors.get(j).copied().unwrap_or(0));
            TripleLins { alpha: book.commit(a), beta: book.commit(b), gamma: book.commit(g) }
        })
        .collect();
    book.flush(ep)?;
    let plan = AuditPlan::from_seed(cfg, book.recv_coins(ep).await?);
    let opened: Vec<Lin> =
        plan.opened.iter().flat_map(|&j| [&triples[j].alpha, &triples[j].beta, &triples[j].gamma]).cloned().collect();
    book.open(ep, &opened).await?;
    let pairs: Vec<(usize, usize)> = plan.sacrifices().collect();
    let diffs: Vec<Lin> = pairs
        .iter()
        .flat_map(|&(h, t)| [triples[h].alpha.sub(&f, &triples[t].alpha), triples[h].beta.sub(&f, &triples[t].beta)])
        .collect();
    book.open(ep, &diffs).await?;
    let zeros: Vec<Lin> = pairs
        .iter()
        .zip(diffs.chunks_exact(2))
        .map(|(&(h, t), d)| sacrifice_lin(&f, &triples[h], &triples[t], book.value(&d[0]), book.value(&d[1])))
        .collect();
    book.prove_zero(ep, &zeros).await?;
    Ok(TripleQueue::new(plan.buckets.iter().map(|b| triples[b[0]].clone()).collect()))
}

/// Verifier side of triple generation and audit, with its coin seed.
pub async fn verifier_triples(
    book: &mut VerifierBook,
    ep: &Endpoint,
    cfg: TripleConfig,
    seed: u64,
) -> Result<TripleQueue, CeError> {
    let f = book.field;
    let lins = book.recv_commits(ep, cfg.commitments()).await?;
    let triples: Vec<TripleLins> = lins
        .chunks_exact(3)
        .map(|c| TripleLins { alpha: c[0].clone(), beta: c[1].clone(), gamma: c[2].clone() })
        .collect();
    book.send_coins(ep, seed)?;
    let plan = AuditPlan::from_seed(cfg, seed);
    let opened: Vec<Lin> =
        plan.opened.iter().flat_map(|&j| [&triples[j].alpha, &triples[j].beta, &triples[j].gamma]).cloned().collect();
    let values = book.recv_openings(ep, &opened).await?;
    if values.chunks_exact(3).any(|v| f.mul(v[0], v[1]) != v[2]) {
        return Err(CeError::Reject("audited triple is not a product"));
    }
    let pairs: Vec<(usize, usize)> = plan.sacrifices().collect();
    let diffs: Vec<Lin> = pairs
        .iter()
        .flat_map(|&(h, t)| [triples[h].alpha.sub(&f, &triples[t].alpha), triples[h].beta.sub(&f, &triples[t].beta)])
        .collect();
    let shown = book.recv_openings(ep, &diffs).await?;
    let zeros: Vec<Lin> = pairs
        .iter()
        .zip(shown.chunks_exact(2))
        .map(|(&(h, t), d)| sacrifice_lin(&f, &triples[h], &triples[t], d[0], d[1]))
        .collect();
    book.check_zero(ep, &zeros).await?;
    Ok(TripleQueue::new(plan.buckets.iter().map(|b| triples[b[0]].clone()).collect()))
}

/// `x·y` from one triple: open `delta = x - alpha` and `epsilon = y - beta`,
/// then `gamma + delta·beta + epsilon·alpha + delta·epsilon`.
fn product(f: &FieldSpec, t: &TripleLins, delta: u64, epsilon: u64) -> Lin {
    t.gamma.axpy(f, delta, &t.beta).axpy(f, epsilon, &t.alpha).add_const(f, f.mul(delta, epsilon))
}

pub async fn prover_mul<B: CommitBackend>(
    book: &mut ProverBook<B>,
    ep: &Endpoint,
    queue: &mut TripleQueue,
    x: &Lin,
    y: &Lin,
) -> Result<Lin, CeError> {
    let f = book.field;
    let t = queue.take()?;
    let masked = [x.sub(&f, &t.alpha), y.sub(&f, &t.beta)];
    book.open(ep, &masked).await?;
    Ok(product(&f, &t, book.value(&masked[0]), book.value(&masked[1])))
}

pub async fn verifier_mul(
    book: &mut VerifierBook,
    ep: &Endpoint,
    queue: &mut TripleQueue,
    x: &Lin,
    y: &Lin,
) -> Result<Lin, CeError> {
    let f = book.field;
    let t = queue.take()?;
    let shown = book.recv_openings(ep, &[x.sub(&f, &t.alpha), y.sub(&f, &t.beta)]).await?;
    Ok(product(&f, &t, shown[0], shown[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        if n < k {
            return vec![];
        }
        let mut out = combinations(n - 1, k);
        for mut c in combinations(n - 1, k - 1) {
            c.push(n - 1);
            out.push(c);
        }
        out
    }

    /// Every way to choose the opened half, survivors bucketed in index order.
    fn all_plans(cfg: TripleConfig) -> Vec<AuditPlan> {
        let total = cfg.total();
        combinations(total, total / 2)
            .into_iter()
            .map(|opened| {
                let rest = (0..total).filter(|j| !opened.contains(j));
                let order: Vec<usize> = opened.iter().copied().chain(rest).collect();
                AuditPlan::from_order(cfg, &order)
            })
            .collect()
    }

    #[test]
    fn plan_shapes() {
        let cfg = TripleConfig { sigma: 1, mults: 1 };
        assert_eq!(cfg.total(), 2);
        let plan = AuditPlan::from_seed(TripleConfig { sigma: 8, mults: 3 }, 7);
        assert_eq!(plan.opened.len(), 24);
        assert_eq!(plan.buckets.len(), 3);
        assert!(plan.buckets.iter().all(|b| b.len() == 8));
        let mut all: Vec<usize> = plan.opened.iter().chain(plan.buckets.iter().flatten()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..48).collect::<Vec<_>>());
    }

    #[test]
    fn one_bad_triple_in_eight_exhaustive() {
        // sigma = 1: only the opened half can catch it, exactly half the coins
        let cfg = TripleConfig { sigma: 1, mults: 4 };
        let plans = all_plans(cfg);
        assert_eq!(plans.len(), 70);
        for bad in 0..8 {
            let mut errors = vec![0; 8];
            errors[bad] = 5;
            let caught = plans.iter().filter(|p| audit_catches(p, &errors)).count();
            assert_eq!(caught, 35);
        }
        // sigma = 2: a survivor shares a bucket with a good triple
        let cfg = TripleConfig { sigma: 2, mults: 2 };
        let mut errors = vec![0; 8];
        errors[3] = 1;
        assert!(all_plans(cfg).iter().all(|p| audit_catches(p, &errors)));
    }

    #[test]
    fn equal_errors_survive_only_as_a_whole_bucket() {
        let cfg = TripleConfig { sigma: 2, mults: 1 };
        let errors = vec![0, 0, 3, 3];
        let plans = all_plans(cfg);
        let survive = plans.iter().filter(|p| !audit_catches(p, &errors)).count();
        // only the split that leaves exactly {2, 3} unopened hides them
        assert_eq!((survive, plans.len()), (1, 6));
    }

    #[test]
    fn masks_hide_inputs() {
        let f = FieldSpec::prime(13).unwrap();
        for (x, y) in [(0, 0), (3, 4), (12, 7)] {
            let mut seen = [[0u32; 13]; 13];
            for a in 0..13 {
                for b in 0..13 {
                    seen[f.sub(x, a) as usize][f.sub(y, b) as usize] += 1;
                }
            }
            assert!(seen.iter().flatten().all(|&c| c == 1));
        }
    }
}
