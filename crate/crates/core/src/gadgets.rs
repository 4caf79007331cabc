//! Orthogonal-vectors and hitting-set instances, brute-force solvers, the
//! trace generators that encode them, and a random trace generator.
//!
//! Vector and coordinate indices in generated names are 1-based (`tx2_3`
//! is the thread for coordinate 3 of the second vector); indices in the
//! API are 0-based.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::trace::{LockId, Op, OpKind, ThreadId, Trace, TraceBuilder, VarId};

pub type BitVec = Vec<bool>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("an instance needs at least two parts, got {0}")]
    TooFewParts(usize),
    #[error("part {0} is empty")]
    EmptyPart(usize),
    #[error("vector {index} of part {part} has dimension {found}, expected {expected}")]
    Dimension {
        part: usize,
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("expected a {expected}-part instance, got {found} parts")]
    Arity { expected: usize, found: usize },
}

/// `k` non-empty sets of bit-vectors of a common dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OvInstance {
    dim: usize,
    parts: Vec<Vec<BitVec>>,
}

fn check_dims(parts: &[Vec<BitVec>]) -> Result<usize, InstanceError> {
    if let Some(p) = parts.iter().position(|p| p.is_empty()) {
        return Err(InstanceError::EmptyPart(p));
    }
    let dim = parts[0][0].len();
    for (p, part) in parts.iter().enumerate() {
        for (i, v) in part.iter().enumerate() {
            if v.len() != dim {
                return Err(InstanceError::Dimension {
                    part: p,
                    index: i,
                    found: v.len(),
                    expected: dim,
                });
            }
        }
    }
    Ok(dim)
}

impl OvInstance {
    pub fn new(parts: Vec<Vec<BitVec>>) -> Result<Self, InstanceError> {
        if parts.len() < 2 {
            return Err(InstanceError::TooFewParts(parts.len()));
        }
        let dim = check_dims(&parts)?;
        Ok(OvInstance { dim, parts })
    }

    /// Parses vectors written as `0`/`1` strings. Panics on other
    /// characters; meant for tests and examples.
    pub fn from_strs(parts: &[&[&str]]) -> Result<Self, InstanceError> {
        Self::new(
            parts
                .iter()
                .map(|p| p.iter().map(|s| bits(s)).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn part(&self, i: usize) -> &[BitVec] {
        &self.parts[i]
    }

    pub fn parts(&self) -> &[Vec<BitVec>] {
        &self.parts
    }

    fn expect_arity(&self, k: usize) -> Result<(), InstanceError> {
        if self.k() == k {
            Ok(())
        } else {
            Err(InstanceError::Arity {
                expected: k,
                found: self.k(),
            })
        }
    }

    /// Whether the chosen vectors (one index per part) have no coordinate
    /// where all of them are 1.
    pub fn is_orthogonal(&self, choice: &[usize]) -> bool {
        (0..self.dim).all(|j| !choice.iter().enumerate().all(|(p, &i)| self.parts[p][i][j]))
    }
}

/// Hitting set: does some `x ∈ X` have a common 1 with every `y ∈ Y`?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HsInstance {
    dim: usize,
    xs: Vec<BitVec>,
    ys: Vec<BitVec>,
}

impl HsInstance {
    pub fn new(xs: Vec<BitVec>, ys: Vec<BitVec>) -> Result<Self, InstanceError> {
        let parts = vec![xs, ys];
        let dim = check_dims(&parts)?;
        let [xs, ys]: [Vec<BitVec>; 2] = parts.try_into().expect("two parts");
        Ok(HsInstance { dim, xs, ys })
    }

    pub fn from_strs(xs: &[&str], ys: &[&str]) -> Result<Self, InstanceError> {
        Self::new(
            xs.iter().map(|s| bits(s)).collect(),
            ys.iter().map(|s| bits(s)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn xs(&self) -> &[BitVec] {
        &self.xs
    }

    pub fn ys(&self) -> &[BitVec] {
        &self.ys
    }

    pub fn hits_all(&self, x: usize) -> bool {
        let x = &self.xs[x];
        self.ys
            .iter()
            .all(|y| x.iter().zip(y).any(|(a, b)| *a && *b))
    }
}

fn bits(s: &str) -> BitVec {
    s.chars()
        .map(|c| match c {
            '0' => false,
            '1' => true,
            _ => panic!("not a bit: {c:?}"),
        })
        .collect()
}

/// Lexicographically first orthogonal choice of one vector per part.
pub fn solve_ov(inst: &OvInstance) -> Option<Vec<usize>> {
    fn go(inst: &OvInstance, p: usize, acc: &mut Vec<bool>, choice: &mut Vec<usize>) -> bool {
        if p == inst.k() {
            return acc.iter().all(|b| !b);
        }
        for (i, v) in inst.part(p).iter().enumerate() {
            let saved = acc.clone();
            for (a, b) in acc.iter_mut().zip(v) {
                *a &= *b;
            }
            choice.push(i);
            if go(inst, p + 1, acc, choice) {
                return true;
            }
            choice.pop();
            *acc = saved;
        }
        false
    }
    let mut acc = vec![true; inst.dim()];
    let mut choice = Vec::new();
    go(inst, 0, &mut acc, &mut choice).then_some(choice)
}

pub fn solve_ov2_bruteforce(inst: &OvInstance) -> Result<Option<(usize, usize)>, InstanceError> {
    inst.expect_arity(2)?;
    Ok(solve_ov(inst).map(|c| (c[0], c[1])))
}

pub fn solve_ov3_bruteforce(
    inst: &OvInstance,
) -> Result<Option<(usize, usize, usize)>, InstanceError> {
    inst.expect_arity(3)?;
    Ok(solve_ov(inst).map(|c| (c[0], c[1], c[2])))
}

/// First `x` hitting every `y`.
pub fn solve_hs_bruteforce(inst: &HsInstance) -> Option<usize> {
    (0..inst.xs.len()).find(|&x| inst.hits_all(x))
}

fn random_vectors(rng: &mut ChaCha8Rng, n: usize, d: usize, density: f64) -> Vec<BitVec> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.gen_bool(density)).collect())
        .collect()
}

/// `k` parts of `n` vectors; each entry is 1 with probability `density`.
pub fn random_ov_instance(k: usize, n: usize, d: usize, density: f64, seed: u64) -> OvInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parts = (0..k)
        .map(|_| random_vectors(&mut rng, n, d, density))
        .collect();
    OvInstance::new(parts).expect("well-shaped")
}

pub fn random_hs_instance(n: usize, d: usize, density: f64, seed: u64) -> HsInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = random_vectors(&mut rng, n, d, density);
    let ys = random_vectors(&mut rng, n, d, density);
    HsInstance::new(xs, ys).expect("well-shaped")
}

fn nested_write(b: &mut TraceBuilder, t: &str, locks: &[String], writes: &[String]) {
    for l in locks {
        b.acq(t, l);
    }
    for x in writes {
        b.write(t, x);
    }
    for l in locks.iter().rev() {
        b.rel(t, l);
    }
}

/// HB gadget. Thread `tx{a}_0` writes `z` and then passes lock `lx{a}`
/// along `tx{a}_1 .. tx{a}_d`; `tx{a}_i` also joins the chain of lock
/// `l{i}` if `x_a[i] = 1`, and the last such vector hands `l{i}` on to
/// every `ty{b}` through lock `ly{b}_{i}`. `ty{b}` takes `ly{b}_{i}` for
/// each `y_b[i] = 1` and then reads `z`. So `w(z)` of `x_a` happens before
/// `r(z)` of `y_b` iff `x_a · y_b ≠ 0`.
pub fn gen_ov_to_hb(inst: &OvInstance) -> Result<Trace, InstanceError> {
    inst.expect_arity(2)?;
    let (xs, ys) = (inst.part(0), inst.part(1));
    let d = inst.dim();
    let last: Vec<Option<usize>> = (0..d).map(|i| xs.iter().rposition(|x| x[i])).collect();
    let mut b = TraceBuilder::new();
    for (a, x) in xs.iter().enumerate() {
        let lx = format!("lx{}", a + 1);
        let t0 = format!("tx{}_0", a + 1);
        b.write(&t0, "z").cs(&t0, &lx);
        for i in 0..d {
            let t = format!("tx{}_{}", a + 1, i + 1);
            b.cs(&t, &lx);
            if x[i] {
                b.cs(&t, &format!("l{}", i + 1));
            }
            if last[i] == Some(a) {
                for yb in 0..ys.len() {
                    b.cs(&t, &format!("ly{}_{}", yb + 1, i + 1));
                }
            }
        }
    }
    for (yb, y) in ys.iter().enumerate() {
        let t = format!("ty{}", yb + 1);
        for i in (0..d).filter(|&i| y[i]) {
            b.cs(&t, &format!("ly{}_{}", yb + 1, i + 1));
        }
        b.read(&t, "z");
    }
    Ok(b.build().expect("gadget traces are well-formed"))
}

/// Lock-cover gadget: thread `t1` writes `x` once per vector of the first
/// part, inside nested sections on `l{k}` for its 1-coordinates; `t2` does
/// the same for the second part.
pub fn gen_ov_to_lockcover(inst: &OvInstance) -> Result<Trace, InstanceError> {
    inst.expect_arity(2)?;
    let mut b = TraceBuilder::new();
    let x = [String::from("x")];
    for (p, t) in [(0, "t1"), (1, "t2")] {
        for v in inst.part(p) {
            let locks: Vec<String> = (0..v.len())
                .filter(|&k| v[k])
                .map(|k| format!("l{}", k + 1))
                .collect();
            nested_write(&mut b, t, &locks, &x);
        }
    }
    Ok(b.build().expect("gadget traces are well-formed"))
}

/// Lock-set gadget. Thread `t{j}` writes `z{k}` for each `x_k[j] = 1`
/// inside nested sections on `l{i}` for each `y_i[j] = 0`; `t0` writes
/// every `z{k}` holding every lock. The locks common to all accesses of
/// `z{k}` are exactly the `l{i}` with `x_k · y_i = 0`.
pub fn gen_hs_to_lockset(inst: &HsInstance) -> Trace {
    let (xs, ys) = (inst.xs(), inst.ys());
    let mut b = TraceBuilder::new();
    for j in 0..inst.dim() {
        let writes: Vec<String> = (0..xs.len())
            .filter(|&k| xs[k][j])
            .map(|k| format!("z{}", k + 1))
            .collect();
        if writes.is_empty() {
            continue;
        }
        let locks: Vec<String> = (0..ys.len())
            .filter(|&i| !ys[i][j])
            .map(|i| format!("l{}", i + 1))
            .collect();
        nested_write(&mut b, &format!("t{}", j + 1), &locks, &writes);
    }
    let locks: Vec<String> = (0..ys.len()).map(|i| format!("l{}", i + 1)).collect();
    let writes: Vec<String> = (0..xs.len()).map(|k| format!("z{}", k + 1)).collect();
    nested_write(&mut b, "t0", &locks, &writes);
    b.build().expect("gadget traces are well-formed")
}

/// Per-thread event sequences, emitted into a builder in schedule order.
struct Threads {
    names: Vec<String>,
    seqs: Vec<Vec<(OpKind, String)>>,
    cursor: Vec<usize>,
    out: TraceBuilder,
}

impl Threads {
    fn new() -> Self {
        Threads {
            names: Vec::new(),
            seqs: Vec::new(),
            cursor: Vec::new(),
            out: TraceBuilder::new(),
        }
    }

    fn add(&mut self, name: String) -> usize {
        self.names.push(name);
        self.seqs.push(Vec::new());
        self.cursor.push(0);
        self.names.len() - 1
    }

    fn push(&mut self, t: usize, kind: OpKind, operand: &str) {
        self.seqs[t].push((kind, String::from(operand)));
    }

    fn cs(&mut self, t: usize, lock: &str) {
        self.push(t, OpKind::Acquire, lock);
        self.push(t, OpKind::Release, lock);
    }

    /// `sync(l)`: a critical section on `l` reading and writing its own
    /// variable, so each sync on `l` must see the previous one.
    fn sync(&mut self, t: usize, lock: &str) {
        let v = format!("v_{lock}");
        self.push(t, OpKind::Acquire, lock);
        self.push(t, OpKind::Read, &v);
        self.push(t, OpKind::Write, &v);
        self.push(t, OpKind::Release, lock);
    }

    fn len(&self, t: usize) -> usize {
        self.seqs[t].len()
    }

    fn run_until(&mut self, t: usize, end: usize) {
        for i in self.cursor[t]..end {
            let (kind, operand) = &self.seqs[t][i];
            self.out.push(&self.names[t], *kind, operand);
        }
        self.cursor[t] = self.cursor[t].max(end);
    }

    fn run_to_end(&mut self, t: usize) {
        self.run_until(t, self.len(t));
    }
}

/// Thread roles in the OV3 gadget, by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ov3Layout {
    pub dim: usize,
    /// `tk{k}`, one per coordinate.
    pub coordinate_threads: Vec<String>,
    pub aux_thread: String,
    /// `tx{a}`, one per vector of the first part.
    pub x_threads: Vec<String>,
    /// `ty{b}`, one per vector of the second part.
    pub y_threads: Vec<String>,
    /// Event id of `w(z)` in each x-thread.
    pub writes: Vec<usize>,
    /// Event id of `r(z)` in each y-thread.
    pub reads: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Ov3Gadget {
    pub trace: Trace,
    pub layout: Ov3Layout,
    pub instance: OvInstance,
}

/// Sync-preserving gadget for a 3-part instance `(X, Y, Z)`.
///
/// `sync(l)` is `acq(l) r(v_l) w(v_l) rel(l)`. Threads:
/// * `tk{k}`: per `z_i`, `sync(sl{k}) sync(sl{k})` if `z_i[k] = 0`, else
///   `acq(l{k}) sync(sl{k}) acq(lp{k}) rel(l{k}) sync(sl{k}) rel(lp{k})`;
/// * `taux`: `sync(sl1..sld) sync(sy1..syn)`, then `|Z| - 1` blocks
///   `acq(Y) sync(sl1..sld) sync(sl1..sld) rel(Y)`, then
///   `acq(Y) sync(sl1..sld) acq(X) rel(X) rel(Y)`;
/// * `tx{a}`: `cs(l{k})` per `x_a[k] = 1`, then `acq(X) w(z) rel(X)`;
/// * `ty{b}`: `sync(sy{b})`, `cs(lp{k})` per `y_b[k] = 1`, then
///   `acq(Y) r(z) rel(Y)`.
///
/// The syncs on each `sl{k}` alternate in pairs between `tk{k}` and `taux`,
/// so a reordering that stops `taux` after `i - 1` blocks stops `tk{k}`
/// inside the segment of `z_i`, still holding `l{k}` or `lp{k}` when
/// `z_i[k] = 1`.
pub fn gen_ov3_to_syncp(inst: &OvInstance) -> Result<Ov3Gadget, InstanceError> {
    inst.expect_arity(3)?;
    let (xs, ys, zs) = (inst.part(0), inst.part(1), inst.part(2));
    let d = inst.dim();
    let mut th = Threads::new();

    let tk: Vec<usize> = (0..d).map(|k| th.add(format!("tk{}", k + 1))).collect();
    let sl: Vec<String> = (0..d).map(|k| format!("sl{}", k + 1)).collect();
    // sync_at[k][m]: index in tk{k} of its m-th sync (0-based).
    let mut sync_at: Vec<Vec<usize>> = vec![Vec::new(); d];
    for k in 0..d {
        let (l, lp) = (format!("l{}", k + 1), format!("lp{}", k + 1));
        for z in zs {
            let t = tk[k];
            if z[k] {
                th.push(t, OpKind::Acquire, &l);
                sync_at[k].push(th.len(t));
                th.sync(t, &sl[k]);
                th.push(t, OpKind::Acquire, &lp);
                th.push(t, OpKind::Release, &l);
                sync_at[k].push(th.len(t));
                th.sync(t, &sl[k]);
                th.push(t, OpKind::Release, &lp);
            } else {
                sync_at[k].push(th.len(t));
                th.sync(t, &sl[k]);
                sync_at[k].push(th.len(t));
                th.sync(t, &sl[k]);
            }
        }
    }

    let aux = th.add(String::from("taux"));
    for l in &sl {
        th.sync(aux, l);
    }
    for b in 0..ys.len() {
        th.sync(aux, &format!("sy{}", b + 1));
    }
    let part1_end = th.len(aux);
    let mut block_mid = Vec::new();
    let mut block_end = Vec::new();
    for _ in 1..zs.len() {
        th.push(aux, OpKind::Acquire, "Y");
        for l in &sl {
            th.sync(aux, l);
        }
        block_mid.push(th.len(aux));
        for l in &sl {
            th.sync(aux, l);
        }
        th.push(aux, OpKind::Release, "Y");
        block_end.push(th.len(aux));
    }
    th.push(aux, OpKind::Acquire, "Y");
    for l in &sl {
        th.sync(aux, l);
    }
    let part3_mid = th.len(aux);
    th.push(aux, OpKind::Acquire, "X");
    th.push(aux, OpKind::Release, "X");
    th.push(aux, OpKind::Release, "Y");

    let tx: Vec<usize> = (0..xs.len())
        .map(|a| th.add(format!("tx{}", a + 1)))
        .collect();
    for (a, x) in xs.iter().enumerate() {
        for k in (0..d).filter(|&k| x[k]) {
            th.cs(tx[a], &format!("l{}", k + 1));
        }
        th.push(tx[a], OpKind::Acquire, "X");
        th.push(tx[a], OpKind::Write, "z");
        th.push(tx[a], OpKind::Release, "X");
    }
    let ty: Vec<usize> = (0..ys.len())
        .map(|b| th.add(format!("ty{}", b + 1)))
        .collect();
    for (b, y) in ys.iter().enumerate() {
        th.sync(ty[b], &format!("sy{}", b + 1));
        for k in (0..d).filter(|&k| y[k]) {
            th.cs(ty[b], &format!("lp{}", k + 1));
        }
        th.push(ty[b], OpKind::Acquire, "Y");
        th.push(ty[b], OpKind::Read, "z");
        th.push(ty[b], OpKind::Release, "Y");
    }

    // Schedule.
    for k in 0..d {
        th.run_until(tk[k], sync_at[k][1]);
    }
    th.run_until(aux, part1_end);
    for b in 1..zs.len() {
        th.run_until(aux, block_mid[b - 1]);
        for k in 0..d {
            th.run_until(tk[k], sync_at[k][2 * b + 1]);
        }
        th.run_until(aux, block_end[b - 1]);
    }
    th.run_until(aux, part3_mid);
    for &t in &tk {
        th.run_to_end(t);
    }
    for &t in tx.iter().chain(&ty) {
        th.run_until(t, th.len(t) - 3);
    }
    for &t in &tx {
        th.run_to_end(t);
    }
    th.run_to_end(aux);
    for &t in &ty {
        th.run_to_end(t);
    }

    let trace = th.out.build().expect("gadget traces are well-formed");
    let find = |name: &str, kind: OpKind| -> usize {
        let t = trace.thread_by_name(name).expect("thread present");
        trace
            .events()
            .iter()
            .find(|e| {
                e.thread == t
                    && e.op.kind() == kind
                    && e.op.var().is_some_and(|x| trace.var_name(x) == "z")
            })
            .expect("access present")
            .id
    };
    let names =
        |ids: &[usize]| -> Vec<String> { ids.iter().map(|&t| th.names[t].clone()).collect() };
    let x_threads = names(&tx);
    let y_threads = names(&ty);
    let layout = Ov3Layout {
        dim: d,
        writes: x_threads.iter().map(|t| find(t, OpKind::Write)).collect(),
        reads: y_threads.iter().map(|t| find(t, OpKind::Read)).collect(),
        coordinate_threads: names(&tk),
        aux_thread: th.names[aux].clone(),
        x_threads,
        y_threads,
    };
    Ok(Ov3Gadget {
        trace,
        layout,
        instance: inst.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum WitnessConstructionError {
    #[error("vector index out of range")]
    OutOfRange,
    #[error("the triple is not orthogonal")]
    NotOrthogonal,
}

/// For an orthogonal triple `(x_a, y_b, z_i)`, the reordering that stops
/// `taux` after `i - 1` blocks, each `tk{k}` right after its first sync of
/// segment `i` (or after the following `acq(lp{k}) rel(l{k})` when
/// `z_i[k] = x_a[k] = 1`), `tx{a}` before `w(z)`, `ty{b}` before `r(z)`,
/// and runs nothing else. Returns event ids in trace order.
pub fn construct_ov3_witness(
    gadget: &Ov3Gadget,
    (a, b, i): (usize, usize, usize),
) -> Result<Vec<usize>, WitnessConstructionError> {
    let inst = &gadget.instance;
    let (xs, ys, zs) = (inst.part(0), inst.part(1), inst.part(2));
    if a >= xs.len() || b >= ys.len() || i >= zs.len() {
        return Err(WitnessConstructionError::OutOfRange);
    }
    if !inst.is_orthogonal(&[a, b, i]) {
        return Err(WitnessConstructionError::NotOrthogonal);
    }
    let trace = &gadget.trace;
    let layout = &gadget.layout;
    let d = inst.dim();
    let mut thread_len = vec![0usize; trace.num_threads()];
    for e in trace.events() {
        thread_len[e.thread.index()] += 1;
    }
    let tid = |name: &str| trace.thread_by_name(name).expect("thread present").index();
    let mut cut = vec![0usize; trace.num_threads()];
    let tx = tid(&layout.x_threads[a]);
    let ty = tid(&layout.y_threads[b]);
    cut[tx] = thread_len[tx] - 2;
    cut[ty] = thread_len[ty] - 2;
    cut[tid(&layout.aux_thread)] = 4 * (d + ys.len()) + i * (2 + 8 * d);
    for k in 0..d {
        let earlier: usize = zs[..i].iter().map(|z| if z[k] { 12 } else { 8 }).sum();
        let here = match (zs[i][k], xs[a][k]) {
            (false, _) => 4,
            (true, false) => 5,
            (true, true) => 7,
        };
        cut[tid(&layout.coordinate_threads[k])] = earlier + here;
    }
    let mut seen = vec![0usize; trace.num_threads()];
    let mut out = Vec::new();
    for e in trace.events() {
        let t = e.thread.index();
        if seen[t] < cut[t] {
            out.push(e.id);
        }
        seen[t] += 1;
    }
    Ok(out)
}

/// Parameters of [`gen_random_trace`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomTraceParams {
    pub events: usize,
    pub threads: usize,
    pub locks: usize,
    pub vars: usize,
    /// Chance that a step tries to acquire a free lock; the same chance
    /// applies to releasing the innermost held lock.
    pub acquire_prob: f64,
    pub write_prob: f64,
    pub seed: u64,
}

impl Default for RandomTraceParams {
    fn default() -> Self {
        RandomTraceParams {
            events: 100,
            threads: 4,
            locks: 4,
            vars: 4,
            acquire_prob: 0.2,
            write_prob: 0.5,
            seed: 0,
        }
    }
}

/// Random well-formed trace: a thread only acquires free locks and only
/// releases its innermost one. Threads, locks and variables are named
/// `t{i}`, `l{i}`, `x{i}` and numbered in order of first use.
pub fn gen_random_trace(params: &RandomTraceParams) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let nt = params.threads.max(1);
    let nl = params.locks;
    let nv = params.vars.max(1);
    let mut held: Vec<Vec<usize>> = vec![Vec::new(); nt];
    let mut free = vec![true; nl];
    let mut raw: Vec<(usize, Op)> = Vec::with_capacity(params.events);
    while raw.len() < params.events {
        let t = rng.gen_range(0..nt);
        let u: f64 = rng.gen();
        if u < params.acquire_prob && nl > 0 {
            let start = rng.gen_range(0..nl);
            if let Some(l) = (0..nl).map(|i| (start + i) % nl).find(|&l| free[l]) {
                free[l] = false;
                held[t].push(l);
                raw.push((t, Op::Acquire(LockId::from(l))));
                continue;
            }
        } else if u < 2.0 * params.acquire_prob {
            if let Some(l) = held[t].pop() {
                free[l] = true;
                raw.push((t, Op::Release(LockId::from(l))));
                continue;
            }
        }
        let x = VarId::from(rng.gen_range(0..nv));
        let op = if rng.gen_bool(params.write_prob) {
            Op::Write(x)
        } else {
            Op::Read(x)
        };
        raw.push((t, op));
    }
    // Renumber by first use.
    let mut tmap = vec![u32::MAX; nt];
    let mut lmap = vec![u32::MAX; nl];
    let mut vmap = vec![u32::MAX; nv];
    let (mut threads, mut locks, mut vars) = (Vec::new(), Vec::new(), Vec::new());
    fn intern(map: &mut [u32], names: &mut Vec<String>, prefix: &str, i: usize) -> u32 {
        if map[i] == u32::MAX {
            map[i] = names.len() as u32;
            names.push(format!("{prefix}{i}"));
        }
        map[i]
    }
    let ops: Vec<(ThreadId, Op)> = raw
        .into_iter()
        .map(|(t, op)| {
            let t = ThreadId(intern(&mut tmap, &mut threads, "t", t));
            let op = match op {
                Op::Acquire(l) => {
                    Op::Acquire(LockId(intern(&mut lmap, &mut locks, "l", l.index())))
                }
                Op::Release(l) => {
                    Op::Release(LockId(intern(&mut lmap, &mut locks, "l", l.index())))
                }
                Op::Read(x) => Op::Read(VarId(intern(&mut vmap, &mut vars, "x", x.index()))),
                Op::Write(x) => Op::Write(VarId(intern(&mut vmap, &mut vars, "x", x.index()))),
            };
            (t, op)
        })
        .collect();
    Trace::new(threads, locks, vars, ops).expect("generator keeps lock discipline")
}
