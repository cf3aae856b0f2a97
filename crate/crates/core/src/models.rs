//! Shipped example algebras: trivial, commutative on one generator, free boson.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grading::{BasisKey, DegreeWindow, GradedVector};
use crate::scalar::{binomial, GaussQ};
use crate::va_core::{ModeSource, VertexAlgebra};

pub type Partition = Vec<u32>;

/// Sparse integer combination of partitions.
pub type IntVec = BTreeMap<Partition, i128>;

fn add_into(acc: &mut IntVec, coeff: i128, v: &IntVec) {
    if coeff == 0 {
        return;
    }
    for (p, c) in v {
        let e = acc.entry(p.clone()).or_insert(0);
        *e += coeff * c;
        if *e == 0 {
            acc.remove(p);
        }
    }
}

fn single(p: Partition) -> IntVec {
    let mut v = IntVec::new();
    v.insert(p, 1);
    v
}

/// Partitions into parts `≥ min_part`, listed per size in reverse-lexicographic order.
pub fn partitions(n: u32, min_part: u32) -> Vec<Partition> {
    fn go(n: u32, max_part: u32, min_part: u32, prefix: &mut Partition, out: &mut Vec<Partition>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        let top = n.min(max_part);
        for first in (min_part.max(1)..=top).rev() {
            prefix.push(first);
            go(n - first, first, min_part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, min_part, &mut Vec::new(), &mut out);
    out
}

struct Level {
    parts: Vec<Partition>,
    index: HashMap<Partition, usize>,
}

/// Lazily enumerated partition bases indexed by [`BasisKey`].
struct Catalog {
    min_part: u32,
    levels: Mutex<HashMap<i32, Arc<Level>>>,
}

impl Catalog {
    fn new(min_part: u32) -> Self {
        Self {
            min_part,
            levels: Mutex::new(HashMap::new()),
        }
    }

    fn level(&self, degree: i32) -> Arc<Level> {
        if let Some(l) = self.levels.lock().expect("catalog poisoned").get(&degree) {
            return l.clone();
        }
        let parts = if degree < 0 {
            Vec::new()
        } else {
            partitions(degree as u32, self.min_part)
        };
        let index = parts
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        let level = Arc::new(Level { parts, index });
        self.levels
            .lock()
            .expect("catalog poisoned")
            .insert(degree, level.clone());
        level
    }

    fn partition(&self, key: BasisKey) -> Partition {
        self.level(key.degree).parts[key.index].clone()
    }

    fn key(&self, p: &[u32]) -> BasisKey {
        let degree = p.iter().sum::<u32>() as i32;
        let index = self.level(degree).index[p];
        BasisKey::new(degree, index)
    }

    fn vector(&self, v: &IntVec) -> GradedVector {
        GradedVector::from_terms(v.iter().map(|(p, &c)| (self.key(p), GaussQ::int(c as i64))))
    }
}

fn size(p: &[u32]) -> i32 {
    p.iter().sum::<u32>() as i32
}

fn insert_part(p: &[u32], part: u32) -> Partition {
    let mut q = p.to_vec();
    let pos = q.iter().position(|&x| x < part).unwrap_or(q.len());
    q.insert(pos, part);
    q
}

fn parse_int_list(inner: &str) -> Option<Vec<i64>> {
    inner.split(',').map(|s| s.trim().parse().ok()).collect()
}

/// `V = V_0 = span|0⟩`.
pub struct TrivialModel;

impl ModeSource for TrivialModel {
    fn name(&self) -> &str {
        "trivial"
    }
    fn min_degree(&self) -> i32 {
        0
    }
    fn dim(&self, degree: i32) -> usize {
        usize::from(degree == 0)
    }
    fn label(&self, _key: BasisKey) -> String {
        "vac".into()
    }
    fn parse_label(&self, label: &str) -> Option<BasisKey> {
        (label == "vac").then_some(BasisKey::new(0, 0))
    }
    fn vacuum(&self) -> GradedVector {
        GradedVector::basis(BasisKey::new(0, 0))
    }
    fn translate(&self, _c: BasisKey) -> GradedVector {
        GradedVector::zero()
    }
    fn mode(&self, _a: BasisKey, k: i32, c: BasisKey) -> GradedVector {
        if k == -1 {
            GradedVector::basis(c)
        } else {
            GradedVector::zero()
        }
    }
}

/// Polynomials in `u_j = T^j u / j!` with `|u| = d`; `Y(a,z)b = (e^{zT}a)·b`.
///
/// A basis monomial is a partition with parts `≥ d`, part `p` standing for `u_{p−d}`.
pub struct CommutativeModel {
    d: u32,
    catalog: Catalog,
}

impl CommutativeModel {
    pub fn new(d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::Config(
                "commutative generator degree must be at least 1".into(),
            ));
        }
        Ok(Self {
            d,
            catalog: Catalog::new(d),
        })
    }

    pub fn generator_degree(&self) -> u32 {
        self.d
    }

    /// `T^n/n!` of a monomial, by the Leibniz rule.
    fn divided_power(&self, p: &[u32], n: u32) -> IntVec {
        let mut acc: IntVec = single(Vec::new());
        let mut base = 0;
        for &part in p {
            let j = part - self.d;
            let mut next = IntVec::new();
            for (mono, &c) in &acc {
                let used = (size(mono) - base) as u32;
                for s in 0..=(n - used) {
                    let coeff = binomial((j + s) as i64, s as i64);
                    let shifted = insert_part(mono, part + s);
                    *next.entry(shifted).or_insert(0) += c * coeff;
                }
            }
            acc = next;
            base += part as i32;
        }
        let target = size(p) + n as i32;
        acc.retain(|m, c| size(m) == target && *c != 0);
        acc
    }
}

impl ModeSource for CommutativeModel {
    fn name(&self) -> &str {
        "commutative"
    }
    fn min_degree(&self) -> i32 {
        0
    }
    fn dim(&self, degree: i32) -> usize {
        self.catalog.level(degree).parts.len()
    }
    fn label(&self, key: BasisKey) -> String {
        let p = self.catalog.partition(key);
        match p.as_slice() {
            [] => "vac".into(),
            [x] if *x == self.d => "u".into(),
            _ => {
                let js: Vec<String> = p.iter().map(|x| (x - self.d).to_string()).collect();
                format!("u({})", js.join(","))
            }
        }
    }
    fn parse_label(&self, label: &str) -> Option<BasisKey> {
        let p: Partition = match label {
            "vac" => Vec::new(),
            "u" => vec![self.d],
            _ => {
                let inner = label.strip_prefix("u(")?.strip_suffix(')')?;
                let mut parts: Vec<u32> = parse_int_list(inner)?
                    .into_iter()
                    .map(|j| u32::try_from(j).ok().map(|j| j + self.d))
                    .collect::<Option<_>>()?;
                parts.sort_unstable_by(|a, b| b.cmp(a));
                parts
            }
        };
        Some(self.catalog.key(&p))
    }
    fn vacuum(&self) -> GradedVector {
        GradedVector::basis(BasisKey::new(0, 0))
    }
    fn translate(&self, c: BasisKey) -> GradedVector {
        let p = self.catalog.partition(c);
        self.catalog.vector(&self.divided_power(&p, 1))
    }
    fn mode(&self, a: BasisKey, k: i32, c: BasisKey) -> GradedVector {
        if k >= 0 {
            return GradedVector::zero();
        }
        let pa = self.catalog.partition(a);
        let pc = self.catalog.partition(c);
        let ta = self.divided_power(&pa, (-k - 1) as u32);
        let mut out = IntVec::new();
        for (m, coeff) in ta {
            let mut prod = m.clone();
            prod.extend_from_slice(&pc);
            prod.sort_unstable_by(|a, b| b.cmp(a));
            *out.entry(prod).or_insert(0) += coeff;
        }
        out.retain(|_, c| *c != 0);
        self.catalog.vector(&out)
    }
}

type MemoKey = (Partition, i32, Partition);

/// Heisenberg Fock space at level 1, basis `b_{−n₁}…b_{−n_r}|0⟩` indexed by partitions.
pub struct FreeBosonModel {
    catalog: Catalog,
    memo: Mutex<HashMap<MemoKey, Arc<IntVec>>>,
}

impl Default for FreeBosonModel {
    fn default() -> Self {
        Self::new()
    }
}

/// `b_{−n}` applied to a Fock state.
pub fn create(n: u32, v: &IntVec) -> IntVec {
    v.iter().map(|(p, &c)| (insert_part(p, n), c)).collect()
}

/// `b_n` (`n ≥ 1`) applied to a Fock state.
pub fn annihilate(n: u32, v: &IntVec) -> IntVec {
    let mut out = IntVec::new();
    for (p, &c) in v {
        let mult = p.iter().filter(|&&x| x == n).count() as i128;
        if mult == 0 {
            continue;
        }
        let mut q = p.clone();
        let pos = q.iter().position(|&x| x == n).expect("part present");
        q.remove(pos);
        *out.entry(q).or_insert(0) += c * n as i128 * mult;
    }
    out
}

/// Heisenberg mode `b_m` on a Fock state; `b_0` acts by zero.
pub fn heisenberg(m: i32, v: &IntVec) -> IntVec {
    match m.cmp(&0) {
        std::cmp::Ordering::Less => create((-m) as u32, v),
        std::cmp::Ordering::Equal => IntVec::new(),
        std::cmp::Ordering::Greater => annihilate(m as u32, v),
    }
}

impl FreeBosonModel {
    pub fn new() -> Self {
        Self {
            catalog: Catalog::new(1),
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn partition(&self, key: BasisKey) -> Partition {
        self.catalog.partition(key)
    }

    pub fn key(&self, p: &[u32]) -> BasisKey {
        self.catalog.key(p)
    }

    /// `a_(q) c` by recursion on the leading creation operator of `a`,
    /// using the iterate formula for `(b_{−n} v)_(q)`.
    fn mode_partition(&self, a: &[u32], q: i32, c: &[u32]) -> Arc<IntVec> {
        if size(a) + size(c) - q - 1 < 0 {
            return Arc::new(IntVec::new());
        }
        if a.is_empty() {
            return Arc::new(if q == -1 {
                single(c.to_vec())
            } else {
                IntVec::new()
            });
        }
        let key = (a.to_vec(), q, c.to_vec());
        if let Some(v) = self.memo.lock().expect("memo poisoned").get(&key) {
            return v.clone();
        }
        let n = a[0];
        let v = &a[1..];
        let mut out = IntVec::new();
        let top = size(v) + size(c) - q - 1;
        for j in 0..=top.max(-1) {
            let inner = self.mode_partition(v, q + j, c);
            if inner.is_empty() {
                continue;
            }
            let coeff = binomial((n as i64) + j as i64 - 1, j as i64);
            add_into(&mut out, coeff, &create(n + j as u32, &inner));
        }
        let sign: i128 = if n.is_multiple_of(2) { 1 } else { -1 };
        let cvec = single(c.to_vec());
        for j in 1..=size(c) {
            let bc = annihilate(j as u32, &cvec);
            for (p, &bcoef) in &bc {
                let inner = self.mode_partition(v, -(n as i32) + q - j, p);
                let coeff = binomial((n as i64) + j as i64 - 1, j as i64);
                add_into(&mut out, -sign * coeff * bcoef, &inner);
            }
        }
        let out = Arc::new(out);
        self.memo
            .lock()
            .expect("memo poisoned")
            .insert(key, out.clone());
        out
    }

    /// The `k`-th mode of the state `λ` applied to `μ`, computed from the
    /// normally ordered product of divided derivatives of `b(z)`.
    ///
    /// Independent of the recursion behind [`ModeSource::mode`].
    pub fn fock_mode_oracle(
        &self,
        lambda: &[u32],
        k: i32,
        mu: &[u32],
        window: DegreeWindow,
    ) -> Result<GradedVector> {
        for p in [lambda, mu] {
            window.check(size(p))?;
        }
        let out_degree = size(lambda) + size(mu) - k - 1;
        if out_degree > window.hi {
            return Err(Error::WindowViolation {
                degree: out_degree,
                lo: window.lo,
                hi: window.hi,
            });
        }
        if out_degree < 0 {
            return Ok(GradedVector::zero());
        }
        // ∂^{(n−1)} b(z) = Σ_m C(−m−1, n−1) b_m z^{−m−n}; collect z^{−k−1}.
        let target: i32 = k + 1 - lambda.iter().map(|&n| n as i32).sum::<i32>();
        let bound = size(mu);
        let lo = -(out_degree + bound);
        let mut result = IntVec::new();
        let mut ms = vec![0i32; lambda.len()];
        fn walk(
            i: usize,
            remaining: i32,
            lo: i32,
            hi: i32,
            lambda: &[u32],
            ms: &mut Vec<i32>,
            mu: &[u32],
            result: &mut IntVec,
        ) {
            let left = (lambda.len() - i) as i32;
            if left == 0 {
                if remaining != 0 {
                    return;
                }
                let mut coeff: i128 = 1;
                for (m, &n) in ms.iter().zip(lambda) {
                    coeff *= binomial(-(*m as i64) - 1, n as i64 - 1);
                }
                if coeff == 0 {
                    return;
                }
                let mut state = single(mu.to_vec());
                for &m in ms.iter().filter(|&&m| m > 0) {
                    state = heisenberg(m, &state);
                }
                for &m in ms.iter().filter(|&&m| m < 0) {
                    state = heisenberg(m, &state);
                }
                add_into(result, coeff, &state);
                return;
            }
            for m in lo..=hi {
                if m == 0 {
                    continue;
                }
                let rest = remaining - m;
                if rest < (left - 1) * lo || rest > (left - 1) * hi {
                    continue;
                }
                ms[i] = m;
                walk(i + 1, rest, lo, hi, lambda, ms, mu, result);
            }
        }
        if lambda.is_empty() {
            if k == -1 {
                result = single(mu.to_vec());
            }
        } else {
            walk(
                0,
                target,
                lo,
                bound.max(1),
                lambda,
                &mut ms,
                mu,
                &mut result,
            );
        }
        Ok(self.catalog.vector(&result))
    }
}

impl ModeSource for FreeBosonModel {
    fn name(&self) -> &str {
        "free_boson"
    }
    fn min_degree(&self) -> i32 {
        0
    }
    fn dim(&self, degree: i32) -> usize {
        self.catalog.level(degree).parts.len()
    }
    fn label(&self, key: BasisKey) -> String {
        let p = self.catalog.partition(key);
        match p.as_slice() {
            [] => "vac".into(),
            [1] => "b".into(),
            _ => {
                let ns: Vec<String> = p.iter().map(|n| format!("-{n}")).collect();
                format!("b({})", ns.join(","))
            }
        }
    }
    fn parse_label(&self, label: &str) -> Option<BasisKey> {
        let p: Partition = match label {
            "vac" => Vec::new(),
            "b" => vec![1],
            _ => {
                let inner = label.strip_prefix("b(")?.strip_suffix(')')?;
                let mut parts: Vec<u32> = parse_int_list(inner)?
                    .into_iter()
                    .map(|m| if m < 0 { u32::try_from(-m).ok() } else { None })
                    .collect::<Option<_>>()?;
                parts.sort_unstable_by(|a, b| b.cmp(a));
                parts
            }
        };
        Some(self.catalog.key(&p))
    }
    fn vacuum(&self) -> GradedVector {
        GradedVector::basis(BasisKey::new(0, 0))
    }
    fn translate(&self, c: BasisKey) -> GradedVector {
        let p = self.catalog.partition(c);
        let mut out = IntVec::new();
        for (i, &n) in p.iter().enumerate() {
            let mut q = p.clone();
            q.remove(i);
            let q = insert_part(&q, n + 1);
            add_into(&mut out, n as i128, &single(q));
        }
        self.catalog.vector(&out)
    }
    fn mode(&self, a: BasisKey, k: i32, c: BasisKey) -> GradedVector {
        let pa = self.catalog.partition(a);
        let pc = self.catalog.partition(c);
        let v = self.mode_partition(&pa, k, &pc);
        self.catalog.vector(&v)
    }
}

/// Model selector accepted by [`build_model`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Trivial,
    Commutative { d: u32 },
    FreeBoson,
}

impl FromStr for ModelName {
    type Err = Error;
    /// `trivial`, `free_boson`, `commutative` or `commutative:<d>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trivial" => Ok(Self::Trivial),
            "free_boson" => Ok(Self::FreeBoson),
            "commutative" => Ok(Self::Commutative { d: 1 }),
            _ => match s.strip_prefix("commutative:").map(str::parse::<u32>) {
                Some(Ok(d)) if d > 0 => Ok(Self::Commutative { d }),
                _ => Err(Error::Config(format!(
                    "unknown model '{s}' (expected trivial, commutative[:d], free_boson)"
                ))),
            },
        }
    }
}

pub fn model_source(name: &ModelName) -> Result<Arc<dyn ModeSource>> {
    Ok(match name {
        ModelName::Trivial => Arc::new(TrivialModel),
        ModelName::Commutative { d } => Arc::new(CommutativeModel::new(*d)?),
        ModelName::FreeBoson => Arc::new(FreeBosonModel::new()),
    })
}

/// Construct a windowed vertex algebra for a shipped model.
pub fn build_model(name: &str, window: DegreeWindow, cap: i32) -> Result<VertexAlgebra> {
    let model: ModelName = name.parse()?;
    VertexAlgebra::from_source(model_source(&model)?, window, cap)
}
