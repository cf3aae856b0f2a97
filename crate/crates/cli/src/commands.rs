use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use geomvertex::extraction::{roundtrip, ExtractionConfig, PathSummary};
use geomvertex::geometric::{generic_points, ordered_points, GeometricStructure, Residual};
use geomvertex::grading::{BasisKey, GradedVector, WindowedCompletion};
use geomvertex::models::build_model;
use geomvertex::scalar::Scalar;
use geomvertex::va_core::{CheckReport, LocalityOutcome, VertexAlgebra};
use geomvertex::Error;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::report::{cx, ReportDocument, Status};

/// Tolerance for permutation and equivariance residuals.
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Tolerance for the associativity residual and its certified tail.
pub const ASSOCIATIVITY_TOL: f64 = 1e-6;
const LAMBDAS: [(f64, f64); 3] = [(2.0, 0.0), (0.0, 1.0), (1.0, 1.0)];

#[derive(Debug)]
pub enum CmdError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Lib(e)
    }
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Usage(_) => 2,
            CmdError::Lib(e) => match e {
                Error::Config(_) | Error::Index(_) => 2,
                Error::Undetermined(_) => 3,
                Error::Diagonal { .. }
                | Error::Domain(_)
                | Error::Pole { .. }
                | Error::Region(_) => 4,
                _ => 1,
            },
        }
    }
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Usage(s) => write!(f, "usage: {s}"),
            CmdError::Lib(Error::Diagonal { i, j }) => {
                write!(
                    f,
                    "diagonal: insertions {} and {} sit at the same point",
                    i + 1,
                    j + 1
                )
            }
            CmdError::Lib(e) => write!(f, "{e}"),
        }
    }
}

type CmdResult = std::result::Result<ReportDocument, CmdError>;

pub fn run(command: &Command, cfg: &RunConfig) -> CmdResult {
    match command {
        Command::Axioms => cmd_axioms(cfg),
        Command::Eval { insertions } => cmd_eval(cfg, insertions),
        Command::Ope {
            insertions,
            pair,
            order,
        } => cmd_ope(cfg, insertions, pair, *order),
        Command::Roundtrip => cmd_roundtrip(cfg),
        Command::Converge { k_values, orders } => cmd_converge(cfg, k_values, orders),
        Command::Locality { pair } => cmd_locality(cfg, pair.as_deref()),
    }
}

pub fn build(cfg: &RunConfig) -> std::result::Result<Arc<VertexAlgebra>, CmdError> {
    let w = cfg.degree_window().map_err(CmdError::Usage)?;
    Ok(Arc::new(build_model(&cfg.model, w, cfg.kmax)?))
}

/// Basis states of the smallest positive degree.
pub fn generators(va: &VertexAlgebra) -> Vec<BasisKey> {
    let Some(d) = va.basis().keys().map(|k| k.degree).filter(|&d| d > 0).min() else {
        return Vec::new();
    };
    va.basis().keys_in_degree(d).collect()
}

/// Lowest-degree basis state of positive degree, or the vacuum.
pub fn generator(va: &VertexAlgebra) -> BasisKey {
    va.basis()
        .keys()
        .filter(|k| k.degree > 0)
        .min_by_key(|k| k.degree)
        .unwrap_or_else(|| *va.vacuum().terms().next().expect("nonzero vacuum").0)
}

fn describe(va: &VertexAlgebra, v: &GradedVector) -> Value {
    Value::Array(
        v.terms()
            .map(|(&k, c)| json!([va.label(k), cx(c.to_complex())]))
            .collect(),
    )
}

fn describe_value(va: &VertexAlgebra, x: &WindowedCompletion) -> Value {
    let mut out = serde_json::Map::new();
    for l in x.window().degrees() {
        let comp: Vec<Value> = va
            .basis()
            .keys_in_degree(l)
            .zip(x.component(l).expect("degree in window"))
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(k, c)| json!([va.label(k), cx(*c)]))
            .collect();
        out.insert(l.to_string(), Value::Array(comp));
    }
    Value::Object(out)
}

#[derive(Default)]
struct Tally {
    checked: usize,
    skipped: usize,
    residual: f64,
    exact: bool,
}

impl Tally {
    fn new() -> Self {
        Self {
            exact: true,
            ..Default::default()
        }
    }

    fn add(&mut self, r: &CheckReport) {
        self.checked += r.checked;
        self.skipped += r.skipped;
        self.residual = self.residual.max(r.max_residual);
        self.exact &= r.passed();
    }

    fn record(self, doc: &mut ReportDocument, name: &str, t: Instant) {
        let cert =
            json!({ "checked": self.checked, "skipped": self.skipped, "exact_zero": self.exact });
        doc.check(
            name,
            Status::from_bool(self.exact && self.checked > 0),
            Some(self.residual),
            cert,
            t,
        );
    }
}

/// Basis tuples of arity `m` from `keys` with total degree at most `max_total`.
fn tuples(keys: &[BasisKey], m: usize, max_total: i32) -> Vec<Vec<BasisKey>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        let mut next = Vec::new();
        for t in &out {
            for &k in keys {
                let mut u: Vec<BasisKey> = t.clone();
                u.push(k);
                if u.iter().map(|k| k.degree).sum::<i32>() <= max_total {
                    next.push(u);
                }
            }
        }
        out = next;
    }
    out
}

fn basis_states(keys: &[BasisKey]) -> Vec<GradedVector> {
    keys.iter().map(|&k| GradedVector::basis(k)).collect()
}

fn locality_summary(
    va: &VertexAlgebra,
    pairs: &[(BasisKey, BasisKey)],
    n_cap: i32,
) -> (
    Status,
    Value,
    BTreeMap<(BasisKey, BasisKey), LocalityOutcome>,
) {
    let mut found = BTreeMap::new();
    for &(a, b) in pairs {
        found.insert((a, b), va.check_locality(a, b, n_cap));
    }
    let (mut orders, mut beyond, mut undetermined, mut max_order) = (0, 0, 0, 0);
    let mut symmetric = true;
    for (&(a, b), o) in &found {
        match o {
            LocalityOutcome::Order { n, .. } => {
                orders += 1;
                max_order = max_order.max(*n);
                if let Some(LocalityOutcome::Order { n: m, .. }) = found.get(&(b, a)) {
                    symmetric &= m == n;
                }
            }
            LocalityOutcome::BeyondCap { .. } => beyond += 1,
            LocalityOutcome::Undetermined { .. } => undetermined += 1,
        }
    }
    let status = if !symmetric {
        Status::Fail
    } else if undetermined > 0 {
        Status::Undetermined
    } else {
        Status::Pass
    };
    let cert = json!({
        "determined": orders,
        "beyond_cap": beyond,
        "undetermined": undetermined,
        "max_order": max_order,
        "symmetric": symmetric,
    });
    (status, cert, found)
}

fn outcome_value(o: &LocalityOutcome) -> Value {
    match o {
        LocalityOutcome::Order { n, .. } => json!(n),
        LocalityOutcome::Undetermined { cap } => json!(format!("undetermined (searched to {cap})")),
        LocalityOutcome::BeyondCap { bound } => json!(format!("beyond cap (bound {bound})")),
    }
}

pub fn cmd_axioms(cfg: &RunConfig) -> CmdResult {
    let mut doc = ReportDocument::new("axioms", cfg);
    let va = build(cfg)?;
    let keys: Vec<BasisKey> = va.basis().keys().collect();

    let t = Instant::now();
    let mut tally = Tally::new();
    for &k in &keys {
        tally.add(&va.check_translation(&GradedVector::basis(k)));
    }
    tally.record(&mut doc, "va.translation", t);

    let t = Instant::now();
    let mut tally = Tally::new();
    for &k in &keys {
        tally.add(&va.check_creation(&GradedVector::basis(k)));
    }
    tally.record(&mut doc, "va.creation", t);

    let t = Instant::now();
    let mut tally = Tally::new();
    tally.add(&va.check_vacuum());
    tally.record(&mut doc, "va.vacuum", t);

    // generator pairs and vacuum pairs, searched to K; Dong's lemma extends
    // locality of generators to the algebra they generate
    let t = Instant::now();
    let gens = generators(&va);
    let vac = *va.vacuum().terms().next().expect("nonzero vacuum").0;
    let mut pairs: Vec<(BasisKey, BasisKey)> = gens
        .iter()
        .flat_map(|&a| gens.iter().map(move |&b| (a, b)))
        .collect();
    for &k in &keys {
        pairs.push((vac, k));
        pairs.push((k, vac));
    }
    pairs.sort();
    pairs.dedup();
    let (mut status, mut cert, found) = locality_summary(&va, &pairs, cfg.kmax);
    let vacuum_clean = found
        .iter()
        .filter(|((a, b), _)| *a == vac || *b == vac)
        .all(|(_, o)| matches!(o, LocalityOutcome::Order { n: 0, .. }));
    if !vacuum_clean {
        status = status.max(Status::Fail);
    }
    cert["vacuum_pairs_order_zero"] = json!(vacuum_clean);
    let gen = gens.first().copied().unwrap_or(vac);
    let label = format!("{},{}", va.label(gen), va.label(gen));
    let gen_outcome = found
        .get(&(gen, gen))
        .cloned()
        .unwrap_or_else(|| va.check_locality(gen, gen, cfg.kmax));
    cert["generator"] = json!({ "pair": label, "order": outcome_value(&gen_outcome) });
    doc.check("va.locality", status, None, cert, t);

    // every pair, searched as far as the table reaches
    let t = Instant::now();
    let all: Vec<(BasisKey, BasisKey)> = keys
        .iter()
        .flat_map(|&a| keys.iter().map(move |&b| (a, b)))
        .collect();
    let (status, cert, _) = locality_summary(&va, &all, cfg.kmax + 1);
    let status = if status == Status::Undetermined {
        Status::Fail
    } else {
        status
    };
    doc.check("va.locality_table", status, None, cert, t);

    let t = Instant::now();
    match va.derive_t_and_vacuum() {
        Ok(_) => doc.check(
            "va.derived_t_and_vacuum",
            Status::Pass,
            Some(0.0),
            Value::Null,
            t,
        ),
        Err(e) => doc.check(
            "va.derived_t_and_vacuum",
            Status::Fail,
            None,
            json!(e.to_string()),
            t,
        ),
    }

    let g = GeometricStructure::new(va.clone(), cfg.m_max);
    geometric_checks(&mut doc, &g, cfg, &keys, generator(&va))?;
    Ok(doc)
}

fn geometric_checks(
    doc: &mut ReportDocument,
    g: &GeometricStructure,
    cfg: &RunConfig,
    keys: &[BasisKey],
    gen: BasisKey,
) -> std::result::Result<(), CmdError> {
    let va = g.algebra().clone();
    let low: Vec<BasisKey> = keys.iter().copied().filter(|k| k.degree <= 2).collect();
    let arities: Vec<usize> = (1..=cfg.m_max.min(3)).collect();

    // permutation and equivariance on low-degree tuples at generic points
    let t = Instant::now();
    let (mut perm, mut n_perm) = (0.0f64, 0);
    for &m in arities.iter().filter(|&&m| m >= 2) {
        let pts = generic_points(m, 4, cfg.seed);
        let sigmas: Vec<Vec<usize>> = if m == 2 {
            vec![vec![1, 0]]
        } else {
            vec![vec![1, 2, 0], vec![1, 0, 2]]
        };
        for (idx, tup) in tuples(&low, m, 3).iter().enumerate() {
            let a = basis_states(tup);
            for s in &sigmas {
                perm = perm.max(g.check_permutation(&a, &pts[idx % pts.len()], s)?.residual);
                n_perm += 1;
            }
        }
    }
    let cert = json!({ "comparisons": n_perm, "tol": SYMMETRY_TOL });
    doc.check(
        "geo.permutation",
        Status::from_bool(perm <= SYMMETRY_TOL),
        Some(perm),
        cert,
        t,
    );

    let t = Instant::now();
    let (mut equi, mut n_equi) = (0.0f64, 0);
    for &m in &arities {
        let pts = generic_points(m, 4, cfg.seed.wrapping_add(1));
        for (idx, tup) in tuples(&low, m, 3).iter().enumerate() {
            let a = basis_states(tup);
            for &(re, im) in &LAMBDAS {
                equi = equi.max(
                    g.check_equivariance(&a, &pts[idx % pts.len()], Complex64::new(re, im))?
                        .residual,
                );
                n_equi += 1;
            }
        }
    }
    let cert = json!({ "comparisons": n_equi, "lambdas": LAMBDAS.iter().map(|&(r, i)| json!([r, i])).collect::<Vec<_>>(), "tol": SYMMETRY_TOL });
    doc.check(
        "geo.equivariance",
        Status::from_bool(equi <= SYMMETRY_TOL),
        Some(equi),
        cert,
        t,
    );

    let t = Instant::now();
    let mut ok = true;
    for &k in keys {
        ok &= g.check_insertion_at_zero(&GradedVector::basis(k))?;
    }
    doc.check(
        "geo.insertion_at_zero",
        Status::from_bool(ok),
        None,
        json!({ "states": keys.len(), "exact": ok }),
        t,
    );

    let t = Instant::now();
    let mut worst_n = 0;
    let mut status = Status::Pass;
    let mut failure = Value::Null;
    'outer: for &a in keys {
        for &b in keys {
            match g.check_meromorphicity(&GradedVector::basis(a), &GradedVector::basis(b)) {
                Ok(n) => worst_n = worst_n.max(n),
                Err(e) => {
                    status = Status::Fail;
                    failure = json!(format!("({}, {}): {e}", va.label(a), va.label(b)));
                    break 'outer;
                }
            }
        }
    }
    let cert =
        json!({ "pairs": keys.len() * keys.len(), "max_order": worst_n, "failure": failure });
    doc.check("geo.meromorphicity", status, None, cert, t);

    let t = Instant::now();
    let gv: GradedVector = GradedVector::basis(gen);
    let (mut two, mut n_two, mut tail) = (0.0f64, 0, 0.0f64);
    for &m in &arities {
        for z in ordered_points(m, 8, cfg.seed) {
            let a = vec![gv.clone(); m];
            let o = g.mu_ordered(&a, &z)?;
            let c = g.mu_continued(&a, &z)?;
            two = two.max(Residual::compare("two-path", &o.value, &c)?.residual);
            tail = tail.max(o.max_relative_tail());
            n_two += 1;
        }
    }
    let cert = json!({ "points": n_two, "max_relative_tail": tail, "tol": cfg.tol });
    doc.check(
        "geo.two_path",
        Status::from_bool(two <= cfg.tol),
        Some(two),
        cert,
        t,
    );

    if cfg.m_max >= 2 {
        let t = Instant::now();
        let z = [Complex64::new(4.0, 0.0), Complex64::new(0.0, 0.0)];
        let w = [Complex64::new(1.0, 0.0)];
        let r = g.check_associativity(
            std::slice::from_ref(&gv),
            std::slice::from_ref(&gv),
            &z,
            &w,
            None,
        )?;
        let ok = r.residual.residual <= ASSOCIATIVITY_TOL && r.tail <= ASSOCIATIVITY_TOL;
        let cert = json!({ "retained": r.retained, "tail": r.tail, "z": [cx(z[0]), cx(z[1])], "w": [cx(w[0])], "tol": ASSOCIATIVITY_TOL });
        doc.check(
            "geo.associativity",
            Status::from_bool(ok),
            Some(r.residual.residual),
            cert,
            t,
        );
    }
    Ok(())
}

/// `label@re[,im]`, split on the last `@`.
pub fn parse_insertion(
    va: &VertexAlgebra,
    text: &str,
) -> std::result::Result<(GradedVector, Complex64), CmdError> {
    let (label, point) = text
        .rsplit_once('@')
        .ok_or_else(|| CmdError::Usage(format!("insertion `{text}` is not label@point")))?;
    let parts: Vec<&str> = point.split(',').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CmdError::Usage(format!("bad coordinate `{s}` in `{text}`")))
    };
    let z = match parts.as_slice() {
        [re] => Complex64::new(num(re)?, 0.0),
        [re, im] => Complex64::new(num(re)?, num(im)?),
        _ => return Err(CmdError::Usage(format!("point `{point}` is not re[,im]"))),
    };
    let state = va
        .parse_state(label)
        .map_err(|e| CmdError::Usage(e.to_string()))?;
    Ok((state, z))
}

fn parse_insertions(
    va: &VertexAlgebra,
    items: &[String],
) -> std::result::Result<(Vec<GradedVector>, Vec<Complex64>), CmdError> {
    let mut a = Vec::new();
    let mut z = Vec::new();
    for s in items {
        let (v, p) = parse_insertion(va, s)?;
        a.push(v);
        z.push(p);
    }
    Ok((a, z))
}

fn radially_ordered(z: &[Complex64]) -> bool {
    z.windows(2).all(|p| p[0].norm() > p[1].norm())
}

pub fn cmd_eval(cfg: &RunConfig, insertions: &[String]) -> CmdResult {
    let mut doc = ReportDocument::new("eval", cfg);
    let va = build(cfg)?;
    let (a, z) = parse_insertions(&va, insertions)?;
    let g = GeometricStructure::new(va.clone(), cfg.m_max.max(a.len()));
    let t = Instant::now();
    doc.result("points", Value::Array(z.iter().map(|&p| cx(p)).collect()));
    if a.is_empty() {
        let mut value = WindowedCompletion::zero(va.basis());
        value.accumulate(&va.vacuum().to_complex())?;
        doc.result("path", json!("vacuum"));
        doc.result("value", describe_value(&va, &value));
        doc.check("evaluation", Status::Pass, Some(0.0), Value::Null, t);
    } else if radially_ordered(&z) {
        let o = g.mu_ordered(&a, &z)?;
        let tail = o.max_relative_tail();
        doc.result("path", json!("ordered"));
        doc.result("value", describe_value(&va, &o.value));
        let certs: Vec<Value> = o
            .certificates
            .iter()
            .map(|c| json!({ "degree": c.degree, "ratio": c.ratio, "tail": c.tail, "retained": c.retained }))
            .collect();
        let status = if tail <= cfg.tol {
            Status::Pass
        } else {
            Status::Undetermined
        };
        doc.check("evaluation", status, Some(tail), Value::Array(certs), t);
    } else {
        let value = g.mu_continued(&a, &z)?;
        doc.result("path", json!("continued"));
        doc.result("value", describe_value(&va, &value));
        doc.check(
            "evaluation",
            Status::Pass,
            Some(0.0),
            json!("exact rational continuation"),
            t,
        );
    }
    Ok(doc)
}

pub fn cmd_ope(cfg: &RunConfig, insertions: &[String], pair: &[usize], order: usize) -> CmdResult {
    let mut doc = ReportDocument::new("ope", cfg);
    let va = build(cfg)?;
    let (a, z) = parse_insertions(&va, insertions)?;
    let [i, j] = pair else {
        return Err(CmdError::Usage("--pair takes two indices i,j".into()));
    };
    let (i, j) = (*i, *j);
    if i >= j || j >= a.len() {
        return Err(CmdError::Usage(format!(
            "need i < j < {} for --pair",
            a.len()
        )));
    }
    let g = GeometricStructure::new(va.clone(), cfg.m_max.max(a.len()));
    let t = Instant::now();
    let terms = g.ope_expand(&a, i, j, order)?;
    let listed: Vec<Value> = terms
        .iter()
        .map(|term| json!({ "k": term.k, "product": describe(&va, &term.states[j - 1]) }))
        .collect();
    doc.result("terms", Value::Array(listed));
    let partial = g.ope_partial_sum(&terms, &z)?;
    let full = g.mu_continued(&a, &z)?;
    let r = Residual::compare("ope", &partial, &full)?;
    doc.result("partial_sum", describe_value(&va, &partial));
    let cert = json!({ "order": order, "per_degree": r.per_degree });
    doc.check("ope.partial_sum", Status::Pass, Some(r.residual), cert, t);
    Ok(doc)
}

fn path_entry(doc: &mut ReportDocument, name: &str, p: &PathSummary, t: Instant) {
    let cert = json!({ "checked": p.checked, "mismatches": p.mismatches });
    doc.check(
        name,
        Status::from_bool(p.mismatches == 0),
        Some(p.max_residual),
        cert,
        t,
    );
}

pub fn cmd_roundtrip(cfg: &RunConfig) -> CmdResult {
    let mut doc = ReportDocument::new("roundtrip", cfg);
    let va = build(cfg)?;
    let mut ecfg = ExtractionConfig::for_cap(cfg.kmax);
    ecfg.tol = cfg.tol;
    let t = Instant::now();
    let r = roundtrip(va, &ecfg, cfg.seed)?;
    path_entry(&mut doc, "roundtrip.exact", &r.exact, t);
    path_entry(&mut doc, "roundtrip.quadrature", &r.quadrature, t);
    path_entry(&mut doc, "roundtrip.translation", &r.translation, t);
    path_entry(&mut doc, "roundtrip.reconstruction", &r.reconstruction, t);
    let vac_ok = r.vacuum_residual <= r.tol;
    doc.check(
        "roundtrip.vacuum",
        Status::from_bool(vac_ok),
        Some(r.vacuum_residual),
        Value::Null,
        t,
    );
    doc.check(
        "roundtrip",
        Status::from_bool(r.pass),
        None,
        json!({ "nodes": ecfg.nodes, "radius": ecfg.radius }),
        t,
    );
    Ok(doc)
}

/// Residuals at or below this are roundoff.
const CONVERGED: f64 = 64.0 * f64::EPSILON;

/// Strictly decreasing; identically zero; decreasing until it reaches roundoff and staying there.
pub fn column_flags(values: &[f64]) -> (bool, bool, bool) {
    let decreasing = values.windows(2).all(|p| p[1] < p[0]);
    let zero = values.iter().all(|&v| v == 0.0);
    let monotone = values
        .windows(2)
        .all(|p| p[1] < p[0] || (p[0] <= CONVERGED && p[1] <= CONVERGED));
    (decreasing, zero, monotone)
}

pub fn cmd_converge(cfg: &RunConfig, k_values: &[i32], orders: &[usize]) -> CmdResult {
    if k_values.is_empty() || orders.is_empty() {
        return Err(CmdError::Usage("converge needs a nonempty sweep".into()));
    }
    let mut doc = ReportDocument::new("converge", cfg);
    let va = build(cfg)?;
    let g = GeometricStructure::new(va.clone(), cfg.m_max.max(3));
    let gv: GradedVector = GradedVector::basis(generator(&va));

    let t = Instant::now();
    let z = [Complex64::new(4.0, 0.0), Complex64::new(0.0, 0.0)];
    let w = [Complex64::new(1.0, 0.0)];
    let mut rows = Vec::new();
    let mut column = Vec::new();
    for &k in k_values {
        let r = g.check_associativity(
            std::slice::from_ref(&gv),
            std::slice::from_ref(&gv),
            &z,
            &w,
            Some(k),
        )?;
        rows.push(json!({ "k": k, "residual": r.residual.residual, "tail": r.tail }));
        column.push(r.residual.residual);
    }
    let (dec, zero, mono) = column_flags(&column);
    doc.result("associativity", Value::Array(rows));
    let cert = json!({ "strictly_decreasing": dec, "identically_zero": zero, "monotone": mono });
    doc.check(
        "converge.associativity",
        Status::from_bool(mono),
        column.last().copied(),
        cert,
        t,
    );

    let t = Instant::now();
    let z = ope_point();
    let a = vec![gv.clone(); 3];
    let full = g.mu_continued(&a, &z)?;
    let mut rows = Vec::new();
    let mut column = Vec::new();
    for &n in orders {
        let terms = g.ope_expand(&a, 0, 1, n)?;
        let r = Residual::compare("ope", &g.ope_partial_sum(&terms, &z)?, &full)?;
        rows.push(json!({ "order": n, "residual": r.residual }));
        column.push(r.residual);
    }
    let (dec, zero, mono) = column_flags(&column);
    doc.result("ope", Value::Array(rows));
    doc.result(
        "ope_point",
        Value::Array(z.iter().map(|&p| cx(p)).collect()),
    );
    let cert = json!({ "strictly_decreasing": dec, "identically_zero": zero, "monotone": mono });
    doc.check(
        "converge.ope",
        Status::from_bool(mono),
        column.last().copied(),
        cert,
        t,
    );
    Ok(doc)
}

/// A point with `|z_1 − z_2| < |z_3 − z_2|`.
pub fn ope_point() -> [Complex64; 3] {
    [
        Complex64::new(1.6, 0.2),
        Complex64::new(1.0, 0.0),
        Complex64::new(-0.5, 0.4),
    ]
}

pub fn cmd_locality(cfg: &RunConfig, pair: Option<&str>) -> CmdResult {
    let mut doc = ReportDocument::new("locality", cfg);
    let va = build(cfg)?;
    let pairs: Vec<(BasisKey, BasisKey)> = match pair {
        Some(p) => {
            let (a, b) = p
                .split_once(',')
                .ok_or_else(|| CmdError::Usage(format!("--pair `{p}` is not a,b")))?;
            let ka = va
                .key(a.trim())
                .map_err(|e| CmdError::Usage(e.to_string()))?;
            let kb = va
                .key(b.trim())
                .map_err(|e| CmdError::Usage(e.to_string()))?;
            vec![(ka, kb)]
        }
        None => {
            let keys: Vec<BasisKey> = va.basis().keys().collect();
            keys.iter()
                .flat_map(|&a| keys.iter().map(move |&b| (a, b)))
                .collect()
        }
    };
    let t = Instant::now();
    let (status, cert, found) = locality_summary(&va, &pairs, cfg.kmax);
    let table: Vec<Value> = found
        .iter()
        .map(|(&(a, b), o)| json!([va.label(a), va.label(b), outcome_value(o)]))
        .collect();
    doc.result("pairs", Value::Array(table));
    doc.check("locality", status, None, cert, t);
    Ok(doc)
}
