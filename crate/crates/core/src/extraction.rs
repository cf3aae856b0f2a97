//! Recovering `(Y, T, |0⟩)` from a geometric structure, and the round trip.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometric::{anti_ordered_points, ordered_points, GeometricStructure, Residual};
use crate::grading::{BasisKey, ComplexVector, GradedVector};
use crate::laurent::{default_nodes, expand_inverse_g, laurent_coefficients, AnnulusRegion};
use crate::scalar::{GaussQ, Scalar};
use crate::va_core::{ModeSource, VertexAlgebra};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExtractionConfig {
    /// Contour radius.
    pub radius: f64,
    /// Quadrature nodes on the contour.
    pub nodes: usize,
    /// Step of the finite-difference diagnostic for `T`.
    pub fd_step: f64,
    pub tol: f64,
}

impl ExtractionConfig {
    /// Defaults for mode cap `k_max`: unit circle, `2K+5` nodes.
    pub fn for_cap(k_max: i32) -> Self {
        Self {
            radius: 1.0,
            nodes: default_nodes(k_max),
            fd_step: 1e-4,
            tol: 1e-9,
        }
    }

    pub fn validate(&self, k_max: i32) -> Result<()> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::Config(format!(
                "contour radius must be positive, got {}",
                self.radius
            )));
        }
        if self.nodes < default_nodes(k_max) {
            return Err(Error::Config(format!(
                "{} quadrature nodes is below 2K+5 = {}",
                self.nodes,
                default_nodes(k_max)
            )));
        }
        Ok(())
    }
}

fn out_degree(a: BasisKey, b: BasisKey, k: i32) -> i32 {
    a.degree + b.degree - k - 1
}

/// `a_(k) b` read off `L(1/g)·(g·f)` on `|x_1| > |x_2|` at `x_2 = 0`; exact.
pub fn extract_mode_exact(
    g: &GeometricStructure,
    a: &GradedVector,
    b: &GradedVector,
    k: i32,
) -> Result<GradedVector> {
    let mut out = GradedVector::zero();
    for (&ka, ca) in a.terms() {
        for (&kb, cb) in b.terms() {
            let v = extract_basis_mode(g, ka, kb, k)?;
            out.axpy(&(ca.clone() * cb.clone()), &v);
        }
    }
    Ok(out)
}

fn extract_basis_mode(
    g: &GeometricStructure,
    a: BasisKey,
    b: BasisKey,
    k: i32,
) -> Result<GradedVector> {
    let l = out_degree(a, b, k);
    if l < g.algebra().min_degree() {
        return Ok(GradedVector::zero());
    }
    let t = g.tuple(&[a, b])?;
    let p = g.component(&[a, b], l)?;
    if p.is_empty() {
        return Ok(GradedVector::zero());
    }
    let order = t.hyperplane(l).max(0);
    let inv = expand_inverse_g::<GaussQ>(t.pole_clearing(), &AnnulusRegion::standard(2), order)?;
    let series = p.mul_scalar_series(&inv)?.at_last_zero()?;
    Ok(series.coeff(&[-k - 1]))
}

/// `(1/2πi)∮ z^k μ(a,z,b,0) dz` by the trapezoid rule, for every `k` in `ks`.
pub fn extract_modes_quadrature(
    g: &GeometricStructure,
    a: &GradedVector,
    b: &GradedVector,
    ks: std::ops::RangeInclusive<i32>,
    cfg: &ExtractionConfig,
) -> Result<Vec<(i32, ComplexVector)>> {
    let basis = g.algebra().basis();
    let keys: Vec<BasisKey> = basis.keys().collect();
    let h = |z: Complex64| -> Result<Vec<Complex64>> {
        let v = g.mu_continued(&[a.clone(), b.clone()], &[z, Complex64::new(0.0, 0.0)])?;
        let flat = v.to_vector();
        Ok(keys.iter().map(|&k| flat.coeff(k)).collect())
    };
    let (k_lo, k_hi) = (*ks.start(), *ks.end());
    let coeffs = laurent_coefficients(h, cfg.radius, -k_hi - 1, -k_lo - 1, cfg.nodes)?;
    Ok(coeffs
        .into_iter()
        .map(|(e, vals)| {
            let v = ComplexVector::from_terms(keys.iter().copied().zip(vals));
            (-e - 1, v)
        })
        .collect())
}

pub fn extract_mode_quadrature(
    g: &GeometricStructure,
    a: &GradedVector,
    b: &GradedVector,
    k: i32,
    cfg: &ExtractionConfig,
) -> Result<ComplexVector> {
    let mut v = extract_modes_quadrature(g, a, b, k..=k, cfg)?;
    Ok(v.pop().map(|(_, x)| x).unwrap_or_default())
}

/// `Ta` as the `z^1` coefficient of `μ(a, z)`.
pub fn extract_t_key(g: &GeometricStructure, a: BasisKey) -> Result<GradedVector> {
    let p = g.component(&[a], a.degree + 1)?;
    Ok(p.coeff(&[1]))
}

/// `T` on every windowed basis element, cross-checked against `a_(−2)|0⟩`.
pub fn extract_t(g: &GeometricStructure) -> Result<BTreeMap<BasisKey, GradedVector>> {
    let vac = extract_vacuum(g)?;
    let mut out = BTreeMap::new();
    for a in g.algebra().basis().keys() {
        let t = extract_t_key(g, a)?;
        let alt = extract_mode_exact(g, &GradedVector::basis(a), &vac, -2)?;
        if t != alt {
            return Err(Error::Structural(format!(
                "derivative at zero and a_(-2)|0⟩ differ on {}",
                g.algebra().label(a)
            )));
        }
        out.insert(a, t);
    }
    Ok(out)
}

/// Central finite difference of `μ(a, z)` at `z = 0`; diagnostic only.
pub fn extract_t_finite_difference(
    g: &GeometricStructure,
    a: &GradedVector,
    h: f64,
) -> Result<ComplexVector> {
    let plus = g
        .mu_continued(std::slice::from_ref(a), &[Complex64::new(h, 0.0)])?
        .to_vector();
    let minus = g
        .mu_continued(std::slice::from_ref(a), &[Complex64::new(-h, 0.0)])?
        .to_vector();
    Ok(plus.sub(&minus).scale(&Complex64::new(0.5 / h, 0.0)))
}

/// `μ(∅)`.
pub fn extract_vacuum(g: &GeometricStructure) -> Result<GradedVector> {
    let v = g.component(&[], 0)?.coeff(&[]);
    if v.homogeneous_degree() != Some(0) {
        return Err(Error::AxiomViolation(
            "μ(∅) is not a nonzero vector of degree 0".into(),
        ));
    }
    Ok(v)
}

/// Vertex-algebra data read back from a geometric structure.
///
/// The graded basis is shared with the structure's source; modes, `T` and
/// the vacuum come from extraction only.
pub struct ExtractedSource {
    g: Arc<GeometricStructure>,
    vacuum: GradedVector,
}

impl ExtractedSource {
    pub fn new(g: Arc<GeometricStructure>) -> Result<Self> {
        let vacuum = extract_vacuum(&g)?;
        Ok(Self { g, vacuum })
    }
}

impl ModeSource for ExtractedSource {
    fn name(&self) -> &str {
        self.g.algebra().name()
    }
    fn min_degree(&self) -> i32 {
        self.g.algebra().min_degree()
    }
    fn dim(&self, degree: i32) -> usize {
        self.g.algebra().source().dim(degree)
    }
    fn label(&self, key: BasisKey) -> String {
        self.g.algebra().label(key)
    }
    fn parse_label(&self, label: &str) -> Option<BasisKey> {
        self.g.algebra().source().parse_label(label)
    }
    fn vacuum(&self) -> GradedVector {
        self.vacuum.clone()
    }
    /// # Panics
    /// If the structure fails its polynomiality witness.
    fn translate(&self, c: BasisKey) -> GradedVector {
        extract_t_key(&self.g, c).expect("extraction from a valid geometric structure")
    }
    /// # Panics
    /// If the structure fails its polynomiality witness.
    fn mode(&self, a: BasisKey, k: i32, c: BasisKey) -> GradedVector {
        extract_basis_mode(&self.g, a, c, k).expect("extraction from a valid geometric structure")
    }
}

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct PathSummary {
    pub checked: usize,
    pub mismatches: usize,
    pub max_residual: f64,
}

impl PathSummary {
    fn record(&mut self, residual: f64, bad: bool) {
        self.checked += 1;
        if bad {
            self.mismatches += 1;
        }
        self.max_residual = self.max_residual.max(residual);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundTripReport {
    pub model: String,
    pub exact: PathSummary,
    pub quadrature: PathSummary,
    pub translation: PathSummary,
    pub vacuum_residual: f64,
    /// `Ψ(Φ(G))` against `G` at sampled points.
    pub reconstruction: PathSummary,
    pub tol: f64,
    pub pass: bool,
}

/// Insertion tuples used to compare `Ψ(Φ(G))` with `G`: every basis tuple of
/// arity `m ≤ 3` with total degree at most 2.
fn sample_tuples(va: &VertexAlgebra) -> Vec<Vec<BasisKey>> {
    let low: Vec<BasisKey> = va.basis().keys().filter(|k| k.degree <= 2).collect();
    let mut out: Vec<Vec<BasisKey>> = vec![Vec::new()];
    let mut layer: Vec<Vec<BasisKey>> = vec![Vec::new()];
    for _ in 0..3 {
        let mut next = Vec::new();
        for t in &layer {
            for &k in &low {
                let mut u = t.clone();
                u.push(k);
                if u.iter().map(|k| k.degree).sum::<i32>() <= 2 {
                    next.push(u);
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Build `G = Ψ(V)`, extract `Φ(G)`, and compare everything with `V`; then
/// rebuild `Ψ(Φ(G))` and compare it with `G` at seeded points.
pub fn roundtrip(
    va: Arc<VertexAlgebra>,
    cfg: &ExtractionConfig,
    seed: u64,
) -> Result<RoundTripReport> {
    let cap = va.cap();
    cfg.validate(cap)?;
    let g = Arc::new(GeometricStructure::new(va.clone(), 3));
    let keys: Vec<BasisKey> = va.basis().keys().collect();
    let w = va.window();

    let mut exact = PathSummary::default();
    let mut quadrature = PathSummary::default();
    for &a in &keys {
        for &b in &keys {
            let (av, bv) = (GradedVector::basis(a), GradedVector::basis(b));
            let ks: Vec<i32> = (-cap..=cap)
                .filter(|&k| w.contains(out_degree(a, b, k)))
                .collect();
            if ks.is_empty() {
                continue;
            }
            for &k in &ks {
                let stored = va.mode_apply(&av, k, &bv)?;
                let got = extract_mode_exact(&g, &av, &bv, k)?;
                let diff = got.sub(&stored);
                exact.record(diff.norm(), !diff.is_zero());
            }
            let quad = extract_modes_quadrature(&g, &av, &bv, ks[0]..=ks[ks.len() - 1], cfg)?;
            for (k, v) in quad {
                let stored = va.mode_apply(&av, k, &bv)?.to_complex();
                let r = v.distance(&stored);
                quadrature.record(r, r > cfg.tol);
            }
        }
    }

    let mut translation = PathSummary::default();
    let derived = extract_t(&g)?;
    for (a, t) in &derived {
        let diff = t.sub(&va.translate_key(*a));
        translation.record(diff.norm(), !diff.is_zero());
    }
    let vac = extract_vacuum(&g)?;
    let vacuum_residual = vac.sub(va.vacuum()).norm();

    let phi = Arc::new(VertexAlgebra::from_source(
        Arc::new(ExtractedSource::new(g.clone())?),
        w,
        cap,
    )?);
    let g2 = GeometricStructure::new(phi, 3);
    let mut reconstruction = PathSummary::default();
    for tuple in sample_tuples(&va) {
        let m = tuple.len();
        if m == 0 {
            let d = g2
                .mu_continued::<GaussQ>(&[], &[])?
                .max_residual(&g.mu_continued::<GaussQ>(&[], &[])?)?;
            reconstruction.record(d, d > 1e-8);
            continue;
        }
        let states: Vec<GradedVector> = tuple.iter().map(|&k| GradedVector::basis(k)).collect();
        let tuple_seed = seed.wrapping_add(m as u64);
        for z in ordered_points(m, 4, tuple_seed) {
            let lhs = g2.mu_ordered(&states, &z)?.value;
            let rhs = g.mu_continued(&states, &z)?;
            let r = Residual::compare("reconstruction", &lhs, &rhs)?.residual;
            reconstruction.record(r, r > 1e-8);
        }
        for z in anti_ordered_points(m, 4, tuple_seed) {
            let lhs = g2.mu_continued(&states, &z)?;
            let rhs = g.mu_continued(&states, &z)?;
            let r = Residual::compare("reconstruction", &lhs, &rhs)?.residual;
            reconstruction.record(r, r > 1e-8);
        }
    }

    let pass = exact.mismatches == 0
        && quadrature.mismatches == 0
        && translation.mismatches == 0
        && vacuum_residual == 0.0
        && reconstruction.mismatches == 0;
    Ok(RoundTripReport {
        model: va.name().to_string(),
        exact,
        quadrature,
        translation,
        vacuum_residual,
        reconstruction,
        tol: cfg.tol,
        pass,
    })
}

/// Convert an exact vector for comparison against numeric extraction.
pub fn as_complex(v: &GradedVector) -> ComplexVector {
    GradedVector::from_terms(v.terms().map(|(&k, c)| (k, c.to_complex())))
}
