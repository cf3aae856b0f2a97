//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use geomvertex::extraction::{extract_modes_quadrature, roundtrip, ExtractionConfig};
use geomvertex::geometric::{generic_points, ordered_points, GeometricStructure, Residual};
use geomvertex::grading::{BasisKey, DegreeWindow, GradedVector};
use geomvertex::models::{build_model, FreeBosonModel};
use geomvertex::va_core::{LocalityOutcome, VertexAlgebra};
use geomvertex::Error;
use num_complex::Complex64;

const K: i32 = 7;
const MODELS: [&str; 3] = ["trivial", "commutative", "free_boson"];

type Verdict = Result<String, String>;

fn window() -> DegreeWindow {
    DegreeWindow::new(0, 6).unwrap()
}

fn boson() -> &'static Arc<VertexAlgebra> {
    static VA: OnceLock<Arc<VertexAlgebra>> = OnceLock::new();
    VA.get_or_init(|| Arc::new(build_model("free_boson", window(), K).unwrap()))
}

fn boson_geometry() -> &'static GeometricStructure {
    static G: OnceLock<GeometricStructure> = OnceLock::new();
    G.get_or_init(|| GeometricStructure::new(boson().clone(), 3))
}

fn keys(va: &VertexAlgebra) -> Vec<BasisKey> {
    va.basis().keys().collect()
}

fn vacuum_key(va: &VertexAlgebra) -> BasisKey {
    *va.vacuum().terms().next().unwrap().0
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Generators (smallest positive degree) paired with each other, plus every pair with the vacuum.
fn axiom_pairs(va: &VertexAlgebra) -> Vec<(BasisKey, BasisKey)> {
    let all = keys(va);
    let vac = vacuum_key(va);
    let d = all.iter().map(|k| k.degree).filter(|&d| d > 0).min();
    let gens: Vec<BasisKey> = all
        .iter()
        .copied()
        .filter(|k| Some(k.degree) == d)
        .collect();
    let mut pairs: Vec<(BasisKey, BasisKey)> = gens
        .iter()
        .flat_map(|&a| gens.iter().map(move |&b| (a, b)))
        .collect();
    for &k in &all {
        pairs.push((vac, k));
        pairs.push((k, vac));
    }
    pairs.sort();
    pairs.dedup();
    pairs
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut checked = 0;
    for name in MODELS {
        let va = build_model(name, window(), K).map_err(|e| e.to_string())?;
        let ks = keys(&va);
        for &k in &ks {
            let a = GradedVector::basis(k);
            for r in [va.check_translation(&a), va.check_creation(&a)] {
                ensure(r.passed() && r.max_residual == 0.0, || {
                    format!("{name}: {} fails on {}", r.name, va.label(k))
                })?;
                checked += r.checked;
            }
        }
        let r = va.check_vacuum();
        ensure(r.passed(), || format!("{name}: vacuum axiom fails"))?;
        checked += r.checked;
        for (a, b) in axiom_pairs(&va) {
            let o = va.check_locality(a, b, K);
            ensure(matches!(o, LocalityOutcome::Order { .. }), || {
                format!(
                    "{name}: locality of ({}, {}) is {o:?}",
                    va.label(a),
                    va.label(b)
                )
            })?;
        }
        for &a in &ks {
            for &b in &ks {
                let (x, y) = (
                    va.check_locality(a, b, K + 1),
                    va.check_locality(b, a, K + 1),
                );
                ensure(!matches!(x, LocalityOutcome::Undetermined { .. }), || {
                    format!(
                        "{name}: ({}, {}) undetermined within the table bound",
                        va.label(a),
                        va.label(b)
                    )
                })?;
                if let (LocalityOutcome::Order { n, .. }, LocalityOutcome::Order { n: m, .. }) =
                    (&x, &y)
                {
                    ensure(n == m, || {
                        format!(
                            "{name}: asymmetric order for ({}, {})",
                            va.label(a),
                            va.label(b)
                        )
                    })?;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{checked} exact-zero comparisons in {:.2} s",
        elapsed.as_secs_f64()
    ))
}

/// `max{n : a_(n)b ≠ 0} + 1` from the Wick-style oracle.
fn oracle_order(fb: &FreeBosonModel, a: &[u32], b: &[u32]) -> i32 {
    let wide = DegreeWindow::new(0, 20).unwrap();
    let bound = a.iter().sum::<u32>() as i32 + b.iter().sum::<u32>() as i32;
    (0..=bound)
        .rev()
        .find(|&n| !fb.fock_mode_oracle(a, n, b, wide).unwrap().is_zero())
        .map_or(0, |n| n + 1)
}

fn criterion_2() -> Verdict {
    let va = boson();
    let fb = FreeBosonModel::new();
    let b = va.key("b").map_err(|e| e.to_string())?;
    let expected = oracle_order(&fb, &[1], &[1]);
    ensure(expected == 2, || {
        format!("oracle gives {expected} for (b,b)")
    })?;
    let got = va.check_locality(b, b, K);
    ensure(matches!(got, LocalityOutcome::Order { n: 2, .. }), || {
        format!("check_locality(b,b) = {got:?}")
    })?;

    let mut vac_pairs = 0;
    for name in MODELS {
        let va = build_model(name, window(), K).map_err(|e| e.to_string())?;
        let vac = vacuum_key(&va);
        for k in keys(&va) {
            for (x, y) in [(vac, k), (k, vac)] {
                let o = va.check_locality(x, y, K);
                ensure(matches!(o, LocalityOutcome::Order { n: 0, .. }), || {
                    format!("{name}: ({}, {}) has {o:?}", va.label(x), va.label(y))
                })?;
                vac_pairs += 1;
            }
        }
    }

    let va = build_model("commutative", window(), K).map_err(|e| e.to_string())?;
    let (mut searched, mut beyond) = (0, 0);
    for a in keys(&va) {
        for b in keys(&va) {
            match va.check_locality(a, b, K) {
                LocalityOutcome::Order { n: 0, .. } => searched += 1,
                LocalityOutcome::BeyondCap { .. } => {
                    let n =
                        va.vanishing_order_ext(&GradedVector::basis(a), &GradedVector::basis(b));
                    ensure(n == 0, || {
                        format!(
                            "commutative ({}, {}) vanishes at {n}",
                            va.label(a),
                            va.label(b)
                        )
                    })?;
                    beyond += 1;
                }
                o => {
                    return Err(format!(
                        "commutative ({}, {}) has {o:?}",
                        va.label(a),
                        va.label(b)
                    ))
                }
            }
        }
    }
    Ok(format!("(b,b) = 2; {vac_pairs} vacuum pairs = 0; commutative {searched} searched + {beyond} unbounded = 0"))
}

fn criterion_3() -> Verdict {
    let mut checked = 0;
    for name in MODELS {
        let va = build_model(name, window(), K).map_err(|e| e.to_string())?;
        let ks = keys(&va);
        for &a in &ks {
            for &b in &ks {
                for k in -K..=K {
                    let expected = a.degree + b.degree - k - 1;
                    match va.mode_apply(&GradedVector::basis(a), k, &GradedVector::basis(b)) {
                        Ok(v) => ensure(
                            v.is_zero() || v.homogeneous_degree() == Some(expected),
                            || {
                                format!(
                                    "{name}: {}_({k}){} has degrees {:?}",
                                    va.label(a),
                                    va.label(b),
                                    v.degrees()
                                )
                            },
                        )?,
                        Err(Error::WindowViolation { degree, .. }) => {
                            ensure(degree == expected, || {
                                format!("{name}: window violation reports degree {degree}, expected {expected}")
                            })?
                        }
                        Err(e) => return Err(format!("{name}: {e}")),
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} mode applications"))
}

fn witness_tuple(g: &GeometricStructure, t: &[BasisKey]) -> Result<(), String> {
    let data = g.tuple(t).map_err(|e| e.to_string())?;
    let deg_g: i32 = data.orders().iter().flatten().map(|&n| n as i32).sum();
    let weight: i32 = t.iter().map(|k| k.degree).sum();
    for l in g.algebra().window().degrees() {
        let p = g.component(t, l).map_err(|e| e.to_string())?;
        for (e, v) in p.terms() {
            if v.is_zero() {
                continue;
            }
            ensure(e.iter().all(|&x| x >= 0), || {
                format!("negative exponent {e:?} at degree {l}")
            })?;
            let total: i32 = e.iter().sum();
            ensure(total == deg_g + l - weight, || {
                format!("exponent {e:?} off the hyperplane at degree {l}")
            })?;
        }
    }
    Ok(())
}

fn criterion_4() -> Verdict {
    let g = boson_geometry();
    let ks = keys(g.algebra());
    let (mut pairs, mut triples) = (0, 0);
    for &a in &ks {
        for &b in &ks {
            witness_tuple(g, &[a, b])?;
            pairs += 1;
        }
    }
    for &a in &ks {
        for &b in &ks {
            for &d in &ks {
                if a.degree + b.degree + d.degree > 6 {
                    continue;
                }
                witness_tuple(g, &[a, b, d])?;
                triples += 1;
            }
        }
    }
    Ok(format!(
        "{pairs} pairs, {triples} triples with total degree ≤ 6"
    ))
}

fn criterion_5() -> Verdict {
    let g = boson_geometry();
    let va = g.algebra();
    let b = va.state("b").unwrap();
    let low: Vec<GradedVector> = keys(va)
        .into_iter()
        .filter(|k| k.degree <= 2)
        .map(GradedVector::basis)
        .collect();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for m in 1..=3 {
        for (idx, z) in ordered_points(m, 8, 42).into_iter().enumerate() {
            let mut a = vec![b.clone(); m];
            a[0] = low[idx % low.len()].clone();
            let o = g.mu_ordered(&a, &z).map_err(|e| e.to_string())?;
            let x = g.mu_continued(&a, &z).map_err(|e| e.to_string())?;
            worst = worst.max(
                Residual::compare("two-path", &o.value, &x)
                    .map_err(|e| e.to_string())?
                    .residual,
            );
            n += 1;
        }
    }
    ensure(worst <= 1e-9, || format!("max relative residual {worst:e}"))?;
    Ok(format!("{n} points, max relative residual {worst:.2e}"))
}

fn criterion_6() -> Verdict {
    let g = boson_geometry();
    let va = g.algebra();
    let ks = keys(va);
    let low: Vec<BasisKey> = ks.iter().copied().filter(|k| k.degree <= 2).collect();
    let (mut perm, mut equi): (f64, f64) = (0.0, 0.0);
    for m in 2..=3usize {
        for (idx, z) in generic_points(m, 8, 42).into_iter().enumerate() {
            let a: Vec<GradedVector> = (0..m)
                .map(|i| GradedVector::basis(low[(idx + 2 * i) % low.len()]))
                .collect();
            let sigmas: Vec<Vec<usize>> = if m == 2 {
                vec![vec![1, 0]]
            } else {
                vec![vec![1, 2, 0], vec![2, 1, 0]]
            };
            for s in &sigmas {
                perm = perm.max(
                    g.check_permutation(&a, &z, s)
                        .map_err(|e| e.to_string())?
                        .residual,
                );
            }
            for lambda in [c(2.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)] {
                equi = equi.max(
                    g.check_equivariance(&a, &z, lambda)
                        .map_err(|e| e.to_string())?
                        .residual,
                );
            }
        }
    }
    ensure(perm <= 1e-8, || format!("permutation residual {perm:e}"))?;
    ensure(equi <= 1e-8, || format!("equivariance residual {equi:e}"))?;
    for &k in &ks {
        let ok = g
            .check_insertion_at_zero(&GradedVector::basis(k))
            .map_err(|e| e.to_string())?;
        ensure(ok, || {
            format!("insertion at zero fails for {}", va.label(k))
        })?;
    }
    for &a in &ks {
        for &b in &ks {
            g.check_meromorphicity(&GradedVector::basis(a), &GradedVector::basis(b))
                .map_err(|e| format!("meromorphicity ({}, {}): {e}", va.label(a), va.label(b)))?;
        }
    }
    let bv = va.state("b").unwrap();
    let r = g
        .check_associativity(
            std::slice::from_ref(&bv),
            std::slice::from_ref(&bv),
            &[c(4.0, 0.0), c(0.0, 0.0)],
            &[c(1.0, 0.0)],
            None,
        )
        .map_err(|e| e.to_string())?;
    ensure(r.residual.residual <= 1e-6 && r.tail <= 1e-6, || {
        format!(
            "associativity residual {:e}, tail {:e}",
            r.residual.residual, r.tail
        )
    })?;
    Ok(format!(
        "perm {perm:.1e}, equiv {equi:.1e}, assoc {:.1e} (tail {:.1e})",
        r.residual.residual, r.tail
    ))
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    let mut parts = Vec::new();
    for name in MODELS {
        let va = Arc::new(build_model(name, window(), K).map_err(|e| e.to_string())?);
        let r = roundtrip(va, &ExtractionConfig::for_cap(K), 42).map_err(|e| e.to_string())?;
        ensure(
            r.exact.max_residual == 0.0 && r.exact.mismatches == 0,
            || format!("{name}: exact path {:?}", r.exact),
        )?;
        ensure(r.quadrature.max_residual <= 1e-9, || {
            format!("{name}: quadrature {:e}", r.quadrature.max_residual)
        })?;
        ensure(r.reconstruction.max_residual <= 1e-8, || {
            format!("{name}: reconstruction {:e}", r.reconstruction.max_residual)
        })?;
        ensure(r.pass, || format!("{name}: round trip reports failure"))?;
        parts.push(format!(
            "{name} q={:.1e} r={:.1e}",
            r.quadrature.max_residual, r.reconstruction.max_residual
        ));
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{} in {:.2} s",
        parts.join(", "),
        elapsed.as_secs_f64()
    ))
}

fn criterion_8() -> Verdict {
    let g = boson_geometry();
    let va = g.algebra();
    let low: Vec<GradedVector> = keys(va)
        .into_iter()
        .filter(|k| k.degree <= 3)
        .map(GradedVector::basis)
        .collect();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for a in &low {
        for b in &low {
            let mut runs = Vec::new();
            for r in [0.5, 1.0, 2.0] {
                let cfg = ExtractionConfig {
                    radius: r,
                    ..ExtractionConfig::for_cap(K)
                };
                runs.push(
                    extract_modes_quadrature(g, a, b, -K..=K, &cfg).map_err(|e| e.to_string())?,
                );
            }
            for i in 0..runs[0].len() {
                for other in &runs[1..] {
                    worst = worst.max(runs[0][i].1.distance(&other[i].1));
                }
                n += 1;
            }
        }
    }
    ensure(worst <= 1e-9, || format!("max disagreement {worst:e}"))?;
    Ok(format!(
        "{n} modes at r ∈ {{0.5, 1, 2}}, max disagreement {worst:.2e}"
    ))
}

fn criterion_9() -> Verdict {
    let g = boson_geometry();
    let b = g.algebra().state("b").unwrap();
    let mut assoc = Vec::new();
    for k in [3, 5, 7] {
        let r = g
            .check_associativity(
                std::slice::from_ref(&b),
                std::slice::from_ref(&b),
                &[c(4.0, 0.0), c(0.0, 0.0)],
                &[c(1.0, 0.0)],
                Some(k),
            )
            .map_err(|e| e.to_string())?;
        assoc.push(r.residual.residual);
    }
    ensure(assoc.windows(2).all(|p| p[1] < p[0]), || {
        format!("associativity column {assoc:?}")
    })?;

    let z = [c(1.6, 0.2), c(1.0, 0.0), c(-0.5, 0.4)];
    ensure(GeometricStructure::in_ope_domain(&z, 0, 1), || {
        "point outside the OPE domain".into()
    })?;
    let a = vec![b.clone(); 3];
    let full = g.mu_continued(&a, &z).map_err(|e| e.to_string())?;
    let mut ope = Vec::new();
    for order in [2, 4, 8] {
        let terms = g.ope_expand(&a, 0, 1, order).map_err(|e| e.to_string())?;
        let partial = g.ope_partial_sum(&terms, &z).map_err(|e| e.to_string())?;
        ope.push(
            Residual::compare("ope", &partial, &full)
                .map_err(|e| e.to_string())?
                .residual,
        );
    }
    ensure(ope.windows(2).all(|p| p[1] < p[0]), || {
        format!("OPE column {ope:?}")
    })?;
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.1e}"))
            .collect::<Vec<_>>()
            .join(" > ")
    };
    Ok(format!("assoc {}; ope {}", fmt(&assoc), fmt(&ope)))
}

fn criterion_10() -> Verdict {
    let va = boson();
    let fb = FreeBosonModel::new();
    let w = va.window();
    let ks = keys(va);
    let mut compared = 0;
    for &a in &ks {
        let pa = fb.partition(a);
        ensure(va.label(a) == va.label(fb.key(&pa)), || {
            format!("catalog mismatch at {}", va.label(a))
        })?;
        for &b in &ks {
            let pb = fb.partition(b);
            for k in -K..=K {
                let Some(entry) = va.modes().get(a, k, b) else {
                    continue;
                };
                let oracle = fb
                    .fock_mode_oracle(&pa, k, &pb, w)
                    .map_err(|e| e.to_string())?;
                ensure(entry == oracle, || {
                    format!(
                        "{}_({k}){} differs from the oracle",
                        va.label(a),
                        va.label(b)
                    )
                })?;
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} table entries match"))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("vertex-algebra axiom suite", criterion_1),
        ("locality orders", criterion_2),
        ("mode degree law", criterion_3),
        ("polynomiality witness", criterion_4),
        ("two-path agreement", criterion_5),
        ("geometric axiom suite", criterion_6),
        ("round trip", criterion_7),
        ("contour-radius invariance", criterion_8),
        ("convergence study", criterion_9),
        ("oracle equivalence", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2} s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.2} s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
