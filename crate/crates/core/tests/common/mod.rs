//! Shared helpers and oracles for the integration tests. The oracles here
//! deliberately avoid the library's double-description and Farkas code.

#![allow(dead_code)]

use mlrf_core::linalg::{rat, ratio, Rational, Vector};
use mlrf_core::loops::TransitionPoly;
use mlrf_core::parse::{parse_loop, LoopFile};
use mlrf_core::polyhedron::{AffineFunc, Polyhedron, Row};
use num_traits::Zero;
use proptest::prelude::*;

pub const CORPUS: &[&str] = &[
    "three_phase",
    "drift",
    "drift_shift",
    "reflect",
    "ratio_growth",
    "affine_growth",
    "fractional_growth",
    "three_runs",
    "bounded_swap",
    "bounded_dec",
];

pub fn corpus_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("loops")
        .join(format!("{name}.slc"))
}

pub fn load_file(name: &str) -> LoopFile {
    let text = std::fs::read_to_string(corpus_path(name)).unwrap();
    parse_loop(&text).unwrap()
}

pub fn load(name: &str) -> TransitionPoly {
    load_file(name).slc.transition()
}

/// `a·x <= b` from small integers.
pub fn le(a: &[i64], b: i64) -> Row {
    Row::new(a.iter().map(|&v| rat(v)).collect(), rat(b))
}

/// `a·x >= b`.
pub fn ge(a: &[i64], b: i64) -> Row {
    Row::new(a.iter().map(|&v| rat(-v)).collect(), rat(-b))
}

pub fn eq(a: &[i64], b: i64) -> Row {
    Row::new(a.iter().map(|&v| rat(v)).collect(), rat(b))
}

pub fn eq_q(a: &[(i64, i64)], b: (i64, i64)) -> Row {
    Row::new(a.iter().map(|&(n, d)| ratio(n, d)).collect(), ratio(b.0, b.1))
}

pub fn func(a: &[(i64, i64)], c: (i64, i64)) -> AffineFunc {
    AffineFunc::new(a.iter().map(|&(n, d)| ratio(n, d)).collect(), ratio(c.0, c.1))
}

pub fn ivec(v: &[i64]) -> Vector {
    v.iter().map(|&x| rat(x)).collect()
}

/// Generators of the nonnegative-function cone of a nonempty polyhedron read
/// straight off its rows: each row `m·x <= c` gives `(-m, c)`, each equality
/// gives both signs, plus the constant `(0, 1)`.
pub fn farkas_generators(p: &Polyhedron) -> Vec<Vector> {
    let lift = |r: &Row, s: i64| -> Vector {
        r.coeffs
            .iter()
            .map(|c| -c * rat(s))
            .chain(std::iter::once(&r.rhs * rat(s)))
            .collect()
    };
    let mut gens: Vec<Vector> = p.ineqs().iter().map(|r| lift(r, 1)).collect();
    for r in p.eqs() {
        gens.push(lift(r, 1));
        gens.push(lift(r, -1));
    }
    let mut one = vec![Rational::zero(); p.dim() + 1];
    one[p.dim()] = rat(1);
    gens.push(one);
    gens
}

/// Whether `a·x + b >= 0` on all of `p`, by direct minimisation.
pub fn nonneg_on(p: &Polyhedron, f: &AffineFunc) -> bool {
    let mut obj = f.coeffs.clone();
    obj.resize(p.dim(), Rational::zero());
    match p.minimize(&obj) {
        mlrf_core::linalg::LpResult::Optimal { value, .. } => value + &f.constant >= Rational::zero(),
        mlrf_core::linalg::LpResult::Infeasible => true,
        mlrf_core::linalg::LpResult::Unbounded => false,
    }
}

/// Repeated application of F with no bookkeeping shared between steps.
pub fn plain_f_power(q: &TransitionPoly, d: usize) -> TransitionPoly {
    let mut cur = q.clone();
    for _ in 0..d {
        if cur.is_empty() {
            break;
        }
        cur = mlrf_core::engine::f_step(&cur);
    }
    cur
}

pub fn row_strategy(dim: usize) -> impl Strategy<Value = (Vec<i64>, i64)> {
    (prop::collection::vec(-5i64..=5, dim), -5i64..=5)
}

/// Random polyhedra with dimension 1..=4 and coefficients in [-5, 5]. Most
/// have a bounding box so double description stays cheap; some get a row
/// `-(r0 + r1) <= -(b0 + b1)` that makes the first two rows implicit
/// equalities.
pub fn poly_strategy() -> impl Strategy<Value = Polyhedron> {
    (1usize..=4).prop_flat_map(|dim| {
        (
            prop::collection::vec(row_strategy(dim), 1..=5),
            prop::collection::vec(row_strategy(dim), 0..=1),
            any::<bool>(),
            prop::bool::weighted(0.3),
        )
            .prop_map(move |(ineqs, eqs, boxed, tight)| {
                let mut rows: Vec<Row> = ineqs.iter().map(|(a, b)| le(a, *b)).collect();
                if tight && ineqs.len() >= 2 {
                    let (a0, b0) = &ineqs[0];
                    let (a1, b1) = &ineqs[1];
                    let sum: Vec<i64> = a0.iter().zip(a1).map(|(x, y)| -(x + y)).collect();
                    rows.push(le(&sum, -(b0 + b1)));
                }
                if boxed {
                    for k in 0..dim {
                        let mut e = vec![0; dim];
                        e[k] = 1;
                        rows.push(le(&e, 6));
                        e[k] = -1;
                        rows.push(le(&e, 6));
                    }
                }
                let eqs = eqs.iter().map(|(a, b)| eq(a, *b)).collect();
                Polyhedron::new(dim, rows, eqs)
            })
    })
}

pub fn seeded(cases: u32, seed: u64) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: proptest::test_runner::RngSeed::Fixed(seed),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

/// The leading `k` coordinates, with `k` chosen from the polyhedron itself.
pub fn leading(p: &Polyhedron) -> Vec<usize> {
    let k = if p.dim() == 1 { 1 } else { 1 + p.row_count() % (p.dim() - 1) };
    (0..k).collect()
}

pub fn hv_round_trip(p: &Polyhedron) -> Result<(), String> {
    let back = Polyhedron::from_generators(p.dim(), p.generators());
    if !back.set_equals(p) {
        return Err(format!("{p:?} came back as {back:?}"));
    }
    for v in &p.generators().vertices {
        if !p.contains(v) {
            return Err(format!("vertex {v:?} outside {p:?}"));
        }
    }
    Ok(())
}

pub fn projection_commutes_with_recession(p: &Polyhedron) -> Result<(), String> {
    if p.is_empty() {
        return Ok(());
    }
    let coords = leading(p);
    let a = p.recession_cone().project(&coords);
    let b = p.project(&coords).recession_cone();
    if a.set_equals(&b) {
        Ok(())
    } else {
        Err(format!("{p:?}: {a:?} vs {b:?}"))
    }
}

/// Fourier-Motzkin against projecting the generators and converting back.
pub fn projection_agrees(p: &Polyhedron) -> Result<(), String> {
    let coords = leading(p);
    let fm = p.project(&coords);
    let g = p.generators();
    let pick = |v: &Vector| coords.iter().map(|&i| v[i].clone()).collect::<Vector>();
    let projected = mlrf_core::polyhedron::GeneratorRep {
        vertices: g.vertices.iter().map(pick).collect(),
        rays: g.rays.iter().map(pick).filter(|r: &Vector| r.iter().any(|c| !c.is_zero())).collect(),
    };
    let by_gens = Polyhedron::from_generators(coords.len(), &projected);
    if fm.set_equals(&by_gens) {
        Ok(())
    } else {
        Err(format!("{p:?}: {fm:?} vs {by_gens:?}"))
    }
}

pub fn redundancy_removal_preserves_set(p: &Polyhedron) -> Result<(), String> {
    let r = p.remove_redundant();
    if !r.set_equals(p) {
        return Err(format!("{p:?} became {r:?}"));
    }
    if r.row_count() > p.row_count() {
        return Err(format!("{p:?} grew to {r:?}"));
    }
    Ok(())
}

/// Every generator is nonnegative on the projection, and every function
/// read off the rows of the Fourier-Motzkin projection is in the cone.
pub fn nonneg_cone_sound_and_complete(p: &Polyhedron) -> Result<(), String> {
    let coords = leading(p);
    let n = coords.len();
    let cone = p.nonneg_cone(n);
    if p.is_empty() {
        return Ok(());
    }
    for f in &cone {
        if !nonneg_on(p, f) {
            return Err(format!("{p:?}: {f:?} is negative somewhere"));
        }
    }
    let gens: Vec<Vector> = cone.iter().map(|f| f.as_vector()).collect();
    for v in farkas_generators(&p.project(&coords)) {
        if !mlrf_core::polyhedron::cone_contains(&gens, &v) {
            return Err(format!("{p:?}: {v:?} missing from the cone"));
        }
    }
    Ok(())
}
