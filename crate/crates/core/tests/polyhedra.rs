mod common;

use common::*;
use mlrf_core::polyhedron::Polyhedron;
use proptest::prelude::*;

fn check(r: Result<(), String>) -> Result<(), TestCaseError> {
    r.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(seeded(256, 11))]

    #[test]
    fn generators_round_trip(p in poly_strategy()) {
        check(hv_round_trip(&p))?;
    }

    #[test]
    fn recession_cone_commutes_with_projection(p in poly_strategy()) {
        check(projection_commutes_with_recession(&p))?;
    }

    #[test]
    fn elimination_matches_generator_projection(p in poly_strategy()) {
        check(projection_agrees(&p))?;
    }

    #[test]
    fn redundancy_removal_keeps_the_set(p in poly_strategy()) {
        check(redundancy_removal_preserves_set(&p))?;
    }

    #[test]
    fn nonneg_cone_is_exact(p in poly_strategy()) {
        check(nonneg_cone_sound_and_complete(&p))?;
    }

    #[test]
    fn intersection_is_included_in_both(p in poly_strategy(), q in poly_strategy()) {
        prop_assume!(p.dim() == q.dim());
        let r = p.intersect(&q);
        prop_assert!(p.includes(&r) && q.includes(&r));
    }
}

#[test]
fn unbounded_polyhedron_with_a_line() {
    // x1 - x2 = 0 in the plane, no inequalities
    let p = Polyhedron::new(2, vec![], vec![eq(&[1, -1], 0)]);
    hv_round_trip(&p).unwrap();
    assert!(!p.generators().is_bounded());
    projection_agrees(&p).unwrap();
}

#[test]
fn empty_polyhedron_round_trips() {
    let p = Polyhedron::new(2, vec![le(&[1, 0], 0), ge(&[1, 0], 1)], vec![]);
    assert!(p.is_empty());
    assert!(p.generators().is_empty());
    hv_round_trip(&p).unwrap();
    assert!(p.project(&[0]).is_empty());
}
