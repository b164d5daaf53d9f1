use hyperpoints::descent::{image_of_point, run_descent, Basis};
use hyperpoints::dmsearch::{solve_curve, SearchOptions};
use hyperpoints::ecq::{canonical_height, torsion_subgroup};
use hyperpoints::family::{build_family, MapChoice};
use hyperpoints::rootnum::parity_rank_odd;
use hyperpoints::Int;
use std::collections::BTreeSet;

#[test]
fn report_for_21_is_self_consistent() {
    let a = Int::from(21);
    let rep = solve_curve(&a, &SearchOptions::default()).unwrap();
    let b = build_family(&a).unwrap();
    assert_eq!(rep.points.len(), 8);
    for p in &rep.points {
        assert!(b.c.is_on(p));
        for m in [MapChoice::Phi1, MapChoice::Phi2] {
            assert!(b.e_a.is_on(&b.apply_map(m, p).unwrap()));
        }
    }
    assert!(rep.decompositions.iter().all(|d| d.within_budget));
    assert_eq!(rep.decompositions.len(), 16);
    assert!(rep.coleman.iter().all(|c| c.bound >= 8));
    assert_eq!(rep.parity.as_ref().map(|p| p.w_global), Some(-1));
    // the generator's height matches a fresh computation
    let h = canonical_height(&b.e_a, &rep.generator.r, 1e-6).unwrap();
    assert!((h - rep.generator.h_r).abs() < 1e-5);
}

#[test]
fn descent_generators_span_survivors() {
    for a in [3i64, 21] {
        let a = Int::from(a);
        let c = run_descent(&a).unwrap();
        let basis = Basis::hypothesis(&a);
        let mut span = BTreeSet::new();
        span.insert((hyperpoints::descent::SClass::ONE, hyperpoints::descent::SClass::ONE));
        for g in &c.generators {
            let img = image_of_point(&basis, g).unwrap();
            let next: Vec<_> = span.iter().map(|&(x, y)| (x * img.0, y * img.1)).collect();
            span.extend(next);
        }
        let survivors: BTreeSet<_> = c.survivor_cells().into_iter().collect();
        assert_eq!(span, survivors);
    }
}

#[test]
fn torsion_images_are_known_points() {
    let b = build_family(&Int::from(237)).unwrap();
    let tors: BTreeSet<_> = torsion_subgroup(&b.e_a).points.into_iter().collect();
    // phi1 sends (0 : +-1 : 1) and the points at infinity to 2-torsion; phi2 does not
    let small: Vec<_> = b.c.universal_points().into_iter().filter(|p| p.y.magnitude() == &1u32.into()).collect();
    assert_eq!(small.len(), 4);
    for p in &small {
        assert!(tors.contains(&b.apply_map(MapChoice::Phi1, p).unwrap()), "{p}");
        assert!(!tors.contains(&b.apply_map(MapChoice::Phi2, p).unwrap()), "{p}");
    }
}

#[test]
fn parity_needs_q_prime() {
    assert!(parity_rank_odd(&Int::from(237)).is_ok());
    assert!(parity_rank_odd(&Int::from(9)).is_err());
}
