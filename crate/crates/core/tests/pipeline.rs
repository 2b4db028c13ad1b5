use d4trees::algebra::{GfContext, Ring};
use d4trees::equations::{check_conditions, psi_all, ModelKind};
use d4trees::fqsolver::{orbit_report, solve_over_fq};
use d4trees::lifting::{
    hensel_lift_kummer, hensel_lift_normalized, kummer_models_over, phi_inverse,
};
use d4trees::reduction::{classify_prime, p_congruent, transport_model, PrimeClass};
use d4trees::trees::{count_trees, ValencyType};
use d4trees::Error;

fn ty(a: &[u64]) -> ValencyType {
    ValencyType::from_slice(a).unwrap()
}

#[test]
fn solve_lift_reduce() {
    let t = ty(&[1, 2, 3, 5]);
    let r = orbit_report(&t, 13, 8).unwrap();
    assert!(r.complete);
    assert_eq!(r.trees.len() as u64, count_trees(&t).try_into().unwrap());
    for i in 0..r.models.len() {
        let m = r.model(i);
        assert!(check_conditions(&m).unwrap().all());
        let l = hensel_lift_normalized(&m, 10).unwrap();
        assert_eq!(l.reduction(), m);
        assert!(psi_all(&l.model, 3).iter().all(Ring::is_zero));
    }
}

#[test]
fn kummer_models_lift() {
    let t = ty(&[1, 2, 4]);
    let f = GfContext::new(13, 1).unwrap();
    let ks = kummer_models_over(&t, &f).unwrap();
    assert!(!ks.is_empty());
    for k in &ks {
        assert_eq!(k.kind, ModelKind::Kummer);
        assert_eq!(hensel_lift_kummer(k, 6).unwrap().reduction(), *k);
    }
}

#[test]
fn congruent_types_share_models() {
    let (t1, t2) = (ty(&[1, 2, 3]), ty(&[1, 2, 10]));
    let perm = p_congruent(&t1, &t2, 7, false).unwrap();
    for m in solve_over_fq(&t1, 7, 2).unwrap() {
        let moved = transport_model(&m, &t2, &perm).unwrap();
        assert!(check_conditions(&moved).unwrap().all());
    }
}

#[test]
fn correspondence_needs_regular_slot() {
    let t = ty(&[1, 2, 4, 11]);
    assert_eq!(
        classify_prime(&t, 11).unwrap(),
        PrimeClass::AiRegular(vec![3])
    );
    let f = GfContext::new(11, 2).unwrap();
    let k = kummer_models_over(&t.omit(3).unwrap(), &f)
        .unwrap()
        .remove(0);
    assert!(phi_inverse(&t, 3, &k, 3, None).is_ok());
    assert!(matches!(
        phi_inverse(&t, 0, &k, 3, None),
        Err(Error::NotRegular(_))
    ));
}
