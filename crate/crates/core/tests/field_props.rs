use std::collections::BTreeSet;

use expfield::field::{
    mult_relations, q_linear_relations, reembed, tr_deg, Involution, Namer, Poly, RatExpr, ReembedKind, Scalar, Var,
};
use proptest::prelude::*;

const NAMES: [&str; 4] = ["t", "s", "u", "v"];

fn involution() -> Involution {
    let mut inv = Involution::new();
    inv.add_real(Var::new("t")).unwrap();
    inv.add_real(Var::new("s")).unwrap();
    inv.add_pair(Var::new("u"), Var::new("v")).unwrap();
    inv
}

fn scalar() -> impl Strategy<Value = Scalar> {
    (-3i64..=3, 0usize..4).prop_map(|(k, kind)| {
        let base = match kind {
            0 => Scalar::one(),
            1 => Scalar::i(),
            2 => Scalar::zeta(3),
            _ => Scalar::zeta(5).add(&Scalar::one()),
        };
        base.mul(&Scalar::from_int(k))
    })
}

fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((scalar(), prop::collection::vec(0u32..3, 4)), 1..4).prop_map(|terms| {
        terms.into_iter().fold(Poly::zero(), |acc, (c, exps)| {
            let mono = NAMES.iter().zip(exps).fold(Poly::constant(c), |m, (n, e)| m.mul(&Poly::var(Var::new(n)).pow(e)));
            acc.add(&mono)
        })
    })
}

fn ratexpr() -> impl Strategy<Value = RatExpr> {
    (poly(), poly()).prop_map(|(n, d)| {
        if d.is_zero() {
            RatExpr::from_poly(n)
        } else {
            RatExpr::new(n, d)
        }
    })
}

fn nonzero() -> impl Strategy<Value = RatExpr> {
    ratexpr().prop_filter("nonzero", |e| !e.is_zero())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn sigma_squared_is_identity(e in ratexpr()) {
        let inv = involution();
        prop_assert_eq!(inv.apply(&inv.apply(&e).unwrap()).unwrap(), e);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_is_an_automorphism(e in ratexpr(), f in ratexpr()) {
        let inv = involution();
        prop_assert_eq!(inv.apply(&e.add(&f)).unwrap(), inv.apply(&e).unwrap().add(&inv.apply(&f).unwrap()));
        prop_assert_eq!(inv.apply(&e.mul(&f)).unwrap(), inv.apply(&e).unwrap().mul(&inv.apply(&f).unwrap()));
        prop_assert_eq!(inv.apply(&RatExpr::i()).unwrap(), RatExpr::i().neg());
    }

    #[test]
    fn real_and_imaginary_parts_recombine(e in ratexpr()) {
        let inv = involution();
        let re = inv.real_part(&e).unwrap();
        let im = inv.imag_part(&e).unwrap();
        prop_assert_eq!(re.add(&RatExpr::i().mul(&im)), e);
        prop_assert!(inv.is_fixed(&re).unwrap() && inv.is_fixed(&im).unwrap());
    }

    #[test]
    fn modulus_is_multiplicative(e in nonzero(), f in nonzero()) {
        let inv = involution();
        prop_assert_eq!(inv.modulus_sq(&e.mul(&f)).unwrap(), inv.modulus_sq(&e).unwrap().mul(&inv.modulus_sq(&f).unwrap()));
    }

    #[test]
    fn field_axioms(a in ratexpr(), b in ratexpr(), c in nonzero()) {
        prop_assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert!(c.mul(&c.inv().unwrap()).is_one());
    }

    #[test]
    fn tr_deg_is_monotone_and_bounded(fs in prop::collection::vec(ratexpr(), 1..4), g in ratexpr()) {
        let d = tr_deg(&fs, &[]);
        let vars: BTreeSet<Var> = fs.iter().flat_map(|e| e.vars()).collect();
        prop_assert!(d <= vars.len() && d <= fs.len());
        let mut ext = fs.clone();
        ext.push(g);
        let e = tr_deg(&ext, &[]);
        prop_assert!(d <= e && e <= d + 1);
    }

    #[test]
    fn relation_generators_give_constants(fs in prop::collection::vec(nonzero(), 1..4), k in -2i64..=2) {
        // plant a relation so lattices are not always empty
        let mut fs = fs;
        fs.push(fs[0].scale_int(k).add(&RatExpr::int(1)));
        let lat = q_linear_relations(&fs);
        prop_assert!(lat.rank() >= 1);
        for c in &lat.constants {
            prop_assert!(c.is_constant());
        }
        fs.push(fs[0].pow(k).unwrap().scale(&Scalar::zeta(4)));
        let lat = mult_relations(&fs).unwrap();
        prop_assert!(lat.rank() >= 1);
        for c in &lat.constants {
            prop_assert!(c.is_constant());
        }
    }

    #[test]
    fn reembed_is_a_field_embedding(a in ratexpr(), b in ratexpr(), q in 1u32..4, circle in any::<bool>()) {
        let inv = involution();
        let mut namer = Namer::new(3);
        let (kind, name) = if circle { (ReembedKind::Circle, "t") } else { (ReembedKind::Power, "u") };
        let (r, inv2) = reembed(&inv, &Var::new(name), q, kind, &mut namer).unwrap();
        prop_assert_eq!(r.apply(&a.add(&b)), r.apply(&a).add(&r.apply(&b)));
        prop_assert_eq!(r.apply(&a.mul(&b)), r.apply(&a).mul(&r.apply(&b)));
        prop_assert_eq!(inv2.apply(&r.apply(&a)).unwrap(), r.apply(&inv.apply(&a).unwrap()));
    }
}
