mod common;

use proptest::prelude::*;
use taxalign::{
    AlignContext, ClosureIndex, Connection, ConstraintPack, ConstraintRule, WeightTable,
};

use common::{random_instance, random_weights, PACKS};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Raising one weight (and renormalizing its row) never lowers the
    /// support of a connection that does not belong to that row.
    #[test]
    fn support_is_monotone_in_weights(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let inst = random_instance(seed, 20, 5);
        let (sc, tc) = (ClosureIndex::build(&inst.source), ClosureIndex::build(&inst.target));
        let ctx = AlignContext::new(&sc, &tc, &inst.candidates);
        let w = random_weights(seed, &inst.candidates);
        let pairs: Vec<(usize, usize)> = (0..inst.candidates.len())
            .flat_map(|s| (0..inst.candidates.candidates(s).len()).map(move |p| (s, p)))
            .collect();
        prop_assume!(!pairs.is_empty());
        let (bs, bp) = pairs[pick.index(pairs.len())];

        // scale the row down except the boosted label, keeping it normalized
        let mut rows: Vec<Vec<f64>> = (0..w.len()).map(|s| w.row(s).to_vec()).collect();
        for (p, x) in rows[bs].iter_mut().enumerate() {
            *x = if p == bp { 0.5 + 0.5 * *x } else { 0.5 * *x };
        }
        let boosted = WeightTable::from_rows(rows);

        let bt = inst.candidates.candidates(bs)[bp];
        for s in (0..inst.candidates.len()).filter(|&s| s != bs) {
            for &t in inst.candidates.candidates(s) {
                let conn = Connection::new(s, t);
                for rule in ConstraintPack::expand("AA*").unwrap().rules().iter().copied()
                    .chain(ConstraintPack::expand("II*").unwrap().rules().iter().copied())
                {
                    if ctx.supporters(rule, conn).contains(&Connection::new(bs, bt)) {
                        prop_assert!(
                            ctx.rule_support(rule, conn, &boosted) + 1e-12
                                >= ctx.rule_support(rule, conn, &w)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn both_needs_evidence_on_both_sides(seed in any::<u64>()) {
        let inst = random_instance(seed, 25, 6);
        let (sc, tc) = (ClosureIndex::build(&inst.source), ClosureIndex::build(&inst.target));
        let ctx = AlignContext::new(&sc, &tc, &inst.candidates);
        let w = random_weights(seed, &inst.candidates);
        for pattern in PACKS {
            let pack = ConstraintPack::expand(pattern).unwrap();
            let [e, o, b] = pack.rules() else { panic!("pack of three") };
            for s in 0..inst.candidates.len() {
                for &t in inst.candidates.candidates(s) {
                    let conn = Connection::new(s, t);
                    let (se, so, sb) = (
                        ctx.rule_support(*e, conn, &w),
                        ctx.rule_support(*o, conn, &w),
                        ctx.rule_support(*b, conn, &w),
                    );
                    prop_assert_eq!(sb, se.min(so));
                    if ctx.supporters(*e, conn).is_empty() || ctx.supporters(*o, conn).is_empty() {
                        prop_assert!(ctx.supporters(*b, conn).is_empty());
                        prop_assert_eq!(sb, 0.0);
                    }
                    let total = ctx.support(&pack, conn, &w, 1e9);
                    prop_assert!((total - (se + so + sb)).abs() < 1e-12);
                    prop_assert!(ctx.support(&pack, conn, &w, 0.25) <= 0.25);
                }
            }
        }
    }
}

#[test]
fn codes_parse_case_insensitively() {
    for code in ["iie", "IAo", "aAB"] {
        let rule: ConstraintRule = code.parse().unwrap();
        assert_eq!(rule.code(), code.to_uppercase());
    }
    assert!("IIX".parse::<ConstraintRule>().is_err());
    assert!(ConstraintPack::expand("QQ*").is_err());
    assert_eq!(ConstraintPack::expand("ai*").unwrap().len(), 3);
    let list = ConstraintPack::expand("IIE, aao,IIE").unwrap();
    assert_eq!(list.label(), "IIE,AAO");
    assert_eq!(ConstraintPack::expand(&list.label()).unwrap(), list);
    assert_eq!(ConstraintPack::expand("II*,AAB").unwrap().len(), 4);
    assert!(ConstraintPack::expand("IIE,").is_err());
}
