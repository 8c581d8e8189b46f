mod common;

use common::{expr, formula_holds, sample_point, ybox};
use efsolver::simplify::{classify_guard, simplify_branch, BranchStatus, Decision};
use efsolver::{parse_problem, split_box, GuardAtom, IntervalBox};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn holds(g: &GuardAtom, bx: &IntervalBox, y: &[f64]) -> bool {
    let v = g.body.eval_at(bx, y).unwrap();
    if g.strict {
        v < 0.0
    } else {
        v <= 0.0
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn decided_guards_agree_with_samples(body in expr(), strict in any::<bool>(), bx in ybox(), seed in any::<u64>()) {
        let g = GuardAtom { body, strict };
        let decision = classify_guard(&g, &bx).unwrap();
        prop_assume!(decision != Decision::Undecided);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..1000 {
            let y = sample_point(&bx, &mut rng);
            prop_assert_eq!(holds(&g, &bx, &y), decision == Decision::True, "{:?} at {:?}", g, y);
        }
    }

    #[test]
    fn decisions_persist_on_sub_boxes(body in expr(), strict in any::<bool>(), bx in ybox(), path in prop::collection::vec((0usize..2, any::<bool>()), 1..8)) {
        let g = GuardAtom { body, strict };
        let decision = classify_guard(&g, &bx).unwrap();
        prop_assume!(decision != Decision::Undecided);
        let mut cur = bx;
        for (i, right) in path {
            if !cur.is_splittable(i) {
                continue;
            }
            let (l, r) = split_box(&cur, i).unwrap();
            cur = if right { r } else { l };
            prop_assert_eq!(classify_guard(&g, &cur).unwrap(), decision);
        }
    }
}

#[test]
fn proved_false_branches_admit_no_x() {
    let cases = [
        "exists x1 x2; forall-vars y; branch y in [0, 1] : y >= 2 and x1*y + x2 <= 1;",
        "exists x1 x2; forall-vars y z; branch y in [0, 1], z in [-1, 1] : (y*y + 1 < 0 or z > 3) and x1 - x2*z <= y;",
        "exists x1 x2; forall-vars y; branch y in [1, 2] : y*y < 0.5 and (y > 5 or x1*y <= x2);",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for text in cases {
        let p = parse_problem(text).unwrap();
        let br = &p.branches[0];
        assert_eq!(simplify_branch(br, &p.x_vars).unwrap(), BranchStatus::ProvedFalse, "{text}");
        for _ in 0..200 {
            let y = sample_point(&br.bbox, &mut rng);
            for _ in 0..20 {
                let x: Vec<f64> = (0..p.num_x()).map(|_| rng.gen_range(-10.0..10.0)).collect();
                assert!(!formula_holds(&br.formula, &p, &br.bbox, &y, &x), "{text} at y={y:?} x={x:?}");
            }
        }
    }
}
