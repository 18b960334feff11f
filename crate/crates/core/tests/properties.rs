mod common;

use common::{chart, gap_deflated_length};
use linelab::decimal;
use linelab::derived::{derive_to_empty, SetNode};
use linelab::expr::HomeoExpr;
use linelab::interval::IntervalQ;
use linelab::measure::{measure_interval, translation_number, CollapseMap, RadonMeasure};
use linelab::stage::StageMap;
use linelab::yoccoz::yoccoz_map;
use proptest::prelude::*;

fn interval() -> impl Strategy<Value = IntervalQ> {
    (-5.0f64..5.0, 0.05f64..4.0).prop_map(|(a, len)| IntervalQ::closed(a, a + len))
}

/// Disjoint gaps built from positive spacings.
fn gaps() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.01f64..1.0, 0.01f64..1.0), 1..8).prop_map(|steps| {
        let mut x = -4.0;
        let mut out = Vec::new();
        for (skip, len) in steps {
            x += skip;
            out.push((x, x + len));
            x += len;
        }
        out
    })
}

/// A descriptor of known rank `depth`.
fn nested(depth: usize, limit: f64) -> SetNode {
    let mut node = SetNode::atom(0.0);
    for level in 1..depth {
        node = SetNode::seq(0.0, if level % 2 == 0 { 1.0 } else { -1.0 }, 1, node);
    }
    if depth > 1 {
        if let SetNode::Seq { scale, start, child, .. } = node {
            return SetNode::Seq { limit, scale, start, child };
        }
        unreachable!()
    }
    SetNode::atom(limit)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn yoccoz_cocycle(i in interval(), j in interval(), k in interval(), t in 0.001f64..0.999) {
        let x = i.lo() + t * i.length();
        let ij = yoccoz_map(i, j).unwrap();
        let jk = yoccoz_map(j, k).unwrap();
        let ik = yoccoz_map(i, k).unwrap();
        prop_assert!((jk.eval(ij.eval(x)) - ik.eval(x)).abs() <= 1e-10 * k.length().max(1.0));
        // the chart is carried to the chart
        let y = ij.eval(x);
        let (ci, cj) = (chart(i.lo(), i.hi(), x), chart(j.lo(), j.hi(), y));
        prop_assert!((ci - cj).abs() <= 1e-9 * ci.abs().max(1.0));
    }

    #[test]
    fn yoccoz_inverse_round_trip(i in interval(), j in interval(), t in 0.0f64..1.0) {
        let x = i.lo() + t * i.length();
        let m = yoccoz_map(i, j).unwrap();
        prop_assert!((m.inverse().eval(m.eval(x)) - x).abs() <= 1e-10 * i.length().max(1.0));
    }

    #[test]
    fn comb_is_additive(mut pts in prop::collection::vec(-10.0f64..10.0, 0..20), a in -12.0f64..0.0, m in 0.0f64..6.0, l in 0.0f64..6.0) {
        pts.sort_by(f64::total_cmp);
        let mu = RadonMeasure::comb(pts.clone());
        let (b, c) = (a + m, a + m + l);
        let whole = measure_interval(&mu, a, c).unwrap();
        let at_b = pts.iter().filter(|&&p| p == b).count() as f64;
        let split = measure_interval(&mu, a, b).unwrap() + measure_interval(&mu, b, c).unwrap() - at_b;
        prop_assert!((whole - split).abs() <= 1e-12);
    }

    #[test]
    fn collapse_is_monotone_and_kills_gaps(g in gaps(), xs in prop::collection::vec(-5.0f64..10.0, 2..40)) {
        let cm = CollapseMap::new(g.clone()).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        for w in xs.windows(2) {
            prop_assert!(cm.eval(w[0]) <= cm.eval(w[1]));
        }
        let mu = RadonMeasure::StieltjesFromMap { collapse: Some(cm), map: HomeoExpr::Identity };
        for &(lo, hi) in &g {
            prop_assert_eq!(measure_interval(&mu, lo, hi).unwrap(), 0.0);
        }
        for w in xs.windows(2) {
            let m = measure_interval(&mu, w[0], w[1]).unwrap();
            prop_assert!((m - gap_deflated_length(&g, w[0], w[1])).abs() <= 1e-12);
        }
    }

    #[test]
    fn stieltjes_is_additive(g in gaps(), a in -5.0f64..0.0, m in 0.0f64..5.0, l in 0.0f64..5.0) {
        let mu = RadonMeasure::StieltjesFromMap {
            collapse: Some(CollapseMap::new(g).unwrap()),
            map: HomeoExpr::affine(2.0, 1.0),
        };
        let (b, c) = (a + m, a + m + l);
        let whole = measure_interval(&mu, a, c).unwrap();
        let split = measure_interval(&mu, a, b).unwrap() + measure_interval(&mu, b, c).unwrap();
        prop_assert!((whole - split).abs() <= 1e-12);
    }

    #[test]
    fn decimal_round_trip(x in any::<f64>().prop_filter("not nan", |x| !x.is_nan())) {
        let s = decimal::format(x);
        let back = decimal::parse(&s).unwrap();
        // the sign of zero is dropped on purpose
        let want = if x == 0.0 { 0.0f64 } else { x };
        prop_assert_eq!(back.to_bits(), want.to_bits(), "{}", s);
    }

    #[test]
    fn stage_maps_increase(depth in 2u32..6, pick in 0u32..6, a in -6.0f64..6.0, d in 1e-9f64..1.0) {
        let index = 1 + pick % depth;
        let s = StageMap::new(index, depth).unwrap();
        let b = a + d;
        prop_assert!(s.eval(a) < s.eval(b), "f{}({}) >= f{}({})", index, a, index, b);
        let back = s.eval_inv(s.eval(a)).unwrap();
        prop_assert!((back - a).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn derivation_count_is_depth(depth in 1usize..10, limit in -3.0f64..3.0) {
        let node = nested(depth, limit);
        let seq = derive_to_empty(vec![node]).unwrap();
        prop_assert_eq!(seq.steps(), depth);
        // the top limit survives to the last nonempty level
        let last = &seq.levels[depth - 1];
        prop_assert_eq!(last.len(), 1);
        let mut pts = Vec::new();
        last[0].points(3, &mut pts);
        prop_assert_eq!(pts, vec![limit]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn translation_number_is_additive(lo in -3.0f64..0.0, len in 0.5f64..3.0, shift in 0.3f64..2.0) {
        let f = HomeoExpr::Compose { maps: vec![HomeoExpr::exp_bump(lo, lo + len), HomeoExpr::translation(shift)] };
        let ff = HomeoExpr::Compose { maps: vec![f.clone(), f.clone()] };
        let window = IntervalQ::closed(-10.0, 10.0);
        let one = translation_number(&f, 0.0, 4000, &window).unwrap();
        let two = translation_number(&ff, 0.0, 2000, &window).unwrap();
        prop_assert!((two.value - 2.0 * one.value).abs() <= two.error_bar + 2.0 * one.error_bar + 1e-3);
        prop_assert!((one.value - shift).abs() <= one.error_bar + 1e-3);
    }
}
