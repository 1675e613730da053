use belforge_core::eval::{GoldMention, RelationGraph, evaluate};
use belforge_core::{Cui, SemanticGroup};
use proptest::prelude::*;

fn cui(i: u32) -> Cui {
    Cui::new(&format!("C{i:07}")).unwrap()
}

const GROUPS: [SemanticGroup; 4] = [SemanticGroup::Diso, SemanticGroup::Chem, SemanticGroup::Anat, SemanticGroup::Proc];

#[derive(Debug, Clone)]
struct Instance {
    gold: Vec<GoldMention>,
    pred: Vec<Option<Cui>>,
    edges: Vec<(u32, u32)>,
}

fn instance() -> impl Strategy<Value = Instance> {
    let mention = (0u32..12, 0usize..4, prop::option::weighted(0.9, 0u32..12));
    (prop::collection::vec(mention, 1..40), prop::collection::vec((0u32..12, 0u32..12), 0..30)).prop_map(
        |(ms, edges)| Instance {
            gold: ms
                .iter()
                .enumerate()
                .map(|(k, &(g, grp, _))| GoldMention { mention: format!("m{k}"), gold_cui: cui(g), group: GROUPS[grp] })
                .collect(),
            pred: ms.iter().map(|&(_, _, p)| p.map(cui)).collect(),
            edges,
        },
    )
}

fn graph(edges: &[(u32, u32)]) -> RelationGraph {
    let mut g = RelationGraph::new();
    for &(a, b) in edges {
        g.add_edge(&cui(a), &cui(b));
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn one_dist_dominates_accuracy(inst in instance()) {
        let r = evaluate(&inst.pred, &inst.gold, &graph(&inst.edges), true);
        prop_assert!(r.total.one_dist_accuracy >= r.total.accuracy);
        for g in &r.groups {
            prop_assert!(g.one_dist_accuracy >= g.accuracy);
        }
        prop_assert_eq!(r.groups.iter().map(|g| g.count).sum::<usize>(), inst.gold.len());
        let weighted: f64 = r.groups.iter().map(|g| g.accuracy * g.count as f64).sum::<f64>() / inst.gold.len() as f64;
        prop_assert!((weighted - r.total.accuracy).abs() < 1e-12);
        let weighted: f64 = r.groups.iter().map(|g| g.one_dist_accuracy * g.count as f64).sum::<f64>() / inst.gold.len() as f64;
        prop_assert!((weighted - r.total.one_dist_accuracy).abs() < 1e-12);
        prop_assert!(r.groups.windows(2).all(|w| w[0].count >= w[1].count));
    }

    #[test]
    fn order_does_not_matter(inst in instance(), rot in 0usize..40) {
        let g = graph(&inst.edges);
        let r = evaluate(&inst.pred, &inst.gold, &g, true);
        let k = rot % inst.gold.len();
        let mut gold = inst.gold.clone();
        let mut pred = inst.pred.clone();
        gold.rotate_left(k);
        pred.rotate_left(k);
        gold.reverse();
        pred.reverse();
        prop_assert_eq!(evaluate(&pred, &gold, &g, true), r);
    }

    #[test]
    fn new_edge_adds_one_mention(inst in instance()) {
        let g = graph(&inst.edges);
        let before = evaluate(&inst.pred, &inst.gold, &g, false);
        // first mention wrong under both metrics despite a prediction
        let wrong = inst.pred.iter().zip(&inst.gold).position(|(p, gm)| {
            p.as_ref().is_some_and(|p| p != &gm.gold_cui && !g.contains_edge(p, &gm.gold_cui))
        });
        prop_assume!(wrong.is_some());
        let w = wrong.unwrap();
        let p = inst.pred[w].clone().unwrap();
        let gold = &inst.gold[w].gold_cui;
        // edges are undirected, so mentions with the roles swapped flip too
        let same_pair = inst
            .pred
            .iter()
            .zip(&inst.gold)
            .filter(|(q, gm)| {
                (q.as_ref() == Some(&p) && &gm.gold_cui == gold) || (q.as_ref() == Some(gold) && gm.gold_cui == p)
            })
            .count();
        let mut g2 = g.clone();
        g2.add_edge(&p, gold);
        let after = evaluate(&inst.pred, &inst.gold, &g2, false);
        let n = inst.gold.len() as f64;
        prop_assert_eq!(after.total.one_dist_correct, before.total.one_dist_correct + same_pair);
        prop_assert!((after.total.one_dist_accuracy - before.total.one_dist_accuracy - same_pair as f64 / n).abs() < 1e-12);
        prop_assert_eq!(after.total.correct, before.total.correct);
    }
}

#[test]
fn render_is_stable() {
    let gold = vec![
        GoldMention { mention: "a".into(), gold_cui: cui(1), group: SemanticGroup::Diso },
        GoldMention { mention: "b".into(), gold_cui: cui(2), group: SemanticGroup::Diso },
    ];
    let r = evaluate(&[Some(cui(1)), None], &gold, &RelationGraph::new(), true);
    let text = r.render_text();
    assert_eq!(text, r.clone().render_text());
    assert_eq!(text.lines().count(), 3);
}
