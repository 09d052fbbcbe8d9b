use admm_embed_core::relational::{SimilarityScale, WordGraph};
use admm_embed_core::Rng;
use proptest::prelude::*;

const INF: usize = usize::MAX / 4;

/// All-pairs hop counts by Floyd–Warshall, independent of the BFS in the crate.
fn floyd_warshall(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(a, b) in edges {
        d[a][b] = 1;
        d[b][a] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn random_graph(seed: u64) -> (usize, Vec<(usize, usize)>, Vec<Vec<usize>>) {
    let mut rng = Rng::new(seed);
    let n = 2 + rng.below(12);
    let edges: Vec<(usize, usize)> = (0..rng.below(2 * n))
        .map(|_| {
            let a = rng.below(n);
            (a, rng.below_excluding(n, a))
        })
        .collect();
    let words = 1 + rng.below(8);
    let membership = (0..words)
        .map(|_| (0..1 + rng.below(2)).map(|_| rng.below(n)).collect())
        .collect();
    (n, edges, membership)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn shortest_paths_match_floyd_warshall(seed in any::<u64>()) {
        let (n, edges, membership) = random_graph(seed);
        let graph = WordGraph::new(n, &edges, membership, None).unwrap();
        let oracle = floyd_warshall(n, &edges);
        for (s, row) in oracle.iter().enumerate() {
            for (t, &d) in row.iter().enumerate() {
                let expected = (d < INF).then_some(d);
                prop_assert_eq!(graph.shortest_path(s, t).unwrap(), expected);
            }
        }
        let finite = oracle.iter().flatten().filter(|&&d| d < INF).max().copied().unwrap_or(0);
        prop_assert!(2 * graph.depth() >= finite);
    }

    #[test]
    fn word_sim_is_symmetric_bounded_and_matches_the_oracle(seed in any::<u64>(), log in any::<bool>()) {
        let (n, edges, membership) = random_graph(seed);
        let graph = WordGraph::new(n, &edges, membership.clone(), None).unwrap();
        let oracle = floyd_warshall(n, &edges);
        let scale = if log { SimilarityScale::Log } else { SimilarityScale::Linear };
        let span = 2.0 * graph.depth() as f64;
        for i in 0..membership.len() {
            for j in 0..membership.len() {
                let s = graph.word_sim(i, j, scale).unwrap();
                prop_assert_eq!(s, graph.word_sim(j, i, scale).unwrap());
                prop_assert!((0.0..=1.0).contains(&s));
                let l = membership[i]
                    .iter()
                    .flat_map(|&a| membership[j].iter().map(move |&b| (a, b)))
                    .map(|(a, b)| oracle[a][b])
                    .min()
                    .unwrap();
                let expected = if l >= INF {
                    0.0
                } else if log {
                    (1.0 - (l as f64 + 1.0).ln() / (span + 1.0).ln()).clamp(0.0, 1.0)
                } else {
                    (1.0 - l as f64 / span).clamp(0.0, 1.0)
                };
                prop_assert!((s - expected).abs() <= 1e-12, "{} vs {}", s, expected);
                if i == j {
                    prop_assert_eq!(s, 1.0);
                }
            }
        }
    }

    #[test]
    fn hop_counts_satisfy_the_triangle_inequality(seed in any::<u64>()) {
        let (n, edges, membership) = random_graph(seed);
        let graph = WordGraph::new(n, &edges, membership, None).unwrap();
        let d: Vec<Vec<Option<usize>>> = (0..n).map(|s| graph.distances_from(&[s])).collect();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if let (Some(ab), Some(bc)) = (d[a][b], d[b][c]) {
                        let ac = d[a][c].expect("connected through b");
                        prop_assert!(ac <= ab + bc);
                    }
                }
            }
        }
    }
}

#[test]
fn explicit_depth_overrides_the_diameter() {
    let graph = WordGraph::new(3, &[(0, 1), (1, 2)], vec![vec![0], vec![2]], Some(4)).unwrap();
    assert_eq!(graph.depth(), 4);
    assert_eq!(graph.word_sim(0, 1, SimilarityScale::Linear).unwrap(), 0.75);
}
