mod common;

use proptest::prelude::*;
use tracelab::generators::{
    drunkard_target, gen_dfs, gen_drunkard, gen_kruskal, gen_wilson, generate, GeneratorConfig, GeneratorKind,
};
use tracelab::search::{astar_maze, bfs_shortest_path};

fn cfg(kind: GeneratorKind, seed: u64) -> GeneratorConfig {
    GeneratorConfig::new(kind, seed)
}

#[test]
fn wilson_seed_7_is_spanning_tree() {
    let m = gen_wilson(&cfg(GeneratorKind::Wilson, 7)).unwrap();
    let (v, e, connected, acyclic) = common::tree_stats(m.grid());
    // 15x15 lattice nodes plus 224 carved links.
    assert_eq!(v, 225 + 224);
    assert_eq!(e, v - 1);
    assert!(connected && acyclic);
    assert!(common::flood_connected(m.grid()));
}

#[test]
fn kruskal_seed_3_is_spanning_tree() {
    let m = gen_kruskal(&cfg(GeneratorKind::Kruskal, 3)).unwrap();
    assert!(common::is_spanning_tree(m.grid()));
}

#[test]
fn dfs_seed_11_is_spanning_tree() {
    let m = gen_dfs(&cfg(GeneratorKind::RandomizedDfs, 11)).unwrap();
    assert!(common::is_spanning_tree(m.grid()));
}

#[test]
fn dfs_has_fewer_dead_ends_than_kruskal() {
    let total = |kind| -> usize {
        (0..100).map(|s| common::dead_ends(generate(&cfg(kind, s)).unwrap().grid())).sum()
    };
    let dfs = total(GeneratorKind::RandomizedDfs);
    let kruskal = total(GeneratorKind::Kruskal);
    assert!(dfs < kruskal, "dfs {dfs} vs kruskal {kruskal}");
}

#[test]
fn drunkard_caves_have_cycles() {
    for seed in 0..100 {
        let m = gen_drunkard(&cfg(GeneratorKind::Drunkard, seed)).unwrap();
        assert!(common::flood_connected(m.grid()), "seed {seed}");
        assert!(common::has_cycle(m.grid()), "seed {seed}");
    }
}

#[test]
fn odd_sizes_need_no_padding() {
    let m = gen_wilson(&cfg(GeneratorKind::Wilson, 4).with_size(9, 7)).unwrap();
    assert!(common::is_spanning_tree(m.grid()));
    assert!(!m.is_wall(tracelab::Coord::new(8, 6)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn acyclic_generators_emit_spanning_trees(seed in any::<u64>(), w in 4u16..=30, h in 4u16..=30, k in 0usize..3) {
        let kind = [GeneratorKind::Wilson, GeneratorKind::Kruskal, GeneratorKind::RandomizedDfs][k];
        let m = generate(&cfg(kind, seed).with_size(w, h)).unwrap();
        prop_assert!(common::is_spanning_tree(m.grid()));
        prop_assert_eq!(bfs_shortest_path(&m), common::grid_distance(m.grid(), m.start(), m.goal()));
    }

    #[test]
    fn every_generator_yields_reachable_endpoints(seed in any::<u64>(), k in 0usize..5) {
        let m = generate(&cfg(GeneratorKind::ALL[k], seed)).unwrap();
        prop_assert!(m.start() != m.goal());
        prop_assert!(!m.is_wall(m.start()) && !m.is_wall(m.goal()));
        let r = astar_maze(&m).unwrap();
        prop_assert!(m.execute_plan(&r.plan).is_valid());
        prop_assert!(r.plan.len() as u32 >= tracelab::manhattan(m.start(), m.goal()));
    }

    #[test]
    fn drunkard_floor_matches_target(seed in any::<u64>(), frac in 0.05f64..=1.0) {
        let mut c = cfg(GeneratorKind::Drunkard, seed).with_size(12, 12);
        c.drunkard_floor_fraction = frac;
        let m = gen_drunkard(&c).unwrap();
        let floor = m.grid().free_cells().count();
        prop_assert!(floor >= drunkard_target(&c) && floor <= drunkard_target(&c) + 1);
        prop_assert!(common::flood_connected(m.grid()));
    }
}
