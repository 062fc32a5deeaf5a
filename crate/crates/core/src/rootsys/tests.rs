use std::collections::HashSet;

use proptest::prelude::*;

use super::*;

fn angle_deg(set: &VectorSet, a: usize, b: usize) -> f64 {
    set.cos_between(a, b).acos().to_degrees()
}

fn min_angle(set: &VectorSet) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..set.len() {
        for b in a + 1..set.len() {
            best = best.min(angle_deg(set, a, b));
        }
    }
    best
}

fn exact_rows(set: &VectorSet) -> Vec<Vec<i64>> {
    (0..set.len())
        .map(|k| set.dense_row(k).iter().map(|v| (v * 1e9).round() as i64).collect())
        .collect()
}

#[test]
fn a2_has_six_roots_including_e1_minus_e2() {
    let cfg = gen_an_roots(2).unwrap();
    assert_eq!(cfg.len(), 6);
    assert_eq!(cfg.ambient_dim(), 3);
    let rows: Vec<Vec<f64>> = (0..6).map(|k| cfg.vectors().dense_row(k)).collect();
    assert!(rows.contains(&vec![1.0, -1.0, 0.0]));
    assert!(rows.contains(&vec![-1.0, 1.0, 0.0]));
    // lexicographic (i, j) order
    assert_eq!(cfg.root_pairs().unwrap()[..3], [(0, 1), (0, 2), (1, 0)]);
}

#[test]
fn rank_zero_is_rejected() {
    assert!(matches!(gen_an_roots(0), Err(LscError::InvalidRank(0))));
}

#[test]
fn root_shape_invariants() {
    let cfg = gen_an_roots(5).unwrap();
    for row in cfg.vectors().rows() {
        assert_eq!(row.nnz(), 2);
        let mut vals: Vec<f64> = row.values.to_vec();
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals, vec![-1.0, 1.0]);
        assert_eq!(row.sum(), 0.0);
        assert_eq!(row.norm_sq(), 2.0);
    }
}

#[test]
fn count_law_for_all_small_ranks() {
    for n in 1..400 {
        assert_eq!(gen_an_roots(n).unwrap().len(), n * (n + 1), "rank {n}");
    }
}

#[test]
fn a9_exhaustive_angles() {
    let cfg = gen_an_roots(9).unwrap();
    assert_eq!(cfg.len(), 90);
    let allowed = [60.0, 90.0, 120.0, 180.0];
    let set = cfg.vectors();
    for a in 0..90 {
        for b in a + 1..90 {
            let ang = angle_deg(set, a, b);
            assert!(allowed.iter().any(|t| (ang - t).abs() < 1e-9), "angle {ang}");
        }
    }
    assert!((min_angle(set) - 60.0).abs() < 1e-9);
}

#[test]
fn drop_projection_examples() {
    let custom = CenterConfiguration::custom(VectorSet::from_dense_rows(3, [[1.0, 0.0, -1.0]])).unwrap();
    let dropped = project_drop(&custom).unwrap();
    assert_eq!(dropped.vectors().dense_row(0), vec![1.0, 0.0]);
    assert_eq!(dropped.projection(), Projection::DropLast);

    let a2 = project_drop(&gen_an_roots(2).unwrap()).unwrap();
    assert!((min_angle(a2.vectors()) - 45.0).abs() < 1e-9);

    let a3 = project_drop(&gen_an_roots(3).unwrap()).unwrap();
    assert_eq!(a3.len(), 12);
    assert_eq!(a3.ambient_dim(), 3);
    let set: HashSet<u64> = (0..12).map(|k| a3.vectors().norm_sq(k).to_bits()).collect();
    assert_eq!(set, HashSet::from([1.0f64.to_bits(), 2.0f64.to_bits()]));
    // roots touching the last coordinate lose one nonzero entry
    let short = (0..12).filter(|&k| a3.vectors().norm_sq(k) == 1.0).count();
    assert_eq!(short, 6);
}

#[test]
fn drop_projection_guards() {
    let a2 = gen_an_roots(2).unwrap();
    let dropped = project_drop(&a2).unwrap();
    assert!(matches!(project_drop(&dropped), Err(LscError::InvalidState(_))));
    let zeroing = CenterConfiguration::custom(VectorSet::from_dense_rows(2, [[0.0, 3.0]])).unwrap();
    assert!(matches!(project_drop(&zeroing), Err(LscError::InvalidInput(_))));
}

#[test]
fn drop_min_angle_is_45_for_ranks_2_to_9() {
    for n in 2..=9 {
        let cfg = project_drop(&gen_an_roots(n).unwrap()).unwrap();
        assert!((min_angle(cfg.vectors()) - 45.0).abs() < 1e-9, "rank {n}");
    }
}

fn gram(set: &VectorSet) -> Vec<f64> {
    let n = set.len();
    let mut g = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            g.push(set.dot(a, b));
        }
    }
    g
}

#[test]
fn isometric_preserves_gram_matrix() {
    for n in 1..=6 {
        let cfg = gen_an_roots(n).unwrap();
        let proj = project_isometric(&cfg).unwrap();
        assert_eq!(proj.ambient_dim(), n);
        let (g0, g1) = (gram(cfg.vectors()), gram(proj.vectors()));
        for (a, b) in g0.iter().zip(&g1) {
            assert!((a - b).abs() < 1e-12);
        }
    }
    let shuffled = shuffle(&positive_subset(&gen_an_roots(4).unwrap()).unwrap(), 3).unwrap();
    let proj = project_isometric(&shuffled).unwrap();
    for (a, b) in gram(shuffled.vectors()).iter().zip(&gram(proj.vectors())) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn isometric_a2_is_regular_hexagon() {
    let proj = project_isometric(&gen_an_roots(2).unwrap()).unwrap();
    let set = proj.vectors();
    let mut angles: Vec<f64> = (0..6)
        .map(|k| {
            let r = set.dense_row(k);
            assert!((r[0].hypot(r[1]) - SQRT_2).abs() < 1e-12);
            r[1].atan2(r[0]).to_degrees().rem_euclid(360.0)
        })
        .collect();
    angles.sort_by(f64::total_cmp);
    for w in angles.windows(2) {
        assert!((w[1] - w[0] - 60.0).abs() < 1e-9);
    }
}

#[test]
fn isometric_keeps_60_degree_minimum() {
    for n in 2..=9 {
        let proj = project_isometric(&gen_an_roots(n).unwrap()).unwrap();
        assert!((min_angle(proj.vectors()) - 60.0).abs() < 1e-9, "rank {n}");
    }
}

#[test]
fn isometric_rejects_bad_inputs() {
    let a2 = gen_an_roots(2).unwrap();
    assert!(project_isometric(&project_drop(&a2).unwrap()).is_err());
    let custom = CenterConfiguration::custom(VectorSet::from_dense_rows(3, [[1.0, 0.0, 0.0]])).unwrap();
    assert!(matches!(project_isometric(&custom), Err(LscError::InvalidInput(_))));
    let off_plane = CenterConfiguration::with_family(Family::An, VectorSet::from_dense_rows(3, [[1.0, 1.0, 0.0]]))
        .unwrap();
    assert!(matches!(project_isometric(&off_plane), Err(LscError::InvalidInput(_))));
}

#[test]
fn positive_subset_counts_and_no_antipodes() {
    for (n, want) in [(2, 3), (3, 6), (9, 45)] {
        let p = positive_subset(&gen_an_roots(n).unwrap()).unwrap();
        assert_eq!(p.len(), want);
        assert_eq!(p.family(), Family::Anp);
        let rows = exact_rows(p.vectors());
        let set: HashSet<Vec<i64>> = rows.iter().cloned().collect();
        for r in &rows {
            let neg: Vec<i64> = r.iter().map(|v| -v).collect();
            assert!(!set.contains(&neg));
        }
    }
    let p = positive_subset(&gen_an_roots(2).unwrap()).unwrap();
    assert!(matches!(positive_subset(&p), Err(LscError::InvalidInput(_))));
}

#[test]
fn shuffle_is_seeded_permutation() {
    let a9 = gen_an_roots(9).unwrap();
    let s0 = shuffle(&a9, 0).unwrap();
    let s0b = shuffle(&a9, 0).unwrap();
    let s1 = shuffle(&a9, 1).unwrap();
    assert_eq!(s0, s0b);
    assert_ne!(s0.permutation(), s1.permutation());
    assert_eq!(s0.family(), Family::Anr);
    assert_eq!(s0.seed(), Some(0));

    let mut before = exact_rows(a9.vectors());
    let mut after = exact_rows(s0.vectors());
    before.sort();
    after.sort();
    assert_eq!(before, after);

    let perm = s0.permutation().unwrap();
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    assert_eq!(sorted, (0..90).collect::<Vec<_>>());
    for (k, &src) in perm.iter().enumerate() {
        assert_eq!(s0.vectors().dense_row(k), a9.vectors().dense_row(src));
        assert_eq!(s0.root_pairs().unwrap()[k], a9.root_pairs().unwrap()[src]);
    }
}

#[test]
fn interpolation_level_zero_is_identity() {
    let a3 = gen_an_roots(3).unwrap();
    assert_eq!(interpolate(&a3, 0).unwrap(), a3);
    assert!(matches!(interpolate(&a3, 2), Err(LscError::UnsupportedLevel(2))));
}

#[test]
fn interpolation_counts_and_parent_angles() {
    for n in 1..=9 {
        let base = gen_an_roots(n).unwrap();
        let interp = interpolate(&base, 1).unwrap();
        let added = interp.len() - base.len();
        assert_eq!(added, interpolated_count(n), "rank {n}");
        assert_eq!(interp.interpolation_level(), 1);
        // originals come first, unchanged
        for k in 0..base.len() {
            assert_eq!(interp.vectors().dense_row(k), base.vectors().dense_row(k));
        }
        let pairs: Vec<(usize, usize)> = interpolation_pairs(&base).unwrap().collect();
        assert_eq!(pairs.len(), added);
        for (m, &(a, b)) in pairs.iter().enumerate() {
            let v = base.len() + m;
            assert!((interp.vectors().norm_sq(v) - 2.0).abs() < 1e-12);
            assert!((angle_deg(interp.vectors(), v, a) - 30.0).abs() < 1e-9);
            assert!((angle_deg(interp.vectors(), v, b) - 30.0).abs() < 1e-9);
        }
    }
    assert_eq!(interpolate(&gen_an_roots(3).unwrap(), 1).unwrap().len(), 36);
}

#[test]
fn interpolated_min_angle_is_30_exhaustive() {
    for n in 2..=6 {
        let interp = interpolate(&gen_an_roots(n).unwrap(), 1).unwrap();
        assert!((min_angle(interp.vectors()) - 30.0).abs() < 1e-9, "rank {n}");
        let rows = exact_rows(interp.vectors());
        let unique: HashSet<_> = rows.iter().collect();
        assert_eq!(unique.len(), rows.len(), "interpolated vectors must be distinct");
    }
}

#[test]
fn interpolation_pairs_match_brute_force_on_shuffled_roots() {
    let cfg = shuffle(&gen_an_roots(4).unwrap(), 9).unwrap();
    let fast: HashSet<(usize, usize)> = interpolation_pairs(&cfg).unwrap().collect();
    let mut brute = HashSet::new();
    for a in 0..cfg.len() {
        for b in a + 1..cfg.len() {
            if cfg.vectors().dot(a, b) == 1.0 {
                brute.insert((a, b));
            }
        }
    }
    assert_eq!(fast, brute);
    assert!(interpolate(&cfg, 1).is_ok());
}

#[test]
fn interpolation_preconditions() {
    let a3 = gen_an_roots(3).unwrap();
    assert!(interpolate(&positive_subset(&a3).unwrap(), 1).is_err());
    assert!(matches!(interpolate(&project_drop(&a3).unwrap(), 1), Err(LscError::InvalidState(_))));
    let once = interpolate(&a3, 1).unwrap();
    assert!(matches!(interpolate(&once, 1), Err(LscError::InvalidState(_))));
}

#[test]
fn choose_centers_examples() {
    let a9 = project_drop(&gen_an_roots(9).unwrap()).unwrap();
    let c = choose_centers(&a9, 84).unwrap();
    assert_eq!((c.n_classes(), c.n_dim()), (84, 9));
    let all = choose_centers(&a9, 90).unwrap();
    for k in 0..90 {
        assert_eq!(all.row(k), a9.vectors().dense_row(k).as_slice());
    }
    match choose_centers(&gen_an_roots(2).unwrap(), 7) {
        Err(LscError::InsufficientVectors { requested: 7, available: 6 }) => {}
        other => panic!("unexpected {other:?}"),
    }
    assert!(choose_centers(&a9, 0).is_err());
}

#[test]
fn rotation_examples() {
    let c4 = gen_rotation_2d(4, 5.0, 1.0).unwrap();
    for (k, want) in [0.0f64, 90.0, 180.0, 270.0].iter().enumerate() {
        let r = c4.row(k);
        assert!((r[0].hypot(r[1]) - 5.0).abs() < 1e-12);
        let ang = r[1].atan2(r[0]).to_degrees().rem_euclid(360.0);
        assert!((ang - want).abs() < 1e-9 || (ang - want).abs() > 359.0);
        assert_eq!(c4.radius(k), 1.0);
    }

    let c8 = gen_rotation_2d(8, 5.0, 1.0).unwrap();
    let mut angles: Vec<f64> = (0..8)
        .map(|k| c8.row(k)[1].atan2(c8.row(k)[0]).to_degrees().rem_euclid(360.0))
        .collect();
    angles.sort_by(f64::total_cmp);
    for (k, a) in angles.iter().enumerate() {
        assert!((a - 45.0 * k as f64).abs() < 1e-9);
    }
    for k in 4..8 {
        assert_eq!(c8.radius(k), 0.5);
    }

    let c1 = gen_rotation_2d(1, 5.0, 2.0).unwrap();
    assert_eq!(c1.row(0), &[5.0, 0.0]);
    assert_eq!(c1.radius(0), 2.0);
}

#[test]
fn rotation_generation_law() {
    for g in 0..8u32 {
        let count = 4usize << g;
        let angles = rotation_angles(count);
        let mut sorted: Vec<f64> = angles.iter().map(|a| a.0).collect();
        sorted.sort_by(f64::total_cmp);
        let spacing = 90.0 / f64::from(1u32 << g);
        for w in sorted.windows(2) {
            assert!((w[1] - w[0] - spacing).abs() < 1e-9);
        }
        assert!(angles.iter().all(|a| a.1 <= g));
        assert_eq!(angles.iter().filter(|a| a.1 == g).count(), if g == 0 { 4 } else { count / 2 });
    }
}

#[test]
fn min_n_dim_examples() {
    assert_eq!(min_n_dim(300_000, 1).unwrap(), 67);
    assert_eq!(min_n_dim(600_000, 1).unwrap(), 85);
    assert_eq!(min_n_dim(1_281_000, 1).unwrap(), 109);
    assert_eq!(min_n_dim(1000, 0).unwrap(), 32);
    assert_eq!(min_n_dim(1, 0).unwrap(), 1);
    assert!(min_n_dim(10, 2).is_err());
}

#[test]
fn min_n_dim_matches_linear_scan() {
    // independent scan with plain arithmetic
    for k in 1..3000usize {
        for level in 0..=1u32 {
            let mut n = 1usize;
            loop {
                let cap = if level == 0 { n * (n + 1) } else { n * n * (n + 1) };
                if cap >= k {
                    break;
                }
                n += 1;
            }
            assert_eq!(min_n_dim(k, level).unwrap(), n);
        }
    }
}

#[test]
fn regenerate_round_trips_metadata() {
    let cfg = project_drop(&shuffle(&gen_an_roots(5).unwrap(), 42).unwrap()).unwrap();
    let again = regenerate(Family::Anr, 5, 30, Some(42), 0, Projection::DropLast).unwrap();
    assert_eq!(cfg, again);
    let pos = shuffle(&positive_subset(&gen_an_roots(5).unwrap()).unwrap(), 1).unwrap();
    assert_eq!(regenerate(Family::Anr, 5, 15, Some(1), 0, Projection::None).unwrap(), pos);
    assert!(regenerate(Family::Anr, 5, 7, Some(1), 0, Projection::None).is_err());
}

proptest! {
    #[test]
    fn chosen_shuffled_centers_are_roots(seed in any::<u64>(), n in 2usize..8, frac in 0.05f64..1.0) {
        let base = gen_an_roots(n).unwrap();
        let k = ((base.len() as f64 * frac).ceil() as usize).max(1);
        let c = choose_centers(&shuffle(&base, seed).unwrap(), k).unwrap();
        let originals: HashSet<Vec<i64>> = exact_rows(base.vectors()).into_iter().collect();
        for class in 0..k {
            let row: Vec<i64> = c.row(class).iter().map(|v| (v * 1e9).round() as i64).collect();
            prop_assert!(originals.contains(&row));
        }
    }

    #[test]
    fn min_n_dim_is_tight_and_monotone(k in 1usize..2_000_000, level in 0u32..=1) {
        let n = min_n_dim(k, level).unwrap();
        prop_assert!(capacity(n, level) >= k as u128);
        if n > 1 {
            prop_assert!(capacity(n - 1, level) < k as u128);
        }
        prop_assert!(min_n_dim(k + 1, level).unwrap() >= n);
    }
}
