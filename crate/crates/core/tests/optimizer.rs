mod common;

use common::{states, synthetic_ensemble};
use modeflux::optimizer::{
    best_diversity_set, diversity_eff, normalized_outage_slope, optimal_mode_count, optimal_transmit_set,
    transmit_set_objective, DiversitySearchOptions,
};
use modeflux::rates::AsymptoticAar;
use modeflux::{ChannelEnsemble, CouplingMatrix, ModeState};
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn value(e: &ChannelEnsemble, set: &[ModeState]) -> f64 {
    transmit_set_objective(e, set).unwrap().value().unwrap()
}

fn all_subsets(pool: &[ModeState], k: usize) -> Vec<Vec<ModeState>> {
    if k == 0 {
        return vec![vec![]];
    }
    if pool.len() < k {
        return vec![];
    }
    let mut with: Vec<Vec<ModeState>> = all_subsets(&pool[1..], k - 1)
        .into_iter()
        .map(|mut s| {
            s.insert(0, pool[0]);
            s
        })
        .collect();
    with.extend(all_subsets(&pool[1..], k));
    with
}

#[test]
fn matches_exhaustive_search() {
    let e = synthetic_ensemble(3, 60, 1);
    for n in 2..=5 {
        let choice = optimal_transmit_set(&e, n).unwrap();
        let mut best = (f64::NEG_INFINITY, vec![]);
        for s in all_subsets(e.states(), n) {
            let v = value(&e, &s);
            if v > best.0 {
                best = (v, s);
            }
        }
        assert_eq!(choice.set, best.1, "n = {n}");
        assert!((choice.objective.value().unwrap() - best.0).abs() < 1e-12 * best.0);
    }
}

#[test]
fn beats_random_subsets() {
    let e = synthetic_ensemble(10, 50, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [3, 5] {
        let choice = optimal_transmit_set(&e, n).unwrap();
        let best = choice.objective.value().unwrap();
        assert!((value(&e, &choice.set) - best).abs() < 1e-12 * best);
        for _ in 0..100 {
            let s: Vec<ModeState> = e.states().choose_multiple(&mut rng, n).copied().collect();
            assert!(value(&e, &s) <= best * (1.0 + 1e-12));
        }
    }
}

#[test]
fn invariant_under_realization_order() {
    let e = synthetic_ensemble(6, 40, 4);
    let order: Vec<usize> = (0..40).rev().collect();
    let p = e.permuted(&order).unwrap();
    let a = optimal_transmit_set(&e, 4).unwrap();
    let b = optimal_transmit_set(&p, 4).unwrap();
    assert_eq!(a.set, b.set);
    let (va, vb) = (a.objective.value().unwrap(), b.objective.value().unwrap());
    assert!((va - vb).abs() < 1e-12 * va);
}

#[test]
fn full_and_single_sets() {
    let e = synthetic_ensemble(10, 10, 5);
    let full = optimal_transmit_set(&e, 21).unwrap();
    assert_eq!(full.set, ModeState::range(10));
    assert!(optimal_transmit_set(&e, 22).is_err());
    assert!(optimal_transmit_set(&e, 0).is_err());
    let one = optimal_transmit_set(&e, 1).unwrap();
    assert_eq!(one.set.len(), 1);
    assert_eq!(one.objective, AsymptoticAar::NotInterferenceLimited);
}

#[test]
fn mode_count_picks_the_best_size() {
    let e = synthetic_ensemble(4, 30, 6);
    let best = optimal_mode_count(&e, &[2, 3, 4, 5]).unwrap();
    let v = best.objective.value().unwrap();
    for n in [2, 3, 4, 5] {
        let c = optimal_transmit_set(&e, n).unwrap();
        assert!(c.objective.value().unwrap() <= v);
    }
}

fn mirrored(e: &ChannelEnsemble) -> ChannelEnsemble {
    let st = e.states().to_vec();
    let n = st.len();
    let mirror: Vec<CouplingMatrix> = e
        .realizations()
        .iter()
        .map(|m| {
            let alpha = (0..n * n).map(|idx| m.at(n - 1 - idx / n, n - 1 - idx % n)).collect();
            CouplingMatrix::new(st.clone(), alpha).unwrap()
        })
        .collect();
    e.concat(&ChannelEnsemble::from_matrices(mirror).unwrap()).unwrap()
}

#[test]
fn symmetric_channels_give_mirror_equivalent_sets() {
    let e = mirrored(&synthetic_ensemble(5, 30, 7));
    for n in [3, 5, 7] {
        let c = optimal_transmit_set(&e, n).unwrap();
        let mut flip: Vec<ModeState> = c.set.iter().map(|s| ModeState(-s.ell())).collect();
        flip.sort();
        let (a, b) = (value(&e, &c.set), value(&e, &flip));
        assert!((a - b).abs() < 1e-9 * a, "n = {n}");
    }
}

#[test]
fn diversity_record_is_non_increasing() {
    let e = synthetic_ensemble(6, 200, 8);
    let tx = states(&[-6, -3, 0, 3, 6]);
    let search = best_diversity_set(&e, ModeState(0), &tx, DiversitySearchOptions::default()).unwrap();
    assert_eq!(search.record.len(), 7);
    for w in search.record.windows(2) {
        assert!(w[1].eff_db <= w[0].eff_db);
    }
    for step in &search.record {
        assert!(step.set.contains(&ModeState(0)));
        assert!(step.set.len() <= step.size);
        let v = diversity_eff(&e, ModeState(0), &step.set, &tx).unwrap();
        assert!((v - step.eff_db).abs() < 1e-9);
    }
    assert!(search.best.contains(&ModeState(0)));

    let one = best_diversity_set(
        &e,
        ModeState(0),
        &tx,
        DiversitySearchOptions {
            max_size: 1,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(one.best, vec![ModeState(0)]);
    assert!(best_diversity_set(&e, ModeState(1), &tx, DiversitySearchOptions::default()).is_err());
}

#[test]
fn outage_slope_ratio() {
    let curve = |a: f64| -> Vec<(f64, f64)> { (0..=20).map(|k| (k as f64, 10f64.powf(-a * k as f64 / 10.0))).collect() };
    let r = normalized_outage_slope(&curve(3.0), &curve(1.0), 10.0).unwrap();
    assert!((r - 3.0).abs() < 1e-12);
    assert!(normalized_outage_slope(&curve(3.0), &curve(1.0), 25.0).is_err());
}
