//! Oracle equivalence on tie-heavy inputs: probabilities drawn from a coarse
//! grid (including exact 0, 1/2 and 1) produce many exactly-equal candidate
//! scores, which is where tie-breaking rules earn their keep. Predictions may
//! legitimately differ from the brute-force argmin on ties; objectives must
//! not.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use mlca_core::fmeasure::maximize_f_abstain;
use mlca_core::hamming::{is_uncertainty_aligned, minimize_hamming};
use mlca_core::oracle::{brute_maximize_f, brute_minimize_hamming, brute_minimize_rank};
use mlca_core::rank::minimize_rank;
use mlca_core::sweep::PenaltyFamily;
use mlca_core::{MarginalVector, PenaltySpec};

const GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn gridded_mv(rng: &mut Xoshiro256PlusPlus, m: usize) -> MarginalVector {
    MarginalVector::new((0..m).map(|_| GRID[rng.gen_range(0..GRID.len())]).collect()).unwrap()
}

/// Costs from a coarse grid too, so score-vs-penalty ties are exact.
fn gridded_penalty(rng: &mut Xoshiro256PlusPlus, trial: usize, m: usize) -> PenaltySpec {
    let cost = GRID[rng.gen_range(0..GRID.len())];
    let family = if trial % 2 == 0 { PenaltyFamily::Sep } else { PenaltyFamily::Par };
    family.build(m, cost).unwrap()
}

#[test]
fn hamming_objective_matches_oracle_under_ties() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(81);
    for trial in 0..400 {
        let m = rng.gen_range(1..=6);
        let p = gridded_mv(&mut rng, m);
        let f = gridded_penalty(&mut rng, trial, m);
        let fast = minimize_hamming(&p, &f).unwrap();
        let (_, brute) = brute_minimize_hamming(&p, &f).unwrap();
        assert!(
            (fast.expected_loss - brute).abs() < 1e-9,
            "trial {trial} p={:?}: {} vs {brute}",
            p.as_slice(),
            fast.expected_loss
        );
        assert!(is_uncertainty_aligned(&p, &fast.prediction));
    }
}

#[test]
fn rank_objective_matches_oracle_under_ties() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(82);
    for trial in 0..400 {
        let m = rng.gen_range(1..=6);
        let p = gridded_mv(&mut rng, m);
        let f = gridded_penalty(&mut rng, trial, m);
        let fast = minimize_rank(&p, &f).unwrap();
        let (_, brute) = brute_minimize_rank(&p, &f).unwrap();
        assert!(
            (fast.expected_loss - brute).abs() < 1e-9,
            "trial {trial} p={:?}: {} vs {brute}",
            p.as_slice(),
            fast.expected_loss
        );
    }
}

#[test]
fn f_objective_matches_oracle_under_ties() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(83);
    for trial in 0..400 {
        let m = rng.gen_range(1..=6);
        let p = gridded_mv(&mut rng, m);
        let f = gridded_penalty(&mut rng, trial, m);
        let fast = maximize_f_abstain(&p, &f).unwrap();
        let (_, brute) = brute_maximize_f(&p, &f).unwrap();
        assert!(
            (fast.expected_value - brute).abs() < 1e-9,
            "trial {trial} p={:?}: {} vs {brute}",
            p.as_slice(),
            fast.expected_value
        );
    }
}

#[test]
fn uniform_half_instances() {
    // Everything exactly at maximal uncertainty.
    for m in 1..=6 {
        let p = MarginalVector::new(vec![0.5; m]).unwrap();
        for cost in [0.0, 0.25, 0.5] {
            let f = PenaltySpec::linear(m, cost).unwrap();
            let fast = minimize_hamming(&p, &f).unwrap();
            let (_, brute) = brute_minimize_hamming(&p, &f).unwrap();
            assert!((fast.expected_loss - brute).abs() < 1e-9);

            let fast = minimize_rank(&p, &f).unwrap();
            let (_, brute) = brute_minimize_rank(&p, &f).unwrap();
            assert!((fast.expected_loss - brute).abs() < 1e-9);

            let fast = maximize_f_abstain(&p, &f).unwrap();
            let (_, brute) = brute_maximize_f(&p, &f).unwrap();
            assert!((fast.expected_value - brute).abs() < 1e-9);
        }
    }
}
