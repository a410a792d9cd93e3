mod common;

use common::{matmul_ref, os_cycles, random_matrix, rng};
use fhecore::modarith::{ntt_primes, Modulus};
use fhecore::systolic::{
    cycle_count_closed_form, mmm_large, simulate_tile, simulate_tile_acc,
    simulate_tile_operand_stationary, simulate_tile_output_stationary, tile_schedule, Dataflow,
    SystolicConfig, SystolicExecutor,
};
use fhecore::{Matrix, ModMatMul, ModulusAssignment};
use proptest::prelude::*;

fn config() -> impl Strategy<Value = SystolicConfig> {
    (
        1usize..=16,
        1usize..=16,
        1usize..=8,
        1usize..=20,
        prop::bool::ANY,
    )
        .prop_map(|(r, c, t, k, ws)| SystolicConfig {
            rows: r,
            cols: c,
            pipeline_depth: t,
            k_dim: if ws { k.min(r) } else { k },
            dataflow: if ws {
                Dataflow::OperandStationary
            } else {
                Dataflow::OutputStationary
            },
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tile_is_functionally_exact(cfg in config(), seed in any::<u64>(), q_idx in 0usize..3) {
        let q = [17u64, 97, 2_013_265_921][q_idx];
        let m = ModulusAssignment::Shared(Modulus::new(q).unwrap());
        let mut r = rng(seed);
        let a = random_matrix(&mut r, cfg.rows, cfg.k_dim, q);
        let b = random_matrix(&mut r, cfg.k_dim, cfg.cols, q);
        let res = simulate_tile(&a, &b, &m, &cfg).unwrap();
        prop_assert_eq!(res.c, matmul_ref(&a, &b, |_, _| q));
        let (rr, cc, t, k) = (cfg.rows as u64, cfg.cols as u64, cfg.pipeline_depth as u64, cfg.k_dim as u64);
        let want = match cfg.dataflow {
            Dataflow::OutputStationary => rr + cc + k + t - 2,
            Dataflow::OperandStationary => rr + cc + k * t - 1,
        };
        prop_assert_eq!(res.cycles, want);
    }

    #[test]
    fn accumulator_is_added(cfg in config(), seed in any::<u64>()) {
        let q = 97;
        let m = ModulusAssignment::Shared(Modulus::new(q).unwrap());
        let mut r = rng(seed);
        let a = random_matrix(&mut r, cfg.rows, cfg.k_dim, q);
        let b = random_matrix(&mut r, cfg.k_dim, cfg.cols, q);
        let acc = random_matrix(&mut r, cfg.rows, cfg.cols, q);
        let res = simulate_tile_acc(&a, &b, Some(&acc), &m, &cfg).unwrap();
        let prod = matmul_ref(&a, &b, |_, _| q);
        let want = Matrix::from_fn(cfg.rows, cfg.cols, |i, j| (prod.get(i, j) + acc.get(i, j)) % q);
        prop_assert_eq!(res.c, want);
    }

    #[test]
    fn large_products_match(mm in 1usize..=40, nn in 1usize..=40, kk in 1usize..=40, seed in any::<u64>(), per_row in prop::bool::ANY) {
        let qs: Vec<u64> = ntt_primes(30, 2, mm).unwrap().iter().map(|m| m.value()).collect();
        let mods = if per_row {
            ModulusAssignment::PerRow(qs.iter().map(|&q| Modulus::new(q).unwrap()).collect())
        } else {
            ModulusAssignment::Shared(Modulus::new(qs[0]).unwrap())
        };
        let q_of = |r: usize| if per_row { qs[r] } else { qs[0] };
        let mut r = rng(seed);
        let a = random_matrix(&mut r, mm, kk, 1 << 30);
        let b = random_matrix(&mut r, kk, nn, 1 << 30);
        let cfg = SystolicConfig::default();
        let res = mmm_large(&a, &b, &mods, &cfg).unwrap();
        prop_assert_eq!(&res.c, &matmul_ref(&a, &b, |row, _| q_of(row)));
        let tiles = mm.div_ceil(16) * nn.div_ceil(8) * kk.div_ceil(16);
        prop_assert_eq!(tile_schedule(mm, nn, kk, &cfg).unwrap().len(), tiles);
        prop_assert_eq!(res.cycles, 44 * tiles as u64);

        let exec = SystolicExecutor::new(cfg);
        prop_assert_eq!(exec.matmul(&a, &b, &mods).unwrap(), res.c);
        prop_assert_eq!(exec.cycles(), res.cycles);
        prop_assert_eq!(exec.tiles(), tiles as u64);
    }
}

#[test]
fn default_tile_is_44_cycles() {
    let cfg = SystolicConfig::default();
    assert_eq!(cycle_count_closed_form(&cfg).unwrap(), 44);
    let m = ModulusAssignment::Shared(Modulus::new(97).unwrap());
    let mut r = rng(0);
    let a = random_matrix(&mut r, 16, 16, 97);
    let b = random_matrix(&mut r, 16, 8, 97);
    assert_eq!(
        simulate_tile_output_stationary(&a, &b, &m, &cfg)
            .unwrap()
            .cycles,
        44
    );
    assert_eq!(
        simulate_tile_operand_stationary(&a, &b, &m, &cfg)
            .unwrap()
            .cycles,
        119
    );
}

#[test]
fn closed_form_covers_square_sweep() {
    for r in 1..=16 {
        for c in 1..=16 {
            for t in 1..=8 {
                let cfg = SystolicConfig::square(r, c, t, Dataflow::OutputStationary);
                assert_eq!(cycle_count_closed_form(&cfg).unwrap(), os_cycles(r, c, t));
            }
        }
    }
    let ws = SystolicConfig {
        dataflow: Dataflow::OperandStationary,
        ..Default::default()
    };
    assert!(cycle_count_closed_form(&ws).is_err());
}

#[test]
fn invalid_tiles_are_rejected() {
    let m = ModulusAssignment::Shared(Modulus::new(97).unwrap());
    let cfg = SystolicConfig::default();
    assert!(simulate_tile(&Matrix::zeros(16, 15), &Matrix::zeros(16, 8), &m, &cfg).is_err());
    let zero = SystolicConfig { rows: 0, ..cfg };
    assert!(zero.validate().is_err());
    // preloaded B needs one PE row per reduction step
    let deep = SystolicConfig {
        k_dim: 17,
        dataflow: Dataflow::OperandStationary,
        ..cfg
    };
    assert!(simulate_tile(&Matrix::zeros(16, 17), &Matrix::zeros(17, 8), &m, &deep).is_err());
}
