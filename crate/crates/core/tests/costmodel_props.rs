mod common;

use common::{matmul_ref, random_matrix, rng};
use fhecore::costmodel::{
    compare_workload, estimate_kernel, fhec_path, mmm_count, ntt_kernel_call_count,
    recombine_chunks, split_to_chunks, tc_gemm_path, ExecPath, InstructionMix, KernelDescriptor,
    KernelKind, LatencyModel, NttStrategy, OperandWidth, WorkloadDescriptor,
};
use fhecore::modarith::{ntt_primes, Modulus};
use fhecore::ModulusAssignment;
use proptest::prelude::*;

fn width() -> impl Strategy<Value = OperandWidth> {
    prop::bool::ANY.prop_map(|w| {
        if w {
            OperandWidth::Int64
        } else {
            OperandWidth::Int32
        }
    })
}

fn serial_cycles(mix: &InstructionMix, lat: &LatencyModel) -> u64 {
    mix.fhec_ops * lat.fhec_latency
        + mix.gemm_ops * lat.gemm_latency
        + mix.scalar_ops.div_ceil(lat.scalar_throughput)
        + mix.ldst_ops.div_ceil(lat.ldst_throughput)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn both_paths_compute_the_same_product(m in 1usize..=40, n in 1usize..=40, k in 1usize..=40, w in width(), qi in 0usize..3, seed in any::<u64>()) {
        let q = [17, 97, ntt_primes(31, 2, 1).unwrap()[0].value()][qi];
        let md = Modulus::new(q).unwrap();
        let mut r = rng(seed);
        let a = random_matrix(&mut r, m, k, q);
        let b = random_matrix(&mut r, k, n, q);
        let lat = LatencyModel::default();
        let tc = tc_gemm_path(&a, &b, &md, w, &lat).unwrap();
        let fh = fhec_path(&a, &b, &ModulusAssignment::Shared(md), &lat).unwrap();
        let want = matmul_ref(&a, &b, |_, _| q);
        prop_assert_eq!(&tc.c, &want);
        prop_assert_eq!(&fh.c, &want);

        let mmms = (m.div_ceil(16) * n.div_ceil(16) * k.div_ceil(16)) as u64;
        prop_assert_eq!(mmm_count(m, n, k), mmms);
        let per = if w == OperandWidth::Int64 { 64 } else { 16 };
        prop_assert_eq!(tc.mix.gemm_ops, per * mmms);
        prop_assert_eq!(tc.mix.scalar_ops, 512 * mmms);
        prop_assert_eq!(fh.mix.fhec_ops, mmms);
        prop_assert_eq!(tc.cycles.total, serial_cycles(&tc.mix, &lat));
        prop_assert_eq!(fh.cycles.total, 44 * mmms);
    }

    #[test]
    fn chunks_round_trip(w in width(), seed in any::<u64>(), rows in 1usize..20, cols in 1usize..20) {
        let max = if w == OperandWidth::Int64 { u64::MAX } else { u32::MAX as u64 };
        let mut r = rng(seed);
        let t = fhecore::Matrix::from_fn(rows, cols, |_, _| rand::Rng::random_range(&mut r, 0..=max));
        let ch = split_to_chunks(&t, w);
        prop_assert_eq!(ch.len(), w.chunks());
        prop_assert_eq!(recombine_chunks(&ch), t);
    }

    #[test]
    fn estimates_follow_serial_sum(log in 8u32..=16, limbs in 1usize..=8, fl in 1u64..200, gl in 1u64..200, st in 1u64..64, lt in 1u64..64) {
        let lat = LatencyModel { fhec_latency: fl, gemm_latency: gl, scalar_throughput: st, ldst_throughput: lt };
        let n = 1usize << log;
        let mut ks = vec![
            KernelDescriptor::new(KernelKind::Elementwise, n).with_limbs(limbs),
            KernelDescriptor::new(KernelKind::Automorphism, n).with_limbs(limbs),
            KernelDescriptor::baseconv(n, limbs, 2 * limbs),
        ];
        if log % 4 == 0 {
            ks.push(KernelDescriptor::ntt(n, NttStrategy::WarpdriveRadix16).with_limbs(limbs));
        }
        if log % 2 == 0 {
            ks.push(KernelDescriptor { kind: KernelKind::Intt, ..KernelDescriptor::ntt(n, NttStrategy::TensorfheTile) });
        }
        for k in &ks {
            for path in [ExecPath::Fhec, ExecPath::TensorCore] {
                let rep = estimate_kernel(k, &lat, path).unwrap();
                prop_assert_eq!(rep.cycles.total, serial_cycles(&rep.mix, &lat));
                if path == ExecPath::Fhec {
                    prop_assert_eq!(rep.mix.gemm_ops, 0);
                    prop_assert_eq!(rep.mix.fhec_ops, rep.mmms);
                } else {
                    prop_assert_eq!(rep.mix.fhec_ops, 0);
                    prop_assert_eq!(rep.mix.gemm_ops, 16 * rep.mmms);
                }
            }
        }
    }

    #[test]
    fn repeat_scales_totals(rep in 1u64..50) {
        let lat = LatencyModel::default();
        let k = KernelDescriptor::ntt(1 << 12, NttStrategy::TensorfheTile).with_limbs(3);
        let one = compare_workload(&WorkloadDescriptor::new("x", vec![k.clone()]), &lat).unwrap();
        let many = compare_workload(&WorkloadDescriptor::new("x", vec![k.with_repeat(rep)]), &lat).unwrap();
        prop_assert_eq!(many.fhec.instructions, rep * one.fhec.instructions);
        prop_assert_eq!(many.tensor_core.cycles, rep * one.tensor_core.cycles);
        prop_assert!((many.instruction_ratio - one.instruction_ratio).abs() < 1e-12);
    }
}

#[test]
fn call_count_formulas() {
    for log in (8..=20).step_by(2) {
        let n = 1usize << log;
        let side = 1u64 << (log / 2);
        assert_eq!(
            ntt_kernel_call_count(n, NttStrategy::TensorfheTile).unwrap(),
            2 * (side / 16).pow(3)
        );
    }
    for log in [8u32, 12, 16, 20] {
        let n = 1u64 << log;
        let want = (log as u64 / 4) * n / 256;
        assert_eq!(
            ntt_kernel_call_count(n as usize, NttStrategy::WarpdriveRadix16).unwrap(),
            want
        );
    }
}

#[test]
fn baseconv_and_slot_kernels() {
    let lat = LatencyModel::default();
    let bc = KernelDescriptor::baseconv(1 << 16, 6, 26);
    let f = estimate_kernel(&bc, &lat, ExecPath::Fhec).unwrap();
    assert_eq!(f.mmms, 2 * 4096);
    assert_eq!(f.mix.scalar_ops, 6 << 16);
    let ew = KernelDescriptor::new(KernelKind::Elementwise, 1 << 16).with_limbs(4);
    let t = estimate_kernel(&ew, &lat, ExecPath::TensorCore).unwrap();
    assert_eq!(
        t.mix,
        InstructionMix {
            scalar_ops: 4 << 16,
            ..Default::default()
        }
    );
    let au = KernelDescriptor::new(KernelKind::Automorphism, 1 << 10).with_limbs(2);
    let t = estimate_kernel(&au, &lat, ExecPath::Fhec).unwrap();
    assert_eq!(
        t.mix,
        InstructionMix {
            scalar_ops: 1 << 10,
            ldst_ops: 2 << 10,
            ..Default::default()
        }
    );
}

#[test]
fn descriptor_validation() {
    assert!(KernelDescriptor::ntt(1 << 9, NttStrategy::TensorfheTile)
        .validate()
        .is_err());
    assert!(KernelDescriptor::baseconv(64, 0, 3).validate().is_err());
    let bad = KernelDescriptor {
        strategy: Some(NttStrategy::TensorfheTile),
        ..KernelDescriptor::baseconv(64, 2, 3)
    };
    assert!(bad.validate().is_err());
    assert!(compare_workload(
        &WorkloadDescriptor::new("empty", vec![]),
        &LatencyModel::default()
    )
    .is_err());
    let zero = LatencyModel {
        scalar_throughput: 0,
        ..Default::default()
    };
    assert!(zero.validate().is_err());
}

#[test]
fn descriptor_json_round_trip() {
    let text = r#"{"name":"w","illustrative":true,"metadata":{"logN":16,"L":26},
        "kernels":[{"kind":"ntt","n":65536,"limbs":4,"strategy":"warpdrive_radix16","width":64,"repeat":2},
                   {"kind":"baseconv","n":65536,"alpha":6,"L":26}]}"#;
    let w: WorkloadDescriptor = serde_json::from_str(text).unwrap();
    assert_eq!(w.kernels[0].width, OperandWidth::Int64);
    assert_eq!(w.kernels[0].repeat, 2);
    assert_eq!(w.kernels[1].limbs, 1);
    assert_eq!(w.metadata.log_n, Some(16));
    let back: WorkloadDescriptor =
        serde_json::from_value(serde_json::to_value(&w).unwrap()).unwrap();
    assert_eq!(back, w);
    let unknown = r#"{"name":"w","kernels":[{"kind":"ntt","n":256,"bogus":1}]}"#;
    assert!(serde_json::from_str::<WorkloadDescriptor>(unknown).is_err());
    let width16 = r#"{"name":"w","kernels":[{"kind":"ntt","n":256,"width":16}]}"#;
    assert!(serde_json::from_str::<WorkloadDescriptor>(width16).is_err());
}
