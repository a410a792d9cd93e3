//! Command implementations. Every randomized input comes from a ChaCha8
//! stream seeded with the run seed, so reports are reproducible.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use super::config::{
    BaseconvParams, CommandConfig, CostParams, ExecutorKind, NttParams, RunConfig, SelftestParams,
    SimulateParams,
};
use super::report::Report;
use super::CliError;
use crate::baseconv::BaseConvPlan;
use crate::costmodel::{
    compare_workload, fhec_path, mmm_count, ntt_kernel_call_count, tc_gemm_path, KernelDescriptor,
    LatencyModel, NttStrategy, OperandWidth, PathTotals, WorkloadDescriptor,
};
use crate::matrix::{Matrix, ModMatMul, ModulusAssignment, PlainMatMul};
use crate::modarith::{is_prime, ntt_primes, Modulus};
use crate::ntt::{negacyclic_convolve_ref, negacyclic_ntt_direct, ntt_direct, NttMode, NttPlan};
use crate::polyring::{
    apply_automorphism, apply_inverse_automorphism, rotation_group_order, AutomorphismMap, Domain,
    RnsPoly,
};
use crate::systolic::{
    cycle_count_closed_form, simulate_tile, Dataflow, SystolicConfig, SystolicExecutor,
};

type CmdResult<T> = std::result::Result<T, CliError>;
type SelfCheck = fn(usize, &mut ChaCha8Rng) -> crate::Result<bool>;

fn internal(e: crate::Error) -> CliError {
    CliError::Assertion(e.to_string())
}

fn invalid(key: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("key '{key}': {e}"))
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize, q: u64) -> Vec<u64> {
    (0..n).map(|_| rng.random_range(0..q)).collect()
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, q: u64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(0..q))
}

fn strategy_name(s: NttStrategy) -> &'static str {
    match s {
        NttStrategy::TensorfheTile => "tensorfhe_tile",
        NttStrategy::WarpdriveRadix16 => "warpdrive_radix16",
    }
}

pub fn run(cfg: &RunConfig) -> CmdResult<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = Report::new(cfg.command.command(), cfg.seed, cfg.command.echo());
    match &cfg.command {
        CommandConfig::Ntt(p) => run_ntt(p, &mut rng, &mut report)?,
        CommandConfig::Baseconv(p) => run_baseconv(p, &mut rng, &mut report)?,
        CommandConfig::Simulate(p) => run_simulate(p, &mut rng, &mut report)?,
        CommandConfig::Cost { params, workload } => {
            run_cost(params, workload.as_ref(), &mut report)?
        }
        CommandConfig::Selftest(p) => run_selftest(p, &mut rng, &mut report)?,
    }
    Ok(report)
}

// ---------------------------------------------------------------- ntt

const DIRECT_CHECK_MAX_N: usize = 4096;

fn run_ntt(p: &NttParams, rng: &mut ChaCha8Rng, report: &mut Report) -> CmdResult<()> {
    let n = 1usize << p.log_n;
    let modulus = match p.modulus {
        Some(q) => Modulus::new(q).map_err(|e| invalid("modulus", e))?,
        None => ntt_primes(p.modulus_bits, 2 * n, 1).map_err(|e| invalid("modulus_bits", e))?[0],
    };
    let plan = match p.n1 {
        Some(n1) => NttPlan::new(n, n1, n / n1, modulus, p.mode),
        None => NttPlan::balanced(n, modulus, p.mode),
    }
    .map_err(|e| invalid(if p.n1.is_some() { "n1" } else { "modulus" }, e))?;
    let q = modulus.value();

    report.push("N", n);
    report.push("N1", plan.n1());
    report.push("N2", plan.n2());
    report.push(
        "mode",
        match p.mode {
            NttMode::Cyclic => "cyclic",
            NttMode::Negacyclic => "negacyclic",
        },
    );
    report.push("q", q);
    report.push("omega", plan.omega());
    report.push("psi", plan.psi());
    report.push("trials", p.trials);

    let direct = n <= DIRECT_CHECK_MAX_N;
    let (mut roundtrip_bad, mut direct_bad) = (0u64, 0u64);
    for _ in 0..p.trials {
        let a = random_vec(rng, n, q);
        let a_hat = plan.forward(&a).map_err(internal)?;
        if plan.inverse(&a_hat).map_err(internal)? != a {
            roundtrip_bad += 1;
        }
        if direct {
            let want = match plan.psi() {
                Some(psi) => negacyclic_ntt_direct(&a, &modulus, psi),
                None => ntt_direct(&a, &modulus, plan.omega()),
            }
            .map_err(internal)?;
            if want != a_hat {
                direct_bad += 1;
            }
        }
    }
    report.push("roundtrip_mismatches", roundtrip_bad);
    report.push("direct_mismatches", direct.then_some(direct_bad));
    report.check("check.roundtrip", roundtrip_bad == 0);
    if direct {
        report.check("check.direct", direct_bad == 0);
    }

    // one forward transform on the simulated array
    if direct {
        let exec = SystolicExecutor::new(SystolicConfig::default());
        let a = random_vec(rng, n, q);
        let got = plan.forward_with(&a, &exec).map_err(internal)?;
        report.check(
            "check.systolic_forward",
            got == plan.forward(&a).map_err(internal)?,
        );
        report.push("systolic.tiles", exec.tiles());
        report.push("systolic.cycles", exec.cycles());
    }

    for s in [NttStrategy::TensorfheTile, NttStrategy::WarpdriveRadix16] {
        report.push(
            format!("fhec_calls.{}", strategy_name(s)),
            ntt_kernel_call_count(n, s).ok(),
        );
    }
    report.push("strategy", strategy_name(p.strategy));
    report.push("width", p.width.bits());
    let calls = ntt_kernel_call_count(n, p.strategy).ok();
    report.push("fhec_calls", calls);
    report.push("gemm_calls", calls.map(|c| c * p.width.gemms_per_mmm()));
    Ok(())
}

// ---------------------------------------------------------------- baseconv

fn moduli_from(list: &[u64], key: &str) -> CmdResult<Vec<Modulus>> {
    list.iter()
        .map(|&q| Modulus::new(q).map_err(|e| invalid(key, e)))
        .collect()
}

fn run_baseconv(p: &BaseconvParams, rng: &mut ChaCha8Rng, report: &mut Report) -> CmdResult<()> {
    let auto_count = p.source.is_none() as usize * p.alpha + p.target.is_none() as usize * p.l;
    let mut auto = if auto_count > 0 {
        ntt_primes(p.modulus_bits, 2 * p.n, auto_count).map_err(|e| invalid("modulus_bits", e))?
    } else {
        Vec::new()
    }
    .into_iter();
    let source = match &p.source {
        Some(list) => moduli_from(list, "source")?,
        None => auto.by_ref().take(p.alpha).collect(),
    };
    let target = match &p.target {
        Some(list) => moduli_from(list, "target")?,
        None => auto.collect(),
    };
    let plan = BaseConvPlan::new(&source, &target).map_err(|e| invalid("source", e))?;

    let alpha = source.len();
    let a = Matrix::from_fn(alpha, p.n, |r, _| rng.random_range(0..source[r].value()));
    let want = plan.convert_direct(&a).map_err(internal)?;

    report.push("n", p.n);
    report.push("alpha", alpha);
    report.push("L", target.len());
    report.push(
        "source",
        source.iter().map(|m| m.value()).collect::<Vec<_>>(),
    );
    report.push(
        "target",
        target.iter().map(|m| m.value()).collect::<Vec<_>>(),
    );
    report.push("mmms", mmm_count(target.len(), p.n, alpha));

    let (got, sim) = match p.executor {
        ExecutorKind::Plain => (
            plan.convert_matrix(&a, &PlainMatMul).map_err(internal)?,
            None,
        ),
        ExecutorKind::Systolic => {
            let exec = SystolicExecutor::new(SystolicConfig::default());
            let got = plan.convert_matrix(&a, &exec).map_err(internal)?;
            (got, Some((exec.tiles(), exec.cycles())))
        }
    };
    let mismatches = got
        .as_slice()
        .iter()
        .zip(want.as_slice())
        .filter(|(x, y)| x != y)
        .count();
    report.push(
        "executor",
        match p.executor {
            ExecutorKind::Plain => "plain",
            ExecutorKind::Systolic => "systolic",
        },
    );
    report.push("mismatches", mismatches);
    report.check("check.matrix_vs_direct", mismatches == 0);
    report.push("systolic.tiles", sim.map(|s| s.0));
    report.push("systolic.cycles", sim.map(|s| s.1));
    Ok(())
}

// ---------------------------------------------------------------- simulate

fn run_simulate(p: &SimulateParams, rng: &mut ChaCha8Rng, report: &mut Report) -> CmdResult<()> {
    let cfg = p.systolic_config();
    let m = Modulus::new(p.modulus).map_err(|e| invalid("modulus", e))?;
    let q = m.value();
    let mods = ModulusAssignment::Shared(m);

    report.push("rows", cfg.rows);
    report.push("cols", cfg.cols);
    report.push("pipeline_depth", cfg.pipeline_depth);
    report.push("k_dim", cfg.k_dim);
    report.push("dataflow", cfg.dataflow.name());
    report.push("q", q);

    let os = SystolicConfig {
        dataflow: Dataflow::OutputStationary,
        ..cfg
    };
    let ws = SystolicConfig {
        dataflow: Dataflow::OperandStationary,
        ..cfg
    };
    let ws_ok = cfg.k_dim <= cfg.rows;

    let mut mismatches = 0u64;
    let (mut os_cycles, mut ws_cycles) = (None, None);
    for _ in 0..p.trials.max(1) {
        let a = random_matrix(rng, cfg.rows, cfg.k_dim, q);
        let b = random_matrix(rng, cfg.k_dim, cfg.cols, q);
        let want = PlainMatMul.matmul(&a, &b, &mods).map_err(internal)?;
        let r = simulate_tile(&a, &b, &mods, &os).map_err(internal)?;
        mismatches += (r.c != want) as u64;
        os_cycles = Some(r.cycles);
        if ws_ok {
            let r = simulate_tile(&a, &b, &mods, &ws).map_err(internal)?;
            mismatches += (r.c != want) as u64;
            ws_cycles = Some(r.cycles);
        }
    }
    let tile_cycles = match cfg.dataflow {
        Dataflow::OutputStationary => os_cycles,
        Dataflow::OperandStationary => ws_cycles,
    };
    let closed = (cfg.k_dim == cfg.rows)
        .then(|| cycle_count_closed_form(&os).ok())
        .flatten();

    report.push("tile_cycles", tile_cycles);
    report.push("closed_form_cycles", closed);
    report.push("output_stationary_cycles", os_cycles);
    report.push("operand_stationary_cycles", ws_cycles);
    report.push("trials", p.trials.max(1));
    report.push("mismatches", mismatches);
    report.check("check.functional", mismatches == 0);
    if let (Some(c), Some(s)) = (closed, os_cycles) {
        report.check("check.closed_form", c == s);
    }
    if let (Some(o), Some(w)) = (os_cycles, ws_cycles) {
        report.check("check.dominance", w >= o);
    }
    Ok(())
}

// ---------------------------------------------------------------- cost

fn default_workload() -> WorkloadDescriptor {
    WorkloadDescriptor::new(
        "ntt-2^16",
        vec![KernelDescriptor::ntt(1 << 16, NttStrategy::TensorfheTile)],
    )
}

fn push_totals(report: &mut Report, prefix: &str, t: &PathTotals) {
    report.push(format!("{prefix}.fhec_ops"), t.mix.fhec_ops);
    report.push(format!("{prefix}.gemm_ops"), t.mix.gemm_ops);
    report.push(format!("{prefix}.scalar_ops"), t.mix.scalar_ops);
    report.push(format!("{prefix}.ldst_ops"), t.mix.ldst_ops);
    report.push(format!("{prefix}.instructions"), t.instructions);
    report.push(format!("{prefix}.cycles"), t.cycles);
}

fn run_cost(
    p: &CostParams,
    workload: Option<&WorkloadDescriptor>,
    report: &mut Report,
) -> CmdResult<()> {
    let lat = LatencyModel {
        fhec_latency: p.fhec_latency,
        gemm_latency: p.gemm_latency,
        scalar_throughput: p.scalar_throughput,
        ldst_throughput: p.ldst_throughput,
    };
    lat.validate()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let fallback = default_workload();
    let w = workload.unwrap_or(&fallback);
    let cmp = compare_workload(w, &lat).map_err(|e| invalid("workload", e))?;

    if let Value::Object(cfg) = &mut report.config {
        cfg.insert(
            "workload_descriptor".into(),
            serde_json::to_value(w).expect("workload serializes"),
        );
    }
    report.push("workload", cmp.workload.clone());
    report.push("illustrative", w.illustrative);
    report.push("cycle_model", cmp.cycle_model);
    for (i, k) in cmp.kernels.iter().enumerate() {
        let base = format!("kernel.{i}");
        report.push(format!("{base}.label"), k.kernel.clone());
        report.push(format!("{base}.repeat"), k.repeat);
        for (path, r) in [("fhec", &k.fhec), ("tensor_core", &k.tensor_core)] {
            report.push(format!("{base}.{path}.mmms"), r.mmms);
            report.push(format!("{base}.{path}.per_mmm_cycles"), r.per_mmm_cycles);
            report.push(format!("{base}.{path}.instructions"), r.mix.total());
            report.push(format!("{base}.{path}.cycles"), r.cycles.total);
        }
    }
    push_totals(report, "fhec", &cmp.fhec);
    push_totals(report, "tensor_core", &cmp.tensor_core);
    report.push("instruction_ratio", cmp.instruction_ratio);
    report.push("cycle_ratio", cmp.cycle_ratio);
    Ok(())
}

// ---------------------------------------------------------------- selftest

fn run_selftest(p: &SelftestParams, rng: &mut ChaCha8Rng, report: &mut Report) -> CmdResult<()> {
    let trials = p.trials.max(1);
    report.push("trials", trials);
    let checks: [(&str, SelfCheck); 9] = [
        ("barrett", st_barrett),
        ("ntt_4step_vs_direct", st_ntt_direct),
        ("ntt_roundtrip", st_ntt_roundtrip),
        ("negacyclic_multiply_systolic", st_negacyclic_multiply),
        ("baseconv_matrix_vs_direct", st_baseconv),
        ("tc_vs_fhec", st_tc_vs_fhec),
        ("automorphism", st_automorphism),
        ("cycle_formula", st_cycle_formula),
        ("dataflow_dominance", st_dominance),
    ];
    for (name, f) in checks {
        let ok = f(trials, rng).map_err(internal)?;
        report.check(format!("check.{name}"), ok);
    }
    Ok(())
}

fn st_barrett(trials: usize, rng: &mut ChaCha8Rng) -> crate::Result<bool> {
    for q in (3..256u64).filter(|&q| is_prime(q)) {
        let m = Modulus::new(q)?;
        for a in 0..q {
            for b in 0..q {
                if m.reduce(a * b) != (a * b) % q {
                    return Ok(false);
                }
            }
        }
    }
    let m = ntt_primes(31, 2, 1)?[0];
    Ok((0..trials * 500).all(|_| {
        let x = rng.random::<u64>() >> 2;
        m.reduce(x) == x % m.value()
    }))
}

fn st_ntt_direct(trials: usize, rng: &mut ChaCha8Rng) -> crate::Result<bool> {
    for (n, n1) in [(16, 4), (64, 8), (64, 16), (256, 16)] {
        for mode in [NttMode::Cyclic, NttMode::Negacyclic] {
            let m = ntt_primes(20, 2 * n, 1)?[0];
            let plan = NttPlan::new(n, n1, n / n1, m, mode)?;
            for _ in 0..trials {
                let a = random_vec(rng, n, m.value());
                let want = match plan.psi() {
                    Some(psi) => negacyclic_ntt_direct(&a, &m, psi)?,
                    None => ntt_direct(&a, &m, plan.omega())?,
                };
                if plan.forward(&a)? != want {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn st_ntt_roundtrip(trials: usize, rng: &mut ChaCha8Rng) -> crate::Result<bool> {
    for log in [2, 5, 8, 10] {
        let n = 1usize << log;
        let plan = NttPlan::balanced(n, ntt_primes(30, 2 * n, 1)?[0], NttMode::Negacyclic)?;
        for _ in 0..trials {
            let a = random_vec(rng, n, plan.modulus().value());
            if plan.inverse(&plan.forward(&a)?)? != a {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn st_negacyclic_multiply(trials: usize, rng: &mut ChaCha8Rng) -> crate::Result<bool> {
    let n = 64;
    let m = ntt_primes(30, 2 * n, 1)?[0];
    let plan = NttPlan::balanced(n, m, NttMode::Negacyclic)?;
    let exec = SystolicExecutor::new(SystolicConfig::default());
    for _ in 0..trials.min(8) {
        let a = random_vec(rng, n, m.value());
        let b = random_vec(rng, n, m.value());
        if plan.multiply_with(&a, &b, &exec)? != negacyclic_convolve_ref(&a, &b, &m)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn st_baseconv(trials: usize, rng: &mut ChaCha8Rng) -> crate::Result<bool> {
    let (n, alpha, l) = (32, 3, 4);
    let primes = ntt_primes(28, 2 * n, alpha + l)?;
    let plan = BaseConvPlan::new(&primes[..alpha], &primes[alpha..])?;
    let exec = SystolicExecutor::new(SystolicConfig::default());
    for _ in 0..trials.min(8) {
        let a = Matrix::from_fn(alpha, n, |r, _| rng.random_range(0..primes[r].value()));
        let direct = plan.convert_direct(&a)?;
        if plan.convert_matrix(&a, &exec)? != direct {
            return Ok(false);
        }
        // each output column is the CRT value plus e * P* for one e in [0, alpha)
        let p_star = plan.p_star();
        for x in 0..n {
            let crt = (0..alpha)
                .map(|j| BigUint::from(a.get(j, x)) * plan.inv_p_hat()[j] * &plan.p_hat()[j])
                .sum::<BigUint>()
                % p_star;
            let hit = (0..alpha as u64).any(|e| {
                let v = &crt + p_star * e;
                (0..l).all(|i| {
                    let q = plan.target()[i].value();
                    (&v % q) == BigUint::from(direct.get(i, x))
                })
            });
            if !hit {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn st_tc_vs_fhec(trials: usize, rng: &mut ChaCha8Rng) -> crate::Result<bool> {
    let lat = LatencyModel::default();
    for q in [17, 97, ntt_primes(31, 2, 1)?[0].value()] {
        let m = Modulus::new(q)?;
        for width in [OperandWidth::Int32, OperandWidth::Int64] {
            for _ in 0..trials.min(8) {
                let a = random_matrix(rng, 16, 16, q);
                let b = random_matrix(rng, 16, 16, q);
                let tc = tc_gemm_path(&a, &b, &m, width, &lat)?;
                let fh = fhec_path(&a, &b, &ModulusAssignment::Shared(m), &lat)?;
                if tc.c != fh.c {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn st_automorphism(_trials: usize, rng: &mut ChaCha8Rng) -> crate::Result<bool> {
    let n = 64;
    let m = ntt_primes(30, 2 * n, 1)?[0];
    let order = rotation_group_order(n) as i64;
    let poly = RnsPoly::new(
        vec![m],
        vec![random_vec(rng, n, m.value())],
        Domain::Evaluation,
    )?;
    for r1 in 0..order {
        let f = AutomorphismMap::new(r1, n)?;
        if !f.is_bijection() {
            return Ok(false);
        }
        if apply_inverse_automorphism(&apply_automorphism(&poly, &f)?, &f)? != poly {
            return Ok(false);
        }
        let r2 = rng.random_range(0..order);
        let g = AutomorphismMap::new(r2, n)?;
        let both = apply_automorphism(&apply_automorphism(&poly, &f)?, &g)?;
        if both != apply_automorphism(&poly, &AutomorphismMap::new(r1 + r2, n)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn tile_cycles(cfg: &SystolicConfig, rng: &mut ChaCha8Rng) -> crate::Result<u64> {
    let m = Modulus::new(97)?;
    let a = random_matrix(rng, cfg.rows, cfg.k_dim, 97);
    let b = random_matrix(rng, cfg.k_dim, cfg.cols, 97);
    Ok(simulate_tile(&a, &b, &ModulusAssignment::Shared(m), cfg)?.cycles)
}

fn st_cycle_formula(_trials: usize, rng: &mut ChaCha8Rng) -> crate::Result<bool> {
    for r in 1..=8 {
        for c in 1..=8 {
            for t in 1..=6 {
                let cfg = SystolicConfig::square(r, c, t, Dataflow::OutputStationary);
                if tile_cycles(&cfg, rng)? != cycle_count_closed_form(&cfg)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(tile_cycles(&SystolicConfig::default(), rng)? == 44)
}

fn st_dominance(_trials: usize, rng: &mut ChaCha8Rng) -> crate::Result<bool> {
    for r in 1..=8 {
        for c in 1..=8 {
            for t in 2..=6 {
                let os = SystolicConfig::square(r, c, t, Dataflow::OutputStationary);
                let ws = SystolicConfig {
                    dataflow: Dataflow::OperandStationary,
                    ..os
                };
                if tile_cycles(&ws, rng)? < tile_cycles(&os, rng)? {
                    return Ok(false);
                }
            }
        }
    }
    let os = SystolicConfig::default();
    let ws = SystolicConfig {
        dataflow: Dataflow::OperandStationary,
        ..os
    };
    Ok(tile_cycles(&ws, rng)? > tile_cycles(&os, rng)?)
}
