//! One function per subcommand, each returning an [`ExperimentReport`].

use num_bigint::BigUint;
use num_traits::{One, Pow};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::Value;

use uconc_core::estimation::{estimator_error_exponent, estimator_mse, Estimator};
use uconc_core::math::log2;
use uconc_core::oracle::{
    build_state, isotypic_projectors, outcome_probabilities, random_unitary, verify_extracted_entanglement_for_state,
    OracleCaps, ORACLE_TOLERANCE,
};
use uconc_core::partitions::{
    count_young_indices, dim_u, dim_v_determinant, dim_v_product, enumerate_young_indices, log2_dim_v_accurate,
};
use uconc_core::postproc::{
    apply_kernel, average_constraint_lower_bound, generalized_yield, identity_threshold, optimal_under_average_constraint,
    optimal_under_worst_constraint, optimize_weighted_sum, shift_tail_bound_check, weighted_sum_by_lp, SupportLaw,
    TransitionKernel, YieldMeasure, LP_SUPPORT_MAX,
};
use uconc_core::protocols::{
    average_yield, bbps_average_yield_exact, bbps_expansion, cstar_bbps_gap, estimation_based_bound, exponent,
    hardy_n_copy_average_yield, hardy_qubit_expansion, log2_failure_probability, log2_strong_converse_probability,
    log2_total_infidelity, monte_carlo_failure, total_fidelity,
};
use uconc_core::rates::{rate_function_at, shannon_entropy, RateBranch, RateQuery};
use uconc_core::schur::{outcome_probability, yield_distribution, yield_distribution_with, DistributionOptions};
use uconc_core::{Error, SchmidtSpectrum};

use crate::cli::*;
use crate::error::{CliError, Result};
use crate::kernel_format;
use crate::parse::{parse_ladder, parse_measure, parse_spectrum};
use crate::report::{num, opt_num, text, Check, ExperimentReport, Table};

/// Largest number of types `C(n+d-1, d-1)` enumerated by `compare`.
pub const MAX_TYPES: f64 = 5e6;

pub fn run(cli: &Cli) -> Result<ExperimentReport> {
    let config = serde_json::json!({ "command": serde_json::to_value(&cli.command)?, "seed": cli.seed });
    match &cli.command {
        Command::Dims(a) => dims(a, config),
        Command::Measure(a) => measure(a, config),
        Command::Exponents(a) => exponents(a, cli.seed, config),
        Command::Compare(a) => compare(a, config),
        Command::Postproc(a) => postproc(a, config),
        Command::Estimate(a) => estimate(a, config),
        Command::OracleCheck(a) => oracle_check(a, cli.seed, config),
    }
}

fn provenance(p: &SchmidtSpectrum) -> String {
    if p.is_exact() {
        format!("spectrum ({p}) is rational: exact arithmetic where the size allows")
    } else {
        format!("spectrum ({p}) is floating point")
    }
}

pub fn dims(a: &DimsArgs, config: Value) -> Result<ExperimentReport> {
    if a.d == 0 {
        return Err(CliError::Argument("d must be at least 1".into()));
    }
    let count = count_young_indices(a.n, a.d);
    let cap = DistributionOptions::default().max_partitions;
    if count > cap {
        return Err(Error::ResourceCap(format!("{count} indices exceed the cap {cap}")).into());
    }
    let mut report = ExperimentReport::new("dims", config);
    let mut table = Table::new("dims", &["index", "dim_v", "dim_v_determinant", "dim_u", "log2_dim_v", "yield"]);
    let mut total = BigUint::from(0u32);
    for lambda in enumerate_young_indices(a.n, a.d) {
        let dv = dim_v_product(&lambda);
        let det = dim_v_determinant(&lambda).ok();
        if let Some(det) = det.as_ref().filter(|det| **det != dv) {
            report.checks.push(Check::new(format!("dim V formulas agree at {lambda}"), text(det), text(&dv), false));
        }
        let du = dim_u(&lambda);
        total += &du * &dv;
        let l = log2_dim_v_accurate(&lambda);
        table.push(vec![
            text(&lambda),
            text(&dv),
            det.map_or(Value::Null, |x| text(&x)),
            text(&du),
            num(l),
            if a.n == 0 { Value::Null } else { num(l / a.n as f64) },
        ]);
    }
    let expected = Pow::pow(BigUint::from(a.d), a.n);
    report.checks.push(Check::new("sum dimU*dimV = d^n", text(&total), text(&expected), total == expected));
    report.tables.push(table);
    Ok(report)
}

pub fn measure(a: &MeasureArgs, config: Value) -> Result<ExperimentReport> {
    let p = parse_spectrum(&a.spectrum)?;
    let options = DistributionOptions { max_partitions: a.max_partitions, exact_max_n: a.exact_max_n };
    let dist = yield_distribution_with(a.n, &p, &options)?;
    let mut report = ExperimentReport::new("measure", config);
    report.notes.push(provenance(&p));
    let mut table = Table::new(
        "outcomes",
        &["index", "probability", "exact_probability", "log2_probability", "dim_v", "log2_dim_v", "yield"],
    );
    for e in &dist.entries {
        table.push(vec![
            text(&e.index),
            num(e.probability),
            e.exact_probability.as_ref().map_or(Value::Null, text),
            num(e.log2_probability),
            e.dim_v.as_ref().map_or(Value::Null, text),
            num(e.log2_dim_v),
            num(e.yield_bits),
        ]);
    }
    match dist.exact_total() {
        Some(total) => {
            let one = total.is_one();
            report.checks.push(Check::new("total probability (exact)", text(&total), text("1"), one));
        }
        None => {
            let total = dist.total_probability();
            report.checks.push(Check::new("total probability", num(total), num(1.0), (total - 1.0).abs() <= 1e-9));
        }
    }
    report.tables.push(table);
    Ok(report)
}

fn ladder_results<T: Send>(ladder: &[u32], f: impl Fn(u32) -> Result<T> + Sync) -> Result<Vec<T>> {
    ladder.par_iter().map(|&n| f(n)).collect()
}

pub fn exponents(a: &ExponentsArgs, seed: u64, config: Value) -> Result<ExperimentReport> {
    let p = parse_spectrum(&a.spectrum)?;
    let ladder = parse_ladder(&a.n)?;
    let floats = p.to_f64();
    let query = RateQuery::new(&floats, a.rate)?;
    let target = rate_function_at(&floats, a.rate)?;
    let branch = match query.branch() {
        RateBranch::Above => "R >= H",
        RateBranch::Below => "R < H",
    };
    let rows = ladder_results(&ladder, |n| {
        let law = yield_distribution(n, &p)?;
        let lf = log2_failure_probability(&law, a.rate)?;
        let ls = log2_strong_converse_probability(&law, a.rate)?;
        let li = log2_total_infidelity(&law, a.rate)?;
        let f = total_fidelity(&law, a.rate)?;
        let mc = match a.monte_carlo {
            Some(samples) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).rotate_left(32));
                Some(monte_carlo_failure(&law, a.rate, samples, &mut rng)?)
            }
            None => None,
        };
        Ok(vec![
            Value::from(n),
            num(lf.exp2().min(1.0)),
            num(ls.exp2().min(1.0)),
            num(f),
            num(li.exp2().min(1.0)),
            num(exponent(lf, n)),
            num(exponent(ls, n)),
            num(exponent(li, n)),
            num(target),
            text(branch),
            opt_num(mc.map(|m| m.estimate)),
            opt_num(mc.map(|m| m.std_error)),
        ])
    })?;
    let mut table = Table::new(
        "exponents",
        &[
            "n",
            "failure",
            "strong_converse",
            "total_fidelity",
            "infidelity",
            "failure_exponent",
            "strong_converse_exponent",
            "infidelity_exponent",
            "rate_target",
            "branch",
            "mc_failure",
            "mc_std_error",
        ],
    );
    rows.into_iter().for_each(|r| table.push(r));
    let mut report = ExperimentReport::new("exponents", config);
    report.notes.push(provenance(&p));
    report.notes.push(format!("H(p) = {}; D(R||p) = {target} at R = {}", shannon_entropy(&floats), a.rate));
    report.tables.push(table);
    Ok(report)
}

fn type_count(n: u32, d: usize) -> f64 {
    // C(n + d - 1, d - 1)
    (1..d).map(|k| (n as f64 + k as f64) / k as f64).product()
}

pub fn compare(a: &CompareArgs, config: Value) -> Result<ExperimentReport> {
    let p = parse_spectrum(&a.spectrum)?;
    let ladder = parse_ladder(&a.n)?;
    let floats = p.to_f64();
    let positive = p.is_strictly_positive();
    let distinct = positive && !p.is_degenerate();
    let qubit = p.d() == 2 && distinct;
    for &n in &ladder {
        if type_count(n, p.d()) > MAX_TYPES {
            return Err(Error::ResourceCap(format!("n = {n}, d = {} has too many types", p.d())).into());
        }
        if let Some(c) = a.estimation_copies.filter(|&c| c >= n) {
            return Err(CliError::Argument(format!("estimation copies {c} must be below n = {n}")));
        }
    }
    let rows = ladder_results(&ladder, |n| {
        let universal = average_yield(&yield_distribution(n, &p)?);
        let bbps = bbps_average_yield_exact(n, &floats)?;
        let expansion = if positive { Some(bbps_expansion(n, &floats)?) } else { None };
        let gap = if distinct { Some(cstar_bbps_gap(n, &p)?) } else { None };
        let c = a.estimation_copies.unwrap_or_else(|| (n as f64).sqrt().floor() as u32).min(n - 1);
        let est = estimation_based_bound(n, c, &floats)?;
        let hardy = if positive { Some(hardy_n_copy_average_yield(n, &floats)?) } else { None };
        let hardy_exp = if qubit { Some(hardy_qubit_expansion(n, &floats)?) } else { None };
        let nf = n as f64;
        Ok(vec![
            Value::from(n),
            num(universal),
            num(bbps),
            opt_num(expansion),
            opt_num(expansion.map(|e| (bbps - e).abs() * nf)),
            opt_num(gap.map(|g| g.gap * nf)),
            opt_num(gap.map(|g| g.analytic_c)),
            Value::from(c),
            num(est),
            opt_num(hardy),
            opt_num(hardy_exp),
            opt_num(hardy.zip(hardy_exp).map(|(h, e)| (h - e).abs() * nf)),
        ])
    })?;
    let mut table = Table::new(
        "yields",
        &[
            "n",
            "universal",
            "bbps",
            "bbps_expansion",
            "bbps_residual_n",
            "gap_n",
            "analytic_c",
            "estimation_copies",
            "estimation_bound",
            "hardy",
            "hardy_expansion",
            "hardy_residual_n",
        ],
    );
    rows.into_iter().for_each(|r| table.push(r));
    let mut report = ExperimentReport::new("compare", config);
    report.notes.push(provenance(&p));
    if !distinct {
        report.notes.push("degenerate or non-positive spectrum: gap constant, expansions and known-state yield omitted where undefined".into());
    }
    report.tables.push(table);
    Ok(report)
}

pub fn postproc(a: &PostprocArgs, config: Value) -> Result<ExperimentReport> {
    let p = parse_spectrum(&a.spectrum)?;
    let f = parse_measure(&a.f)?;
    let law = SupportLaw::from_distribution(&yield_distribution(a.n, &p)?);
    let top = log2(p.d() as f64);
    let mut report = ExperimentReport::new("postproc", config);
    report.notes.push(provenance(&p));
    let mut summary = Table::new("summary", &["quantity", "value"]);
    let identity_value = generalized_yield(&law, &f)?;
    summary.push(vec![text("identity_value"), num(identity_value)]);

    let kernel: TransitionKernel = match a.constraint {
        Constraint::Weighted => {
            let best = optimize_weighted_sum(&law, &f, a.level)?;
            summary.push(vec![text("objective"), num(best.value)]);
            summary.push(vec![text("identity_optimal"), Value::Bool(best.kernel.is_identity())]);
            if f == YieldMeasure::Linear {
                let n0 = identity_threshold(a.level, p.d())?;
                summary.push(vec![text("identity_threshold_n0"), num(n0)]);
                if a.n as f64 >= n0 {
                    report.checks.push(Check::new(
                        "identity optimal above threshold",
                        Value::Bool(best.kernel.is_identity()),
                        num(n0),
                        best.kernel.is_identity(),
                    ));
                }
            }
            if law.support.len() <= LP_SUPPORT_MAX {
                let (exact, _) = weighted_sum_by_lp(&law, &f, a.level)?;
                let lp = uconc_core::math::rational_to_f64(&exact);
                report.checks.push(Check::new(
                    "row-separable optimum equals exact LP",
                    num(best.value),
                    num(lp),
                    (best.value - lp).abs() <= 1e-9,
                ));
            }
            best.kernel
        }
        Constraint::Worst => {
            let c = optimal_under_worst_constraint(&law, &f, a.level)?;
            summary.push(vec![text("value"), num(c.value)]);
            summary.push(vec![text("improvement"), num(c.improvement)]);
            report.checks.push(Check::at_most("worst-case distortion <= r", c.distortion.worst, a.level + 1e-12));
            if f == YieldMeasure::Linear {
                let bound = -log2(1.0 - a.level) / (a.n as f64 * top);
                report.checks.push(Check::at_most("improvement <= -log2(1-r)/(n log2 d)", c.improvement, bound + 1e-15));
            }
            c.kernel
        }
        Constraint::Average => {
            let c = optimal_under_average_constraint(&law, &f, a.level)?;
            summary.push(vec![text("value"), num(c.value)]);
            summary.push(vec![text("improvement"), num(c.improvement)]);
            report.checks.push(Check::at_most("average distortion <= r", c.distortion.average, a.level + 1e-12));
            report.checks.push(Check::at_most("improvement <= r (Lagrangian, λ -> 1)", c.improvement, a.level + 1e-12));
            let t = (p.entropy() + a.offset).min(top);
            let (lower, rate) = average_constraint_lower_bound(&law, &f, a.level, t)?;
            summary.push(vec![text("lower_bound_threshold"), num(t)]);
            summary.push(vec![text("lower_bound_rate"), num(rate)]);
            report.checks.push(Check::new(
                "improvement >= r(1 - f(H+c)) Pr{X <= H+c}",
                num(c.improvement),
                num(lower),
                c.improvement >= lower - 1e-12,
            ));
            if a.level > 0.0 && a.tail_c > 0.0 {
                let tail = shift_tail_bound_check(&law, &c.kernel, a.tail_c, a.level)?;
                report.checks.push(Check::new(
                    "Pr{shift >= c/n} <= r/(1 - 2^-c)",
                    num(tail.probability),
                    num(tail.bound),
                    tail.holds,
                ));
            }
            c.kernel
        }
        Constraint::Apply => {
            let path = a
                .kernel_in
                .as_ref()
                .ok_or_else(|| CliError::Argument("--constraint apply needs --kernel-in".into()))?;
            let k = kernel_format::read(path)?;
            summary.push(vec![text("value"), num(generalized_yield(&apply_kernel(&law, &k)?.claimed, &f)?)]);
            k
        }
    };
    let out = apply_kernel(&law, &kernel)?;
    summary.push(vec![text("distortion_worst"), num(out.distortion.worst)]);
    summary.push(vec![text("distortion_average"), num(out.distortion.average)]);
    summary.push(vec![text("upper_triangular"), Value::Bool(kernel.is_upper_triangular())]);
    let mut moves = Table::new("moves", &["input", "output", "probability"]);
    for &(x, y, q) in &out.joint {
        if (x - y).abs() > 1e-12 {
            moves.push(vec![num(x), num(y), num(q)]);
        }
    }
    if let Some(path) = &a.kernel_out {
        kernel_format::write(path, &kernel)?;
    }
    report.kernel = Some(kernel_format::to_text(&kernel));
    report.tables.push(summary);
    report.tables.push(moves);
    Ok(report)
}

pub fn estimate(a: &EstimateArgs, config: Value) -> Result<ExperimentReport> {
    let p = parse_spectrum(&a.spectrum)?;
    let ladder = parse_ladder(&a.n)?;
    let rows = ladder_results(&ladder, |n| {
        let tails = estimator_error_exponent(&p, a.delta, &[n], Estimator::Primary)?;
        let pt = tails.points[0];
        let mse = estimator_mse(&p, n)?;
        Ok(vec![
            Value::from(n),
            num(pt.lower_exponent),
            opt_num(tails.lower_target),
            num(pt.upper_exponent),
            opt_num(tails.upper_target),
            num(mse.primary),
            num(mse.type_entropy),
            num(mse.bound),
            num(mse.bound_literal),
        ])
    })?;
    let mut table = Table::new(
        "estimation",
        &[
            "n",
            "lower_exponent",
            "lower_target",
            "upper_exponent",
            "upper_target",
            "n_mse_primary",
            "n_mse_type",
            "bound",
            "bound_literal",
        ],
    );
    rows.into_iter().for_each(|r| table.push(r));
    let mut report = ExperimentReport::new("estimate", config);
    report.notes.push(provenance(&p));
    report.notes.push(
        "bound = Var(-log2 p); bound_literal = sum p_i (log2 p_i - H)^2, reported for comparison".into(),
    );
    report.tables.push(table);
    Ok(report)
}

pub fn oracle_check(a: &OracleArgs, seed: u64, config: Value) -> Result<ExperimentReport> {
    let p = parse_spectrum(&a.spectrum)?;
    let caps = OracleCaps::default();
    let state = build_state(&p, a.n)?;
    let mut report = ExperimentReport::new("oracle-check", config);
    report.notes.push(provenance(&p));
    report.checks.push(Check::at_most("state norm deviation", (state.norm() - 1.0).abs(), 1e-12));

    let projectors = isotypic_projectors(a.n, p.d(), &caps)?;
    let dim = projectors[0].matrix.nrows();
    let mut worst_idem = 0.0f64;
    let mut worst_sym = 0.0f64;
    let mut worst_trace = 0.0f64;
    let mut sum = projectors[0].matrix.clone() * 0.0;
    for proj in &projectors {
        worst_idem = worst_idem.max(proj.idempotence_residual());
        worst_sym = worst_sym.max(proj.symmetry_residual());
        worst_trace = worst_trace.max((proj.trace() - proj.expected_trace()).abs());
        sum += &proj.matrix;
    }
    for i in 0..dim {
        sum[(i, i)] -= 1.0;
    }
    let completeness = sum.amax();
    report.checks.push(Check::at_most("projector idempotence", worst_idem, ORACLE_TOLERANCE));
    report.checks.push(Check::at_most("projector self-adjointness", worst_sym, ORACLE_TOLERANCE));
    report.checks.push(Check::at_most("projector trace = dimU*dimV", worst_trace, 1e-8));
    report.checks.push(Check::at_most("projectors sum to identity", completeness, ORACLE_TOLERANCE));

    let mut table = Table::new("outcomes", &["index", "formula", "dense", "deviation"]);
    let dense = outcome_probabilities(&state, &caps)?;
    let mut worst = 0.0f64;
    for (lambda, q) in &dense {
        let formula = outcome_probability(lambda, &p)?;
        worst = worst.max((formula - q).abs());
        table.push(vec![text(lambda), num(formula), num(*q), num((formula - q).abs())]);
    }
    report.checks.push(Check::at_most("outcome law deviation", worst, ORACLE_TOLERANCE));

    let mut extraction = Table::new(
        "extraction",
        &["index", "probability", "dim_v", "rank", "expected_rank", "entropy", "expected_entropy", "product_residual"],
    );
    let mut all_pass = true;
    for (lambda, q) in &dense {
        if *q <= 1e-6 {
            continue;
        }
        let c = verify_extracted_entanglement_for_state(&state, &p, lambda)?;
        all_pass &= c.passes(1e-8);
        extraction.push(vec![
            text(lambda),
            num(c.probability),
            Value::from(c.dim_v),
            Value::from(c.rank),
            Value::from(c.expected_rank),
            num(c.entropy),
            num(c.expected_entropy),
            num(c.product_residual),
        ]);
    }
    report.checks.push(Check::new("extracted state is U x maximally mixed V", Value::Bool(all_pass), Value::Bool(true), all_pass));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_rotated = 0.0f64;
    let mut rotated_pass = true;
    for _ in 0..a.unitaries {
        let u = random_unitary(p.d(), &mut rng);
        let v = random_unitary(p.d(), &mut rng);
        let rotated = state.with_local_unitaries(&u, &v);
        for ((lambda, q0), (_, q1)) in dense.iter().zip(outcome_probabilities(&rotated, &caps)?) {
            worst_rotated = worst_rotated.max((q0 - q1).abs());
            if *q0 > 1e-6 {
                rotated_pass &= verify_extracted_entanglement_for_state(&rotated, &p, lambda)?.passes(1e-8);
            }
        }
    }
    report.checks.push(Check::at_most("local-unitary invariance of the outcome law", worst_rotated, ORACLE_TOLERANCE));
    report.checks.push(Check::new(
        "local-unitary invariance of the extracted state",
        Value::Bool(rotated_pass),
        Value::Bool(true),
        rotated_pass,
    ));
    report.tables.push(table);
    report.tables.push(extraction);
    Ok(report)
}
