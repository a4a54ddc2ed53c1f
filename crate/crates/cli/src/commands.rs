//! The experiment commands behind each CLI subcommand. Every command
//! resolves its configuration (including defaulted cutoffs and resolutions),
//! runs the core operations, and returns a [`Report`] whose metadata embeds
//! everything needed to reproduce the run from the file alone.

use rayon::prelude::*;
use relphase_core::density::{expectation, BasisLabel, DensityMatrix};
use relphase_core::fock::{self, coherent_amplitudes};
use relphase_core::lattice::{
    self, density_to_rel_center, displacement_average, factorization_check, shift_average_single,
    LatticeSpace, RelCenterState,
};
use relphase_core::linalg::{self, CMat, C64};
use relphase_core::phase::{self, is_phase_insensitive, phase_average, prior_independence_check};
use relphase_core::relphase::{
    default_rel_cutoff, default_two_mode_cutoff, factorization_fidelity, FactorizationReport,
};
use relphase_core::{default_cutoff, CircularPrior, Tolerances};

use crate::parse::{complex_spec, parse_lattice_prior, parse_prior, split_prior_list};
use crate::report::{Report, Value};
use crate::{CliError, CliResult};

/// `phase-average`: dephase a coherent state under a prior and tabulate the
/// number-basis weights, plus a prior-deviation summary over reference
/// observables.
pub fn phase_average_report(
    alpha: C64,
    prior_spec: &str,
    cutoff: Option<usize>,
    resolution: Option<usize>,
) -> CliResult<Report> {
    let tol = Tolerances::default();
    let cutoff = cutoff.unwrap_or_else(|| default_cutoff(alpha.norm_sqr()));
    let dim = cutoff + 1;
    let resolution = resolution.unwrap_or_else(|| phase::default_resolution(dim));
    let prior = parse_prior(prior_spec)?;

    let coh = coherent_amplitudes(alpha, cutoff, &tol)?;
    let tail_mass = coh.tail_mass();
    let psi = linalg::normalized(coh.amplitudes())?;
    let rho = DensityMatrix::from_pure(&psi, BasisLabel::Fock, &tol)?;
    let descriptor = format!("coherent alpha={}", complex_spec(alpha));
    let averaged = phase_average(&rho, &prior, resolution, &descriptor, &tol)?;

    let mut report = Report::new("phase-average", &["n", "p_n"]);
    report.push_meta("alpha", Value::str(complex_spec(alpha)));
    report.push_meta("prior", Value::str(prior_spec));
    report.push_meta("cutoff", Value::U64(cutoff as u64));
    report.push_meta("resolution", Value::U64(resolution as u64));
    report.push_tolerances(&tol);
    report.push_meta("input_tail_mass", Value::F64(tail_mass));
    report.push_meta("offdiag_norm", Value::F64(averaged.offdiag_norm));
    report.push_meta("purity", Value::F64(averaged.purity));

    // Prior-deviation table: the requested prior against flat and a point
    // mass, probed with the standard observables.
    let mut compare = vec![CircularPrior::flat(), CircularPrior::delta(0.0)];
    if !compare.iter().any(|p| p.describe() == prior.describe()) {
        compare.push(prior.clone());
    }
    let observables: [(&str, CMat); 3] = [
        ("number", fock::number_operator(dim)),
        ("quadrature_x", fock::quadrature_x(dim)),
        ("identity", CMat::identity(dim)),
    ];
    for (name, obs) in &observables {
        let sensitivity = is_phase_insensitive(obs, &tol)?;
        let deviation = prior_independence_check(&rho, obs, &compare, &tol)?;
        report.push_meta(
            &format!("commutator_norm_{name}"),
            Value::F64(sensitivity.commutator_norm),
        );
        report.push_meta(&format!("prior_deviation_{name}"), Value::F64(deviation));
    }

    for (n, p) in averaged.output.diagonal().iter().enumerate() {
        report.push_row(vec![Value::U64(n as u64), Value::F64(*p)]);
    }
    Ok(report)
}

/// `way-demo`: displacement averaging on the two-particle ring. Emits a
/// long-format table (`section,name,value`) with the invariance rows,
/// per-prior expectations, factorization residuals, the flat-average
/// identity check, and the SUM-gate diagnostics.
pub fn way_demo_report(d: usize, prior_list: &str) -> CliResult<Report> {
    let tol = Tolerances::default();
    let space = LatticeSpace::new(d)?;
    if d < 7 {
        return Err(CliError::Config(format!(
            "way-demo needs d >= 7 so the demo state fits away from the wrap-around cut (got {d})"
        )));
    }
    let specs = split_prior_list(prior_list);
    let mut priors = Vec::with_capacity(specs.len());
    for spec in &specs {
        priors.push((spec.clone(), parse_lattice_prior(spec, d)?));
    }

    // Demo state: a relative/center product with even labels so both
    // positions sit in a compact block near the origin (x₁ ∈ {1..4},
    // x₂ ∈ {0..3}); shifts of a few sites then move the position means
    // literally.
    let inv_sqrt2 = C64::new(0.5f64.sqrt(), 0.0);
    let inv_sqrt3 = C64::new((1.0f64 / 3.0).sqrt(), 0.0);
    let mut psi_r = vec![C64::ZERO; d];
    psi_r[0] = inv_sqrt2;
    psi_r[2] = inv_sqrt2;
    let mut psi_a = vec![C64::ZERO; d];
    psi_a[2] = inv_sqrt3;
    psi_a[4] = inv_sqrt3;
    psi_a[6] = inv_sqrt3;
    let rc = RelCenterState::product(space, &psi_r, &psi_a, &tol)?;
    let state = rc.to_positions();

    let pi = lattice::total_momentum(space);
    let observables: [(&str, Vec<f64>); 3] = [
        ("x_r", lattice::rel_position_diag(space)),
        ("x_1", lattice::abs_position_diag(space)),
        ("identity", vec![1.0; space.joint_dim()]),
    ];

    let mut report = Report::new("way-demo", &["section", "name", "value"]);
    report.push_meta("d", Value::U64(d as u64));
    report.push_meta("priors", Value::str(prior_list));
    report.push_meta(
        "state",
        Value::str("product psi_r=(|0>+|2>)/sqrt2, psi_a=(|2>+|4>+|6>)/sqrt3"),
    );
    report.push_tolerances(&tol);

    // One averaged state per prior, reused for expectations and
    // factorization checks.
    let mut averaged = Vec::with_capacity(priors.len());
    for (spec, weights) in &priors {
        let rho = displacement_average(&state, weights, &tol)?;
        averaged.push((spec.clone(), rho));
    }

    let mut rows: Vec<(String, String, f64)> = Vec::new();
    for (name, diag) in &observables {
        let obs = CMat::diag_real(diag);
        let commutator = CMat::commutator_max_with_diag(diag, &pi);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (spec, rho) in &averaged {
            let e = expectation(&obs, rho, &tol)?;
            rows.push(("expectation".into(), format!("{name}@{spec}"), e));
            lo = lo.min(e);
            hi = hi.max(e);
        }
        rows.push((
            "invariance".into(),
            format!("{name}:commutator_norm"),
            commutator,
        ));
        rows.push(("invariance".into(), format!("{name}:deviation"), hi - lo));
    }

    for (spec, rho) in &averaged {
        let rho_rc = density_to_rel_center(rho, space, &tol)?;
        let check = factorization_check(&rho_rc, space, &tol)?;
        rows.push((
            "factorization".into(),
            format!("{spec}:residual"),
            check.residual,
        ));
        rows.push((
            "factorization".into(),
            format!("{spec}:rel_purity"),
            check.rel_purity,
        ));
    }

    // Flat average of a position eigenstate must be exactly I/d.
    let mut eigenstate = vec![C64::ZERO; d];
    eigenstate[(d - 1) / 2] = C64::ONE;
    let flat = lattice::flat_shift_prior(space);
    let averaged_single = shift_average_single(space, &eigenstate, &flat, &tol)?;
    let mixed = DensityMatrix::maximally_mixed(d, BasisLabel::Lattice, &tol)?;
    rows.push((
        "flat-average".into(),
        "max_deviation_from_identity_over_d".into(),
        averaged_single.mat().max_abs_diff(mixed.mat()),
    ));

    // SUM gate: momentum legality and entangling power on a two-term
    // superposed control.
    let sum_comm = lattice::permutation_commutator_max(&lattice::sum_permutation(space), &pi);
    rows.push((
        "sum-gate".into(),
        "momentum_commutator_max".into(),
        sum_comm,
    ));
    let mut ctrl = vec![C64::ZERO; d];
    ctrl[1] = inv_sqrt2;
    ctrl[4] = inv_sqrt2;
    let mut target = vec![C64::ZERO; d];
    target[0] = C64::ONE;
    let superposed = RelCenterState::product(space, &ctrl, &target, &tol)?;
    let entropy = superposed.apply_sum().entanglement_entropy_bits();
    rows.push((
        "sum-gate".into(),
        "entropy_bits_two_term_superposition".into(),
        entropy,
    ));

    for (section, name, value) in rows {
        report.push_row(vec![
            Value::str(section),
            Value::str(name),
            Value::F64(value),
        ]);
    }
    Ok(report)
}

const POINT_COLUMNS: [&str; 10] = [
    "beta_mod",
    "beta_phase",
    "cutoff",
    "rel_cutoff",
    "condition_ratio",
    "fidelity",
    "purity",
    "target_mod",
    "target_phase",
    "loss",
];

fn point_row(r: &FactorizationReport) -> Vec<Value> {
    vec![
        Value::F64(r.beta.norm()),
        Value::F64(r.beta.arg()),
        Value::U64(r.cutoff as u64),
        Value::U64(r.rel_cutoff as u64),
        Value::F64(r.condition_ratio),
        Value::F64(r.fidelity_to_target),
        Value::F64(r.rel_state_purity),
        Value::F64(r.target_amplitude.norm()),
        Value::F64(r.target_amplitude.arg()),
        Value::F64(r.loss),
    ]
}

fn run_point(
    alpha: C64,
    beta: C64,
    cutoff: Option<usize>,
    rel_cutoff: Option<usize>,
    tol: &Tolerances,
) -> CliResult<FactorizationReport> {
    let cutoff = cutoff.unwrap_or_else(|| default_two_mode_cutoff(alpha, beta));
    let rel_cutoff = rel_cutoff.unwrap_or_else(|| default_rel_cutoff(alpha));
    Ok(factorization_fidelity(
        alpha, beta, cutoff, rel_cutoff, tol,
    )?)
}

/// `relphase-fidelity`: one factorization report row.
pub fn relphase_report(
    alpha: C64,
    beta: C64,
    cutoff: Option<usize>,
    rel_cutoff: Option<usize>,
) -> CliResult<Report> {
    let tol = Tolerances::default();
    let point = run_point(alpha, beta, cutoff, rel_cutoff, &tol)?;
    let mut report = Report::new("relphase-fidelity", &POINT_COLUMNS);
    report.push_meta("alpha", Value::str(complex_spec(alpha)));
    report.push_meta("beta", Value::str(complex_spec(beta)));
    report.push_tolerances(&tol);
    report.push_row(point_row(&point));
    Ok(report)
}

/// `sweep`: factorization reports over a range of `|β|`, computed in
/// parallel up to the `jobs` bound; rows are ordered by `|β|` regardless of
/// completion order.
pub fn sweep_report(
    alpha: C64,
    betas: &[f64],
    beta_phase: f64,
    cutoff: Option<usize>,
    rel_cutoff: Option<usize>,
    jobs: usize,
) -> CliResult<Report> {
    let tol = Tolerances::default();
    let mut ordered = betas.to_vec();
    ordered.sort_by(|a, b| a.partial_cmp(b).expect("range values are finite"));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?;
    let points: CliResult<Vec<FactorizationReport>> = pool.install(|| {
        ordered
            .par_iter()
            .map(|&b| {
                run_point(
                    alpha,
                    C64::from_polar(b, beta_phase),
                    cutoff,
                    rel_cutoff,
                    &tol,
                )
            })
            .collect()
    });
    let points = points?;

    let mut report = Report::new("sweep", &POINT_COLUMNS);
    report.push_meta("alpha", Value::str(complex_spec(alpha)));
    report.push_meta("beta_phase", Value::F64(beta_phase));
    report.push_meta("points", Value::U64(ordered.len() as u64));
    report.push_meta("jobs", Value::U64(jobs.max(1) as u64));
    report.push_tolerances(&tol);
    for point in &points {
        report.push_row(point_row(point));
    }
    Ok(report)
}
