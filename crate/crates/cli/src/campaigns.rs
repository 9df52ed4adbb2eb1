//! Seeded verification campaigns.
//!
//! Trial `i` draws everything from its own child stream `SeedStream(seed)
//! .trial(i)`, so results do not depend on how rayon schedules the work.
//! Trial indices run over dimensions first: dimension `dims[j]` owns indices
//! `j·trials .. (j+1)·trials`.

use std::collections::BTreeMap;

use qentropy::entropy::{entropy, entropy_of_spectrum, expected_entropy, margin};
use qentropy::majorization::{check_fan, check_holevo, check_pinching_double, check_schur_majorization};
use qentropy::matcore::{c64, Spectrum};
use qentropy::povm::{apply_povm, counterexample_1, counterexample_2, purity_preserving_basis, PPPOVM_TOL};
use qentropy::processes::{
    decohere, ensemble_average, is_trivial_decoherence_for, is_trivial_probing_for, luders, observe, response_gram,
};
use qentropy::sampling::{
    ginibre, random_block_sizes, random_density, random_diagonal_partition, random_gram, random_hermitian,
    random_pppovm, random_probing, random_projector_partition, random_pure, random_weights, SeedStream,
};
use qentropy::states::{density_from_pure, gram_from_projectors, purity};
use qentropy::{ComplexMatrix, DensityMatrix, EntropyFunctional, OutcomeEnsemble, Povm, ProbingMatrix};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::report::{bump, MarginRecord, Report, NEAR_TRIVIAL_MARGIN};
use crate::CliError;

/// Spectral distance under which a process counts as trivial.
pub const TRIVIALITY_TOL: f64 = 1e-8;
/// Log-det campaigns skip states with a smaller eigenvalue.
pub const SINGULAR_FLOOR: f64 = 1e-12;
/// Entrywise tolerance for the exact identities (consistency, Lüders).
pub const IDENTITY_TOL: f64 = 1e-12;
/// Entrywise tolerance when reproducing the reference counterexamples.
pub const REPRODUCTION_TOL: f64 = 1e-12;
/// Required margin in the curated strictness set.
pub const STRICT_MARGIN: f64 = 1e-6;

/// Placeholder functional name for records that are not entropy comparisons.
const NO_FUNCTIONAL: &str = "-";

#[derive(Clone, Debug)]
pub struct CampaignConfig {
    pub seed: u64,
    pub dims: Vec<usize>,
    /// Trials per dimension.
    pub trials: usize,
    pub functionals: Vec<EntropyFunctional>,
    pub tol: f64,
    pub response_dim: Option<usize>,
    pub ensemble_size: Option<usize>,
}

impl CampaignConfig {
    pub fn new(seed: u64, dims: Vec<usize>, trials: usize) -> Self {
        Self {
            seed,
            dims,
            trials,
            functionals: EntropyFunctional::builtins(),
            tol: 1e-9,
            response_dim: None,
            ensemble_size: None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(CliError::Usage("--dim values must be positive".into()));
        }
        if self.trials == 0 {
            return Err(CliError::Usage("--trials must be positive".into()));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(CliError::Usage("--tol must be a finite nonnegative number".into()));
        }
        if self.functionals.is_empty() {
            return Err(CliError::Usage("at least one --entropy selector is required".into()));
        }
        if self.response_dim == Some(0) {
            return Err(CliError::Usage("--response-dim must be positive".into()));
        }
        if matches!(self.ensemble_size, Some(k) if k == 0) {
            return Err(CliError::Usage("--ensemble-size must be positive".into()));
        }
        Ok(())
    }

    pub fn flags(&self) -> serde_json::Value {
        json!({
            "dims": self.dims,
            "trials": self.trials,
            "entropy": self.functionals.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "tol": self.tol,
            "response_dim": self.response_dim,
            "ensemble_size": self.ensemble_size,
        })
    }

    fn plan(&self) -> Vec<(u64, usize)> {
        self.dims
            .iter()
            .enumerate()
            .flat_map(|(j, &n)| (0..self.trials).map(move |t| ((j * self.trials + t) as u64, n)))
            .collect()
    }
}

/// Records and counter increments produced by one trial.
#[derive(Debug, Default)]
pub struct TrialOutcome {
    pub records: Vec<MarginRecord>,
    pub counters: Vec<String>,
}

impl TrialOutcome {
    fn count(&mut self, name: impl Into<String>) {
        self.counters.push(name.into());
    }
}

fn run<F>(cfg: &CampaignConfig, trial: F) -> Result<(Vec<MarginRecord>, BTreeMap<String, u64>), CliError>
where
    F: Fn(u64, usize, &mut ChaCha20Rng) -> Result<TrialOutcome, CliError> + Sync,
{
    cfg.validate()?;
    let root = SeedStream::new(cfg.seed);
    let outcomes: Vec<TrialOutcome> = cfg
        .plan()
        .par_iter()
        .map(|&(index, n)| trial(index, n, &mut root.trial(index).rng()))
        .collect::<Result<_, _>>()?;
    let mut records = Vec::new();
    let mut counters = BTreeMap::new();
    for o in outcomes {
        records.extend(o.records);
        for c in &o.counters {
            bump(&mut counters, c);
        }
    }
    counters.insert("trials".into(), (cfg.dims.len() * cfg.trials) as u64);
    Ok((records, counters))
}

fn is_singular(rho: &DensityMatrix) -> bool {
    rho.spectrum().min() < SINGULAR_FLOOR
}

/// `strict`, `near-trivial`, `trivial` or `violation`.
fn classify(r: &MarginRecord) -> &'static str {
    if r.violation {
        "violation"
    } else if r.trivial {
        "trivial"
    } else if r.margin <= NEAR_TRIVIAL_MARGIN {
        "near-trivial"
    } else {
        "strict"
    }
}

/// Both S-theorem inequalities for one `(ρ, S)` pair, every functional, plus
/// the entrywise consistency `Σ_k p_k ρ^(k) = ρ ∘ S S†`.
///
/// Sides: `left` is `Σ p_k S(ρ^(k)) ≤ S(ρ)`, `right` is `S(ρ) ≤ S(ρ ∘ S S†)`.
pub fn evaluate_s_theorem(
    trial: u64,
    rho: &DensityMatrix,
    s: &ProbingMatrix,
    functionals: &[EntropyFunctional],
    tol: f64,
) -> Result<TrialOutcome, CliError> {
    let n = rho.dim();
    let ens = observe(rho, s)?;
    let e = response_gram(s);
    let dec = decohere(rho, &e)?;
    let mut out = TrialOutcome::default();

    let gap = ensemble_average(&ens)?.matrix().max_abs_diff(dec.matrix());
    out.records
        .push(MarginRecord::new(trial, n, NO_FUNCTIONAL, "consistency").inequality(
            gap,
            IDENTITY_TOL,
            IDENTITY_TOL - gap,
            0.0,
        ));

    let trivial_left = is_trivial_probing_for(rho, s, TRIVIALITY_TOL)?;
    let trivial_right = is_trivial_decoherence_for(rho, &e, TRIVIALITY_TOL)?;
    let singular = is_singular(rho);
    for f in functionals {
        if singular && matches!(f, EntropyFunctional::LogDet) {
            out.count("skipped-singular");
            continue;
        }
        let name = f.to_string();
        let mid = entropy(rho, f)?;
        let low = expected_entropy(&ens, f)?;
        let high = entropy(&dec, f)?;
        let left = MarginRecord::new(trial, n, &name, "left")
            .inequality(low, mid, margin(low, mid), tol)
            .trivial(trivial_left);
        let right = MarginRecord::new(trial, n, &name, "right")
            .inequality(mid, high, margin(mid, high), tol)
            .trivial(trivial_right);
        for r in [left, right] {
            out.count(format!("{}/{}", r.side, classify(&r)));
            out.records.push(r);
        }
    }
    Ok(out)
}

/// Random `ρ` and probing `S` (`n × m`, `m` = response dimension, default
/// `n`), checked on both sides of the S-theorem.
pub fn verify_s_theorems(cfg: &CampaignConfig) -> Result<Report, CliError> {
    let (records, counters) = run(cfg, |trial, n, rng| {
        let rho = random_density(n, rng);
        let s = random_probing(n, cfg.response_dim.unwrap_or(n), rng);
        evaluate_s_theorem(trial, &rho, &s, &cfg.functionals, cfg.tol)
    })?;
    Ok(Report::build(
        "verify-s-theorems",
        Some(cfg.seed),
        cfg.flags(),
        records,
        counters,
        0,
    ))
}

/// Record for a prefix-margin comparison. The margin is the smallest proper
/// prefix margin; the violation flag also covers unequal totals.
fn prefix_record(trial: u64, n: usize, side: &str, margins: &[f64], tol: f64) -> MarginRecord {
    let (total, proper) = margins.split_last().map_or((0.0, &[][..]), |(t, p)| (*t, p));
    let mut r = MarginRecord::new(trial, n, "majorization", side);
    r.margin = if proper.is_empty() {
        0.0
    } else {
        proper.iter().copied().fold(f64::INFINITY, f64::min)
    };
    r.lhs = Some(total);
    r.violation = total.abs() > tol || proper.iter().any(|&m| m < -tol);
    r
}

/// Schur, pinching (both halves) and Fan majorization on random inputs.
///
/// The pinching input is a Wishart matrix `G G†`: the block-sum half of the
/// double majorization needs positive semidefinite `H`.
pub fn majorization(cfg: &CampaignConfig) -> Result<Report, CliError> {
    let (records, counters) = run(cfg, |trial, n, rng| {
        let mut out = TrialOutcome::default();

        let rho = random_density(n, rng);
        let d = cfg.response_dim.unwrap_or_else(|| rng.random_range(1..=n));
        let schur = check_schur_majorization(&rho, &random_gram(n, d, rng))?;
        out.records
            .push(prefix_record(trial, n, "schur", &schur.margins, cfg.tol));

        let g = ginibre(n, n, rng);
        let h = (&g * &g.adjoint()).hermitian_part();
        let blocks = random_block_sizes(n, rng);
        let ps = random_projector_partition(n, &blocks, rng)?;
        let pinch = check_pinching_double(&h, &ps)?;
        let (left, right) = pinch.margins.split_at(n);
        out.records
            .push(prefix_record(trial, n, "pinching-blocks", left, cfg.tol));
        out.records.push(prefix_record(trial, n, "pinching", right, cfg.tol));

        let fan = check_fan(&random_hermitian(n, rng), &random_hermitian(n, rng))?;
        out.records.push(prefix_record(trial, n, "fan", &fan.margins, cfg.tol));
        Ok(out)
    })?;
    Ok(Report::build(
        "majorization",
        Some(cfg.seed),
        cfg.flags(),
        records,
        counters,
        0,
    ))
}

/// `Σ p_k S(ρ_k) ≤ S(Σ p_k ρ_k)` for random ensembles of size 2–5 (or
/// `ensemble_size`).
pub fn holevo(cfg: &CampaignConfig) -> Result<Report, CliError> {
    let (records, counters) = run(cfg, |trial, n, rng| {
        let mut out = TrialOutcome::default();
        let k = cfg.ensemble_size.unwrap_or_else(|| rng.random_range(2..=5));
        let weights = random_weights(k, rng);
        let states: Vec<_> = (0..k).map(|_| random_density(n, rng)).collect();
        let singular = states.iter().any(is_singular);
        let ens = OutcomeEnsemble::new(weights.into_iter().zip(states.into_iter().map(Some)).collect())?;
        let average = ensemble_average(&ens)?;
        for f in &cfg.functionals {
            if singular && matches!(f, EntropyFunctional::LogDet) {
                out.count("skipped-singular");
                continue;
            }
            let check = check_holevo(&ens, f)?;
            let (lhs, rhs) = (expected_entropy(&ens, f)?, entropy(&average, f)?);
            let mut r =
                MarginRecord::new(trial, n, f.to_string(), "holevo").inequality(lhs, rhs, margin(lhs, rhs), cfg.tol);
            r.violation |= !check.pass;
            out.records.push(r);
        }
        Ok(out)
    })?;
    Ok(Report::build(
        "holevo",
        Some(cfg.seed),
        cfg.flags(),
        records,
        counters,
        0,
    ))
}

/// Lüders projection against decoherence by the block Gram matrix, on random
/// diagonal partitions.
pub fn luders_equiv(cfg: &CampaignConfig) -> Result<Report, CliError> {
    let (records, counters) = run(cfg, |trial, n, rng| {
        let blocks = rng.random_range(1..=n);
        let ps = random_diagonal_partition(n, blocks, rng)?;
        let rho = random_density(n, rng);
        let direct = luders(&rho, &ps)?;
        let schur = decohere(&rho, &gram_from_projectors(&ps)?)?;
        let gap = direct.matrix().max_abs_diff(schur.matrix());
        let r =
            MarginRecord::new(trial, n, NO_FUNCTIONAL, "luders").inequality(gap, IDENTITY_TOL, IDENTITY_TOL - gap, 0.0);
        Ok(TrialOutcome {
            records: vec![r],
            counters: vec![format!("blocks-{blocks}")],
        })
    })?;
    Ok(Report::build(
        "luders-equiv",
        Some(cfg.seed),
        cfg.flags(),
        records,
        counters,
        0,
    ))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol
}

fn matrix_json(m: &ComplexMatrix) -> serde_json::Value {
    serde_json::to_value(m).expect("matrices serialize")
}

/// Reference values for a counterexample: probabilities, the live outcome
/// state, input and outcome spectra, and which side breaks.
struct Expected {
    probabilities: Vec<f64>,
    outcome: ComplexMatrix,
    input_spectrum: Vec<f64>,
    outcome_spectrum: Vec<f64>,
    violated: &'static str,
    purity_preserving: bool,
}

fn expected(which: u8) -> Expected {
    match which {
        1 => Expected {
            probabilities: vec![0.5, 0.5, 0.0, 0.0],
            outcome: ComplexMatrix::from_diagonal(&[0.5, 0.5]),
            input_spectrum: vec![1.0, 0.0],
            outcome_spectrum: vec![0.5, 0.5],
            violated: "left",
            purity_preserving: false,
        },
        _ => Expected {
            probabilities: vec![0.5, 0.5],
            outcome: ComplexMatrix::from_diagonal(&[1.0, 0.0]),
            input_spectrum: vec![0.5, 0.5],
            outcome_spectrum: vec![1.0, 0.0],
            violated: "right",
            purity_preserving: true,
        },
    }
}

/// The POVM and input state of a reference counterexample.
pub fn counterexample_povm(which: u8) -> Result<(Povm, DensityMatrix), CliError> {
    match which {
        1 => Ok(counterexample_1()),
        2 => Ok(counterexample_2()),
        _ => Err(CliError::Usage(format!("no counterexample {which}; choose 1 or 2"))),
    }
}

/// Reproduces counterexample `which`. Passing means the reference values are
/// reproduced, including the expected inequality violation; the violation
/// itself is recorded but not counted as a failure.
pub fn counterexample(which: u8, functionals: &[EntropyFunctional]) -> Result<Report, CliError> {
    let (m, rho) = counterexample_povm(which)?;
    let want = expected(which);
    let ens = apply_povm(&rho, &m)?;
    let average = ensemble_average(&ens)?;
    let mut checks: BTreeMap<String, bool> = BTreeMap::new();

    let probs = ens.probabilities();
    checks.insert(
        "probabilities".into(),
        probs.len() == want.probabilities.len()
            && probs
                .iter()
                .zip(&want.probabilities)
                .all(|(a, b)| close(*a, *b, REPRODUCTION_TOL)),
    );
    checks.insert(
        "outcome-states".into(),
        ens.outcomes()
            .iter()
            .zip(&want.probabilities)
            .all(|(o, &p)| match &o.state {
                Some(s) => p > 0.0 && s.matrix().max_abs_diff(&want.outcome) <= REPRODUCTION_TOL,
                None => p == 0.0,
            }),
    );
    let basis = purity_preserving_basis(&m, PPPOVM_TOL);
    checks.insert("classification".into(), basis.is_some() == want.purity_preserving);

    let mut records = Vec::new();
    let mut entropies = serde_json::Map::new();
    for f in functionals {
        let name = f.to_string();
        let before = entropy(&rho, f)?;
        let after = expected_entropy(&ens, f)?;
        let mixed = entropy(&average, f)?;
        let want_before = entropy_of_spectrum(&Spectrum::new(want.input_spectrum.clone())?, f)?;
        let want_after = entropy_of_spectrum(&Spectrum::new(want.outcome_spectrum.clone())?, f)?;
        checks.insert(
            format!("{name}/entropy-before"),
            close(before, want_before, REPRODUCTION_TOL),
        );
        checks.insert(
            format!("{name}/entropy-after"),
            close(after, want_after, REPRODUCTION_TOL),
        );

        let left =
            MarginRecord::new(0, rho.dim(), &name, "left").inequality(after, before, margin(after, before), 1e-9);
        let right =
            MarginRecord::new(0, rho.dim(), &name, "right").inequality(before, mixed, margin(before, mixed), 1e-9);
        let flagged = if left.violation {
            "left"
        } else if right.violation {
            "right"
        } else {
            "none"
        };
        checks.insert(format!("{name}/violated-side"), flagged == want.violated);
        entropies.insert(
            name,
            json!({ "before": before, "expected_after": after, "of_average": mixed, "violated": flagged }),
        );
        records.extend([left, right]);
    }

    let failed = checks.values().filter(|ok| !**ok).count();
    let details = json!({
        "which": which,
        "probabilities": probs,
        "outcomes": ens.outcomes().iter().map(|o| o.state.as_ref().map(|s| matrix_json(s.matrix()))).collect::<Vec<_>>(),
        "entropies": entropies,
        "classification": if basis.is_some() { "purity-preserving" } else { "general" },
        "checks": checks,
    });
    let mut report = Report::build(
        "counterexample",
        None,
        json!({ "which": which, "entropy": functionals.iter().map(ToString::to_string).collect::<Vec<_>>() }),
        records,
        BTreeMap::new(),
        0,
    );
    // The inequality breaks by design; only reproduction mismatches count.
    report.hard_violations = failed;
    report.pass = failed == 0;
    report.counters.insert("violations".into(), failed as u64);
    Ok(report.with_details(details))
}

/// Classifies a POVM document. Purity-preserving measurements report the
/// recovered ancilla basis; whether one is realizable by a probing is left
/// undecided, while general ones cannot be.
pub fn povm_classify(text: &str) -> Result<Report, CliError> {
    let m: Povm = serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let basis = purity_preserving_basis(&m, PPPOVM_TOL);
    let details = match &basis {
        Some(b) => json!({
            "classification": "purity-preserving",
            "probing_realizable": "unknown",
            "ancilla_basis": b.iter().map(|v| v.amplitudes().iter().map(|a| [a.re, a.im]).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }),
        None => json!({ "classification": "general", "probing_realizable": "no" }),
    };
    let flags =
        json!({ "object_dim": m.object_dim(), "ancilla_dim": m.ancilla_dim(), "outcomes": m.projectors().len() });
    Ok(Report::build("povm-classify", None, flags, Vec::new(), BTreeMap::new(), 0).with_details(details))
}

/// Purity preservation of random purity-preserving measurements on pure
/// inputs, then the observation-side inequality on mixed inputs.
///
/// Object dimension 2–3, ancilla dimension 2–3, drawn per measurement.
pub fn pppovm_campaign(
    seed: u64,
    povms: usize,
    pure_inputs: usize,
    mixed_inputs: usize,
    tol: f64,
) -> Result<Report, CliError> {
    let root = SeedStream::new(seed);
    let functionals = EntropyFunctional::builtins();
    let purity_part: Vec<TrialOutcome> = (0..povms as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = root.trial(i).rng();
            let (n, d) = (rng.random_range(2..=3), rng.random_range(2..=3));
            let m = random_pppovm(n, d, &mut rng);
            let mut out = TrialOutcome::default();
            for _ in 0..pure_inputs {
                let rho = density_from_pure(&random_pure(n, &mut rng));
                let worst = apply_povm(&rho, &m)?
                    .live()
                    .map(|(_, s)| (purity(s) - 1.0).abs())
                    .fold(0.0, f64::max);
                out.records
                    .push(MarginRecord::new(i, n, NO_FUNCTIONAL, "purity").inequality(worst, tol, tol - worst, 0.0));
            }
            Ok(out)
        })
        .collect::<Result<_, CliError>>()?;
    let offset = povms as u64;
    let left_part: Vec<TrialOutcome> = (0..mixed_inputs as u64)
        .into_par_iter()
        .map(|j| {
            let trial = offset + j;
            let mut rng = root.trial(trial).rng();
            let (n, d) = (rng.random_range(2..=3), rng.random_range(2..=3));
            let m = random_pppovm(n, d, &mut rng);
            let rho = random_density(n, &mut rng);
            let ens = apply_povm(&rho, &m)?;
            let mut out = TrialOutcome::default();
            for f in &functionals {
                if is_singular(&rho) && matches!(f, EntropyFunctional::LogDet) {
                    out.count("skipped-singular");
                    continue;
                }
                let (low, mid) = (expected_entropy(&ens, f)?, entropy(&rho, f)?);
                out.records
                    .push(MarginRecord::new(trial, n, f.to_string(), "left").inequality(
                        low,
                        mid,
                        margin(low, mid),
                        1e-9,
                    ));
            }
            Ok(out)
        })
        .collect::<Result<_, CliError>>()?;
    let mut records = Vec::new();
    let mut counters = BTreeMap::new();
    for o in purity_part.into_iter().chain(left_part) {
        records.extend(o.records);
        for c in &o.counters {
            bump(&mut counters, c);
        }
    }
    let flags = json!({ "povms": povms, "pure_inputs": pure_inputs, "mixed_inputs": mixed_inputs, "tol": tol });
    Ok(Report::build("pppovm", Some(seed), flags, records, counters, 0))
}

/// Curated mixed, nondegenerate states whose off-diagonal entries all have
/// magnitude at least 0.1: half a phased uniform superposition plus half a
/// distinct diagonal.
pub fn curated_states() -> Vec<DensityMatrix> {
    [2usize, 3, 4]
        .iter()
        .map(|&n| {
            let amp: Vec<_> = (0..n)
                .map(|k| c64((0.7 * k as f64).cos(), (0.7 * k as f64).sin()).unscale((n as f64).sqrt()))
                .collect();
            let psi = ComplexMatrix::outer(&amp, &amp).scale(0.5);
            let weights: Vec<f64> = (1..=n).map(|k| k as f64).collect();
            let total: f64 = weights.iter().sum();
            let diag: Vec<f64> = weights.iter().map(|w| 0.5 * w / total).collect();
            DensityMatrix::new((&psi + &ComplexMatrix::from_diagonal(&diag)).hermitian_part())
                .expect("convex mixture of states")
        })
        .collect()
}

/// Strictness on the curated set with `S = I` (so `E = S S† = I`): both
/// inequalities must hold with margin above `STRICT_MARGIN`.
pub fn strictness_spot_checks() -> Result<Report, CliError> {
    let functionals = EntropyFunctional::builtins();
    let mut records = Vec::new();
    for (i, rho) in curated_states().iter().enumerate() {
        let s = ProbingMatrix::new(ComplexMatrix::identity(rho.dim()))?;
        let out = evaluate_s_theorem(i as u64, rho, &s, &functionals, 1e-9)?;
        records.extend(
            out.records
                .into_iter()
                .filter(|r| r.side != "consistency")
                .map(|mut r| {
                    r.violation = r.trivial || r.margin.is_nan() || r.margin <= STRICT_MARGIN;
                    r
                }),
        );
    }
    Ok(Report::build(
        "strictness",
        None,
        json!({ "strict_margin": STRICT_MARGIN }),
        records,
        BTreeMap::new(),
        0,
    ))
}
