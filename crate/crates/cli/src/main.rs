//! `nilqc` command-line front end. Every command prints one JSON report.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use nilqc::conformal::{blowup_demo, invariant_structure, SimilarityElement};
use nilqc::corpus;
use nilqc::field::{format_rational, int, ratio, rational_to_f64};
use nilqc::heintze::{preserved_sequence, DiagonalHeintzePair};
use nilqc::io::{from_json, GroupSpec, PairSpec, PointsSpec, RingSpec};
use nilqc::iso_aut::{
    enumerate_finite_ia, identity_component_dim, is_isometric_graded_auto, no_conjugation_verdict, ExactInnerProduct,
};
use nilqc::metric::{homogeneity_suite, homogeneous_dimension, pansu_differential, quasi_triangle_constant, AffineMap, GroupMap, QuasiNorm};
use nilqc::modulus::{
    inclusion_check, padding_polynomials, padding_violations, segment_family_modulus, upper_volume_bound, volume_ratio, Padding,
};
use nilqc::spd::{circumcenter, distance, SpdPoint};
use nilqc::surd::Surd;
use nilqc::{Error, Matrix, Rational};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "nilqc", version, about = "Quasiconformal group computations on nilpotent Lie groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON input file.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Bundled example (pair or group name) used when no input file is given.
    #[arg(long, global = true)]
    example: Option<String>,
    /// Named Gram matrix inside the pair file.
    #[arg(long, global = true)]
    gram: Option<String>,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 1000)]
    samples: usize,
    #[arg(long = "word-cap", global = true, default_value_t = 6)]
    word_cap: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also print a one-line summary to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Antisymmetry, Jacobi and nilpotency of a structure-constant table.
    Validate,
    /// Layers of the derivation, Carnot type and homogeneous dimension.
    Analyze,
    /// Preserved subgroup flag.
    Sequence,
    /// Homogeneity and left invariance of the quasi-distance.
    MetricCheck,
    /// Minimax center of points in SL(m)/SO(m).
    Circumcenter,
    /// Invariant conformal structure of a finite group at sample points.
    Invariant,
    /// Isometric graded automorphisms: enumeration or identity-component dimension.
    IsoAut,
    /// Both isometry groups of the bundled H×H example and the conjugation verdict.
    Counterexample,
    /// Box-ring modulus bounds, padding polynomials and inclusion checks.
    ModulusDemo,
    /// Dilatation along a blow-up sequence and a numerical Pansu differential.
    BlowupDemo,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Analyze => "analyze",
            Command::Sequence => "sequence",
            Command::MetricCheck => "metric-check",
            Command::Circumcenter => "circumcenter",
            Command::Invariant => "invariant",
            Command::IsoAut => "iso-aut",
            Command::Counterexample => "counterexample",
            Command::ModulusDemo => "modulus-demo",
            Command::BlowupDemo => "blowup-demo",
        }
    }
}

#[derive(Serialize)]
struct Assertion {
    name: String,
    pass: bool,
    tolerance: f64,
    residual: f64,
}

#[derive(Default)]
struct Checks(Vec<Assertion>);

impl Checks {
    /// `residual ≤ tolerance`.
    fn bound(&mut self, name: &str, residual: f64, tolerance: f64) {
        self.0.push(Assertion { name: name.into(), pass: residual <= tolerance, tolerance, residual });
    }

    /// Exact predicate; residual is 0 on success and 1 on failure.
    fn exact(&mut self, name: &str, ok: bool) {
        self.0.push(Assertion { name: name.into(), pass: ok, tolerance: 0.0, residual: if ok { 0.0 } else { 1.0 } });
    }
}

/// Input problems exit with 2; everything else is a report.
struct InputError(String);

impl From<Error> for InputError {
    fn from(e: Error) -> Self {
        InputError(e.to_string())
    }
}

type Outcome = Result<(Value, Checks), InputError>;

fn read_input(cli: &Cli) -> Result<Option<String>, InputError> {
    match &cli.input {
        Some(path) => std::fs::read_to_string(path).map(Some).map_err(|e| InputError(format!("{}: {e}", path.display()))),
        None => Ok(None),
    }
}

fn input_label(cli: &Cli) -> Value {
    match (&cli.input, &cli.example) {
        (Some(p), _) => json!({ "file": p.display().to_string() }),
        (None, Some(e)) => json!({ "example": e }),
        (None, None) => Value::Null,
    }
}

fn load_pair_spec(cli: &Cli) -> Result<PairSpec, InputError> {
    if let Some(text) = read_input(cli)? {
        return Ok(from_json(&text)?);
    }
    match &cli.example {
        Some(name) => Ok(corpus::example(name)?),
        None => Err(InputError(format!("--input or --example required (bundled: {})", corpus::example_names().join(", ")))),
    }
}

fn rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn surd_rows(m: &Matrix<Surd>) -> Vec<Vec<String>> {
    m.rows_vec().iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
}

fn validate(cli: &Cli) -> Outcome {
    let spec = load_pair_spec(cli)?;
    let alg = spec.algebra()?;
    let report = alg.validate()?;
    if !report.antisymmetry_ok || !report.jacobi_ok {
        return Err(InputError(format!(
            "not a Lie algebra: antisymmetry violations {:?}, Jacobi violations {:?}",
            report.antisymmetry_violations, report.jacobi_violations
        )));
    }
    let mut checks = Checks::default();
    checks.exact("nilpotent", report.nilpotency_class.is_some());
    Ok((json!({ "dim": alg.dim(), "validation": report }), checks))
}

fn layers_json(pair: &DiagonalHeintzePair) -> Value {
    let layers: Vec<Value> = pair
        .eigenvalues()
        .iter()
        .zip(pair.layers())
        .map(|(l, s)| json!({ "eigenvalue": format_rational(l), "dim": s.dim(), "basis": s.basis().iter().map(|b| rationals(b)).collect::<Vec<_>>() }))
        .collect();
    Value::Array(layers)
}

fn analyze(cli: &Cli) -> Outcome {
    let pair = load_pair_spec(cli)?.pair()?;
    let n = pair.dim();
    let sum = pair.projectors().iter().fold(Matrix::<Rational>::zeros(n, n), |acc, p| acc.add(p));
    let mut checks = Checks::default();
    checks.exact("projectors_sum_to_identity", sum == Matrix::identity(n));
    checks.exact("derivation", pair.algebra().derivation_defect(pair.derivation()).is_none());
    Ok((
        json!({
            "dim": n,
            "nilpotency_class": pair.algebra().nilpotency_class(),
            "layers": layers_json(&pair),
            "carnot_type": pair.is_carnot_type(),
            "carnot_degrees": pair.carnot_degrees(),
            "homogeneous_dimension": homogeneous_dimension(&pair).ok(),
        }),
        checks,
    ))
}

fn sequence(cli: &Cli) -> Outcome {
    let pair = load_pair_spec(cli)?.pair()?;
    let flag = preserved_sequence(&pair)?;
    let mut checks = Checks::default();
    checks.exact("flag_verified", flag.verify(&pair));
    let lows: Vec<String> = flag.steps.iter().map(|s| format_rational(&s.smallest_eigenvalue)).collect();
    Ok((json!({ "dims": flag.dims(), "members": flag.report(), "smallest_eigenvalues": lows }), checks))
}

fn metric_check(cli: &Cli) -> Outcome {
    let spec = load_pair_spec(cli)?;
    let pair = spec.pair()?;
    let ip = spec.rational_inner_product(&pair, cli.gram.as_deref())?;
    let qn = QuasiNorm::new(&pair, &ip);
    let h = homogeneity_suite(&qn, cli.samples, cli.seed);
    let triangle = quasi_triangle_constant(&qn, cli.samples, cli.seed);
    let mut checks = Checks::default();
    checks.bound("dilation_homogeneity", h.dilation_residual, 1e-12);
    checks.bound("left_invariance", h.left_invariance_residual, 1e-12);
    Ok((json!({ "homogeneity": h, "quasi_triangle_constant": triangle }), checks))
}

fn circumcenter_cmd(cli: &Cli) -> Outcome {
    let spec: PointsSpec = match read_input(cli)? {
        Some(text) => from_json(&text)?,
        None => corpus::points()?,
    };
    let points = spec.parse()?;
    let c = circumcenter(&points, cli.tol)?;
    let farthest = points.iter().map(|p| distance(&c.center, p)).fold(0.0f64, f64::max);
    let mut checks = Checks::default();
    checks.bound("radius_matches_farthest_point", (farthest - c.radius).abs(), 1e-12);
    Ok((json!({ "center": c.center.rows(), "radius": c.radius, "iterations": c.iterations }), checks))
}

fn invariant(cli: &Cli) -> Outcome {
    let specs: Vec<GroupSpec> = match (read_input(cli)?, &cli.example) {
        (Some(text), _) => vec![from_json(&text)?],
        (None, Some(name)) => vec![corpus::group(name)?],
        (None, None) => corpus::group_names().into_iter().map(corpus::group).collect::<Result<_, _>>()?,
    };
    let mut checks = Checks::default();
    let mut groups = Vec::new();
    for spec in &specs {
        let group = spec.group()?;
        let m = group.pair().layers()[0].dim();
        let mu0 = move |_: &[f64]| SpdPoint::identity(m);
        let mut points = Vec::new();
        let mut worst = 0.0f64;
        for x in &spec.points {
            let p = invariant_structure(&group, &mu0, x, cli.word_cap, cli.tol).map_err(|e| match e {
                Error::OrbitNotStable { .. } => InputError(format!("{e}; raise --word-cap")),
                e => e.into(),
            })?;
            worst = worst.max(p.residual);
            points.push(json!({ "x": p.x, "mu": p.mu.rows(), "radius": p.radius, "orbit_size": p.orbit_size, "residual": p.residual }));
        }
        let name = spec.name.clone().unwrap_or_else(|| "group".into());
        checks.bound(&format!("{name}: invariance"), worst, 1e-8);
        groups.push(json!({ "name": name, "points": points }));
    }
    Ok((json!({ "groups": groups }), checks))
}

fn exact_ip(spec: &PairSpec, pair: &DiagonalHeintzePair, key: Option<&str>) -> Result<ExactInnerProduct, InputError> {
    match key {
        Some(k) => Ok(spec.exact_inner_product(pair, k)?),
        None => Ok(ExactInnerProduct::standard(pair)),
    }
}

fn iso_aut(cli: &Cli) -> Outcome {
    let spec = load_pair_spec(cli)?;
    let pair = spec.pair()?;
    let ip = exact_ip(&spec, &pair, cli.gram.as_deref())?;
    let dim = identity_component_dim(&pair, &ip);
    let mut checks = Checks::default();
    if dim > 0 {
        return Ok((json!({ "component_dim": dim, "finite": false }), checks));
    }
    let report = match enumerate_finite_ia(&pair, &ip) {
        Ok(r) => r,
        Err(e @ Error::Unresolved(_)) => return Ok((json!({ "component_dim": dim, "finite": true, "unresolved": e.to_string() }), checks)),
        Err(e) => return Err(e.into()),
    };
    let mut all_iso = true;
    for a in &report.elements {
        all_iso &= is_isometric_graded_auto(&pair, &ip, a)?;
    }
    checks.exact("elements_are_isometric_graded_automorphisms", all_iso);
    checks.exact("closed_under_composition", report.identity().is_some());
    Ok((
        json!({
            "component_dim": dim,
            "finite": true,
            "order": report.order(),
            "group": report.group,
            "elements": report.elements.iter().map(surd_rows).collect::<Vec<_>>(),
            "table": report.table,
        }),
        checks,
    ))
}

fn counterexample(_cli: &Cli) -> Outcome {
    let spec = corpus::example("hxh")?;
    let pair = spec.pair()?;
    let d1 = spec.exact_inner_product(&pair, "d1")?;
    let d2 = spec.exact_inner_product(&pair, "d2")?;
    let verdict = no_conjugation_verdict(&pair, &d1, &d2);
    let report = enumerate_finite_ia(&pair, &d2)?;
    let closed = corpus::hxh_closed_form(&pair)?;
    let matched = closed.iter().filter(|a| report.contains(a)).count();
    let mut checks = Checks::default();
    checks.exact("d1_component_dim_is_2", verdict.d1.component_dim == 2);
    checks.exact("d2_order_is_16", report.order() == 16);
    checks.exact("d2_group_is_(Z2^3):Z2", report.group == "(Z2^3):Z2");
    checks.exact("d2_matches_closed_form", matched == 16 && report.order() == 16);
    checks.exact("verdict_impossible", verdict.verdict == nilqc::iso_aut::Verdict::Impossible);
    Ok((
        json!({
            "d1": verdict.d1,
            "d2": verdict.d2,
            "verdict": verdict.verdict,
            "closed_form_matches": matched,
            "d2_elements": report.elements.iter().map(surd_rows).collect::<Vec<_>>(),
            "d2_table": report.table,
        }),
        checks,
    ))
}

fn modulus_demo(cli: &Cli) -> Outcome {
    let spec: RingSpec = match read_input(cli)? {
        Some(text) => from_json(&text)?,
        None => corpus::ring()?,
    };
    let ring = spec.ring()?;
    let q = ring.homogeneous_dimension() as i32;
    let lambda_q: Rational = num_traits::pow::Pow::pow(ring.lambda11(), q);
    let lower = segment_family_modulus(&ring);
    let zero = Padding::zero(&ring);
    let upper_zero = upper_volume_bound(&ring, &lambda_q, &zero);
    let polys = padding_polynomials(&ring);
    let padding = Padding::from_claim(&ring, &polys);
    let upper_padded = upper_volume_bound(&ring, &lambda_q, &padding);
    let violations = padding_violations(&ring, &polys, cli.samples, cli.seed);
    let padded = inclusion_check(&ring, &padding, cli.samples, cli.seed);
    let unpadded = inclusion_check(&ring, &zero, cli.samples, cli.seed);
    let mut checks = Checks::default();
    checks.exact("lower_equals_upper_without_padding", lower.lower_bound == upper_zero);
    checks.exact("padding_has_no_constant_term", polys.iter().all(|p| !p.has_constant_term()));
    checks.bound("padding_bound_violations", violations as f64, 0.0);
    checks.exact("padded_inclusion_holds", padded.holds);
    Ok((
        json!({
            "homogeneous_dimension": q,
            "segment_modulus": format_rational(&lower.per_family),
            "lower_bound": format_rational(&lower.lower_bound),
            "upper_bound_zero_padding": format_rational(&upper_zero),
            "upper_bound_padded": format_rational(&upper_padded),
            "volume_ratio_padded": rational_to_f64(&volume_ratio(&ring, &lambda_q, &padding)),
            "padding_polynomials": polys,
            "padding_samples": cli.samples,
            "padding_violations": violations,
            "inclusion_padded": padded,
            "inclusion_zero_padding": unpadded,
        }),
        checks,
    ))
}

/// `(x, y, z) ↦ (x, y + x², z + x³/6)`, a contact map of the Heisenberg group.
fn shear(v: &[f64]) -> Vec<f64> {
    vec![v[0], v[1] + v[0] * v[0], v[2] + v[0].powi(3) / 6.0]
}

fn blowup(_cli: &Cli) -> Outcome {
    let pair = Arc::new(corpus::example("heisenberg")?.pair()?);
    let alg = pair.algebra().clone();
    let f_lin = Matrix::from_rows(vec![vec![int(2), int(1), int(0)], vec![int(0), int(1), int(0)], vec![int(0), int(0), int(2)]])?;
    let f = AffineMap { translation: vec![int(1), ratio(-1, 2), int(0)], linear: f_lin.clone() };
    let rot = Matrix::from_rows(vec![vec![int(0), int(-1), int(0)], vec![int(1), int(0), int(0)], vec![int(0), int(0), int(1)]])?;
    let g = SimilarityElement::new(pair.clone(), vec![int(0); 3], int(1), rot)?.to_affine();
    let ss: Vec<f64> = (0..5).map(f64::from).collect();
    let hs = vec![f.clone(); ss.len()];
    let samples = vec![vec![0.0, 0.0, 0.0], vec![0.5, -1.0, 2.0]];
    let steps = blowup_demo(&pair, &hs, &ss, &g, &samples)?;

    // g = F ∘ shear ∘ F⁻¹ has Pansu differential L·S'(F⁻¹p)·L⁻¹.
    let ff = f.to_f64();
    let finv = f.inverse()?.to_f64();
    let alg2 = alg.clone();
    let conj = GroupMap::function(move |x: &[f64]| ff.apply(&alg2, &shear(&finv.apply(&alg2, x))));
    let p = vec![0.3, -0.7, 0.2];
    let t_list = [0.2, 0.1, 0.05, 0.025];
    let est = pansu_differential(&pair, &conj, &p, &t_list, 1e-8)?;
    let q = f.inverse()?.to_f64().apply(&alg, &p);
    let s_diff = Matrix::from_rows(vec![vec![1.0, 0.0, 0.0], vec![2.0 * q[0], 1.0, 0.0], vec![0.0, 0.0, 1.0]])?;
    let l = f_lin.to_f64();
    let linv = f_lin.inverse()?.to_f64();
    let expected = l.mul(&s_diff).mul(&linv);
    let err = est.limit.iter().enumerate().flat_map(|(r, row)| row.iter().enumerate().map(move |(c, x)| (r, c, *x))).fold(0.0f64, |acc, (r, c, x)| acc.max((x - expected.get(r, c)).abs()));
    let k_spread = steps.iter().flat_map(|s| s.dilatations.iter()).fold((f64::INFINITY, 0.0f64), |(lo, hi), &k| (lo.min(k), hi.max(k)));
    let mut checks = Checks::default();
    checks.bound("dilatation_constant_along_sequence", k_spread.1 - k_spread.0, 1e-9);
    checks.bound("pansu_limit_matches_closed_form", err, 1e-8);
    checks.bound("pansu_cauchy_estimate", est.cauchy_estimate, 1e-8);
    Ok((
        json!({
            "blowup_steps": steps,
            "pansu": { "point": p, "estimate": est, "expected": expected.rows_vec() },
        }),
        checks,
    ))
}

fn run(cli: &Cli) -> Outcome {
    match cli.command {
        Command::Validate => validate(cli),
        Command::Analyze => analyze(cli),
        Command::Sequence => sequence(cli),
        Command::MetricCheck => metric_check(cli),
        Command::Circumcenter => circumcenter_cmd(cli),
        Command::Invariant => invariant(cli),
        Command::IsoAut => iso_aut(cli),
        Command::Counterexample => counterexample(cli),
        Command::ModulusDemo => modulus_demo(cli),
        Command::BlowupDemo => blowup(cli),
    }
}

fn emit(cli: &Cli, body: &Value) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(body).expect("report serializes") + "\n";
    match &cli.out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = json!({
        "seed": cli.seed,
        "tol": cli.tol,
        "samples": cli.samples,
        "word_cap": cli.word_cap,
        "gram": cli.gram,
        "input": input_label(&cli),
    });
    let (body, code) = match run(&cli) {
        Ok((result, checks)) => {
            let pass = checks.0.iter().all(|a| a.pass);
            let body = json!({
                "command": cli.command.name(),
                "config": config,
                "status": if pass { "pass" } else { "fail" },
                "assertions": checks.0,
                "result": result,
            });
            (body, if pass { 0 } else { 1 })
        }
        Err(InputError(msg)) => (json!({ "command": cli.command.name(), "config": config, "status": "input-error", "error": msg }), 2),
    };
    if cli.verbose {
        eprintln!("{}: {}", cli.command.name(), body["status"]);
    }
    if let Err(e) = emit(&cli, &body) {
        eprintln!("cannot write report: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
